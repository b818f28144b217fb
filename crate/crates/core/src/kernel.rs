//! Squared-exponential covariance and the physics-derived cross-covariances.
//!
//! Every physical field of an Euler-Bernoulli beam is a linear differential
//! operator applied to the deflection `u`. With a squared-exponential prior on
//! `u`, the covariance between any two fields reduces to a mixed partial
//! derivative of the base kernel, evaluated here in closed form through a
//! table of probabilists' Hermite polynomials.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest derivative order per kernel argument.
pub const MAX_ORDER: usize = 4;

/// Coefficients of the probabilists' Hermite polynomials `He_k`, k = 0..=8,
/// indexed by ascending power. `d^k/dτ^k exp(-τ²/2) = (-1)^k He_k(τ) exp(-τ²/2)`.
const HERMITE: [[i64; 9]; 9] = [
    [1, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 1, 0, 0, 0, 0, 0, 0, 0],
    [-1, 0, 1, 0, 0, 0, 0, 0, 0],
    [0, -3, 0, 1, 0, 0, 0, 0, 0],
    [3, 0, -6, 0, 1, 0, 0, 0, 0],
    [0, 15, 0, -10, 0, 1, 0, 0, 0],
    [-15, 0, 45, 0, -15, 0, 1, 0, 0],
    [0, -105, 0, 105, 0, -21, 0, 1, 0],
    [105, 0, -420, 0, 210, 0, -28, 0, 1],
];

#[inline]
fn hermite(k: usize, tau: f64) -> f64 {
    HERMITE[k][..=k]
        .iter()
        .rev()
        .fold(0.0, |acc, &c| acc * tau + c as f64)
}

/// Hyperparameters of the squared-exponential deflection kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    /// Amplitude standard deviation (units of deflection).
    pub sigma_s: f64,
    /// Length scale (m).
    pub ell: f64,
}

impl KernelParams {
    pub fn new(sigma_s: f64, ell: f64) -> Result<Self> {
        let params = KernelParams { sigma_s, ell };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_s.is_finite() && self.sigma_s > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "kernel sigma_s must be finite and positive, got {}",
                self.sigma_s
            )));
        }
        if !(self.ell.is_finite() && self.ell > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "kernel length scale must be finite and positive, got {}",
                self.ell
            )));
        }
        Ok(())
    }
}

/// The six physical fields of the beam model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QuantityKind {
    Deflection,
    Rotation,
    Strain,
    Moment,
    Shear,
    Load,
}

impl QuantityKind {
    pub const ALL: [QuantityKind; 6] = [
        QuantityKind::Deflection,
        QuantityKind::Rotation,
        QuantityKind::Strain,
        QuantityKind::Moment,
        QuantityKind::Shear,
        QuantityKind::Load,
    ];

    /// Short tag used in files: `u`, `r`, `eps`, `m`, `v`, `q`.
    pub fn tag(self) -> &'static str {
        match self {
            QuantityKind::Deflection => "u",
            QuantityKind::Rotation => "r",
            QuantityKind::Strain => "eps",
            QuantityKind::Moment => "m",
            QuantityKind::Shear => "v",
            QuantityKind::Load => "q",
        }
    }

    /// Derivative order and coefficient mapping deflection to this field.
    pub fn operator(self) -> FieldOperator {
        use OperatorCoefficient::*;
        let (derivative_order, coefficient, sign) = match self {
            QuantityKind::Deflection => (0, Unit, 1.0),
            QuantityKind::Rotation => (1, Unit, 1.0),
            QuantityKind::Strain => (2, FiberDistance, -1.0),
            QuantityKind::Moment => (2, Stiffness, -1.0),
            QuantityKind::Shear => (3, Stiffness, -1.0),
            QuantityKind::Load => (4, Stiffness, 1.0),
        };
        FieldOperator {
            derivative_order,
            coefficient,
            sign,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for QuantityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for QuantityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "u" => Ok(QuantityKind::Deflection),
            "r" => Ok(QuantityKind::Rotation),
            "eps" => Ok(QuantityKind::Strain),
            "m" => Ok(QuantityKind::Moment),
            "v" => Ok(QuantityKind::Shear),
            "q" => Ok(QuantityKind::Load),
            other => Err(Error::InvalidArgument(format!(
                "unknown quantity kind '{other}' (expected one of u, r, eps, m, v, q)"
            ))),
        }
    }
}

/// Scalar factor multiplying the derivative in a [`FieldOperator`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorCoefficient {
    Unit,
    /// Distance from the neutral axis to the measured fiber.
    FiberDistance,
    /// Bending stiffness EI.
    Stiffness,
}

/// Linear operator `sign · coefficient · d^order/dx^order` applied to deflection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldOperator {
    pub derivative_order: usize,
    pub coefficient: OperatorCoefficient,
    pub sign: f64,
}

/// Per-kind sign overrides. Defaults give `r = u'`, `ε = -c u''`,
/// `m = -EI u''`, `v = -EI u'''`, `q = EI u''''`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignConvention {
    signs: [f64; 6],
}

impl Default for SignConvention {
    fn default() -> Self {
        let mut signs = [1.0; 6];
        for kind in QuantityKind::ALL {
            signs[kind.index()] = kind.operator().sign;
        }
        SignConvention { signs }
    }
}

impl SignConvention {
    pub fn sign(&self, kind: QuantityKind) -> f64 {
        self.signs[kind.index()]
    }

    /// Override the sign of one field. Only `±1` is accepted.
    pub fn with_sign(mut self, kind: QuantityKind, sign: f64) -> Result<Self> {
        if sign != 1.0 && sign != -1.0 {
            return Err(Error::InvalidArgument(format!(
                "field sign must be +1 or -1, got {sign}"
            )));
        }
        self.signs[kind.index()] = sign;
        Ok(self)
    }
}

/// Physical constants that turn derivatives of `u` into beam fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamPhysics {
    pub ei: f64,
    pub fiber_distance: Option<f64>,
    pub signs: SignConvention,
}

impl BeamPhysics {
    pub fn new(ei: f64, fiber_distance: Option<f64>) -> Self {
        BeamPhysics {
            ei,
            fiber_distance,
            signs: SignConvention::default(),
        }
    }

    /// Full scalar factor `sign · coefficient` of the operator for `kind`.
    pub fn factor(&self, kind: QuantityKind) -> Result<f64> {
        let magnitude = match kind.operator().coefficient {
            OperatorCoefficient::Unit => 1.0,
            OperatorCoefficient::Stiffness => {
                if !(self.ei.is_finite() && self.ei > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "bending stiffness must be finite and positive, got {}",
                        self.ei
                    )));
                }
                self.ei
            }
            OperatorCoefficient::FiberDistance => match self.fiber_distance {
                Some(c) if c.is_finite() && c > 0.0 => c,
                Some(c) => {
                    return Err(Error::InvalidArgument(format!(
                        "fiber distance must be finite and positive, got {c}"
                    )))
                }
                None => {
                    return Err(Error::Config(
                        "strain requires a fiber distance c to be configured".into(),
                    ))
                }
            },
        };
        Ok(self.signs.sign(kind) * magnitude)
    }
}

/// `∂^{m+n} k_uu / ∂x^m ∂x'^n` at `(x, x')`.
pub fn se_kernel_deriv(
    params: &KernelParams,
    m: usize,
    n: usize,
    x: f64,
    x_prime: f64,
) -> Result<f64> {
    if !(x.is_finite() && x_prime.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "kernel positions must be finite, got ({x}, {x_prime})"
        )));
    }
    params.validate()?;
    if m > MAX_ORDER || n > MAX_ORDER {
        return Err(Error::ContractViolation(format!(
            "kernel derivative orders must lie in [0, {MAX_ORDER}], got ({m}, {n})"
        )));
    }
    Ok(se_kernel_deriv_unchecked(params, m, n, x, x_prime))
}

/// Same as [`se_kernel_deriv`] without argument validation; used in assembly
/// loops where parameters were validated once up front.
#[inline]
pub(crate) fn se_kernel_deriv_unchecked(
    params: &KernelParams,
    m: usize,
    n: usize,
    x: f64,
    x_prime: f64,
) -> f64 {
    let tau = (x - x_prime) / params.ell;
    let order = m + n;
    // Derivatives in x' pick up (-1)^n; the Hermite identity adds (-1)^{m+n}.
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    let envelope = (-0.5 * tau * tau).exp();
    params.sigma_s * params.sigma_s * sign * hermite(order, tau) * envelope
        / params.ell.powi(order as i32)
}

/// Covariance between field `kind_a` at `x` and field `kind_b` at `x_prime`.
pub fn cross_kernel(
    params: &KernelParams,
    physics: &BeamPhysics,
    kind_a: QuantityKind,
    kind_b: QuantityKind,
    x: f64,
    x_prime: f64,
) -> Result<f64> {
    let coeff = physics.factor(kind_a)? * physics.factor(kind_b)?;
    let value = se_kernel_deriv(
        params,
        kind_a.operator().derivative_order,
        kind_b.operator().derivative_order,
        x,
        x_prime,
    )?;
    Ok(coeff * value)
}

/// Precomputed operator factors for repeated kernel evaluation under one
/// parameter setting.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CrossKernel {
    params: KernelParams,
    factors: [f64; 6],
}

impl CrossKernel {
    /// Factors for kinds that are not present may be left unresolved (e.g.
    /// strain without a fiber distance); they are set to NaN and must not be
    /// queried.
    pub(crate) fn new(
        params: KernelParams,
        physics: &BeamPhysics,
        kinds: &[QuantityKind],
    ) -> Result<Self> {
        params.validate()?;
        let mut factors = [f64::NAN; 6];
        for &kind in kinds {
            factors[kind.index()] = physics.factor(kind)?;
        }
        Ok(CrossKernel { params, factors })
    }

    #[inline]
    pub(crate) fn eval(&self, a: QuantityKind, b: QuantityKind, x: f64, x_prime: f64) -> f64 {
        self.factors[a.index()]
            * self.factors[b.index()]
            * se_kernel_deriv_unchecked(
                &self.params,
                a.operator().derivative_order,
                b.operator().derivative_order,
                x,
                x_prime,
            )
    }
}
