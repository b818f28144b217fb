//! Ground-truth beam responses: the closed-form uniformly loaded cantilever,
//! a Hermite-cubic finite-element model with element-wise stiffness, and
//! noisy synthetic datasets drawn from either.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dataset::{BoundaryCondition, NoiseModel, ObservationSet, Problem};
use crate::error::{Error, Result};
use crate::kernel::QuantityKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Support {
    /// Clamped at x = 0, free at x = L.
    CantileverLeft,
    /// Pinned at both ends.
    SimplySupported,
}

impl Support {
    /// Support conditions encoded as zero-valued boundary conditions.
    pub fn boundary_conditions(self, length: f64) -> Vec<BoundaryCondition> {
        use QuantityKind::*;
        match self {
            Support::CantileverLeft => vec![
                BoundaryCondition::new(Deflection, 0.0, 0.0),
                BoundaryCondition::new(Rotation, 0.0, 0.0),
                BoundaryCondition::new(Moment, length, 0.0),
                BoundaryCondition::new(Shear, length, 0.0),
            ],
            Support::SimplySupported => vec![
                BoundaryCondition::new(Deflection, 0.0, 0.0),
                BoundaryCondition::new(Deflection, length, 0.0),
                BoundaryCondition::new(Moment, 0.0, 0.0),
                BoundaryCondition::new(Moment, length, 0.0),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamSpec {
    pub length: f64,
    /// Bending stiffness per element, left to right.
    pub ei_elements: Vec<f64>,
    pub support: Support,
    /// Uniform distributed load (N/m).
    pub load: f64,
}

impl BeamSpec {
    pub fn uniform(length: f64, ei: f64, n_elements: usize, support: Support, load: f64) -> Self {
        BeamSpec {
            length,
            ei_elements: vec![ei; n_elements],
            support,
            load,
        }
    }

    pub fn n_elements(&self) -> usize {
        self.ei_elements.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "beam length must be positive, got {}",
                self.length
            )));
        }
        if self.ei_elements.is_empty() {
            return Err(Error::InvalidArgument(
                "beam needs at least one element".into(),
            ));
        }
        if self
            .ei_elements
            .iter()
            .any(|e| !(e.is_finite() && *e > 0.0))
        {
            return Err(Error::InvalidArgument(
                "element stiffness must be positive".into(),
            ));
        }
        if !self.load.is_finite() {
            return Err(Error::InvalidArgument("load must be finite".into()));
        }
        Ok(())
    }

    /// The common stiffness when all elements agree.
    pub fn uniform_ei(&self) -> Option<f64> {
        let first = *self.ei_elements.first()?;
        self.ei_elements
            .iter()
            .all(|e| *e == first)
            .then_some(first)
    }
}

/// Field values of a solved beam.
pub trait BeamResponse {
    fn length(&self) -> f64;

    /// Value of `kind` at `x`; strain needs `fiber_distance`.
    fn eval(&self, kind: QuantityKind, x: f64, fiber_distance: Option<f64>) -> Result<f64>;

    /// Largest |value| of `kind` over the beam, sampled on a dense grid.
    fn max_abs(&self, kind: QuantityKind, fiber_distance: Option<f64>) -> Result<f64> {
        const SAMPLES: usize = 2000;
        let l = self.length();
        let mut best = 0.0f64;
        for i in 0..=SAMPLES {
            let x = l * i as f64 / SAMPLES as f64;
            best = best.max(self.eval(kind, x, fiber_distance)?.abs());
        }
        Ok(best)
    }
}

fn check_x(x: f64, length: f64) -> Result<()> {
    if !(x.is_finite() && x >= -1e-12 * length && x <= length * (1.0 + 1e-12)) {
        return Err(Error::Domain(format!(
            "position {x} outside beam [0, {length}]"
        )));
    }
    Ok(())
}

fn fiber(c: Option<f64>) -> Result<f64> {
    match c {
        Some(c) if c.is_finite() && c > 0.0 => Ok(c),
        _ => Err(Error::Config(
            "strain requires a positive fiber distance c".into(),
        )),
    }
}

/// Closed-form cantilever (clamped at 0, free at L) under uniform load.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CantileverAnalytic {
    pub load: f64,
    pub length: f64,
    pub ei: f64,
}

impl BeamResponse for CantileverAnalytic {
    fn length(&self) -> f64 {
        self.length
    }

    fn eval(&self, kind: QuantityKind, x: f64, fiber_distance: Option<f64>) -> Result<f64> {
        cantilever_analytic(self.load, self.length, self.ei, kind, x, fiber_distance)
    }
}

/// `u(x) = q x² (x² − 4Lx + 6L²) / (24 EI)` and its derived fields.
pub fn cantilever_analytic(
    q: f64,
    length: f64,
    ei: f64,
    kind: QuantityKind,
    x: f64,
    fiber_distance: Option<f64>,
) -> Result<f64> {
    if !(ei.is_finite() && ei > 0.0 && length > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need positive EI and L, got ({ei}, {length})"
        )));
    }
    check_x(x, length)?;
    let l = length;
    let curvature = q * (l - x).powi(2) / (2.0 * ei);
    Ok(match kind {
        QuantityKind::Deflection => q * x * x * (x * x - 4.0 * l * x + 6.0 * l * l) / (24.0 * ei),
        QuantityKind::Rotation => q * x * (x * x - 3.0 * l * x + 3.0 * l * l) / (6.0 * ei),
        QuantityKind::Strain => -fiber(fiber_distance)? * curvature,
        QuantityKind::Moment => -q * (l - x).powi(2) / 2.0,
        QuantityKind::Shear => q * (l - x),
        QuantityKind::Load => q,
    })
}

/// Nodal solution of the finite-element model.
#[derive(Debug, Clone)]
pub struct FeSolution {
    spec: BeamSpec,
    /// `[w_0, θ_0, w_1, θ_1, ...]`.
    dofs: Vec<f64>,
}

/// Solves the beam with two-node Hermite-cubic elements and a consistent
/// uniform-load vector.
pub fn fe_solve(spec: &BeamSpec) -> Result<FeSolution> {
    spec.validate()?;
    let n_el = spec.n_elements();
    let h = spec.length / n_el as f64;
    let n_dof = 2 * (n_el + 1);
    let mut k = DMatrix::<f64>::zeros(n_dof, n_dof);
    let mut f = DVector::<f64>::zeros(n_dof);
    let q = spec.load;
    let local_load = [
        q * h / 2.0,
        q * h * h / 12.0,
        q * h / 2.0,
        -q * h * h / 12.0,
    ];
    for (e, &ei) in spec.ei_elements.iter().enumerate() {
        let c = ei / h.powi(3);
        let ke = [
            [12.0, 6.0 * h, -12.0, 6.0 * h],
            [6.0 * h, 4.0 * h * h, -6.0 * h, 2.0 * h * h],
            [-12.0, -6.0 * h, 12.0, -6.0 * h],
            [6.0 * h, 2.0 * h * h, -6.0 * h, 4.0 * h * h],
        ];
        let base = 2 * e;
        for a in 0..4 {
            f[base + a] += local_load[a];
            for b in 0..4 {
                k[(base + a, base + b)] += c * ke[a][b];
            }
        }
    }

    let fixed: Vec<usize> = match spec.support {
        Support::CantileverLeft => vec![0, 1],
        Support::SimplySupported => vec![0, n_dof - 2],
    };
    let free: Vec<usize> = (0..n_dof).filter(|i| !fixed.contains(i)).collect();
    let kr = DMatrix::from_fn(free.len(), free.len(), |i, j| k[(free[i], free[j])]);
    let fr = DVector::from_fn(free.len(), |i, _| f[free[i]]);
    let solution = kr
        .cholesky()
        .map(|c| c.solve(&fr))
        .ok_or_else(|| Error::Model("global stiffness matrix is singular".into()))?;

    let mut dofs = vec![0.0; n_dof];
    for (i, &d) in free.iter().enumerate() {
        dofs[d] = solution[i];
    }
    Ok(FeSolution {
        spec: spec.clone(),
        dofs,
    })
}

impl FeSolution {
    pub fn spec(&self) -> &BeamSpec {
        &self.spec
    }

    /// Deflection at each node.
    pub fn nodal_deflections(&self) -> Vec<f64> {
        self.dofs.iter().step_by(2).copied().collect()
    }

    pub fn nodal_rotations(&self) -> Vec<f64> {
        self.dofs.iter().skip(1).step_by(2).copied().collect()
    }

    /// Deflection derivatives `[u, u', u'', u''']` at `x`. Inside an element
    /// the cubic Hermite interpolant plus the uniform-load bubble is the exact
    /// Euler-Bernoulli solution.
    fn derivatives(&self, x: f64) -> [f64; 4] {
        let n_el = self.spec.n_elements();
        let h = self.spec.length / n_el as f64;
        let e = ((x / h).floor().max(0.0) as usize).min(n_el - 1);
        let s = (x - e as f64 * h).clamp(0.0, h);
        let t = s / h;
        let d = &self.dofs[2 * e..2 * e + 4];
        let shape = [
            [
                1.0 - 3.0 * t * t + 2.0 * t.powi(3),
                h * (t - 2.0 * t * t + t.powi(3)),
                3.0 * t * t - 2.0 * t.powi(3),
                h * (t.powi(3) - t * t),
            ],
            [
                (6.0 * t * t - 6.0 * t) / h,
                1.0 - 4.0 * t + 3.0 * t * t,
                (6.0 * t - 6.0 * t * t) / h,
                3.0 * t * t - 2.0 * t,
            ],
            [
                (12.0 * t - 6.0) / (h * h),
                (6.0 * t - 4.0) / h,
                (6.0 - 12.0 * t) / (h * h),
                (6.0 * t - 2.0) / h,
            ],
            [
                12.0 / h.powi(3),
                6.0 / (h * h),
                -12.0 / h.powi(3),
                6.0 / (h * h),
            ],
        ];
        let b = self.spec.load / self.spec.ei_elements[e];
        let bubble = [
            b * s * s * (h - s).powi(2) / 24.0,
            b * s * (h - s) * (h - 2.0 * s) / 12.0,
            b * (h * h - 6.0 * h * s + 6.0 * s * s) / 12.0,
            b * (2.0 * s - h) / 2.0,
        ];
        let mut out = [0.0; 4];
        for k in 0..4 {
            out[k] = (0..4).map(|i| shape[k][i] * d[i]).sum::<f64>() + bubble[k];
        }
        out
    }

    fn element_ei(&self, x: f64) -> f64 {
        let n_el = self.spec.n_elements();
        let h = self.spec.length / n_el as f64;
        let e = ((x / h).floor().max(0.0) as usize).min(n_el - 1);
        self.spec.ei_elements[e]
    }
}

impl BeamResponse for FeSolution {
    fn length(&self) -> f64 {
        self.spec.length
    }

    fn eval(&self, kind: QuantityKind, x: f64, fiber_distance: Option<f64>) -> Result<f64> {
        check_x(x, self.spec.length)?;
        let d = self.derivatives(x);
        let ei = self.element_ei(x);
        Ok(match kind {
            QuantityKind::Deflection => d[0],
            QuantityKind::Rotation => d[1],
            QuantityKind::Strain => -fiber(fiber_distance)? * d[2],
            QuantityKind::Moment => -ei * d[2],
            QuantityKind::Shear => -ei * d[3],
            QuantityKind::Load => self.spec.load,
        })
    }
}

/// Ground truth used to synthesize measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Truth {
    Analytic,
    Fe,
}

/// Serializes an SNR, writing infinity as the string `"inf"`.
pub mod snr_serde {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Text(t) => parse_snr(&t).map_err(serde::de::Error::custom),
        }
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(
            v: &Option<f64>,
            s: S,
        ) -> std::result::Result<S::Ok, S::Error> {
            match v {
                Some(v) => super::serialize(v, s),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> std::result::Result<Option<f64>, D::Error> {
            #[derive(Deserialize)]
            struct Wrap(#[serde(with = "super")] f64);
            Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
        }
    }
}

/// Parses an SNR value; `inf`/`infinity` give noiseless data.
pub fn parse_snr(text: &str) -> std::result::Result<f64, String> {
    match text.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
        t => t
            .parse::<f64>()
            .map_err(|_| format!("invalid SNR '{text}'")),
    }
}

/// One group of identical sensors, synthesized into one observation set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorGroup {
    pub kind: QuantityKind,
    pub label: String,
    pub positions: Vec<f64>,
    /// Overrides the plan-wide SNR for this group.
    #[serde(default, with = "snr_serde::option")]
    pub snr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorPlan {
    pub groups: Vec<SensorGroup>,
    /// Repeated readings per sensor position (N_dp).
    pub points_per_sensor: usize,
    #[serde(with = "snr_serde")]
    pub snr: f64,
    pub seed: u64,
    /// Positions where the applied load is supplied as an exact constraint.
    pub load_points: Vec<f64>,
    pub fiber_distance: Option<f64>,
}

impl SensorPlan {
    /// Four equally spaced deflection sensors at L/4, L/2, 3L/4 and L, five
    /// readings each, SNR 10, applied load known at nine equally spaced points.
    pub fn benchmark(length: f64) -> Self {
        SensorPlan {
            groups: vec![SensorGroup {
                kind: QuantityKind::Deflection,
                label: "deflection".into(),
                positions: [0.25, 0.5, 0.75, 1.0].iter().map(|f| f * length).collect(),
                snr: None,
            }],
            points_per_sensor: 5,
            snr: 10.0,
            seed: 0,
            load_points: (0..9).map(|i| length * i as f64 / 8.0).collect(),
            fiber_distance: None,
        }
    }

    pub fn validate(&self, length: f64) -> Result<()> {
        if self.points_per_sensor == 0 {
            return Err(Error::InvalidArgument(
                "points_per_sensor must be at least 1".into(),
            ));
        }
        let snr_ok = |s: f64| s > 0.0 && !s.is_nan();
        if !snr_ok(self.snr)
            || self
                .groups
                .iter()
                .any(|g| g.snr.is_some_and(|s| !snr_ok(s)))
        {
            return Err(Error::InvalidArgument(
                "SNR must be positive or infinite".into(),
            ));
        }
        for g in &self.groups {
            if g.positions.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "sensor group '{}' has no positions",
                    g.label
                )));
            }
            for &x in &g.positions {
                check_x(x, length)?;
            }
        }
        for &x in &self.load_points {
            check_x(x, length)?;
        }
        Ok(())
    }

    pub fn group_snr(&self, group: &SensorGroup) -> f64 {
        group.snr.unwrap_or(self.snr)
    }
}

/// A synthesized problem together with the noise levels used to make it.
#[derive(Debug, Clone)]
pub struct Synthetic {
    pub problem: Problem,
    /// True noise σ per sensor group, in plan order.
    pub noise_sigmas: Vec<f64>,
}

/// Builds the ground-truth response for `spec`.
pub fn solve_truth(spec: &BeamSpec, truth: Truth) -> Result<Box<dyn BeamResponse + Send + Sync>> {
    spec.validate()?;
    match truth {
        Truth::Analytic => {
            if spec.support != Support::CantileverLeft {
                return Err(Error::InvalidArgument(
                    "analytic truth is only available for the cantilever".into(),
                ));
            }
            let ei = spec.uniform_ei().ok_or_else(|| {
                Error::InvalidArgument("analytic truth requires uniform stiffness".into())
            })?;
            Ok(Box::new(CantileverAnalytic {
                load: spec.load,
                length: spec.length,
                ei,
            }))
        }
        Truth::Fe => Ok(Box::new(fe_solve(spec)?)),
    }
}

/// Noisy readings around the true response: `σ = max|response| / SNR` per
/// group, `points_per_sensor` independent draws per sensor position. The
/// support conditions are attached as boundary conditions and the applied
/// load as an exact constraint set.
pub fn synth_dataset(spec: &BeamSpec, plan: &SensorPlan, truth: Truth) -> Result<Synthetic> {
    plan.validate(spec.length)?;
    let response = solve_truth(spec, truth)?;
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let c = plan.fiber_distance;

    let mut sets = Vec::new();
    let mut noise_sigmas = Vec::new();
    for group in &plan.groups {
        let snr = plan.group_snr(group);
        let sigma = if snr.is_infinite() {
            0.0
        } else {
            response.max_abs(group.kind, c)? / snr
        };
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &x in &group.positions {
            let exact = response.eval(group.kind, x, c)?;
            for _ in 0..plan.points_per_sensor {
                let z: f64 = StandardNormal.sample(&mut rng);
                xs.push(x);
                ys.push(exact + sigma * z);
            }
        }
        sets.push(ObservationSet::measured(
            group.kind,
            group.label.clone(),
            xs,
            ys,
            NoiseModel::learnable(),
        )?);
        noise_sigmas.push(sigma);
    }
    if !plan.load_points.is_empty() {
        sets.push(ObservationSet::constraint(
            QuantityKind::Load,
            "load",
            plan.load_points.clone(),
            vec![spec.load; plan.load_points.len()],
        )?);
    }
    let problem = Problem::new(
        spec.length,
        c,
        sets,
        spec.support.boundary_conditions(spec.length),
    )?;
    Ok(Synthetic {
        problem,
        noise_sigmas,
    })
}
