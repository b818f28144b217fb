//! Global block covariance over all training sets and its Cholesky factor.

use std::ops::Range;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::dataset::Problem;
use crate::error::{Error, Result};
use crate::kernel::{BeamPhysics, CrossKernel, KernelParams};

/// Diagonal jitter schedule. Levels are relative to a reference magnitude
/// chosen by [`JitterScale`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct JitterPolicy {
    pub initial: f64,
    pub growth: f64,
    pub max: f64,
    #[serde(default)]
    pub scale: JitterScale,
}

impl Default for JitterPolicy {
    fn default() -> Self {
        JitterPolicy {
            initial: 1e-10,
            growth: 10.0,
            max: 1e-4,
            scale: JitterScale::UnitFree,
        }
    }
}

/// Reference magnitude the relative jitter level multiplies.
///
/// `MeanTrace` adds `level · trace(K)/N` to every row. Moment, shear and load
/// rows carry a factor EI and strain rows a factor c, so that trace depends
/// on the stiffness unit: in N·m² the load block dominates and the shift
/// swamps deflection noise. `UnitFree` takes the mean trace after dividing
/// each row and column by its physical coefficient `s_i` and adds
/// `level · s_i² · mean` to row i, which is the same shift expressed back in
/// each row's units. With EI = c = 1 the two coincide.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JitterScale {
    #[default]
    UnitFree,
    MeanTrace,
}

#[derive(Debug, Clone)]
pub struct AssembledCovariance {
    pub matrix: DMatrix<f64>,
    /// Row range per training set, in [`Problem::training_sets`] order.
    pub block_index: Vec<Range<usize>>,
    /// Magnitude of the physical coefficient (1, c or EI) of each row.
    pub row_scale: Vec<f64>,
}

/// Assembles `K_p` with the default sign convention.
pub fn assemble(
    problem: &Problem,
    params: &KernelParams,
    ei: f64,
    noises: &[f64],
) -> Result<AssembledCovariance> {
    let physics = BeamPhysics::new(ei, problem.fiber_distance());
    assemble_with(problem, params, &physics, noises)
}

pub fn assemble_with(
    problem: &Problem,
    params: &KernelParams,
    physics: &BeamPhysics,
    noises: &[f64],
) -> Result<AssembledCovariance> {
    if !(physics.ei.is_finite() && physics.ei > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "bending stiffness must be positive, got {}",
            physics.ei
        )));
    }
    let noise_var = problem.noise_variances(noises)?;
    let kernel = CrossKernel::new(*params, physics, &problem.present_kinds())?;
    let kinds = problem.kinds();
    let xs = problem.locations();
    let n = kinds.len();

    let row_scale = kinds
        .iter()
        .map(|k| physics.factor(*k).map(f64::abs))
        .collect::<Result<Vec<_>>>()?;
    let mut matrix = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in j..n {
            let k = kernel.eval(kinds[i], kinds[j], xs[i], xs[j]);
            matrix[(i, j)] = k;
            matrix[(j, i)] = k;
        }
        matrix[(j, j)] += noise_var[j];
    }
    Ok(AssembledCovariance {
        matrix,
        block_index: problem.blocks().to_vec(),
        row_scale,
    })
}

/// Lower-triangular factor of `K + diag(jitter)`.
#[derive(Debug, Clone)]
pub struct CovarianceFactor {
    cholesky: Cholesky<f64, Dyn>,
    jitter_used: f64,
    jitter_added: Vec<f64>,
}

impl CovarianceFactor {
    pub fn lower(&self) -> DMatrix<f64> {
        self.cholesky.l()
    }

    /// Relative jitter level that made the factorization succeed.
    pub fn jitter_used(&self) -> f64 {
        self.jitter_used
    }

    /// Absolute jitter added to each diagonal entry.
    pub fn jitter_added(&self) -> &[f64] {
        &self.jitter_added
    }

    pub fn dim(&self) -> usize {
        self.cholesky.l_dirty().nrows()
    }

    /// `L⁻¹ b`.
    pub fn solve_lower(&self, b: &DVector<f64>) -> DVector<f64> {
        let l = self.cholesky.l_dirty();
        let mut out = b.clone();
        // l_dirty's upper triangle holds garbage; the lower solve ignores it.
        l.solve_lower_triangular_mut(&mut out);
        out
    }

    /// `L⁻¹ B` for a matrix right-hand side.
    pub fn solve_lower_matrix(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let l = self.cholesky.l_dirty();
        let mut out = b.clone();
        l.solve_lower_triangular_mut(&mut out);
        out
    }

    /// `(K + diag(jitter))⁻¹ b`.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.cholesky.solve(b)
    }

    /// `log |K + diag(jitter)|`.
    pub fn log_det(&self) -> f64 {
        let l = self.cholesky.l_dirty();
        2.0 * (0..l.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>()
    }
}

/// Cholesky factorization with geometrically escalating diagonal jitter.
pub fn factorize(cov: &AssembledCovariance, policy: &JitterPolicy) -> Result<CovarianceFactor> {
    factorize_scaled(&cov.matrix, &cov.row_scale, policy)
}

/// Factorizes a bare matrix, treating every row as unit-scaled.
pub fn factorize_matrix(matrix: &DMatrix<f64>, policy: &JitterPolicy) -> Result<CovarianceFactor> {
    factorize_scaled(matrix, &vec![1.0; matrix.nrows()], policy)
}

fn factorize_scaled(
    matrix: &DMatrix<f64>,
    row_scale: &[f64],
    policy: &JitterPolicy,
) -> Result<CovarianceFactor> {
    let n = matrix.nrows();
    if n == 0 || matrix.ncols() != n {
        return Err(Error::ContractViolation(format!(
            "covariance must be square and nonempty, got {}x{}",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    if !(policy.initial > 0.0 && policy.growth > 1.0 && policy.max >= policy.initial) {
        return Err(Error::InvalidArgument(format!(
            "invalid jitter policy {policy:?}"
        )));
    }
    let reference: Vec<f64> = match policy.scale {
        JitterScale::MeanTrace => vec![matrix.trace() / n as f64; n],
        JitterScale::UnitFree => {
            let mean = (0..n)
                .map(|i| matrix[(i, i)] / (row_scale[i] * row_scale[i]))
                .sum::<f64>()
                / n as f64;
            row_scale.iter().map(|s| mean * s * s).collect()
        }
    };
    if !reference.iter().all(|r| r.is_finite() && *r > 0.0) {
        return Err(Error::NumericalSingularity { jitter: 0.0 });
    }

    let mut rel = policy.initial;
    loop {
        let jitter_added: Vec<f64> = reference.iter().map(|r| rel * r).collect();
        let mut shifted = matrix.clone();
        for (i, j) in jitter_added.iter().enumerate() {
            shifted[(i, i)] += j;
        }
        if let Some(cholesky) = Cholesky::new(shifted) {
            let l = cholesky.l_dirty();
            if (0..n).all(|i| l[(i, i)].is_finite() && l[(i, i)] > 0.0) {
                return Ok(CovarianceFactor {
                    cholesky,
                    jitter_used: rel,
                    jitter_added,
                });
            }
        }
        if rel >= policy.max {
            return Err(Error::NumericalSingularity { jitter: rel });
        }
        rel = (rel * policy.growth).min(policy.max);
    }
}
