//! Predictive distributions for any beam field at query locations,
//! conditioned on the training data and averaged over posterior draws.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::covariance::{assemble_with, factorize, CovarianceFactor, JitterPolicy};
use crate::dataset::{format_f64, Problem};
use crate::error::{Error, Result};
use crate::kernel::{BeamPhysics, CrossKernel, KernelParams, QuantityKind};
use crate::posterior::ParamVector;
use crate::sampler::Chain;

/// Joint Gaussian over the query locations.
#[derive(Debug, Clone)]
pub struct GaussianPrediction {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
    pub warnings: Vec<String>,
}

impl GaussianPrediction {
    pub fn std(&self) -> Vec<f64> {
        self.covariance
            .diagonal()
            .iter()
            .map(|v| v.max(0.0).sqrt())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PredictOptions {
    /// Add the noise variance of this training set to the predictive
    /// diagonal (posterior-predictive check of a re-measurement).
    pub noise_of_set: Option<usize>,
    pub jitter: Option<JitterPolicy>,
}

/// Training covariance factorized once for a fixed ψ.
pub struct Predictor<'a> {
    problem: &'a Problem,
    psi: ParamVector,
    kernel: KernelParams,
    physics: BeamPhysics,
    factor: CovarianceFactor,
    alpha: DVector<f64>,
}

impl<'a> Predictor<'a> {
    pub fn new(problem: &'a Problem, psi: &ParamVector) -> Result<Self> {
        Self::with_jitter(problem, psi, &JitterPolicy::default())
    }

    pub fn with_jitter(
        problem: &'a Problem,
        psi: &ParamVector,
        jitter: &JitterPolicy,
    ) -> Result<Self> {
        let kernel = psi.kernel()?;
        let physics = BeamPhysics::new(psi.ei, problem.fiber_distance());
        let cov = assemble_with(problem, &kernel, &physics, &psi.noise_sigmas)?;
        let factor = factorize(&cov, jitter)?;
        let alpha = factor.solve(problem.values());
        Ok(Predictor {
            problem,
            psi: psi.clone(),
            kernel,
            physics,
            factor,
            alpha,
        })
    }

    pub fn jitter_used(&self) -> f64 {
        self.factor.jitter_used()
    }

    /// Absolute jitter on each training row.
    pub fn jitter_added(&self) -> &[f64] {
        self.factor.jitter_added()
    }

    pub fn predict(
        &self,
        kind: QuantityKind,
        x_star: &[f64],
        opts: &PredictOptions,
    ) -> Result<GaussianPrediction> {
        if x_star.is_empty() {
            return Err(Error::InvalidArgument("no query locations".into()));
        }
        if x_star.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(
                "query locations must be finite".into(),
            ));
        }
        let mut kinds = self.problem.present_kinds();
        kinds.push(kind);
        let k = CrossKernel::new(self.kernel, &self.physics, &kinds)?;

        let train_kinds = self.problem.kinds();
        let train_x = self.problem.locations();
        let n = train_kinds.len();
        let m = x_star.len();

        let k_star = DMatrix::from_fn(n, m, |i, j| {
            k.eval(train_kinds[i], kind, train_x[i], x_star[j])
        });
        let mean = k_star.transpose() * &self.alpha;
        let v = self.factor.solve_lower_matrix(&k_star);
        let mut covariance =
            DMatrix::from_fn(m, m, |i, j| k.eval(kind, kind, x_star[i], x_star[j]))
                - v.transpose() * v;
        // Symmetrize away round-off.
        covariance = (&covariance + covariance.transpose()) * 0.5;

        if let Some(set_idx) = opts.noise_of_set {
            let set = self.problem.training_sets().get(set_idx).ok_or_else(|| {
                Error::InvalidArgument(format!("no training set with index {set_idx}"))
            })?;
            if set.kind != kind {
                return Err(Error::InvalidArgument(format!(
                    "set '{}' measures {} but the query is {}",
                    set.label, set.kind, kind
                )));
            }
            let var = self.problem.noise_variances(&self.psi.noise_sigmas)?
                [self.problem.blocks()[set_idx].start];
            for i in 0..m {
                covariance[(i, i)] += var;
            }
        }

        let length = self.problem.length();
        let warnings = x_star
            .iter()
            .filter(|x| **x < 0.0 || **x > length)
            .map(|x| format!("query location {x} extrapolates beyond [0, {length}]"))
            .collect();
        Ok(GaussianPrediction {
            mean,
            covariance,
            warnings,
        })
    }
}

/// Predictive mean and covariance of `kind` at `x_star` for a fixed ψ.
pub fn predict_conditional(
    problem: &Problem,
    psi: &ParamVector,
    kind: QuantityKind,
    x_star: &[f64],
) -> Result<GaussianPrediction> {
    predict_conditional_with(problem, psi, kind, x_star, &PredictOptions::default())
}

pub fn predict_conditional_with(
    problem: &Problem,
    psi: &ParamVector,
    kind: QuantityKind,
    x_star: &[f64],
    opts: &PredictOptions,
) -> Result<GaussianPrediction> {
    let jitter = opts.jitter.unwrap_or_default();
    Predictor::with_jitter(problem, psi, &jitter)?.predict(kind, x_star, opts)
}

/// Moments of the equally weighted Gaussian mixture over chain draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictiveResult {
    pub kind: QuantityKind,
    pub locations: Vec<f64>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Component means, one vector per successful draw.
    pub per_sample_means: Option<Vec<Vec<f64>>>,
    pub n_components: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureOptions {
    pub n_draws: usize,
    pub keep_components: bool,
    pub predict: PredictOptions,
}

impl Default for MixtureOptions {
    fn default() -> Self {
        MixtureOptions {
            n_draws: 200,
            keep_components: false,
            predict: PredictOptions::default(),
        }
    }
}

/// Indices of `n_draws` samples spread evenly through a chain of `len`.
pub fn draw_indices(len: usize, n_draws: usize) -> Vec<usize> {
    (0..n_draws).map(|i| i * len / n_draws).collect()
}

pub fn predict_mixture(
    problem: &Problem,
    chain: &Chain,
    kind: QuantityKind,
    x_star: &[f64],
    n_draws: usize,
) -> Result<PredictiveResult> {
    predict_mixture_with(
        problem,
        chain,
        kind,
        x_star,
        &MixtureOptions {
            n_draws,
            ..Default::default()
        },
    )
}

pub fn predict_mixture_with(
    problem: &Problem,
    chain: &Chain,
    kind: QuantityKind,
    x_star: &[f64],
    opts: &MixtureOptions,
) -> Result<PredictiveResult> {
    if chain.is_empty() {
        return Err(Error::ContractViolation(
            "mixture prediction from an empty chain".into(),
        ));
    }
    if opts.n_draws == 0 || opts.n_draws > chain.len() {
        return Err(Error::ContractViolation(format!(
            "n_draws must be in 1..={}, got {}",
            chain.len(),
            opts.n_draws
        )));
    }
    // configuration errors (strain without c) surface before any draw runs
    BeamPhysics::new(1.0, problem.fiber_distance()).factor(kind)?;
    let indices = draw_indices(chain.len(), opts.n_draws);
    let component = |&i: &usize| -> Result<(Vec<f64>, Vec<f64>, Vec<String>)> {
        let psi = ParamVector::from_slice(&chain.samples[i])?;
        let g = predict_conditional_with(problem, &psi, kind, x_star, &opts.predict)?;
        let var = g.covariance.diagonal().iter().map(|v| v.max(0.0)).collect();
        Ok((g.mean.iter().copied().collect(), var, g.warnings))
    };

    #[cfg(feature = "parallel")]
    let results: Vec<_> = {
        use rayon::prelude::*;
        indices.par_iter().map(component).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<_> = indices.iter().map(component).collect();

    let m = x_star.len();
    let mut means = Vec::new();
    let mut vars = Vec::new();
    let mut warnings = Vec::new();
    for (idx, r) in indices.iter().zip(results) {
        match r {
            Ok((mu, var, w)) => {
                means.push(mu);
                vars.push(var);
                if warnings.is_empty() {
                    warnings.extend(w);
                }
            }
            Err(e) => warnings.push(format!("draw {idx} skipped: {e}")),
        }
    }
    if means.is_empty() {
        return Err(Error::Inference(format!(
            "all {} mixture components failed ({})",
            indices.len(),
            warnings.last().cloned().unwrap_or_default()
        )));
    }

    let k = means.len() as f64;
    let mut mean = vec![0.0; m];
    for mu in &means {
        for (acc, v) in mean.iter_mut().zip(mu) {
            *acc += v / k;
        }
    }
    // Law of total variance: E[var] + Var[mean].
    let mut var = vec![0.0; m];
    for (mu, v) in means.iter().zip(&vars) {
        for j in 0..m {
            var[j] += (v[j] + (mu[j] - mean[j]).powi(2)) / k;
        }
    }
    Ok(PredictiveResult {
        kind,
        locations: x_star.to_vec(),
        mean,
        std: var.iter().map(|v| v.sqrt()).collect(),
        n_components: means.len(),
        per_sample_means: opts.keep_components.then_some(means),
        warnings,
    })
}

impl PredictiveResult {
    /// `kind,x,mean,std` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,x,mean,std\n");
        for ((x, m), s) in self.locations.iter().zip(&self.mean).zip(&self.std) {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                self.kind,
                format_f64(*x),
                format_f64(*m),
                format_f64(*s)
            );
        }
        out
    }
}

/// RMSE of `predicted` against `truth`, divided by `max |truth|`.
pub fn normalized_rmse(predicted: &[f64], truth: &[f64]) -> f64 {
    assert_eq!(predicted.len(), truth.len());
    let scale = truth.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mse = predicted
        .iter()
        .zip(truth)
        .map(|(p, t)| (p - t).powi(2))
        .sum::<f64>()
        / truth.len() as f64;
    mse.sqrt() / scale
}

/// Training-set index for a label, for use with [`PredictOptions::noise_of_set`].
pub fn set_index_by_label(problem: &Problem, label: &str) -> Option<usize> {
    problem
        .training_sets()
        .iter()
        .position(|s| s.label == label)
}
