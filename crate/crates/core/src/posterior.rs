//! Log-prior, log-likelihood and unnormalized log-posterior of the model
//! parameters ψ = {σ_s, ℓ, EI, σ_a...}.

use std::f64::consts::PI;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::covariance::{assemble, factorize, JitterPolicy};
use crate::dataset::{NoiseModel, Problem};
use crate::error::{Error, Result};
use crate::kernel::KernelParams;

/// Closed interval for a uniform prior; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    #[serde(serialize_with = "ser_bound", deserialize_with = "de_lower")]
    pub lower: f64,
    #[serde(serialize_with = "ser_bound", deserialize_with = "de_upper")]
    pub upper: f64,
}

fn ser_bound<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_some(v)
    } else {
        s.serialize_none()
    }
}

fn de_lower<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NEG_INFINITY))
}

fn de_upper<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || lower >= upper {
            return Err(Error::InvalidArgument(format!(
                "prior interval needs lower < upper, got ({lower}, {upper})"
            )));
        }
        Ok(Interval { lower, upper })
    }

    pub fn unbounded() -> Self {
        Interval {
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lower && v <= self.upper
    }

    /// Uniform log-density; zero for an improper (infinite-width) interval.
    pub fn log_density(&self, v: f64) -> f64 {
        if !self.contains(v) {
            return f64::NEG_INFINITY;
        }
        let width = self.upper - self.lower;
        if width.is_finite() {
            -width.ln()
        } else {
            0.0
        }
    }
}

/// Model parameters in a fixed flat layout `[σ_s, ℓ, EI, σ_1, ..., σ_k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    pub sigma_s: f64,
    pub ell: f64,
    pub ei: f64,
    /// One σ per learnable set, in [`Problem::learnable_sets`] order.
    pub noise_sigmas: Vec<f64>,
}

impl ParamVector {
    pub const SIGMA_S: usize = 0;
    pub const ELL: usize = 1;
    pub const EI: usize = 2;

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::ContractViolation(format!(
                "parameter vector needs at least 3 entries, got {}",
                values.len()
            )));
        }
        Ok(ParamVector {
            sigma_s: values[0],
            ell: values[1],
            ei: values[2],
            noise_sigmas: values[3..].to_vec(),
        })
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(3 + self.noise_sigmas.len());
        v.extend([self.sigma_s, self.ell, self.ei]);
        v.extend_from_slice(&self.noise_sigmas);
        v
    }

    pub fn len(&self) -> usize {
        3 + self.noise_sigmas.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn kernel(&self) -> Result<KernelParams> {
        KernelParams::new(self.sigma_s, self.ell)
    }

    pub fn all_positive(&self) -> bool {
        self.to_vec().iter().all(|v| v.is_finite() && *v > 0.0)
    }

    /// Column names matching [`Self::to_vec`].
    pub fn names(problem: &Problem) -> Vec<String> {
        let mut names = vec!["sigma_s".to_string(), "ell".to_string(), "ei".to_string()];
        for &i in problem.learnable_sets() {
            names.push(format!("noise:{}", problem.training_sets()[i].label));
        }
        names
    }

    /// Starting point for a chain: σ_s from the spread of the deflection
    /// data (or all data when no deflection is measured), ℓ = L/2,
    /// EI = `ei_ref` and each σ_a at 10% of its set's standard deviation.
    pub fn initial(problem: &Problem, ei_ref: f64) -> Self {
        let measured: Vec<_> = problem
            .sets()
            .iter()
            .filter(|s| s.origin == crate::dataset::SetOrigin::Measured)
            .collect();
        let deflection: Vec<f64> = measured
            .iter()
            .filter(|s| s.kind == crate::kernel::QuantityKind::Deflection)
            .flat_map(|s| s.values.iter().copied())
            .collect();
        let pool: Vec<f64> = if deflection.len() >= 2 {
            deflection
        } else {
            measured
                .iter()
                .flat_map(|s| s.values.iter().copied())
                .collect()
        };
        let sigma_s = positive_or(spread(&pool), 1.0);

        let noise_sigmas = problem
            .learnable_sets()
            .iter()
            .map(|&i| {
                let set = &problem.training_sets()[i];
                let fallback = set.values.iter().fold(0.0f64, |a, v| a.max(v.abs())) * 0.1;
                positive_or(0.1 * spread(&set.values), positive_or(fallback, 1e-3))
            })
            .collect();
        ParamVector {
            sigma_s,
            ell: problem.length() / 2.0,
            ei: ei_ref,
            noise_sigmas,
        }
    }
}

/// Sample standard deviation, or RMS about zero when it collapses.
fn spread(values: &[f64]) -> f64 {
    let n = values.len();
    if n == 0 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    if var > 0.0 {
        var.sqrt()
    } else {
        (values.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt()
    }
}

fn positive_or(v: f64, fallback: f64) -> f64 {
    if v.is_finite() && v > 0.0 {
        v
    } else {
        fallback
    }
}

/// Independent uniform priors per parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub sigma_s: Interval,
    pub ell: Interval,
    pub ei: Interval,
    pub noise: Vec<Interval>,
}

impl PriorSpec {
    /// Improper priors on σ_s, ℓ; EI restricted to `(lo·ei_ref, hi·ei_ref)`;
    /// noise bounds taken from each learnable set.
    pub fn for_problem(problem: &Problem, ei_ref: f64, ei_bounds: (f64, f64)) -> Result<Self> {
        if !(ei_ref.is_finite() && ei_ref > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "reference stiffness must be positive, got {ei_ref}"
            )));
        }
        let noise = problem
            .learnable_sets()
            .iter()
            .map(|&i| match problem.training_sets()[i].noise {
                NoiseModel::Learnable(bounds) => bounds,
                NoiseModel::Known(_) => Interval::unbounded(),
            })
            .collect();
        Ok(PriorSpec {
            sigma_s: Interval::unbounded(),
            ell: Interval::unbounded(),
            ei: Interval::new(ei_bounds.0 * ei_ref, ei_bounds.1 * ei_ref)?,
            noise,
        })
    }

    fn intervals(&self) -> impl Iterator<Item = &Interval> {
        [&self.sigma_s, &self.ell, &self.ei]
            .into_iter()
            .chain(self.noise.iter())
    }

    /// Name of the first parameter lying outside its bounds, if any.
    pub fn violation(&self, psi: &ParamVector, names: &[String]) -> Option<String> {
        psi.to_vec()
            .iter()
            .zip(self.intervals())
            .zip(names)
            .find(|((v, iv), _)| !iv.contains(**v))
            .map(|((v, iv), name)| format!("{name} = {v} outside [{}, {}]", iv.lower, iv.upper))
    }
}

/// `Σ_i log p(ψ_i)`.
pub fn log_prior(psi: &ParamVector, prior: &PriorSpec) -> f64 {
    if prior.noise.len() != psi.noise_sigmas.len() {
        return f64::NEG_INFINITY;
    }
    psi.to_vec()
        .iter()
        .zip(prior.intervals())
        .map(|(v, iv)| iv.log_density(*v))
        .sum()
}

/// Gaussian log marginal likelihood of the stacked observations.
pub fn log_likelihood(problem: &Problem, psi: &ParamVector) -> Result<f64> {
    log_likelihood_with(problem, psi, &JitterPolicy::default())
}

pub fn log_likelihood_with(
    problem: &Problem,
    psi: &ParamVector,
    jitter: &JitterPolicy,
) -> Result<f64> {
    let kernel = psi.kernel()?;
    let cov = assemble(problem, &kernel, psi.ei, &psi.noise_sigmas)?;
    let factor = factorize(&cov, jitter)?;
    let alpha = factor.solve_lower(problem.values());
    let n = problem.n_observations() as f64;
    Ok(-0.5 * alpha.norm_squared() - 0.5 * factor.log_det() - 0.5 * n * (2.0 * PI).ln())
}

/// Unnormalized log-posterior. Out-of-prior ψ returns −∞ without touching
/// the covariance; numerical failures surface as errors.
pub fn log_posterior(problem: &Problem, psi: &ParamVector, prior: &PriorSpec) -> Result<f64> {
    log_posterior_with(problem, psi, prior, &JitterPolicy::default())
}

pub fn log_posterior_with(
    problem: &Problem,
    psi: &ParamVector,
    prior: &PriorSpec,
    jitter: &JitterPolicy,
) -> Result<f64> {
    let lp = log_prior(psi, prior);
    if lp == f64::NEG_INFINITY {
        return Ok(lp);
    }
    Ok(log_likelihood_with(problem, psi, jitter)? + lp)
}

/// Log-posterior bound to one problem and prior, usable as a sampler target.
/// Numerical failures map to −∞.
#[derive(Debug, Clone)]
pub struct PosteriorTarget<'a> {
    pub problem: &'a Problem,
    pub prior: PriorSpec,
    pub jitter: JitterPolicy,
}

impl<'a> PosteriorTarget<'a> {
    pub fn new(problem: &'a Problem, prior: PriorSpec) -> Self {
        PosteriorTarget {
            problem,
            prior,
            jitter: JitterPolicy::default(),
        }
    }
}

impl crate::sampler::LogTarget for PosteriorTarget<'_> {
    fn dim(&self) -> usize {
        3 + self.problem.learnable_sets().len()
    }

    fn log_density(&self, params: &[f64]) -> f64 {
        let Ok(psi) = ParamVector::from_slice(params) else {
            return f64::NEG_INFINITY;
        };
        if !psi.all_positive() {
            return f64::NEG_INFINITY;
        }
        log_posterior_with(self.problem, &psi, &self.prior, &self.jitter)
            .unwrap_or(f64::NEG_INFINITY)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{ObservationSet, SetOrigin};
    use crate::kernel::QuantityKind;

    fn unbounded_prior(k: usize) -> PriorSpec {
        PriorSpec {
            sigma_s: Interval::unbounded(),
            ell: Interval::unbounded(),
            ei: Interval::unbounded(),
            noise: vec![Interval::unbounded(); k],
        }
    }

    fn psi(noise: Vec<f64>) -> ParamVector {
        ParamVector {
            sigma_s: 1.0,
            ell: 0.5,
            ei: 2.0,
            noise_sigmas: noise,
        }
    }

    #[test]
    fn prior_examples() {
        assert_eq!(log_prior(&psi(vec![0.1]), &unbounded_prior(1)), 0.0);

        let mut prior = unbounded_prior(0);
        prior.ei = Interval::new(0.1, 2.0).unwrap();
        let mut low = psi(vec![]);
        low.ei = 0.05;
        assert_eq!(log_prior(&low, &prior), f64::NEG_INFINITY);

        let prior = PriorSpec {
            sigma_s: Interval::new(0.0, 2.0).unwrap(),
            ell: Interval::new(0.0, 2.0).unwrap(),
            ei: Interval::unbounded(),
            noise: vec![],
        };
        assert!((log_prior(&psi(vec![]), &prior) + 2.0 * 2f64.ln()).abs() < 1e-15);
    }

    fn single_point(value: f64, noise: f64) -> Problem {
        let set = ObservationSet::measured(
            QuantityKind::Deflection,
            "u",
            vec![0.5],
            vec![value],
            NoiseModel::Known(noise),
        )
        .unwrap();
        Problem::new(1.0, None, vec![set], vec![]).unwrap()
    }

    #[test]
    fn standard_normal_likelihoods() {
        // σ_s² + σ_a² = 1 up to default jitter (1e-10 relative).
        let p = single_point(0.0, 0.6);
        let psi = ParamVector {
            sigma_s: 0.8,
            ell: 1.0,
            ei: 1.0,
            noise_sigmas: vec![],
        };
        let ll = log_likelihood(&p, &psi).unwrap();
        assert!((ll + 0.918_938_533_204_672_7).abs() < 1e-9);

        let set = ObservationSet::measured(
            QuantityKind::Deflection,
            "u",
            vec![0.0, 100.0],
            vec![0.0, 0.0],
            NoiseModel::Known(0.6),
        )
        .unwrap();
        let p = Problem::new(100.0, None, vec![set], vec![]).unwrap();
        let psi = ParamVector {
            sigma_s: 0.8,
            ell: 0.1,
            ei: 1.0,
            noise_sigmas: vec![],
        };
        let ll = log_likelihood(&p, &psi).unwrap();
        assert!((ll + 1.837_877_066_409_345_5).abs() < 1e-9);
    }

    #[test]
    fn posterior_short_circuits_and_adds() {
        let p = single_point(0.3, 0.2);
        let mut prior = unbounded_prior(0);
        prior.ei = Interval::new(0.5, 4.0).unwrap();
        let mut bad = psi(vec![]);
        bad.ei = 10.0;
        // An invalid kernel would error if the likelihood were evaluated.
        bad.ell = -1.0;
        assert_eq!(log_posterior(&p, &bad, &prior).unwrap(), f64::NEG_INFINITY);

        let good = psi(vec![]);
        let ll = log_likelihood(&p, &good).unwrap();
        assert_eq!(log_posterior(&p, &good, &unbounded_prior(0)).unwrap(), ll);
        let lp = log_prior(&good, &prior);
        assert!((log_posterior(&p, &good, &prior).unwrap() - (ll + lp)).abs() < 1e-12);
    }

    #[test]
    fn likelihood_is_deterministic() {
        let set = ObservationSet::measured(
            QuantityKind::Deflection,
            "u",
            vec![0.1, 0.4, 0.9],
            vec![0.01, 0.05, 0.1],
            NoiseModel::learnable(),
        )
        .unwrap();
        let p = Problem::new(1.0, None, vec![set], vec![]).unwrap();
        let psi = psi(vec![0.01]);
        let a = log_likelihood(&p, &psi).unwrap();
        let b = log_likelihood(&p, &psi).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn best_data_scale_matches_closed_form() {
        // For y = α·y0, log p = -α² q/2 + const with q = y0ᵀK⁻¹y0, so over
        // α ∈ [a, b] with a > 0 the maximum sits at the smallest |α|.
        // Check the quadratic form directly against finite α probes.
        let xs = vec![0.2, 0.5, 0.8];
        let y0 = vec![0.1, -0.2, 0.05];
        let psi = ParamVector {
            sigma_s: 0.7,
            ell: 0.3,
            ei: 1.0,
            noise_sigmas: vec![],
        };
        let ll = |alpha: f64| {
            let vals = y0.iter().map(|v| alpha * v).collect();
            let set = ObservationSet::measured(
                QuantityKind::Deflection,
                "u",
                xs.clone(),
                vals,
                NoiseModel::Known(0.05),
            )
            .unwrap();
            let p = Problem::new(1.0, None, vec![set], vec![]).unwrap();
            log_likelihood(&p, &psi).unwrap()
        };
        let base = ll(0.0);
        let q = -2.0 * (ll(1.0) - base);
        for alpha in [0.5, 2.0, -3.0] {
            assert!((ll(alpha) - (base - 0.5 * alpha * alpha * q)).abs() < 1e-10);
        }
    }

    #[test]
    fn initial_point_is_positive() {
        let u = ObservationSet::measured(
            QuantityKind::Deflection,
            "u",
            vec![0.5, 1.0],
            vec![0.04, 0.12],
            NoiseModel::learnable(),
        )
        .unwrap();
        let q = ObservationSet::constraint(QuantityKind::Load, "q", vec![0.5], vec![1.0]).unwrap();
        assert_eq!(q.origin, SetOrigin::Constraint);
        let p = Problem::new(2.0, None, vec![u, q], vec![]).unwrap();
        let init = ParamVector::initial(&p, 5.0);
        assert!(init.all_positive());
        assert_eq!(init.ell, 1.0);
        assert_eq!(init.ei, 5.0);
        assert_eq!(init.noise_sigmas.len(), 1);
        assert_eq!(ParamVector::from_slice(&init.to_vec()).unwrap(), init);
    }

    #[test]
    fn interval_serde_handles_infinity() {
        let iv = Interval::unbounded();
        let text = serde_json::to_string(&iv).unwrap();
        let back: Interval = serde_json::from_str(&text).unwrap();
        assert_eq!(back, iv);
        assert!(Interval::new(1.0, 1.0).is_err());
    }
}
