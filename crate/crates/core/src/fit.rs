//! End-to-end stiffness regression: prior, starting point, MH chain and the
//! normalized stiffness posterior.

use serde::{Deserialize, Serialize};

use crate::covariance::JitterPolicy;
use crate::damage::StiffnessPosterior;
use crate::dataset::Problem;
use crate::error::{Error, Result};
use crate::posterior::{ParamVector, PosteriorTarget, PriorSpec};
use crate::sampler::{chain_summary, run_mh, Chain, ChainSummary, LogTarget, MHConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub mh: MHConfig,
    /// EI prior as multiples of the reference stiffness.
    pub ei_prior_bounds: (f64, f64),
    pub jitter: JitterPolicy,
    /// Overrides the default starting point.
    pub init: Option<ParamVector>,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            mh: MHConfig::default(),
            ei_prior_bounds: (0.1, 2.0),
            jitter: JitterPolicy::default(),
            init: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub chain: Chain,
    pub map: ParamVector,
    pub summary: ChainSummary,
    /// EI posterior normalized by the reference stiffness.
    pub stiffness: StiffnessPosterior,
    pub prior: PriorSpec,
}

pub fn fit(problem: &Problem, ei_ref: f64, config: &FitConfig) -> Result<FitResult> {
    let prior = PriorSpec::for_problem(problem, ei_ref, config.ei_prior_bounds)?;
    let names = ParamVector::names(problem);
    let init = config
        .init
        .clone()
        .unwrap_or_else(|| ParamVector::initial(problem, ei_ref));
    if init.noise_sigmas.len() != problem.learnable_sets().len() {
        return Err(Error::InvalidArgument(format!(
            "initial point has {} noise levels, problem has {} learnable sets",
            init.noise_sigmas.len(),
            problem.learnable_sets().len()
        )));
    }
    if let Some(v) = prior.violation(&init, &names) {
        return Err(Error::InvalidStart(format!(
            "initial point violates the prior: {v}"
        )));
    }
    let target = PosteriorTarget {
        problem,
        prior: prior.clone(),
        jitter: config.jitter,
    };
    if !target.log_density(&init.to_vec()).is_finite() {
        return Err(Error::InvalidStart(
            "log-posterior is not finite at the initial point (covariance could not be factorized)"
                .into(),
        ));
    }
    let chain = run_mh(&target, &init.to_vec(), &config.mh)?.with_names(names);
    if chain.len() < 2 {
        return Err(Error::InvalidArgument(
            "chain retains fewer than 2 samples".into(),
        ));
    }
    let map = ParamVector::from_slice(crate::sampler::map_estimate(&chain)?)?;
    let summary = chain_summary(&chain)?;
    let stiffness = StiffnessPosterior::from_samples(&chain.column(ParamVector::EI), ei_ref)?;
    Ok(FitResult {
        chain,
        map,
        summary,
        stiffness,
        prior,
    })
}
