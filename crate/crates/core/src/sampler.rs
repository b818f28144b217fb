//! Random-walk Metropolis-Hastings with burn-in scale adaptation, chain
//! summaries and CSV export.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::format_f64;
use crate::error::{Error, Result};

/// Unnormalized log-density over a parameter vector.
pub trait LogTarget: Sync {
    fn dim(&self) -> usize;

    /// Log-density of the parameters in their natural space. May return −∞.
    fn log_density(&self, params: &[f64]) -> f64;

    /// Coordinate transforms for the random walk. Defaults to log space for
    /// every coordinate.
    fn transforms(&self) -> Vec<Transform> {
        vec![Transform::Log; self.dim()]
    }
}

/// Closure-backed target.
pub struct FnTarget<F> {
    pub dim: usize,
    pub transforms: Vec<Transform>,
    pub f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> LogTarget for FnTarget<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn log_density(&self, params: &[f64]) -> f64 {
        (self.f)(params)
    }

    fn transforms(&self) -> Vec<Transform> {
        self.transforms.clone()
    }
}

/// Space in which a coordinate takes its random-walk steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Transform {
    Identity,
    /// Walk on `log θ`; the target picks up the Jacobian `log θ`.
    Log,
}

impl Transform {
    fn forward(self, v: f64) -> f64 {
        match self {
            Transform::Identity => v,
            Transform::Log => v.ln(),
        }
    }

    fn inverse(self, z: f64) -> f64 {
        match self {
            Transform::Identity => z,
            Transform::Log => z.exp(),
        }
    }

    fn log_jacobian(self, v: f64) -> f64 {
        match self {
            Transform::Identity => 0.0,
            Transform::Log => v.ln(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Adaptation {
    Off,
    /// Rescale all proposal widths after every `window` burn-in steps,
    /// pushing the window acceptance toward `target`. Frozen after burn-in.
    TargetAcceptance {
        target: f64,
        window: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MHConfig {
    pub n_steps: usize,
    pub burn_in: usize,
    pub thin: usize,
    /// Per-coordinate step std in walk space; a single entry is broadcast.
    pub proposal_scales: Vec<f64>,
    pub adapt: Adaptation,
    pub seed: u64,
}

impl Default for MHConfig {
    fn default() -> Self {
        MHConfig {
            n_steps: 20_000,
            burn_in: 5_000,
            thin: 10,
            proposal_scales: vec![0.05],
            adapt: Adaptation::TargetAcceptance {
                target: 0.30,
                window: 100,
            },
            seed: 0,
        }
    }
}

impl MHConfig {
    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.burn_in >= self.n_steps {
            return Err(Error::InvalidArgument(format!(
                "burn_in ({}) must be smaller than n_steps ({})",
                self.burn_in, self.n_steps
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidArgument("thin must be at least 1".into()));
        }
        if !(self.proposal_scales.len() == 1 || self.proposal_scales.len() == dim) {
            return Err(Error::InvalidArgument(format!(
                "expected 1 or {dim} proposal scales, got {}",
                self.proposal_scales.len()
            )));
        }
        if self
            .proposal_scales
            .iter()
            .any(|s| !(s.is_finite() && *s > 0.0))
        {
            return Err(Error::InvalidArgument(
                "proposal scales must be positive".into(),
            ));
        }
        if let Adaptation::TargetAcceptance { target, window } = self.adapt {
            if !(target > 0.0 && target < 1.0) || window == 0 {
                return Err(Error::InvalidArgument(format!(
                    "adaptation needs 0 < target < 1 and window > 0, got ({target}, {window})"
                )));
            }
        }
        Ok(())
    }

    /// Number of samples a valid config retains.
    pub fn retained(&self) -> usize {
        (self.n_steps - self.burn_in) / self.thin
    }

    fn scales(&self, dim: usize) -> Vec<f64> {
        if self.proposal_scales.len() == 1 {
            vec![self.proposal_scales[0]; dim]
        } else {
            self.proposal_scales.clone()
        }
    }
}

/// Retained MH samples after burn-in and thinning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    pub names: Vec<String>,
    pub samples: Vec<Vec<f64>>,
    /// Target log-density (natural space, no Jacobian) of each sample.
    pub log_posterior_trace: Vec<f64>,
    /// Fraction of accepted proposals after burn-in.
    pub acceptance_rate: f64,
    pub map_index: usize,
    /// Proposal widths in effect after adaptation.
    pub final_scales: Vec<f64>,
    pub warnings: Vec<String>,
}

pub fn run_mh<T: LogTarget + ?Sized>(target: &T, init: &[f64], config: &MHConfig) -> Result<Chain> {
    let dim = target.dim();
    if init.len() != dim {
        return Err(Error::ContractViolation(format!(
            "initial point has {} entries, target expects {dim}",
            init.len()
        )));
    }
    config.validate(dim)?;
    let transforms = target.transforms();
    if transforms.len() != dim {
        return Err(Error::ContractViolation(
            "target transforms do not match its dimension".into(),
        ));
    }
    if init
        .iter()
        .zip(&transforms)
        .any(|(v, t)| *t == Transform::Log && !(*v > 0.0))
    {
        return Err(Error::InvalidStart(
            "log-space coordinates must start positive".into(),
        ));
    }

    let mut current: Vec<f64> = init.to_vec();
    let mut current_lp = target.log_density(&current);
    if !current_lp.is_finite() {
        return Err(Error::InvalidStart(format!(
            "target log-density at the initial point is {current_lp}"
        )));
    }
    let jacobian = |v: &[f64]| -> f64 {
        v.iter()
            .zip(&transforms)
            .map(|(x, t)| t.log_jacobian(*x))
            .sum()
    };
    let mut current_walk = current_lp + jacobian(&current);
    let mut z: Vec<f64> = current
        .iter()
        .zip(&transforms)
        .map(|(v, t)| t.forward(*v))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut scales = config.scales(dim);
    let mut proposal_z = vec![0.0; dim];
    let mut proposal = vec![0.0; dim];

    let capacity = config.retained();
    let mut samples = Vec::with_capacity(capacity);
    let mut trace = Vec::with_capacity(capacity);
    let mut accepted_post = 0usize;
    let mut window_accepts = 0usize;
    let mut windows_done = 0usize;

    for step in 0..config.n_steps {
        for i in 0..dim {
            let eps: f64 = rng.sample(StandardNormal);
            proposal_z[i] = z[i] + scales[i] * eps;
            proposal[i] = transforms[i].inverse(proposal_z[i]);
        }
        let proposal_lp = if proposal.iter().all(|v| v.is_finite()) {
            target.log_density(&proposal)
        } else {
            f64::NEG_INFINITY
        };
        let mut accepted = false;
        if proposal_lp.is_finite() {
            let proposal_walk = proposal_lp + jacobian(&proposal);
            let log_ratio = proposal_walk - current_walk;
            let u: f64 = rng.random();
            if log_ratio >= 0.0 || u.ln() < log_ratio {
                accepted = true;
                std::mem::swap(&mut z, &mut proposal_z);
                std::mem::swap(&mut current, &mut proposal);
                current_lp = proposal_lp;
                current_walk = proposal_walk;
            }
        }

        if step < config.burn_in {
            if let Adaptation::TargetAcceptance {
                target: goal,
                window,
            } = config.adapt
            {
                window_accepts += accepted as usize;
                if (step + 1) % window == 0 {
                    windows_done += 1;
                    let rate = window_accepts as f64 / window as f64;
                    let gain = (rate - goal) / (windows_done as f64).sqrt();
                    let factor = gain.clamp(-1.0, 1.0).exp();
                    scales.iter_mut().for_each(|s| *s *= factor);
                    window_accepts = 0;
                }
            }
        } else {
            accepted_post += accepted as usize;
            if (step - config.burn_in + 1).is_multiple_of(config.thin) {
                samples.push(current.clone());
                trace.push(current_lp);
            }
        }
    }

    let post_steps = config.n_steps - config.burn_in;
    let acceptance_rate = accepted_post as f64 / post_steps as f64;
    let mut warnings = Vec::new();
    if accepted_post == 0 {
        warnings.push("no proposal was accepted after burn-in".to_string());
    }
    let map_index = argmax(&trace);
    Ok(Chain {
        names: (0..dim).map(|i| format!("p{i}")).collect(),
        samples,
        log_posterior_trace: trace,
        acceptance_rate,
        map_index,
        final_scales: scales,
        warnings,
    })
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Runs one chain per seed; chains may execute concurrently.
pub fn run_mh_chains<T: LogTarget + ?Sized>(
    target: &T,
    init: &[f64],
    config: &MHConfig,
    seeds: &[u64],
) -> Vec<Result<Chain>> {
    let run = |&seed: &u64| {
        let cfg = MHConfig {
            seed,
            ..config.clone()
        };
        run_mh(target, init, &cfg)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        seeds.par_iter().map(run).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        seeds.iter().map(run).collect()
    }
}

impl Chain {
    pub fn with_names(mut self, names: Vec<String>) -> Self {
        self.names = names;
        self
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Values of one parameter across the retained samples.
    pub fn column(&self, index: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s[index]).collect()
    }

    /// CSV with one row per sample: parameter columns then `log_posterior`.
    /// The acceptance rate travels in a leading `#` comment.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# acceptance_rate={}",
            format_f64(self.acceptance_rate)
        );
        let _ = writeln!(out, "{},log_posterior", self.names.join(","));
        for (sample, lp) in self.samples.iter().zip(&self.log_posterior_trace) {
            let row: Vec<String> = sample.iter().map(|v| format_f64(*v)).collect();
            let _ = writeln!(out, "{},{}", row.join(","), format_f64(*lp));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut acceptance_rate = f64::NAN;
        let mut names: Option<Vec<String>> = None;
        let mut samples = Vec::new();
        let mut trace = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(v) = comment.trim().strip_prefix("acceptance_rate=") {
                    acceptance_rate = v
                        .trim()
                        .parse()
                        .map_err(|_| Error::parse(line_no, "bad acceptance_rate"))?;
                }
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            match &names {
                None => {
                    if fields.last() != Some(&"log_posterior") || fields.len() < 2 {
                        return Err(Error::parse(
                            line_no,
                            "chain header must end with log_posterior",
                        ));
                    }
                    names = Some(
                        fields[..fields.len() - 1]
                            .iter()
                            .map(|s| s.to_string())
                            .collect(),
                    );
                }
                Some(n) => {
                    if fields.len() != n.len() + 1 {
                        return Err(Error::parse(
                            line_no,
                            format!("expected {} fields, got {}", n.len() + 1, fields.len()),
                        ));
                    }
                    let values = fields
                        .iter()
                        .map(|f| {
                            f.parse::<f64>().map_err(|_| {
                                Error::parse(line_no, format!("'{f}' is not a number"))
                            })
                        })
                        .collect::<Result<Vec<f64>>>()?;
                    trace.push(values[n.len()]);
                    samples.push(values[..n.len()].to_vec());
                }
            }
        }
        let names = names.ok_or_else(|| Error::parse(1, "empty chain file"))?;
        let map_index = argmax(&trace);
        Ok(Chain {
            names,
            samples,
            log_posterior_trace: trace,
            acceptance_rate,
            map_index,
            final_scales: Vec::new(),
            warnings: Vec::new(),
        })
    }
}

/// Sample with the highest log-posterior.
pub fn map_estimate(chain: &Chain) -> Result<&[f64]> {
    if chain.is_empty() {
        return Err(Error::ContractViolation(
            "MAP estimate of an empty chain".into(),
        ));
    }
    Ok(&chain.samples[chain.map_index])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSummary {
    pub names: Vec<String>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Pearson correlations; entries involving a constant parameter are 0.
    pub correlation: Vec<Vec<f64>>,
    /// Parameters with zero spread.
    pub degenerate: Vec<bool>,
}

pub fn chain_summary(chain: &Chain) -> Result<ChainSummary> {
    let n = chain.len();
    if n < 2 {
        return Err(Error::ContractViolation(format!(
            "chain summary needs at least 2 samples, got {n}"
        )));
    }
    let dim = chain.samples[0].len();
    let data = DMatrix::from_fn(n, dim, |i, j| chain.samples[i][j]);
    let mean: Vec<f64> = (0..dim).map(|j| data.column(j).mean()).collect();
    let centered = DMatrix::from_fn(n, dim, |i, j| data[(i, j)] - mean[j]);
    let cov = centered.transpose() * &centered / (n - 1) as f64;
    let std: Vec<f64> = (0..dim).map(|j| cov[(j, j)].max(0.0).sqrt()).collect();
    let degenerate: Vec<bool> = std
        .iter()
        .zip(&mean)
        .map(|(s, m)| *s <= 1e-14 * m.abs().max(f64::MIN_POSITIVE))
        .collect();
    let correlation = (0..dim)
        .map(|a| {
            (0..dim)
                .map(|b| {
                    if degenerate[a] || degenerate[b] {
                        0.0
                    } else {
                        (cov[(a, b)] / (std[a] * std[b])).clamp(-1.0, 1.0)
                    }
                })
                .collect()
        })
        .collect();
    Ok(ChainSummary {
        names: chain.names.clone(),
        mean,
        std,
        correlation,
        degenerate,
    })
}

/// Potential scale reduction factor per parameter across chains.
pub fn gelman_rubin(chains: &[Chain]) -> Result<Vec<f64>> {
    if chains.len() < 2 {
        return Err(Error::ContractViolation(
            "R-hat needs at least two chains".into(),
        ));
    }
    let n = chains.iter().map(Chain::len).min().unwrap_or(0);
    if n < 2 {
        return Err(Error::ContractViolation(
            "R-hat needs at least two samples per chain".into(),
        ));
    }
    let dim = chains[0].samples[0].len();
    let m = chains.len() as f64;
    let nf = n as f64;
    Ok((0..dim)
        .map(|j| {
            let stats: Vec<(f64, f64)> = chains
                .iter()
                .map(|c| {
                    let col: Vec<f64> = c.samples[..n].iter().map(|s| s[j]).collect();
                    let mean = col.iter().sum::<f64>() / nf;
                    let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0);
                    (mean, var)
                })
                .collect();
            let grand = stats.iter().map(|s| s.0).sum::<f64>() / m;
            let between = nf / (m - 1.0) * stats.iter().map(|s| (s.0 - grand).powi(2)).sum::<f64>();
            let within = stats.iter().map(|s| s.1).sum::<f64>() / m;
            let pooled = (nf - 1.0) / nf * within + between / nf;
            (pooled / within).sqrt()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn normal_target() -> FnTarget<impl Fn(&[f64]) -> f64 + Sync> {
        FnTarget {
            dim: 1,
            transforms: vec![Transform::Identity],
            f: |p: &[f64]| -0.5 * p[0] * p[0],
        }
    }

    #[test]
    fn constant_target_always_accepts() {
        let target = FnTarget {
            dim: 2,
            transforms: vec![Transform::Identity; 2],
            f: |_: &[f64]| 3.0,
        };
        let chain = run_mh(
            &target,
            &[0.0, 1.0],
            &MHConfig {
                n_steps: 2000,
                burn_in: 500,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(chain.acceptance_rate, 1.0);
    }

    #[test]
    fn standard_normal_moments() {
        let cfg = MHConfig {
            n_steps: 50_000,
            burn_in: 1_000,
            thin: 1,
            proposal_scales: vec![1.0],
            seed: 7,
            ..Default::default()
        };
        let chain = run_mh(&normal_target(), &[0.0], &cfg).unwrap();
        let xs = chain.column(0);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        assert!(mean.abs() < 0.05, "mean {mean}");
        assert!((0.85..=1.15).contains(&var), "var {var}");
    }

    #[test]
    fn same_seed_same_chain() {
        let cfg = MHConfig {
            n_steps: 3000,
            burn_in: 1000,
            seed: 42,
            ..Default::default()
        };
        let a = run_mh(&normal_target(), &[0.3], &cfg).unwrap();
        let b = run_mh(&normal_target(), &[0.3], &cfg).unwrap();
        assert_eq!(a, b);
        let c = run_mh(&normal_target(), &[0.3], &MHConfig { seed: 43, ..cfg }).unwrap();
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn invalid_start_and_config() {
        let target = FnTarget {
            dim: 1,
            transforms: vec![Transform::Log],
            f: |p: &[f64]| if p[0] > 1.0 { 0.0 } else { f64::NEG_INFINITY },
        };
        assert!(matches!(
            run_mh(&target, &[0.5], &MHConfig::default()),
            Err(Error::InvalidStart(_))
        ));
        let bad = MHConfig {
            burn_in: 10,
            n_steps: 10,
            ..Default::default()
        };
        assert!(run_mh(&target, &[2.0], &bad).is_err());
        let bad = MHConfig {
            thin: 0,
            ..Default::default()
        };
        assert!(run_mh(&target, &[2.0], &bad).is_err());
        let bad = MHConfig {
            adapt: Adaptation::TargetAcceptance {
                target: 1.5,
                window: 10,
            },
            ..Default::default()
        };
        assert!(run_mh(&target, &[2.0], &bad).is_err());
    }

    #[test]
    fn all_rejected_chain_warns() {
        let target = FnTarget {
            dim: 1,
            transforms: vec![Transform::Identity],
            f: |p: &[f64]| if p[0] == 0.25 { 0.0 } else { f64::NEG_INFINITY },
        };
        let cfg = MHConfig {
            n_steps: 200,
            burn_in: 100,
            adapt: Adaptation::Off,
            ..Default::default()
        };
        let chain = run_mh(&target, &[0.25], &cfg).unwrap();
        assert_eq!(chain.acceptance_rate, 0.0);
        assert_eq!(chain.warnings.len(), 1);
    }

    #[test]
    fn discrete_target_stationary_distribution() {
        // Three states embedded by rounding: P(0)=0.2, P(1)=0.5, P(2)=0.3.
        let probs = [0.2f64, 0.5, 0.3];
        let target = FnTarget {
            dim: 1,
            transforms: vec![Transform::Identity],
            f: move |p: &[f64]| {
                let k = p[0].round();
                if (0.0..=2.0).contains(&k) && (p[0] - k).abs() < 0.5 {
                    probs[k as usize].ln()
                } else {
                    f64::NEG_INFINITY
                }
            },
        };
        let cfg = MHConfig {
            n_steps: 1_000_000,
            burn_in: 1_000,
            thin: 1,
            proposal_scales: vec![1.2],
            adapt: Adaptation::Off,
            seed: 11,
        };
        let chain = run_mh(&target, &[1.0], &cfg).unwrap();
        let mut counts = [0usize; 3];
        for s in &chain.samples {
            counts[s[0].round() as usize] += 1;
        }
        for (c, p) in counts.iter().zip(probs) {
            let freq = *c as f64 / chain.len() as f64;
            assert!((freq - p).abs() / p < 0.02, "freq {freq} vs {p}");
        }
    }

    #[test]
    fn map_and_summary() {
        let chain = Chain {
            names: vec!["a".into(), "b".into()],
            samples: vec![vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]],
            log_posterior_trace: vec![-5.0, -1.0, -3.0],
            acceptance_rate: 0.5,
            map_index: 1,
            final_scales: vec![],
            warnings: vec![],
        };
        assert_eq!(map_estimate(&chain).unwrap(), &[2.0, 4.0]);
        let s = chain_summary(&chain).unwrap();
        assert!((s.correlation[0][1] - 1.0).abs() < 1e-12);
        assert!((s.mean[1] - 4.0).abs() < 1e-12);

        let single = Chain {
            samples: vec![vec![1.0, 1.0]],
            log_posterior_trace: vec![0.0],
            map_index: 0,
            ..chain.clone()
        };
        assert_eq!(map_estimate(&single).unwrap(), &[1.0, 1.0]);
        assert!(chain_summary(&single).is_err());

        let constant = Chain {
            samples: vec![vec![1.0, 2.0]; 4],
            log_posterior_trace: vec![0.0; 4],
            map_index: 0,
            ..chain.clone()
        };
        let s = chain_summary(&constant).unwrap();
        assert_eq!(s.std, vec![0.0, 0.0]);
        assert_eq!(s.correlation[0][1], 0.0);
        assert!(s.degenerate.iter().all(|d| *d));

        let empty = Chain {
            samples: vec![],
            log_posterior_trace: vec![],
            ..chain
        };
        assert!(map_estimate(&empty).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let cfg = MHConfig {
            n_steps: 600,
            burn_in: 100,
            thin: 5,
            seed: 3,
            ..Default::default()
        };
        let chain = run_mh(&normal_target(), &[0.1], &cfg)
            .unwrap()
            .with_names(vec!["x".into()]);
        let back = Chain::from_csv(&chain.to_csv()).unwrap();
        assert_eq!(back.samples, chain.samples);
        assert_eq!(back.log_posterior_trace, chain.log_posterior_trace);
        assert_eq!(back.acceptance_rate, chain.acceptance_rate);
        assert_eq!(back.map_index, chain.map_index);
        assert!(Chain::from_csv("x,y\n1,2\n").is_err());
    }

    #[test]
    fn rhat_near_one_for_same_target() {
        let cfg = MHConfig {
            n_steps: 20_000,
            burn_in: 2_000,
            thin: 5,
            proposal_scales: vec![1.0],
            ..Default::default()
        };
        let chains: Vec<Chain> = run_mh_chains(&normal_target(), &[0.0], &cfg, &[1, 2, 3])
            .into_iter()
            .collect::<Result<_>>()
            .unwrap();
        let rhat = gelman_rubin(&chains).unwrap();
        assert!((rhat[0] - 1.0).abs() < 0.05, "{rhat:?}");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn retained_length_formula(n_steps in 2usize..400, burn_frac in 0.0..0.99f64, thin in 1usize..20) {
                let burn_in = ((n_steps as f64) * burn_frac) as usize;
                let cfg = MHConfig { n_steps, burn_in, thin, adapt: Adaptation::Off, ..Default::default() };
                let chain = run_mh(&normal_target(), &[0.0], &cfg).unwrap();
                prop_assert_eq!(chain.len(), (n_steps - burn_in) / thin);
                prop_assert!((0.0..=1.0).contains(&chain.acceptance_rate));
            }
        }
    }
}
