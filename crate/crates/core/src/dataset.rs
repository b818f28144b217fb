//! Observation sets, boundary conditions and the CSV/sidecar file formats.
//!
//! A [`Problem`] is an ordered list of sensor groups plus boundary
//! conditions. Boundary conditions become single-point noiseless sets so the
//! covariance machinery treats them like any other data.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::ops::Range;
use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::QuantityKind;
use crate::posterior::Interval;

/// Slack allowed on the `[0, L]` bounds check.
const LOCATION_TOL: f64 = 1e-12;

/// Noise treatment of one observation set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NoiseModel {
    /// Fixed standard deviation. Zero only for constraint sets.
    Known(f64),
    /// Standard deviation sampled with the other parameters, uniform prior.
    Learnable(Interval),
}

impl NoiseModel {
    pub fn learnable() -> Self {
        NoiseModel::Learnable(Interval::unbounded())
    }
}

/// Whether a set carries sensor readings or an exact, known constraint
/// (support conditions, applied load).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SetOrigin {
    Measured,
    Constraint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSet {
    pub kind: QuantityKind,
    pub label: String,
    pub locations: Vec<f64>,
    pub values: Vec<f64>,
    pub noise: NoiseModel,
    pub origin: SetOrigin,
}

impl ObservationSet {
    pub fn measured(
        kind: QuantityKind,
        label: impl Into<String>,
        locations: Vec<f64>,
        values: Vec<f64>,
        noise: NoiseModel,
    ) -> Result<Self> {
        let set = ObservationSet {
            kind,
            label: label.into(),
            locations,
            values,
            noise,
            origin: SetOrigin::Measured,
        };
        set.validate()?;
        Ok(set)
    }

    /// An exactly known set, e.g. the applied load.
    pub fn constraint(
        kind: QuantityKind,
        label: impl Into<String>,
        locations: Vec<f64>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let set = ObservationSet {
            kind,
            label: label.into(),
            locations,
            values,
            noise: NoiseModel::Known(0.0),
            origin: SetOrigin::Constraint,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    pub fn is_learnable(&self) -> bool {
        matches!(self.noise, NoiseModel::Learnable(_))
    }

    fn validate(&self) -> Result<()> {
        if self.locations.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "observation set '{}' is empty",
                self.label
            )));
        }
        if self.locations.len() != self.values.len() {
            return Err(Error::InvalidArgument(format!(
                "observation set '{}' has {} locations but {} values",
                self.label,
                self.locations.len(),
                self.values.len()
            )));
        }
        if let Some(bad) = self
            .locations
            .iter()
            .chain(&self.values)
            .find(|v| !v.is_finite())
        {
            return Err(Error::InvalidArgument(format!(
                "observation set '{}' contains non-finite entry {bad}",
                self.label
            )));
        }
        match (self.noise, self.origin) {
            (NoiseModel::Known(s), SetOrigin::Measured) if !(s.is_finite() && s > 0.0) => {
                Err(Error::InvalidArgument(format!(
                    "measured set '{}' needs a positive known noise level, got {s}",
                    self.label
                )))
            }
            (NoiseModel::Known(s), SetOrigin::Constraint) if s != 0.0 => {
                Err(Error::InvalidArgument(format!(
                    "constraint set '{}' must be noiseless",
                    self.label
                )))
            }
            (NoiseModel::Learnable(_), SetOrigin::Constraint) => {
                Err(Error::InvalidArgument(format!(
                    "constraint set '{}' cannot have learnable noise",
                    self.label
                )))
            }
            _ => Ok(()),
        }
    }
}

/// A known field value at a point, e.g. zero rotation at a clamped end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCondition {
    pub kind: QuantityKind,
    pub location: f64,
    pub value: f64,
}

impl BoundaryCondition {
    pub fn new(kind: QuantityKind, location: f64, value: f64) -> Self {
        BoundaryCondition {
            kind,
            location,
            value,
        }
    }

    fn label(&self) -> String {
        format!("bc:{}@{}", self.kind, self.location)
    }
}

/// Converts a boundary condition into a one-point noiseless set.
pub fn bc_to_observation(bc: &BoundaryCondition, length: f64) -> Result<ObservationSet> {
    check_location(bc.location, length).map_err(|_| {
        Error::Domain(format!(
            "boundary condition location {} outside [0, {length}]",
            bc.location
        ))
    })?;
    ObservationSet::constraint(bc.kind, bc.label(), vec![bc.location], vec![bc.value])
}

fn check_location(x: f64, length: f64) -> Result<()> {
    if x < -LOCATION_TOL || x > length + LOCATION_TOL * length.max(1.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "location {x} outside beam [0, {length}]"
        )));
    }
    Ok(())
}

/// A validated regression problem with a cached flat layout of all training
/// points (observation sets first, then boundary conditions).
#[derive(Debug, Clone)]
pub struct Problem {
    length: f64,
    fiber_distance: Option<f64>,
    sets: Vec<ObservationSet>,
    boundary_conditions: Vec<BoundaryCondition>,
    training: Vec<ObservationSet>,
    blocks: Vec<Range<usize>>,
    kinds: Vec<QuantityKind>,
    locations: Vec<f64>,
    values: DVector<f64>,
    learnable: Vec<usize>,
    warnings: Vec<String>,
}

impl Problem {
    pub fn new(
        length: f64,
        fiber_distance: Option<f64>,
        sets: Vec<ObservationSet>,
        boundary_conditions: Vec<BoundaryCondition>,
    ) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "beam length must be positive, got {length}"
            )));
        }
        if let Some(c) = fiber_distance {
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "fiber distance must be positive, got {c}"
                )));
            }
        }
        if !sets.iter().any(|s| s.origin == SetOrigin::Measured) {
            return Err(Error::InvalidArgument(
                "a problem needs at least one measured observation set".into(),
            ));
        }
        let mut training = Vec::with_capacity(sets.len() + boundary_conditions.len());
        for set in &sets {
            set.validate()?;
            for &x in &set.locations {
                check_location(x, length)
                    .map_err(|e| Error::Domain(format!("set '{}': {e}", set.label)))?;
            }
            training.push(set.clone());
        }
        for bc in &boundary_conditions {
            training.push(bc_to_observation(bc, length)?);
        }
        if fiber_distance.is_none() && training.iter().any(|s| s.kind == QuantityKind::Strain) {
            return Err(Error::Config(
                "strain observations require a fiber distance c".into(),
            ));
        }

        let mut blocks = Vec::with_capacity(training.len());
        let mut kinds = Vec::new();
        let mut locations = Vec::new();
        let mut values = Vec::new();
        let mut learnable = Vec::new();
        for (i, set) in training.iter().enumerate() {
            let start = kinds.len();
            kinds.extend(std::iter::repeat_n(set.kind, set.len()));
            locations.extend_from_slice(&set.locations);
            values.extend_from_slice(&set.values);
            blocks.push(start..kinds.len());
            if set.is_learnable() {
                learnable.push(i);
            }
        }

        let mut warnings = Vec::new();
        let free = 3 + learnable.len();
        if kinds.len() < free {
            warnings.push(format!(
                "only {} observations for {free} free parameters",
                kinds.len()
            ));
        }

        Ok(Problem {
            length,
            fiber_distance,
            sets,
            boundary_conditions,
            training,
            blocks,
            kinds,
            locations,
            values: DVector::from_vec(values),
            learnable,
            warnings,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn fiber_distance(&self) -> Option<f64> {
        self.fiber_distance
    }

    /// Observation sets as supplied (boundary conditions excluded).
    pub fn sets(&self) -> &[ObservationSet] {
        &self.sets
    }

    pub fn boundary_conditions(&self) -> &[BoundaryCondition] {
        &self.boundary_conditions
    }

    /// All sets entering the covariance, in block order.
    pub fn training_sets(&self) -> &[ObservationSet] {
        &self.training
    }

    /// Row range of each training set in the global covariance.
    pub fn blocks(&self) -> &[Range<usize>] {
        &self.blocks
    }

    pub fn n_observations(&self) -> usize {
        self.kinds.len()
    }

    pub fn kinds(&self) -> &[QuantityKind] {
        &self.kinds
    }

    pub fn locations(&self) -> &[f64] {
        &self.locations
    }

    /// Stacked observation vector `y` in block order.
    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    /// Indices into [`Self::training_sets`] whose noise is learnable, in the
    /// order their σ appears in a parameter vector.
    pub fn learnable_sets(&self) -> &[usize] {
        &self.learnable
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Distinct kinds present among the training sets.
    pub fn present_kinds(&self) -> Vec<QuantityKind> {
        let mut kinds: Vec<_> = self.training.iter().map(|s| s.kind).collect();
        kinds.sort();
        kinds.dedup();
        kinds
    }

    /// Per-point noise variance given the learnable σ values.
    pub fn noise_variances(&self, noise_sigmas: &[f64]) -> Result<Vec<f64>> {
        if noise_sigmas.len() != self.learnable.len() {
            return Err(Error::ContractViolation(format!(
                "expected {} noise levels, got {}",
                self.learnable.len(),
                noise_sigmas.len()
            )));
        }
        let mut out = vec![0.0; self.n_observations()];
        let mut slot = 0;
        for (set, block) in self.training.iter().zip(&self.blocks) {
            let sigma = match set.noise {
                NoiseModel::Known(s) => s,
                NoiseModel::Learnable(_) => {
                    let s = noise_sigmas[slot];
                    slot += 1;
                    if !(s.is_finite() && s > 0.0) {
                        return Err(Error::Domain(format!(
                            "noise level for set '{}' must be positive, got {s}",
                            set.label
                        )));
                    }
                    s
                }
            };
            out[block.clone()]
                .iter_mut()
                .for_each(|v| *v = sigma * sigma);
        }
        Ok(out)
    }

    /// Serializes the observation sets in the dataset CSV format.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,label,x,value,sigma\n");
        for set in &self.sets {
            let sigma = match set.noise {
                NoiseModel::Known(s) => format_f64(s),
                NoiseModel::Learnable(_) => String::new(),
            };
            for (x, y) in set.locations.iter().zip(&set.values) {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    set.kind,
                    set.label,
                    format_f64(*x),
                    format_f64(*y),
                    sigma
                );
            }
        }
        out
    }

    /// Sidecar configuration matching this problem.
    pub fn config(&self) -> ProblemConfig {
        ProblemConfig {
            length: Some(self.length),
            fiber_distance: self.fiber_distance,
            ei_ref: None,
            boundary_conditions: self.boundary_conditions.clone(),
        }
    }
}

/// 17 significant digits, enough to round-trip any f64.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Sidecar settings for a dataset file: beam length, fiber distance, an
/// optional reference stiffness and the boundary conditions.
///
/// Text form is `key=value` per line (`#` starts a comment):
///
/// ```text
/// length=1.0
/// fiber_distance=0.1
/// ei_ref=1.0
/// bc.u.0=0
/// bc.m.1.0=0
/// ```
///
/// A JSON object with the same field names is also accepted.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub length: Option<f64>,
    #[serde(default)]
    pub fiber_distance: Option<f64>,
    #[serde(default)]
    pub ei_ref: Option<f64>,
    #[serde(default)]
    pub boundary_conditions: Vec<BoundaryCondition>,
}

impl ProblemConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            return serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()));
        }
        let mut config = ProblemConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::parse(line_no, format!("expected key=value, got '{line}'"))
            })?;
            let key = key.trim();
            let value = parse_number(value, line_no)?;
            match key {
                "length" | "L" => config.length = Some(value),
                "fiber_distance" | "c" => config.fiber_distance = Some(value),
                "ei_ref" => config.ei_ref = Some(value),
                _ => {
                    let rest = key
                        .strip_prefix("bc.")
                        .ok_or_else(|| Error::parse(line_no, format!("unknown key '{key}'")))?;
                    let (kind, x) = rest.split_once('.').ok_or_else(|| {
                        Error::parse(line_no, format!("malformed boundary key '{key}'"))
                    })?;
                    let kind: QuantityKind = kind
                        .parse()
                        .map_err(|e: Error| Error::parse(line_no, e.to_string()))?;
                    let x = parse_number(x, line_no)?;
                    config
                        .boundary_conditions
                        .push(BoundaryCondition::new(kind, x, value));
                }
            }
        }
        Ok(config)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(l) = self.length {
            let _ = writeln!(out, "length={}", format_f64(l));
        }
        if let Some(c) = self.fiber_distance {
            let _ = writeln!(out, "fiber_distance={}", format_f64(c));
        }
        if let Some(ei) = self.ei_ref {
            let _ = writeln!(out, "ei_ref={}", format_f64(ei));
        }
        for bc in &self.boundary_conditions {
            let _ = writeln!(
                out,
                "bc.{}.{}={}",
                bc.kind,
                bc.location,
                format_f64(bc.value)
            );
        }
        out
    }
}

fn parse_number(text: &str, line: usize) -> Result<f64> {
    let text = text.trim();
    let value: f64 = text
        .parse()
        .map_err(|_| Error::parse(line, format!("'{text}' is not a number")))?;
    if !value.is_finite() {
        return Err(Error::parse(line, format!("'{text}' is not finite")));
    }
    Ok(value)
}

/// Parses dataset CSV text; see [`load_problem_csv`].
pub fn parse_problem_csv(text: &str, config: &ProblemConfig) -> Result<Problem> {
    let length = config
        .length
        .ok_or_else(|| Error::Config("beam length missing from dataset config".into()))?;

    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (header_line, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "missing header row"))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    let has_sigma = match columns.as_slice() {
        ["kind", "label", "x", "value"] => false,
        ["kind", "label", "x", "value", "sigma"] => true,
        _ => {
            return Err(Error::parse(
                header_line,
                format!("expected header 'kind,label,x,value[,sigma]', got '{header}'"),
            ))
        }
    };

    struct Group {
        kind: QuantityKind,
        label: String,
        sigma: Option<f64>,
        sigma_line: usize,
        xs: Vec<f64>,
        ys: Vec<f64>,
    }
    let mut groups: Vec<Group> = Vec::new();
    let mut index: BTreeMap<(QuantityKind, String), usize> = BTreeMap::new();

    for (line_no, line) in lines {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let expected = if has_sigma { 5 } else { 4 };
        // A trailing empty sigma may be omitted entirely.
        if !(fields.len() == expected || (has_sigma && fields.len() == 4)) {
            return Err(Error::parse(
                line_no,
                format!("expected {expected} fields, got {}", fields.len()),
            ));
        }
        let kind: QuantityKind = fields[0]
            .parse()
            .map_err(|e: Error| Error::parse(line_no, e.to_string()))?;
        let label = fields[1].to_string();
        let x = parse_number(fields[2], line_no)?;
        let y = parse_number(fields[3], line_no)?;
        let sigma = match fields.get(4) {
            Some(s) if !s.is_empty() => {
                let s = parse_number(s, line_no)?;
                if s < 0.0 {
                    return Err(Error::parse(line_no, "sigma must be non-negative"));
                }
                Some(s)
            }
            _ => None,
        };
        check_location(x, length).map_err(|e| Error::Domain(format!("line {line_no}: {e}")))?;

        let key = (kind, label.clone());
        let gi = *index.entry(key).or_insert_with(|| {
            groups.push(Group {
                kind,
                label,
                sigma,
                sigma_line: line_no,
                xs: Vec::new(),
                ys: Vec::new(),
            });
            groups.len() - 1
        });
        let group = &mut groups[gi];
        if group.sigma != sigma {
            return Err(Error::parse(
                line_no,
                format!(
                    "sigma differs from line {} within set '{}' ({})",
                    group.sigma_line, group.label, group.kind
                ),
            ));
        }
        group.xs.push(x);
        group.ys.push(y);
    }

    let sets = groups
        .into_iter()
        .map(|g| match g.sigma {
            None => ObservationSet::measured(g.kind, g.label, g.xs, g.ys, NoiseModel::learnable()),
            Some(0.0) => ObservationSet::constraint(g.kind, g.label, g.xs, g.ys),
            Some(s) => ObservationSet::measured(g.kind, g.label, g.xs, g.ys, NoiseModel::Known(s)),
        })
        .collect::<Result<Vec<_>>>()?;

    Problem::new(
        length,
        config.fiber_distance,
        sets,
        config.boundary_conditions.clone(),
    )
}

/// Reads a dataset CSV (`kind,label,x,value[,sigma]`).
///
/// Rows are grouped into sets by `(kind, label)` in order of first
/// appearance. An empty sigma makes the set's noise learnable, a positive
/// sigma fixes it, and a zero sigma marks an exact constraint set.
pub fn load_problem_csv(path: impl AsRef<Path>, config: &ProblemConfig) -> Result<Problem> {
    let text = fs::read_to_string(path)?;
    parse_problem_csv(&text, config)
}
