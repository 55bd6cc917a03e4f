//! Run manifests: TOML files describing one simulation, sweep or calibration.
//!
//! The base [`SimConfig`] lives at the top level of the file, so a file
//! holding only `seed = 42` is a complete manifest for one default run.
//! A `[sweep]` table turns the run into a parameter grid and a
//! `[calibrate]` table into a calibration; at most one may be present.
//!
//! ```toml
//! seed = 7
//! review_cycle_months = 4
//! avg_refs = 30
//! output_dir = "out"
//!
//! [kernel]
//! alpha = 100
//! beta = 30
//! gamma = 10
//!
//! [sweep]
//! replications = 20
//!
//! [[sweep.axes]]
//! fields = ["avg_refs"]
//! values = [[10], [20], [40]]
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use ifsim_core::metrics::AgeBands;
use ifsim_core::sweep::{Axis, CalibrationSettings, CalibrationTarget, SearchSpace, SweepSpec};
use ifsim_core::{KernelParams, SimConfig};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config {origin}: {message}")]
    Syntax { origin: String, message: String },
    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

impl ManifestError {
    /// Stable machine-readable code, distinct per failure kind.
    pub fn code(&self) -> &'static str {
        match self {
            ManifestError::Read { .. } => "config-unreadable",
            ManifestError::Syntax { .. } => "config-syntax",
            ManifestError::Invalid { .. } => "config-invalid",
        }
    }

    fn invalid(field: &str, reason: &str) -> Self {
        ManifestError::Invalid {
            field: field.to_owned(),
            reason: reason.to_owned(),
        }
    }
}

impl From<ifsim_core::Error> for ManifestError {
    fn from(e: ifsim_core::Error) -> Self {
        match e {
            ifsim_core::Error::InvalidConfig { field, reason } => ManifestError::Invalid { field, reason },
            other => ManifestError::Invalid {
                field: "config".to_owned(),
                reason: other.to_string(),
            },
        }
    }
}

/// Which artifacts to write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmitFlags {
    pub if_matrix: bool,
    pub edges: bool,
    pub ref_age_hist: bool,
    pub summary: bool,
    pub curves: bool,
}

impl Default for EmitFlags {
    fn default() -> Self {
        EmitFlags {
            if_matrix: true,
            edges: false,
            ref_age_hist: true,
            summary: true,
            curves: false,
        }
    }
}

/// Sampling ranges of the kernel-curve tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurveRanges {
    /// Citation counts `0..=n_max`.
    pub n_max: u32,
    /// Ages `t_min..=0` in months.
    pub t_min: i64,
}

impl Default for CurveRanges {
    fn default() -> Self {
        CurveRanges { n_max: 100, t_min: -200 }
    }
}

impl CurveRanges {
    pub fn validate(&self) -> Result<(), ManifestError> {
        if self.t_min > 0 {
            return Err(ManifestError::invalid("curves.t_min", "must be <= 0"));
        }
        Ok(())
    }
}

/// A fully specified calibration run.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationJob {
    pub base: SimConfig,
    pub target: CalibrationTarget,
    pub search: SearchSpace,
    pub settings: CalibrationSettings,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunConfig {
    Simulate(SimConfig),
    Sweep(SweepSpec),
    Calibrate(CalibrationJob),
}

impl RunConfig {
    pub fn base(&self) -> &SimConfig {
        match self {
            RunConfig::Simulate(c) => c,
            RunConfig::Sweep(s) => &s.base,
            RunConfig::Calibrate(j) => &j.base,
        }
    }

    pub fn kernel(&self) -> &KernelParams {
        &self.base().kernel
    }

    fn seeds(&self) -> [u64; 2] {
        match self {
            RunConfig::Simulate(c) => [c.seed, c.seed],
            RunConfig::Sweep(s) => [s.base.seed, s.seed_base],
            RunConfig::Calibrate(j) => [j.base.seed, j.settings.seed_base],
        }
    }

    /// Replace the root seed of the run.
    pub fn set_seed(&mut self, seed: u64) {
        match self {
            RunConfig::Simulate(c) => c.seed = seed,
            RunConfig::Sweep(s) => {
                s.base.seed = seed;
                s.seed_base = seed;
            }
            RunConfig::Calibrate(j) => {
                j.base.seed = seed;
                j.settings.seed_base = seed;
            }
        }
    }

    /// Replace the replication count of a sweep or calibration.
    pub fn set_replications(&mut self, replications: u32) {
        match self {
            RunConfig::Simulate(_) => {}
            RunConfig::Sweep(s) => s.replications = replications,
            RunConfig::Calibrate(j) => j.settings.replications = replications,
        }
    }
}

/// Validated manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub run: RunConfig,
    pub output_dir: PathBuf,
    pub emit: EmitFlags,
    pub age_bands: AgeBands,
    pub curves: CurveRanges,
}

impl RunManifest {
    /// Every check a later run would make, so a parsed manifest never fails
    /// with a configuration error afterwards.
    pub fn validate(&self) -> Result<(), ManifestError> {
        self.curves.validate()?;
        // TOML integers are signed; larger seeds could not be echoed back.
        if self.run.seeds().iter().any(|&s| s > i64::MAX as u64) {
            return Err(ManifestError::invalid("seed", "must be <= 9223372036854775807"));
        }
        match &self.run {
            RunConfig::Simulate(c) => c.validate()?,
            RunConfig::Sweep(s) => {
                s.cells()?;
            }
            RunConfig::Calibrate(job) => validate_calibration(job)?,
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        let file = ManifestFile::from(self);
        toml::to_string(&file).expect("manifest is always representable as TOML")
    }
}

fn validate_calibration(job: &CalibrationJob) -> Result<(), ManifestError> {
    let t = &job.target;
    if !(t.target_if.is_finite() && t.target_if > 0.0) {
        return Err(ManifestError::invalid("calibrate.target_if", "must be > 0"));
    }
    let mut base = job.base.clone();
    base.review_cycle_months = t.review_cycle_months;
    base.avg_refs = t.avg_refs;
    base.validate()?;
    let s = &job.settings;
    if s.budget < 1 {
        return Err(ManifestError::invalid("calibrate.budget", "must be >= 1"));
    }
    if s.replications < 1 {
        return Err(ManifestError::invalid("calibrate.replications", "must be >= 1"));
    }
    if !(s.tolerance.is_finite() && s.tolerance >= 0.0) {
        return Err(ManifestError::invalid("calibrate.tolerance", "must be >= 0"));
    }
    let sp = &job.search;
    for (field, [lo, hi]) in [
        ("calibrate.search.alpha", sp.alpha),
        ("calibrate.search.beta", sp.beta),
        ("calibrate.search.gamma", sp.gamma),
    ] {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(ManifestError::invalid(field, "bounds must be finite with lo <= hi"));
        }
    }
    if sp.beta[0] <= 0.0 {
        return Err(ManifestError::invalid("calibrate.search.beta", "lower bound must be > 0"));
    }
    if sp.gamma[0] <= 0.0 {
        return Err(ManifestError::invalid("calibrate.search.gamma", "lower bound must be > 0"));
    }
    if sp.grid_points < 1 {
        return Err(ManifestError::invalid("calibrate.search.grid_points", "must be >= 1"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    #[serde(default = "one")]
    replications: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed_base: Option<u64>,
    #[serde(default)]
    axes: Vec<Axis>,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CalibrateSection {
    name: String,
    review_cycle_months: u32,
    avg_refs: u32,
    target_if: f64,
    #[serde(default = "default_budget")]
    budget: u32,
    #[serde(default = "default_replications")]
    replications: u32,
    #[serde(default = "default_tolerance")]
    tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed_base: Option<u64>,
    #[serde(default)]
    search: SearchSpace,
}

fn default_budget() -> u32 {
    CalibrationSettings::default().budget
}

fn default_replications() -> u32 {
    CalibrationSettings::default().replications
}

fn default_tolerance() -> f64 {
    CalibrationSettings::default().tolerance
}

/// On-disk layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ManifestFile {
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
    #[serde(default)]
    emit: EmitFlags,
    #[serde(default)]
    age_bands: AgeBands,
    #[serde(default)]
    curves: CurveRanges,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    calibrate: Option<CalibrateSection>,
    #[serde(flatten)]
    base: SimConfig,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl From<&RunManifest> for ManifestFile {
    fn from(m: &RunManifest) -> Self {
        let (base, sweep, calibrate) = match &m.run {
            RunConfig::Simulate(c) => (c.clone(), None, None),
            RunConfig::Sweep(s) => (
                s.base.clone(),
                Some(SweepSection {
                    replications: s.replications,
                    seed_base: Some(s.seed_base),
                    axes: s.axes.clone(),
                }),
                None,
            ),
            RunConfig::Calibrate(j) => (
                j.base.clone(),
                None,
                Some(CalibrateSection {
                    name: j.target.name.clone(),
                    review_cycle_months: j.target.review_cycle_months,
                    avg_refs: j.target.avg_refs,
                    target_if: j.target.target_if,
                    budget: j.settings.budget,
                    replications: j.settings.replications,
                    tolerance: j.settings.tolerance,
                    seed_base: Some(j.settings.seed_base),
                    search: j.search.clone(),
                }),
            ),
        };
        ManifestFile {
            output_dir: m.output_dir.clone(),
            emit: m.emit,
            age_bands: m.age_bands.clone(),
            curves: m.curves,
            sweep,
            calibrate,
            base,
        }
    }
}

impl TryFrom<ManifestFile> for RunManifest {
    type Error = ManifestError;

    fn try_from(f: ManifestFile) -> Result<Self, ManifestError> {
        let run = match (f.sweep, f.calibrate) {
            (Some(_), Some(_)) => {
                return Err(ManifestError::invalid(
                    "sweep",
                    "a manifest may contain [sweep] or [calibrate], not both",
                ))
            }
            (None, None) => RunConfig::Simulate(f.base),
            (Some(s), None) => RunConfig::Sweep(SweepSpec {
                seed_base: s.seed_base.unwrap_or(f.base.seed),
                base: f.base,
                axes: s.axes,
                replications: s.replications,
            }),
            (None, Some(c)) => RunConfig::Calibrate(CalibrationJob {
                settings: CalibrationSettings {
                    budget: c.budget,
                    replications: c.replications,
                    tolerance: c.tolerance,
                    seed_base: c.seed_base.unwrap_or(f.base.seed),
                },
                target: CalibrationTarget {
                    name: c.name,
                    review_cycle_months: c.review_cycle_months,
                    avg_refs: c.avg_refs,
                    target_if: c.target_if,
                },
                search: c.search,
                base: f.base,
            }),
        };
        let manifest = RunManifest {
            run,
            output_dir: f.output_dir,
            emit: f.emit,
            age_bands: f.age_bands,
            curves: f.curves,
        };
        manifest.validate()?;
        Ok(manifest)
    }
}

/// Parse and validate manifest text. `origin` names the source in errors.
pub fn parse_manifest_str(text: &str, origin: &str) -> Result<RunManifest, ManifestError> {
    let syntax = |message: String| ManifestError::Syntax {
        origin: origin.to_owned(),
        message,
    };
    // Flattened fields cannot reject unknown keys, so top-level keys are
    // checked against the known set first.
    let table: toml::Table = toml::from_str(text).map_err(|e| syntax(e.to_string()))?;
    let known = |k: &str| MANIFEST_KEYS.contains(&k) || SIM_KEYS.contains(&k);
    if let Some(key) = table.keys().find(|k| !known(k)) {
        return Err(syntax(format!("unknown top-level key `{key}`")));
    }
    let file: ManifestFile = toml::from_str(text).map_err(|e| syntax(e.to_string()))?;
    RunManifest::try_from(file)
}

const MANIFEST_KEYS: [&str; 6] = ["output_dir", "emit", "age_bands", "curves", "sweep", "calibrate"];

/// Fields of [`SimConfig`].
const SIM_KEYS: [&str; 11] = [
    "num_journals",
    "issues_per_year",
    "articles_per_issue",
    "years",
    "review_cycle_months",
    "avg_refs",
    "warmup_months",
    "max_attempts",
    "kernel",
    "quality",
    "seed",
];

pub fn parse_config(path: &Path) -> Result<RunManifest, ManifestError> {
    let text = fs::read_to_string(path).map_err(|source| ManifestError::Read {
        path: path.to_owned(),
        source,
    })?;
    parse_manifest_str(&text, &path.display().to_string())
}
