//! Discrete-time simulator of journal publication and citation dynamics.
//!
//! Articles are published month by month across a set of journals in one
//! discipline. Each article cites earlier articles, accepting a randomly
//! encountered candidate with a probability built from the candidate's
//! quality, how often it has already been cited and how old it is. From the
//! resulting citation ledger the crate computes two-year impact factors and
//! reference-age distributions, and runs replicated parameter sweeps and
//! kernel calibrations on top.
//!
//! ```
//! use ifsim_core::{run_simulation, ImpactFactorMatrix, SimConfig};
//!
//! let config = SimConfig { years: 4, num_journals: 2, seed: 7, ..SimConfig::default() };
//! let result = run_simulation(&config).unwrap();
//! let matrix = ImpactFactorMatrix::from_result(&result);
//! assert_eq!(matrix.get(1, 1), Some(1.0));
//! ```

pub mod engine;
pub mod error;
pub mod kernel;
pub mod metrics;
pub mod rng;
pub mod sweep;

pub use engine::{
    draw_reference_count, run_simulation, ArticleRecord, CitationLedger, Diagnostics, SimConfig,
    SimResult,
};
pub use error::{Error, Result};
pub use kernel::{Kernel, KernelParams, QualityDistribution, QualitySampler};
pub use metrics::{
    average_if, discipline_average_if, impact_factor, impact_factor_window,
    reference_age_distribution, AgeBand, AgeBands, IfWindow, ImpactFactorMatrix,
    ReferenceAgeHistogram,
};
pub use sweep::{
    calibrate, run_sweep, trend_statistics, Axis, CalibrationOutcome, CalibrationSettings,
    CalibrationTarget, Param, SearchSpace, SweepResult, SweepSpec, TrendReport,
};
