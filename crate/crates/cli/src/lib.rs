//! Manifest parsing, result emission and shipped presets for the `ifsim`
//! command-line tool.

pub mod emit;
pub mod manifest;
pub mod presets;

use std::time::{Duration, Instant};

use ifsim_core::sweep::{calibrate, run_sweep};
use ifsim_core::run_simulation;

pub use emit::{emit_results, EmitError, RunOutput};
pub use manifest::{parse_config, parse_manifest_str, ManifestError, RunConfig, RunManifest};

/// Execute a validated manifest. `jobs` bounds sweep and calibration workers.
pub fn execute(manifest: &RunManifest, jobs: usize) -> Result<(RunOutput, Duration), ifsim_core::Error> {
    let start = Instant::now();
    let output = match &manifest.run {
        RunConfig::Simulate(config) => RunOutput::Simulation(run_simulation(config)?),
        RunConfig::Sweep(spec) => RunOutput::Sweep(run_sweep(spec, jobs)?),
        RunConfig::Calibrate(job) => RunOutput::Calibration(calibrate(
            &job.base,
            &job.target,
            &job.search,
            &job.settings,
            jobs,
        )?),
    };
    Ok((output, start.elapsed()))
}
