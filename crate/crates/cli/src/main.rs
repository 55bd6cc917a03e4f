use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ifsim_cli::emit::{dump_kernel_curves, write_artifacts, EmitError};
use ifsim_cli::manifest::{parse_config, ManifestError, RunConfig, RunManifest};
use ifsim_cli::{emit_results, execute, presets, RunOutput};
use ifsim_core::Kernel;

const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_NOT_CONVERGED: u8 = 4;

#[derive(Parser)]
#[command(name = "ifsim", version, about = "Journal citation and impact-factor simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Manifest file (TOML). Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the root seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Parallel {
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Override the replication count.
    #[arg(long)]
    replications: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation.
    Simulate(#[command(flatten)] Common),
    /// Run a replicated parameter grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        parallel: Parallel,
    },
    /// Search kernel parameters toward a target average impact factor.
    Calibrate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        parallel: Parallel,
        /// Use a shipped preset instead of --config.
        #[arg(long, conflicts_with = "config")]
        preset: Option<String>,
    },
    /// Tabulate the kernel curves of a manifest's kernel parameters.
    Curves(#[command(flatten)] Common),
    /// Shipped journal presets.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    /// Print every preset with its journal profile.
    List,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Io(String),
}

impl From<ManifestError> for Failure {
    fn from(e: ManifestError) -> Self {
        match e {
            ManifestError::Read { .. } => Failure::Io(format!("[{}] {e}", e.code())),
            _ => Failure::Config(format!("[{}] {e}", e.code())),
        }
    }
}

impl From<ifsim_core::Error> for Failure {
    fn from(e: ifsim_core::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<EmitError> for Failure {
    fn from(e: EmitError) -> Self {
        match e {
            EmitError::Io { .. } => Failure::Io(e.to_string()),
            EmitError::Core(e) => e.into(),
        }
    }
}

fn load(common: &Common, preset: Option<&str>) -> Result<RunManifest, Failure> {
    let mut manifest = match (preset, &common.config) {
        (Some(name), _) => presets::preset(name)?,
        (None, Some(path)) => parse_config(path)?,
        (None, None) => ifsim_cli::parse_manifest_str("", "defaults")?,
    };
    if let Some(seed) = common.seed {
        manifest.run.set_seed(seed);
        manifest.validate()?;
    }
    if let Some(out) = &common.out {
        manifest.output_dir = out.clone();
    }
    Ok(manifest)
}

fn expect_kind(manifest: &RunManifest, want: &str) -> Result<(), Failure> {
    let kind = match manifest.run {
        RunConfig::Simulate(_) => "simulate",
        RunConfig::Sweep(_) => "sweep",
        RunConfig::Calibrate(_) => "calibrate",
    };
    if kind != want {
        return Err(Failure::Config(format!(
            "manifest describes a `{kind}` run, not `{want}`"
        )));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    let (manifest, jobs) = match cli.command {
        Command::Presets { action: PresetAction::List } => {
            print!("{}", presets::listing());
            return Ok(ExitCode::SUCCESS);
        }
        Command::Curves(common) => {
            let manifest = load(&common, None)?;
            let kernel = Kernel::new(*manifest.run.kernel())?;
            let (counts, ages) = dump_kernel_curves(&kernel, &manifest.curves)?;
            let files = [
                ("count_factor.csv".to_owned(), counts),
                ("age_factor.csv".to_owned(), ages),
            ];
            for path in write_artifacts(&manifest.output_dir, &files)? {
                println!("wrote {}", path.display());
            }
            return Ok(ExitCode::SUCCESS);
        }
        Command::Simulate(common) => {
            let manifest = load(&common, None)?;
            expect_kind(&manifest, "simulate")?;
            (manifest, 1)
        }
        Command::Sweep { common, parallel } => {
            let mut manifest = load(&common, None)?;
            expect_kind(&manifest, "sweep")?;
            if let Some(r) = parallel.replications {
                manifest.run.set_replications(r);
                manifest.validate()?;
            }
            (manifest, parallel.jobs)
        }
        Command::Calibrate { common, parallel, preset } => {
            let mut manifest = load(&common, preset.as_deref())?;
            expect_kind(&manifest, "calibrate")?;
            if let Some(r) = parallel.replications {
                manifest.run.set_replications(r);
                manifest.validate()?;
            }
            (manifest, parallel.jobs)
        }
    };

    let (output, runtime) = execute(&manifest, jobs)?;
    for path in emit_results(&output, &manifest, runtime)? {
        println!("wrote {}", path.display());
    }
    if let RunOutput::Calibration(outcome) = &output {
        let p = outcome.best.params;
        println!(
            "best alpha={:.4} beta={:.4} gamma={:.4}: IF {:.4} ± {:.4} (target {:.4}, {} evaluations)",
            p.alpha,
            p.beta,
            p.gamma,
            outcome.best.mean_if,
            outcome.best.std_if,
            outcome.target.target_if,
            outcome.log.len()
        );
        if !outcome.converged {
            eprintln!(
                "calibration did not reach the requested tolerance (relative error {:.4})",
                outcome.relative_error()
            );
            return Ok(ExitCode::from(EXIT_NOT_CONVERGED));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_IO)
        }
    }
}
