//! CSV and summary emission.
//!
//! Column layouts:
//!
//! * `if_matrix.csv`: `journal,year_1,…,year_N`; one row per journal.
//! * `ref_age_hist.csv`: `journal,min_age_years,max_age_years,references,percentage,truncated`;
//!   one row per band for every journal, then for `all`.
//! * `edges.csv`: `citing_id,cited_id,citing_month,cited_month`.
//! * `sweep.csv`: `cell,<axis fields…>,replications,mean,std,min,max,abandoned_slots,duplicate_refs`.
//! * `sweep_replications.csv`: `cell,replication,seed,average_if`.
//! * `calibration.csv`: `evaluation,alpha,beta,gamma,mean_if,std_if,error,abandoned_slots`.
//! * `count_factor.csv`: `n,factor`; `age_factor.csv`: `t,factor`.
//!
//! Reals are printed with six decimals. Every file is rendered in memory
//! first and moved into place through a temporary file, so a failure never
//! leaves a partially written artifact behind.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use ifsim_core::metrics::{reference_age_distribution, AgeBands, ImpactFactorMatrix, ReferenceAgeHistogram};
use ifsim_core::sweep::{CalibrationOutcome, SweepResult};
use ifsim_core::{Kernel, SimResult};
use tempfile::NamedTempFile;
use thiserror::Error;

use crate::manifest::{CurveRanges, RunManifest};

#[derive(Debug, Error)]
pub enum EmitError {
    #[error("cannot write to {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] ifsim_core::Error),
}

/// Completed run of any kind.
#[derive(Debug, Clone)]
pub enum RunOutput {
    Simulation(SimResult),
    Sweep(SweepResult),
    Calibration(CalibrationOutcome),
}

/// A rendered file: name inside the output directory plus contents.
pub type Artifact = (String, String);

pub fn fmt_real(x: f64) -> String {
    format!("{x:.6}")
}

pub fn if_matrix_csv(matrix: &ImpactFactorMatrix) -> String {
    let mut out = String::from("journal");
    for y in 1..=matrix.years() {
        write!(out, ",year_{y}").unwrap();
    }
    out.push('\n');
    for (j, row) in matrix.values.iter().enumerate() {
        write!(out, "{}", j + 1).unwrap();
        for &v in row {
            write!(out, ",{}", fmt_real(v)).unwrap();
        }
        out.push('\n');
    }
    out
}

fn hist_rows(out: &mut String, label: &str, hist: &ReferenceAgeHistogram) {
    for share in &hist.bands {
        let max = share.band.max_age.map(|m| m.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{label},{},{max},{},{},{}",
            share.band.min_age,
            share.references,
            fmt_real(share.percentage),
            hist.truncated
        )
        .unwrap();
    }
}

pub fn ref_age_hist_csv(result: &SimResult, bands: &AgeBands) -> Result<String, EmitError> {
    let mut out = String::from("journal,min_age_years,max_age_years,references,percentage,truncated\n");
    for j in 1..=result.config.num_journals {
        let hist = reference_age_distribution(&result.ledger, &result.articles, Some(j), bands)?;
        hist_rows(&mut out, &j.to_string(), &hist);
    }
    let all = reference_age_distribution(&result.ledger, &result.articles, None, bands)?;
    hist_rows(&mut out, "all", &all);
    Ok(out)
}

pub fn edges_csv(result: &SimResult) -> String {
    let mut out = String::from("citing_id,cited_id,citing_month,cited_month\n");
    for &(citing, cited) in &result.ledger.edges {
        let month = |id: u32| result.articles[id as usize - 1].pub_month;
        writeln!(out, "{citing},{cited},{},{}", month(citing), month(cited)).unwrap();
    }
    out
}

pub fn sweep_csv(result: &SweepResult) -> String {
    let mut out = String::from("cell");
    for axis in &result.axes {
        for field in &axis.fields {
            write!(out, ",{field}").unwrap();
        }
    }
    out.push_str(",replications,mean,std,min,max,abandoned_slots,duplicate_refs\n");
    for cell in &result.cells {
        write!(out, "{}", cell.index).unwrap();
        for (_, value) in &cell.assignments {
            write!(out, ",{}", fmt_real(*value)).unwrap();
        }
        let s = cell.summary;
        writeln!(
            out,
            ",{},{},{},{},{},{},{}",
            cell.replications.len(),
            fmt_real(s.mean),
            fmt_real(s.std),
            fmt_real(s.min),
            fmt_real(s.max),
            cell.abandoned_slots,
            cell.duplicate_refs
        )
        .unwrap();
    }
    out
}

pub fn sweep_replications_csv(result: &SweepResult) -> String {
    let mut out = String::from("cell,replication,seed,average_if\n");
    for cell in &result.cells {
        for (r, rep) in cell.replications.iter().enumerate() {
            writeln!(out, "{},{r},{},{}", cell.index, rep.seed, fmt_real(rep.average_if)).unwrap();
        }
    }
    out
}

pub fn calibration_csv(outcome: &CalibrationOutcome) -> String {
    let mut out = String::from("evaluation,alpha,beta,gamma,mean_if,std_if,error,abandoned_slots\n");
    for (i, e) in outcome.log.iter().enumerate() {
        writeln!(
            out,
            "{i},{},{},{},{},{},{},{}",
            fmt_real(e.params.alpha),
            fmt_real(e.params.beta),
            fmt_real(e.params.gamma),
            fmt_real(e.mean_if),
            fmt_real(e.std_if),
            fmt_real(e.error),
            e.abandoned_slots
        )
        .unwrap();
    }
    out
}

/// Tabulate both kernel factors at unit steps: `(count_factor.csv, age_factor.csv)`.
pub fn dump_kernel_curves(kernel: &Kernel, ranges: &CurveRanges) -> Result<(String, String), EmitError> {
    let mut counts = String::from("n,factor\n");
    for n in 0..=ranges.n_max {
        writeln!(counts, "{n},{}", fmt_real(kernel.citation_count_factor(n))).unwrap();
    }
    let mut ages = String::from("t,factor\n");
    for t in ranges.t_min..=0 {
        writeln!(ages, "{t},{}", fmt_real(kernel.age_factor(t)?)).unwrap();
    }
    Ok((counts, ages))
}

fn summary_text(output: &RunOutput, manifest: &RunManifest, runtime: Duration) -> String {
    let mut out = String::from("# configuration\n");
    out.push_str(&manifest.to_toml());
    out.push_str("\n# diagnostics\n");
    match output {
        RunOutput::Simulation(r) => {
            let d = &r.diagnostics;
            writeln!(out, "articles = {}", r.articles.len()).unwrap();
            writeln!(out, "edges = {}", r.ledger.edges.len()).unwrap();
            writeln!(out, "slots_requested = {}", d.slots_requested).unwrap();
            writeln!(out, "abandoned_slots = {}", d.abandoned_slots).unwrap();
            writeln!(out, "unfillable_slots = {}", d.unfillable_slots).unwrap();
            writeln!(out, "duplicate_refs = {}", d.duplicate_refs).unwrap();
            writeln!(out, "attempts = {}", d.attempts).unwrap();
            if d.no_eligible_candidates {
                out.push_str("warning = \"no citing month had a candidate older than the review cycle\"\n");
            }
        }
        RunOutput::Sweep(s) => {
            writeln!(out, "cells = {}", s.cells.len()).unwrap();
            let abandoned: u64 = s.cells.iter().map(|c| c.abandoned_slots).sum();
            let dups: u64 = s.cells.iter().map(|c| c.duplicate_refs).sum();
            writeln!(out, "abandoned_slots = {abandoned}").unwrap();
            writeln!(out, "duplicate_refs = {dups}").unwrap();
        }
        RunOutput::Calibration(c) => {
            let p = c.best.params;
            writeln!(out, "evaluations = {}", c.log.len()).unwrap();
            writeln!(out, "best_alpha = {}", fmt_real(p.alpha)).unwrap();
            writeln!(out, "best_beta = {}", fmt_real(p.beta)).unwrap();
            writeln!(out, "best_gamma = {}", fmt_real(p.gamma)).unwrap();
            writeln!(out, "achieved_if = {}", fmt_real(c.best.mean_if)).unwrap();
            writeln!(out, "achieved_if_std = {}", fmt_real(c.best.std_if)).unwrap();
            writeln!(out, "target_if = {}", fmt_real(c.target.target_if)).unwrap();
            writeln!(out, "relative_error = {}", fmt_real(c.relative_error())).unwrap();
            writeln!(out, "converged = {}", c.converged).unwrap();
        }
    }
    writeln!(out, "runtime_seconds = {:.3}", runtime.as_secs_f64()).unwrap();
    out
}

/// Render every artifact the manifest asks for.
pub fn render(output: &RunOutput, manifest: &RunManifest, runtime: Duration) -> Result<Vec<Artifact>, EmitError> {
    let emit = &manifest.emit;
    let mut files: Vec<Artifact> = Vec::new();
    match output {
        RunOutput::Simulation(r) => {
            if emit.if_matrix {
                files.push(("if_matrix.csv".into(), if_matrix_csv(&ImpactFactorMatrix::from_result(r))));
            }
            if emit.ref_age_hist {
                files.push(("ref_age_hist.csv".into(), ref_age_hist_csv(r, &manifest.age_bands)?));
            }
            if emit.edges {
                files.push(("edges.csv".into(), edges_csv(r)));
            }
        }
        RunOutput::Sweep(s) => {
            files.push(("sweep.csv".into(), sweep_csv(s)));
            files.push(("sweep_replications.csv".into(), sweep_replications_csv(s)));
        }
        RunOutput::Calibration(c) => {
            files.push(("calibration.csv".into(), calibration_csv(c)));
        }
    }
    if emit.curves {
        let kernel = Kernel::new(*manifest.run.kernel())?;
        let (counts, ages) = dump_kernel_curves(&kernel, &manifest.curves)?;
        files.push(("count_factor.csv".into(), counts));
        files.push(("age_factor.csv".into(), ages));
    }
    if emit.summary {
        files.push(("summary.txt".into(), summary_text(output, manifest, runtime)));
    }
    Ok(files)
}

/// Write artifacts into `dir`. All contents go to temporary files in the
/// directory first; only when every one is written are they renamed into
/// place.
pub fn write_artifacts(dir: &Path, files: &[Artifact]) -> Result<Vec<PathBuf>, EmitError> {
    let io = |path: &Path| {
        let path = path.to_owned();
        move |source| EmitError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let mut staged = Vec::with_capacity(files.len());
    for (name, contents) in files {
        let mut tmp = NamedTempFile::new_in(dir).map_err(io(dir))?;
        tmp.write_all(contents.as_bytes()).map_err(io(tmp.path()))?;
        tmp.flush().map_err(io(tmp.path()))?;
        staged.push((tmp, dir.join(name)));
    }
    let mut written = Vec::with_capacity(staged.len());
    for (tmp, target) in staged {
        tmp.persist(&target).map_err(|e| EmitError::Io {
            path: target.clone(),
            source: e.error,
        })?;
        written.push(target);
    }
    Ok(written)
}

/// Render and write everything the manifest asks for into its output directory.
pub fn emit_results(output: &RunOutput, manifest: &RunManifest, runtime: Duration) -> Result<Vec<PathBuf>, EmitError> {
    let files = render(output, manifest, runtime)?;
    write_artifacts(&manifest.output_dir, &files)
}
