//! Parameter grids with replication, monotone-trend statistics and
//! calibration of kernel parameters toward a target average impact factor.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{run_simulation, SimConfig};
use crate::error::{Error, Result};
use crate::kernel::KernelParams;
use crate::metrics::{discipline_average_if, ImpactFactorMatrix};
use crate::rng::derive_seed;

/// A sweepable scalar of [`SimConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Param {
    NumJournals,
    IssuesPerYear,
    ArticlesPerIssue,
    Years,
    ReviewCycleMonths,
    AvgRefs,
    WarmupMonths,
    MaxAttempts,
    Alpha,
    Beta,
    Gamma,
    Delta,
    QualityShape,
    QualityScale,
}

impl Param {
    pub const ALL: [Param; 14] = [
        Param::NumJournals,
        Param::IssuesPerYear,
        Param::ArticlesPerIssue,
        Param::Years,
        Param::ReviewCycleMonths,
        Param::AvgRefs,
        Param::WarmupMonths,
        Param::MaxAttempts,
        Param::Alpha,
        Param::Beta,
        Param::Gamma,
        Param::Delta,
        Param::QualityShape,
        Param::QualityScale,
    ];

    /// Dotted manifest name, e.g. `kernel.alpha`.
    pub fn name(self) -> &'static str {
        match self {
            Param::NumJournals => "num_journals",
            Param::IssuesPerYear => "issues_per_year",
            Param::ArticlesPerIssue => "articles_per_issue",
            Param::Years => "years",
            Param::ReviewCycleMonths => "review_cycle_months",
            Param::AvgRefs => "avg_refs",
            Param::WarmupMonths => "warmup_months",
            Param::MaxAttempts => "max_attempts",
            Param::Alpha => "kernel.alpha",
            Param::Beta => "kernel.beta",
            Param::Gamma => "kernel.gamma",
            Param::Delta => "kernel.delta",
            Param::QualityShape => "quality.shape",
            Param::QualityScale => "quality.scale",
        }
    }

    /// Write `value` into `config`. Integer fields accept only whole,
    /// nonnegative values.
    pub fn apply(self, config: &mut SimConfig, value: f64) -> Result<()> {
        let int = || -> Result<u32> {
            if value.fract() == 0.0 && (0.0..=f64::from(u32::MAX)).contains(&value) {
                Ok(value as u32)
            } else {
                Err(Error::invalid(self.name(), format!("{value} is not a nonnegative integer")))
            }
        };
        match self {
            Param::NumJournals => config.num_journals = int()?,
            Param::IssuesPerYear => config.issues_per_year = int()?,
            Param::ArticlesPerIssue => config.articles_per_issue = int()?,
            Param::Years => config.years = int()?,
            Param::ReviewCycleMonths => config.review_cycle_months = int()?,
            Param::AvgRefs => config.avg_refs = int()?,
            Param::WarmupMonths => config.warmup_months = int()?,
            Param::MaxAttempts => config.max_attempts = int()?,
            Param::Alpha => config.kernel.alpha = value,
            Param::Beta => config.kernel.beta = value,
            Param::Gamma => config.kernel.gamma = value,
            Param::Delta => config.kernel.delta = value,
            Param::QualityShape => config.quality.shape = value,
            Param::QualityScale => config.quality.scale = value,
        }
        Ok(())
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Param::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::invalid("sweep.axes.fields", format!("unknown parameter `{s}`")))
    }
}

impl TryFrom<String> for Param {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Param> for String {
    fn from(p: Param) -> Self {
        p.name().to_owned()
    }
}

/// One grid dimension. Every row of `values` assigns all of `fields` at
/// once, so `fields = [alpha, beta]` sweeps (α, β) pairs jointly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub fields: Vec<Param>,
    pub values: Vec<Vec<f64>>,
}

impl Axis {
    pub fn single(field: Param, values: impl IntoIterator<Item = f64>) -> Self {
        Axis {
            fields: vec![field],
            values: values.into_iter().map(|v| vec![v]).collect(),
        }
    }

    pub fn joint(fields: Vec<Param>, rows: Vec<Vec<f64>>) -> Self {
        Axis { fields, values: rows }
    }

    /// Field names joined with `+`.
    pub fn name(&self) -> String {
        self.fields.iter().map(|p| p.name()).collect::<Vec<_>>().join("+")
    }

    fn validate(&self) -> Result<()> {
        if self.fields.is_empty() {
            return Err(Error::invalid("sweep.axes.fields", "axis names no field"));
        }
        if self.values.is_empty() {
            return Err(Error::invalid(
                "sweep.axes.values",
                format!("axis `{}` has no values", self.name()),
            ));
        }
        if let Some(row) = self.values.iter().find(|r| r.len() != self.fields.len()) {
            return Err(Error::invalid(
                "sweep.axes.values",
                format!(
                    "axis `{}` row {:?} has {} entries, expected {}",
                    self.name(),
                    row,
                    row.len(),
                    self.fields.len()
                ),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: SimConfig,
    pub axes: Vec<Axis>,
    pub replications: u32,
    pub seed_base: u64,
}

/// One point of the grid with its fully resolved configuration (seed not
/// yet assigned).
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub index: u32,
    /// Row index into each axis.
    pub coords: Vec<usize>,
    pub config: SimConfig,
}

impl SweepSpec {
    pub fn num_cells(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    /// Grid cells in row-major order (last axis varies fastest). Every cell
    /// configuration is validated.
    pub fn cells(&self) -> Result<Vec<Cell>> {
        if self.replications < 1 {
            return Err(Error::invalid("sweep.replications", "must be >= 1"));
        }
        for axis in &self.axes {
            axis.validate()?;
        }
        self.base.validate()?;
        let total = self.num_cells();
        if total > u32::MAX as usize {
            return Err(Error::invalid("sweep.axes", "grid too large"));
        }
        let mut cells = Vec::with_capacity(total);
        for index in 0..total {
            let mut coords = vec![0; self.axes.len()];
            let mut rest = index;
            for (k, axis) in self.axes.iter().enumerate().rev() {
                coords[k] = rest % axis.values.len();
                rest /= axis.values.len();
            }
            let mut config = self.base.clone();
            for (axis, &row) in self.axes.iter().zip(&coords) {
                for (field, &value) in axis.fields.iter().zip(&axis.values[row]) {
                    field.apply(&mut config, value)?;
                }
            }
            config.validate()?;
            cells.push(Cell {
                index: index as u32,
                coords,
                config,
            });
        }
        Ok(cells)
    }
}

/// Outcome of one replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Replication {
    pub seed: u64,
    /// Mean over journals of the average impact factor over all computed years.
    pub average_if: f64,
    pub slots_requested: u64,
    pub abandoned_slots: u64,
    pub duplicate_refs: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Summary {
            mean,
            std,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub index: u32,
    pub coords: Vec<usize>,
    /// Values applied to the base configuration, in axis order.
    pub assignments: Vec<(Param, f64)>,
    pub replications: Vec<Replication>,
    pub summary: Summary,
    pub abandoned_slots: u64,
    pub duplicate_refs: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axes: Vec<Axis>,
    pub cells: Vec<CellResult>,
}

impl SweepResult {
    pub fn cell_means(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.summary.mean).collect()
    }
}

/// Run one configuration and reduce it to a [`Replication`].
pub fn replicate(config: &SimConfig) -> Result<Replication> {
    let result = run_simulation(config)?;
    let matrix = ImpactFactorMatrix::from_result(&result);
    let d = result.diagnostics;
    Ok(Replication {
        seed: config.seed,
        average_if: discipline_average_if(&matrix)?,
        slots_requested: d.slots_requested,
        abandoned_slots: d.abandoned_slots,
        duplicate_refs: d.duplicate_refs,
    })
}

fn worker_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::invalid("jobs", e.to_string()))
}

/// Run every cell × replication on `jobs` workers. Results are merged in
/// grid order, so the outcome does not depend on `jobs`.
pub fn run_sweep(spec: &SweepSpec, jobs: usize) -> Result<SweepResult> {
    let cells = spec.cells()?;
    let reps = spec.replications;
    let tasks: Vec<SimConfig> = cells
        .iter()
        .flat_map(|cell| {
            (0..reps).map(move |r| SimConfig {
                seed: derive_seed(spec.seed_base, cell.index, r),
                ..cell.config.clone()
            })
        })
        .collect();

    let outcomes: Vec<Replication> = worker_pool(jobs)?
        .install(|| tasks.par_iter().map(replicate).collect::<Result<Vec<_>>>())?;

    let results = cells
        .into_iter()
        .zip(outcomes.chunks(reps as usize))
        .map(|(cell, runs)| {
            let values: Vec<f64> = runs.iter().map(|r| r.average_if).collect();
            let assignments = spec
                .axes
                .iter()
                .zip(&cell.coords)
                .flat_map(|(axis, &row)| {
                    axis.fields.iter().copied().zip(axis.values[row].iter().copied())
                })
                .collect();
            CellResult {
                index: cell.index,
                coords: cell.coords,
                assignments,
                summary: Summary::of(&values),
                abandoned_slots: runs.iter().map(|r| r.abandoned_slots).sum(),
                duplicate_refs: runs.iter().map(|r| r.duplicate_refs).sum(),
                replications: runs.to_vec(),
            }
        })
        .collect();
    Ok(SweepResult {
        axes: spec.axes.clone(),
        cells: results,
    })
}

/// Monotone-trend summary of cell means along one axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendReport {
    pub axis: String,
    /// Ordinal used for ranking: the value itself for single-field axes,
    /// the row position for joint axes.
    pub positions: Vec<f64>,
    /// Mean of the cell means sharing each axis value.
    pub means: Vec<f64>,
    pub spearman_rho: f64,
    pub increasing_steps: usize,
    pub decreasing_steps: usize,
    pub flat_steps: usize,
    /// The means (or positions) are constant and ρ is reported as 0.
    pub degenerate: bool,
}

/// Ranks with ties sharing their average rank (1-based).
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation, or `None` when either side is constant.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    assert_eq!(xs.len(), ys.len());
    let (rx, ry) = (average_ranks(xs), average_ranks(ys));
    let n = xs.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

pub fn trend_statistics(result: &SweepResult, axis: &str) -> Result<TrendReport> {
    let k = result
        .axes
        .iter()
        .position(|a| a.name() == axis)
        .ok_or_else(|| Error::UnknownAxis(axis.to_owned()))?;
    let ax = &result.axes[k];
    let len = ax.values.len();
    if len < 3 {
        return Err(Error::ShortAxis {
            axis: axis.to_owned(),
            len,
        });
    }
    let mut sums = vec![0.0; len];
    let mut counts = vec![0usize; len];
    for cell in &result.cells {
        sums[cell.coords[k]] += cell.summary.mean;
        counts[cell.coords[k]] += 1;
    }
    let means: Vec<f64> = sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect();
    let positions: Vec<f64> = if ax.fields.len() == 1 {
        ax.values.iter().map(|row| row[0]).collect()
    } else {
        (0..len).map(|i| i as f64).collect()
    };

    // Steps are counted along increasing position.
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by(|&a, &b| positions[a].total_cmp(&positions[b]));
    let (mut up, mut down, mut flat) = (0, 0, 0);
    for w in order.windows(2) {
        match means[w[1]].total_cmp(&means[w[0]]) {
            std::cmp::Ordering::Greater => up += 1,
            std::cmp::Ordering::Less => down += 1,
            std::cmp::Ordering::Equal => flat += 1,
        }
    }
    let rho = spearman(&positions, &means);
    Ok(TrendReport {
        axis: axis.to_owned(),
        positions,
        spearman_rho: rho.unwrap_or(0.0),
        degenerate: rho.is_none(),
        means,
        increasing_steps: up,
        decreasing_steps: down,
        flat_steps: flat,
    })
}

/// Journal profile a calibration aims at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationTarget {
    pub name: String,
    pub review_cycle_months: u32,
    pub avg_refs: u32,
    pub target_if: f64,
}

/// Closed box over (α, β, γ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSpace {
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
    pub gamma: [f64; 2],
    /// Coarse-grid points per dimension.
    pub grid_points: u32,
}

impl Default for SearchSpace {
    fn default() -> Self {
        SearchSpace {
            alpha: [10.0, 150.0],
            beta: [5.0, 60.0],
            gamma: [1.0, 60.0],
            grid_points: 4,
        }
    }
}

impl SearchSpace {
    fn validate(&self) -> Result<()> {
        for (field, [lo, hi]) in [
            ("calibrate.search.alpha", self.alpha),
            ("calibrate.search.beta", self.beta),
            ("calibrate.search.gamma", self.gamma),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::invalid(field, "bounds must be finite with lo <= hi"));
            }
        }
        if self.beta[0] <= 0.0 {
            return Err(Error::invalid("calibrate.search.beta", "lower bound must be > 0"));
        }
        if self.gamma[0] <= 0.0 {
            return Err(Error::invalid("calibrate.search.gamma", "lower bound must be > 0"));
        }
        if self.grid_points < 1 {
            return Err(Error::invalid("calibrate.search.grid_points", "must be >= 1"));
        }
        Ok(())
    }

    fn bounds(&self) -> [[f64; 2]; 3] {
        [self.alpha, self.beta, self.gamma]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationSettings {
    /// Maximum number of parameter points evaluated.
    pub budget: u32,
    /// Seeds per evaluation; every point reuses the same seeds.
    pub replications: u32,
    /// Acceptable |achieved − target| as a fraction of the target.
    pub tolerance: f64,
    pub seed_base: u64,
}

impl Default for CalibrationSettings {
    fn default() -> Self {
        CalibrationSettings {
            budget: 200,
            replications: 4,
            tolerance: 0.15,
            seed_base: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub params: KernelParams,
    pub mean_if: f64,
    pub std_if: f64,
    /// |mean_if − target|.
    pub error: f64,
    pub abandoned_slots: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationOutcome {
    pub target: CalibrationTarget,
    pub best: Evaluation,
    pub converged: bool,
    /// Every evaluation in the order it was made.
    pub log: Vec<Evaluation>,
}

impl CalibrationOutcome {
    pub fn relative_error(&self) -> f64 {
        self.best.error / self.target.target_if
    }
}

struct Evaluator<'a> {
    base: SimConfig,
    target: f64,
    settings: &'a CalibrationSettings,
    pool: rayon::ThreadPool,
    cache: HashMap<[u64; 3], Evaluation>,
    log: Vec<Evaluation>,
}

impl Evaluator<'_> {
    fn exhausted(&self) -> bool {
        self.log.len() >= self.settings.budget as usize
    }

    /// Evaluate a point unless it was seen before or the budget is spent.
    fn eval(&mut self, point: [f64; 3]) -> Result<Option<Evaluation>> {
        let key = point.map(f64::to_bits);
        if let Some(e) = self.cache.get(&key) {
            return Ok(Some(*e));
        }
        if self.exhausted() {
            return Ok(None);
        }
        let mut config = self.base.clone();
        config.kernel.alpha = point[0];
        config.kernel.beta = point[1];
        config.kernel.gamma = point[2];
        config.validate()?;
        let configs: Vec<SimConfig> = (0..self.settings.replications)
            .map(|r| SimConfig {
                seed: derive_seed(self.settings.seed_base, 0, r),
                ..config.clone()
            })
            .collect();
        let runs = self
            .pool
            .install(|| configs.par_iter().map(replicate).collect::<Result<Vec<_>>>())?;
        let values: Vec<f64> = runs.iter().map(|r| r.average_if).collect();
        let summary = Summary::of(&values);
        let evaluation = Evaluation {
            params: config.kernel,
            mean_if: summary.mean,
            std_if: summary.std,
            error: (summary.mean - self.target).abs(),
            abandoned_slots: runs.iter().map(|r| r.abandoned_slots).sum(),
        };
        self.cache.insert(key, evaluation);
        self.log.push(evaluation);
        Ok(Some(evaluation))
    }
}

fn linspace([lo, hi]: [f64; 2], n: u32) -> Vec<f64> {
    if n == 1 || lo == hi {
        return vec![(lo + hi) / 2.0];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * f64::from(i) / f64::from(n - 1))
        .collect()
}

/// Coarse grid over the search box followed by compass refinement around
/// the incumbent: try ± one step along each axis, move on improvement,
/// halve the steps otherwise. Stops when the budget is spent or the steps
/// shrink below 1e-3 of each range. Evaluations use common random numbers,
/// so differences between points are not masked by seed noise.
pub fn calibrate(
    base: &SimConfig,
    target: &CalibrationTarget,
    space: &SearchSpace,
    settings: &CalibrationSettings,
    jobs: usize,
) -> Result<CalibrationOutcome> {
    if !(target.target_if.is_finite() && target.target_if > 0.0) {
        return Err(Error::invalid("calibrate.target_if", "must be > 0"));
    }
    space.validate()?;
    if settings.budget < 1 {
        return Err(Error::invalid("calibrate.budget", "must be >= 1"));
    }
    if settings.replications < 1 {
        return Err(Error::invalid("calibrate.replications", "must be >= 1"));
    }
    if !(settings.tolerance.is_finite() && settings.tolerance >= 0.0) {
        return Err(Error::invalid("calibrate.tolerance", "must be >= 0"));
    }
    let mut base = base.clone();
    base.review_cycle_months = target.review_cycle_months;
    base.avg_refs = target.avg_refs;
    base.validate()?;

    let mut ev = Evaluator {
        base,
        target: target.target_if,
        settings,
        pool: worker_pool(jobs)?,
        cache: HashMap::new(),
        log: Vec::new(),
    };
    let bounds = space.bounds();
    let axes: Vec<Vec<f64>> = bounds.iter().map(|&b| linspace(b, space.grid_points)).collect();

    let mut best: Option<([f64; 3], Evaluation)> = None;
    let consider = |best: &mut Option<([f64; 3], Evaluation)>, point, e: Evaluation| {
        if best.as_ref().is_none_or(|(_, b)| e.error < b.error) {
            *best = Some((point, e));
            true
        } else {
            false
        }
    };

    'grid: for &a in &axes[0] {
        for &b in &axes[1] {
            for &g in &axes[2] {
                let point = [a, b, g];
                match ev.eval(point)? {
                    Some(e) => {
                        consider(&mut best, point, e);
                    }
                    None => break 'grid,
                }
            }
        }
    }

    let span = |d: usize| bounds[d][1] - bounds[d][0];
    let mut steps: [f64; 3] = std::array::from_fn(|d| {
        let cells = f64::from(space.grid_points.saturating_sub(1).max(1));
        span(d) / cells / 2.0
    });
    while !ev.exhausted() && (0..3).any(|d| steps[d] > 1e-3 * span(d)) {
        let (center, _) = best.expect("grid evaluates at least one point");
        let mut improved = false;
        for d in 0..3 {
            for sign in [-1.0, 1.0] {
                let mut point = center;
                point[d] = (center[d] + sign * steps[d]).clamp(bounds[d][0], bounds[d][1]);
                if point == center {
                    continue;
                }
                let Some(e) = ev.eval(point)? else { break };
                improved |= consider(&mut best, point, e);
            }
        }
        if !improved {
            steps = steps.map(|s| s / 2.0);
        }
    }

    let (_, best) = best.expect("grid evaluates at least one point");
    Ok(CalibrationOutcome {
        target: target.clone(),
        converged: best.error <= settings.tolerance * target.target_if,
        best,
        log: ev.log,
    })
}
