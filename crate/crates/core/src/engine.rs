//! Month-by-month generative loop.
//!
//! Articles are created in the order year → issue → journal → slot. Each new
//! article draws a quality level and a reference budget; once the warm-up
//! period is over it fills its reference slots by rejection sampling: a
//! candidate is drawn uniformly from all earlier articles, must be older than
//! the review cycle, and is accepted with the kernel's cite probability.
//! Accepted candidates have their citation count bumped immediately, so
//! later slots (and later articles) see the updated count.
//!
//! Random draws are consumed in this fixed order per article: quality
//! (gamma sampler), reference budget (one uniform), then for every attempt a
//! candidate index (one uniform integer) followed, only when the candidate
//! passes the review-cycle gate, by one acceptance uniform.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{Kernel, KernelParams, QualityDistribution, MAX_QUALITY};
use crate::rng::{sim_rng, SimRng};

/// Reference budgets below this value are raised to it.
pub const MIN_REFERENCES: u32 = 10;

pub const MONTHS_PER_YEAR: u32 = 12;

/// Calendar year (1-based) containing a 1-based month.
pub fn year_of_month(month: u32) -> u32 {
    (month - 1) / MONTHS_PER_YEAR + 1
}

/// Full description of one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub num_journals: u32,
    pub issues_per_year: u32,
    pub articles_per_issue: u32,
    pub years: u32,
    /// Minimum age gap, exclusive, between a citing article and anything it cites.
    pub review_cycle_months: u32,
    pub avg_refs: u32,
    /// Articles published in months `1..=warmup_months` cite nothing.
    pub warmup_months: u32,
    /// Rejection-sampling draws per reference slot before it is abandoned.
    pub max_attempts: u32,
    pub kernel: KernelParams,
    pub quality: QualityDistribution,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            num_journals: 10,
            issues_per_year: 12,
            articles_per_issue: 10,
            years: 13,
            review_cycle_months: 4,
            avg_refs: 30,
            warmup_months: 24,
            max_attempts: 10_000,
            kernel: KernelParams::default(),
            quality: QualityDistribution::default(),
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("num_journals", self.num_journals),
            ("issues_per_year", self.issues_per_year),
            ("articles_per_issue", self.articles_per_issue),
            ("years", self.years),
            ("avg_refs", self.avg_refs),
            ("max_attempts", self.max_attempts),
        ];
        for (field, value) in counts {
            if value < 1 {
                return Err(Error::invalid(field, "must be >= 1"));
            }
        }
        if self.total_articles() > u64::from(u32::MAX) {
            return Err(Error::invalid(
                "num_journals",
                "total article count does not fit in 32 bits",
            ));
        }
        if u64::from(self.years) * u64::from(MONTHS_PER_YEAR) > u64::from(u32::MAX) {
            return Err(Error::invalid("years", "too many months"));
        }
        self.kernel.validate()?;
        self.quality.validate()?;
        Ok(())
    }

    pub fn total_articles(&self) -> u64 {
        u64::from(self.num_journals)
            * u64::from(self.issues_per_year)
            * u64::from(self.articles_per_issue)
            * u64::from(self.years)
    }

    pub fn total_months(&self) -> u32 {
        self.years * MONTHS_PER_YEAR
    }

    /// Publication month of a 1-based issue in a 1-based year. Issues are
    /// spread evenly over the twelve months; with twelve issues per year
    /// issue `i` appears in month `i`.
    pub fn issue_month(&self, year: u32, issue: u32) -> u32 {
        let within = (issue * MONTHS_PER_YEAR).div_ceil(self.issues_per_year);
        (year - 1) * MONTHS_PER_YEAR + within
    }
}

/// One published article.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArticleRecord {
    /// 1-based creation index.
    pub id: u32,
    /// 1-based journal index.
    pub journal_id: u32,
    /// 1-based publication month.
    pub pub_month: u32,
    pub quality: u8,
    pub ref_target: u32,
    pub times_cited: u32,
    /// Cited article ids in the order the slots were filled. May repeat.
    pub out_refs: Vec<u32>,
}

impl ArticleRecord {
    pub fn pub_year(&self) -> u32 {
        year_of_month(self.pub_month)
    }
}

/// Citation edges plus the per-journal, per-year impact-factor numerators.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CitationLedger {
    /// `(citing id, cited id)` in creation order.
    pub edges: Vec<(u32, u32)>,
    /// `per_journal_year_cites[j - 1][y - 1]`: citations made during year `y`
    /// to journal `j`'s articles published in years `y - 1` and `y - 2`.
    pub per_journal_year_cites: Vec<Vec<u64>>,
}

impl CitationLedger {
    fn empty(num_journals: u32, years: u32) -> Self {
        CitationLedger {
            edges: Vec::new(),
            per_journal_year_cites: vec![vec![0; years as usize]; num_journals as usize],
        }
    }

    fn record(&mut self, citing: &ArticleRecord, cited: &ArticleRecord) {
        self.edges.push((citing.id, cited.id));
        let year = citing.pub_year();
        let cited_year = cited.pub_year();
        if cited_year + 1 == year || cited_year + 2 == year {
            self.per_journal_year_cites[cited.journal_id as usize - 1][year as usize - 1] += 1;
        }
    }

    /// Rebuild a ledger from an edge list and article metadata. Articles
    /// must be indexed by id (`articles[id - 1].id == id`).
    pub fn from_edges(
        edges: Vec<(u32, u32)>,
        articles: &[ArticleRecord],
        num_journals: u32,
        years: u32,
    ) -> Result<Self> {
        let mut ledger = CitationLedger::empty(num_journals, years);
        let lookup = |id: u32| -> Result<&ArticleRecord> {
            articles
                .get(id.wrapping_sub(1) as usize)
                .filter(|a| a.id == id)
                .ok_or_else(|| Error::invalid("edges", format!("unknown article id {id}")))
        };
        for &(citing, cited) in &edges {
            let citing = lookup(citing)?;
            let cited = lookup(cited)?;
            if citing.journal_id == 0 || citing.journal_id > num_journals {
                return Err(Error::UnknownJournal {
                    journal: citing.journal_id,
                    journals: num_journals,
                });
            }
            if cited.journal_id == 0 || cited.journal_id > num_journals {
                return Err(Error::UnknownJournal {
                    journal: cited.journal_id,
                    journals: num_journals,
                });
            }
            if citing.pub_year() > years {
                return Err(Error::invalid(
                    "edges",
                    format!("article {} lies beyond year {years}", citing.id),
                ));
            }
            ledger.record(citing, cited);
        }
        Ok(ledger)
    }
}

/// Run-level counters that are not part of the model output proper.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Reference slots requested by articles published after warm-up.
    pub slots_requested: u64,
    /// Slots given up after `max_attempts` draws.
    pub abandoned_slots: u64,
    /// Slots of articles whose month had no candidate old enough to cite.
    pub unfillable_slots: u64,
    /// Repeated citations of the same article within one reference list.
    pub duplicate_refs: u64,
    /// Total rejection-sampling draws.
    pub attempts: u64,
    /// Set when no citing month ever had an eligible candidate.
    pub no_eligible_candidates: bool,
}

/// Completed simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub config: SimConfig,
    /// Indexed by `id - 1`.
    pub articles: Vec<ArticleRecord>,
    pub ledger: CitationLedger,
    pub diagnostics: Diagnostics,
}

impl SimResult {
    pub fn article(&self, id: u32) -> Option<&ArticleRecord> {
        self.articles.get(id.checked_sub(1)? as usize)
    }
}

/// Reference budget: the floor of a uniform real on `[0, 2 · avg_refs)`,
/// raised to at least [`MIN_REFERENCES`].
pub fn draw_reference_count<R: Rng + ?Sized>(rng: &mut R, avg_refs: u32) -> u32 {
    let raw = (rng.random::<f64>() * 2.0 * f64::from(avg_refs)).floor() as u32;
    raw.max(MIN_REFERENCES)
}

pub fn run_simulation(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let kernel = Kernel::new(config.kernel)?;
    let sampler = config.quality.sampler()?;
    let mut rng: SimRng = sim_rng(config.seed);

    let total = config.total_articles() as usize;
    let mut articles: Vec<ArticleRecord> = Vec::with_capacity(total);
    let mut ledger = CitationLedger::empty(config.num_journals, config.years);
    let mut diag = Diagnostics::default();
    let mut any_eligible = false;
    let mut refs: Vec<u32> = Vec::new();
    let mut tables = FactorTables::new(&kernel, config.total_months());

    for year in 1..=config.years {
        for issue in 1..=config.issues_per_year {
            let month = config.issue_month(year, issue);
            for journal in 1..=config.num_journals {
                for _ in 0..config.articles_per_issue {
                    let id = articles.len() as u32 + 1;
                    let quality = sampler.sample_quality(&mut rng);
                    let ref_target = draw_reference_count(&mut rng, config.avg_refs);
                    let mut article = ArticleRecord {
                        id,
                        journal_id: journal,
                        pub_month: month,
                        quality,
                        ref_target,
                        times_cited: 0,
                        out_refs: Vec::new(),
                    };

                    if month > config.warmup_months {
                        diag.slots_requested += u64::from(ref_target);
                        // Article 1 is the oldest; if it is too recent, every
                        // candidate is.
                        let eligible = articles
                            .first()
                            .is_some_and(|a| month - a.pub_month > config.review_cycle_months);
                        if eligible {
                            any_eligible = true;
                            refs.clear();
                            fill_references(
                                &mut rng,
                                &mut tables,
                                config,
                                month,
                                ref_target,
                                &mut articles,
                                &mut refs,
                                &mut diag,
                            );
                            diag.duplicate_refs += count_duplicates(&refs);
                            article.out_refs = std::mem::take(&mut refs);
                            for &cited in &article.out_refs {
                                ledger.record(&article, &articles[cited as usize - 1]);
                            }
                        } else {
                            diag.unfillable_slots += u64::from(ref_target);
                        }
                    }
                    articles.push(article);
                }
            }
        }
    }
    diag.no_eligible_candidates = !any_eligible;

    Ok(SimResult {
        config: config.clone(),
        articles,
        ledger,
        diagnostics: diag,
    })
}

/// Memoized kernel factors. Ages are bounded by the run length and citation
/// counts only grow by one at a time, so both factors are table lookups.
/// Entries come from the same [`Kernel`] methods, so results are identical
/// to evaluating the kernel directly.
struct FactorTables {
    kernel: Kernel,
    /// Indexed by age in months (`month - pub_month`).
    age: Vec<f64>,
    /// Indexed by citation count.
    count: Vec<f64>,
}

impl FactorTables {
    fn new(kernel: &Kernel, total_months: u32) -> Self {
        FactorTables {
            kernel: *kernel,
            age: (0..=i64::from(total_months))
                .map(|a| kernel.age_factor_unchecked(-a))
                .collect(),
            count: Vec::new(),
        }
    }

    #[inline]
    fn cite_probability(&mut self, quality: u8, times_cited: u32, age: u32) -> f64 {
        let n = times_cited as usize;
        while self.count.len() <= n {
            let next = self.count.len() as u32;
            self.count.push(self.kernel.citation_count_factor(next));
        }
        f64::from(quality) / f64::from(MAX_QUALITY) * self.count[n] * self.age[age as usize]
    }
}

#[allow(clippy::too_many_arguments)]
fn fill_references(
    rng: &mut SimRng,
    tables: &mut FactorTables,
    config: &SimConfig,
    month: u32,
    ref_target: u32,
    articles: &mut [ArticleRecord],
    refs: &mut Vec<u32>,
    diag: &mut Diagnostics,
) {
    let pool = articles.len() as u32;
    for _ in 0..ref_target {
        let mut accepted = false;
        for _ in 0..config.max_attempts {
            diag.attempts += 1;
            let candidate = rng.random_range(1..=pool);
            let cand = &mut articles[candidate as usize - 1];
            let age = month - cand.pub_month;
            if age <= config.review_cycle_months {
                continue;
            }
            let p = tables.cite_probability(cand.quality, cand.times_cited, age);
            if rng.random::<f64>() < p {
                cand.times_cited += 1;
                refs.push(candidate);
                accepted = true;
                break;
            }
        }
        if !accepted {
            diag.abandoned_slots += 1;
        }
    }
}

fn count_duplicates(refs: &[u32]) -> u64 {
    let mut sorted = refs.to_vec();
    sorted.sort_unstable();
    sorted.windows(2).filter(|w| w[0] == w[1]).count() as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::sim_rng;

    fn small_config(seed: u64) -> SimConfig {
        SimConfig {
            num_journals: 2,
            articles_per_issue: 3,
            years: 5,
            seed,
            ..SimConfig::default()
        }
    }

    #[test]
    fn budget_for_small_average_is_always_minimum() {
        let mut rng = sim_rng(1);
        for _ in 0..10_000 {
            assert_eq!(draw_reference_count(&mut rng, 5), 10);
        }
    }

    #[test]
    fn budget_mean_matches_clamped_uniform() {
        // Floored uniform over 0..=59 has mean 29.5; raising 0..=9 to 10 adds 55/60.
        let expected = 29.5 + 55.0 / 60.0;
        let mut rng = sim_rng(2);
        let n = 1_000_000;
        let mut sum = 0u64;
        for _ in 0..n {
            let r = draw_reference_count(&mut rng, 30);
            assert!((10..60).contains(&r));
            sum += u64::from(r);
        }
        let mean = sum as f64 / f64::from(n);
        assert!((mean - expected).abs() < 0.05, "mean {mean}");
    }

    #[test]
    fn issue_months() {
        let c = SimConfig::default();
        assert_eq!(c.issue_month(1, 1), 1);
        assert_eq!(c.issue_month(1, 12), 12);
        assert_eq!(c.issue_month(3, 5), 29);
        let quarterly = SimConfig {
            issues_per_year: 4,
            ..SimConfig::default()
        };
        let months: Vec<u32> = (1..=4).map(|i| quarterly.issue_month(2, i)).collect();
        assert_eq!(months, vec![15, 18, 21, 24]);
    }

    #[test]
    fn year_boundaries() {
        assert_eq!(year_of_month(1), 1);
        assert_eq!(year_of_month(12), 1);
        assert_eq!(year_of_month(13), 2);
        assert_eq!(year_of_month(156), 13);
    }

    #[test]
    fn no_citations_within_warmup() {
        let config = SimConfig {
            years: 2,
            ..small_config(3)
        };
        let result = run_simulation(&config).unwrap();
        assert!(result.ledger.edges.is_empty());
        assert_eq!(result.diagnostics.slots_requested, 0);
    }

    #[test]
    fn gate_that_can_never_open_sets_warning() {
        let config = SimConfig {
            review_cycle_months: 60,
            ..small_config(4)
        };
        let result = run_simulation(&config).unwrap();
        assert!(result.ledger.edges.is_empty());
        assert!(result.diagnostics.no_eligible_candidates);
        assert_eq!(
            result.diagnostics.unfillable_slots,
            result.diagnostics.slots_requested
        );
    }

    #[test]
    fn invalid_config_is_rejected_up_front() {
        let config = SimConfig {
            articles_per_issue: 0,
            ..SimConfig::default()
        };
        assert!(matches!(
            run_simulation(&config),
            Err(Error::InvalidConfig { ref field, .. }) if field == "articles_per_issue"
        ));
    }

    #[test]
    fn ledger_rebuild_matches_incremental_counts() {
        let result = run_simulation(&small_config(5)).unwrap();
        let rebuilt = CitationLedger::from_edges(
            result.ledger.edges.clone(),
            &result.articles,
            result.config.num_journals,
            result.config.years,
        )
        .unwrap();
        assert_eq!(rebuilt, result.ledger);
    }

    #[test]
    fn factor_tables_match_kernel() {
        let kernel = Kernel::new(KernelParams::STEEP).unwrap();
        let mut tables = FactorTables::new(&kernel, 156);
        for q in [1u8, 4, 10] {
            for n in [0u32, 3, 250] {
                for age in [0u32, 5, 156] {
                    let direct = kernel.cite_probability(q, n, -i64::from(age)).unwrap();
                    assert_eq!(tables.cite_probability(q, n, age), direct);
                }
            }
        }
    }

    #[test]
    fn duplicate_count() {
        assert_eq!(count_duplicates(&[3, 1, 3, 3, 2]), 2);
        assert_eq!(count_duplicates(&[]), 0);
    }

    #[test]
    fn tight_attempt_cap_abandons_slots() {
        let config = SimConfig {
            max_attempts: 1,
            ..small_config(6)
        };
        let result = run_simulation(&config).unwrap();
        let d = result.diagnostics;
        assert!(d.abandoned_slots > 0);
        assert_eq!(d.attempts, d.slots_requested);
        assert_eq!(
            result.ledger.edges.len() as u64 + d.abandoned_slots + d.unfillable_slots,
            d.slots_requested
        );
    }
}
