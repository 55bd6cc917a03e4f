//! Two-year impact factors, averaging windows and reference-age histograms.

use serde::{Deserialize, Serialize};

use crate::engine::{ArticleRecord, CitationLedger, SimResult};
use crate::error::{Error, Result};

/// Years `1..=CONVENTION_YEARS` report [`CONVENTION_VALUE`] instead of a
/// computed impact factor.
pub const CONVENTION_YEARS: u32 = 2;
pub const CONVENTION_VALUE: f64 = 1.0;

/// Integer numerator and denominator of one impact factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IfWindow {
    pub cites: u64,
    pub publications: u64,
}

impl IfWindow {
    /// `None` when the journal published nothing in the two-year window.
    pub fn value(&self) -> Option<f64> {
        (self.publications > 0).then(|| self.cites as f64 / self.publications as f64)
    }
}

/// `publications[j - 1][y - 1]`: articles journal `j` published in year `y`.
pub fn publication_counts(articles: &[ArticleRecord], num_journals: u32, years: u32) -> Vec<Vec<u64>> {
    let mut counts = vec![vec![0u64; years as usize]; num_journals as usize];
    for a in articles {
        let (j, y) = (a.journal_id as usize, a.pub_year() as usize);
        if (1..=num_journals as usize).contains(&j) && (1..=years as usize).contains(&y) {
            counts[j - 1][y - 1] += 1;
        }
    }
    counts
}

fn check_journal(ledger: &CitationLedger, journal: u32) -> Result<()> {
    let journals = ledger.per_journal_year_cites.len() as u32;
    if journal == 0 || journal > journals {
        return Err(Error::UnknownJournal { journal, journals });
    }
    Ok(())
}

/// Numerator and denominator of journal `journal`'s impact factor in `year`.
pub fn impact_factor_window(
    ledger: &CitationLedger,
    articles: &[ArticleRecord],
    journal: u32,
    year: u32,
) -> Result<IfWindow> {
    check_journal(ledger, journal)?;
    if year <= CONVENTION_YEARS {
        return Err(Error::ConventionYear(year));
    }
    let years = ledger.per_journal_year_cites[0].len() as u32;
    if year > years {
        return Err(Error::YearWindow {
            from: year,
            to: year,
            years,
        });
    }
    let cites = ledger.per_journal_year_cites[journal as usize - 1][year as usize - 1];
    let publications = articles
        .iter()
        .filter(|a| a.journal_id == journal)
        .filter(|a| {
            let y = a.pub_year();
            y + 1 == year || y + 2 == year
        })
        .count() as u64;
    Ok(IfWindow {
        cites,
        publications,
    })
}

/// Citations received during `year` by the journal's articles of the two
/// preceding years, divided by the number of those articles. `Ok(None)`
/// marks an empty publication window.
pub fn impact_factor(
    ledger: &CitationLedger,
    articles: &[ArticleRecord],
    journal: u32,
    year: u32,
) -> Result<Option<f64>> {
    Ok(impact_factor_window(ledger, articles, journal, year)?.value())
}

/// Journal × year impact factors. Undefined entries are NaN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactFactorMatrix {
    /// `values[j - 1][y - 1]`.
    pub values: Vec<Vec<f64>>,
    pub convention_years: u32,
}

impl ImpactFactorMatrix {
    pub fn from_result(result: &SimResult) -> Self {
        let cfg = &result.config;
        let pubs = publication_counts(&result.articles, cfg.num_journals, cfg.years);
        let values = (0..cfg.num_journals as usize)
            .map(|j| {
                (0..cfg.years as usize)
                    .map(|y| {
                        if y < CONVENTION_YEARS as usize {
                            return CONVENTION_VALUE;
                        }
                        let window = IfWindow {
                            cites: result.ledger.per_journal_year_cites[j][y],
                            publications: pubs[j][y - 1] + pubs[j][y - 2],
                        };
                        window.value().unwrap_or(f64::NAN)
                    })
                    .collect()
            })
            .collect();
        ImpactFactorMatrix {
            values,
            convention_years: CONVENTION_YEARS,
        }
    }

    pub fn num_journals(&self) -> u32 {
        self.values.len() as u32
    }

    pub fn years(&self) -> u32 {
        self.values.first().map_or(0, |row| row.len() as u32)
    }

    pub fn get(&self, journal: u32, year: u32) -> Option<f64> {
        self.values
            .get(journal.checked_sub(1)? as usize)?
            .get(year.checked_sub(1)? as usize)
            .copied()
    }
}

/// Mean impact factor of one journal over the inclusive year window.
pub fn average_if(matrix: &ImpactFactorMatrix, journal: u32, year_from: u32, year_to: u32) -> Result<f64> {
    let journals = matrix.num_journals();
    if journal == 0 || journal > journals {
        return Err(Error::UnknownJournal { journal, journals });
    }
    let years = matrix.years();
    if year_from <= matrix.convention_years || year_from > year_to || year_to > years {
        return Err(Error::YearWindow {
            from: year_from,
            to: year_to,
            years,
        });
    }
    let row = &matrix.values[journal as usize - 1];
    let window = &row[year_from as usize - 1..year_to as usize];
    Ok(window.iter().sum::<f64>() / window.len() as f64)
}

/// Mean over all journals of [`average_if`] across every computed year.
pub fn discipline_average_if(matrix: &ImpactFactorMatrix) -> Result<f64> {
    let from = matrix.convention_years + 1;
    let to = matrix.years();
    let journals = matrix.num_journals();
    let mut sum = 0.0;
    for j in 1..=journals {
        sum += average_if(matrix, j, from, to)?;
    }
    Ok(sum / f64::from(journals))
}

/// Inclusive age band in whole years; `max_age: None` is unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgeBand {
    pub min_age: u32,
    pub max_age: Option<u32>,
}

impl AgeBand {
    pub fn contains(&self, age: u32) -> bool {
        age >= self.min_age && self.max_age.is_none_or(|max| age <= max)
    }
}

/// Ordered bands partitioning `[0, ∞)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<AgeBand>", into = "Vec<AgeBand>")]
pub struct AgeBands(Vec<AgeBand>);

impl TryFrom<Vec<AgeBand>> for AgeBands {
    type Error = Error;

    fn try_from(bands: Vec<AgeBand>) -> Result<Self> {
        AgeBands::new(bands)
    }
}

impl From<AgeBands> for Vec<AgeBand> {
    fn from(bands: AgeBands) -> Self {
        bands.0
    }
}

impl AgeBands {
    pub fn new(bands: Vec<AgeBand>) -> Result<Self> {
        let Some(first) = bands.first() else {
            return Err(Error::invalid("age_bands", "at least one band is required"));
        };
        if first.min_age != 0 {
            return Err(Error::invalid("age_bands", "first band must start at age 0"));
        }
        for pair in bands.windows(2) {
            match pair[0].max_age {
                Some(max) if max >= pair[0].min_age && pair[1].min_age == max + 1 => {}
                _ => {
                    return Err(Error::invalid(
                        "age_bands",
                        "bands must be contiguous, ordered and non-overlapping",
                    ))
                }
            }
        }
        if bands.last().is_some_and(|b| b.max_age.is_some()) {
            return Err(Error::invalid("age_bands", "last band must be unbounded"));
        }
        Ok(AgeBands(bands))
    }

    pub fn bands(&self) -> &[AgeBand] {
        &self.0
    }

    fn index_of(&self, age: u32) -> usize {
        self.0
            .iter()
            .position(|b| b.contains(age))
            .expect("bands partition [0, inf)")
    }
}

impl Default for AgeBands {
    /// 0–5, 6–15 and 16+ years.
    fn default() -> Self {
        AgeBands(vec![
            AgeBand {
                min_age: 0,
                max_age: Some(5),
            },
            AgeBand {
                min_age: 6,
                max_age: Some(15),
            },
            AgeBand {
                min_age: 16,
                max_age: None,
            },
        ])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandShare {
    pub band: AgeBand,
    pub references: u64,
    pub percentage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceAgeHistogram {
    pub bands: Vec<BandShare>,
    pub total_references: u64,
    /// No outgoing references; all percentages are zero.
    pub empty: bool,
    /// Some band reaches past the oldest age the article set can produce.
    pub truncated: bool,
}

impl ReferenceAgeHistogram {
    /// Share of the first band, in percent.
    pub fn youngest_share(&self) -> f64 {
        self.bands.first().map_or(0.0, |b| b.percentage)
    }
}

/// Distribution of reference ages, in whole years between the cited and the
/// citing article's publication year, for references made by `journal`
/// (`None` = every journal).
pub fn reference_age_distribution(
    ledger: &CitationLedger,
    articles: &[ArticleRecord],
    journal: Option<u32>,
    bands: &AgeBands,
) -> Result<ReferenceAgeHistogram> {
    if let Some(j) = journal {
        check_journal(ledger, j)?;
    }
    let by_id = |id: u32| &articles[id as usize - 1];
    let mut counts = vec![0u64; bands.bands().len()];
    for &(citing, cited) in &ledger.edges {
        let citing = by_id(citing);
        if journal.is_some_and(|j| citing.journal_id != j) {
            continue;
        }
        let age = citing.pub_year() - by_id(cited).pub_year();
        counts[bands.index_of(age)] += 1;
    }
    let total: u64 = counts.iter().sum();

    let (first, last) = articles
        .iter()
        .map(ArticleRecord::pub_year)
        .fold((u32::MAX, 0), |(lo, hi), y| (lo.min(y), hi.max(y)));
    let max_age = last.saturating_sub(first);
    let truncated = bands
        .bands()
        .iter()
        .any(|b| b.max_age.is_none_or(|m| m > max_age));

    let shares = bands
        .bands()
        .iter()
        .zip(&counts)
        .map(|(&band, &references)| BandShare {
            band,
            references,
            percentage: if total == 0 {
                0.0
            } else {
                100.0 * references as f64 / total as f64
            },
        })
        .collect();
    Ok(ReferenceAgeHistogram {
        bands: shares,
        total_references: total,
        empty: total == 0,
        truncated,
    })
}
