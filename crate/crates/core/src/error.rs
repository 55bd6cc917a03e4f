use thiserror::Error;

/// Everything that can go wrong inside the simulator library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A configuration value breaks an invariant. `field` is the dotted
    /// manifest path of the offending value, e.g. `kernel.beta`.
    #[error("invalid value for `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    /// Article ages are measured backwards from the citing month.
    #[error("article age must be nonpositive, got {0} months")]
    PositiveAge(i64),

    #[error("quality level {0} is outside 1..=10")]
    QualityOutOfRange(u8),

    /// The first two years carry the conventional value and have no
    /// two-year window of their own.
    #[error("year {0} has no full two-year window (impact factors start at year 3)")]
    ConventionYear(u32),

    #[error("year window {from}..={to} is outside the simulated range 3..={years}")]
    YearWindow { from: u32, to: u32, years: u32 },

    #[error("journal {journal} is outside 1..={journals}")]
    UnknownJournal { journal: u32, journals: u32 },

    #[error("sweep axis `{0}` not found")]
    UnknownAxis(String),

    #[error("trend needs at least 3 axis values, axis `{axis}` has {len}")]
    ShortAxis { axis: String, len: usize },
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
