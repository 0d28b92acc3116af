use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),

    #[error("configuration error: column `{0}` not found in header")]
    MissingColumn(String),

    #[error("validation error: row {row}, column `{column}`: cannot parse `{value}` as a number")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },

    #[error("validation error: dataset is empty")]
    Empty,

    #[error("validation error: dataset needs at least {required} records, found {found}")]
    TooFewRecords { found: usize, required: usize },

    #[error("validation error: year {0} appears more than once")]
    DuplicateYear(i32),

    #[error("validation error: years are not contiguous, missing {missing:?}")]
    YearGap { missing: Vec<i32> },

    #[error("validation error: row {row}: {field} must be {requirement}, got {value}")]
    OutOfRange {
        row: usize,
        field: &'static str,
        requirement: &'static str,
        value: f64,
    },

    #[error("no {what} for year {year}")]
    MissingYear { what: &'static str, year: i32 },

    #[error("field `{field}` is unavailable for year {year}")]
    MissingField { field: &'static str, year: i32 },

    #[error("invalid EROEI model: {0}")]
    InvalidModel(String),

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("need at least {required} points, got {found}")]
    TooFewPoints { found: usize, required: usize },

    #[error("zero-variance regressor in the {equation} equation")]
    ZeroVariance { equation: &'static str },

    #[error("non-finite state at integration step {step}")]
    NonFinite { step: usize },

    #[error("EROEI is non-positive ({value}) at year {year}")]
    NonPositiveEroei { year: i32, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("nothing to plot")]
    EmptyPlot,
}
