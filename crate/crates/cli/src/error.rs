use std::path::PathBuf;

use phaseportrait_core::Error as CoreError;
use serde_json::{json, Value};

pub const ERROR_SCHEMA: &str = "phaseportrait/error/v1";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// A failure inside one of the analysis modules.
    #[error("{module}: {source}")]
    Module {
        module: &'static str,
        /// Input file being processed, when there is one.
        input: Option<PathBuf>,
        #[source]
        source: CoreError,
    },

    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("cannot write output: {0}")]
    Output(String),
}

/// Attaches the owning module (and optionally the input file) to core errors.
pub trait InModule<T> {
    fn in_module(self, module: &'static str) -> Result<T, CliError>;
    fn in_module_at(self, module: &'static str, input: Option<PathBuf>) -> Result<T, CliError>;
}

impl<T> InModule<T> for Result<T, CoreError> {
    fn in_module(self, module: &'static str) -> Result<T, CliError> {
        self.in_module_at(module, None)
    }

    fn in_module_at(self, module: &'static str, input: Option<PathBuf>) -> Result<T, CliError> {
        self.map_err(|source| CliError::Module { module, input, source })
    }
}

fn core_kind(e: &CoreError) -> &'static str {
    match e {
        CoreError::Io { .. } => "io",
        CoreError::Csv(_) => "parse",
        CoreError::MissingColumn(_) => "configuration",
        CoreError::Parse { .. }
        | CoreError::Empty
        | CoreError::TooFewRecords { .. }
        | CoreError::DuplicateYear(_)
        | CoreError::YearGap { .. }
        | CoreError::OutOfRange { .. } => "validation",
        CoreError::InvalidArgument(_) | CoreError::InvalidModel(_) => "invalid-input",
        _ => "computation",
    }
}

fn core_location(e: &CoreError) -> Value {
    match e {
        CoreError::Parse { row, column, .. } => json!({ "row": row, "column": column }),
        CoreError::OutOfRange { row, field, .. } => json!({ "row": row, "column": field }),
        CoreError::MissingColumn(c) => json!({ "column": c }),
        CoreError::DuplicateYear(y) => json!({ "year": y }),
        CoreError::MissingYear { year, .. } | CoreError::MissingField { year, .. } => json!({ "year": year }),
        CoreError::NonPositiveEroei { year, .. } => json!({ "year": year }),
        CoreError::Csv(c) => match c.position() {
            Some(p) => json!({ "line": p.line() }),
            None => Value::Null,
        },
        _ => Value::Null,
    }
}

impl CliError {
    pub fn module(&self) -> &'static str {
        match self {
            CliError::Module { module, .. } => module,
            _ => "cli-report",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            _ => 1,
        }
    }

    /// Machine-readable form written to stderr on failure.
    pub fn to_json(&self) -> Value {
        let (kind, input, location) = match self {
            CliError::Module { input, source, .. } => (
                core_kind(source),
                input.as_ref().map(|p| p.display().to_string()),
                core_location(source),
            ),
            CliError::Io { path, .. } => ("io", Some(path.display().to_string()), Value::Null),
            CliError::Config(_) => ("configuration", None, Value::Null),
            CliError::Usage(_) => ("usage", None, Value::Null),
            CliError::Output(_) => ("io", None, Value::Null),
        };
        json!({
            "schema": ERROR_SCHEMA,
            "error": {
                "module": self.module(),
                "kind": kind,
                "message": self.to_string(),
                "input": input,
                "location": location,
            }
        })
    }
}
