//! Artifact writers: versioned JSON, full-precision CSV, SVG, text summary.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

/// Schema identifier for a report kind, e.g. `phaseportrait/scenario/v1`.
pub fn schema_id(kind: &str) -> String {
    format!("phaseportrait/{kind}/v1")
}

/// Formats `x` with 4 significant figures in plain decimal notation.
pub fn sig4(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let mut exp = x.abs().log10().floor() as i32;
    let scale = 10f64.powi(exp - 3);
    let rounded = (x / scale).round() * scale;
    // rounding can carry into the next decade (9.9996 -> 10.00)
    if rounded.abs() >= 10f64.powi(exp + 1) {
        exp += 1;
    }
    let decimals = (3 - exp).max(0) as usize;
    let s = format!("{rounded:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_owned()
    } else {
        s
    }
}

/// Collects everything a command writes into the output directory.
#[derive(Debug)]
pub struct Artifacts {
    dir: PathBuf,
    written: Vec<String>,
    summary: Vec<String>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_owned(),
            source,
        })?;
        Ok(Artifacts {
            dir: dir.to_owned(),
            written: Vec::new(),
            summary: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// File names written so far, in write order.
    pub fn written(&self) -> &[String] {
        &self.written
    }

    pub fn summary_lines(&self) -> &[String] {
        &self.summary
    }

    pub fn line(&mut self, text: impl Into<String>) {
        self.summary.push(text.into());
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|source| CliError::Io { path, source })?;
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.to_owned());
        }
        Ok(())
    }

    /// Writes `payload` (a JSON object) with a leading `schema` field.
    pub fn json(&mut self, name: &str, kind: &str, payload: &impl Serialize) -> Result<(), CliError> {
        let mut value = serde_json::to_value(payload).map_err(|e| CliError::Output(e.to_string()))?;
        let Value::Object(map) = &mut value else {
            return Err(CliError::Output(format!("{name}: report is not a JSON object")));
        };
        map.insert("schema".into(), Value::String(schema_id(kind)));
        let mut text = serde_json::to_string_pretty(&value).map_err(|e| CliError::Output(e.to_string()))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| CliError::Output(format!("{name}: {e}"));
        w.write_record(header).map_err(err)?;
        for row in rows {
            w.write_record(row).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Output(format!("{name}: {e}")))?;
        self.write(name, &bytes)
    }

    pub fn text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        self.write(name, text.as_bytes())
    }
}

/// Full-precision cell: the shortest decimal string that round-trips.
pub fn cell(x: f64) -> String {
    x.to_string()
}

pub fn opt_cell(x: Option<f64>) -> String {
    x.map(cell).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_significant_figures() {
        assert_eq!(sig4(840.4612), "840.5");
        assert_eq!(sig4(4854.3), "4854");
        assert_eq!(sig4(12345.0), "12350");
        assert_eq!(sig4(0.017953), "0.01795");
        assert_eq!(sig4(-0.0089), "-0.008900");
        assert_eq!(sig4(9.99996), "10.00");
        assert_eq!(sig4(2035.54), "2036");
        assert_eq!(sig4(0.0), "0");
        assert_eq!(sig4(1.0), "1.000");
    }

    #[test]
    fn cells_round_trip() {
        let x = 2.0f64 / 3.0;
        assert_eq!(cell(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        assert_eq!(cell(1998.0), "1998");
        assert_eq!(opt_cell(None), "");
    }
}
