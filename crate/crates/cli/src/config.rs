//! Serializable run configuration. A saved config replays a run exactly.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use phaseportrait_core::{Bootstrap, LorenzParams};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Version tag written into every saved config.
pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Ingest,
    Phase2d,
    Phase3d,
    FitBackground,
    FitLorenz,
    SimulateLorenz,
    Attractor,
    Scenario,
    ReportAll,
}

impl CommandKind {
    pub fn name(&self) -> &'static str {
        match self {
            CommandKind::Ingest => "ingest",
            CommandKind::Phase2d => "phase2d",
            CommandKind::Phase3d => "phase3d",
            CommandKind::FitBackground => "fit-background",
            CommandKind::FitLorenz => "fit-lorenz",
            CommandKind::SimulateLorenz => "simulate-lorenz",
            CommandKind::Attractor => "attractor",
            CommandKind::Scenario => "scenario",
            CommandKind::ReportAll => "report-all",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub command: CommandKind,
    pub out_dir: PathBuf,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default)]
    pub eroei: EroeiConfig,
    #[serde(default)]
    pub phase: PhaseConfig,
    #[serde(default)]
    pub background: BackgroundConfig,
    #[serde(default)]
    pub lorenz: LorenzConfig,
    #[serde(default)]
    pub attractor: AttractorConfig,
    #[serde(default)]
    pub scenario: ScenarioConfig,
}

impl RunConfig {
    pub fn new(command: CommandKind, out_dir: impl Into<PathBuf>) -> Self {
        RunConfig {
            version: CONFIG_VERSION,
            command,
            out_dir: out_dir.into(),
            data: DataConfig::default(),
            eroei: EroeiConfig::default(),
            phase: PhaseConfig::default(),
            background: BackgroundConfig::default(),
            lorenz: LorenzConfig::default(),
            attractor: AttractorConfig::default(),
            scenario: ScenarioConfig::default(),
        }
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if cfg.version != CONFIG_VERSION {
            return Err(CliError::Config(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                cfg.version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let text = self.to_toml()?;
        std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        })
    }
}

/// Input files and column mapping. `path = None` means `$PHASEPORTRAIT_DATA`
/// if set, otherwise the bundled dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub path: Option<PathBuf>,
    /// Separate `year,population` CSV joined onto the dataset.
    pub population_path: Option<PathBuf>,
    pub col_year: String,
    pub col_production: String,
    pub col_price: String,
    pub col_population: Option<String>,
    /// Price index column; when set the price column is treated as nominal.
    pub col_deflator: Option<String>,
    pub base_year: i32,
    /// Per-year EROEI column; when set it replaces the linear model.
    pub col_eroei: Option<String>,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            path: None,
            population_path: None,
            col_year: "year".into(),
            col_production: "production_mt".into(),
            col_price: "price_usd2014".into(),
            col_population: None,
            col_deflator: None,
            base_year: 2014,
            col_eroei: None,
        }
    }
}

/// Linear EROEI anchors `(year_start, e_start) -> (year_end, e_end)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Anchors {
    pub year_start: i32,
    pub e_start: f64,
    pub year_end: i32,
    pub e_end: f64,
}

impl FromStr for Anchors {
    type Err = String;

    /// Parses `y0:e0,y1:e1`.
    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("expected `y0:e0,y1:e1`, got `{s}`");
        let (a, b) = s.split_once(',').ok_or_else(bad)?;
        let pair = |p: &str| -> Result<(i32, f64), String> {
            let (y, e) = p.trim().split_once(':').ok_or_else(bad)?;
            Ok((
                y.trim().parse().map_err(|_| bad())?,
                e.trim().parse().map_err(|_| bad())?,
            ))
        };
        let (year_start, e_start) = pair(a)?;
        let (year_end, e_end) = pair(b)?;
        Ok(Anchors {
            year_start,
            e_start,
            year_end,
            e_end,
        })
    }
}

impl fmt::Display for Anchors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{},{}:{}", self.year_start, self.e_start, self.year_end, self.e_end)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EroeiConfig {
    /// `None` = 30 in the first dataset year falling to 15 in the last.
    pub anchors: Option<Anchors>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseConfig {
    /// Plot production per capita instead of total production.
    pub per_capita: bool,
    /// Divide every axis by its value in this year.
    pub normalize_year: Option<i32>,
    /// k values (US$/bbl) drawn as `k / E(year)` overlays on the 2D portrait.
    pub k_curves: Vec<f64>,
    /// Label every n-th point with its year (0 = no labels).
    pub label_every: usize,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        PhaseConfig {
            per_capita: false,
            normalize_year: None,
            k_curves: vec![100.0, 250.0, 450.0, 750.0],
            label_every: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackgroundConfig {
    /// Explicit support years; `None` selects them from the lower convex hull.
    pub support_years: Option<Vec<i32>>,
    pub bootstrap_draws: usize,
    pub seed: u64,
    /// Relative excess over the background that marks an anomaly.
    pub anomaly_threshold: f64,
    /// Tolerance used when listing years below the fitted curve.
    pub below_tolerance: f64,
}

impl BackgroundConfig {
    pub fn bootstrap(&self) -> Bootstrap {
        Bootstrap {
            draws: self.bootstrap_draws,
            seed: self.seed,
        }
    }
}

impl Default for BackgroundConfig {
    fn default() -> Self {
        let b = Bootstrap::default();
        BackgroundConfig {
            support_years: None,
            bootstrap_draws: b.draws,
            seed: b.seed,
            anomaly_threshold: 0.5,
            below_tolerance: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LorenzConfig {
    pub sigma: f64,
    pub r: f64,
    pub b: f64,
    pub x0: f64,
    pub y0: f64,
    pub z0: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Samples before this time are dropped from statistics and fits.
    pub transient: f64,
    /// Trajectory CSV (`t,x,y,z`) for fit-lorenz; `None` fits the dataset.
    pub trajectory: Option<PathBuf>,
    /// Nondimensionalization year for dataset fits; `None` = middle year.
    pub reference_year: Option<i32>,
}

impl LorenzConfig {
    pub fn params(&self) -> LorenzParams {
        LorenzParams {
            sigma: self.sigma,
            r: self.r,
            b: self.b,
        }
    }
}

impl Default for LorenzConfig {
    fn default() -> Self {
        let p = LorenzParams::CLASSICAL;
        LorenzConfig {
            sigma: p.sigma,
            r: p.r,
            b: p.b,
            x0: 1.0,
            y0: 1.0,
            z0: 1.0,
            dt: 0.005,
            t_end: 50.0,
            transient: 5.0,
            trajectory: None,
            reference_year: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttractorConfig {
    /// Trailing years for the attractor statistics.
    pub window: usize,
    /// Reference level drawn on the per-capita plot (t/person).
    pub guide: f64,
}

impl Default for AttractorConfig {
    fn default() -> Self {
        AttractorConfig { window: 25, guide: 0.59 }
    }
}

/// `k` for the scenario: refit on the dataset or a fixed value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum KChoice {
    Fit,
    Value(f64),
}

impl FromStr for KChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.trim() == "fit" {
            return Ok(KChoice::Fit);
        }
        match s.trim().parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(KChoice::Value(v)),
            _ => Err(format!("expected `fit` or a positive number, got `{s}`")),
        }
    }
}

impl TryFrom<String> for KChoice {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<KChoice> for String {
    fn from(k: KChoice) -> String {
        match k {
            KChoice::Fit => "fit".into(),
            KChoice::Value(v) => v.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub k: KChoice,
    /// US$(2014)/bbl
    pub threshold: f64,
    /// Years of price path written past the crossing.
    pub horizon_after: i32,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            k: KChoice::Fit,
            threshold: 100.0,
            horizon_after: 5,
        }
    }
}
