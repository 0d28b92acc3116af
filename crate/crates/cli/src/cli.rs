//! Command-line surface. Flags are applied on top of either the defaults or
//! a `--config` file, yielding a [`RunConfig`].

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{Anchors, CommandKind, KChoice, RunConfig};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "phaseportrait", version, about = "Oil price/production phase portraits, background fits and Lorenz-system tools")]
pub struct Cli {
    /// Run configuration to start from (TOML). Without a subcommand, its command is run.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Write the resolved run configuration to FILE before running.
    #[arg(long, global = true, value_name = "FILE")]
    pub save_config: Option<PathBuf>,

    /// Output directory for SVG, CSV and JSON artifacts [default: out].
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    #[command(flatten)]
    pub data: DataArgs,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load and validate the dataset; write it back with derived columns.
    Ingest,
    /// Price-production trajectory with self-crossings, loops and k-curves.
    Phase2d(PhaseArgs),
    /// Production-price-EROEI trajectory as two projections.
    Phase3d(PhaseArgs),
    /// Fit the background price P = k / EROEI on the lowest points.
    FitBackground {
        #[command(flatten)]
        background: BackgroundArgs,
        #[command(flatten)]
        phase: PhaseArgs,
    },
    /// Estimate Lorenz parameters from the dataset or a trajectory CSV.
    FitLorenz(LorenzArgs),
    /// Integrate the Lorenz system with RK4.
    SimulateLorenz(LorenzArgs),
    /// Per-capita production statistics and plot.
    Attractor(AttractorArgs),
    /// Year at which the background price reaches a threshold.
    Scenario {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        background: BackgroundArgs,
    },
    /// Run every analysis and write all artifacts.
    ReportAll {
        #[command(flatten)]
        phase: PhaseArgs,
        #[command(flatten)]
        background: BackgroundArgs,
        #[command(flatten)]
        lorenz: LorenzArgs,
        #[command(flatten)]
        attractor: AttractorArgs,
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
}

#[derive(Debug, Default, Args)]
pub struct DataArgs {
    /// Data CSV, or a directory holding oil_1965_2014.csv [env: PHASEPORTRAIT_DATA]
    #[arg(long, global = true, value_name = "PATH")]
    pub data: Option<PathBuf>,
    /// `year,population` CSV joined onto the dataset.
    #[arg(long, global = true, value_name = "FILE")]
    pub population: Option<PathBuf>,
    #[arg(long, global = true, value_name = "NAME")]
    pub col_year: Option<String>,
    #[arg(long, global = true, value_name = "NAME")]
    pub col_production: Option<String>,
    #[arg(long, global = true, value_name = "NAME")]
    pub col_price: Option<String>,
    #[arg(long, global = true, value_name = "NAME")]
    pub col_population: Option<String>,
    /// Price-index column; marks the price column as nominal.
    #[arg(long, global = true, value_name = "NAME")]
    pub col_deflator: Option<String>,
    /// Base year for deflated prices.
    #[arg(long, global = true, value_name = "YEAR")]
    pub base_year: Option<i32>,
    /// Per-year EROEI column, used instead of the linear model.
    #[arg(long, global = true, value_name = "NAME")]
    pub col_eroei: Option<String>,
    /// Linear EROEI anchors `y0:e0,y1:e1`.
    #[arg(long, global = true, value_name = "Y0:E0,Y1:E1")]
    pub eroei_anchors: Option<Anchors>,
}

#[derive(Debug, Default, Args)]
pub struct PhaseArgs {
    /// Use production per capita on the horizontal axis.
    #[arg(long)]
    pub per_capita: bool,
    /// Divide every axis by its value in YEAR.
    #[arg(long, value_name = "YEAR")]
    pub normalize: Option<i32>,
    /// Background curves to overlay, comma separated (US$/bbl).
    #[arg(long, value_delimiter = ',', value_name = "K,...")]
    pub k_curves: Option<Vec<f64>>,
    /// Label every n-th point with its year (0 = none).
    #[arg(long, value_name = "N")]
    pub label_every: Option<usize>,
}

#[derive(Debug, Default, Args)]
pub struct BackgroundArgs {
    /// Support years for the fit, comma separated [default: lower convex hull].
    #[arg(long, value_delimiter = ',', value_name = "YEAR,...")]
    pub support_years: Option<Vec<i32>>,
    #[arg(long, value_name = "N")]
    pub bootstrap_draws: Option<usize>,
    /// Seed for the bootstrap resampling.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Relative excess over the background marking an anomaly [default: 0.5].
    #[arg(long, value_name = "FRACTION")]
    pub anomaly_threshold: Option<f64>,
}

#[derive(Debug, Default, Args)]
pub struct LorenzArgs {
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long = "r")]
    pub r: Option<f64>,
    #[arg(long = "b")]
    pub b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub x0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub y0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub z0: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Time discarded before computing statistics.
    #[arg(long)]
    pub transient: Option<f64>,
    /// `t,x,y,z` CSV to fit instead of the dataset.
    #[arg(long, value_name = "FILE")]
    pub trajectory: Option<PathBuf>,
    /// Year whose values nondimensionalize the dataset fit [default: middle year].
    #[arg(long, value_name = "YEAR")]
    pub reference_year: Option<i32>,
}

#[derive(Debug, Default, Args)]
pub struct AttractorArgs {
    /// Trailing years for the statistics.
    #[arg(long, value_name = "YEARS")]
    pub window: Option<usize>,
    /// Reference level on the per-capita plot (t/person).
    #[arg(long)]
    pub guide: Option<f64>,
}

#[derive(Debug, Default, Args)]
pub struct ScenarioArgs {
    /// `fit` or a fixed value in US$/bbl.
    #[arg(long)]
    pub k: Option<KChoice>,
    /// Critical background price (US$/bbl).
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Years of price path past the crossing.
    #[arg(long, value_name = "YEARS")]
    pub horizon_after: Option<i32>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn set_opt<T>(slot: &mut Option<T>, value: Option<T>) {
    if value.is_some() {
        *slot = value;
    }
}

impl DataArgs {
    fn apply(self, cfg: &mut RunConfig) {
        let d = &mut cfg.data;
        set_opt(&mut d.path, self.data);
        set_opt(&mut d.population_path, self.population);
        set(&mut d.col_year, self.col_year);
        set(&mut d.col_production, self.col_production);
        set(&mut d.col_price, self.col_price);
        set_opt(&mut d.col_population, self.col_population);
        set_opt(&mut d.col_deflator, self.col_deflator);
        set(&mut d.base_year, self.base_year);
        set_opt(&mut d.col_eroei, self.col_eroei);
        set_opt(&mut cfg.eroei.anchors, self.eroei_anchors);
    }
}

impl PhaseArgs {
    fn apply(self, cfg: &mut RunConfig) {
        let p = &mut cfg.phase;
        if self.per_capita {
            p.per_capita = true;
        }
        set_opt(&mut p.normalize_year, self.normalize);
        set(&mut p.k_curves, self.k_curves);
        set(&mut p.label_every, self.label_every);
    }
}

impl BackgroundArgs {
    fn apply(self, cfg: &mut RunConfig) {
        let b = &mut cfg.background;
        set_opt(&mut b.support_years, self.support_years);
        set(&mut b.bootstrap_draws, self.bootstrap_draws);
        set(&mut b.seed, self.seed);
        set(&mut b.anomaly_threshold, self.anomaly_threshold);
    }
}

impl LorenzArgs {
    fn apply(self, cfg: &mut RunConfig) {
        let l = &mut cfg.lorenz;
        set(&mut l.sigma, self.sigma);
        set(&mut l.r, self.r);
        set(&mut l.b, self.b);
        set(&mut l.x0, self.x0);
        set(&mut l.y0, self.y0);
        set(&mut l.z0, self.z0);
        set(&mut l.dt, self.dt);
        set(&mut l.t_end, self.t_end);
        set(&mut l.transient, self.transient);
        set_opt(&mut l.trajectory, self.trajectory);
        set_opt(&mut l.reference_year, self.reference_year);
    }
}

impl AttractorArgs {
    fn apply(self, cfg: &mut RunConfig) {
        set(&mut cfg.attractor.window, self.window);
        set(&mut cfg.attractor.guide, self.guide);
    }
}

impl ScenarioArgs {
    fn apply(self, cfg: &mut RunConfig) {
        set(&mut cfg.scenario.k, self.k);
        set(&mut cfg.scenario.threshold, self.threshold);
        set(&mut cfg.scenario.horizon_after, self.horizon_after);
    }
}

impl Cli {
    /// Resolves flags (over an optional base config) into a run configuration.
    pub fn into_config(self) -> Result<RunConfig, CliError> {
        let base = self.config.as_deref().map(RunConfig::load).transpose()?;
        let kind = match (&self.command, &base) {
            (Some(c), _) => c.kind(),
            (None, Some(b)) => b.command,
            (None, None) => return Err(CliError::Usage("a subcommand or --config is required".into())),
        };
        let mut cfg = base.unwrap_or_else(|| RunConfig::new(kind, "out"));
        cfg.command = kind;
        set(&mut cfg.out_dir, self.out);
        self.data.apply(&mut cfg);
        match self.command {
            None | Some(Command::Ingest) => {}
            Some(Command::Phase2d(p)) | Some(Command::Phase3d(p)) => p.apply(&mut cfg),
            Some(Command::FitBackground { background, phase }) => {
                background.apply(&mut cfg);
                phase.apply(&mut cfg);
            }
            Some(Command::FitLorenz(l)) | Some(Command::SimulateLorenz(l)) => l.apply(&mut cfg),
            Some(Command::Attractor(a)) => a.apply(&mut cfg),
            Some(Command::Scenario { scenario, background }) => {
                scenario.apply(&mut cfg);
                background.apply(&mut cfg);
            }
            Some(Command::ReportAll {
                phase,
                background,
                lorenz,
                attractor,
                scenario,
            }) => {
                phase.apply(&mut cfg);
                background.apply(&mut cfg);
                lorenz.apply(&mut cfg);
                attractor.apply(&mut cfg);
                scenario.apply(&mut cfg);
            }
        }
        Ok(cfg)
    }
}

impl Command {
    pub fn kind(&self) -> CommandKind {
        match self {
            Command::Ingest => CommandKind::Ingest,
            Command::Phase2d(_) => CommandKind::Phase2d,
            Command::Phase3d(_) => CommandKind::Phase3d,
            Command::FitBackground { .. } => CommandKind::FitBackground,
            Command::FitLorenz(_) => CommandKind::FitLorenz,
            Command::SimulateLorenz(_) => CommandKind::SimulateLorenz,
            Command::Attractor(_) => CommandKind::Attractor,
            Command::Scenario { .. } => CommandKind::Scenario,
            Command::ReportAll { .. } => CommandKind::ReportAll,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> RunConfig {
        let mut full = vec!["phaseportrait"];
        full.extend_from_slice(args);
        Cli::try_parse_from(full).unwrap().into_config().unwrap()
    }

    #[test]
    fn flags_land_in_config() {
        let cfg = parse(&[
            "scenario",
            "--k",
            "450",
            "--threshold",
            "120",
            "--eroei-anchors",
            "2014:9,2044:3",
            "--out",
            "x",
        ]);
        assert_eq!(cfg.command, CommandKind::Scenario);
        assert_eq!(cfg.scenario.k, KChoice::Value(450.0));
        assert_eq!(cfg.scenario.threshold, 120.0);
        assert_eq!(cfg.eroei.anchors.unwrap().e_end, 3.0);
        assert_eq!(cfg.out_dir, PathBuf::from("x"));
    }

    #[test]
    fn lorenz_flags() {
        let cfg = parse(&["simulate-lorenz", "--r", "0.5", "--x0", "-2", "--t-end", "10"]);
        assert_eq!(cfg.lorenz.r, 0.5);
        assert_eq!(cfg.lorenz.x0, -2.0);
        assert_eq!(cfg.lorenz.t_end, 10.0);
        assert_eq!(cfg.lorenz.sigma, 10.0);
    }

    #[test]
    fn list_flags() {
        let cfg = parse(&["fit-background", "--support-years", "1970,1998,2002", "--k-curves", "100,750"]);
        assert_eq!(cfg.background.support_years, Some(vec![1970, 1998, 2002]));
        assert_eq!(cfg.phase.k_curves, vec![100.0, 750.0]);
    }

    #[test]
    fn subcommand_required_without_config() {
        let err = Cli::try_parse_from(["phaseportrait"]).unwrap().into_config().unwrap_err();
        assert!(matches!(err, CliError::Usage(_)));
        assert!(Cli::try_parse_from(["phaseportrait", "frobnicate"]).is_err());
    }
}
