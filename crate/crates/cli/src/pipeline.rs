//! Subcommand pipelines tying the core modules to files on disk.

use std::path::{Path, PathBuf};

use phaseportrait_core::data::{self, bundled};
use phaseportrait_core::envelope::{self, ADMISSIBLE_K};
use phaseportrait_core::geometry::{self, CrossingReport, DegenerateOverlap, LoopReport};
use phaseportrait_core::lorenz::{self, LorenzState};
use phaseportrait_core::plot::{render_plot, Guide, Panel, PlotKind, PlotSpec, Series, SeriesStyle};
use phaseportrait_core::scenario;
use phaseportrait_core::stats;
use phaseportrait_core::{
    AttractorReport, AxisSpec, BackgroundFit, ColumnMap, Crossing, Dataset, EroeiModel, EroeiSource, LorenzFit,
    PhaseTrajectory, PriceMode, ProductInvariance, ScenarioResult, SupportMode, XAxis, YearInterval, ZAxis,
};
use serde::Serialize;

use crate::config::{CommandKind, KChoice, RunConfig};
use crate::error::{CliError, InModule};
use crate::output::{cell, opt_cell, sig4, Artifacts};

pub const DATA_ENV: &str = "PHASEPORTRAIT_DATA";
pub const OIL_FILE: &str = "oil_1965_2014.csv";
pub const POPULATION_FILE: &str = "world_population.csv";

const DATA: &str = "data-model";
const GEOMETRY: &str = "phase-geometry";
const ENVELOPE: &str = "envelope-fit";
const LORENZ: &str = "lorenz-lab";
const SCENARIO: &str = "scenario";
const REPORT: &str = "cli-report";

/// Result of a successful run.
#[derive(Debug)]
pub struct RunOutput {
    pub out_dir: PathBuf,
    /// Artifact file names relative to `out_dir`.
    pub artifacts: Vec<String>,
    pub summary: String,
}

/// Executes the configured subcommand, reading `$PHASEPORTRAIT_DATA` when no
/// data path is configured.
pub fn run(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let env = std::env::var_os(DATA_ENV).map(PathBuf::from);
    run_with_env(cfg, env.as_deref())
}

pub fn run_with_env(cfg: &RunConfig, data_env: Option<&Path>) -> Result<RunOutput, CliError> {
    let mut art = Artifacts::create(&cfg.out_dir)?;
    art.line(format!("phaseportrait {}", cfg.command.name()));
    let needs_data = !matches!(cfg.command, CommandKind::SimulateLorenz)
        && !(cfg.command == CommandKind::FitLorenz && cfg.lorenz.trajectory.is_some());
    let inputs = if needs_data {
        Some(load_inputs(cfg, data_env)?)
    } else {
        None
    };
    let inp = || inputs.as_ref().expect("inputs loaded for data commands");
    match cfg.command {
        CommandKind::Ingest => ingest(cfg, inp(), &mut art)?,
        CommandKind::Phase2d => phase2d(cfg, inp(), &mut art)?,
        CommandKind::Phase3d => phase3d(cfg, inp(), &mut art)?,
        CommandKind::FitBackground => {
            fit_background(cfg, inp(), &mut art)?;
        }
        CommandKind::FitLorenz => fit_lorenz(cfg, inputs.as_ref(), &mut art)?,
        CommandKind::SimulateLorenz => simulate_lorenz(cfg, &mut art)?,
        CommandKind::Attractor => attractor(cfg, inp(), &mut art)?,
        CommandKind::Scenario => scenario(cfg, inp(), &mut art)?,
        CommandKind::ReportAll => report_all(cfg, inp(), &mut art)?,
    }
    let mut summary = art.summary_lines().join("\n");
    summary.push('\n');
    art.text("summary.txt", &summary)?;
    Ok(RunOutput {
        out_dir: cfg.out_dir.clone(),
        artifacts: art.written().to_vec(),
        summary,
    })
}

/// Loaded dataset plus the EROEI assumptions applied to it.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub dataset: Dataset,
    pub model: EroeiModel,
    pub source: EroeiSource,
    /// Path of the data file, `None` for the bundled copy.
    pub path: Option<PathBuf>,
}

fn column_map(cfg: &RunConfig) -> ColumnMap {
    let d = &cfg.data;
    ColumnMap {
        year: d.col_year.clone(),
        production: d.col_production.clone(),
        price: d.col_price.clone(),
        population: d.col_population.clone(),
        eroei: d.col_eroei.clone(),
        price_mode: match &d.col_deflator {
            None => PriceMode::Real,
            Some(col) => PriceMode::Nominal {
                deflator: col.clone(),
                base_year: d.base_year,
            },
        },
    }
}

/// Resolves the data file: configured path, then `data_env`, then the
/// bundled copy. A directory is searched for the bundled file names.
pub fn load_inputs(cfg: &RunConfig, data_env: Option<&Path>) -> Result<Inputs, CliError> {
    let columns = column_map(cfg);
    let location = cfg.data.path.as_deref().or(data_env);
    let (oil_path, sibling_population) = match location {
        None => (None, None),
        Some(p) if p.is_dir() => {
            let pop = p.join(POPULATION_FILE);
            (Some(p.join(OIL_FILE)), pop.is_file().then_some(pop))
        }
        Some(p) => (Some(p.to_owned()), None),
    };
    let mut dataset = match &oil_path {
        None => data::parse_dataset(bundled::OIL_CSV.as_bytes(), &columns, bundled::OIL_LABEL).in_module(DATA)?,
        Some(p) => data::load_dataset(p, &columns).in_module_at(DATA, Some(p.clone()))?,
    };
    if cfg.data.col_population.is_none() {
        let population = match (&cfg.data.population_path, &sibling_population, &oil_path) {
            (Some(p), _, _) | (None, Some(p), _) => {
                Some(data::load_series(p, "year", "population").in_module_at(DATA, Some(p.clone()))?)
            }
            (None, None, None) => Some(bundled::population()),
            (None, None, Some(_)) => None,
        };
        if let Some(pop) = population {
            let input = cfg.data.population_path.clone().or(sibling_population);
            dataset = dataset.join_population(&pop).in_module_at(DATA, input)?;
        }
    }
    let model = match cfg.eroei.anchors {
        None => EroeiModel::default_for(&dataset),
        Some(a) => EroeiModel::new(a.year_start, a.e_start, a.year_end, a.e_end).in_module(DATA)?,
    };
    let source = if cfg.data.col_eroei.is_some() {
        EroeiSource::PerYear
    } else {
        EroeiSource::Model(model)
    };
    Ok(Inputs {
        dataset,
        model,
        source,
        path: oil_path,
    })
}

fn eroei_series(inp: &Inputs) -> Result<Vec<f64>, CliError> {
    inp.dataset
        .years()
        .into_iter()
        .map(|y| inp.source.eroei(&inp.dataset, y))
        .collect::<Result<Vec<_>, _>>()
        .in_module(DATA)
}

#[derive(Serialize)]
struct EroeiDescription {
    source: &'static str,
    model: EroeiModel,
}

fn describe_eroei(inp: &Inputs) -> EroeiDescription {
    EroeiDescription {
        source: match inp.source {
            EroeiSource::Model(_) => "linear-model",
            EroeiSource::PerYear => "dataset-column",
        },
        model: inp.model,
    }
}

fn year_labels(years: impl IntoIterator<Item = i32>) -> Vec<String> {
    years.into_iter().map(|y| y.to_string()).collect()
}

fn svg(art: &mut Artifacts, name: &str, spec: PlotSpec, panels: &[Panel]) -> Result<(), CliError> {
    let doc = render_plot(&spec, panels).in_module(REPORT)?;
    art.text(name, &doc)
}

// ---------------------------------------------------------------- ingest

#[derive(Serialize)]
struct DatasetReport {
    source: String,
    first_year: i32,
    last_year: i32,
    n_records: usize,
    columns: ColumnMap,
    has_population: bool,
    eroei: EroeiDescription,
}

fn ingest(cfg: &RunConfig, inp: &Inputs, art: &mut Artifacts) -> Result<(), CliError> {
    let ds = &inp.dataset;
    let es = eroei_series(inp)?;
    let has_population = ds.records().iter().all(|r| r.population.is_some());
    let rows: Vec<Vec<String>> = ds
        .records()
        .iter()
        .zip(&es)
        .map(|(r, e)| {
            vec![
                r.year.to_string(),
                cell(r.production),
                cell(r.price),
                opt_cell(r.population),
                cell(*e),
                opt_cell(r.population.map(|p| r.production * 1e6 / p)),
            ]
        })
        .collect();
    art.csv(
        "dataset.csv",
        &["year", "production_mt", "price_usd", "population", "eroei", "per_capita_t"],
        &rows,
    )?;
    art.json(
        "dataset.json",
        "dataset",
        &DatasetReport {
            source: ds.source_label().to_owned(),
            first_year: ds.first_year(),
            last_year: ds.last_year(),
            n_records: ds.len(),
            columns: column_map(cfg),
            has_population,
            eroei: describe_eroei(inp),
        },
    )?;
    art.line(format!(
        "dataset: {} records, {}-{} ({})",
        ds.len(),
        ds.first_year(),
        ds.last_year(),
        ds.source_label()
    ));
    Ok(())
}

// ---------------------------------------------------------------- phase portraits

#[derive(Serialize)]
struct LoopEntry {
    start_crossing: Crossing,
    vertex_chain: Vec<[f64; 2]>,
    signed_area: f64,
    orientation: i8,
    years: YearInterval,
}

#[derive(Serialize)]
struct CrossingsReport {
    source: String,
    x_axis: String,
    y_axis: String,
    normalized_to: Option<i32>,
    n_points: usize,
    crossings: Vec<Crossing>,
    degenerate_overlaps: Vec<DegenerateOverlap>,
    loops: Vec<LoopEntry>,
    degenerate_loops: Vec<Crossing>,
}

fn crossings_report(
    traj: &PhaseTrajectory,
    cr: &CrossingReport,
    lr: &LoopReport,
    source: &str,
    axes: (&str, &str),
    normalized_to: Option<i32>,
) -> CrossingsReport {
    CrossingsReport {
        source: source.to_owned(),
        x_axis: axes.0.to_owned(),
        y_axis: axes.1.to_owned(),
        normalized_to,
        n_points: traj.len(),
        crossings: cr.crossings.clone(),
        degenerate_overlaps: cr.degenerate.clone(),
        loops: lr
            .loops
            .iter()
            .map(|l| {
                let (start, end) = geometry::loop_years(traj, l);
                LoopEntry {
                    start_crossing: l.start_crossing,
                    vertex_chain: l.vertex_chain.clone(),
                    signed_area: l.signed_area,
                    orientation: l.orientation,
                    years: YearInterval { start, end },
                }
            })
            .collect(),
        degenerate_loops: lr.degenerate.clone(),
    }
}

fn x_axis(cfg: &RunConfig) -> (XAxis, &'static str) {
    if cfg.phase.per_capita {
        (XAxis::PerCapitaProduction, "Oil production per capita (t/person)")
    } else {
        (XAxis::Production, "Oil production (Mt/yr)")
    }
}

fn with_norm(label: &str, normalize: Option<i32>) -> String {
    match normalize {
        None => label.to_owned(),
        Some(y) => format!("{label}, relative to {y}"),
    }
}

const PRICE_LABEL: &str = "Oil price (2014 US$/bbl)";
const EROEI_LABEL: &str = "EROEI (dimensionless)";

fn timeline(traj: &PhaseTrajectory, pick: impl Fn(&phaseportrait_core::PhasePoint) -> (f64, f64)) -> Series {
    Series::new(
        "trajectory",
        "phase-geometry::build_trajectory",
        SeriesStyle::Timeline,
        traj.points().iter().map(pick).collect(),
    )
    .with_labels(year_labels(traj.points().iter().map(|p| p.year)))
}

fn summarize_crossings(art: &mut Artifacts, what: &str, cr: &CrossingReport, lr: &LoopReport, traj: &PhaseTrajectory) {
    art.line(format!(
        "{what}: {} self-crossings, {} loops, {} degenerate overlaps",
        cr.crossings.len(),
        lr.loops.len(),
        cr.degenerate.len()
    ));
    let mut loops: Vec<_> = lr.loops.iter().collect();
    loops.sort_by(|a, b| b.signed_area.abs().total_cmp(&a.signed_area.abs()));
    for l in loops.iter().take(2) {
        let (a, b) = geometry::loop_years(traj, l);
        art.line(format!(
            "  loop {a}-{b}: signed area {} (normalized units), orientation {:+}",
            sig4(l.signed_area),
            l.orientation
        ));
    }
}

fn phase2d(cfg: &RunConfig, inp: &Inputs, art: &mut Artifacts) -> Result<(), CliError> {
    let ds = &inp.dataset;
    let (x, x_label) = x_axis(cfg);
    let normalize = cfg.phase.normalize_year;
    let axes = AxisSpec { x, z: ZAxis::None };
    let traj = geometry::build_trajectory(ds, &axes, normalize).in_module(GEOMETRY)?;
    let cr = geometry::find_crossings(&traj);
    let lr = geometry::extract_loops(&traj, &cr.crossings);

    let rows: Vec<Vec<String>> = traj
        .points()
        .iter()
        .map(|p| vec![p.year.to_string(), cell(p.x), cell(p.y)])
        .collect();
    art.csv("trajectory_2d.csv", &["year", "x", "y"], &rows)?;
    let x_name = if cfg.phase.per_capita { "production_per_capita" } else { "production" };
    art.json(
        "crossings.json",
        "crossings",
        &crossings_report(&traj, &cr, &lr, ds.source_label(), (x_name, "price"), normalize),
    )?;

    let price_scale = match normalize {
        None => 1.0,
        Some(y) => ds.get(y).map(|r| r.price).unwrap_or(1.0),
    };
    let es = eroei_series(inp)?;
    let mut series = vec![timeline(&traj, |p| (p.x, p.y))];
    for &k in &cfg.phase.k_curves {
        series.push(Series::new(
            format!("k = {k}"),
            "envelope-fit::background_price",
            SeriesStyle::Line,
            traj.points().iter().zip(&es).map(|(p, e)| (p.x, k / e / price_scale)).collect(),
        ));
    }
    if !cr.crossings.is_empty() {
        series.push(Series::new(
            "self-crossings",
            "phase-geometry::find_crossings",
            SeriesStyle::Markers,
            cr.crossings.iter().map(|c| (c.location[0], c.location[1])).collect(),
        ));
    }
    let panel = Panel {
        title: "Price vs production".into(),
        x_label: with_norm(x_label, normalize),
        y_label: with_norm(PRICE_LABEL, normalize),
        series,
        guides: vec![],
    };
    let spec = PlotSpec {
        kind: PlotKind::Phase2d,
        title: format!("Oil phase portrait {}-{}", ds.first_year(), ds.last_year()),
        label_every: cfg.phase.label_every,
    };
    svg(art, "phase2d.svg", spec, &[panel])?;
    summarize_crossings(art, "2D trajectory", &cr, &lr, &traj);
    Ok(())
}

fn phase3d(cfg: &RunConfig, inp: &Inputs, art: &mut Artifacts) -> Result<(), CliError> {
    let ds = &inp.dataset;
    let (x, x_label) = x_axis(cfg);
    let normalize = cfg.phase.normalize_year;
    let z = match inp.source {
        EroeiSource::Model(m) => ZAxis::EroeiModel(m),
        EroeiSource::PerYear => ZAxis::EroeiPerYear,
    };
    let traj = geometry::build_trajectory(ds, &AxisSpec { x, z }, normalize).in_module(GEOMETRY)?;
    let zs: Vec<f64> = traj.points().iter().map(|p| p.z.expect("3D trajectory")).collect();
    let rows: Vec<Vec<String>> = traj
        .points()
        .iter()
        .zip(&zs)
        .map(|(p, z)| vec![p.year.to_string(), cell(p.x), cell(p.y), cell(*z)])
        .collect();
    art.csv("trajectory_3d.csv", &["year", "x", "y", "z"], &rows)?;

    // the view along the production axis: EROEI horizontal, price vertical
    let side = PhaseTrajectory::from_xy(traj.points().iter().zip(&zs).map(|(p, z)| (p.year, *z, p.y)))
        .in_module(GEOMETRY)?;
    let cr = geometry::find_crossings(&side);
    let lr = geometry::extract_loops(&side, &cr.crossings);
    art.json(
        "phase3d_crossings.json",
        "crossings",
        &crossings_report(&side, &cr, &lr, ds.source_label(), ("eroei", "price"), normalize),
    )?;

    let panels = [
        Panel {
            title: "Viewed along the production axis".into(),
            x_label: with_norm(EROEI_LABEL, normalize),
            y_label: with_norm(PRICE_LABEL, normalize),
            series: vec![timeline(&traj, |p| (p.z.unwrap_or(0.0), p.y))],
            guides: vec![],
        },
        Panel {
            title: "Viewed along the price axis".into(),
            x_label: with_norm(x_label, normalize),
            y_label: with_norm(EROEI_LABEL, normalize),
            series: vec![timeline(&traj, |p| (p.x, p.z.unwrap_or(0.0)))],
            guides: vec![],
        },
    ];
    let spec = PlotSpec {
        kind: PlotKind::Phase3dProjection,
        title: "Production, price and EROEI".into(),
        label_every: cfg.phase.label_every,
    };
    svg(art, "phase3d.svg", spec, &panels)?;
    summarize_crossings(art, "EROEI-price projection", &cr, &lr, &side);
    Ok(())
}

// ---------------------------------------------------------------- background

#[derive(Serialize)]
struct BackgroundReport {
    source: String,
    eroei: EroeiDescription,
    support_mode: &'static str,
    admissible_band: [f64; 2],
    fit: BackgroundFit,
    product_invariance: ProductInvariance,
    anomaly_threshold: f64,
    anomalies: Vec<YearInterval>,
    below_tolerance: f64,
    below_background_years: Vec<i32>,
}

fn support_mode(cfg: &RunConfig) -> SupportMode {
    match &cfg.background.support_years {
        None => SupportMode::Auto,
        Some(years) => SupportMode::Explicit(years.clone()),
    }
}

fn fit_k(cfg: &RunConfig, inp: &Inputs) -> Result<BackgroundFit, CliError> {
    let support = envelope::select_support(&inp.dataset, &support_mode(cfg)).in_module(ENVELOPE)?;
    envelope::fit_background_with(&inp.dataset, &inp.source, &support, cfg.background.bootstrap()).in_module(ENVELOPE)
}

fn fit_background(cfg: &RunConfig, inp: &Inputs, art: &mut Artifacts) -> Result<BackgroundFit, CliError> {
    let ds = &inp.dataset;
    let fit = fit_k(cfg, inp)?;
    let inv = envelope::product_invariance(ds, &inp.source, &fit.support_years).in_module(ENVELOPE)?;
    let threshold = cfg.background.anomaly_threshold;
    let anomalies = geometry::anomaly_segments(ds, &fit, &inp.source, threshold).in_module(GEOMETRY)?;
    let below =
        envelope::below_background(ds, &inp.source, &fit, cfg.background.below_tolerance).in_module(ENVELOPE)?;

    let es = eroei_series(inp)?;
    let e_min = es.iter().copied().fold(f64::INFINITY, f64::min).floor().max(1.0);
    let e_max = es.iter().copied().fold(f64::NEG_INFINITY, f64::max).ceil().max(e_min + 1.0);
    let curve = envelope::limit_price_curve(fit.k, e_min, e_max, 0.5).in_module(ENVELOPE)?;
    let rows: Vec<Vec<String>> = curve.iter().map(|&(e, p)| vec![cell(e), cell(p)]).collect();
    art.csv("background_curve.csv", &["eroei", "price"], &rows)?;

    let support = &fit.support_years;
    let mut series = vec![
        Series::new(
            "observations",
            "data-model::load_dataset",
            SeriesStyle::Markers,
            ds.records().iter().zip(&es).map(|(r, e)| (*e, r.price)).collect(),
        )
        .with_labels(year_labels(ds.years())),
        Series::new(
            "support",
            "envelope-fit::select_support",
            SeriesStyle::Markers,
            support
                .iter()
                .map(|y| {
                    let i = (y - ds.first_year()) as usize;
                    (es[i], ds.records()[i].price)
                })
                .collect(),
        )
        .with_labels(year_labels(support.iter().copied())),
        Series::new(
            format!("fit k = {}", sig4(fit.k)),
            "envelope-fit::limit_price_curve",
            SeriesStyle::Line,
            curve.clone(),
        ),
    ];
    for &k in &cfg.phase.k_curves {
        series.push(Series::new(
            format!("k = {k}"),
            "envelope-fit::limit_price_curve",
            SeriesStyle::Line,
            envelope::limit_price_curve(k, e_min, e_max, 0.5).in_module(ENVELOPE)?,
        ));
    }
    let panel = Panel {
        title: "Price against EROEI".into(),
        x_label: EROEI_LABEL.into(),
        y_label: PRICE_LABEL.into(),
        series,
        guides: vec![],
    };
    let spec = PlotSpec {
        kind: PlotKind::BackgroundOverlay,
        title: "Background price P = k / EROEI".into(),
        label_every: cfg.phase.label_every,
    };
    svg(art, "background_overlay.svg", spec, &[panel])?;

    art.line(format!(
        "background fit: k = {} US$/bbl (bootstrap SE {}), support {:?}, in [{}, {}]: {}",
        sig4(fit.k),
        fit.k_std_error.map(sig4).unwrap_or_else(|| "n/a".into()),
        fit.support_years,
        ADMISSIBLE_K.0,
        ADMISSIBLE_K.1,
        if fit.in_admissible_band { "yes" } else { "no" }
    ));
    art.line(format!(
        "  cv(price x EROEI) = {}, cv(price) = {} on the support",
        sig4(inv.cv_product),
        sig4(inv.cv_price)
    ));
    let spans: Vec<String> = anomalies.iter().map(|a| format!("{}-{}", a.start, a.end)).collect();
    art.line(format!(
        "  anomalies above {}x background: {}",
        sig4(1.0 + threshold),
        if spans.is_empty() { "none".into() } else { spans.join(", ") }
    ));
    art.json(
        "background_fit.json",
        "background-fit",
        &BackgroundReport {
            source: ds.source_label().to_owned(),
            eroei: describe_eroei(inp),
            support_mode: if cfg.background.support_years.is_some() { "explicit" } else { "auto" },
            admissible_band: [ADMISSIBLE_K.0, ADMISSIBLE_K.1],
            fit: fit.clone(),
            product_invariance: inv,
            anomaly_threshold: threshold,
            anomalies,
            below_tolerance: cfg.background.below_tolerance,
            below_background_years: below,
        },
    )?;
    Ok(fit)
}

// ---------------------------------------------------------------- Lorenz

#[derive(Serialize)]
struct FitProtocol {
    dt: f64,
    reference_year: Option<i32>,
    normalized: bool,
    derivatives: &'static str,
    x: &'static str,
    y: &'static str,
    z: &'static str,
}

#[derive(Serialize)]
struct LorenzFitReport {
    input: String,
    protocol: FitProtocol,
    fit: LorenzFit,
}

/// `(dt, xs, ys, zs)` of a uniformly sampled trajectory.
type Sampled = (f64, Vec<f64>, Vec<f64>, Vec<f64>);

/// Reads a `t,x,y,z` CSV with uniform spacing.
fn read_trajectory(path: &Path) -> Result<Sampled, CliError> {
    let module = |source| CliError::Module {
        module: LORENZ,
        input: Some(path.to_owned()),
        source,
    };
    let cols: Vec<Vec<(i32, f64)>> = ["x", "y", "z"]
        .iter()
        .map(|c| read_column(path, c))
        .collect::<Result<_, _>>()?;
    let ts = read_column(path, "t")?;
    let n = ts.len();
    if n < 4 {
        return Err(module(phaseportrait_core::Error::TooFewPoints { found: n, required: 4 }));
    }
    let dt = (ts[n - 1].1 - ts[0].1) / (n - 1) as f64;
    if let Some(i) = (1..n).find(|&i| ((ts[i].1 - ts[i - 1].1) - dt).abs() > 1e-6 * dt.abs().max(1e-12)) {
        return Err(module(phaseportrait_core::Error::InvalidArgument(format!(
            "time column is not uniformly spaced at row {}",
            i + 1
        ))));
    }
    let values = |c: &Vec<(i32, f64)>| c.iter().map(|p| p.1).collect::<Vec<_>>();
    Ok((dt, values(&cols[0]), values(&cols[1]), values(&cols[2])))
}

// `(row, value)` pairs of one numeric column
fn read_column(path: &Path, name: &str) -> Result<Vec<(i32, f64)>, CliError> {
    let err = |source| CliError::Module {
        module: LORENZ,
        input: Some(path.to_owned()),
        source,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| err(e.into()))?;
    let col = rdr
        .headers()
        .map_err(|e| err(e.into()))?
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| err(phaseportrait_core::Error::MissingColumn(name.into())))?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| err(e.into()))?;
        let cell = rec.get(col).unwrap_or("");
        let v = cell.parse::<f64>().map_err(|_| {
            err(phaseportrait_core::Error::Parse {
                row: i + 1,
                column: name.into(),
                value: cell.into(),
            })
        })?;
        out.push((i as i32 + 1, v));
    }
    Ok(out)
}

fn fit_lorenz(cfg: &RunConfig, inputs: Option<&Inputs>, art: &mut Artifacts) -> Result<(), CliError> {
    let report = match (&cfg.lorenz.trajectory, inputs) {
        (Some(path), _) => {
            let (dt, xs, ys, zs) = read_trajectory(path)?;
            let fit = lorenz::fit_lorenz(&xs, &ys, &zs, dt, None).in_module_at(LORENZ, Some(path.clone()))?;
            LorenzFitReport {
                input: path.display().to_string(),
                protocol: FitProtocol {
                    dt,
                    reference_year: None,
                    normalized: false,
                    derivatives: "second-order central differences, one-sided at the ends",
                    x: "x",
                    y: "y",
                    z: "z",
                },
                fit,
            }
        }
        (None, Some(inp)) => {
            let year = cfg
                .lorenz
                .reference_year
                .unwrap_or_else(|| lorenz::default_reference_year(&inp.dataset));
            let fit = lorenz::fit_dataset(&inp.dataset, &inp.source, Some(year)).in_module(LORENZ)?;
            LorenzFitReport {
                input: inp.dataset.source_label().to_owned(),
                protocol: FitProtocol {
                    dt: 1.0,
                    reference_year: Some(year),
                    normalized: true,
                    derivatives: "second-order central differences, one-sided at the ends",
                    x: "production",
                    y: "eroei",
                    z: "price",
                },
                fit,
            }
        }
        (None, None) => unreachable!("dataset is loaded when no trajectory file is given"),
    };
    let f = &report.fit;
    art.line(format!(
        "Lorenz fit ({} points): K1 = {} +/- {}, K2 = {} +/- {}, K3 = {} +/- {}",
        f.n_points,
        sig4(f.k1),
        sig4(f.se1),
        sig4(f.k2),
        sig4(f.se2),
        sig4(f.k3),
        sig4(f.se3)
    ));
    art.json("lorenz_fit.json", "lorenz-fit", &report)?;
    Ok(())
}

#[derive(Serialize)]
struct SeriesStats {
    mean: f64,
    cv: Option<f64>,
}

#[derive(Serialize)]
struct SimulationReport {
    params: phaseportrait_core::LorenzParams,
    initial: LorenzState,
    dt: f64,
    t_end: f64,
    n_samples: usize,
    transient: f64,
    final_state: LorenzState,
    divergence: f64,
    fixed_points: Vec<LorenzState>,
    /// Statistics of `y * z` after the transient.
    product_yz: SeriesStats,
    z: SeriesStats,
}

fn simulate_lorenz(cfg: &RunConfig, art: &mut Artifacts) -> Result<(), CliError> {
    let l = &cfg.lorenz;
    let params = phaseportrait_core::LorenzParams::new(l.sigma, l.r, l.b).in_module(LORENZ)?;
    let initial = LorenzState::new(l.x0, l.y0, l.z0);
    if l.t_end.is_nan() || l.t_end <= 0.0 {
        return Err(CliError::Module {
            module: LORENZ,
            input: None,
            source: phaseportrait_core::Error::InvalidArgument(format!("t_end must be positive, got {}", l.t_end)),
        });
    }
    let traj = lorenz::integrate(&params, initial, l.dt, lorenz::steps_for(l.t_end, l.dt)).in_module(LORENZ)?;
    let rows: Vec<Vec<String>> = traj
        .states
        .iter()
        .enumerate()
        .map(|(i, s)| vec![cell(traj.time(i)), cell(s.x), cell(s.y), cell(s.z)])
        .collect();
    art.csv("lorenz_trajectory.csv", &["t", "x", "y", "z"], &rows)?;

    let settled = traj.after(l.transient.min(l.t_end));
    let prod = lorenz::product_statistics(&settled.states).in_module(LORENZ)?;
    let zs = settled.zs();
    let report = SimulationReport {
        params,
        initial,
        dt: l.dt,
        t_end: l.t_end,
        n_samples: traj.states.len(),
        transient: l.transient,
        final_state: *traj.states.last().expect("at least one step"),
        divergence: lorenz::divergence(&params),
        fixed_points: lorenz::fixed_points(&params),
        product_yz: SeriesStats {
            mean: prod.mean,
            cv: prod.cv,
        },
        z: SeriesStats {
            mean: stats::mean(&zs),
            cv: stats::coefficient_of_variation(&zs),
        },
    };
    art.json("lorenz_simulation.json", "lorenz-simulation", &report)?;

    let panel = Panel {
        title: "x-z projection".into(),
        x_label: "x".into(),
        y_label: "z".into(),
        series: vec![Series::new(
            "trajectory",
            "lorenz-lab::integrate",
            SeriesStyle::Line,
            traj.states.iter().map(|s| (s.x, s.z)).collect(),
        )],
        guides: vec![],
    };
    let spec = PlotSpec {
        kind: PlotKind::Lorenz,
        title: format!("Lorenz system (sigma={}, r={}, b={})", sig4(l.sigma), sig4(l.r), sig4(l.b)),
        label_every: 0,
    };
    svg(art, "lorenz_xz.svg", spec, &[panel])?;
    let fmt_cv = |c: Option<f64>| c.map(sig4).unwrap_or_else(|| "n/a".into());
    art.line(format!(
        "Lorenz simulation: {} samples to t = {}, final state ({}, {}, {})",
        traj.states.len(),
        sig4(l.t_end),
        sig4(report.final_state.x),
        sig4(report.final_state.y),
        sig4(report.final_state.z)
    ));
    art.line(format!(
        "  after t = {}: cv(y*z) = {}, cv(z) = {}",
        sig4(l.transient),
        fmt_cv(report.product_yz.cv),
        fmt_cv(report.z.cv)
    ));
    Ok(())
}

// ---------------------------------------------------------------- attractor

#[derive(Serialize)]
struct AttractorJson {
    source: String,
    window: usize,
    trailing: AttractorReport,
    full_record: AttractorReport,
    guide: f64,
}

fn attractor(cfg: &RunConfig, inp: &Inputs, art: &mut Artifacts) -> Result<(), CliError> {
    let pc = data::per_capita(&inp.dataset).in_module(DATA)?;
    let trailing = scenario::attractor_statistics(&pc, cfg.attractor.window).in_module(SCENARIO)?;
    let full = scenario::attractor_statistics(&pc, pc.len()).in_module(SCENARIO)?;
    let rows: Vec<Vec<String>> = pc.iter().map(|&(y, v)| vec![y.to_string(), cell(v)]).collect();
    art.csv("per_capita.csv", &["year", "per_capita_t"], &rows)?;

    let panel = Panel {
        title: "Production per person".into(),
        x_label: "Year".into(),
        y_label: "Oil production per capita (t/person)".into(),
        series: vec![Series::new(
            "per capita",
            "data-model::per_capita",
            SeriesStyle::Timeline,
            pc.iter().map(|&(y, v)| (f64::from(y), v)).collect(),
        )
        .with_labels(year_labels(pc.iter().map(|p| p.0)))],
        guides: vec![Guide {
            label: format!("{} t/person", cfg.attractor.guide),
            source: "attractor.guide".into(),
            y: cfg.attractor.guide,
        }],
    };
    let spec = PlotSpec {
        kind: PlotKind::PerCapita,
        title: "World oil production per capita".into(),
        label_every: cfg.phase.label_every,
    };
    svg(art, "per_capita.svg", spec, &[panel])?;
    art.line(format!(
        "per-capita attractor {}-{}: mean {} t/person (min {}, max {}); full record mean {}",
        trailing.window_years.start,
        trailing.window_years.end,
        sig4(trailing.mean),
        sig4(trailing.min),
        sig4(trailing.max),
        sig4(full.mean)
    ));
    art.json(
        "attractor.json",
        "attractor",
        &AttractorJson {
            source: inp.dataset.source_label().to_owned(),
            window: cfg.attractor.window,
            trailing,
            full_record: full,
            guide: cfg.attractor.guide,
        },
    )?;
    Ok(())
}

// ---------------------------------------------------------------- scenario

#[derive(Serialize)]
struct ScenarioReport {
    k_source: &'static str,
    eroei_model: EroeiModel,
    production_unit: &'static str,
    result: ScenarioResult,
    note: &'static str,
}

fn scenario(cfg: &RunConfig, inp: &Inputs, art: &mut Artifacts) -> Result<(), CliError> {
    let (k, k_source) = match cfg.scenario.k {
        KChoice::Value(v) => (v, "value"),
        KChoice::Fit => (fit_k(cfg, inp)?.k, "fit"),
    };
    run_scenario(cfg, inp, art, k, k_source)
}

fn run_scenario(cfg: &RunConfig, inp: &Inputs, art: &mut Artifacts, k: f64, k_source: &'static str) -> Result<(), CliError> {
    let model = inp.model;
    let res = scenario::crossing_year(k, &model, cfg.scenario.threshold, &inp.dataset).in_module(SCENARIO)?;
    let start = res.reference_year;
    let mut end = if res.already_crossed {
        start + cfg.scenario.horizon_after
    } else {
        res.crossing_year.ceil() as i32 + cfg.scenario.horizon_after
    };
    // stop before the linear EROEI reaches zero
    if let Some(zero) = model.year_for(0.0) {
        end = end.min(zero.ceil() as i32 - 1);
    }
    let path = if end >= start {
        scenario::background_price_path(k, &model, YearInterval { start, end }).in_module(SCENARIO)?
    } else {
        Vec::new()
    };
    let rows: Vec<Vec<String>> = path
        .iter()
        .map(|&(y, p)| vec![y.to_string(), cell(model.at(f64::from(y)).value), cell(p)])
        .collect();
    art.csv("price_path.csv", &["year", "eroei", "background_price"], &rows)?;
    art.line(format!(
        "scenario: k = {} ({k_source}), threshold {} US$/bbl reached at EROEI {} in {} ({} years after {}){}",
        sig4(k),
        sig4(res.threshold_price),
        sig4(res.eroei_at_crossing),
        sig4(res.crossing_year),
        sig4(res.years_from_reference),
        res.reference_year,
        if res.already_crossed { ", already crossed" } else { "" }
    ));
    art.line(format!(
        "  production on the trailing trend at the crossing: {} Mt/yr",
        sig4(res.production_at_crossing)
    ));
    art.json(
        "scenario.json",
        "scenario",
        &ScenarioReport {
            k_source,
            eroei_model: model,
            production_unit: "Mt/yr",
            result: res,
            note: "the crossing year depends on the assumed EROEI anchors",
        },
    )?;
    Ok(())
}

// ---------------------------------------------------------------- everything

#[derive(Serialize)]
struct Manifest {
    command: &'static str,
    source: String,
    artifacts: Vec<String>,
}

fn report_all(cfg: &RunConfig, inp: &Inputs, art: &mut Artifacts) -> Result<(), CliError> {
    ingest(cfg, inp, art)?;
    phase2d(cfg, inp, art)?;
    phase3d(cfg, inp, art)?;
    let fit = fit_background(cfg, inp, art)?;
    fit_lorenz(cfg, Some(inp), art)?;
    simulate_lorenz(cfg, art)?;
    attractor(cfg, inp, art)?;
    match cfg.scenario.k {
        KChoice::Value(v) => run_scenario(cfg, inp, art, v, "value")?,
        KChoice::Fit => run_scenario(cfg, inp, art, fit.k, "fit")?,
    }
    let mut artifacts = art.written().to_vec();
    artifacts.push("summary.txt".into());
    art.json(
        "report.json",
        "report",
        &Manifest {
            command: cfg.command.name(),
            source: inp.dataset.source_label().to_owned(),
            artifacts,
        },
    )
}
