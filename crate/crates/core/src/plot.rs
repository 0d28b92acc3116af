//! Deterministic SVG rendering of phase plots.
//!
//! Output depends only on the inputs: fixed element order, fixed number
//! formatting, no timestamps.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PANEL_W: f64 = 720.0;
const PANEL_H: f64 = 520.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 30.0;
const MARGIN_T: f64 = 50.0;
const MARGIN_B: f64 = 60.0;

const PALETTE: [&str; 6] = ["#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlotKind {
    Phase2d,
    Phase3dProjection,
    PerCapita,
    Lorenz,
    BackgroundOverlay,
}

impl PlotKind {
    pub fn name(&self) -> &'static str {
        match self {
            PlotKind::Phase2d => "phase2d",
            PlotKind::Phase3dProjection => "phase3d-projection",
            PlotKind::PerCapita => "per-capita",
            PlotKind::Lorenz => "lorenz",
            PlotKind::BackgroundOverlay => "background-overlay",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesStyle {
    /// Red polyline with a marker per sample.
    Timeline,
    Line,
    Markers,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub name: String,
    /// Operation that produced the data, recorded in the SVG metadata.
    pub source: String,
    pub style: SeriesStyle,
    pub points: Vec<(f64, f64)>,
    /// Optional per-point labels (e.g. years).
    pub labels: Vec<String>,
}

impl Series {
    pub fn new(name: impl Into<String>, source: impl Into<String>, style: SeriesStyle, points: Vec<(f64, f64)>) -> Self {
        Series {
            name: name.into(),
            source: source.into(),
            style,
            points,
            labels: Vec::new(),
        }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        self.labels = labels;
        self
    }
}

/// Horizontal reference line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Guide {
    pub label: String,
    pub source: String,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub guides: Vec<Guide>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotSpec {
    pub kind: PlotKind,
    pub title: String,
    /// Label every `label_every`-th point of timeline series (0 = none).
    pub label_every: usize,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

/// Round tick step (1, 2 or 5 times a power of ten) giving about `target` ticks.
fn tick_step(span: f64, target: usize) -> f64 {
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn tick_label(v: f64, step: f64) -> String {
    let decimals = if step >= 1.0 { 0 } else { (-step.log10().floor()) as usize };
    let s = format!("{v:.decimals$}");
    if s.starts_with('-') && s.trim_start_matches(['-', '0', '.']).is_empty() {
        s[1..].to_owned()
    } else {
        s
    }
}

struct Frame {
    x0: f64,
    y0: f64,
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
}

impl Frame {
    fn inner_w() -> f64 {
        PANEL_W - MARGIN_L - MARGIN_R
    }
    fn inner_h() -> f64 {
        PANEL_H - MARGIN_T - MARGIN_B
    }
    fn px(&self, x: f64) -> f64 {
        self.x0 + MARGIN_L + (x - self.xmin) / (self.xmax - self.xmin) * Self::inner_w()
    }
    fn py(&self, y: f64) -> f64 {
        self.y0 + MARGIN_T + (1.0 - (y - self.ymin) / (self.ymax - self.ymin)) * Self::inner_h()
    }
}

fn padded(min: f64, max: f64) -> (f64, f64) {
    if max > min {
        let pad = 0.04 * (max - min);
        (min - pad, max + pad)
    } else {
        (min - 0.5 * min.abs().max(1.0), max + 0.5 * max.abs().max(1.0))
    }
}

fn render_panel(out: &mut String, panel: &Panel, spec: &PlotSpec, x0: f64, y0: f64) {
    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for s in &panel.series {
        for &(x, y) in s.points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
    }
    for g in &panel.guides {
        ymin = ymin.min(g.y);
        ymax = ymax.max(g.y);
    }
    let (xmin, xmax) = padded(xmin, xmax);
    let (ymin, ymax) = padded(ymin, ymax);
    let f = Frame { x0, y0, xmin, xmax, ymin, ymax };

    let _ = writeln!(out, r#"<g class="panel">"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="15">{}</text>"#,
        num(x0 + PANEL_W / 2.0),
        num(y0 + 28.0),
        esc(&panel.title)
    );
    let _ = writeln!(
        out,
        r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#333"/>"##,
        num(x0 + MARGIN_L),
        num(y0 + MARGIN_T),
        num(Frame::inner_w()),
        num(Frame::inner_h())
    );

    // ticks
    let xs = tick_step(xmax - xmin, 6);
    let mut t = (xmin / xs).ceil() * xs;
    while t <= xmax {
        let px = f.px(t);
        let base = y0 + MARGIN_T + Frame::inner_h();
        let _ = writeln!(
            out,
            r##"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="#333"/><text x="{0}" y="{3}" text-anchor="middle" font-size="11">{4}</text>"##,
            num(px),
            num(base),
            num(base + 5.0),
            num(base + 18.0),
            tick_label(t, xs)
        );
        t += xs;
    }
    let ys = tick_step(ymax - ymin, 6);
    let mut t = (ymin / ys).ceil() * ys;
    while t <= ymax {
        let py = f.py(t);
        let left = x0 + MARGIN_L;
        let _ = writeln!(
            out,
            r##"<line x1="{0}" y1="{2}" x2="{1}" y2="{2}" stroke="#333"/><text x="{3}" y="{4}" text-anchor="end" font-size="11">{5}</text>"##,
            num(left - 5.0),
            num(left),
            num(py),
            num(left - 8.0),
            num(py + 4.0),
            tick_label(t, ys)
        );
        t += ys;
    }
    let _ = writeln!(
        out,
        r#"<text class="x-label" x="{}" y="{}" text-anchor="middle" font-size="13">{}</text>"#,
        num(x0 + MARGIN_L + Frame::inner_w() / 2.0),
        num(y0 + PANEL_H - 15.0),
        esc(&panel.x_label)
    );
    let ly = y0 + MARGIN_T + Frame::inner_h() / 2.0;
    let _ = writeln!(
        out,
        r#"<text class="y-label" x="{0}" y="{1}" text-anchor="middle" font-size="13" transform="rotate(-90 {0} {1})">{2}</text>"#,
        num(x0 + 20.0),
        num(ly),
        esc(&panel.y_label)
    );

    let mut color = 0usize;
    for s in &panel.series {
        let pts: Vec<(f64, f64)> = s.points.iter().copied().filter(|p| p.0.is_finite() && p.1.is_finite()).collect();
        let path = pts
            .iter()
            .map(|&(x, y)| format!("{},{}", num(f.px(x)), num(f.py(y))))
            .collect::<Vec<_>>()
            .join(" ");
        let stroke = match s.style {
            SeriesStyle::Timeline => "#d62728",
            _ => {
                color += 1;
                PALETTE[(color - 1) % PALETTE.len()]
            }
        };
        let _ = writeln!(out, r#"<g class="series" data-name="{}">"#, esc(&s.name));
        if matches!(s.style, SeriesStyle::Timeline | SeriesStyle::Line) {
            let _ = writeln!(
                out,
                r#"<polyline points="{path}" fill="none" stroke="{stroke}" stroke-width="1.5"/>"#
            );
        }
        if matches!(s.style, SeriesStyle::Timeline | SeriesStyle::Markers) {
            for &(x, y) in &pts {
                let _ = writeln!(
                    out,
                    r#"<circle cx="{}" cy="{}" r="3" fill="{stroke}"/>"#,
                    num(f.px(x)),
                    num(f.py(y))
                );
            }
        }
        if spec.label_every > 0 {
            for (i, (p, label)) in s.points.iter().zip(&s.labels).enumerate() {
                if i % spec.label_every == 0 && p.0.is_finite() && p.1.is_finite() {
                    let _ = writeln!(
                        out,
                        r##"<text x="{}" y="{}" font-size="9" fill="#555">{}</text>"##,
                        num(f.px(p.0) + 4.0),
                        num(f.py(p.1) - 4.0),
                        esc(label)
                    );
                }
            }
        }
        let _ = writeln!(out, "</g>");
    }
    for g in &panel.guides {
        let py = f.py(g.y);
        let _ = writeln!(
            out,
            r##"<line class="guide" x1="{0}" y1="{2}" x2="{1}" y2="{2}" stroke="#555" stroke-dasharray="6 4"/><text x="{3}" y="{4}" font-size="11" fill="#555">{5}</text>"##,
            num(x0 + MARGIN_L),
            num(x0 + MARGIN_L + Frame::inner_w()),
            num(py),
            num(x0 + MARGIN_L + 6.0),
            num(py - 5.0),
            esc(&g.label)
        );
    }
    let _ = writeln!(out, "</g>");
}

/// Renders one or more side-by-side panels as an SVG document.
pub fn render_plot(spec: &PlotSpec, panels: &[Panel]) -> Result<String> {
    let has_data = panels.iter().any(|p| p.series.iter().any(|s| !s.points.is_empty()));
    if !has_data {
        return Err(Error::EmptyPlot);
    }
    if spec.kind == PlotKind::Phase3dProjection && panels.len() != 2 {
        return Err(Error::InvalidArgument(format!(
            "a 3D projection plot needs 2 panels, got {}",
            panels.len()
        )));
    }
    let width = PANEL_W * panels.len() as f64;
    let height = PANEL_H + 30.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{0}" height="{1}" viewBox="0 0 {0} {1}" font-family="sans-serif">"#,
        width, height
    );
    let _ = writeln!(out, r#"<metadata><plot kind="{}">"#, spec.kind.name());
    for p in panels {
        for s in &p.series {
            let _ = writeln!(
                out,
                r#"<series name="{}" source="{}" points="{}"/>"#,
                esc(&s.name),
                esc(&s.source),
                s.points.len()
            );
        }
        for g in &p.guides {
            let _ = writeln!(out, r#"<guide name="{}" source="{}" y="{}"/>"#, esc(&g.label), esc(&g.source), g.y);
        }
    }
    let _ = writeln!(out, "</plot></metadata>");
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="18" text-anchor="middle" font-size="16" font-weight="bold">{}</text>"#,
        num(width / 2.0),
        esc(&spec.title)
    );
    for (i, panel) in panels.iter().enumerate() {
        render_panel(&mut out, panel, spec, i as f64 * PANEL_W, 20.0);
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: PlotKind) -> PlotSpec {
        PlotSpec {
            kind,
            title: "t".into(),
            label_every: 1,
        }
    }

    fn three_points() -> Panel {
        Panel {
            title: "phase".into(),
            x_label: "Oil production (Mt)".into(),
            y_label: "Oil price (2014 US$/bbl)".into(),
            series: vec![Series::new(
                "timeline",
                "build_trajectory",
                SeriesStyle::Timeline,
                vec![(1.0, 2.0), (2.0, 3.0), (3.0, 1.0)],
            )
            .with_labels(vec!["2000".into(), "2001".into(), "2002".into()])],
            guides: vec![],
        }
    }

    #[test]
    fn three_point_timeline() {
        let svg = render_plot(&spec(PlotKind::Phase2d), &[three_points()]).unwrap();
        assert_eq!(svg.matches("<circle").count(), 3);
        let polyline = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        let coords = polyline.split('"').nth(1).unwrap();
        assert_eq!(coords.split(' ').count(), 3);
        assert!(svg.contains("Oil production (Mt)"));
        assert!(svg.contains(r#"source="build_trajectory""#));
    }

    #[test]
    fn rendering_is_deterministic() {
        let a = render_plot(&spec(PlotKind::Phase2d), &[three_points()]).unwrap();
        let b = render_plot(&spec(PlotKind::Phase2d), &[three_points()]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_plot_rejected() {
        let mut p = three_points();
        p.series[0].points.clear();
        assert!(matches!(render_plot(&spec(PlotKind::Phase2d), &[p]), Err(Error::EmptyPlot)));
        assert!(render_plot(&spec(PlotKind::Lorenz), &[]).is_err());
    }

    #[test]
    fn projection_needs_two_panels() {
        assert!(render_plot(&spec(PlotKind::Phase3dProjection), &[three_points()]).is_err());
        let svg = render_plot(&spec(PlotKind::Phase3dProjection), &[three_points(), three_points()]).unwrap();
        assert_eq!(svg.matches(r#"<g class="panel">"#).count(), 2);
    }

    #[test]
    fn guide_line_drawn() {
        let mut p = three_points();
        p.guides.push(Guide {
            label: "0.59 t/person".into(),
            source: "attractor_statistics".into(),
            y: 0.59,
        });
        let svg = render_plot(&spec(PlotKind::PerCapita), &[p]).unwrap();
        assert!(svg.contains(r#"<line class="guide""#));
        assert!(svg.contains(r#"<guide name="0.59 t/person" source="attractor_statistics" y="0.59"/>"#));
    }

    #[test]
    fn tick_steps_are_round() {
        assert_eq!(tick_step(100.0, 5), 20.0);
        assert_eq!(tick_step(2650.0, 6), 500.0);
        assert_eq!(tick_label(0.6000000001, 0.1), "0.6");
    }
}
