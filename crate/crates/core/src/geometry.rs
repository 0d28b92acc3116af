//! Phase trajectories and their geometric diagnostics.
//!
//! All geometric tests run on axis-normalized coordinates: each axis is
//! mapped onto `[0, 1]` over the trajectory's data range, so that
//! tolerances mean the same thing on a Mt axis and on a US$ axis.
//! Reported locations are mapped back to data coordinates.

use serde::{Deserialize, Serialize};

use crate::data::{per_capita, Dataset, EroeiModel, EroeiSource, YearSeries};
use crate::envelope::BackgroundFit;
use crate::error::{Error, Result};

/// Tolerance on segment parameters and distances, in normalized units.
pub const INTERSECTION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub year: i32,
    /// Production coordinate.
    pub x: f64,
    /// Price coordinate.
    pub y: f64,
    /// EROEI coordinate (3D trajectories only).
    pub z: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseTrajectory {
    points: Vec<PhasePoint>,
    dimensionality: u8,
}

impl PhaseTrajectory {
    pub fn new(points: Vec<PhasePoint>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::InvalidTrajectory(format!(
                "need at least 3 points, got {}",
                points.len()
            )));
        }
        let three_d = points[0].z.is_some();
        for p in &points {
            if p.z.is_some() != three_d {
                return Err(Error::InvalidTrajectory("mixed 2D and 3D points".into()));
            }
            if !(p.x.is_finite() && p.y.is_finite() && p.z.is_none_or(f64::is_finite)) {
                return Err(Error::InvalidTrajectory(format!("non-finite coordinate in year {}", p.year)));
            }
        }
        if let Some(w) = points.windows(2).find(|w| w[1].year <= w[0].year) {
            return Err(Error::InvalidTrajectory(format!(
                "years must increase strictly ({} then {})",
                w[0].year, w[1].year
            )));
        }
        Ok(PhaseTrajectory {
            points,
            dimensionality: if three_d { 3 } else { 2 },
        })
    }

    /// 2D trajectory from `(year, x, y)` triples.
    pub fn from_xy(points: impl IntoIterator<Item = (i32, f64, f64)>) -> Result<Self> {
        Self::new(
            points
                .into_iter()
                .map(|(year, x, y)| PhasePoint { year, x, y, z: None })
                .collect(),
        )
    }

    pub fn points(&self) -> &[PhasePoint] {
        &self.points
    }

    pub fn dimensionality(&self) -> u8 {
        self.dimensionality
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of polyline segments.
    pub fn segments(&self) -> usize {
        self.points.len() - 1
    }

    /// Projection onto the (x, y) plane.
    pub fn projection_xy(&self) -> PhaseTrajectory {
        PhaseTrajectory {
            points: self.points.iter().map(|p| PhasePoint { z: None, ..*p }).collect(),
            dimensionality: 2,
        }
    }

    /// Same points in reverse order, with years mirrored so they still increase.
    pub fn reversed(&self) -> PhaseTrajectory {
        let first = self.points[0].year;
        let last = self.points[self.points.len() - 1].year;
        PhaseTrajectory {
            points: self
                .points
                .iter()
                .rev()
                .map(|p| PhasePoint {
                    year: first + last - p.year,
                    ..*p
                })
                .collect(),
            dimensionality: self.dimensionality,
        }
    }

    fn year_of_segment(&self, seg: usize) -> (i32, i32) {
        (self.points[seg].year, self.points[seg + 1].year)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum XAxis {
    Production,
    PerCapitaProduction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZAxis {
    None,
    EroeiModel(EroeiModel),
    EroeiPerYear,
}

/// Axis selection; the y axis is always price.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub x: XAxis,
    pub z: ZAxis,
}

impl Default for AxisSpec {
    fn default() -> Self {
        AxisSpec {
            x: XAxis::Production,
            z: ZAxis::None,
        }
    }
}

/// One phase point per record. With `normalize = Some(year)` every axis is
/// divided by its value in that year.
pub fn build_trajectory(dataset: &Dataset, axes: &AxisSpec, normalize: Option<i32>) -> Result<PhaseTrajectory> {
    let xs: YearSeries = match axes.x {
        XAxis::Production => dataset.production_series(),
        XAxis::PerCapitaProduction => per_capita(dataset).map_err(|e| match e {
            Error::MissingYear { year, .. } => Error::MissingField { field: "population", year },
            other => other,
        })?,
    };
    let ys = dataset.price_series();
    let zs: Option<YearSeries> = match axes.z {
        ZAxis::None => None,
        ZAxis::EroeiModel(m) => Some(dataset.years().into_iter().map(|y| (y, m.at(f64::from(y)).value)).collect()),
        ZAxis::EroeiPerYear => Some(
            dataset
                .years()
                .into_iter()
                .map(|y| EroeiSource::PerYear.eroei(dataset, y).map(|e| (y, e)))
                .collect::<Result<_>>()?,
        ),
    };
    let (xs, ys, zs) = match normalize {
        None => (xs, ys, zs),
        Some(year) => (
            crate::data::nondimensionalize(&xs, year)?,
            crate::data::nondimensionalize(&ys, year)?,
            zs.map(|z| crate::data::nondimensionalize(&z, year)).transpose()?,
        ),
    };
    let points = xs
        .iter()
        .zip(&ys)
        .enumerate()
        .map(|(i, (&(year, x), &(_, y)))| PhasePoint {
            year,
            x,
            y,
            z: zs.as_ref().map(|z| z[i].1),
        })
        .collect();
    PhaseTrajectory::new(points)
}

/// Affine map of each axis onto `[0, 1]` over the data range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisNormalizer {
    min: [f64; 2],
    range: [f64; 2],
}

impl AxisNormalizer {
    pub fn fit(traj: &PhaseTrajectory) -> Self {
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        for p in traj.points() {
            for (k, v) in [p.x, p.y].into_iter().enumerate() {
                min[k] = min[k].min(v);
                max[k] = max[k].max(v);
            }
        }
        let range = [0, 1].map(|k| {
            let r = max[k] - min[k];
            if r > 0.0 {
                r
            } else {
                1.0
            }
        });
        AxisNormalizer { min, range }
    }

    pub fn forward(&self, p: [f64; 2]) -> [f64; 2] {
        [
            (p[0] - self.min[0]) / self.range[0],
            (p[1] - self.min[1]) / self.range[1],
        ]
    }

    pub fn inverse(&self, q: [f64; 2]) -> [f64; 2] {
        [
            self.min[0] + q[0] * self.range[0],
            self.min[1] + q[1] * self.range[1],
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub seg_a: usize,
    pub seg_b: usize,
    /// Intersection point in data coordinates.
    pub location: [f64; 2],
    pub param_a: f64,
    pub param_b: f64,
}

/// Collinear overlapping segments; reported separately from crossings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegenerateOverlap {
    pub seg_a: usize,
    pub seg_b: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct CrossingReport {
    pub crossings: Vec<Crossing>,
    pub degenerate: Vec<DegenerateOverlap>,
}

enum SegmentHit {
    Point { t: f64, u: f64 },
    Overlap,
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn segment_hit(p0: [f64; 2], p1: [f64; 2], q0: [f64; 2], q1: [f64; 2]) -> Option<SegmentHit> {
    let tol = INTERSECTION_TOLERANCE;
    let r = sub(p1, p0);
    let s = sub(q1, q0);
    let qp = sub(q0, p0);
    let denom = cross(r, s);
    let rr = r[0] * r[0] + r[1] * r[1];
    let ss = s[0] * s[0] + s[1] * s[1];

    if denom.abs() <= tol * tol * (rr * ss).sqrt().max(tol) {
        // Parallel: only collinear overlaps matter.
        if rr == 0.0 || cross(qp, r).abs() > tol * rr.sqrt() {
            return None;
        }
        let t0 = (qp[0] * r[0] + qp[1] * r[1]) / rr;
        let t1 = t0 + (s[0] * r[0] + s[1] * r[1]) / rr;
        let lo = t0.min(t1).max(0.0);
        let hi = t0.max(t1).min(1.0);
        let tol_t = tol / rr.sqrt();
        if hi < lo - tol_t {
            return None;
        }
        if hi - lo > tol_t {
            return Some(SegmentHit::Overlap);
        }
        // Collinear segments touching end to end.
        let t = snap((lo + hi) / 2.0, tol_t);
        let pt = [p0[0] + t * r[0], p0[1] + t * r[1]];
        let u = if ss == 0.0 {
            0.0
        } else {
            let d = sub(pt, q0);
            snap(((d[0] * s[0] + d[1] * s[1]) / ss).clamp(0.0, 1.0), tol / ss.sqrt())
        };
        return Some(SegmentHit::Point { t, u });
    }

    let t = cross(qp, s) / denom;
    let u = cross(qp, r) / denom;
    let tol_t = tol / rr.sqrt().max(tol);
    let tol_u = tol / ss.sqrt().max(tol);
    if t < -tol_t || t > 1.0 + tol_t || u < -tol_u || u > 1.0 + tol_u {
        return None;
    }
    Some(SegmentHit::Point {
        t: snap(t.clamp(0.0, 1.0), tol_t),
        u: snap(u.clamp(0.0, 1.0), tol_u),
    })
}

fn snap(v: f64, tol: f64) -> f64 {
    if v <= tol {
        0.0
    } else if v >= 1.0 - tol {
        1.0
    } else {
        v
    }
}

/// All intersections between non-adjacent segments of the (x, y) polyline,
/// sorted by `(seg_a, seg_b)`.
///
/// A touch at an interior vertex is reported once, on the segment that starts
/// at that vertex. Contacts at the trajectory's first or last vertex are not
/// crossings: the path does not pass through them.
pub fn find_crossings(traj: &PhaseTrajectory) -> CrossingReport {
    let norm = AxisNormalizer::fit(traj);
    let pts: Vec<[f64; 2]> = traj.points().iter().map(|p| norm.forward([p.x, p.y])).collect();
    let nseg = pts.len() - 1;
    let mut report = CrossingReport::default();

    for a in 0..nseg {
        for b in (a + 2)..nseg {
            match segment_hit(pts[a], pts[a + 1], pts[b], pts[b + 1]) {
                None => {}
                Some(SegmentHit::Overlap) => report.degenerate.push(DegenerateOverlap { seg_a: a, seg_b: b }),
                Some(SegmentHit::Point { t, u }) => {
                    let at_path_end = (a == 0 && t == 0.0) || (b == nseg - 1 && u == 1.0);
                    // Shared vertex duplicates: keep the copy with param 0 on the later segment.
                    let duplicate = (u == 1.0 && b + 1 < nseg) || (t == 1.0 && a + 1 + 2 <= b);
                    if at_path_end || duplicate {
                        continue;
                    }
                    let r = sub(pts[a + 1], pts[a]);
                    let loc = [pts[a][0] + t * r[0], pts[a][1] + t * r[1]];
                    report.crossings.push(Crossing {
                        seg_a: a,
                        seg_b: b,
                        location: norm.inverse(loc),
                        param_a: t,
                        param_b: u,
                    });
                }
            }
        }
    }
    report
}

/// Closed sub-trajectory between the two visits of a crossing point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Loop {
    pub start_crossing: Crossing,
    /// Polygon vertices in data coordinates (closing edge implicit).
    pub vertex_chain: Vec<[f64; 2]>,
    /// Shoelace area in axis-normalized units²; positive is counterclockwise.
    pub signed_area: f64,
    pub orientation: i8,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct LoopReport {
    pub loops: Vec<Loop>,
    /// Crossings whose loop has zero area.
    pub degenerate: Vec<Crossing>,
}

/// Signed area of a polygon (implicitly closed); positive when counterclockwise.
pub fn signed_area(polygon: &[[f64; 2]]) -> f64 {
    let n = polygon.len();
    if n < 3 {
        return 0.0;
    }
    0.5 * (0..n)
        .map(|i| cross(polygon[i], polygon[(i + 1) % n]))
        .sum::<f64>()
}

pub fn extract_loops(traj: &PhaseTrajectory, crossings: &[Crossing]) -> LoopReport {
    let norm = AxisNormalizer::fit(traj);
    let mut report = LoopReport::default();
    for c in crossings {
        let mut chain = vec![c.location];
        chain.extend(
            traj.points()[c.seg_a + 1..=c.seg_b]
                .iter()
                .map(|p| [p.x, p.y]),
        );
        let normalized: Vec<[f64; 2]> = chain.iter().map(|&p| norm.forward(p)).collect();
        let area = signed_area(&normalized);
        if area.abs() <= INTERSECTION_TOLERANCE * INTERSECTION_TOLERANCE {
            report.degenerate.push(*c);
            continue;
        }
        report.loops.push(Loop {
            start_crossing: *c,
            vertex_chain: chain,
            signed_area: area,
            orientation: if area > 0.0 { 1 } else { -1 },
        });
    }
    report
}

/// Calendar years spanned by a loop (from the crossing segment start to its last vertex).
pub fn loop_years(traj: &PhaseTrajectory, l: &Loop) -> (i32, i32) {
    (
        traj.year_of_segment(l.start_crossing.seg_a).0,
        traj.year_of_segment(l.start_crossing.seg_b).1,
    )
}

/// Inclusive range of years.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearInterval {
    pub start: i32,
    pub end: i32,
}

impl YearInterval {
    pub fn contains(&self, year: i32) -> bool {
        (self.start..=self.end).contains(&year)
    }
}

/// Maximal runs of years whose price exceeds `(1 + threshold)` times the
/// background price `k / E(year)`.
pub fn anomaly_segments(
    dataset: &Dataset,
    fit: &BackgroundFit,
    eroei: &EroeiSource,
    threshold: f64,
) -> Result<Vec<YearInterval>> {
    let mut out: Vec<YearInterval> = Vec::new();
    let mut open: Option<YearInterval> = None;
    for r in dataset.records() {
        let background = fit.k / eroei.eroei(dataset, r.year)?;
        let above = threshold.is_finite() && r.price > (1.0 + threshold) * background;
        match (above, open.as_mut()) {
            (true, Some(iv)) => iv.end = r.year,
            (true, None) => open = Some(YearInterval { start: r.year, end: r.year }),
            (false, Some(_)) => out.extend(open.take()),
            (false, None) => {}
        }
    }
    out.extend(open);
    Ok(out)
}
