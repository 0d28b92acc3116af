//! Per-capita attractor statistics and the EROEI-decline price scenario.

use serde::Serialize;

use crate::data::{Dataset, EroeiModel};
use crate::error::{Error, Result};
use crate::geometry::YearInterval;
use crate::stats;

/// Trailing years used for the production trend at the crossing.
pub const TREND_WINDOW: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AttractorReport {
    pub window_years: YearInterval,
    /// tonnes per person
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub band_halfwidth: f64,
}

/// Statistics over the trailing `window` entries of a `(year, t/person)` series.
pub fn attractor_statistics(series: &[(i32, f64)], window: usize) -> Result<AttractorReport> {
    if window == 0 || series.is_empty() {
        return Err(Error::InvalidArgument("attractor window is empty".into()));
    }
    if window > series.len() {
        return Err(Error::InvalidArgument(format!(
            "window of {window} years exceeds series length {}",
            series.len()
        )));
    }
    let tail = &series[series.len() - window..];
    let values: Vec<f64> = tail.iter().map(|p| p.1).collect();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(AttractorReport {
        window_years: YearInterval {
            start: tail[0].0,
            end: tail[tail.len() - 1].0,
        },
        mean: stats::mean(&values),
        min,
        max,
        band_halfwidth: (max - min) / 2.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioResult {
    pub k: f64,
    /// US$(2014)/bbl
    pub threshold_price: f64,
    pub crossing_year: f64,
    pub crossing_year_rounded: i32,
    pub eroei_at_crossing: f64,
    /// Mt/yr, from the trailing linear production trend.
    pub production_at_crossing: f64,
    pub reference_year: i32,
    pub years_from_reference: f64,
    /// The background price already exceeded the threshold before the reference year.
    pub already_crossed: bool,
}

/// OLS line through the last `window` years of production: `(intercept, slope)`.
pub fn production_trend(dataset: &Dataset, window: usize) -> Result<(f64, f64)> {
    let recs = dataset.records();
    let window = window.min(recs.len());
    let tail = &recs[recs.len() - window..];
    let years: Vec<f64> = tail.iter().map(|r| f64::from(r.year)).collect();
    let prod: Vec<f64> = tail.iter().map(|r| r.production).collect();
    stats::linear_trend(&years, &prod).ok_or(Error::TooFewPoints {
        found: window,
        required: 2,
    })
}

/// Year at which `k / E(t)` reaches `threshold` under a declining linear EROEI.
pub fn crossing_year(k: f64, model: &EroeiModel, threshold: f64, dataset: &Dataset) -> Result<ScenarioResult> {
    if !(k > 0.0 && threshold > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "k and threshold must be positive (k={k}, threshold={threshold})"
        )));
    }
    if !model.is_decreasing() {
        return Err(Error::InvalidModel(format!(
            "scenario needs a decreasing EROEI, got {} -> {}",
            model.e_start(),
            model.e_end()
        )));
    }
    let e_star = k / threshold;
    let t_star = model.year_for(e_star).expect("decreasing model is invertible");
    let reference_year = dataset.last_year();
    let (a, b) = production_trend(dataset, TREND_WINDOW)?;
    Ok(ScenarioResult {
        k,
        threshold_price: threshold,
        crossing_year: t_star,
        crossing_year_rounded: t_star.round() as i32,
        eroei_at_crossing: e_star,
        production_at_crossing: a + b * t_star,
        reference_year,
        years_from_reference: t_star - f64::from(reference_year),
        already_crossed: e_star > model.e_start() || t_star < f64::from(reference_year),
    })
}

/// Yearly background price `k / E(t)` over an inclusive year range.
pub fn background_price_path(k: f64, model: &EroeiModel, years: YearInterval) -> Result<Vec<(i32, f64)>> {
    (years.start..=years.end)
        .map(|y| {
            let e = model.at(f64::from(y)).value;
            if e <= 0.0 {
                return Err(Error::NonPositiveEroei { year: y, value: e });
            }
            Ok((y, k / e))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::AnnualRecord;
    use proptest::prelude::*;

    fn flat_dataset(start: i32, end: i32) -> Dataset {
        let recs = (start..=end)
            .map(|y| AnnualRecord::new(y, 4000.0 + 10.0 * f64::from(y - start), 50.0).unwrap())
            .collect();
        Dataset::new(recs, "t").unwrap()
    }

    #[test]
    fn attractor_constant() {
        let s: Vec<_> = (1990..2015).map(|y| (y, 0.59)).collect();
        let r = attractor_statistics(&s, 25).unwrap();
        assert_eq!(r.mean, 0.59);
        assert_eq!(r.band_halfwidth, 0.0);
        assert_eq!(r.window_years, YearInterval { start: 1990, end: 2014 });
        assert!(attractor_statistics(&s, 0).is_err());
        assert!(attractor_statistics(&s, 26).is_err());
    }

    #[test]
    fn crossing_algebra() {
        let ds = flat_dataset(2005, 2014);
        let m = EroeiModel::new(2014, 9.0, 2044, 3.0).unwrap();
        let r = crossing_year(450.0, &m, 100.0, &ds).unwrap();
        assert_eq!(r.eroei_at_crossing, 4.5);
        assert!((r.crossing_year - 2036.5).abs() < 1e-9);
        assert!((r.years_from_reference - 22.5).abs() < 1e-9);
        assert!(!r.already_crossed);
        // production trend is exactly 4000 + 10 (y - 2005)
        assert!((r.production_at_crossing - (4000.0 + 10.0 * 31.5)).abs() < 1e-6);
        assert!((r.k / r.eroei_at_crossing - 100.0).abs() <= 1e-9 * 100.0);
    }

    #[test]
    fn crossing_in_the_past_flagged() {
        let ds = flat_dataset(2005, 2014);
        let m = EroeiModel::new(2014, 9.0, 2044, 3.0).unwrap();
        let r = crossing_year(1000.0, &m, 100.0, &ds).unwrap();
        assert!(r.already_crossed);
        let up = EroeiModel::new(2014, 3.0, 2044, 9.0).unwrap();
        assert!(matches!(crossing_year(450.0, &up, 100.0, &ds), Err(Error::InvalidModel(_))));
    }

    #[test]
    fn price_path_examples() {
        let m = EroeiModel::new(2014, 9.0, 2044, 3.0).unwrap();
        let p = background_price_path(450.0, &m, YearInterval { start: 2014, end: 2044 }).unwrap();
        assert_eq!(p[0], (2014, 50.0));
        assert!((p[30].1 - 150.0).abs() < 1e-9);
        assert!(p.windows(2).all(|w| w[1].1 > w[0].1));
        let flat = EroeiModel::new(2014, 5.0, 2044, 5.0).unwrap();
        let p = background_price_path(450.0, &flat, YearInterval { start: 2014, end: 2020 }).unwrap();
        assert!(p.iter().all(|v| v.1 == 90.0));
        let err = background_price_path(450.0, &m, YearInterval { start: 2014, end: 2060 }).unwrap_err();
        assert!(matches!(err, Error::NonPositiveEroei { year: 2059, .. }));
    }

    proptest! {
        #[test]
        fn path_hits_threshold_at_crossing(k in 100.0f64..900.0, thr in 60.0f64..200.0, e0 in 5.0f64..40.0, drop in 0.05f64..0.95) {
            let ds = flat_dataset(2005, 2014);
            let m = EroeiModel::new(2014, e0, 2064, e0 * (1.0 - drop)).unwrap();
            let r = crossing_year(k, &m, thr, &ds).unwrap();
            let e = m.at(r.crossing_year).value;
            prop_assert!((k / e - thr).abs() <= 1e-9 * thr);
        }

        #[test]
        fn joint_scaling_keeps_crossing(k in 100.0f64..900.0, thr in 60.0f64..200.0, c in 0.1f64..10.0) {
            let ds = flat_dataset(2005, 2014);
            let m = EroeiModel::new(2014, 9.0, 2044, 3.0).unwrap();
            let a = crossing_year(k, &m, thr, &ds).unwrap();
            let b = crossing_year(k * c, &m, thr * c, &ds).unwrap();
            prop_assert!((a.crossing_year - b.crossing_year).abs() <= 1e-9 * a.crossing_year.abs());
        }

        #[test]
        fn full_window_is_global(values in prop::collection::vec(0.1f64..1.0, 1..60)) {
            let s: Vec<_> = values.iter().enumerate().map(|(i, v)| (1950 + i as i32, *v)).collect();
            let r = attractor_statistics(&s, s.len()).unwrap();
            prop_assert!((r.mean - crate::stats::mean(&values)).abs() < 1e-12);
            prop_assert_eq!(r.min, values.iter().copied().fold(f64::INFINITY, f64::min));
            prop_assert!(r.min <= r.mean && r.mean <= r.max);
        }
    }
}
