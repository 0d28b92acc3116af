//! Hyperbolic background `P = k / E` fitted to the lower envelope of the
//! production/price scatter.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, EroeiSource};
use crate::error::{Error, Result};
use crate::stats;

/// Plausible range for the limit price k, US$(2014)/bbl.
pub const ADMISSIBLE_K: (f64, f64) = (100.0, 750.0);

pub const MIN_SUPPORT: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SupportMode {
    /// Lower convex hull of the (production, price) scatter.
    Auto,
    Explicit(Vec<i32>),
}

/// Bootstrap settings for the standard error of k.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bootstrap {
    pub draws: usize,
    pub seed: u64,
}

impl Default for Bootstrap {
    fn default() -> Self {
        Bootstrap { draws: 1000, seed: 2014 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BackgroundFit {
    /// Limit price (price at EROEI = 1), US$(2014)/bbl.
    pub k: f64,
    /// Residual-bootstrap standard error of `k`; `None` when no draws were requested.
    pub k_std_error: Option<f64>,
    pub support_years: Vec<i32>,
    /// Observed minus fitted price for each support year.
    pub residuals: Vec<(i32, f64)>,
    pub rms_relative_residual: f64,
    /// Whether k falls in [`ADMISSIBLE_K`]; fits outside are flagged, not rejected.
    pub in_admissible_band: bool,
}

impl BackgroundFit {
    pub fn background_price(&self, eroei: f64) -> f64 {
        self.k / eroei
    }
}

/// Indices of the lower convex hull vertices (Andrew's monotone chain), in
/// increasing x order. Collinear interior points are dropped.
pub fn lower_hull(points: &[(f64, f64)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[a]
            .0
            .total_cmp(&points[b].0)
            .then(points[a].1.total_cmp(&points[b].1))
    });
    let turn = |o: usize, a: usize, b: usize| {
        let (o, a, b) = (points[o], points[a], points[b]);
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut hull: Vec<usize> = Vec::new();
    for i in order {
        if let Some(&last) = hull.last() {
            if points[last].0 == points[i].0 {
                // same x, higher y: not on the lower hull
                continue;
            }
        }
        while hull.len() >= 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], i) <= 0.0 {
            hull.pop();
        }
        hull.push(i);
    }
    hull
}

/// Years used to fit the background, in increasing production order.
pub fn select_support(dataset: &Dataset, mode: &SupportMode) -> Result<Vec<i32>> {
    match mode {
        SupportMode::Explicit(years) => {
            if let Some(&y) = years.iter().find(|&&y| !dataset.contains_year(y)) {
                return Err(Error::MissingYear { what: "support record", year: y });
            }
            Ok(years.clone())
        }
        SupportMode::Auto => {
            let recs = dataset.records();
            let pts: Vec<(f64, f64)> = recs.iter().map(|r| (r.production, r.price)).collect();
            let mut idx = lower_hull(&pts);
            let argmin = (0..recs.len())
                .min_by(|&a, &b| recs[a].price.total_cmp(&recs[b].price))
                .expect("dataset is non-empty");
            if !idx.contains(&argmin) {
                idx.push(argmin);
                idx.sort_by(|&a, &b| pts[a].0.total_cmp(&pts[b].0));
            }
            Ok(idx.into_iter().map(|i| recs[i].year).collect())
        }
    }
}

/// Closed-form least squares `k = Σ(P/E) / Σ(1/E²)`.
fn least_squares_k(prices: &[f64], eroei: &[f64]) -> f64 {
    let num: f64 = prices.iter().zip(eroei).map(|(p, e)| p / e).sum();
    let den: f64 = eroei.iter().map(|e| 1.0 / (e * e)).sum();
    num / den
}

fn support_values(dataset: &Dataset, eroei: &EroeiSource, support: &[i32]) -> Result<(Vec<f64>, Vec<f64>)> {
    if support.len() < MIN_SUPPORT {
        return Err(Error::TooFewPoints {
            found: support.len(),
            required: MIN_SUPPORT,
        });
    }
    let mut prices = Vec::with_capacity(support.len());
    let mut es = Vec::with_capacity(support.len());
    for &year in support {
        let rec = dataset.get(year).ok_or(Error::MissingYear { what: "support record", year })?;
        let e = eroei.eroei(dataset, year)?;
        if e.is_nan() || e <= 0.0 {
            return Err(Error::NonPositiveEroei { year, value: e });
        }
        prices.push(rec.price);
        es.push(e);
    }
    Ok((prices, es))
}

/// Fits `P = k / E` on the support years, with the default bootstrap.
pub fn fit_background(dataset: &Dataset, eroei: &EroeiSource, support: &[i32]) -> Result<BackgroundFit> {
    fit_background_with(dataset, eroei, support, Bootstrap::default())
}

pub fn fit_background_with(
    dataset: &Dataset,
    eroei: &EroeiSource,
    support: &[i32],
    bootstrap: Bootstrap,
) -> Result<BackgroundFit> {
    let (prices, es) = support_values(dataset, eroei, support)?;
    let k = least_squares_k(&prices, &es);
    let fitted: Vec<f64> = es.iter().map(|e| k / e).collect();
    let residuals: Vec<f64> = prices.iter().zip(&fitted).map(|(p, f)| p - f).collect();
    let rms_relative_residual = (residuals
        .iter()
        .zip(&fitted)
        .map(|(r, f)| (r / f).powi(2))
        .sum::<f64>()
        / residuals.len() as f64)
        .sqrt();
    let k_std_error = (bootstrap.draws > 0).then(|| bootstrap_std_error(&fitted, &residuals, &es, bootstrap));
    Ok(BackgroundFit {
        k,
        k_std_error,
        support_years: support.to_vec(),
        residuals: support.iter().copied().zip(residuals).collect(),
        rms_relative_residual,
        in_admissible_band: (ADMISSIBLE_K.0..=ADMISSIBLE_K.1).contains(&k),
    })
}

/// Standard deviation of k over refits to `fitted + resampled residuals`.
fn bootstrap_std_error(fitted: &[f64], residuals: &[f64], eroei: &[f64], cfg: Bootstrap) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = residuals.len();
    let mut synthetic = vec![0.0; n];
    let ks: Vec<f64> = (0..cfg.draws)
        .map(|_| {
            for (s, f) in synthetic.iter_mut().zip(fitted) {
                *s = f + residuals[rng.random_range(0..n)];
            }
            least_squares_k(&synthetic, eroei)
        })
        .collect();
    if ks.len() < 2 {
        return 0.0;
    }
    let m = stats::mean(&ks);
    (ks.iter().map(|k| (k - m).powi(2)).sum::<f64>() / (ks.len() - 1) as f64).sqrt()
}

/// Samples `P = k / E` over `[e_min, e_max]` at spacing `step`.
pub fn limit_price_curve(k: f64, e_min: f64, e_max: f64, step: f64) -> Result<Vec<(f64, f64)>> {
    if !(k > 0.0 && e_min > 0.0 && e_max > e_min && step > 0.0 && e_max.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "limit price curve needs k > 0 and 0 < e_min < e_max, step > 0 (got k={k}, [{e_min}, {e_max}], step {step})"
        )));
    }
    let n = ((e_max - e_min) / step + 1e-9).floor() as usize + 1;
    Ok((0..n)
        .map(|i| {
            let e = e_min + i as f64 * step;
            (e, k / e)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductInvariance {
    /// Coefficient of variation of price × EROEI on the support.
    pub cv_product: f64,
    /// Coefficient of variation of price on the support.
    pub cv_price: f64,
    /// `cv_product < cv_price`.
    pub product_more_stable: bool,
}

pub fn product_invariance(dataset: &Dataset, eroei: &EroeiSource, support: &[i32]) -> Result<ProductInvariance> {
    let (prices, es) = support_values(dataset, eroei, support)?;
    let products: Vec<f64> = prices.iter().zip(&es).map(|(p, e)| p * e).collect();
    // prices are strictly positive, so both means are non-zero
    let cv_product = stats::coefficient_of_variation(&products).unwrap_or(0.0);
    let cv_price = stats::coefficient_of_variation(&prices).unwrap_or(0.0);
    Ok(ProductInvariance {
        cv_product,
        cv_price,
        product_more_stable: cv_product < cv_price,
    })
}

/// Years whose price falls below `(1 - tolerance)` times the fitted background.
pub fn below_background(
    dataset: &Dataset,
    eroei: &EroeiSource,
    fit: &BackgroundFit,
    tolerance: f64,
) -> Result<Vec<i32>> {
    let mut out = Vec::new();
    for r in dataset.records() {
        let bg = fit.background_price(eroei.eroei(dataset, r.year)?);
        if r.price < (1.0 - tolerance) * bg {
            out.push(r.year);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{AnnualRecord, EroeiModel};
    use proptest::prelude::*;

    fn dataset(rows: &[(f64, f64, f64)]) -> Dataset {
        let recs = rows
            .iter()
            .enumerate()
            .map(|(i, &(n, p, e))| AnnualRecord::new(2000 + i as i32, n, p).unwrap().with_eroei(e).unwrap())
            .collect();
        Dataset::new(recs, "synthetic").unwrap()
    }

    fn hyperbola(k: f64, es: &[f64]) -> Dataset {
        let rows: Vec<_> = es.iter().enumerate().map(|(i, &e)| (1000.0 + 10.0 * i as f64, k / e, e)).collect();
        dataset(&rows)
    }

    #[test]
    fn exact_hyperbola_recovers_k() {
        let ds = hyperbola(500.0, &[20.0, 15.0, 10.0, 8.0, 5.0]);
        let fit = fit_background(&ds, &EroeiSource::PerYear, &ds.years()).unwrap();
        assert!((fit.k - 500.0).abs() < 1e-10 * 500.0);
        assert!(fit.residuals.iter().all(|r| r.1.abs() < 1e-10));
        assert!(fit.rms_relative_residual < 1e-12);
        assert!(fit.k_std_error.unwrap() < 1e-9);
        assert!(fit.in_admissible_band);
    }

    #[test]
    fn unit_eroei_gives_mean_price() {
        let ds = dataset(&[(1.0, 40.0, 1.0), (2.0, 60.0, 1.0), (3.0, 80.0, 1.0), (4.0, 20.0, 1.0)]);
        let fit = fit_background(&ds, &EroeiSource::PerYear, &ds.years()).unwrap();
        assert!((fit.k - 50.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_support_points() {
        let ds = hyperbola(500.0, &[20.0, 15.0, 10.0, 8.0]);
        let err = fit_background(&ds, &EroeiSource::PerYear, &[2000, 2001]).unwrap_err();
        assert!(matches!(err, Error::TooFewPoints { found: 2, .. }));
    }

    #[test]
    fn non_positive_model_eroei_rejected() {
        let ds = hyperbola(500.0, &[20.0, 15.0, 10.0, 8.0]);
        // decline to 1 by 2001 puts 2003 at a negative EROEI
        let model = EroeiModel::new(2000, 10.0, 2001, 1.0).unwrap();
        let err = fit_background(&ds, &EroeiSource::Model(model), &[2000, 2001, 2003]).unwrap_err();
        assert!(matches!(err, Error::NonPositiveEroei { year: 2003, .. }));
    }

    #[test]
    fn convex_decreasing_curve_all_support() {
        let rows: Vec<_> = (1..=6).map(|i| (i as f64, 100.0 / i as f64, 2.0)).collect();
        let ds = dataset(&rows);
        assert_eq!(select_support(&ds, &SupportMode::Auto).unwrap(), ds.years());
    }

    #[test]
    fn explicit_support_validated() {
        let ds = hyperbola(500.0, &[20.0, 15.0, 10.0, 8.0]);
        assert_eq!(
            select_support(&ds, &SupportMode::Explicit(vec![2001, 2000, 2003])).unwrap(),
            vec![2001, 2000, 2003]
        );
        assert!(select_support(&ds, &SupportMode::Explicit(vec![1990])).is_err());
    }

    #[test]
    fn hull_skips_interior_and_upper_points() {
        let pts = [(0.0, 0.0), (1.0, 5.0), (2.0, 1.0), (3.0, 3.0), (4.0, 4.0), (2.0, 7.0)];
        assert_eq!(lower_hull(&pts), vec![0, 2, 4]);
    }

    #[test]
    fn limit_curve_examples() {
        let c = limit_price_curve(400.0, 1.0, 30.0, 0.5).unwrap();
        assert_eq!(c.len(), 59);
        assert_eq!(c[0], (1.0, 400.0));
        assert_eq!(c.iter().find(|p| p.0 == 4.0).unwrap().1, 100.0);
        assert!(c.windows(2).all(|w| w[1].1 < w[0].1));
        assert_eq!(limit_price_curve(500.0, 1.0, 2.0, 0.5).unwrap()[0].1, 500.0);
        assert!(limit_price_curve(-1.0, 1.0, 2.0, 0.5).is_err());
    }

    #[test]
    fn product_invariance_examples() {
        let ds = hyperbola(300.0, &[20.0, 15.0, 10.0, 8.0]);
        let r = product_invariance(&ds, &EroeiSource::PerYear, &ds.years()).unwrap();
        assert!(r.cv_product < 1e-12);
        assert!(r.product_more_stable);

        let flat = dataset(&[(1.0, 50.0, 10.0), (2.0, 50.0, 20.0), (3.0, 50.0, 30.0), (4.0, 50.0, 40.0)]);
        let r = product_invariance(&flat, &EroeiSource::PerYear, &flat.years()).unwrap();
        let cv_e = crate::stats::coefficient_of_variation(&[10.0, 20.0, 30.0, 40.0]).unwrap();
        assert!((r.cv_product - cv_e).abs() < 1e-12);
        assert_eq!(r.cv_price, 0.0);
        assert!(!r.product_more_stable);
    }

    #[test]
    fn bootstrap_is_deterministic() {
        let ds = dataset(&[(1.0, 30.0, 10.0), (2.0, 22.0, 12.0), (3.0, 45.0, 8.0), (4.0, 70.0, 5.0), (5.0, 50.0, 7.0)]);
        let a = fit_background(&ds, &EroeiSource::PerYear, &ds.years()).unwrap();
        let b = fit_background(&ds, &EroeiSource::PerYear, &ds.years()).unwrap();
        assert_eq!(a, b);
        assert!(a.k_std_error.unwrap() > 0.0);
        let none = fit_background_with(&ds, &EroeiSource::PerYear, &ds.years(), Bootstrap { draws: 0, seed: 1 }).unwrap();
        assert_eq!(none.k_std_error, None);
        assert_eq!(none.k, a.k);
    }

    proptest! {
        #[test]
        fn recovers_k_on_any_subset(k in 10.0f64..2000.0, es in prop::collection::vec(1.0f64..60.0, 6), mask in 0u32..64) {
            let ds = hyperbola(k, &es);
            let years = ds.years();
            let mut subset: Vec<i32> = years.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, y)| *y).collect();
            if subset.len() < 3 { subset = years.clone(); }
            let fit = fit_background_with(&ds, &EroeiSource::PerYear, &subset, Bootstrap { draws: 0, seed: 0 }).unwrap();
            prop_assert!((fit.k - k).abs() <= 1e-10 * k);
        }

        #[test]
        fn scale_equivariant(c in 0.01f64..100.0, prices in prop::collection::vec(5.0f64..150.0, 5), es in prop::collection::vec(1.0f64..40.0, 5)) {
            let rows: Vec<_> = prices.iter().zip(&es).enumerate().map(|(i, (&p, &e))| (i as f64 + 1.0, p, e)).collect();
            let scaled: Vec<_> = rows.iter().map(|&(n, p, e)| (n, p * c, e)).collect();
            let a = dataset(&rows);
            let b = dataset(&scaled);
            let off = Bootstrap { draws: 0, seed: 0 };
            let ka = fit_background_with(&a, &EroeiSource::PerYear, &a.years(), off).unwrap().k;
            let kb = fit_background_with(&b, &EroeiSource::PerYear, &b.years(), off).unwrap().k;
            prop_assert!((kb - c * ka).abs() <= 1e-12 * kb.abs());
        }

        #[test]
        fn refit_of_sampled_curve_returns_k(k in 50.0f64..1000.0) {
            let curve = limit_price_curve(k, 1.0, 30.0, 0.5).unwrap();
            let es: Vec<f64> = curve.iter().map(|p| p.0).collect();
            let ps: Vec<f64> = curve.iter().map(|p| p.1).collect();
            prop_assert!((least_squares_k(&ps, &es) - k).abs() <= 1e-10 * k);
        }
    }
}
