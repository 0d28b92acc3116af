//! Small descriptive-statistics and least-squares helpers shared by the analysis modules.

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population standard deviation (divides by `n`).
pub fn std_dev(values: &[f64]) -> f64 {
    let m = mean(values);
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / values.len() as f64).sqrt()
}

/// Coefficient of variation `std / mean`; `None` when the mean is (numerically) zero.
pub fn coefficient_of_variation(values: &[f64]) -> Option<f64> {
    let m = mean(values);
    let scale = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if values.is_empty() || m.abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return None;
    }
    Some(std_dev(values) / m.abs())
}

/// Result of a one-regressor least-squares fit without intercept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OriginFit {
    pub slope: f64,
    pub std_error: f64,
}

/// Least squares `target ≈ slope · regressor` through the origin.
///
/// Returns `None` when the regressor has (numerically) zero variance.
pub fn ols_through_origin(target: &[f64], regressor: &[f64]) -> Option<OriginFit> {
    debug_assert_eq!(target.len(), regressor.len());
    let n = regressor.len();
    if n < 2 {
        return None;
    }
    let sxx: f64 = regressor.iter().map(|r| r * r).sum();
    let var = std_dev(regressor).powi(2);
    if sxx == 0.0 || var <= 1e-12 * sxx / n as f64 {
        return None;
    }
    let sxy: f64 = target.iter().zip(regressor).map(|(t, r)| t * r).sum();
    let slope = sxy / sxx;
    let rss: f64 = target
        .iter()
        .zip(regressor)
        .map(|(t, r)| (t - slope * r).powi(2))
        .sum();
    let sigma2 = rss / (n - 1) as f64;
    Some(OriginFit {
        slope,
        std_error: (sigma2 / sxx).sqrt(),
    })
}

/// Ordinary least squares line `y = intercept + slope · x`. Returns `(intercept, slope)`.
pub fn linear_trend(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    if xs.len() < 2 || xs.len() != ys.len() {
        return None;
    }
    let mx = mean(xs);
    let my = mean(ys);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some((my - slope * mx, slope))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cv_of_constant_is_zero() {
        assert_eq!(coefficient_of_variation(&[3.0, 3.0, 3.0]), Some(0.0));
    }

    #[test]
    fn cv_undefined_for_zero_mean() {
        assert_eq!(coefficient_of_variation(&[0.0, 0.0]), None);
        assert_eq!(coefficient_of_variation(&[-1.0, 1.0]), None);
    }

    #[test]
    fn origin_fit_exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.5 * v).collect();
        let fit = ols_through_origin(&y, &x).unwrap();
        assert!((fit.slope - 2.5).abs() < 1e-14);
        assert!(fit.std_error < 1e-14);
    }

    #[test]
    fn origin_fit_rejects_constant_regressor() {
        assert!(ols_through_origin(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]).is_none());
        assert!(ols_through_origin(&[1.0, 2.0], &[0.0, 0.0]).is_none());
    }

    #[test]
    fn trend_recovers_line() {
        let xs = [2005.0, 2006.0, 2007.0];
        let ys = [10.0, 13.0, 16.0];
        let (a, b) = linear_trend(&xs, &ys).unwrap();
        assert!((b - 3.0).abs() < 1e-12);
        assert!((a + b * 2008.0 - 19.0).abs() < 1e-9);
    }
}
