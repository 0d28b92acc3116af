//! Lorenz-63 simulation and gray-box parameter estimation from sampled series.
//!
//! ```text
//! dx/dt = sigma (y - x)
//! dy/dt = x (r - z) - y
//! dz/dt = x y - b z
//! ```

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, EroeiSource};
use crate::error::{Error, Result};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorenzParams {
    pub sigma: f64,
    pub r: f64,
    pub b: f64,
}

impl LorenzParams {
    /// The canonical chaotic regime (10, 28, 8/3).
    pub const CLASSICAL: LorenzParams = LorenzParams {
        sigma: 10.0,
        r: 28.0,
        b: 8.0 / 3.0,
    };

    pub fn new(sigma: f64, r: f64, b: f64) -> Result<Self> {
        if !(sigma.is_finite() && r.is_finite() && b.is_finite()) {
            return Err(Error::InvalidArgument("Lorenz parameters must be finite".into()));
        }
        Ok(LorenzParams { sigma, r, b })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LorenzState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl LorenzState {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        LorenzState { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    fn axpy(&self, h: f64, d: &LorenzState) -> LorenzState {
        LorenzState::new(self.x + h * d.x, self.y + h * d.y, self.z + h * d.z)
    }
}

pub fn lorenz_rhs(s: &LorenzState, p: &LorenzParams) -> LorenzState {
    LorenzState {
        x: p.sigma * (s.y - s.x),
        y: s.x * (p.r - s.z) - s.y,
        z: s.x * s.y - p.b * s.z,
    }
}

/// Equilibria: the origin, plus C± when `b (r - 1) > 0`.
pub fn fixed_points(p: &LorenzParams) -> Vec<LorenzState> {
    let mut out = vec![LorenzState::default()];
    let q = p.b * (p.r - 1.0);
    if q > 0.0 {
        let c = q.sqrt();
        out.push(LorenzState::new(c, c, p.r - 1.0));
        out.push(LorenzState::new(-c, -c, p.r - 1.0));
    }
    out
}

/// Trace of the Jacobian, constant over phase space.
pub fn divergence(p: &LorenzParams) -> f64 {
    -(p.sigma + 1.0 + p.b)
}

/// Uniformly sampled solution; `states[i]` is at `t0 + i * dt`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LorenzTrajectory {
    pub t0: f64,
    pub dt: f64,
    pub states: Vec<LorenzState>,
}

impl LorenzTrajectory {
    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    /// Samples with `t >= t_start`.
    pub fn after(&self, t_start: f64) -> LorenzTrajectory {
        let skip = ((t_start - self.t0) / self.dt - 1e-9).ceil().max(0.0) as usize;
        let skip = skip.min(self.states.len());
        LorenzTrajectory {
            t0: self.time(skip),
            dt: self.dt,
            states: self.states[skip..].to_vec(),
        }
    }

    pub fn xs(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.x).collect()
    }
    pub fn ys(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.y).collect()
    }
    pub fn zs(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.z).collect()
    }
}

/// One classical fourth-order Runge–Kutta step.
pub fn rk4_step(s: &LorenzState, p: &LorenzParams, dt: f64) -> LorenzState {
    let k1 = lorenz_rhs(s, p);
    let k2 = lorenz_rhs(&s.axpy(dt / 2.0, &k1), p);
    let k3 = lorenz_rhs(&s.axpy(dt / 2.0, &k2), p);
    let k4 = lorenz_rhs(&s.axpy(dt, &k3), p);
    LorenzState::new(
        s.x + dt / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
        s.y + dt / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y),
        s.z + dt / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z),
    )
}

/// Integrates `n_steps` RK4 steps, returning `n_steps + 1` states.
pub fn integrate(params: &LorenzParams, initial: LorenzState, dt: f64, n_steps: usize) -> Result<LorenzTrajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    if n_steps == 0 {
        return Err(Error::InvalidArgument("n_steps must be at least 1".into()));
    }
    if !initial.is_finite() {
        return Err(Error::NonFinite { step: 0 });
    }
    let mut states = Vec::with_capacity(n_steps + 1);
    states.push(initial);
    let mut s = initial;
    for step in 1..=n_steps {
        s = rk4_step(&s, params, dt);
        if !s.is_finite() {
            return Err(Error::NonFinite { step });
        }
        states.push(s);
    }
    Ok(LorenzTrajectory { t0: 0.0, dt, states })
}

/// Number of steps covering `[0, t_end]` at spacing `dt`.
pub fn steps_for(t_end: f64, dt: f64) -> usize {
    (t_end / dt).round() as usize
}

/// Second-order finite differences: central in the interior, one-sided
/// three-point stencils at both ends.
pub fn estimate_derivatives(series: &[f64], dt: f64) -> Result<Vec<f64>> {
    let n = series.len();
    if n < 3 {
        return Err(Error::TooFewPoints { found: n, required: 3 });
    }
    if dt.is_nan() || dt <= 0.0 {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        d[i] = (series[i + 1] - series[i - 1]) / (2.0 * dt);
    }
    d[0] = (-3.0 * series[0] + 4.0 * series[1] - series[2]) / (2.0 * dt);
    d[n - 1] = (3.0 * series[n - 1] - 4.0 * series[n - 2] + series[n - 3]) / (2.0 * dt);
    Ok(d)
}

/// Estimated (sigma, r, b) with OLS standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LorenzFit {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub se1: f64,
    pub se2: f64,
    pub se3: f64,
    pub n_points: usize,
}

impl LorenzFit {
    pub fn params(&self) -> LorenzParams {
        LorenzParams {
            sigma: self.k1,
            r: self.k2,
            b: self.k3,
        }
    }
}

/// Per-equation least squares on finite-difference derivatives.
///
/// Each Lorenz equation is linear in a single parameter:
/// `x' = k1 (y - x)`, `y' + y + x z = k2 x`, `x y - z' = k3 z`.
/// With `normalize = Some(i)` every series is first divided by its value at index `i`.
pub fn fit_lorenz(xs: &[f64], ys: &[f64], zs: &[f64], dt: f64, normalize: Option<usize>) -> Result<LorenzFit> {
    let n = xs.len();
    if ys.len() != n || zs.len() != n {
        return Err(Error::InvalidArgument(format!(
            "series lengths differ ({}, {}, {})",
            n,
            ys.len(),
            zs.len()
        )));
    }
    if n < 4 {
        return Err(Error::TooFewPoints { found: n, required: 4 });
    }
    let scaled = |s: &[f64]| -> Result<Vec<f64>> {
        match normalize {
            None => Ok(s.to_vec()),
            Some(i) => {
                let reference = *s.get(i).ok_or_else(|| {
                    Error::InvalidArgument(format!("reference index {i} outside series of length {n}"))
                })?;
                if reference == 0.0 {
                    return Err(Error::InvalidArgument(format!("zero reference value at index {i}")));
                }
                Ok(s.iter().map(|v| v / reference).collect())
            }
        }
    };
    let (x, y, z) = (scaled(xs)?, scaled(ys)?, scaled(zs)?);
    let (dx, dy, dz) = (
        estimate_derivatives(&x, dt)?,
        estimate_derivatives(&y, dt)?,
        estimate_derivatives(&z, dt)?,
    );

    let reg1: Vec<f64> = (0..n).map(|i| y[i] - x[i]).collect();
    let f1 = stats::ols_through_origin(&dx, &reg1).ok_or(Error::ZeroVariance { equation: "x (K1)" })?;

    let target2: Vec<f64> = (0..n).map(|i| dy[i] + y[i] + x[i] * z[i]).collect();
    let f2 = stats::ols_through_origin(&target2, &x).ok_or(Error::ZeroVariance { equation: "y (K2)" })?;

    let target3: Vec<f64> = (0..n).map(|i| x[i] * y[i] - dz[i]).collect();
    let f3 = stats::ols_through_origin(&target3, &z).ok_or(Error::ZeroVariance { equation: "z (K3)" })?;

    Ok(LorenzFit {
        k1: f1.slope,
        k2: f2.slope,
        k3: f3.slope,
        se1: f1.std_error,
        se2: f2.std_error,
        se3: f3.std_error,
        n_points: n,
    })
}

/// Default nondimensionalization year for dataset fits: the middle record.
pub fn default_reference_year(dataset: &Dataset) -> i32 {
    dataset.records()[dataset.len() / 2].year
}

/// Fits the Lorenz form to yearly data with X = production, Y = EROEI,
/// Z = price, `dt` = 1 year, every variable divided by its value in
/// `reference_year` (default: [`default_reference_year`]).
pub fn fit_dataset(dataset: &Dataset, eroei: &EroeiSource, reference_year: Option<i32>) -> Result<LorenzFit> {
    let year = reference_year.unwrap_or_else(|| default_reference_year(dataset));
    if !dataset.contains_year(year) {
        return Err(Error::MissingYear {
            what: "reference record",
            year,
        });
    }
    let index = (year - dataset.first_year()) as usize;
    let xs: Vec<f64> = dataset.records().iter().map(|r| r.production).collect();
    let zs: Vec<f64> = dataset.records().iter().map(|r| r.price).collect();
    let ys = dataset
        .years()
        .into_iter()
        .map(|y| eroei.eroei(dataset, y))
        .collect::<Result<Vec<f64>>>()?;
    fit_lorenz(&xs, &ys, &zs, 1.0, Some(index))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductStatistics {
    /// Mean of `y · z` over the trajectory.
    pub mean: f64,
    /// Coefficient of variation of `y · z`; `None` when the mean vanishes.
    pub cv: Option<f64>,
}

pub fn product_statistics(states: &[LorenzState]) -> Result<ProductStatistics> {
    if states.is_empty() {
        return Err(Error::TooFewPoints { found: 0, required: 1 });
    }
    let products: Vec<f64> = states.iter().map(|s| s.y * s.z).collect();
    Ok(ProductStatistics {
        mean: stats::mean(&products),
        cv: stats::coefficient_of_variation(&products),
    })
}
