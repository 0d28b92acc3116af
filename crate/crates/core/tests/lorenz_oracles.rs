//! Integrator-based oracles for the Lorenz module.

use phaseportrait_core::lorenz::{
    divergence, fit_lorenz, fixed_points, integrate, lorenz_rhs, product_statistics, steps_for, LorenzParams,
    LorenzState,
};
use phaseportrait_core::stats::coefficient_of_variation;

const CLASSICAL: LorenzParams = LorenzParams::CLASSICAL;
const START: LorenzState = LorenzState::new(1.0, 1.0, 1.0);

fn relative_error(fit: &phaseportrait_core::LorenzFit) -> f64 {
    [
        (fit.k1 - CLASSICAL.sigma) / CLASSICAL.sigma,
        (fit.k2 - CLASSICAL.r) / CLASSICAL.r,
        (fit.k3 - CLASSICAL.b) / CLASSICAL.b,
    ]
    .iter()
    .map(|e| e.abs())
    .fold(0.0, f64::max)
}

fn fit_at(dt: f64) -> phaseportrait_core::LorenzFit {
    let traj = integrate(&CLASSICAL, START, dt, steps_for(25.0, dt)).unwrap().after(5.0);
    fit_lorenz(&traj.xs(), &traj.ys(), &traj.zs(), dt, None).unwrap()
}

#[test]
fn recovers_classical_parameters() {
    let fit = fit_at(0.005);
    assert_eq!(fit.n_points, 4001);
    assert!(relative_error(&fit) < 0.05, "{fit:?}");
}

#[test]
fn estimates_improve_as_dt_shrinks() {
    let coarse = relative_error(&fit_at(0.02));
    let fine = relative_error(&fit_at(0.002));
    assert!(fine < coarse, "fine {fine} coarse {coarse}");
}

#[test]
fn subcritical_decay_to_origin() {
    let p = LorenzParams { r: 0.5, ..CLASSICAL };
    let traj = integrate(&p, START, 0.01, steps_for(50.0, 0.01)).unwrap();
    assert!(traj.states.last().unwrap().norm() < 1e-6);
}

#[test]
fn classical_attractor_bounded() {
    let traj = integrate(&CLASSICAL, START, 0.001, steps_for(100.0, 0.001)).unwrap();
    let max = traj
        .states
        .iter()
        .flat_map(|s| [s.x.abs(), s.y.abs(), s.z.abs()])
        .fold(0.0, f64::max);
    assert!(max < 100.0, "max |state| = {max}");
}

#[test]
fn fixed_points_match_closed_form() {
    let q = (CLASSICAL.b * (CLASSICAL.r - 1.0)).sqrt();
    let expected = [(0.0, 0.0, 0.0), (q, q, 27.0), (-q, -q, 27.0)];
    let fp = fixed_points(&CLASSICAL);
    for (p, e) in fp.iter().zip(expected) {
        assert!((p.x - e.0).abs() < 1e-12 && (p.y - e.1).abs() < 1e-12 && (p.z - e.2).abs() < 1e-12);
        assert!(lorenz_rhs(p, &CLASSICAL).norm() < 1e-12);
    }
}

#[test]
fn rk4_fourth_order() {
    let end = |dt: f64| *integrate(&CLASSICAL, START, dt, steps_for(1.0, dt)).unwrap().states.last().unwrap();
    // dt = 0.01 is still pre-asymptotic on this interval (ratio ~37)
    let dt = 0.005;
    let reference = end(dt / 8.0);
    let err = |s: LorenzState| {
        LorenzState::new(s.x - reference.x, s.y - reference.y, s.z - reference.z).norm()
    };
    let ratio = err(end(dt)) / err(end(dt / 2.0));
    assert!((8.0..=32.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn divergence_matches_volume_contraction() {
    let dt = 1e-4;
    let t = 0.1;
    let delta = 1e-6;
    let base = LorenzState::new(1.0, 2.0, 20.0);
    let run = |s: LorenzState| *integrate(&CLASSICAL, s, dt, steps_for(t, dt)).unwrap().states.last().unwrap();
    let b = run(base);
    let cols: Vec<[f64; 3]> = [
        LorenzState::new(base.x + delta, base.y, base.z),
        LorenzState::new(base.x, base.y + delta, base.z),
        LorenzState::new(base.x, base.y, base.z + delta),
    ]
    .into_iter()
    .map(|s| {
        let e = run(s);
        [(e.x - b.x) / delta, (e.y - b.y) / delta, (e.z - b.z) / delta]
    })
    .collect();
    let det = cols[0][0] * (cols[1][1] * cols[2][2] - cols[1][2] * cols[2][1])
        - cols[1][0] * (cols[0][1] * cols[2][2] - cols[0][2] * cols[2][1])
        + cols[2][0] * (cols[0][1] * cols[1][2] - cols[0][2] * cols[1][1]);
    let rate = det.ln() / t;
    let expected = divergence(&CLASSICAL);
    assert!(((rate - expected) / expected).abs() < 0.02, "rate {rate} vs {expected}");
}

#[test]
fn yz_product_on_classical_attractor() {
    let traj = integrate(&CLASSICAL, START, 0.005, steps_for(100.0, 0.005)).unwrap().after(10.0);
    let stats = product_statistics(&traj.states).unwrap();
    let cv_z = coefficient_of_variation(&traj.zs()).unwrap();
    // y changes sign between the two wings, so y·z averages near zero and its
    // relative spread is far larger than that of z
    let cv_yz = stats.cv.unwrap();
    assert!(stats.mean.abs() < 0.2 * CLASSICAL.r * CLASSICAL.r, "mean {}", stats.mean);
    assert!(cv_yz > cv_z, "cv(yz) = {cv_yz}, cv(z) = {cv_z}");
}
