//! Shared inputs for the benchmarks.

use phaseportrait_core::data::bundled;
use phaseportrait_core::geometry::{build_trajectory, AxisSpec};
use phaseportrait_core::lorenz::{integrate, steps_for, LorenzParams, LorenzState, LorenzTrajectory};
use phaseportrait_core::{Dataset, EroeiModel, EroeiSource, PhaseTrajectory};

pub fn oil() -> (Dataset, EroeiSource) {
    let ds = bundled::dataset();
    let src = EroeiSource::Model(EroeiModel::default_for(&ds));
    (ds, src)
}

pub fn oil_trajectory() -> PhaseTrajectory {
    build_trajectory(&bundled::dataset(), &AxisSpec::default(), None).expect("bundled data")
}

/// Classical attractor sampled at `dt` over `[0, t_end]` from (1, 1, 1).
pub fn classical(t_end: f64, dt: f64) -> LorenzTrajectory {
    integrate(
        &LorenzParams::CLASSICAL,
        LorenzState::new(1.0, 1.0, 1.0),
        dt,
        steps_for(t_end, dt),
    )
    .expect("classical parameters stay finite")
}

/// Pseudo-random walk with many self-crossings, deterministic in `n`.
pub fn tangled_trajectory(n: usize) -> PhaseTrajectory {
    let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    PhaseTrajectory::from_xy((0..n).map(|i| (i as i32, next(), next()))).expect("finite points")
}
