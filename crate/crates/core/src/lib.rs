//! Reconstruction and analysis of the oil price/production phase portrait.
//!
//! - [`data`]: annual records, CSV ingestion, deflation, per-capita joins, the linear EROEI model
//! - [`geometry`]: 2D/3D trajectories, self-crossings, loops and their orientation, anomalies
//! - [`envelope`]: the `P = k / E` background fitted on the lower envelope
//! - [`lorenz`]: Lorenz-63 integration and per-equation parameter estimation
//! - [`scenario`]: per-capita attractor statistics and the price-threshold crossing
//! - [`plot`]: deterministic SVG rendering

pub mod data;
pub mod envelope;
pub mod error;
pub mod geometry;
pub mod lorenz;
pub mod plot;
pub mod scenario;
pub mod stats;

pub use data::{AnnualRecord, ColumnMap, Dataset, EroeiModel, EroeiSource, PriceMode, YearSeries};
pub use envelope::{BackgroundFit, Bootstrap, ProductInvariance, SupportMode};
pub use error::{Error, Result};
pub use geometry::{AxisSpec, Crossing, Loop, PhasePoint, PhaseTrajectory, XAxis, YearInterval, ZAxis};
pub use lorenz::{LorenzFit, LorenzParams, LorenzState, LorenzTrajectory};
pub use scenario::{AttractorReport, ScenarioResult};
