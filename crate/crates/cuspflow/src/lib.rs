//! cuspflow: a numerical laboratory for geodesic flow near a model cusp.
//!
//! The crate builds the surface of revolution of y = x^r (r > 2), integrates
//! its geodesic flow with conserved-quantity monitoring, solves and analyses
//! single cusp excursions (depth, exit time, winding, hyperbolic-distance
//! functional), drives synthetic mixing flows with known correlation decay
//! through variance and effective-ergodic-average experiments, and composes
//! surrogate long random geodesics whose excursion statistics are checked
//! against the expected scaling laws. Everything is seeded and deterministic,
//! independent of worker count.

pub mod config;
pub mod error;
pub mod excursion;
pub mod fit;
pub mod geometry;
pub mod integrate;
pub mod mixing;
pub mod montecarlo;
pub mod numeric;
pub mod report;
pub mod suites;

pub use error::{Error, Result};
pub use fit::ScalingFit;
pub use geometry::{AngularData, PhaseState, ProfileSurface};
pub use integrate::{integrate_geodesic, Trajectory, TrajectoryStatus};
