//! Deterministic grid-world simulator for active mapping.
//!
//! An agent explores an unknown 2D scene by choosing relative long-term goals.
//! Each goal is verified by A* on the current occupancy map; at each reached
//! goal the agent captures a four-heading depth panorama that is fused into a
//! log-odds occupancy grid. Coverage of the ground-truth surface drives the
//! reward, the termination rules and the evaluation metrics.
//!
//! Continuous geometry is generic over [`Real`] (`f32`/`f64`); the occupancy
//! accumulator is generic over [`LogOdds`], which also admits the exact
//! rational [`Exact`]. The aliases below fix the types used by the episode
//! loop.

pub mod episode;
pub mod geometry;
pub mod mapping;
pub mod metrics;
pub mod planning;
pub mod policy;
pub mod rng;
pub mod runner;
pub mod scalar;
pub mod scene;
pub mod sensor;

pub use scalar::{Exact, LogOdds, Real};

/// Scalar used by the episode loop and logs.
pub type Scalar = f64;
pub type Pose = geometry::Pose2<f64>;
pub type Action = geometry::Action<f64>;
pub type DepthScan = sensor::DepthScan<f64>;
pub type GlobalProbMap = mapping::ProbMap<f64>;
pub type GlobalProbMapF32 = mapping::ProbMap<f32>;
/// Map with exact rational log-odds, for arithmetic checks.
pub type ExactProbMap = mapping::ProbMap<Exact>;
