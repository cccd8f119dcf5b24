//! Reference computations and benchmark drivers.
//!
//! - [`example1`]: translating sphere with a manufactured solution; convergence ladder.
//! - [`ode`]: latitude-circle radius under geodesic curvature flow on a pulsating sphere.
//! - [`radius`]: zero-level radius recovered from a discrete solution.
//! - [`harness`]: the three benchmark runs and their CSV/VTK outputs.

pub mod config;
pub mod eoc;
pub mod example1;
pub mod harness;
pub mod norms;
pub mod ode;
pub mod radius;
