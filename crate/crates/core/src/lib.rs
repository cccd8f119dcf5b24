//! Stabilized trace finite element method for the Allen–Cahn equation posed on a
//! surface that moves with a prescribed velocity field.
//!
//! The surface is the zero level of a level-set function interpolated on a fixed,
//! uniform tetrahedral background mesh. On each time step the solver
//!
//! 1. re-interpolates the level set and extracts the piecewise planar discrete surface,
//! 2. builds a narrow band of tetrahedra around it that carries the active unknowns,
//! 3. assembles the semi-implicit system (implicit diffusion and advection, explicit
//!    double-well term with linear stabilization, normal-gradient volume stabilization),
//! 4. solves it with restarted GMRES.
//!
//! The [`bench`] module contains the manufactured-solution convergence study,
//! the geodesic curvature flow comparison on a pulsating sphere and the
//! deforming-surface phase separation run.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod assembly;
pub mod band;
pub mod bench;
pub mod error;
pub mod geometry;
pub mod mesh;
pub mod potential;
pub mod quadrature;
pub mod solver;
pub mod timestepper;
pub mod vtk;

pub use error::{Error, Result};

/// Points and vectors in the ambient space.
pub type Vec3 = nalgebra::Vector3<f64>;
/// 3×3 matrices (Jacobians, Hessians, projectors).
pub type Mat3 = nalgebra::Matrix3<f64>;
