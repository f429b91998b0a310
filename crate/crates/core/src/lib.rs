//! Action-minimizing paths of the planar four-body problem under
//! structural prescribed boundary conditions (SPBC).
//!
//! The library finds paths on `[0, T]` whose endpoints lie in two
//! parameterized configuration subspaces, minimizes the Lagrangian action
//! over both the path and the boundary parameters, sharpens the minimizer
//! into machine-precision initial conditions by boundary-value shooting,
//! extends it to a periodic or quasi-periodic solution by a
//! reflection/permutation/rotation formula, classifies the resulting orbit,
//! and certifies linear stability through a symplectically reduced
//! monodromy analysis.
//!
//! Masses are dimensionless with `G = 1` and satisfy the pair symmetry
//! `m1 = m3`, `m2 = m4`; the default boundary horizon is `T = 1`.

pub mod archive;
pub mod boundary;
pub mod dynamics;
pub mod error;
pub mod extension;
pub mod fixtures;
pub mod integrator;
pub mod jacobi;
pub mod masses;
pub mod minimize;
pub mod monodromy;
pub mod path;
pub mod reduced;
pub mod reference;
pub mod shooting;

pub use boundary::{BoundaryParams, RotationAngle};
pub use dynamics::{Configuration, PhaseState};
pub use error::Error;
pub use extension::{ExtendedOrbit, OrbitClassification};
pub use integrator::{IntegratorSettings, Trajectory};
pub use masses::MassModel;
pub use minimize::{MinimizationResult, MinimizerSettings};
pub use monodromy::{MonodromyReport, StabilityVerdict};
pub use path::DiscretePath;

/// Planar vector; positions and velocities are row vectors, rotated by
/// right-multiplication with `R(theta)`.
pub type Vec2 = nalgebra::Vector2<f64>;

pub type Result<T> = std::result::Result<T, Error>;
