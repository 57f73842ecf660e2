//! Relaxed alternating projections between two affine subspaces, analyzed as
//! a variable-step Landweber iteration on the restricted projection
//! `Q = P_{V^⊥}|_U`.
//!
//! The pieces, bottom up:
//!
//! - [`hilbert`]: dense linear algebra on `R^d` (SVD, pseudoinverse, bases).
//! - [`subspace`]: affine subspaces, projections and relaxed projections.
//! - [`angles`]: principal angles, the minimal angle and the Friedrichs angle.
//! - [`operator`]: `Q`, its adjoint, pseudoinverse and least-squares set.
//! - [`schedule`]: relaxation schedules and their admissibility diagnostics.
//! - [`engine`]: the iteration itself, with traces and rate estimates.
//! - [`cli`]: scenario files, experiment studies and output writers.

pub mod angles;
pub mod cli;
pub mod engine;
pub mod error;
pub mod hilbert;
pub mod operator;
pub mod schedule;
pub mod subspace;

pub use engine::{IterationTrace, Problem, RunOptions, StopReason};
pub use error::{Error, Result};
pub use hilbert::{Matrix, Vector};
pub use operator::RestrictedProjector;
pub use schedule::Schedule;
pub use subspace::{AffineSubspace, ProblemGeometry};
