//! Nehari-type fixed point computations for systems of Hammerstein integral
//! equations
//!
//! ```text
//! u(t) = int_0^1 k1(t, s) f(u(s), v(s)) ds
//! v(t) = int_0^1 k2(t, s) g(u(s), v(s)) ds
//! ```
//!
//! with `u` in the cone `K1` and `v` in a sup-norm ball. The crate discretizes
//! the system by Nyström quadrature, computes the scaling map `s(u, v)` onto
//! the set where `F(T1(u, v), u) = 0`, checks the structural hypotheses on the
//! kernels and nonlinearities, and searches for fixed points.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod function;
pub mod grid;
pub mod kernel;
pub mod nehari;
pub mod nonlinearity;
pub mod operators;
pub mod par;
pub mod report;
pub mod root;
pub mod selftest;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use function::{in_cone, sample_ball, sample_cone, BallSpec, ConeMembership, ConeSpec, GridFunction};
pub use grid::{Grid, QuadratureRule};
pub use kernel::{Kernel, KernelPreset, Profile};
pub use nehari::{RootConfig, ScalingResult};
pub use nonlinearity::{Nonlinearity, ShapeArg};
pub use operators::{Component, ProblemConstants, ProblemSpec};
