//! Fixed point searches for `(u, v) = (T1(u, v), T2(u, v))`.
//!
//! No method here is guaranteed to converge. Whatever limit a method reaches
//! is re-checked from scratch before it is reported as converged.

mod homotopy;
mod nehari_picard;
mod oracle;
mod picard;
mod schaefer;
mod trace;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use homotopy::{homotopy_continuation, HomotopyOutput, PathPoint};
pub use nehari_picard::nehari_picard_solve;
pub use oracle::{oracle_solve, OracleConfig};
pub use picard::{picard_solve, recommend_damping};
pub use schaefer::{estimate_t2_bound, schaefer_solve, MONITOR_LAMBDA_TOL};
pub use trace::{BoundaryEvent, IterationRecord, Outcome, SolveTrace};

use crate::error::{Error, Result};
use crate::function::GridFunction;
use crate::nehari::{self, RootConfig};
use crate::operators::ProblemSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Picard,
    #[default]
    NehariPicard,
    Homotopy,
    Schaefer,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveConfig {
    pub method: Method,
    pub max_iter: usize,
    /// Relaxation factor in (0, 1].
    pub damping: f64,
    pub residual_tol: f64,
    pub homotopy_steps: usize,
    /// Lower the damping when the sampled Lipschitz estimate exceeds 1.
    pub auto_damping: bool,
    pub root: RootConfig,
    pub oracle: OracleConfig,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            method: Method::NehariPicard,
            max_iter: 200,
            damping: 1.0,
            residual_tol: 1e-10,
            homotopy_steps: 20,
            auto_damping: false,
            root: RootConfig::default(),
            oracle: OracleConfig::default(),
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.residual_tol > 0.0) {
            return Err(Error::InvalidParameter {
                name: "residual_tol",
                reason: format!("must be positive, got {}", self.residual_tol),
            });
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "damping",
                reason: format!("must lie in (0, 1], got {}", self.damping),
            });
        }
        if self.homotopy_steps == 0 {
            return Err(Error::InvalidParameter {
                name: "homotopy_steps",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// A computed fixed point candidate together with its certification.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointResult {
    pub u: GridFunction,
    pub v: GridFunction,
    /// `max(|u - T1(u,v)|, |v - T2(u,v)|)`, recomputed from scratch.
    pub residual: f64,
    /// Whether `|F(T1(u,v), u)| <= tol (1 + int u^2)` with `u != 0`.
    pub on_ub: bool,
    /// `|u|_inf <= tol`.
    pub trivial_u: bool,
}

/// `max(|u - T1(u,v)|_inf, |v - T2(u,v)|_inf)`.
pub fn fixed_point_residual(spec: &ProblemSpec, u: &GridFunction, v: &GridFunction) -> Result<f64> {
    let t1 = spec.apply_t1(u, v)?;
    let t2 = spec.apply_t2(u, v)?;
    Ok(u.sup_distance(&t1)?.max(v.sup_distance(&t2)?))
}

impl FixedPointResult {
    /// Certifies `(u, v)` against the true operators.
    pub fn certify(spec: &ProblemSpec, u: GridFunction, v: GridFunction, tol: f64) -> Result<Self> {
        let residual = fixed_point_residual(spec, &u, &v)?;
        let trivial_u = u.sup_norm() <= tol;
        let on_ub = !u.is_zero()
            && nehari::nehari_residual(spec, &u, &v)
                .map(|r| nehari::on_nehari_set(r, &u, tol))
                .unwrap_or(false);
        Ok(FixedPointResult {
            u,
            v,
            residual,
            on_ub,
            trivial_u,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutput {
    pub result: FixedPointResult,
    pub trace: SolveTrace,
}

impl SolveOutput {
    pub fn converged(&self) -> bool {
        self.trace.outcome == Outcome::Converged
    }
}

pub(crate) fn sup_dist(a: &GridFunction, b: &GridFunction) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub(crate) fn damp(current: &GridFunction, target: &GridFunction, theta: f64) -> GridFunction {
    current.lerp(target, theta).expect("same grid")
}

pub(crate) fn same_grid_or_err(spec: &ProblemSpec, w: &GridFunction) -> Result<()> {
    if Arc::ptr_eq(w.grid(), spec.grid()) || **w.grid() == **spec.grid() {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}
