use std::io::Write;

use serde::Serialize;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Converged,
    MaxIter,
    BracketFailure,
    BoundaryEvent,
    /// Non-finite iterate.
    Diverged,
    /// `u` reached 0 so the scaling map is undefined.
    TrivialCollapse,
    CorrectorFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub residual_u: f64,
    pub residual_v: f64,
    pub nehari_residual: Option<f64>,
    pub sigma: Option<f64>,
    /// Homotopy parameter, when tracing a continuation.
    pub t: Option<f64>,
}

/// A numerical witness of `w = lambda T2(u, w)` with `|w| = R`, `0 < lambda < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryEvent {
    pub iteration: usize,
    pub lambda: f64,
    pub distance: f64,
    pub v_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveTrace {
    pub records: Vec<IterationRecord>,
    pub events: Vec<BoundaryEvent>,
    pub outcome: Outcome,
    /// Damping actually used.
    pub damping: f64,
    /// Human-readable detail for non-converged outcomes.
    pub note: Option<String>,
}

impl SolveTrace {
    pub(crate) fn new(damping: f64) -> Self {
        SolveTrace {
            records: Vec::new(),
            events: Vec::new(),
            outcome: Outcome::MaxIter,
            damping,
            note: None,
        }
    }

    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    /// CSV with columns `iteration,residual_u,residual_v,nehari_residual,sigma`;
    /// absent values are left empty.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "iteration,residual_u,residual_v,nehari_residual,sigma")?;
        let opt = |x: Option<f64>| x.map(|x| format!("{x:.16e}")).unwrap_or_default();
        for r in &self.records {
            writeln!(
                out,
                "{},{:.16e},{:.16e},{},{}",
                r.iteration,
                r.residual_u,
                r.residual_v,
                opt(r.nehari_residual),
                opt(r.sigma)
            )?;
        }
        Ok(())
    }
}
