use super::picard::effective_damping;
use super::{
    damp, same_grid_or_err, sup_dist, BoundaryEvent, FixedPointResult, IterationRecord, Outcome, SolveConfig,
    SolveOutput, SolveTrace,
};
use crate::error::{Error, Result};
use crate::function::GridFunction;
use crate::nehari::{self, ScalingResult};
use crate::operators::{retract, Component, ProblemSpec};

/// The operator pair a normalized iteration runs on: either `(T1, T2)` or the
/// radial extension outside `B_R`.
pub(super) enum SystemMap<'a> {
    Plain(&'a ProblemSpec),
    Extended {
        spec: &'a ProblemSpec,
        radius: f64,
        extended_radius: f64,
    },
}

impl SystemMap<'_> {
    fn spec(&self) -> &ProblemSpec {
        match self {
            SystemMap::Plain(spec) => spec,
            SystemMap::Extended { spec, .. } => spec,
        }
    }

    fn apply(&self, which: Component, u: &GridFunction, v: &GridFunction) -> Result<GridFunction> {
        match *self {
            SystemMap::Plain(spec) => spec.apply(which, u, v),
            SystemMap::Extended {
                spec,
                radius,
                extended_radius,
            } => spec.retract_extend(u, v, radius, extended_radius, which),
        }
    }

    fn scaling(&self, u: &GridFunction, v: &GridFunction, cfg: &SolveConfig) -> Result<ScalingResult> {
        match *self {
            SystemMap::Plain(spec) => nehari::solve_scaling(spec, u, v, &cfg.root),
            SystemMap::Extended {
                spec,
                radius,
                extended_radius,
            } => {
                let w = retract(v, radius, extended_radius)?;
                nehari::solve_scaling(spec, u, w.as_ref().unwrap_or(v), &cfg.root)
            }
        }
    }
}

/// Hook run on each normalized iterate `(u_hat, v)` with `T2~(u_hat, v)`.
pub(super) type Monitor<'m> =
    dyn FnMut(usize, &GridFunction, &GridFunction, &GridFunction) -> Option<BoundaryEvent> + 'm;

pub(super) fn normalized_iteration(
    map: &SystemMap<'_>,
    u0: &GridFunction,
    v0: &GridFunction,
    cfg: &SolveConfig,
    monitor: Option<&mut Monitor<'_>>,
) -> Result<(GridFunction, GridFunction, SolveTrace)> {
    cfg.validate()?;
    let spec = map.spec();
    same_grid_or_err(spec, u0)?;
    same_grid_or_err(spec, v0)?;
    if u0.is_zero() {
        return Err(Error::ZeroFunction);
    }
    let theta = effective_damping(spec, u0, v0, cfg)?;
    let mut trace = SolveTrace::new(theta);
    let mut monitor = monitor;
    let mut u = u0.clone();
    let mut v = v0.clone();
    for iteration in 0..=cfg.max_iter {
        if u.is_zero() || u.sup_norm() < 1e-200 {
            trace.outcome = Outcome::TrivialCollapse;
            trace.note = Some(format!("u vanished at iteration {iteration}"));
            break;
        }
        let sigma = match map.scaling(&u, &v, cfg) {
            Ok(s) => s.sigma,
            Err(Error::NoBracket { lo, hi }) => {
                trace.outcome = Outcome::BracketFailure;
                trace.note = Some(format!(
                    "no sign change of phi on [{lo:e}, {hi:e}] at iteration {iteration}"
                ));
                break;
            }
            Err(Error::NonFinite(what)) => {
                trace.outcome = Outcome::Diverged;
                trace.note = Some(format!("non-finite {what} at iteration {iteration}"));
                break;
            }
            Err(e) => return Err(e),
        };
        let u_hat = u.scale(sigma);
        let t1 = map.apply(Component::First, &u_hat, &v)?;
        let t2 = map.apply(Component::Second, &u_hat, &v)?;
        let residual_u = sup_dist(&u_hat, &t1);
        let residual_v = sup_dist(&v, &t2);
        if !(residual_u.is_finite() && residual_v.is_finite()) {
            trace.outcome = Outcome::Diverged;
            trace.note = Some(format!("non-finite residual at iteration {iteration}"));
            break;
        }
        let nehari_residual = nehari::eval_f(&t1, &u_hat)?;
        trace.records.push(IterationRecord {
            iteration,
            residual_u,
            residual_v,
            nehari_residual: Some(nehari_residual),
            sigma: Some(sigma),
            t: None,
        });
        if let Some(hook) = monitor.as_deref_mut() {
            if let Some(event) = hook(iteration, &u_hat, &v, &t2) {
                trace.events.push(event);
            }
        }
        if residual_u.max(residual_v) <= cfg.residual_tol {
            trace.outcome = Outcome::Converged;
            u = u_hat;
            break;
        }
        if iteration == cfg.max_iter {
            trace.outcome = Outcome::MaxIter;
            u = u_hat;
            break;
        }
        u = damp(&u_hat, &t1, theta);
        v = damp(&v, &t2, theta);
    }
    Ok((u, v, trace))
}

/// Normalized iteration: each step rescales `u` by `s(u, v)` onto the
/// Nehari-type set before applying `(T1, T2)`.
pub fn nehari_picard_solve(
    spec: &ProblemSpec,
    u0: &GridFunction,
    v0: &GridFunction,
    cfg: &SolveConfig,
) -> Result<SolveOutput> {
    let (u, v, mut trace) = normalized_iteration(&SystemMap::Plain(spec), u0, v0, cfg, None)?;
    let result = FixedPointResult::certify(spec, u, v, cfg.residual_tol)?;
    if trace.outcome == Outcome::Converged && !(result.residual <= cfg.residual_tol) {
        trace.outcome = Outcome::MaxIter;
        trace.note = Some("re-evaluated residual exceeds tolerance".into());
    }
    Ok(SolveOutput { result, trace })
}
