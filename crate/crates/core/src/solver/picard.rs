use super::{
    damp, same_grid_or_err, sup_dist, FixedPointResult, IterationRecord, Outcome, SolveConfig, SolveOutput, SolveTrace,
};
use crate::error::Result;
use crate::function::GridFunction;
use crate::nehari;
use crate::operators::ProblemSpec;

/// Divided-difference estimate of the Lipschitz constant of `(T1, T2)` at
/// `(u, v)`, and the damping it suggests: `min(1, 1/L)`.
pub fn recommend_damping(spec: &ProblemSpec, u: &GridFunction, v: &GridFunction) -> Result<(f64, f64)> {
    let scale = 1.0f64.max(u.sup_norm()).max(v.sup_norm());
    let h = 1e-6 * scale;
    let grid = spec.grid();
    let bump = GridFunction::from_fn(grid.clone(), |t| h * (0.5 + t));
    let u2 = GridFunction::new(
        grid.clone(),
        u.values().iter().zip(bump.values()).map(|(a, b)| a + b).collect(),
    )?;
    let v2 = GridFunction::new(
        grid.clone(),
        v.values().iter().zip(bump.values()).map(|(a, b)| a + b).collect(),
    )?;
    let d_in = sup_dist(u, &u2).max(sup_dist(v, &v2));
    let d_out = sup_dist(&spec.apply_t1(u, v)?, &spec.apply_t1(&u2, &v2)?)
        .max(sup_dist(&spec.apply_t2(u, v)?, &spec.apply_t2(&u2, &v2)?));
    let lipschitz = d_out / d_in;
    let theta = if lipschitz > 1.0 { 1.0 / lipschitz } else { 1.0 };
    Ok((lipschitz, theta))
}

pub(super) fn effective_damping(
    spec: &ProblemSpec,
    u: &GridFunction,
    v: &GridFunction,
    cfg: &SolveConfig,
) -> Result<f64> {
    if cfg.auto_damping {
        let (_, theta) = recommend_damping(spec, u, v)?;
        Ok(cfg.damping.min(theta))
    } else {
        Ok(cfg.damping)
    }
}

/// Damped direct iteration
/// `(u, v) <- ((1-θ) u + θ T1(u,v), (1-θ) v + θ T2(u,v))`.
pub fn picard_solve(
    spec: &ProblemSpec,
    u0: &GridFunction,
    v0: &GridFunction,
    cfg: &SolveConfig,
) -> Result<SolveOutput> {
    cfg.validate()?;
    same_grid_or_err(spec, u0)?;
    same_grid_or_err(spec, v0)?;
    let theta = effective_damping(spec, u0, v0, cfg)?;
    let mut trace = SolveTrace::new(theta);
    let mut u = u0.clone();
    let mut v = v0.clone();
    for iteration in 0..=cfg.max_iter {
        let t1 = spec.apply_t1(&u, &v)?;
        let t2 = spec.apply_t2(&u, &v)?;
        let residual_u = sup_dist(&u, &t1);
        let residual_v = sup_dist(&v, &t2);
        if !(residual_u.is_finite() && residual_v.is_finite()) {
            trace.outcome = Outcome::Diverged;
            trace.note = Some(format!("non-finite residual at iteration {iteration}"));
            break;
        }
        let nehari_residual = (!u.is_zero()).then(|| nehari::eval_f(&t1, &u).expect("same grid"));
        trace.records.push(IterationRecord {
            iteration,
            residual_u,
            residual_v,
            nehari_residual,
            sigma: None,
            t: None,
        });
        if residual_u.max(residual_v) <= cfg.residual_tol {
            trace.outcome = Outcome::Converged;
            break;
        }
        if iteration == cfg.max_iter {
            trace.outcome = Outcome::MaxIter;
            break;
        }
        u = damp(&u, &t1, theta);
        v = damp(&v, &t2, theta);
    }
    let result = FixedPointResult::certify(spec, u, v, cfg.residual_tol)?;
    if trace.outcome == Outcome::Converged && !(result.residual <= cfg.residual_tol) {
        trace.outcome = Outcome::MaxIter;
        trace.note = Some("re-evaluated residual exceeds tolerance".into());
    }
    Ok(SolveOutput { result, trace })
}
