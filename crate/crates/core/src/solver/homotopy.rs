use super::{damp, same_grid_or_err, sup_dist, FixedPointResult, IterationRecord, Outcome, SolveConfig, SolveTrace};
use crate::error::{Error, Result};
use crate::function::{GridFunction, MEMBERSHIP_TOL};
use crate::operators::ProblemSpec;

/// Corrected fixed point of `H(., t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathPoint {
    pub t: f64,
    pub u: GridFunction,
    pub v: GridFunction,
    /// Residual with respect to `H(., t)`.
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomotopyOutput {
    pub path: Vec<PathPoint>,
    /// Certified endpoint at `t = 1`; `None` when a corrector failed first.
    pub endpoint: Option<FixedPointResult>,
    pub trace: SolveTrace,
    pub failed_at: Option<f64>,
}

/// Follows `H((u,v), t) = (t T1(u,v), t T2(u,v) + (1-t) omega)` from the
/// constant map at `t = 0` to `(T1, T2)` at `t = 1` on a uniform grid of
/// `cfg.homotopy_steps` steps, Picard-correcting at each step.
pub fn homotopy_continuation(spec: &ProblemSpec, omega: &GridFunction, cfg: &SolveConfig) -> Result<HomotopyOutput> {
    cfg.validate()?;
    same_grid_or_err(spec, omega)?;
    if !spec.ball().contains(omega, MEMBERSHIP_TOL) {
        return Err(Error::InvalidParameter {
            name: "omega",
            reason: format!(
                "sup-norm {} exceeds the ball radius {}",
                omega.sup_norm(),
                spec.ball().radius
            ),
        });
    }
    let theta = cfg.damping;
    let mut trace = SolveTrace::new(theta);
    let mut u = GridFunction::zeros(spec.grid().clone());
    let mut v = omega.clone();
    let mut path = vec![PathPoint {
        t: 0.0,
        u: u.clone(),
        v: v.clone(),
        residual: 0.0,
        iterations: 0,
    }];
    let steps = cfg.homotopy_steps;
    let mut counter = 0usize;
    for k in 1..=steps {
        let t = k as f64 / steps as f64;
        let mut converged = false;
        let mut residual = f64::INFINITY;
        let mut iterations = 0;
        for iteration in 0..=cfg.max_iter {
            let h1 = spec.apply_t1(&u, &v)?.scale(t);
            let t2 = spec.apply_t2(&u, &v)?;
            let h2 = GridFunction::new(
                spec.grid().clone(),
                t2.values()
                    .iter()
                    .zip(omega.values())
                    .map(|(a, w)| t * a + (1.0 - t) * w)
                    .collect(),
            )?;
            let residual_u = sup_dist(&u, &h1);
            let residual_v = sup_dist(&v, &h2);
            residual = residual_u.max(residual_v);
            trace.records.push(IterationRecord {
                iteration: counter,
                residual_u,
                residual_v,
                nehari_residual: None,
                sigma: None,
                t: Some(t),
            });
            counter += 1;
            iterations = iteration;
            if !residual.is_finite() {
                break;
            }
            if residual <= cfg.residual_tol {
                converged = true;
                break;
            }
            if iteration == cfg.max_iter {
                break;
            }
            u = damp(&u, &h1, theta);
            v = damp(&v, &h2, theta);
        }
        if !converged {
            trace.outcome = Outcome::CorrectorFailure;
            trace.note = Some(format!("corrector failed at t = {t} (residual {residual:e})"));
            return Ok(HomotopyOutput {
                path,
                endpoint: None,
                trace,
                failed_at: Some(t),
            });
        }
        path.push(PathPoint {
            t,
            u: u.clone(),
            v: v.clone(),
            residual,
            iterations,
        });
    }
    let endpoint = FixedPointResult::certify(spec, u, v, cfg.residual_tol)?;
    trace.outcome = if endpoint.residual <= cfg.residual_tol {
        Outcome::Converged
    } else {
        trace.note = Some("re-evaluated endpoint residual exceeds tolerance".into());
        Outcome::MaxIter
    };
    Ok(HomotopyOutput {
        path,
        endpoint: Some(endpoint),
        trace,
        failed_at: None,
    })
}
