use super::nehari_picard::{normalized_iteration, SystemMap};
use super::{BoundaryEvent, FixedPointResult, Outcome, SolveConfig, SolveOutput};
use crate::error::{Error, Result};
use crate::function::GridFunction;
use crate::operators::ProblemSpec;
use crate::par;
use crate::verify::{ball_samples, sphere_samples};

/// Interval width at which the golden-section search for `lambda*` stops.
pub const MONITOR_LAMBDA_TOL: f64 = 1e-8;

/// Sampled `sup |T2(u, v)|_inf` over cone elements of sup-norm `10^-3 .. 10^3`
/// and ball elements.
pub fn estimate_t2_bound(spec: &ProblemSpec, seed: u64, cone_samples: usize, ball_count: usize) -> f64 {
    let shapes = sphere_samples(spec, seed, cone_samples.max(1));
    let balls = ball_samples(spec, seed, ball_count.max(1));
    let amplitudes: Vec<f64> = (-3..=3).map(|k| 10f64.powi(k)).collect();
    let total = shapes.len() * amplitudes.len() * balls.len();
    let norms = par::map_indexed_with_threshold(total, 32, |k| {
        let j = k % balls.len();
        let a = (k / balls.len()) % amplitudes.len();
        let i = k / (balls.len() * amplitudes.len());
        let u = shapes[i].scale(amplitudes[a]);
        spec.apply_t2(&u, &balls[j]).expect("same grid").sup_norm()
    });
    norms.into_iter().fold(0.0, f64::max)
}

fn golden_section(h: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut h1, mut h2) = (h(x1), h(x2));
    while hi - lo > tol {
        if h1 <= h2 {
            hi = x2;
            x2 = x1;
            h2 = h1;
            x1 = hi - ratio * (hi - lo);
            h1 = h(x1);
        } else {
            lo = x1;
            x1 = x2;
            h1 = h2;
            x2 = lo + ratio * (hi - lo);
            h2 = h(x2);
        }
    }
    if h1 <= h2 {
        (x1, h1)
    } else {
        (x2, h2)
    }
}

/// Normalized iteration on the radial extension of `(T1, T2)` to the ball of
/// radius `extended_radius`, watching for boundary witnesses
/// `w = lambda T2(u, w)` with `|w| = R` and `0 < lambda < 1`.
pub fn schaefer_solve(
    spec: &ProblemSpec,
    extended_radius: f64,
    u0: &GridFunction,
    v0: &GridFunction,
    cfg: &SolveConfig,
) -> Result<SolveOutput> {
    let radius = spec.ball().radius;
    if !(extended_radius >= radius) {
        return Err(Error::ExtendedRadiusTooSmall {
            rtilde: extended_radius,
            required: radius,
        });
    }
    let bound = estimate_t2_bound(spec, 0, 16, 4);
    if extended_radius < bound {
        return Err(Error::ExtendedRadiusTooSmall {
            rtilde: extended_radius,
            required: bound,
        });
    }
    let v0_norm = v0.sup_norm();
    if v0_norm > extended_radius {
        return Err(Error::OutsideExtendedBall {
            norm: v0_norm,
            rtilde: extended_radius,
        });
    }
    let tol = cfg.residual_tol;
    let mut monitor = |iteration: usize, _u: &GridFunction, v: &GridFunction, t2: &GridFunction| {
        let v_norm = v.sup_norm();
        if v_norm < radius - tol || v_norm > extended_radius {
            return None;
        }
        // t2 was evaluated at the retracted point w
        let w = if v_norm > radius {
            v.scale(radius / v_norm)
        } else {
            v.clone()
        };
        let gap = |lambda: f64| {
            w.values()
                .iter()
                .zip(t2.values())
                .fold(0.0f64, |m, (a, b)| m.max((a - lambda * b).abs()))
        };
        let (lambda, distance) = golden_section(gap, 0.0, 1.0, MONITOR_LAMBDA_TOL);
        (distance <= tol && lambda > 0.0 && lambda < 1.0).then_some(BoundaryEvent {
            iteration,
            lambda,
            distance,
            v_norm,
        })
    };
    let map = SystemMap::Extended {
        spec,
        radius,
        extended_radius,
    };
    let (u, v, mut trace) = normalized_iteration(&map, u0, v0, cfg, Some(&mut monitor))?;
    let v_norm = v.sup_norm();
    let result = FixedPointResult::certify(spec, u, v, cfg.residual_tol)?;
    if trace.outcome == Outcome::Converged {
        if v_norm > radius + tol {
            trace.outcome = Outcome::BoundaryEvent;
            trace.note = Some(format!("limit has |v| = {v_norm} outside the ball of radius {radius}"));
        } else if !(result.residual <= cfg.residual_tol) {
            trace.outcome = Outcome::MaxIter;
            trace.note = Some("re-evaluated residual exceeds tolerance".into());
        }
    }
    Ok(SolveOutput { result, trace })
}
