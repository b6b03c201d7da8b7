use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::FixedPointResult;
use crate::error::{Error, Result};
use crate::function::{in_cone, GridFunction};
use crate::operators::ProblemSpec;
use crate::par;

/// Largest grid the brute-force oracle accepts.
pub const ORACLE_MAX_NODES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    /// Lattice points per coordinate; `u` spans [0, 2], `v` spans [-R, R].
    pub lattice_points: usize,
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Roots closer than this in sup-distance are merged.
    pub dedup_tol: f64,
    /// Slack for the final cone and ball filter.
    pub membership_tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            lattice_points: 3,
            newton_tol: 1e-12,
            max_newton: 100,
            dedup_tol: 1e-6,
            membership_tol: 1e-9,
        }
    }
}

fn residual_vec(spec: &ProblemSpec, z: &DVector<f64>) -> DVector<f64> {
    let n = spec.grid().len();
    let grid = spec.grid().clone();
    let u = GridFunction::new(grid.clone(), z.rows(0, n).iter().copied().collect()).expect("length n");
    let v = GridFunction::new(grid, z.rows(n, n).iter().copied().collect()).expect("length n");
    let t1 = spec.apply_t1(&u, &v).expect("same grid");
    let t2 = spec.apply_t2(&u, &v).expect("same grid");
    DVector::from_iterator(
        2 * n,
        (0..n)
            .map(|i| z[i] - t1.values()[i])
            .chain((0..n).map(|i| z[n + i] - t2.values()[i])),
    )
}

fn newton(spec: &ProblemSpec, start: DVector<f64>, cfg: &OracleConfig) -> Option<DVector<f64>> {
    let dim = start.len();
    let mut z = start;
    let mut g = residual_vec(spec, &z);
    for _ in 0..cfg.max_newton {
        let norm = g.amax();
        if !norm.is_finite() {
            return None;
        }
        if norm <= cfg.newton_tol {
            return Some(z);
        }
        let mut jac = DMatrix::zeros(dim, dim);
        for k in 0..dim {
            let h = 1e-7 * z[k].abs().max(1.0);
            let mut zh = z.clone();
            zh[k] += h;
            let gh = residual_vec(spec, &zh);
            jac.set_column(k, &((gh - &g) / h));
        }
        let step = jac.lu().solve(&(-&g))?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial = &z + lambda * &step;
            let gt = residual_vec(spec, &trial);
            if gt.amax() < norm {
                z = trial;
                g = gt;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return None;
        }
    }
    (g.amax() <= cfg.newton_tol).then_some(z)
}

/// All distinct fixed points in `K1 x B_R` reached by damped Newton from a
/// lattice of starts. Only meant for grids with at most five nodes.
pub fn oracle_solve(spec: &ProblemSpec, cfg: &OracleConfig) -> Result<Vec<FixedPointResult>> {
    let n = spec.grid().len();
    if n > ORACLE_MAX_NODES {
        return Err(Error::OracleGridTooLarge(n));
    }
    let points = cfg.lattice_points.max(1);
    let radius = spec.ball().radius;
    let axis = |lo: f64, hi: f64| -> Vec<f64> {
        if points == 1 {
            vec![0.5 * (lo + hi)]
        } else {
            (0..points)
                .map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64)
                .collect()
        }
    };
    let u_axis = axis(0.0, 2.0);
    let v_axis = axis(-radius, radius);
    let dim = 2 * n;
    let total = points.pow(dim as u32);
    let roots = par::map_indexed_with_threshold(total, 16, |index| {
        let mut rest = index;
        let start = DVector::from_iterator(
            dim,
            (0..dim).map(|k| {
                let digit = rest % points;
                rest /= points;
                if k < n {
                    u_axis[digit]
                } else {
                    v_axis[digit]
                }
            }),
        );
        newton(spec, start, cfg)
    });

    let grid = spec.grid().clone();
    let mut found: Vec<(GridFunction, GridFunction)> = Vec::new();
    for z in roots.into_iter().flatten() {
        let u = GridFunction::new(grid.clone(), z.rows(0, n).iter().copied().collect())?;
        let v = GridFunction::new(grid.clone(), z.rows(n, n).iter().copied().collect())?;
        let duplicate = found
            .iter()
            .any(|(fu, fv)| fu.sup_distance(&u).unwrap().max(fv.sup_distance(&v).unwrap()) <= cfg.dedup_tol);
        if duplicate {
            continue;
        }
        let cone_ok = in_cone(&u, spec.cone(), cfg.membership_tol)?.member;
        if cone_ok && spec.ball().contains(&v, cfg.membership_tol) {
            found.push((u, v));
        }
    }
    found
        .into_iter()
        .map(|(u, v)| FixedPointResult::certify(spec, u, v, 1e-8))
        .collect()
}
