//! Quick invariant checks run by the `selftest` command.

use std::sync::Arc;

use serde::Serialize;

use crate::error::Result;
use crate::function::{sample_ball, sample_cone, BallSpec, ConeSpec, GridFunction};
use crate::grid::{Grid, QuadratureRule};
use crate::kernel::{Kernel, KernelPreset, Profile};
use crate::nehari::{solve_scaling, PairingFunctional, RootConfig};
use crate::nonlinearity::Nonlinearity;
use crate::operators::{Component, ProblemSpec};
use crate::solver::{nehari_picard_solve, SolveConfig};
use crate::verify::verify_f_property;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfTestCheck {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn manufactured(n: usize) -> Result<ProblemSpec> {
    let grid = Arc::new(Grid::build(n, QuadratureRule::default(), 0.0, 1.0)?);
    let k = Kernel::from_preset(&grid, KernelPreset::Constant { value: 1.0 })?;
    ProblemSpec::new(
        grid.clone(),
        k.clone(),
        k,
        Nonlinearity::power_product(2.0, Profile::Constant(1.0))?,
        Nonlinearity::constant(0.5)?,
        ConeSpec::on_grid(1.0, &grid)?,
        BallSpec::new(1.0)?,
    )
}

fn quadrature() -> Result<SelfTestCheck> {
    let mut worst = 0.0f64;
    for q in 2..=4 {
        let grid = Grid::build(4, QuadratureRule::GaussLegendre { order: q }, 0.0, 1.0)?;
        let degree = 2 * q - 1;
        let values: Vec<f64> = grid.nodes().iter().map(|t| t.powi(degree as i32)).collect();
        let err = (grid.integrate(&values)? - 1.0 / (degree as f64 + 1.0)).abs();
        worst = worst.max(err);
    }
    Ok(SelfTestCheck {
        name: "quadrature_exactness",
        pass: worst <= 1e-13,
        detail: format!("max error {worst:e}"),
    })
}

fn pairing(spec: &ProblemSpec) -> Result<SelfTestCheck> {
    let pairing = PairingFunctional::new(spec.grid().clone());
    let samples: Vec<GridFunction> = (0..10)
        .map(|k| sample_cone(k, spec.cone(), spec.grid(), 1.0 + k as f64))
        .collect::<Result<_>>()?;
    let lambdas: Vec<f64> = (0..21).map(|k| 0.1 * 100f64.powf(k as f64 / 20.0)).collect();
    let mut worst = 0.0f64;
    for u in &samples {
        let norm = u.norm_l2_squared();
        for &lambda in &lambdas {
            let value = pairing.eval(&u.scale(lambda), u)?;
            let expected = (lambda - 1.0) * norm;
            if expected != 0.0 {
                worst = worst.max(((value - expected) / expected).abs());
            }
        }
    }
    let signs = verify_f_property(&pairing, &samples, &lambdas);
    Ok(SelfTestCheck {
        name: "pairing_property",
        pass: signs && worst <= 1e-12,
        detail: format!("max relative error {worst:e}, sign pattern ok: {signs}"),
    })
}

fn homogeneity(spec: &ProblemSpec) -> Result<SelfTestCheck> {
    let cfg = RootConfig::default();
    let mut worst = 0.0f64;
    for k in 0..10u64 {
        let u = sample_cone(100 + k, spec.cone(), spec.grid(), 0.5 + k as f64)?;
        let v = sample_ball(200 + k, spec.ball(), spec.grid());
        let s = solve_scaling(spec, &u, &v, &cfg)?.sigma;
        for t in [0.1, 0.7, 3.0, 10.0] {
            let st = solve_scaling(spec, &u.scale(t), &v, &cfg)?.sigma;
            worst = worst.max((t * st - s).abs() / s);
        }
    }
    Ok(SelfTestCheck {
        name: "scaling_homogeneity",
        pass: worst <= 1e-8,
        detail: format!("max relative defect {worst:e}"),
    })
}

fn retraction(spec: &ProblemSpec) -> Result<SelfTestCheck> {
    let radius = spec.ball().radius;
    let mut identical = true;
    for k in 0..10u64 {
        let u = sample_cone(300 + k, spec.cone(), spec.grid(), 1.0)?;
        let v = sample_ball(400 + k, spec.ball(), spec.grid());
        for which in [Component::First, Component::Second] {
            let raw = spec.apply(which, &u, &v)?;
            let ext = spec.retract_extend(&u, &v, radius, 2.0 * radius, which)?;
            identical &= raw
                .values()
                .iter()
                .zip(ext.values())
                .all(|(a, b)| a.to_bits() == b.to_bits());
        }
    }
    Ok(SelfTestCheck {
        name: "retraction_identity",
        pass: identical,
        detail: format!("bitwise identical inside the ball: {identical}"),
    })
}

fn manufactured_solve(spec: &ProblemSpec) -> Result<SelfTestCheck> {
    let grid = spec.grid().clone();
    let out = nehari_picard_solve(
        spec,
        &GridFunction::constant(grid.clone(), 0.3),
        &GridFunction::zeros(grid.clone()),
        &SolveConfig::default(),
    )?;
    let err_u = out.result.u.sup_distance(&GridFunction::constant(grid.clone(), 1.0))?;
    let err_v = out.result.v.sup_distance(&GridFunction::constant(grid, 0.5))?;
    let pass = out.converged() && out.result.residual <= 1e-10 && err_u <= 1e-8 && err_v <= 1e-8;
    Ok(SelfTestCheck {
        name: "manufactured_fixed_point",
        pass,
        detail: format!(
            "{} iterations, residual {:e}, distance to (1, 0.5) {:e}",
            out.trace.iterations(),
            out.result.residual,
            err_u.max(err_v)
        ),
    })
}

/// Runs every check; an error inside a check is reported as a failure.
pub fn run_selftest() -> Vec<SelfTestCheck> {
    let spec = match manufactured(8) {
        Ok(spec) => spec,
        Err(e) => {
            return vec![SelfTestCheck {
                name: "setup",
                pass: false,
                detail: e.to_string(),
            }]
        }
    };
    let checks: [(&'static str, Result<SelfTestCheck>); 5] = [
        ("quadrature_exactness", quadrature()),
        ("pairing_property", pairing(&spec)),
        ("scaling_homogeneity", homogeneity(&spec)),
        ("retraction_identity", retraction(&spec)),
        ("manufactured_fixed_point", manufactured_solve(&spec)),
    ];
    checks
        .into_iter()
        .map(|(name, r)| {
            r.unwrap_or_else(|e| SelfTestCheck {
                name,
                pass: false,
                detail: e.to_string(),
            })
        })
        .collect()
}
