//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails.

use std::sync::Arc;
use std::time::{Duration, Instant};

use nehari_fp::function::MEMBERSHIP_TOL;
use nehari_fp::nehari::{nehari_residual, solve_scaling, PairingFunctional};
use nehari_fp::solver::{
    homotopy_continuation, nehari_picard_solve, oracle_solve, picard_solve, schaefer_solve, FixedPointResult,
    OracleConfig, Outcome, SolveConfig,
};
use nehari_fp::verify::{check_invariance, verify_all, verify_f_property, SamplingConfig, Status};
use nehari_fp::{
    in_cone, sample_ball, sample_cone, BallSpec, Component, ConeSpec, Grid, GridFunction, Kernel, KernelPreset,
    Nonlinearity, ProblemSpec, Profile, QuadratureRule, RootConfig, ShapeArg,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check, Duration);
type Shape = (&'static str, fn(f64) -> f64);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn unit_kernel(grid: &Grid) -> Kernel {
    Kernel::from_preset(grid, KernelPreset::Constant { value: 1.0 }).unwrap()
}

fn build(grid: Arc<Grid>, k1: Kernel, k2: Kernel, f: Nonlinearity, g: Nonlinearity, c1: f64, r: f64) -> ProblemSpec {
    let cone = ConeSpec::on_grid(c1, &grid).unwrap();
    ProblemSpec::new(grid, k1, k2, f, g, cone, BallSpec::new(r).unwrap()).unwrap()
}

/// `k1 = k2 = 1`, `f = x^2`, `g = 0.5` on `[0, 1]` with `c1 = 1`, `R = 1`.
fn manufactured(grid: Grid) -> ProblemSpec {
    let grid = Arc::new(grid);
    let k = unit_kernel(&grid);
    build(
        grid,
        k.clone(),
        k,
        Nonlinearity::power_product(2.0, Profile::Constant(1.0)).unwrap(),
        Nonlinearity::constant(0.5).unwrap(),
        1.0,
        1.0,
    )
}

/// Kernel `k1(t, s) = 1 + t^2` has envelope 2 and Harnack constant
/// `(1 + a^2) / 2` on `[a, b] = [0.25, 0.75]`.
fn structured() -> ProblemSpec {
    let grid = Arc::new(Grid::build(16, QuadratureRule::default(), 0.25, 0.75).unwrap());
    let k1 = Kernel::from_preset(
        &grid,
        KernelPreset::SeparableProduct {
            left: Profile::OnePlusSquare,
            right: Profile::Constant(1.0),
        },
    )
    .unwrap();
    let k2 = Kernel::from_preset(
        &grid,
        KernelPreset::SeparableProduct {
            left: Profile::TwoPlusSin,
            right: Profile::Constant(1.0),
        },
    )
    .unwrap();
    build(
        grid,
        k1,
        k2,
        Nonlinearity::power_product(2.0, Profile::TwoPlusSin).unwrap(),
        Nonlinearity::bounded_g(0.3, Profile::Logistic, ShapeArg::Y).unwrap(),
        0.5,
        1.0,
    )
}

fn plain_sum(w: &[f64], values: impl Iterator<Item = f64>) -> f64 {
    w.iter().zip(values).map(|(w, v)| w * v).sum()
}

fn criterion_1() -> Check {
    let spec = structured();
    let grid = spec.grid().clone();
    let pairing = PairingFunctional::new(grid.clone());
    let lambdas: Vec<f64> = (0..21).map(|k| 0.1 * 100f64.powf(k as f64 / 20.0)).collect();
    let mut lambdas = lambdas;
    lambdas[10] = 1.0;
    let samples: Vec<GridFunction> = (0..50u64)
        .map(|k| sample_cone(k, spec.cone(), &grid, 0.01 + 0.4 * k as f64).unwrap())
        .collect();
    let mut worst = 0.0f64;
    for u in &samples {
        ensure(
            ok(in_cone(u, spec.cone(), MEMBERSHIP_TOL))?.member && !u.is_zero(),
            "sample outside K1",
        )?;
        let norm = plain_sum(grid.weights(), u.values().iter().map(|x| x * x));
        for &lambda in &lambdas {
            let value = ok(pairing.eval(&u.scale(lambda), u))?;
            let expected = (lambda - 1.0) * norm;
            if lambda == 1.0 {
                ensure(value.abs() <= 1e-12 * norm, format!("F(u,u) = {value:e}"))?;
            } else {
                worst = worst.max(((value - expected) / expected).abs());
            }
        }
    }
    ensure(worst <= 1e-12, format!("max relative error {worst:e}"))?;
    ensure(
        verify_f_property(&pairing, &samples, &lambdas),
        "sign change away from lambda = 1",
    )?;
    Ok(format!("max relative error {worst:.2e}"))
}

fn criterion_2() -> Check {
    let spec = structured();
    let grid = spec.grid().clone();
    let cfg = RootConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for k in 0..200u64 {
        let amplitude = 10f64.powf(rng.random_range(-1.0..1.0));
        let u = sample_cone(1000 + k, spec.cone(), &grid, amplitude).unwrap();
        let v = sample_ball(2000 + k, spec.ball(), &grid);
        let t = rng.random_range(0.1..=10.0);
        let s = ok(solve_scaling(&spec, &u, &v, &cfg))?.sigma;
        let st = ok(solve_scaling(&spec, &u.scale(t), &v, &cfg))?.sigma;
        let defect = (t * st - s).abs() / s;
        ensure(defect <= 1e-8, format!("sample {k}: t = {t}, defect {defect:e}"))?;
        worst = worst.max(defect);
    }
    Ok(format!("max relative defect {worst:.2e}"))
}

fn criterion_3() -> Check {
    let mut worst = 0.0f64;
    for p in [2.0f64, 3.0] {
        // order q is exact to degree 2q - 1 >= 2p
        let q = p as usize + 1;
        let grid = Arc::new(Grid::build(4, QuadratureRule::GaussLegendre { order: q }, 0.0, 1.0).unwrap());
        let k = unit_kernel(&grid);
        let spec = build(
            grid.clone(),
            k.clone(),
            k,
            Nonlinearity::power_product(p, Profile::Constant(1.0)).unwrap(),
            Nonlinearity::constant(0.5).unwrap(),
            1.0,
            1.0,
        );
        let v = GridFunction::zeros(grid.clone());
        let cases: [Shape; 3] = [("1", |_| 1.0), ("2", |_| 2.0), ("t", |t| t)];
        for (name, shape) in cases {
            let u = GridFunction::from_fn(grid.clone(), shape);
            // closed form with exact moments of the profile
            let (m2, mp, m1) = match name {
                "1" => (1.0, 1.0, 1.0),
                "2" => (4.0, 2f64.powf(p), 2.0),
                _ => (1.0 / 3.0, 1.0 / (p + 1.0), 0.5),
            };
            let expected = (m2 / (mp * m1)).powf(1.0 / (p - 1.0));
            let sigma = ok(solve_scaling(&spec, &u, &v, &RootConfig::default()))?.sigma;
            let err = (sigma - expected).abs();
            ensure(err <= 1e-8, format!("p = {p}, u = {name}: sigma {sigma} vs {expected}"))?;
            worst = worst.max(err);
        }
        let t = GridFunction::from_fn(grid.clone(), |t| t);
        if p == 2.0 {
            let s = ok(solve_scaling(&spec, &t, &v, &RootConfig::default()))?.sigma;
            ensure((s - 2.0).abs() <= 1e-8, format!("s(t) = {s}, expected 2"))?;
        }
        let s2 = ok(solve_scaling(
            &spec,
            &GridFunction::constant(grid, 2.0),
            &v,
            &RootConfig::default(),
        ))?
        .sigma;
        ensure((s2 - 0.5).abs() <= 1e-8, format!("s(2) = {s2}, expected 1/2"))?;
    }
    Ok(format!("max abs error {worst:.2e}"))
}

fn criterion_4() -> Check {
    let spec = manufactured(Grid::build(16, QuadratureRule::default(), 0.0, 1.0).unwrap());
    let grid = spec.grid().clone();
    let cfg = SolveConfig {
        max_iter: 50,
        ..SolveConfig::default()
    };
    let out = ok(nehari_picard_solve(
        &spec,
        &GridFunction::constant(grid.clone(), 0.3),
        &GridFunction::zeros(grid.clone()),
        &cfg,
    ))?;
    let r = &out.result;
    ensure(out.converged(), format!("outcome {:?}", out.trace.outcome))?;
    ensure(
        out.trace.iterations() <= 50,
        format!("{} iterations", out.trace.iterations()),
    )?;
    ensure(r.residual <= 1e-10, format!("residual {:e}", r.residual))?;
    let du = r.u.values().iter().fold(0.0f64, |m, x| m.max((x - 1.0).abs()));
    let dv = r.v.values().iter().fold(0.0f64, |m, x| m.max((x - 0.5).abs()));
    ensure(
        du <= 1e-10 && dv <= 1e-10,
        format!("distance to (1, 0.5): {du:e}, {dv:e}"),
    )?;
    let nr = ok(nehari_residual(&spec, &r.u, &r.v))?;
    ensure(nr.abs() <= 1e-10, format!("nehari residual {nr:e}"))?;
    let s = ok(solve_scaling(&spec, &r.u, &r.v, &RootConfig::default()))?.sigma;
    ensure((s - 1.0).abs() <= 1e-8, format!("s = {s}"))?;
    ensure(r.on_ub && !r.trivial_u, "flags")?;
    Ok(format!(
        "{} iterations, residual {:.2e}, |nehari| {:.2e}",
        out.trace.iterations(),
        r.residual,
        nr.abs()
    ))
}

fn sup_gap(a: &FixedPointResult, u: &GridFunction, v: &GridFunction) -> f64 {
    a.u.sup_distance(u).unwrap().max(a.v.sup_distance(v).unwrap())
}

fn criterion_5() -> Check {
    let spec = manufactured(Grid::build(2, QuadratureRule::Trapezoid, 0.0, 1.0).unwrap());
    let grid = spec.grid().clone();
    ensure(grid.len() == 3, "expected a 3-node grid")?;
    let roots = ok(oracle_solve(&spec, &OracleConfig::default()))?;
    let zero = GridFunction::zeros(grid.clone());
    let one = GridFunction::constant(grid.clone(), 1.0);
    let half = GridFunction::constant(grid.clone(), 0.5);
    for (name, u) in [("(0, 0.5)", &zero), ("(1, 0.5)", &one)] {
        ensure(
            roots.iter().any(|r| sup_gap(r, u, &half) <= 1e-6),
            format!("oracle missed {name}"),
        )?;
    }
    let cfg = SolveConfig::default();
    let solved = [
        ok(nehari_picard_solve(
            &spec,
            &GridFunction::constant(grid.clone(), 0.3),
            &zero,
            &cfg,
        ))?,
        ok(picard_solve(&spec, &zero, &zero, &cfg))?,
        ok(picard_solve(
            &spec,
            &GridFunction::constant(grid.clone(), 0.9),
            &zero,
            &cfg,
        ))?,
    ];
    let mut compared = 0;
    for out in solved.iter().filter(|o| o.converged()) {
        let best = roots
            .iter()
            .map(|r| sup_gap(r, &out.result.u, &out.result.v))
            .fold(f64::INFINITY, f64::min);
        ensure(
            best <= 1e-6,
            format!("solver point {best:e} away from every oracle root"),
        )?;
        compared += 1;
    }
    let homotopy = ok(homotopy_continuation(&spec, &zero, &cfg))?;
    if let Some(end) = homotopy.endpoint {
        let best = roots
            .iter()
            .map(|r| sup_gap(r, &end.u, &end.v))
            .fold(f64::INFINITY, f64::min);
        ensure(
            best <= 1e-6,
            format!("homotopy endpoint {best:e} away from every oracle root"),
        )?;
        compared += 1;
    }
    ensure(compared > 0, "no solver converged")?;
    Ok(format!(
        "{} oracle roots, {compared} solver points matched",
        roots.len()
    ))
}

fn criterion_6() -> Check {
    let grid = Arc::new(Grid::build(16, QuadratureRule::default(), 0.0, 1.0).unwrap());
    let k = unit_kernel(&grid);
    let good = build(
        grid.clone(),
        k.clone(),
        k.clone(),
        Nonlinearity::power_product(2.0, Profile::TwoPlusSin).unwrap(),
        Nonlinearity::constant(0.4).unwrap(),
        1.0,
        1.0,
    );
    let cfg = SamplingConfig {
        seed: 6,
        ..SamplingConfig::default()
    };
    let report = verify_all(&good, &cfg);
    for key in ["H1", "H2", "H3", "H4", "H5"] {
        let h = &report.hypotheses[key];
        ensure(h.status == Status::Pass, format!("{key}: {:?}", h))?;
        ensure(h.margin.is_finite(), format!("{key}: margin {}", h.margin))?;
    }
    let again = verify_all(&good, &cfg);
    ensure(report == again, "report differs between runs with the same seed")?;

    let linear = build(
        grid,
        k.clone(),
        k,
        Nonlinearity::linear_gain(5.0).unwrap(),
        Nonlinearity::constant(0.4).unwrap(),
        1.0,
        1.0,
    );
    ensure((linear.constants().alpha1 - 1.0).abs() < 1e-15, "alpha1 != 1")?;
    let bad = verify_all(&linear, &cfg);
    ensure(
        bad.status("H2") == Some(Status::Fail),
        format!("H2: {:?}", bad.hypotheses["H2"]),
    )?;
    Ok(format!(
        "H2 margin {:.3e}, H3 margin {:.3e}, H5 margin {:.3e}; f = 5x fails H2",
        report.hypotheses["H2"].margin, report.hypotheses["H3"].margin, report.hypotheses["H5"].margin
    ))
}

fn criterion_7() -> Check {
    let spec = structured();
    let report = verify_all(
        &spec,
        &SamplingConfig {
            cone_samples: 4,
            ball_samples: 2,
            ..SamplingConfig::default()
        },
    );
    ensure(report.status("H1") == Some(Status::Pass), "spec does not pass H1")?;
    ensure(report.status("H5") == Some(Status::Pass), "spec does not pass H5")?;
    let grid = spec.grid();
    let w = grid.weights();
    let alpha3 = (0..grid.len())
        .map(|i| plain_sum(w, (0..grid.len()).map(|j| spec.k2().at(i, j))))
        .fold(0.0f64, f64::max);
    let alpha = 0.3;
    let inv = check_invariance(&spec, 7, 500);
    ensure(inv.samples == 500, "sample count")?;
    ensure(
        inv.min_cone_margin >= -1e-10,
        format!("cone margin {:e}", inv.min_cone_margin),
    )?;
    let bound = alpha * alpha3 * (1.0 + 1e-12);
    ensure(
        inv.max_t2_norm <= bound,
        format!("|T2| {} > {}", inv.max_t2_norm, bound),
    )?;
    Ok(format!(
        "min cone margin {:.3e}, max |T2| {:.6} <= {:.6}",
        inv.min_cone_margin, inv.max_t2_norm, bound
    ))
}

fn criterion_8() -> Check {
    let spec = manufactured(Grid::build(16, QuadratureRule::default(), 0.0, 1.0).unwrap());
    let grid = spec.grid().clone();
    let cfg = SolveConfig::default();
    let omegas = [
        GridFunction::zeros(grid.clone()),
        GridFunction::from_fn(grid.clone(), |t| 0.8 * (3.0 * t).cos()),
        sample_ball(8, spec.ball(), &grid),
    ];
    let mut worst = 0.0f64;
    for omega in &omegas {
        let out = ok(homotopy_continuation(&spec, omega, &cfg))?;
        let start = &out.path[0];
        ensure(start.t == 0.0 && start.iterations == 0, "t = 0 point was iterated")?;
        ensure(start.u.values().iter().all(|&x| x == 0.0), "u != 0 at t = 0")?;
        ensure(start.v.values() == omega.values(), "v != omega at t = 0")?;
        let end = out
            .endpoint
            .ok_or_else(|| format!("corrector failed at {:?}", out.failed_at))?;
        ensure(end.residual <= 1e-8, format!("endpoint residual {:e}", end.residual))?;
        let direct = ok(picard_solve(&spec, &GridFunction::zeros(grid.clone()), omega, &cfg))?;
        if direct.converged() {
            let gap = sup_gap(&end, &direct.result.u, &direct.result.v);
            ensure(gap <= 1e-6, format!("endpoint {gap:e} away from direct solve"))?;
            worst = worst.max(gap);
        }
    }
    Ok(format!("{} paths, max gap to direct solve {worst:.2e}", omegas.len()))
}

fn criterion_9() -> Check {
    let grid = Arc::new(Grid::build(16, QuadratureRule::default(), 0.0, 1.0).unwrap());
    let k = unit_kernel(&grid);
    let spec = build(
        grid.clone(),
        k.clone(),
        k,
        Nonlinearity::power_product(2.0, Profile::TwoPlusSin).unwrap(),
        Nonlinearity::bounded_g(0.4, Profile::Logistic, ShapeArg::Y).unwrap(),
        1.0,
        1.0,
    );
    let radius = spec.ball().radius;
    for k in 0..100u64 {
        let u = sample_cone(k, spec.cone(), &grid, 0.1 + 0.05 * k as f64).unwrap();
        let mut v = sample_ball(500 + k, spec.ball(), &grid);
        if k % 10 == 0 {
            // exactly on the sphere
            let n = v.sup_norm();
            v = v.scale(radius / n);
        }
        for which in [Component::First, Component::Second] {
            let raw = ok(spec.apply(which, &u, &v))?;
            let ext = ok(spec.retract_extend(&u, &v, radius, 3.0 * radius, which))?;
            let same = raw
                .values()
                .iter()
                .zip(ext.values())
                .all(|(a, b)| a.to_bits() == b.to_bits());
            ensure(same, format!("sample {k}: extension differs inside the ball"))?;
        }
    }
    let cfg = SolveConfig::default();
    let v0 = GridFunction::from_fn(grid.clone(), |t| 1.5 * (2.0 * t - 1.0));
    let out = ok(schaefer_solve(
        &spec,
        2.0,
        &GridFunction::constant(grid.clone(), 0.7),
        &v0,
        &cfg,
    ))?;
    ensure(
        out.trace.events.is_empty(),
        format!("{} boundary events", out.trace.events.len()),
    )?;
    ensure(
        out.trace.outcome == Outcome::Converged,
        format!("outcome {:?}", out.trace.outcome),
    )?;
    Ok(format!(
        "bitwise identical on 100 samples; schaefer solve of {} iterations with 0 events",
        out.trace.iterations()
    ))
}

fn criterion_10() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0f64;
    for q in [2usize, 3, 4] {
        for panels in [2usize, 5, 16] {
            let grid = Grid::build(panels, QuadratureRule::GaussLegendre { order: q }, 0.0, 1.0).unwrap();
            for _ in 0..20 {
                let degree = rng.random_range(0..=2 * q - 1);
                let coeffs: Vec<f64> = (0..=degree).map(|_| rng.random_range(-1.0..1.0)).collect();
                let exact: f64 = coeffs.iter().enumerate().map(|(k, c)| c / (k as f64 + 1.0)).sum();
                let values: Vec<f64> = grid
                    .nodes()
                    .iter()
                    .map(|&t| coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c))
                    .collect();
                let err = (ok(grid.integrate(&values))? - exact).abs();
                ensure(err <= 1e-13, format!("q = {q}, degree {degree}: error {err:e}"))?;
                worst = worst.max(err);
            }
        }
    }
    Ok(format!("max abs error {worst:.2e}"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("pairing property", criterion_1, Duration::from_secs(1)),
        ("scaling homogeneity", criterion_2, Duration::from_secs(10)),
        ("closed-form scaling", criterion_3, Duration::from_secs(1)),
        ("manufactured fixed point", criterion_4, Duration::from_secs(1)),
        ("oracle equivalence", criterion_5, Duration::from_secs(30)),
        ("hypothesis verifier", criterion_6, Duration::from_secs(5)),
        ("cone and ball invariance", criterion_7, Duration::from_secs(10)),
        ("homotopy", criterion_8, Duration::from_secs(5)),
        ("retraction and boundary monitor", criterion_9, Duration::from_secs(5)),
        ("quadrature exactness", criterion_10, Duration::from_secs(1)),
    ];
    let mut failures = 0;
    for (k, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let verdict = match &outcome {
            Ok(_) if elapsed <= *limit => "PASS",
            _ => "FAIL",
        };
        let detail = match outcome {
            Ok(d) if elapsed <= *limit => d,
            Ok(d) => format!("{d}; over time limit {limit:?}"),
            Err(e) => e,
        };
        if verdict == "FAIL" {
            failures += 1;
        }
        println!("criterion {:>2} {verdict} {name} ({elapsed:.3?}): {detail}", k + 1);
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
