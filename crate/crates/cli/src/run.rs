//! Command dispatch and output files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use nehari_fp::nehari::{nehari_residual, solve_scaling};
use nehari_fp::report::write_json_file;
use nehari_fp::selftest::run_selftest;
use nehari_fp::solver::{
    homotopy_continuation, nehari_picard_solve, oracle_solve, picard_solve, schaefer_solve, BoundaryEvent,
    FixedPointResult, Method, Outcome, SolveConfig, SolveTrace,
};
use nehari_fp::verify::{verify_all, SamplingConfig};
use nehari_fp::{GridFunction, ProblemSpec};
use serde::Serialize;

use crate::config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Verify,
    Solve,
    Continue,
    Oracle,
    Selftest,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CHECK_FAIL: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

#[derive(Serialize)]
struct Summary<'a> {
    method: Method,
    outcome: Outcome,
    converged: bool,
    iterations: usize,
    residual: f64,
    #[serde(rename = "on_Ub")]
    on_ub: bool,
    trivial_u: bool,
    u_sup_norm: f64,
    v_sup_norm: f64,
    /// `s(u, v)` at the result, when defined.
    sigma: Option<f64>,
    nehari_residual: Option<f64>,
    damping: f64,
    boundary_events: &'a [BoundaryEvent],
    failed_at: Option<f64>,
    note: Option<&'a str>,
    seed: u64,
}

#[derive(Serialize)]
struct Root<'a> {
    u: &'a [f64],
    v: &'a [f64],
    residual: f64,
    #[serde(rename = "on_Ub")]
    on_ub: bool,
    trivial_u: bool,
}

#[derive(Serialize)]
struct Roots<'a> {
    nodes: &'a [f64],
    count: usize,
    roots: Vec<Root<'a>>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn write_function(f: &GridFunction, path: &Path) -> Result<()> {
    let mut out = create(path)?;
    f.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

fn write_trace(trace: &SolveTrace, path: &Path) -> Result<()> {
    let mut out = create(path)?;
    trace.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

fn sampling(cfg: &RunConfig) -> SamplingConfig {
    SamplingConfig {
        seed: cfg.seed,
        ..cfg.sampling
    }
}

fn verify(cfg: &RunConfig, spec: &ProblemSpec, out: &Path) -> Result<i32> {
    let report = verify_all(spec, &sampling(cfg));
    write_json_file(&report, &out.join("report.json"))?;
    for (key, h) in &report.hypotheses {
        println!("{key}: {:?} (margin {:e})", h.status, h.margin);
    }
    Ok(if report.all_pass() { EXIT_OK } else { EXIT_CHECK_FAIL })
}

fn solve(cfg: &RunConfig, spec: &ProblemSpec, out: &Path, method: Method) -> Result<i32> {
    let grid = spec.grid();
    let u0 = RunConfig::initial_function(grid, cfg.initial.u0);
    let v0 = RunConfig::initial_function(grid, cfg.initial.v0);
    let omega = RunConfig::initial_function(grid, cfg.initial.omega);
    let solve_cfg = SolveConfig { method, ..cfg.solver };

    let (result, trace, failed_at) = match method {
        Method::Picard => {
            let o = picard_solve(spec, &u0, &v0, &solve_cfg)?;
            (o.result, o.trace, None)
        }
        Method::NehariPicard => {
            let o = nehari_picard_solve(spec, &u0, &v0, &solve_cfg)?;
            (o.result, o.trace, None)
        }
        Method::Schaefer => {
            let rtilde = cfg.initial.extended_radius.unwrap_or(2.0 * spec.ball().radius);
            let o = schaefer_solve(spec, rtilde, &u0, &v0, &solve_cfg)?;
            (o.result, o.trace, None)
        }
        Method::Homotopy => {
            let o = homotopy_continuation(spec, &omega, &solve_cfg)?;
            let mut path = create(&out.join("path.csv"))?;
            writeln!(path, "t,iterations,residual,u_sup_norm,v_sup_norm")?;
            for p in &o.path {
                writeln!(
                    path,
                    "{:.16e},{},{:.16e},{:.16e},{:.16e}",
                    p.t,
                    p.iterations,
                    p.residual,
                    p.u.sup_norm(),
                    p.v.sup_norm()
                )?;
            }
            path.flush()?;
            let result = match o.endpoint {
                Some(r) => r,
                None => {
                    let last = o.path.last().expect("path starts at t = 0");
                    FixedPointResult::certify(spec, last.u.clone(), last.v.clone(), solve_cfg.residual_tol)?
                }
            };
            (result, o.trace, o.failed_at)
        }
    };

    write_function(&result.u, &out.join("u.csv"))?;
    write_function(&result.v, &out.join("v.csv"))?;
    write_trace(&trace, &out.join("trace.csv"))?;
    let (sigma, nehari) = if result.u.is_zero() {
        (None, None)
    } else {
        (
            solve_scaling(spec, &result.u, &result.v, &solve_cfg.root)
                .ok()
                .map(|s| s.sigma),
            nehari_residual(spec, &result.u, &result.v).ok(),
        )
    };
    let converged = trace.outcome == Outcome::Converged;
    let summary = Summary {
        method,
        outcome: trace.outcome,
        converged,
        iterations: trace.iterations(),
        residual: result.residual,
        on_ub: result.on_ub,
        trivial_u: result.trivial_u,
        u_sup_norm: result.u.sup_norm(),
        v_sup_norm: result.v.sup_norm(),
        sigma,
        nehari_residual: nehari,
        damping: trace.damping,
        boundary_events: &trace.events,
        failed_at,
        note: trace.note.as_deref(),
        seed: cfg.seed,
    };
    write_json_file(&summary, &out.join("summary.json"))?;
    println!(
        "{:?}: {:?} after {} iterations, residual {:e}",
        method,
        trace.outcome,
        trace.iterations(),
        result.residual
    );
    Ok(if converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

fn oracle(cfg: &RunConfig, spec: &ProblemSpec, out: &Path) -> Result<i32> {
    let roots = oracle_solve(spec, &cfg.solver.oracle)?;
    let doc = Roots {
        nodes: spec.grid().nodes(),
        count: roots.len(),
        roots: roots
            .iter()
            .map(|r| Root {
                u: r.u.values(),
                v: r.v.values(),
                residual: r.residual,
                on_ub: r.on_ub,
                trivial_u: r.trivial_u,
            })
            .collect(),
    };
    write_json_file(&doc, &out.join("roots.json"))?;
    println!("{} fixed points found", roots.len());
    Ok(EXIT_OK)
}

fn selftest(out: Option<&Path>) -> Result<i32> {
    let checks = run_selftest();
    for c in &checks {
        println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if let Some(out) = out {
        write_json_file(&checks, &out.join("selftest.json"))?;
    }
    Ok(if checks.iter().all(|c| c.pass) {
        EXIT_OK
    } else {
        EXIT_CHECK_FAIL
    })
}

/// Runs `command` and returns the process exit code. `base_dir` resolves
/// relative kernel table paths.
pub fn run(command: Command, cfg: Option<&RunConfig>, base_dir: &Path, out: Option<&Path>) -> Result<i32> {
    if command == Command::Selftest {
        if let Some(out) = out {
            std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        }
        return selftest(out);
    }
    let cfg = cfg.context("this command needs --config")?;
    let out = out.context("no output directory")?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let spec = cfg.build_spec(base_dir)?;
    match command {
        Command::Verify => verify(cfg, &spec, out),
        Command::Solve => solve(cfg, &spec, out, cfg.solver.method),
        Command::Continue => solve(cfg, &spec, out, Method::Homotopy),
        Command::Oracle => oracle(cfg, &spec, out),
        Command::Selftest => unreachable!(),
    }
}
