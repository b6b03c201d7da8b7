//! Sampled checks of the kernel and nonlinearity hypotheses, and estimates of
//! the constants they produce.
//!
//! Limits in `x` are replaced by extremes over the outermost sampled decade of
//! a logarithmic grid; every statement is uniform over a grid of `y` values
//! in `[-R, R]`. Each entry carries a status, a signed margin (positive means
//! slack) and named witness values.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::function::{in_cone, sample_ball, sample_cone, GridFunction, MEMBERSHIP_TOL};
use crate::nehari::{solve_scaling, PairingFunctional, RootConfig};
use crate::operators::{ProblemConstants, ProblemSpec};
use crate::par;

/// Relative step below which two consecutive ratio samples count as a tie.
pub const MONOTONE_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingConfig {
    pub seed: u64,
    /// Unit-sphere cone samples for the `s` range scan.
    pub cone_samples: usize,
    /// Ball samples paired with every cone sample.
    pub ball_samples: usize,
    pub points_per_decade: usize,
    pub y_points: usize,
    /// Smallest `x` sampled near zero.
    pub x_min: f64,
    /// Largest `x` sampled towards infinity.
    pub x_max: f64,
    pub root: RootConfig,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            seed: 0,
            cone_samples: 64,
            ball_samples: 8,
            points_per_decade: 10,
            y_points: 21,
            x_min: 1e-8,
            x_max: 1e6,
            root: RootConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisStatus {
    pub status: Status,
    pub margin: f64,
    pub witnesses: BTreeMap<String, f64>,
}

impl HypothesisStatus {
    fn new(status: Status, margin: f64, witnesses: &[(&str, f64)]) -> Self {
        HypothesisStatus {
            status,
            margin,
            witnesses: witnesses.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    /// Cone constant the checks are run against.
    pub c1: f64,
    /// Largest admissible Harnack constant of `k1`.
    pub kernel_harnack: f64,
    /// Sup of `f(x,y)/x` over the lowest sampled decade.
    pub c2_est: f64,
    /// Inf of `f(x,y)/x` over the highest sampled decade.
    pub c3_est: f64,
    /// Midpoint between `c3_est` and `1/(c1^2 alpha2)`.
    pub c4: f64,
    /// `c4 - 1/(c1^2 alpha2)`.
    pub c4_margin: f64,
    pub delta0_est: Option<f64>,
    pub sigma0_est: Option<f64>,
    pub m_est: Option<f64>,
    #[serde(rename = "M_est")]
    pub big_m_est: Option<f64>,
    pub monotone_ok: bool,
    pub g_bound_est: f64,
    pub scaling_samples: usize,
    pub scaling_failures: usize,
    pub hypotheses: BTreeMap<String, HypothesisStatus>,
}

impl HypothesisReport {
    pub fn status(&self, key: &str) -> Option<Status> {
        self.hypotheses.get(key).map(|h| h.status)
    }

    /// True when every structural hypothesis H1..H5 passes.
    pub fn all_pass(&self) -> bool {
        ["H1", "H2", "H3", "H4", "H5"]
            .iter()
            .all(|k| self.status(k) == Some(Status::Pass))
    }
}

fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    let steps = ((b - a) * per_decade as f64).round().max(1.0) as usize;
    (0..=steps)
        .map(|k| 10f64.powf(a + (b - a) * k as f64 / steps as f64))
        .collect()
}

fn y_grid(radius: f64, points: usize) -> Vec<f64> {
    if points <= 1 {
        return vec![0.0];
    }
    (0..points)
        .map(|k| -radius + 2.0 * radius * k as f64 / (points - 1) as f64)
        .collect()
}

fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    // splitmix64 finalizer over a combined word
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(index.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Unit-sphere cone samples: the constant 1 first, then seeded draws.
pub fn sphere_samples(spec: &ProblemSpec, seed: u64, count: usize) -> Vec<GridFunction> {
    let grid = spec.grid();
    (0..count)
        .map(|i| {
            if i == 0 {
                GridFunction::constant(Arc::clone(grid), 1.0)
            } else {
                sample_cone(derive_seed(seed, 1, i as u64), spec.cone(), grid, 1.0).expect("cone matches grid")
            }
        })
        .collect()
}

/// Ball samples: the zero function first, then seeded uniform draws.
pub fn ball_samples(spec: &ProblemSpec, seed: u64, count: usize) -> Vec<GridFunction> {
    let grid = spec.grid();
    (0..count)
        .map(|j| {
            if j == 0 {
                GridFunction::zeros(Arc::clone(grid))
            } else {
                sample_ball(derive_seed(seed, 2, j as u64), spec.ball(), grid)
            }
        })
        .collect()
}

/// Runs every check and assembles the report. Deterministic in `cfg.seed`.
pub fn verify_all(spec: &ProblemSpec, cfg: &SamplingConfig) -> HypothesisReport {
    let ProblemConstants { alpha1, alpha2, alpha3 } = spec.constants();
    let c1 = spec.cone().c1;
    let radius = spec.ball().radius;
    let f = spec.f();
    let g = spec.g();
    let ys = y_grid(radius, cfg.y_points);
    let ppd = cfg.points_per_decade.max(1);
    let xs = log_grid(cfg.x_min, cfg.x_max, ppd);
    let ratio = |x: f64, y: f64| f.eval(x, y) / x;
    let mut hyps = BTreeMap::new();

    // H1: envelope of k1
    let env = spec.k1().check_envelope(spec.grid(), c1);
    let h1_margin = (spec.k1().harnack() - c1).min(-env.upper_excess) + 0.0;
    hyps.insert(
        "H1".to_string(),
        HypothesisStatus::new(
            if env.pass { Status::Pass } else { Status::Fail },
            h1_margin,
            &[
                ("upper_excess", env.upper_excess),
                ("lower_excess", env.lower_excess),
                ("kernel_harnack", spec.k1().harnack()),
            ],
        ),
    );

    // H2: behaviour near x = 0
    let decade = ppd;
    let bottom = &xs[..=decade.min(xs.len() - 1)];
    let next = &xs[decade.min(xs.len() - 1)..=(2 * decade).min(xs.len() - 1)];
    let sup_over = |set: &[f64]| {
        set.iter()
            .flat_map(|&x| ys.iter().map(move |&y| (x, y)))
            .fold(f64::NEG_INFINITY, |m, (x, y)| m.max(ratio(x, y)))
    };
    let c2_est = sup_over(bottom);
    let c2_next = sup_over(next);
    let f_at_zero = ys.iter().fold(0.0f64, |m, &y| m.max(f.eval(0.0, y).abs()));
    let c2_threshold = 1.0 / alpha1;
    let h2_pass = f_at_zero == 0.0 && c2_est < c2_threshold;
    let delta0_est = h2_pass.then(|| {
        let c2_bound = 0.5 * (c2_est + c2_threshold);
        xs.iter()
            .copied()
            .find(|&x| ys.iter().any(|&y| f.eval(x, y) > c2_bound * x))
            .unwrap_or(cfg.x_max)
    });
    hyps.insert(
        "H2".to_string(),
        HypothesisStatus::new(
            if h2_pass { Status::Pass } else { Status::Fail },
            c2_threshold - c2_est,
            &[
                ("c2_est", c2_est),
                ("threshold", c2_threshold),
                ("next_decade_sup", c2_next),
                ("f_at_zero", f_at_zero),
                ("delta0", delta0_est.unwrap_or(f64::NAN)),
            ],
        ),
    );

    // H3: behaviour as x grows
    let last = xs.len() - 1;
    let top = &xs[last.saturating_sub(decade)..];
    let below = &xs[last.saturating_sub(2 * decade)..=last.saturating_sub(decade)];
    let inf_over = |set: &[f64]| {
        set.iter()
            .flat_map(|&x| ys.iter().map(move |&y| (x, y)))
            .fold(f64::INFINITY, |m, (x, y)| m.min(ratio(x, y)))
    };
    let c3_est = inf_over(top);
    let c3_below = inf_over(below);
    let c3_threshold = 1.0 / (c1 * c1 * alpha2);
    let h3_pass = c3_est > c3_threshold;
    let c4 = 0.5 * (c3_est + c3_threshold);
    let c4_margin = c4 - c3_threshold;
    // smallest grid z with ratio >= c4 from z on, for every y
    let sigma0_est = if h3_pass {
        let mut start = None;
        for (k, &z) in xs.iter().enumerate().rev() {
            if ys.iter().all(|&y| ratio(z, y) >= c4) {
                start = Some(k);
            } else {
                break;
            }
        }
        start.map(|k| xs[k] / c1)
    } else {
        None
    };
    hyps.insert(
        "H3".to_string(),
        HypothesisStatus::new(
            if h3_pass { Status::Pass } else { Status::Fail },
            c3_est - c3_threshold,
            &[
                ("c3_est", c3_est),
                ("threshold", c3_threshold),
                ("previous_decade_inf", c3_below),
                ("c4", c4),
                ("sigma0", sigma0_est.unwrap_or(f64::NAN)),
            ],
        ),
    );

    // H4: strict increase of f(x,y)/x along the full grid
    let mut decreasing = false;
    let mut tie = false;
    let mut min_rel_step = f64::INFINITY;
    for &y in &ys {
        for pair in xs.windows(2) {
            let (r0, r1) = (ratio(pair[0], y), ratio(pair[1], y));
            let scale = r0.abs().max(r1.abs());
            let d = r1 - r0;
            let rel = if scale > 0.0 { d / scale } else { 0.0 };
            min_rel_step = min_rel_step.min(rel);
            if rel < -MONOTONE_REL_TOL {
                decreasing = true;
            } else if rel <= MONOTONE_REL_TOL {
                tie = true;
            }
        }
    }
    let h4_status = if decreasing {
        Status::Fail
    } else if tie {
        Status::Inconclusive
    } else {
        Status::Pass
    };
    let monotone_ok = h4_status == Status::Pass;
    hyps.insert(
        "H4".to_string(),
        HypothesisStatus::new(h4_status, min_rel_step, &[("min_relative_step", min_rel_step)]),
    );

    // H5: bound on g over x >= 0, |y| <= R
    let g_bound_est = std::iter::once(0.0)
        .chain(xs.iter().copied())
        .flat_map(|x| ys.iter().map(move |&y| (x, y)))
        .fold(f64::NEG_INFINITY, |m, (x, y)| m.max(g.eval(x, y)));
    let g_threshold = 1.0 / alpha3;
    hyps.insert(
        "H5".to_string(),
        HypothesisStatus::new(
            // ties within rounding of alpha3 count as failures
            if g_bound_est < g_threshold * (1.0 - MONOTONE_REL_TOL) {
                Status::Pass
            } else {
                Status::Fail
            },
            g_threshold - g_bound_est,
            &[("g_bound_est", g_bound_est), ("threshold", g_threshold)],
        ),
    );

    // s over the unit sphere of the cone times the ball
    let spheres = sphere_samples(spec, cfg.seed, cfg.cone_samples);
    let balls = ball_samples(spec, cfg.seed, cfg.ball_samples);
    let total = spheres.len() * balls.len();
    let sigmas: Vec<Option<f64>> = par::map_indexed_with_threshold(total, 8, |k| {
        let (i, j) = (k / balls.len(), k % balls.len());
        solve_scaling(spec, &spheres[i], &balls[j], &cfg.root)
            .ok()
            .map(|r| r.sigma)
    });
    let scaling_failures = sigmas.iter().filter(|s| s.is_none()).count();
    let solved: Vec<f64> = sigmas.iter().flatten().copied().collect();
    let (m_est, big_m_est) = if solved.is_empty() {
        (None, None)
    } else {
        (
            Some(solved.iter().copied().fold(f64::INFINITY, f64::min)),
            Some(solved.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
        )
    };

    let all_solved = scaling_failures == 0 && total > 0;
    let h1_status = if all_solved && monotone_ok {
        Status::Pass
    } else if scaling_failures > 0 {
        Status::Fail
    } else {
        Status::Inconclusive
    };
    hyps.insert(
        "h1".to_string(),
        HypothesisStatus::new(
            h1_status,
            -(scaling_failures as f64),
            &[("samples", total as f64), ("failures", scaling_failures as f64)],
        ),
    );
    let h2_status = match (m_est, big_m_est) {
        (Some(m), Some(big)) if all_solved && m > 0.0 && big.is_finite() => Status::Pass,
        _ if scaling_failures > 0 => Status::Fail,
        _ => Status::Inconclusive,
    };
    let mut h2_wit = vec![
        ("m_est", m_est.unwrap_or(f64::NAN)),
        ("M_est", big_m_est.unwrap_or(f64::NAN)),
    ];
    if let (Some(d0), Some(m)) = (delta0_est, m_est) {
        h2_wit.push(("delta0_minus_m", d0 - m));
    }
    if let (Some(s0), Some(big)) = (sigma0_est, big_m_est) {
        h2_wit.push(("M_minus_sigma0", big - s0));
    }
    hyps.insert(
        "h2".to_string(),
        HypothesisStatus::new(h2_status, m_est.unwrap_or(0.0), &h2_wit),
    );

    HypothesisReport {
        alpha1,
        alpha2,
        alpha3,
        c1,
        kernel_harnack: spec.k1().harnack(),
        c2_est,
        c3_est,
        c4,
        c4_margin,
        delta0_est,
        sigma0_est,
        m_est,
        big_m_est,
        monotone_ok,
        g_bound_est,
        scaling_samples: total,
        scaling_failures,
        hypotheses: hyps,
    }
}

/// Checks that `lambda -> F(lambda u, u)` vanishes only at `lambda = 1` on the
/// given grid of `lambda` values, with the sign of `lambda - 1` elsewhere.
pub fn verify_f_property(pairing: &PairingFunctional, samples: &[GridFunction], lambdas: &[f64]) -> bool {
    samples.iter().all(|u| {
        if u.is_zero() {
            return false;
        }
        let Ok(at_one) = pairing.eval(u, u) else {
            return false;
        };
        if at_one.abs() > 1e-13 {
            return false;
        }
        lambdas.iter().all(|&lambda| {
            let Ok(value) = pairing.eval(&u.scale(lambda), u) else {
                return false;
            };
            if lambda == 1.0 {
                value.abs() <= 1e-13
            } else {
                value != 0.0 && value.signum() == (lambda - 1.0).signum()
            }
        })
    })
}

/// Worst cases of the cone and ball invariance over sampled `(u, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub samples: usize,
    /// Smallest cone margin of `T1(u, v)`.
    pub min_cone_margin: f64,
    /// Whether every `T1(u, v)` passed the cone test.
    pub all_in_cone: bool,
    /// Largest sup-norm of `T2(u, v)`.
    pub max_t2_norm: f64,
}

/// Samples `count` pairs in `K1 x B_R` (amplitudes spread over `(0, 4]`) and
/// records how far `T1` and `T2` stay inside the cone and the ball.
pub fn check_invariance(spec: &ProblemSpec, seed: u64, count: usize) -> InvarianceReport {
    let grid = spec.grid();
    let rows = par::map_indexed_with_threshold(count, 16, |k| {
        let amplitude = 4.0 * (k as f64 + 1.0) / count as f64;
        let u = sample_cone(derive_seed(seed, 3, k as u64), spec.cone(), grid, amplitude).expect("cone matches grid");
        let v = sample_ball(derive_seed(seed, 4, k as u64), spec.ball(), grid);
        let t1 = spec.apply_t1(&u, &v).expect("same grid");
        let t2 = spec.apply_t2(&u, &v).expect("same grid");
        let cone = in_cone(&t1, spec.cone(), MEMBERSHIP_TOL).expect("cone matches grid");
        (cone.margin, cone.member, t2.sup_norm())
    });
    InvarianceReport {
        samples: count,
        min_cone_margin: rows.iter().fold(f64::INFINITY, |m, r| m.min(r.0)),
        all_in_cone: rows.iter().all(|r| r.1),
        max_t2_norm: rows.iter().fold(0.0f64, |m, r| m.max(r.2)),
    }
}
