//! The pairing functional `F`, the scaling profile `phi(sigma)` and the
//! scaling map `s(u, v)`.
//!
//! Throughout, `F(first, second) = int (first - second) * second`. With this
//! order the identity
//!
//! ```text
//! F(T1(sigma u, v), sigma u) = sigma^2 * phi(sigma),
//! phi(sigma) = int (1/sigma) T1(sigma u, v) u - int u^2
//! ```
//!
//! holds, and `phi` is increasing in `sigma` whenever `x -> f(x, y) / x` is.
//! A pair `(u, v)` with `u != 0` lies on the Nehari-type set exactly when
//! `s(u, v) = 1`, equivalently when `F(T1(u, v), u) = 0`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::GridFunction;
use crate::grid::Grid;
use crate::operators::ProblemSpec;
use crate::root;

/// Tolerances of the scaling-map root solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RootConfig {
    /// Absolute tolerance on `phi`.
    pub atol: f64,
    /// Relative bracket width on `sigma`.
    pub rtol: f64,
    /// Cap on geometric bracket expansions from `sigma = 1`.
    pub max_expansions: usize,
    pub expansion_factor: f64,
    pub max_iter: usize,
}

impl Default for RootConfig {
    fn default() -> Self {
        RootConfig {
            atol: 1e-12,
            rtol: 1e-10,
            max_expansions: 60,
            expansion_factor: 4.0,
            max_iter: 200,
        }
    }
}

/// `F` bound to a grid's quadrature.
#[derive(Debug, Clone)]
pub struct PairingFunctional {
    grid: Arc<Grid>,
}

impl PairingFunctional {
    pub fn new(grid: Arc<Grid>) -> Self {
        PairingFunctional { grid }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// `int (first - second) * second`.
    pub fn eval(&self, first: &GridFunction, second: &GridFunction) -> Result<f64> {
        for w in [first, second] {
            if !(Arc::ptr_eq(w.grid(), &self.grid) || **w.grid() == *self.grid) {
                return Err(Error::GridMismatch);
            }
        }
        Ok(eval_f_unchecked(first, second))
    }
}

/// `int (first - second) * second` on the common grid.
pub fn eval_f(first: &GridFunction, second: &GridFunction) -> Result<f64> {
    first.check_same_grid(second)?;
    Ok(eval_f_unchecked(first, second))
}

fn eval_f_unchecked(first: &GridFunction, second: &GridFunction) -> f64 {
    let w = first.grid().weights();
    first
        .values()
        .iter()
        .zip(second.values())
        .zip(w)
        .fold(0.0, |acc, ((a, b), w)| acc + w * (a - b) * b)
}

/// The Hilbert-space form `(u - tilde, u)`, i.e. `-F(tilde, u)`.
pub fn hilbert_pairing(tilde: &GridFunction, u: &GridFunction) -> Result<f64> {
    Ok(-eval_f(tilde, u)?)
}

/// `phi(sigma)` evaluated through `T1` directly.
pub fn eval_phi(spec: &ProblemSpec, u: &GridFunction, v: &GridFunction, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::NonPositiveSigma(sigma));
    }
    if u.is_zero() {
        return Err(Error::ZeroFunction);
    }
    let t = spec.apply_t1(&u.scale(sigma), v)?;
    Ok(t.dot_unchecked(u) / sigma - u.norm_l2_squared())
}

/// `phi` with the kernel contracted against `u` once, so each evaluation
/// costs one pass over the nodes.
#[derive(Debug, Clone)]
pub struct ScalingProfile<'a> {
    spec: &'a ProblemSpec,
    u: &'a [f64],
    v: &'a [f64],
    /// `c_j = w_j sum_i w_i u_i k1(t_i, theta_j)`
    weights: Vec<f64>,
    u_norm_sq: f64,
}

impl<'a> ScalingProfile<'a> {
    pub fn new(spec: &'a ProblemSpec, u: &'a GridFunction, v: &'a GridFunction) -> Result<Self> {
        spec.check(u, v)?;
        if u.is_zero() {
            return Err(Error::ZeroFunction);
        }
        let grid = spec.grid();
        let w = grid.weights();
        let k = spec.k1().table();
        let n = grid.len();
        let uv = u.values();
        let weights = (0..n)
            .map(|j| {
                let col = (0..n).fold(0.0, |acc, i| acc + w[i] * uv[i] * k[(i, j)]);
                w[j] * col
            })
            .collect();
        Ok(ScalingProfile {
            spec,
            u: u.values(),
            v: v.values(),
            weights,
            u_norm_sq: u.norm_l2_squared(),
        })
    }

    pub fn eval(&self, sigma: f64) -> f64 {
        let f = self.spec.f();
        let acc = self
            .weights
            .iter()
            .zip(self.u.iter().zip(self.v))
            .fold(0.0, |acc, (c, (&x, &y))| acc + c * f.eval(sigma * x, y));
        acc / sigma - self.u_norm_sq
    }

    pub fn u_norm_sq(&self) -> f64 {
        self.u_norm_sq
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingResult {
    /// The value `s(u, v)`.
    pub sigma: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
    /// `|phi(sigma)|` at the returned value.
    pub phi_residual: f64,
}

/// Computes `s(u, v)`: expands a bracket geometrically from `sigma = 1` until
/// `phi` changes sign, then refines with Brent's method.
pub fn solve_scaling(
    spec: &ProblemSpec,
    u: &GridFunction,
    v: &GridFunction,
    cfg: &RootConfig,
) -> Result<ScalingResult> {
    let profile = ScalingProfile::new(spec, u, v)?;
    let phi = |s: f64| profile.eval(s);
    let checked = |s: f64| -> Result<f64> {
        let p = phi(s);
        if p.is_finite() {
            Ok(p)
        } else {
            Err(Error::NonFinite("scaling profile"))
        }
    };

    let f1 = checked(1.0)?;
    if f1 == 0.0 {
        return Ok(ScalingResult {
            sigma: 1.0,
            bracket: (1.0, 1.0),
            iterations: 0,
            phi_residual: 0.0,
        });
    }
    let factor = cfg.expansion_factor;
    let (mut lo, mut hi, mut f_lo, mut f_hi) = (1.0, 1.0, f1, f1);
    let mut found = false;
    for _ in 0..cfg.max_expansions {
        if f1 < 0.0 {
            lo = hi;
            f_lo = f_hi;
            hi *= factor;
            f_hi = checked(hi)?;
            if f_hi >= 0.0 {
                found = true;
                break;
            }
        } else {
            hi = lo;
            f_hi = f_lo;
            lo /= factor;
            f_lo = checked(lo)?;
            if f_lo <= 0.0 {
                found = true;
                break;
            }
        }
    }
    if !found {
        let (scan_lo, scan_hi) = if f1 < 0.0 { (1.0, hi) } else { (lo, 1.0) };
        return Err(Error::NoBracket {
            lo: scan_lo,
            hi: scan_hi,
        });
    }
    let out = root::brent(phi, lo, hi, f_lo, f_hi, cfg.rtol, cfg.atol, cfg.max_iter)?;
    Ok(ScalingResult {
        sigma: out.root,
        bracket: out.bracket,
        iterations: out.iterations,
        phi_residual: out.f_root.abs(),
    })
}

/// `F(T1(u, v), u)`; vanishes exactly on the Nehari-type set.
pub fn nehari_residual(spec: &ProblemSpec, u: &GridFunction, v: &GridFunction) -> Result<f64> {
    if u.is_zero() {
        return Err(Error::ZeroFunction);
    }
    let t = spec.apply_t1(u, v)?;
    Ok(eval_f_unchecked(&t, u))
}

/// Membership test `|residual| <= tol (1 + int u^2)`.
pub fn on_nehari_set(residual: f64, u: &GridFunction, tol: f64) -> bool {
    residual.abs() <= tol * (1.0 + u.norm_l2_squared())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BridgeOutcome {
    /// `u - E'(u)`
    pub t_value: GridFunction,
    /// `(E'(u), u)`
    pub manifold_residual: f64,
    /// `(u - T(u), u)`, equal to `manifold_residual` up to rounding.
    pub pairing_value: f64,
}

/// Gradient form of a single equation: `T(u) = u - E'(u)`, whose Nehari-type
/// set is the classical Nehari manifold `(E'(u), u) = 0`.
pub fn variational_bridge<G>(gradient: G, u: &GridFunction) -> Result<BridgeOutcome>
where
    G: Fn(&GridFunction) -> GridFunction,
{
    let grad = gradient(u);
    u.check_same_grid(&grad)?;
    let t_values = u.values().iter().zip(grad.values()).map(|(a, g)| a - g).collect();
    let t_value = GridFunction::from_parts(Arc::clone(u.grid()), t_values);
    let manifold_residual = grad.dot_unchecked(u);
    let pairing_value = hilbert_pairing(&t_value, u)?;
    Ok(BridgeOutcome {
        t_value,
        manifold_residual,
        pairing_value,
    })
}
