//! Quadrature grids on [0, 1] with a marked sub-block [a, b].

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest Gauss-Legendre order we tabulate per panel.
pub const MAX_GAUSS_ORDER: usize = 32;

const SNAP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum QuadratureRule {
    Trapezoid,
    GaussLegendre { order: usize },
}

impl Default for QuadratureRule {
    fn default() -> Self {
        QuadratureRule::GaussLegendre { order: 4 }
    }
}

impl QuadratureRule {
    /// Highest polynomial degree integrated exactly on each panel.
    pub fn exactness_degree(&self) -> usize {
        match *self {
            QuadratureRule::Trapezoid => 1,
            QuadratureRule::GaussLegendre { order } => 2 * order - 1,
        }
    }
}

/// Quadrature nodes and weights on [0, 1].
///
/// Panel boundaries always include `a` and `b`, so the nodes in `ab_indices`
/// cover exactly the sub-block [a, b] and nothing outside it.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// Weights of the rule restricted to the panels inside [a, b].
    ab_weights: Vec<f64>,
    ab_indices: Vec<usize>,
    ab_mask: Vec<bool>,
    rule: QuadratureRule,
    panels: usize,
    a: f64,
    b: f64,
}

impl Grid {
    /// Builds a composite rule from `n` uniform panels, refined so that `a`
    /// and `b` are panel boundaries.
    pub fn build(n: usize, rule: QuadratureRule, a: f64, b: f64) -> Result<Grid> {
        if n < 2 {
            return Err(Error::TooFewPanels(n));
        }
        if !(a.is_finite() && b.is_finite() && 0.0 <= a && a < b && b <= 1.0) {
            return Err(Error::InvalidInterval { a, b });
        }
        let breaks = panel_breaks(n, a, b);
        let (nodes, weights) = match rule {
            QuadratureRule::Trapezoid => trapezoid(&breaks),
            QuadratureRule::GaussLegendre { order } => {
                if order == 0 || order > MAX_GAUSS_ORDER {
                    return Err(Error::UnsupportedOrder(order));
                }
                composite_gauss(&breaks, order)
            }
        };
        let ab_mask: Vec<bool> = nodes.iter().map(|&x| x >= a - SNAP_TOL && x <= b + SNAP_TOL).collect();
        let ab_indices = ab_mask
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
            .collect();
        let ab_weights = match rule {
            // Endpoint nodes are shared between panels; keep only the halves
            // coming from panels inside [a, b].
            QuadratureRule::Trapezoid => {
                let mut w = vec![0.0; nodes.len()];
                for k in 0..nodes.len() - 1 {
                    if ab_mask[k] && ab_mask[k + 1] {
                        let half = 0.5 * (nodes[k + 1] - nodes[k]);
                        w[k] += half;
                        w[k + 1] += half;
                    }
                }
                w
            }
            QuadratureRule::GaussLegendre { .. } => weights
                .iter()
                .zip(&ab_mask)
                .map(|(&w, &m)| if m { w } else { 0.0 })
                .collect(),
        };
        Ok(Grid {
            nodes,
            weights,
            ab_weights,
            ab_indices,
            ab_mask,
            rule,
            panels: breaks.len() - 1,
            a,
            b,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weights of the rule on [a, b] alone; zero outside.
    pub fn ab_weights(&self) -> &[f64] {
        &self.ab_weights
    }

    pub fn ab_indices(&self) -> &[usize] {
        &self.ab_indices
    }

    pub fn in_ab(&self, i: usize) -> bool {
        self.ab_mask[i]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }

    /// Number of panels after alignment to `a` and `b`.
    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `sum_i w_i * values_i`, accumulated left to right.
    pub fn integrate(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                found: values.len(),
            });
        }
        Ok(self.integrate_unchecked(values))
    }

    pub(crate) fn integrate_unchecked(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).fold(0.0, |acc, (w, v)| acc + w * v)
    }

    /// Tensor-product rule over [0,1]^2, or over [a,b]^2 when `restrict_to_ab`.
    /// Rows of `values` index t, columns index theta.
    pub fn integrate_2d(&self, values: &DMatrix<f64>, restrict_to_ab: bool) -> Result<f64> {
        let n = self.len();
        if values.nrows() != n || values.ncols() != n {
            return Err(Error::LengthMismatch {
                expected: n * n,
                found: values.nrows() * values.ncols(),
            });
        }
        let w = if restrict_to_ab {
            &self.ab_weights
        } else {
            &self.weights
        };
        let mut total = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += w[j] * values[(i, j)];
            }
            total += w[i] * row;
        }
        Ok(total)
    }
}

/// Uniform breakpoints `i/n` merged with `a` and `b`. A uniform breakpoint
/// closer than `SNAP_TOL` to `a` or `b` is replaced by it.
fn panel_breaks(n: usize, a: f64, b: f64) -> Vec<f64> {
    let mut breaks: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    breaks.push(a);
    breaks.push(b);
    breaks.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(breaks.len());
    for x in breaks {
        match out.last_mut() {
            Some(last) if (x - *last).abs() <= SNAP_TOL => {
                if x == a || x == b {
                    *last = x;
                }
            }
            _ => out.push(x),
        }
    }
    out
}

fn trapezoid(breaks: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut weights = vec![0.0; breaks.len()];
    for (k, pair) in breaks.windows(2).enumerate() {
        let half = 0.5 * (pair[1] - pair[0]);
        weights[k] += half;
        weights[k + 1] += half;
    }
    (breaks.to_vec(), weights)
}

fn composite_gauss(breaks: &[f64], order: usize) -> (Vec<f64>, Vec<f64>) {
    let (x_ref, w_ref) = gauss_legendre(order);
    let mut nodes = Vec::with_capacity((breaks.len() - 1) * order);
    let mut weights = Vec::with_capacity(nodes.capacity());
    for pair in breaks.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for (x, w) in x_ref.iter().zip(&w_ref) {
            nodes.push(mid + half * x);
            weights.push(half * w);
        }
    }
    (nodes, weights)
}

/// Gauss-Legendre nodes (ascending) and weights on [-1, 1], by Newton
/// iteration on the Legendre polynomial from Chebyshev initial guesses.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let q = order;
    let mut x = vec![0.0; q];
    let mut w = vec![0.0; q];
    let m = q.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(q, z);
            let dz = p / d;
            z -= dz;
            if dz.abs() <= 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(q, z);
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[q - 1 - i] = z;
        w[i] = weight;
        w[q - 1 - i] = weight;
    }
    if q % 2 == 1 {
        x[q / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(q: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if q == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=q {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = q as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}
