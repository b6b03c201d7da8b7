//! Nodal functions on a grid, the cone `K1` and the ball `B_R`.

use std::io::Write;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Default tolerance for cone and ball membership.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// Nodal values of a continuous function on [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        Ok(GridFunction { grid, values })
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&t| f(t)).collect();
        GridFunction { grid, values }
    }

    pub fn constant(grid: Arc<Grid>, c: f64) -> Self {
        let values = vec![c; grid.len()];
        GridFunction { grid, values }
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        Self::constant(grid, 0.0)
    }

    pub(crate) fn from_parts(grid: Arc<Grid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        GridFunction { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub(crate) fn check_same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// `max_i |u_i|`.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Quadrature of the function itself.
    pub fn integral(&self) -> f64 {
        self.grid.integrate_unchecked(&self.values)
    }

    /// Quadrature L2 pairing `int self * other`.
    pub fn dot(&self, other: &GridFunction) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self.dot_unchecked(other))
    }

    pub(crate) fn dot_unchecked(&self, other: &GridFunction) -> f64 {
        self.grid
            .weights()
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .fold(0.0, |acc, (w, (a, b))| acc + w * a * b)
    }

    /// `int u^2`.
    pub fn norm_l2_squared(&self) -> f64 {
        self.dot_unchecked(self)
    }

    pub fn scale(&self, factor: f64) -> GridFunction {
        self.map(|v| factor * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `(1 - theta) * self + theta * other`.
    pub fn lerp(&self, other: &GridFunction, theta: f64) -> Result<GridFunction> {
        self.check_same_grid(other)?;
        let values = if theta == 1.0 {
            other.values.clone()
        } else {
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| (1.0 - theta) * a + theta * b)
                .collect()
        };
        Ok(GridFunction::from_parts(Arc::clone(&self.grid), values))
    }

    /// `max_i |self_i - other_i|`.
    pub fn sup_distance(&self, other: &GridFunction) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Writes `t,value` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,value")?;
        for (t, v) in self.grid.nodes().iter().zip(&self.values) {
            writeln!(out, "{t:.16e},{v:.16e}")?;
        }
        Ok(())
    }

    /// Reads the format produced by [`GridFunction::write_csv`]. Node positions
    /// must agree with `grid` to 1e-15.
    pub fn read_csv<R: std::io::Read>(grid: Arc<Grid>, input: R) -> Result<GridFunction> {
        let mut reader = csv::Reader::from_reader(input);
        let mut values = Vec::with_capacity(grid.len());
        for (i, record) in reader.deserialize::<(f64, f64)>().enumerate() {
            let (t, v) = record?;
            match grid.nodes().get(i) {
                Some(node) if (node - t).abs() <= 1e-15 => values.push(v),
                _ => return Err(Error::GridMismatch),
            }
        }
        GridFunction::new(grid, values)
    }
}

/// The cone `{u >= 0 : min_[a,b] u >= c1 |u|_inf}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeSpec {
    pub c1: f64,
    pub a: f64,
    pub b: f64,
}

impl ConeSpec {
    pub fn new(c1: f64, a: f64, b: f64) -> Result<Self> {
        if !(c1 > 0.0 && c1 <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "c1",
                reason: format!("must lie in (0, 1], got {c1}"),
            });
        }
        if !(a < b) {
            return Err(Error::InvalidInterval { a, b });
        }
        Ok(ConeSpec { c1, a, b })
    }

    /// The cone whose block is the grid's marked block.
    pub fn on_grid(c1: f64, grid: &Grid) -> Result<Self> {
        Self::new(c1, grid.a(), grid.b())
    }

    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        if (self.a - grid.a()).abs() > 1e-14 || (self.b - grid.b()).abs() > 1e-14 {
            return Err(Error::ConeGridMismatch {
                cone_a: self.a,
                cone_b: self.b,
                grid_a: grid.a(),
                grid_b: grid.b(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeMembership {
    pub member: bool,
    /// `min_[a,b] u - c1 |u|_inf`.
    pub margin: f64,
    /// Smallest nodal value over the whole grid.
    pub min_value: f64,
}

/// Nodal cone test; see [`ConeMembership`] for the margin.
pub fn in_cone(u: &GridFunction, cone: &ConeSpec, tol: f64) -> Result<ConeMembership> {
    let grid = u.grid();
    cone.check_grid(grid)?;
    let min_value = u.values().iter().fold(f64::INFINITY, |m, &v| m.min(v));
    let min_ab = grid
        .ab_indices()
        .iter()
        .fold(f64::INFINITY, |m, &i| m.min(u.values()[i]));
    let margin = min_ab - cone.c1 * u.sup_norm();
    Ok(ConeMembership {
        member: min_value >= -tol && margin >= -tol,
        margin,
        min_value,
    })
}

/// The closed sup-norm ball of radius `radius` centred at 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallSpec {
    pub radius: f64,
}

impl BallSpec {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "radius",
                reason: format!("must be positive and finite, got {radius}"),
            });
        }
        Ok(BallSpec { radius })
    }

    pub fn contains(&self, v: &GridFunction, tol: f64) -> bool {
        v.sup_norm() <= self.radius + tol
    }
}

/// Draws a cone element with sup-norm `amplitude`: nonnegative noise, lifted to
/// `c1 * max` on the [a,b] block, then rescaled.
pub fn sample_cone(seed: u64, cone: &ConeSpec, grid: &Arc<Grid>, amplitude: f64) -> Result<GridFunction> {
    if !(amplitude > 0.0 && amplitude.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "amplitude",
            reason: format!("must be positive, got {amplitude}"),
        });
    }
    cone.check_grid(grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w: Vec<f64> = (0..grid.len()).map(|_| rng.random::<f64>()).collect();
    let mut top = w.iter().fold(0.0f64, |m, &x| m.max(x));
    if top == 0.0 {
        w.fill(1.0);
        top = 1.0;
    }
    let floor = cone.c1 * top;
    for &i in grid.ab_indices() {
        w[i] = w[i].max(floor);
    }
    let factor = amplitude / top;
    let mut values: Vec<f64> = w.iter().map(|x| x * factor).collect();
    // pin the maximiser so the sup-norm is exactly the requested amplitude
    if let Some(k) = w.iter().position(|&x| x == top) {
        values[k] = amplitude;
    }
    // a lifted node must not fall below c1 * amplitude through rounding
    let lifted = cone.c1 * amplitude;
    for &i in grid.ab_indices() {
        values[i] = values[i].max(lifted);
    }
    Ok(GridFunction::from_parts(Arc::clone(grid), values))
}

/// Uniform nodal noise in `[-radius, radius]`, a generic ball element.
pub fn sample_ball(seed: u64, ball: &BallSpec, grid: &Arc<Grid>) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..grid.len())
        .map(|_| ball.radius * (2.0 * rng.random::<f64>() - 1.0))
        .collect();
    GridFunction::from_parts(Arc::clone(grid), values)
}
