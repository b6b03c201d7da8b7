//! Kernel tables `k(t_i, theta_j)` with their envelope `Phi` and Harnack constant.

use std::io::Read;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Slack allowed in the envelope inequalities.
pub const ENVELOPE_TOL: f64 = 1e-12;

/// Scalar shape functions shared by kernel and nonlinearity presets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Profile {
    Constant(f64),
    Identity,
    /// `2 + sin x`
    TwoPlusSin,
    /// `1 + x^2`
    OnePlusSquare,
    /// `1 / (1 + exp(-x))`
    Logistic,
}

impl Profile {
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Profile::Constant(c) => c,
            Profile::Identity => x,
            Profile::TwoPlusSin => 2.0 + x.sin(),
            Profile::OnePlusSquare => 1.0 + x * x,
            Profile::Logistic => 1.0 / (1.0 + (-x).exp()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Profile::Constant(_) => "constant",
            Profile::Identity => "identity",
            Profile::TwoPlusSin => "two_plus_sin",
            Profile::OnePlusSquare => "one_plus_square",
            Profile::Logistic => "logistic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "preset")]
pub enum KernelPreset {
    Constant {
        value: f64,
    },
    /// `k(t, theta) = left(t) * right(theta)`
    SeparableProduct {
        left: Profile,
        right: Profile,
    },
    Table,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    table: DMatrix<f64>,
    phi: Vec<f64>,
    harnack: f64,
    preset: KernelPreset,
}

impl Kernel {
    pub fn from_preset(grid: &Grid, preset: KernelPreset) -> Result<Kernel> {
        let nodes = grid.nodes();
        let n = nodes.len();
        let table = match preset {
            KernelPreset::Constant { value } => DMatrix::from_element(n, n, value),
            KernelPreset::SeparableProduct { left, right } => {
                DMatrix::from_fn(n, n, |i, j| left.eval(nodes[i]) * right.eval(nodes[j]))
            }
            KernelPreset::Table => {
                return Err(Error::InvalidParameter {
                    name: "preset",
                    reason: "table kernels are built with Kernel::from_table".into(),
                })
            }
        };
        Self::assemble(grid, table, preset)
    }

    /// Wraps an explicit node-by-node table (rows index t, columns theta).
    pub fn from_table(grid: &Grid, table: DMatrix<f64>) -> Result<Kernel> {
        Self::assemble(grid, table, KernelPreset::Table)
    }

    /// Reads `i,j,value` rows; every node pair must appear exactly once.
    pub fn read_csv<R: Read>(grid: &Grid, input: R) -> Result<Kernel> {
        let n = grid.len();
        let mut table = DMatrix::from_element(n, n, f64::NAN);
        let mut seen = 0usize;
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        for record in reader.deserialize::<(usize, usize, f64)>() {
            let (i, j, value) = record?;
            if i >= n || j >= n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: i.max(j) + 1,
                });
            }
            if table[(i, j)].is_nan() {
                seen += 1;
            }
            table[(i, j)] = value;
        }
        if seen != n * n {
            return Err(Error::LengthMismatch {
                expected: n * n,
                found: seen,
            });
        }
        Self::from_table(grid, table)
    }

    fn assemble(grid: &Grid, table: DMatrix<f64>, preset: KernelPreset) -> Result<Kernel> {
        let n = grid.len();
        if table.nrows() != n || table.ncols() != n {
            return Err(Error::LengthMismatch {
                expected: n * n,
                found: table.nrows() * table.ncols(),
            });
        }
        for j in 0..n {
            for i in 0..n {
                let value = table[(i, j)];
                if !(value >= 0.0) || !value.is_finite() {
                    return Err(Error::NegativeKernel { i, j, value });
                }
            }
        }
        let phi: Vec<f64> = (0..n)
            .map(|j| table.column(j).iter().fold(0.0f64, |m, &x| m.max(x)))
            .collect();
        let harnack = harnack_constant(grid, &table, &phi);
        Ok(Kernel {
            table,
            phi,
            harnack,
            preset,
        })
    }

    /// Replaces the column-max envelope with a caller-supplied `Phi`.
    pub fn with_envelope(mut self, grid: &Grid, phi: Vec<f64>) -> Result<Kernel> {
        let n = self.table.nrows();
        if phi.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: phi.len(),
            });
        }
        for (j, &bound) in phi.iter().enumerate() {
            for i in 0..n {
                if self.table[(i, j)] > bound + ENVELOPE_TOL {
                    return Err(Error::EnvelopeViolation {
                        i,
                        j,
                        detail: format!("k = {} > Phi = {}", self.table[(i, j)], bound),
                    });
                }
            }
        }
        self.harnack = harnack_constant(grid, &self.table, &phi);
        self.phi = phi;
        Ok(self)
    }

    pub fn table(&self) -> &DMatrix<f64> {
        &self.table
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    /// Largest `c` with `c * Phi(theta) <= k(t, theta)` for t in [a, b].
    pub fn harnack(&self) -> f64 {
        self.harnack
    }

    pub fn preset(&self) -> KernelPreset {
        self.preset
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.table[(i, j)]
    }

    /// Checks `k <= Phi` everywhere and `c1 * Phi <= k` on the [a, b] rows.
    pub fn check_envelope(&self, grid: &Grid, c1: f64) -> EnvelopeCheck {
        let n = self.table.nrows();
        let mut upper_excess = f64::NEG_INFINITY;
        let mut lower_excess = f64::NEG_INFINITY;
        let mut first_violation = None;
        for j in 0..n {
            for i in 0..n {
                let k = self.table[(i, j)];
                let up = k - self.phi[j];
                upper_excess = upper_excess.max(up);
                if up > ENVELOPE_TOL && first_violation.is_none() {
                    first_violation = Some((i, j));
                }
                if grid.in_ab(i) {
                    let low = c1 * self.phi[j] - k;
                    lower_excess = lower_excess.max(low);
                    if low > ENVELOPE_TOL && first_violation.is_none() {
                        first_violation = Some((i, j));
                    }
                }
            }
        }
        EnvelopeCheck {
            upper_excess,
            lower_excess,
            first_violation,
            pass: upper_excess <= ENVELOPE_TOL && lower_excess <= ENVELOPE_TOL,
        }
    }

    /// Like [`Kernel::check_envelope`] but turns a failure into an error.
    pub fn validate_envelope(&self, grid: &Grid, c1: f64) -> Result<()> {
        let check = self.check_envelope(grid, c1);
        match check.first_violation {
            None => Ok(()),
            Some((i, j)) => Err(Error::EnvelopeViolation {
                i,
                j,
                detail: format!(
                    "upper excess {:e}, lower excess {:e} with c1 = {c1}",
                    check.upper_excess, check.lower_excess
                ),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeCheck {
    /// `max (k - Phi)`; nonpositive when the upper bound holds.
    pub upper_excess: f64,
    /// `max (c1 Phi - k)` over [a, b] rows; nonpositive when the lower bound holds.
    pub lower_excess: f64,
    pub first_violation: Option<(usize, usize)>,
    pub pass: bool,
}

// Columns with Phi = 0 carry no information and are skipped.
fn harnack_constant(grid: &Grid, table: &DMatrix<f64>, phi: &[f64]) -> f64 {
    let mut c = f64::INFINITY;
    for (j, &p) in phi.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        for &i in grid.ab_indices() {
            c = c.min(table[(i, j)] / p);
        }
    }
    if c.is_finite() {
        c
    } else {
        1.0
    }
}
