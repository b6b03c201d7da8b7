//! Superposition nonlinearities `f(x, y)` and `g(x, y)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::Profile;

/// Which argument a bounded shape reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ShapeArg {
    X,
    #[default]
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "preset")]
pub enum Nonlinearity {
    /// `|x|^p * coeff(y)`
    PowerProduct { p: f64, coeff: Profile },
    /// `gain * x`
    LinearGain { gain: f64 },
    /// `alpha * shape(arg)` with `0 <= shape <= 1`
    BoundedG { alpha: f64, shape: Profile, arg: ShapeArg },
}

impl Nonlinearity {
    pub fn power_product(p: f64, coeff: Profile) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "p",
                reason: format!("power must satisfy p > 1, got {p}"),
            });
        }
        Ok(Nonlinearity::PowerProduct { p, coeff })
    }

    pub fn linear_gain(gain: f64) -> Result<Self> {
        if !(gain >= 0.0 && gain.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "gain",
                reason: format!("must be nonnegative, got {gain}"),
            });
        }
        Ok(Nonlinearity::LinearGain { gain })
    }

    pub fn bounded_g(alpha: f64, shape: Profile, arg: ShapeArg) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: format!("must be nonnegative, got {alpha}"),
            });
        }
        let ok = match shape {
            Profile::Constant(c) => (0.0..=1.0).contains(&c),
            Profile::Logistic => true,
            _ => false,
        };
        if !ok {
            return Err(Error::InvalidParameter {
                name: "shape",
                reason: format!("`{}` does not stay within [0, 1]", shape.name()),
            });
        }
        Ok(Nonlinearity::BoundedG { alpha, shape, arg })
    }

    /// Constant `g = alpha`.
    pub fn constant(alpha: f64) -> Result<Self> {
        Self::bounded_g(alpha, Profile::Constant(1.0), ShapeArg::Y)
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match *self {
            Nonlinearity::PowerProduct { p, coeff } => {
                let ax = x.abs();
                let pow = if p == 2.0 {
                    ax * ax
                } else if p == 3.0 {
                    ax * ax * ax
                } else {
                    ax.powf(p)
                };
                pow * coeff.eval(y)
            }
            Nonlinearity::LinearGain { gain } => gain * x,
            Nonlinearity::BoundedG { alpha, shape, arg } => {
                let s = match arg {
                    ShapeArg::X => x,
                    ShapeArg::Y => y,
                };
                alpha * shape.eval(s)
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Nonlinearity::PowerProduct { .. } => "power_product",
            Nonlinearity::LinearGain { .. } => "linear_gain",
            Nonlinearity::BoundedG { .. } => "bounded_g",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_requires_p_above_one() {
        assert!(Nonlinearity::power_product(0.5, Profile::Constant(1.0)).is_err());
        assert!(Nonlinearity::power_product(1.0, Profile::Constant(1.0)).is_err());
        assert!(Nonlinearity::power_product(2.5, Profile::Constant(1.0)).is_ok());
    }

    #[test]
    fn power_product_values() {
        let f = Nonlinearity::power_product(2.0, Profile::TwoPlusSin).unwrap();
        assert_eq!(f.eval(0.0, 0.3), 0.0);
        assert!((f.eval(-2.0, 0.0) - 8.0).abs() < 1e-15);
        let f = Nonlinearity::power_product(2.5, Profile::OnePlusSquare).unwrap();
        assert!((f.eval(4.0, 1.0) - 64.0).abs() < 1e-12);
    }

    #[test]
    fn bounded_shapes_must_stay_in_unit_interval() {
        assert!(Nonlinearity::bounded_g(0.5, Profile::TwoPlusSin, ShapeArg::Y).is_err());
        assert!(Nonlinearity::bounded_g(0.5, Profile::Constant(1.5), ShapeArg::Y).is_err());
        let g = Nonlinearity::bounded_g(0.5, Profile::Logistic, ShapeArg::X).unwrap();
        assert_eq!(g.eval(0.0, 100.0), 0.25);
        assert_eq!(Nonlinearity::constant(0.4).unwrap().eval(3.0, -1.0), 0.4);
    }
}
