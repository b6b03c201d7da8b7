//! Nyström evaluation of the integral operators `T1`, `T2` and their radial
//! extension outside the ball.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::{BallSpec, ConeSpec, GridFunction};
use crate::grid::Grid;
use crate::kernel::Kernel;
use crate::nonlinearity::Nonlinearity;
use crate::par;

/// Selects `T1` or `T2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    First,
    Second,
}

/// Constants entering the hypotheses on `f` and `g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProblemConstants {
    /// `max Phi`
    pub alpha1: f64,
    /// `int_a^b int_a^b k1`
    pub alpha2: f64,
    /// `max_t int_0^1 k2(t, .)`
    pub alpha3: f64,
}

/// The discretized system `u = T1(u, v)`, `v = T2(u, v)`.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    grid: Arc<Grid>,
    k1: Kernel,
    k2: Kernel,
    f: Nonlinearity,
    g: Nonlinearity,
    cone: ConeSpec,
    ball: BallSpec,
}

impl ProblemSpec {
    pub fn new(
        grid: Arc<Grid>,
        k1: Kernel,
        k2: Kernel,
        f: Nonlinearity,
        g: Nonlinearity,
        cone: ConeSpec,
        ball: BallSpec,
    ) -> Result<Self> {
        cone.check_grid(&grid)?;
        for k in [&k1, &k2] {
            if k.table().nrows() != grid.len() {
                return Err(Error::LengthMismatch {
                    expected: grid.len(),
                    found: k.table().nrows(),
                });
            }
        }
        Ok(ProblemSpec {
            grid,
            k1,
            k2,
            f,
            g,
            cone,
            ball,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn k1(&self) -> &Kernel {
        &self.k1
    }

    pub fn k2(&self) -> &Kernel {
        &self.k2
    }

    pub fn f(&self) -> &Nonlinearity {
        &self.f
    }

    pub fn g(&self) -> &Nonlinearity {
        &self.g
    }

    pub fn cone(&self) -> &ConeSpec {
        &self.cone
    }

    pub fn ball(&self) -> &BallSpec {
        &self.ball
    }

    /// Same problem with a different ball radius.
    pub fn with_ball(&self, ball: BallSpec) -> ProblemSpec {
        ProblemSpec { ball, ..self.clone() }
    }

    pub(crate) fn check(&self, u: &GridFunction, v: &GridFunction) -> Result<()> {
        let on_grid = |w: &GridFunction| Arc::ptr_eq(w.grid(), &self.grid) || **w.grid() == *self.grid;
        if on_grid(u) && on_grid(v) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// `(T1 u)(t_i) = sum_j w_j k1(t_i, theta_j) f(u_j, v_j)`.
    pub fn apply_t1(&self, u: &GridFunction, v: &GridFunction) -> Result<GridFunction> {
        self.check(u, v)?;
        Ok(self.nystrom(&self.k1, &self.f, u.values(), v.values()))
    }

    /// `(T2 v)(t_i) = sum_j w_j k2(t_i, theta_j) g(u_j, v_j)`.
    pub fn apply_t2(&self, u: &GridFunction, v: &GridFunction) -> Result<GridFunction> {
        self.check(u, v)?;
        Ok(self.nystrom(&self.k2, &self.g, u.values(), v.values()))
    }

    pub fn apply(&self, which: Component, u: &GridFunction, v: &GridFunction) -> Result<GridFunction> {
        match which {
            Component::First => self.apply_t1(u, v),
            Component::Second => self.apply_t2(u, v),
        }
    }

    // Each output node sums its row left to right, so the result does not
    // depend on how rows are distributed over threads.
    fn nystrom(&self, k: &Kernel, nl: &Nonlinearity, u: &[f64], v: &[f64]) -> GridFunction {
        let w = self.grid.weights();
        let source: Vec<f64> = (0..u.len()).map(|j| w[j] * nl.eval(u[j], v[j])).collect();
        let table = k.table();
        let values = par::map_indexed(u.len(), |i| {
            source
                .iter()
                .enumerate()
                .fold(0.0, |acc, (j, s)| acc + table[(i, j)] * s)
        });
        GridFunction::from_parts(Arc::clone(&self.grid), values)
    }

    pub fn constants(&self) -> ProblemConstants {
        let alpha1 = self.k1.phi().iter().fold(0.0f64, |m, &p| m.max(p));
        let alpha2 = self
            .grid
            .integrate_2d(self.k1.table(), true)
            .expect("kernel table matches grid");
        let n = self.grid.len();
        let alpha3 = (0..n)
            .map(|i| {
                let row: Vec<f64> = self.k2.table().row(i).iter().copied().collect();
                self.grid.integrate_unchecked(&row)
            })
            .fold(0.0f64, f64::max);
        ProblemConstants { alpha1, alpha2, alpha3 }
    }

    /// `T_i(u, v)` inside the ball of radius `radius`, `T_i(u, radius v / |v|)`
    /// for `radius < |v| <= extended_radius`.
    pub fn retract_extend(
        &self,
        u: &GridFunction,
        v: &GridFunction,
        radius: f64,
        extended_radius: f64,
        which: Component,
    ) -> Result<GridFunction> {
        let retracted = retract(v, radius, extended_radius)?;
        self.apply(which, u, retracted.as_ref().unwrap_or(v))
    }
}

/// Radial projection onto the ball of radius `radius`; `None` when `v` is
/// already inside. Errors when `|v|` exceeds `extended_radius`.
pub fn retract(v: &GridFunction, radius: f64, extended_radius: f64) -> Result<Option<GridFunction>> {
    let norm = v.sup_norm();
    if norm > extended_radius {
        return Err(Error::OutsideExtendedBall {
            norm,
            rtilde: extended_radius,
        });
    }
    if norm <= radius {
        Ok(None)
    } else {
        Ok(Some(v.scale(radius / norm)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::QuadratureRule;
    use crate::kernel::{KernelPreset, Profile};

    fn spec(grid: Arc<Grid>, k2: KernelPreset, f: Nonlinearity, g: Nonlinearity) -> ProblemSpec {
        let k1 = Kernel::from_preset(&grid, KernelPreset::Constant { value: 1.0 }).unwrap();
        let k2 = Kernel::from_preset(&grid, k2).unwrap();
        let cone = ConeSpec::on_grid(1.0, &grid).unwrap();
        ProblemSpec::new(grid, k1, k2, f, g, cone, BallSpec::new(1.0).unwrap()).unwrap()
    }

    fn square() -> Nonlinearity {
        Nonlinearity::power_product(2.0, Profile::Constant(1.0)).unwrap()
    }

    fn unit() -> KernelPreset {
        KernelPreset::Constant { value: 1.0 }
    }

    #[test]
    fn t1_examples() {
        let g = Arc::new(Grid::build(4, QuadratureRule::GaussLegendre { order: 2 }, 0.0, 1.0).unwrap());
        let s = spec(g.clone(), unit(), square(), Nonlinearity::constant(0.5).unwrap());
        let v = GridFunction::constant(g.clone(), 0.3);
        let out = s.apply_t1(&GridFunction::constant(g.clone(), 1.0), &v).unwrap();
        assert!(out.values().iter().all(|x| (x - 1.0).abs() < 1e-14));
        let out = s.apply_t1(&GridFunction::zeros(g.clone()), &v).unwrap();
        assert!(out.is_zero());
        let out = s.apply_t1(&GridFunction::from_fn(g.clone(), |t| t), &v).unwrap();
        assert!(out.values().iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-14));
    }

    #[test]
    fn t2_examples() {
        let g = Arc::new(Grid::build(4, QuadratureRule::GaussLegendre { order: 2 }, 0.0, 1.0).unwrap());
        let s = spec(g.clone(), unit(), square(), Nonlinearity::constant(0.5).unwrap());
        let u = GridFunction::constant(g.clone(), 0.7);
        let v = GridFunction::zeros(g.clone());
        let out = s.apply_t2(&u, &v).unwrap();
        assert!(out.values().iter().all(|x| (x - 0.5).abs() < 1e-14));

        let s = spec(g.clone(), unit(), square(), Nonlinearity::constant(0.0).unwrap());
        assert!(s.apply_t2(&u, &v).unwrap().is_zero());

        let linear = KernelPreset::SeparableProduct {
            left: Profile::Identity,
            right: Profile::Constant(1.0),
        };
        let s = spec(g.clone(), linear, square(), Nonlinearity::constant(1.0).unwrap());
        let out = s.apply_t2(&u, &v).unwrap();
        for (o, t) in out.values().iter().zip(g.nodes()) {
            assert!((o - t).abs() < 1e-14);
        }
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let g = Arc::new(Grid::build(4, QuadratureRule::Trapezoid, 0.0, 1.0).unwrap());
        let h = Arc::new(Grid::build(5, QuadratureRule::Trapezoid, 0.0, 1.0).unwrap());
        let s = spec(g.clone(), unit(), square(), Nonlinearity::constant(0.5).unwrap());
        let r = s.apply_t1(&GridFunction::zeros(h), &GridFunction::zeros(g));
        assert!(matches!(r, Err(Error::GridMismatch)));
    }

    #[test]
    fn constants_examples() {
        let g = Arc::new(Grid::build(4, QuadratureRule::Trapezoid, 0.0, 1.0).unwrap());
        let s = spec(g, unit(), square(), Nonlinearity::constant(0.5).unwrap());
        let c = s.constants();
        assert_eq!((c.alpha1, c.alpha2, c.alpha3), (1.0, 1.0, 1.0));

        let g = Arc::new(Grid::build(4, QuadratureRule::Trapezoid, 0.25, 0.75).unwrap());
        let linear = KernelPreset::SeparableProduct {
            left: Profile::Identity,
            right: Profile::Constant(1.0),
        };
        let s = spec(g, linear, square(), Nonlinearity::constant(0.5).unwrap());
        let c = s.constants();
        assert!((c.alpha2 - 0.25).abs() < 1e-15);
        assert!((c.alpha3 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn retraction_branches() {
        let g = Arc::new(Grid::build(4, QuadratureRule::GaussLegendre { order: 3 }, 0.0, 1.0).unwrap());
        let g_nl = Nonlinearity::bounded_g(0.5, Profile::Logistic, crate::nonlinearity::ShapeArg::Y).unwrap();
        let s = spec(g.clone(), unit(), square(), g_nl);
        let u = GridFunction::from_fn(g.clone(), |t| 1.0 + t);
        let v = GridFunction::from_fn(g.clone(), |t| 0.8 * (5.0 * t).cos());
        for which in [Component::First, Component::Second] {
            let raw = s.apply(which, &u, &v).unwrap();
            let ext = s.retract_extend(&u, &v, 1.0, 3.0, which).unwrap();
            assert_eq!(raw, ext);

            let far = v.scale(2.0 / v.sup_norm());
            let ext = s.retract_extend(&u, &far, 1.0, 3.0, which).unwrap();
            assert_eq!(ext, s.apply(which, &u, &far.scale(0.5)).unwrap());

            let edge = v.scale(1.0 / v.sup_norm());
            let a = s.retract_extend(&u, &edge, 1.0, 3.0, which).unwrap();
            let b = s.retract_extend(&u, &edge.scale(1.5), 1.0, 3.0, which).unwrap();
            let d = a.sup_distance(&b).unwrap();
            assert!(d <= 1e-15, "{d}");
        }
        assert!(matches!(
            s.retract_extend(&u, &v.scale(10.0), 1.0, 3.0, Component::First),
            Err(Error::OutsideExtendedBall { .. })
        ));
    }
}
