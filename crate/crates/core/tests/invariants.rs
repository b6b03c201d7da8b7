use std::sync::Arc;

use nehari_fp::nehari::{eval_f, solve_scaling};
use nehari_fp::operators::retract;
use nehari_fp::{
    in_cone, sample_ball, sample_cone, BallSpec, ConeSpec, Grid, GridFunction, Kernel, KernelPreset, Nonlinearity,
    ProblemSpec, Profile, QuadratureRule, RootConfig,
};
use proptest::prelude::*;

fn grid() -> Arc<Grid> {
    Arc::new(Grid::build(8, QuadratureRule::default(), 0.25, 0.75).unwrap())
}

fn spec(p: f64) -> ProblemSpec {
    let grid = grid();
    let k1 = Kernel::from_preset(
        &grid,
        KernelPreset::SeparableProduct {
            left: Profile::OnePlusSquare,
            right: Profile::TwoPlusSin,
        },
    )
    .unwrap();
    let k2 = Kernel::from_preset(&grid, KernelPreset::Constant { value: 1.0 }).unwrap();
    ProblemSpec::new(
        grid.clone(),
        k1,
        k2,
        Nonlinearity::power_product(p, Profile::TwoPlusSin).unwrap(),
        Nonlinearity::constant(0.5).unwrap(),
        ConeSpec::on_grid(0.5, &grid).unwrap(),
        BallSpec::new(1.0).unwrap(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scaling_is_inverse_homogeneous(seed in any::<u64>(), amp in 0.05f64..20.0, t in 0.1f64..10.0, p in 1.5f64..4.0) {
        let spec = spec(p);
        let u = sample_cone(seed, spec.cone(), spec.grid(), amp).unwrap();
        let v = sample_ball(seed ^ 1, spec.ball(), spec.grid());
        let cfg = RootConfig::default();
        let s = solve_scaling(&spec, &u, &v, &cfg).unwrap().sigma;
        let st = solve_scaling(&spec, &u.scale(t), &v, &cfg).unwrap().sigma;
        prop_assert!((t * st - s).abs() <= 1e-8 * s);
    }

    #[test]
    fn cone_is_closed_under_positive_scaling(seed in any::<u64>(), amp in 0.01f64..100.0, lambda in 0.0f64..50.0) {
        let g = grid();
        let cone = ConeSpec::on_grid(0.5, &g).unwrap();
        let u = sample_cone(seed, &cone, &g, amp).unwrap();
        prop_assert!(in_cone(&u, &cone, 1e-12).unwrap().member);
        prop_assert!(in_cone(&u.scale(lambda), &cone, 1e-12).unwrap().member);
        prop_assert!((u.sup_norm() - amp).abs() <= 1e-12 * amp);
    }

    #[test]
    fn integration_is_linear(xs in prop::collection::vec(-10.0f64..10.0, 32), ys in prop::collection::vec(-10.0f64..10.0, 32), a in -5.0f64..5.0, b in -5.0f64..5.0) {
        let g = grid();
        let n = g.len();
        let combo: Vec<f64> = (0..n).map(|i| a * xs[i] + b * ys[i]).collect();
        let lhs = g.integrate(&combo).unwrap();
        let rhs = a * g.integrate(&xs[..n]).unwrap() + b * g.integrate(&ys[..n]).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs() + rhs.abs()));
    }

    #[test]
    fn pairing_of_scaled_self(seed in any::<u64>(), amp in 0.01f64..10.0, lambda in 0.1f64..10.0) {
        let g = grid();
        let cone = ConeSpec::on_grid(0.5, &g).unwrap();
        let u = sample_cone(seed, &cone, &g, amp).unwrap();
        let norm: f64 = g.weights().iter().zip(u.values()).map(|(w, x)| w * x * x).sum();
        let value = eval_f(&u.scale(lambda), &u).unwrap();
        let expected = (lambda - 1.0) * norm;
        prop_assert!((value - expected).abs() <= 1e-12 * norm * (1.0 + lambda));
        if lambda != 1.0 {
            prop_assert_eq!(value.signum(), (lambda - 1.0).signum());
        }
    }

    #[test]
    fn retraction_lands_on_sphere(values in prop::collection::vec(-5.0f64..5.0, 32), radius in 0.1f64..3.0) {
        let g = grid();
        let v = GridFunction::new(g.clone(), values[..g.len()].to_vec()).unwrap();
        let norm = v.sup_norm();
        match retract(&v, radius, 10.0).unwrap() {
            None => prop_assert!(norm <= radius),
            Some(w) => {
                prop_assert!(norm > radius);
                prop_assert!((w.sup_norm() - radius).abs() <= 1e-12 * radius);
                for (a, b) in w.values().iter().zip(v.values()) {
                    prop_assert!((a * norm - b * radius).abs() <= 1e-12 * norm * radius);
                }
            }
        }
    }

    #[test]
    fn t1_maps_cone_into_cone(seed in any::<u64>(), amp in 0.01f64..10.0) {
        let spec = spec(2.0);
        let u = sample_cone(seed, spec.cone(), spec.grid(), amp).unwrap();
        let v = sample_ball(seed.rotate_left(7), spec.ball(), spec.grid());
        let t1 = spec.apply_t1(&u, &v).unwrap();
        prop_assert!(in_cone(&t1, spec.cone(), 1e-12).unwrap().margin >= -1e-10);
        prop_assert!(spec.apply_t2(&u, &v).unwrap().sup_norm() <= 0.5 * (1.0 + 1e-12));
    }
}
