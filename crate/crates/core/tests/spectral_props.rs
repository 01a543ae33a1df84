use std::sync::Arc;

use dualhelm_core::resolvent::real_resolvent;
use dualhelm_core::spectral::{forward_transform, inner_product, inverse_transform, lq_integral};
use dualhelm_core::{Multiplier, RealField, ResolventSpec, TorusGrid};
use proptest::prelude::*;

fn field(grid: &Arc<TorusGrid>, vals: &[f64]) -> RealField {
    RealField::new(grid.clone(), vals.to_vec()).unwrap()
}

fn grid_and_values() -> impl Strategy<Value = (Arc<TorusGrid>, Vec<f64>)> {
    (1usize..=3, prop::sample::select(vec![8usize, 10, 12, 16]), 0.5f64..20.0).prop_flat_map(
        |(dim, n, l)| {
            let g = TorusGrid::new(dim, l, n).unwrap();
            let len = g.len();
            (Just(g), prop::collection::vec(-10.0f64..10.0, len))
        },
    )
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn round_trip((g, vals) in grid_and_values()) {
        let f = field(&g, &vals);
        let back = inverse_transform(&forward_transform(&f)).unwrap();
        let scale = f.max_abs().max(1e-300);
        for (a, b) in back.values().iter().zip(f.values()) {
            prop_assert!((a - b).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn parseval((g, vals) in grid_and_values()) {
        let f = field(&g, &vals);
        let spec = forward_transform(&f);
        prop_assert!(rel(lq_integral(&f, 2.0), spec.weighted_norm_sqr()) <= 1e-10);
    }

    #[test]
    fn multipliers_compose((g, vals) in grid_and_values(), a in 0.1f64..3.0, b in -2.0f64..2.0) {
        let f = field(&g, &vals);
        let m1 = Multiplier::from_radial_sq(&g, |q| 1.0 / (1.0 + a * q)).unwrap();
        let m2 = Multiplier::from_radial_sq(&g, |q| (b * q.sqrt()).cos()).unwrap();
        let lhs = m2.apply(&m1.apply(&f).unwrap()).unwrap();
        let rhs = m1.compose(&m2).unwrap().apply(&f).unwrap();
        let scale = f.max_abs().max(1e-300);
        for (x, y) in lhs.values().iter().zip(rhs.values()) {
            prop_assert!((x - y).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn resolvent_commutes_with_translation(
        (g, vals) in grid_and_values(),
        shift in prop::collection::vec(-20isize..20, 3),
        delta in 0.05f64..1.0,
    ) {
        let f = field(&g, &vals);
        let spec = ResolventSpec::new(1.0, delta).unwrap();
        let s = &shift[..g.dim()];
        let a = real_resolvent(&f.translated(s), &spec).unwrap();
        let b = real_resolvent(&f, &spec).unwrap().translated(s);
        let scale = a.max_abs().max(1e-300);
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x - y).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn resolvent_is_symmetric((g, vals) in grid_and_values(), delta in 0.05f64..1.0, s in 0.6f64..1.4) {
        let half = vals.len() / 2;
        let mut other: Vec<f64> = vals.iter().rev().copied().collect();
        other[half] += 1.0;
        let u = field(&g, &vals);
        let v = field(&g, &other);
        let spec = ResolventSpec::new(s, delta).unwrap();
        let lhs = inner_product(&u, &real_resolvent(&v, &spec).unwrap()).unwrap();
        let rhs = inner_product(&real_resolvent(&u, &spec).unwrap(), &v).unwrap();
        let bound = (lq_integral(&u, 2.0) * lq_integral(&v, 2.0)).sqrt();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * bound);
    }
}

#[test]
fn large_grids_round_trip() {
    for (dim, n) in [(1usize, 256usize), (2, 128), (3, 64)] {
        let g = TorusGrid::new(dim, 10.0, n).unwrap();
        let f = RealField::from_fn(&g, |x| {
            x.iter().map(|c| (0.3 * c).sin() + (-c * c).exp()).sum::<f64>()
        })
        .unwrap();
        let spec = forward_transform(&f);
        assert!(rel(lq_integral(&f, 2.0), spec.weighted_norm_sqr()) <= 1e-10);
        let back = inverse_transform(&spec).unwrap();
        let scale = f.max_abs();
        for (a, b) in back.values().iter().zip(f.values()) {
            assert!((a - b).abs() <= 1e-10 * scale);
        }
    }
}
