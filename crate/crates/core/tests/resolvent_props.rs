use std::sync::Arc;

use dualhelm_core::resolvent::{
    disjoint_interaction, extremal_partner, interaction_decay, radial_bump, real_resolvent,
};
use dualhelm_core::{Exponents, RealField, ResolventSpec, TorusGrid};
use proptest::prelude::*;

fn grid_and_pair() -> impl Strategy<Value = (Arc<TorusGrid>, Vec<f64>, Vec<f64>)> {
    (1usize..=3, prop::sample::select(vec![8usize, 12, 16]), 1.0f64..20.0).prop_flat_map(
        |(dim, n, l)| {
            let g = TorusGrid::new(dim, l, n).unwrap();
            let len = g.len();
            (
                Just(g),
                prop::collection::vec(-5.0f64..5.0, len),
                prop::collection::vec(-5.0f64..5.0, len),
            )
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn resolvent_is_linear(
        (g, u, v) in grid_and_pair(),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        delta in 0.05f64..1.0,
    ) {
        let spec = ResolventSpec::new(1.0, delta).unwrap();
        let u = RealField::new(g.clone(), u).unwrap();
        let v = RealField::new(g.clone(), v).unwrap();
        let combo = u.scaled(a).add(&v.scaled(b)).unwrap();
        let lhs = real_resolvent(&combo, &spec).unwrap();
        let rhs = real_resolvent(&u, &spec).unwrap().scaled(a)
            .add(&real_resolvent(&v, &spec).unwrap().scaled(b)).unwrap();
        let scale = lhs.max_abs().max(rhs.max_abs()).max(1e-300);
        for (x, y) in lhs.values().iter().zip(rhs.values()) {
            prop_assert!((x - y).abs() <= 1e-12 * scale);
        }
    }
}

#[test]
fn absorption_limit_is_second_order() {
    // half width π√2 puts the j = 2 mode at |ξ|² = 2, off the unit sphere
    let l = std::f64::consts::PI * 2f64.sqrt();
    let g = TorusGrid::new(2, l, 16).unwrap();
    let mode = RealField::from_fn(&g, |x| (2f64.sqrt() * x[0]).cos()).unwrap();
    let at = |delta: f64| real_resolvent(&mode, &ResolventSpec::new(1.0, delta).unwrap()).unwrap();
    let deltas = [0.4, 0.2, 0.1, 0.05];
    let outs: Vec<RealField> = deltas.iter().map(|&d| at(d)).collect();
    let diffs: Vec<f64> = outs
        .windows(2)
        .map(|w| w[0].sub(&w[1]).unwrap().max_abs())
        .collect();
    let last = diffs[diffs.len() - 1] / diffs[diffs.len() - 2];
    assert!((last - 0.25).abs() <= 0.2 * 0.25, "{diffs:?}");
    for w in diffs.windows(2) {
        assert!((w[1] / w[0] - 0.25).abs() <= 0.2 * 0.25, "{diffs:?}");
    }
}

#[test]
fn interaction_decays_with_the_gap() {
    let g = TorusGrid::new(3, 16.0, 32).unwrap();
    let e = Exponents::new(3, 1.0, 5.0, 1.0).unwrap();
    let spec = ResolventSpec::auto(1.0, &g).unwrap();
    let u = radial_bump(&g, 2.0);
    let samples = interaction_decay(&u, &spec, e.p, 2.0, &[2.0, 4.0, 8.0]).unwrap();
    assert!(samples.iter().all(|s| s.normalized.is_finite() && s.normalized > 0.0));
    assert!(samples.windows(2).all(|w| w[1].normalized < w[0].normalized), "{samples:?}");
}

#[test]
fn interaction_is_symmetric_in_the_pair() {
    let g = TorusGrid::new(2, 12.0, 48).unwrap();
    let spec = ResolventSpec::new(1.0, 0.2).unwrap();
    let u = radial_bump(&g, 2.0);
    let v = extremal_partner(&u, &spec, 5.0, 5.0).unwrap();
    let uv = disjoint_interaction(&u, &v, &spec, 2.0, 3.0).unwrap();
    let vu = dualhelm_core::spectral::inner_product(&v, &real_resolvent(&u, &spec).unwrap())
        .unwrap()
        .abs();
    assert!((uv - vu).abs() <= 1e-10 * uv);
}
