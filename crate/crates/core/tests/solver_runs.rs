use std::sync::Arc;

use dualhelm_core::lab::{
    level_table, locate_peak, profile_distance, reconstruct_profile, run_sweep,
    single_bubble_check,
};
use dualhelm_core::solver::{
    cutoff_projection, limit_ground_state, positive_part_filter, solve_for_coefficient,
    solve_ground_state, Cutoff,
};
use dualhelm_core::spectral::lq_norm;
use dualhelm_core::{
    CoefficientQ, DualFunctional, Exponents, RealField, ResolventSpec, SolverOptions, TorusGrid,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn plane() -> (Arc<TorusGrid>, Exponents, ResolventSpec) {
    let g = TorusGrid::new(2, 16.0, 64).unwrap();
    let e = Exponents::new(2, 1.0, 5.0, 1.0).unwrap();
    let s = ResolventSpec::auto(1.0, &g).unwrap();
    (g, e, s)
}

fn noise(grid: &Arc<TorusGrid>, seed: u64) -> RealField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vals = (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    RealField::new(grid.clone(), vals).unwrap()
}

fn opts() -> SolverOptions {
    SolverOptions::default()
}

#[test]
fn random_inits_share_the_level() {
    let (g, e, s) = plane();
    let q = RealField::constant(&g, 1.0);
    let f = DualFunctional::new(&q, &e, &s).unwrap();
    let levels: Vec<f64> = [5u64, 6]
        .iter()
        .map(|&seed| {
            let init = positive_part_filter(&noise(&g, seed), &s).unwrap();
            let gs = solve_ground_state(&init, &f, &opts()).unwrap();
            assert!(gs.converged);
            gs.level
        })
        .collect();
    assert!((levels[0] - levels[1]).abs() <= 1e-4 * levels[0]);
}

#[test]
fn converged_state_is_a_critical_point() {
    let (g, e, s) = plane();
    let gs = limit_ground_state(1.0, &e, &s, &g, &opts()).unwrap();
    assert!(gs.converged);
    assert!(gs.fixed_point_residual <= 1e-6);
    let v_norm = lq_norm(&gs.state.v, e.p_dual).unwrap();
    assert!(gs.state.gradient_norm <= 1e-6 * v_norm.powf(e.p_dual - 1.0));
    let a = v_norm.powf(e.p_dual);
    assert!(gs.state.nehari_residual.abs() <= 1e-10 * a);
    // the profile satisfies |v|^{p'-2} v = Q^{1/p} ũ pointwise
    let q = RealField::constant(&g, 1.0);
    let u = reconstruct_profile(&gs, &q, &e, &s).unwrap();
    let lhs = gs.state.v.map(|x| x.signum() * x.abs().powf(e.p_dual - 1.0));
    let diff = lhs.sub(&u).unwrap();
    assert!(lq_norm(&diff, e.p).unwrap() <= 1e-6 * v_norm.powf(e.p_dual - 1.0));
}

#[test]
fn translated_init_moves_the_peak() {
    let (g, e, s) = plane();
    let q = RealField::constant(&g, 1.0);
    let f = DualFunctional::new(&q, &e, &s).unwrap();
    let base = limit_ground_state(1.0, &e, &s, &g, &opts()).unwrap();
    let moved = solve_ground_state(&base.state.v.translated(&[5, 0]), &f, &opts()).unwrap();
    assert!((moved.level - base.level).abs() <= 1e-6 * base.level);
    let h = g.spacing();
    assert!((moved.peak[0] - base.peak[0] - 5.0 * h).abs() <= h);
    assert!((moved.peak[1] - base.peak[1]).abs() <= h);
    // ũ follows v
    let vpeak = locate_peak(&moved.state.v).unwrap();
    for (a, b) in vpeak.iter().zip(&moved.peak) {
        assert!((a - b).abs() <= h);
    }
}

#[test]
fn limit_level_follows_the_scaling_law() {
    // J depends on Q only through t_v, so c(Q) = c(1) Q^{-2/(p-2)}
    let (g, e, s) = plane();
    let base = limit_ground_state(1.0, &e, &s, &g, &opts()).unwrap().level;
    let mut prev = f64::INFINITY;
    for q0 in [0.5, 1.0, 2.0] {
        let c = limit_ground_state(q0, &e, &s, &g, &opts()).unwrap().level;
        let want = base * q0.powf(-2.0 / (e.p - 2.0));
        assert!((c - want).abs() <= 1e-5 * want, "{c} vs {want}");
        assert!(c < prev);
        prev = c;
    }
}

#[test]
fn limit_level_is_resolved() {
    let e = Exponents::new(2, 1.0, 5.0, 1.0).unwrap();
    let levels: Vec<f64> = [128usize, 256]
        .iter()
        .map(|&n| {
            let g = TorusGrid::new(2, 16.0, n).unwrap();
            // a shared δ so that only the resolution changes
            let s = ResolventSpec::new(1.0, 0.45).unwrap();
            limit_ground_state(1.0, &e, &s, &g, &opts()).unwrap().level
        })
        .collect();
    assert!((levels[0] - levels[1]).abs() <= 0.01 * levels[1], "{levels:?}");
}

#[test]
fn limit_peak_is_aligned_to_the_origin() {
    let (g, e, s) = plane();
    let gs = limit_ground_state(1.5, &e, &s, &g, &opts()).unwrap();
    let h = g.spacing();
    assert!(gs.peak.iter().all(|c| c.abs() <= 0.5 * h));
    assert!(single_bubble_check(
        &dualhelm_core::SweepRecord {
            k: 1.0,
            eps: 1.0,
            level: gs.level,
            peak_rescaled: gs.peak.clone(),
            peak_physical: gs.peak.clone(),
            profile_distance: 0.0,
            converged: true,
            iterations: gs.iterations,
        },
        &gs,
        0.9
    ));
}

#[test]
fn split_field_fails_the_bubble_check() {
    let (g, e, s) = plane();
    let gs = limit_ground_state(1.0, &e, &s, &g, &opts()).unwrap();
    let mut split = gs.clone();
    split.state.v = gs.state.v.add(&gs.state.v.translated(&[32, 0])).unwrap();
    let rec = dualhelm_core::SweepRecord {
        k: 1.0,
        eps: 1.0,
        level: gs.level,
        peak_rescaled: gs.peak.clone(),
        peak_physical: gs.peak.clone(),
        profile_distance: 0.0,
        converged: true,
        iterations: 0,
    };
    assert!(!single_bubble_check(&rec, &split, 0.9));
    assert!(single_bubble_check(&rec, &split, 0.0));
}

#[test]
fn constant_coefficient_sweep_is_degenerate() {
    let (g, e, s) = plane();
    let o = opts();
    let limit = limit_ground_state(1.5, &e, &s, &g, &o).unwrap();
    let q = CoefficientQ::constant(1.5).unwrap();
    let sweep = run_sweep(&q, &[2.0, 4.0, 8.0], &e, &g, &s, &o, &limit).unwrap();
    for r in &sweep.records {
        assert!(r.converged);
        assert!((r.eps * r.k - 1.0).abs() < 1e-15);
        assert!(r.profile_distance <= 2.0 * o.tol, "{}", r.profile_distance);
        assert!((r.level - limit.level).abs() <= 1e-6 * limit.level);
    }
    let table = level_table(&q, &[0.5, 0.25], &e, &g, &s, &o).unwrap();
    for row in &table.rows {
        assert!(row.gap_low.abs() <= 1e-6 * row.c_0);
        assert!(row.gap_high.unwrap().abs() <= 1e-6 * row.c_0);
    }
}

#[test]
fn bump_levels_sit_between_the_limits() {
    let (g, e, s) = plane();
    let o = opts();
    let q = CoefficientQ::bump(0.5, 1.0, vec![vec![0.0, 0.0]], 1.0).unwrap();
    let table = level_table(&q, &[0.5, 0.25], &e, &g, &s, &o).unwrap();
    let c_inf = table.c_inf.unwrap();
    for row in &table.rows {
        assert!(row.converged);
        assert!(row.c_eps >= table.c_0 * (1.0 - 1e-3));
        assert!(row.c_eps < c_inf);
    }
    assert!(table.rows[1].gap_low < table.rows[0].gap_low);
    // constant limits obey c_∞/c_0 = (Q0/Q∞)^{2/(p-2)} = 3^{2/3}
    assert!((c_inf / table.c_0 - 3f64.powf(2.0 / 3.0)).abs() < 1e-5);
}

#[test]
fn cutoff_trials_bound_the_level_from_above() {
    let (g, e, s) = plane();
    let o = opts();
    let q = CoefficientQ::bump(0.5, 1.0, vec![vec![0.0, 0.0]], 1.0).unwrap();
    let limit = limit_ground_state(q.q0(), &e, &s, &g, &o).unwrap();
    let mut prev_gap = f64::INFINITY;
    let mut energies = Vec::new();
    for eps in [0.4, 0.2, 0.1] {
        let ex = e.with_k(1.0 / eps).unwrap();
        let cp = cutoff_projection(&limit.state.v, &[0.0, 0.0], &q, &ex, &s, Cutoff::Smooth).unwrap();
        let gap = (cp.t - 1.0).abs();
        assert!(gap < prev_gap, "eps {eps}: {gap} vs {prev_gap}");
        prev_gap = gap;
        let gs = solve_for_coefficient(&q, &ex, &s, &g, &o).unwrap();
        assert!(cp.energy >= gs.level * (1.0 - 1e-6));
        energies.push(cp.energy);
    }
    assert!(energies.windows(2).all(|w| w[1] <= w[0]));
    assert!((energies[2] - limit.level).abs() <= 0.05 * limit.level);
}

#[test]
fn sweep_concentrates_at_the_bump() {
    let (g, e, s) = plane();
    let o = opts();
    let q = CoefficientQ::bump(0.5, 1.0, vec![vec![0.0, 0.0]], 1.0).unwrap();
    let limit = limit_ground_state(q.q0(), &e, &s, &g, &o).unwrap();
    let sweep = run_sweep(&q, &[2.0, 4.0, 8.0], &e, &g, &s, &o, &limit).unwrap();
    let d: Vec<f64> = sweep.records.iter().map(|r| r.profile_distance).collect();
    assert!(d.windows(2).all(|w| w[1] <= w[0] * 1.1), "{d:?}");
    assert!(d[2] <= 0.1);
    let last = sweep.records.last().unwrap();
    let cell = last.eps * g.spacing();
    let drift = last.peak_physical.iter().map(|c| c * c).sum::<f64>().sqrt();
    assert!(drift <= 2.0 * cell);
    let gs = sweep.states.last().unwrap().as_ref().unwrap();
    assert!(single_bubble_check(last, gs, 0.9));
    assert!(profile_distance(&gs.u_rescaled, &limit.u_rescaled, e.p).unwrap() == last.profile_distance);
}

#[test]
fn leaving_u_plus_falls_back_to_descent() {
    // with this δ the plain fixed-point image leaves U+ after a few steps
    let (g, e, _) = plane();
    let s = ResolventSpec::new(1.0, 0.25).unwrap();
    let q = CoefficientQ::bump(0.5, 1.0, vec![vec![0.0, 0.0]], 1.0).unwrap();
    let gs = solve_for_coefficient(&q, &e.with_k(4.0).unwrap(), &s, &g, &opts()).unwrap();
    assert!(gs.converged);
    assert!(gs.used_fallback);
    assert!(gs.fixed_point_residual <= 1e-6);
}
