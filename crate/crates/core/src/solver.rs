//! Dual ground states by fixed-point iteration with Nehari renormalisation.
//!
//! One sweep is `w = A v`, `ṽ = |w|^{p-2} w`, `v ← t_ṽ ṽ`. Since
//! `A(t ṽ) = t A ṽ`, the product computed for the projection is reused as the
//! next `w`, so each iteration costs one forward and one inverse transform.

use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::coefficient::CoefficientQ;
use crate::dual::{DualFunctional, DualState};
use crate::error::{Error, Result};
use crate::exponents::Exponents;
use crate::grid::{Point, TorusGrid};
use crate::lab::locate_peak;
use crate::resolvent::ResolventSpec;
use crate::spectral::{inner_product, lq_integral, lq_norm, RealField};
use crate::util::{signed_pow, smoothstep};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Bound on the relative fixed-point residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Consecutive energy increases that trigger a projected descent step.
    pub fallback_after: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 500,
            fallback_after: 5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub state: DualState,
    /// Candidate for `c_ε`.
    pub level: f64,
    /// `R^s(Q_ε^{1/p} v)`, the solution profile in the rescaled frame.
    pub u_rescaled: RealField,
    /// `k^{2s/(p-2)}`, the original-frame amplitude; never applied to fields.
    pub scale_factor: f64,
    pub peak: Point,
    pub iterations: usize,
    pub converged: bool,
    pub fixed_point_residual: f64,
    pub used_fallback: bool,
    pub exps: Exponents,
}

/// `‖|v|^{p'-2} v - w‖_p / ‖v‖_{p'}^{p'-1}`.
pub fn fixed_point_residual(v: &RealField, w: &RealField, exps: &Exponents) -> Result<f64> {
    let pd = exps.p_dual;
    let diff = v.zip_map(w, |a, b| signed_pow(a, pd) - b)?;
    let denom = lq_integral(v, pd).powf((pd - 1.0) / pd);
    if denom == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(lq_norm(&diff, exps.p)? / denom)
}

struct Iterate {
    v: RealField,
    w: RealField,
    energy: f64,
}

/// Projects `v` and returns it with `A v`, or `None` outside `U+`.
fn project(f: &DualFunctional, v: &RealField) -> Result<Option<Iterate>> {
    let pd = f.exponents().p_dual;
    let a = lq_integral(v, pd);
    if a == 0.0 {
        return Err(Error::ZeroField);
    }
    let av = f.apply(v)?;
    let b = inner_product(v, &av)?;
    if !(b > 0.0) {
        return Ok(None);
    }
    let t = (a / b).powf(1.0 / (2.0 - pd));
    let energy = (1.0 / pd - 0.5) * a * t.powf(pd);
    Ok(Some(Iterate {
        v: v.scaled(t),
        w: av.scaled(t),
        energy,
    }))
}

/// Backtracking descent along `-J'(v)` followed by re-projection. Returns
/// `None` when no step lowers the energy.
fn descent_step(f: &DualFunctional, it: &Iterate) -> Result<Option<Iterate>> {
    let pd = f.exponents().p_dual;
    let g = it.v.zip_map(&it.w, |a, b| signed_pow(a, pd) - b)?;
    let gmax = g.max_abs();
    if gmax == 0.0 {
        return Ok(None);
    }
    let mut alpha = it.v.max_abs() / gmax;
    for _ in 0..40 {
        let trial = it.v.zip_map(&g, |a, b| a - alpha * b)?;
        if !trial.is_zero() {
            if let Some(next) = project(f, &trial)? {
                if next.energy < it.energy {
                    return Ok(Some(next));
                }
            }
        }
        alpha *= 0.5;
    }
    Ok(None)
}

/// Runs the fixed-point iteration from `init`, which must lie in `U+`.
/// Non-convergence is not an error: the last iterate is returned with
/// `converged = false`.
pub fn solve_ground_state(
    init: &RealField,
    functional: &DualFunctional,
    opts: &SolverOptions,
) -> Result<GroundState> {
    init.check_same_grid(functional.qroot())?;
    let exps = *functional.exponents();
    let mut cur = match project(functional, init)? {
        Some(it) => it,
        None => return Err(Error::NotInUPlus(functional.quad_form(init)?)),
    };
    let mut residual = fixed_point_residual(&cur.v, &cur.w, &exps)?;
    let mut iterations = 0;
    let mut increases = 0;
    let mut used_fallback = false;
    while residual > opts.tol && iterations < opts.max_iter {
        iterations += 1;
        let next_v = cur.w.map(|x| signed_pow(x, exps.p));
        if next_v.is_zero() {
            return Err(Error::LeftUPlus { iteration: iterations });
        }
        let next = match project(functional, &next_v)? {
            Some(it) => it,
            // the fixed-point image left U+; take a safeguarded step instead
            None => match descent_step(functional, &cur)? {
                Some(it) => {
                    used_fallback = true;
                    it
                }
                None => return Err(Error::LeftUPlus { iteration: iterations }),
            },
        };
        if next.energy > cur.energy {
            increases += 1;
        } else {
            increases = 0;
        }
        cur = next;
        if opts.fallback_after > 0 && increases >= opts.fallback_after {
            increases = 0;
            if let Some(better) = descent_step(functional, &cur)? {
                used_fallback = true;
                cur = better;
            }
        }
        residual = fixed_point_residual(&cur.v, &cur.w, &exps)?;
    }
    finish(functional, cur, residual, iterations, residual <= opts.tol, used_fallback)
}

fn finish(
    functional: &DualFunctional,
    cur: Iterate,
    residual: f64,
    iterations: usize,
    converged: bool,
    used_fallback: bool,
) -> Result<GroundState> {
    let mut state = functional.state_from(cur.v, &cur.w)?;
    state.on_nehari = true;
    let u_rescaled = functional.profile(&state.v)?;
    let peak = locate_peak(&u_rescaled)?;
    Ok(GroundState {
        level: state.energy,
        state,
        u_rescaled,
        scale_factor: functional.exponents().scale_factor(),
        peak,
        iterations,
        converged,
        fixed_point_residual: residual,
        used_fallback,
        exps: *functional.exponents(),
    })
}

/// `max(m_δ, 0)` applied to `f`. The result has a nonnegative quadratic
/// form for constant `Q` and is the intended way to turn arbitrary fields
/// (random noise, bumps) into starting points.
pub fn positive_part_filter(f: &RealField, spec: &ResolventSpec) -> Result<RealField> {
    spec.positive_part(f.grid())?.apply(f)
}

/// Unit-width Gaussian at the node nearest to `center` (rescaled frame),
/// passed through [`positive_part_filter`].
pub fn default_init(grid: &Arc<TorusGrid>, spec: &ResolventSpec, center: &[f64]) -> Result<RealField> {
    let c = grid.node(grid.nearest_node(center));
    let bump = RealField::from_fn(grid, |x| {
        let r2: f64 = x
            .iter()
            .zip(&c)
            .map(|(a, b)| grid.periodic_delta(*a, *b).powi(2))
            .sum();
        (-r2 / 2.0).exp()
    })?;
    positive_part_filter(&bump, spec)
}

/// Ground state of the constant-coefficient problem `Q ≡ q0`, translated so
/// that the nodal peak of `|u_rescaled|` sits at the origin node.
pub fn limit_ground_state(
    q0: f64,
    exps: &Exponents,
    spec: &ResolventSpec,
    grid: &Arc<TorusGrid>,
    opts: &SolverOptions,
) -> Result<GroundState> {
    let q = CoefficientQ::constant(q0)?;
    let qfield = q.sample(grid, exps.eps)?;
    let functional = DualFunctional::new(&qfield, exps, spec)?;
    let init = default_init(grid, spec, &alloc::vec![0.0; grid.dim()])?;
    let gs = solve_ground_state(&init, &functional, opts)?;
    align_to_origin(gs, &functional)
}

fn nodal_argmax(f: &RealField) -> usize {
    let mut best = 0;
    let mut top = f64::NEG_INFINITY;
    for (i, v) in f.values().iter().enumerate() {
        if v.abs() > top {
            top = v.abs();
            best = i;
        }
    }
    best
}

fn align_to_origin(gs: GroundState, functional: &DualFunctional) -> Result<GroundState> {
    let grid = gs.u_rescaled.grid().clone();
    let from = grid.multi_index(nodal_argmax(&gs.u_rescaled));
    let to = grid.multi_index(grid.origin_index());
    let shift: Vec<isize> = (0..grid.dim()).map(|a| to[a] as isize - from[a] as isize).collect();
    if shift.iter().all(|&s| s == 0) {
        return Ok(gs);
    }
    // Q is constant, so translating v commutes with A
    let v = gs.state.v.translated(&shift);
    let w = functional.apply(&v)?;
    let mut state = functional.state_from(v, &w)?;
    state.on_nehari = true;
    let u_rescaled = gs.u_rescaled.translated(&shift);
    let peak = locate_peak(&u_rescaled)?;
    Ok(GroundState {
        state,
        u_rescaled,
        peak,
        ..gs
    })
}

/// Samples `Q_ε`, seeds the solver at the image `y/ε` of every maximum of
/// `Q` and keeps the lowest converged level (the lowest level overall when
/// none converged).
pub fn solve_for_coefficient(
    q: &CoefficientQ,
    exps: &Exponents,
    spec: &ResolventSpec,
    grid: &Arc<TorusGrid>,
    opts: &SolverOptions,
) -> Result<GroundState> {
    let qfield = q.sample(grid, exps.eps)?;
    let functional = DualFunctional::new(&qfield, exps, spec)?;
    let mut best: Option<GroundState> = None;
    for y in q.maxima(grid.dim()) {
        let center: Point = y.iter().map(|c| c / exps.eps).collect();
        let init = default_init(grid, spec, &center)?;
        let gs = solve_ground_state(&init, &functional, opts)?;
        best = Some(match best {
            None => gs,
            Some(b) => {
                let better = (gs.converged && !b.converged)
                    || (gs.converged == b.converged && gs.level < b.level);
                if better {
                    gs
                } else {
                    b
                }
            }
        });
    }
    best.ok_or(Error::InvalidParameter("coefficient has no maximum points"))
}

/// Cutoff profile `η`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cutoff {
    /// Radial, `1` on `B_1`, `0` outside `B_2`, smooth in between.
    Smooth,
    /// `η ≡ 1`.
    None,
}

impl Cutoff {
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Cutoff::Smooth => 1.0 - smoothstep(r - 1.0),
            Cutoff::None => 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CutoffProjection {
    /// `φ_{ε,y}` before scaling.
    pub phi: RealField,
    /// `t_{ε,y}`.
    pub t: f64,
    /// `J_ε(t_{ε,y} φ_{ε,y})`.
    pub energy: f64,
}

/// Builds `φ(x) = η(εx - y) w0(x - y/ε)` with the translation rounded to
/// the nearest node, and projects it onto the Nehari set of `J_ε`.
///
/// `w0` is the dual variable of a limit ground state aligned at the origin.
pub fn cutoff_projection(
    w0: &RealField,
    y: &[f64],
    q: &CoefficientQ,
    exps: &Exponents,
    spec: &ResolventSpec,
    cutoff: Cutoff,
) -> Result<CutoffProjection> {
    let grid = w0.grid().clone();
    let eps = exps.eps;
    let target: Point = y.iter().map(|c| c / eps).collect();
    let to = grid.multi_index(grid.nearest_node(&target));
    let origin = grid.multi_index(grid.origin_index());
    let shift: Vec<isize> = (0..grid.dim()).map(|a| to[a] as isize - origin[a] as isize).collect();
    let shifted = w0.translated(&shift);
    let centre = grid.node(grid.nearest_node(&target));
    let vals = shifted
        .values()
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let r = eps * grid.periodic_distance(i, &centre);
            cutoff.eval(r) * w
        })
        .collect();
    let phi = RealField::new(grid.clone(), vals)?;
    let qfield = q.sample(&grid, eps)?;
    let functional = DualFunctional::new(&qfield, exps, spec)?;
    let t = functional.nehari_scale(&phi)?;
    let a = lq_integral(&phi, exps.p_dual);
    let energy = (1.0 / exps.p_dual - 0.5) * a * t.powf(exps.p_dual);
    Ok(CutoffProjection { phi, t, energy })
}
