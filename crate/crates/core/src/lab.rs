//! Concentration experiments: profile reconstruction, peak location and
//! alignment, sweeps over `k` and level tables.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::coefficient::CoefficientQ;
use crate::dual::DualFunctional;
use crate::error::{Error, Result};
use crate::exponents::Exponents;
use crate::grid::{Point, TorusGrid};
use crate::resolvent::ResolventSpec;
use crate::solver::{
    limit_ground_state, solve_for_coefficient, solve_ground_state, GroundState, SolverOptions,
};
use crate::spectral::{lq_norm, RealField};

/// `R^s(Q_ε^{1/p} v)` for the dual variable of `gs`.
pub fn reconstruct_profile(
    gs: &GroundState,
    qfield: &RealField,
    exps: &Exponents,
    spec: &ResolventSpec,
) -> Result<RealField> {
    DualFunctional::new(qfield, exps, spec)?.profile(&gs.state.v)
}

fn nodal_argmax(f: &RealField) -> Option<usize> {
    let mut best = None;
    let mut top = 0.0;
    // strict comparison keeps the first, i.e. lexicographically smallest,
    // index among ties
    for (i, v) in f.values().iter().enumerate() {
        if v.abs() > top {
            top = v.abs();
            best = Some(i);
        }
    }
    best
}

/// Argmax of `|f|` over the nodes, refined per axis by the vertex of the
/// parabola through the node and its two neighbours. Ties go to the
/// lexicographically smallest node index.
pub fn locate_peak(f: &RealField) -> Result<Point> {
    let grid = f.grid();
    let best = nodal_argmax(f).ok_or(Error::ZeroField)?;
    let idx = grid.multi_index(best);
    let n = grid.points_per_axis();
    let h = grid.spacing();
    let vals = f.values();
    let mut peak = Vec::with_capacity(grid.dim());
    for a in 0..grid.dim() {
        let mut lo = idx;
        let mut hi = idx;
        lo[a] = (idx[a] + n - 1) % n;
        hi[a] = (idx[a] + 1) % n;
        let fm = vals[grid.flat_index(&lo)].abs();
        let f0 = vals[best].abs();
        let fp = vals[grid.flat_index(&hi)].abs();
        let curv = fm - 2.0 * f0 + fp;
        let offset = if curv < 0.0 {
            (0.5 * (fm - fp) / curv).clamp(-0.5, 0.5)
        } else {
            0.0
        };
        peak.push(grid.coordinate(idx[a]) + offset * h);
    }
    Ok(peak)
}

/// `min_{τ, σ = ±1} ‖σ f(· + τ) - g‖_p / ‖g‖_p` over whole-cell shifts `τ`
/// within one cell of the shift that aligns the nodal peaks.
pub fn profile_distance(f: &RealField, g: &RealField, p: f64) -> Result<f64> {
    f.check_same_grid(g)?;
    let gnorm = lq_norm(g, p)?;
    if gnorm == 0.0 {
        return Err(Error::ZeroReference);
    }
    let Some(fi) = nodal_argmax(f) else {
        return Ok(1.0);
    };
    let gi = nodal_argmax(g).ok_or(Error::ZeroReference)?;
    let grid = f.grid();
    let dim = grid.dim();
    let from = grid.multi_index(fi);
    let to = grid.multi_index(gi);
    let base: Vec<isize> = (0..dim).map(|a| to[a] as isize - from[a] as isize).collect();
    let mut best = f64::INFINITY;
    for combo in 0..3usize.pow(dim as u32) {
        let mut shift = base.clone();
        let mut c = combo;
        for s in shift.iter_mut() {
            *s += (c % 3) as isize - 1;
            c /= 3;
        }
        let moved = f.translated(&shift);
        for sign in [1.0, -1.0] {
            let d = moved.zip_map(g, |a, b| sign * a - b)?;
            best = best.min(lq_norm(&d, p)?);
        }
    }
    Ok(best / gnorm)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub k: f64,
    pub eps: f64,
    pub level: f64,
    /// `y*`, peak of `|u_rescaled|`.
    pub peak_rescaled: Point,
    /// `ε y*`.
    pub peak_physical: Point,
    pub profile_distance: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl SweepRecord {
    fn failed(k: f64, eps: f64, dim: usize) -> Self {
        Self {
            k,
            eps,
            level: f64::NAN,
            peak_rescaled: vec![f64::NAN; dim],
            peak_physical: vec![f64::NAN; dim],
            profile_distance: f64::NAN,
            converged: false,
            iterations: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub records: Vec<SweepRecord>,
    /// Ground state per record, `None` where the solve failed outright.
    pub states: Vec<Option<GroundState>>,
}

/// One point of a sweep. With `warm` the solver starts from that dual
/// variable, falling back to a cold start when it is not admissible.
pub fn sweep_point(
    q: &CoefficientQ,
    k: f64,
    template: &Exponents,
    grid: &Arc<TorusGrid>,
    spec: &ResolventSpec,
    opts: &SolverOptions,
    limit: &GroundState,
    warm: Option<&RealField>,
) -> (SweepRecord, Option<GroundState>) {
    let dim = grid.dim();
    let exps = match template.with_k(k) {
        Ok(e) => e,
        Err(_) => return (SweepRecord::failed(k, 1.0 / k, dim), None),
    };
    let solved = warm
        .and_then(|v| warm_solve(q, &exps, spec, grid, opts, v).ok())
        .map(Ok)
        .unwrap_or_else(|| solve_for_coefficient(q, &exps, spec, grid, opts));
    let gs = match solved {
        Ok(gs) => gs,
        Err(_) => return (SweepRecord::failed(k, exps.eps, dim), None),
    };
    let distance = profile_distance(&gs.u_rescaled, &limit.u_rescaled, exps.p).unwrap_or(f64::NAN);
    let record = SweepRecord {
        k,
        eps: exps.eps,
        level: gs.level,
        peak_rescaled: gs.peak.clone(),
        peak_physical: gs.peak.iter().map(|c| exps.eps * c).collect(),
        profile_distance: distance,
        converged: gs.converged,
        iterations: gs.iterations,
    };
    (record, Some(gs))
}

/// Translates `v` so that its peak sits at the image `y/ε` of the first
/// maximum of `Q`, then solves.
fn warm_solve(
    q: &CoefficientQ,
    exps: &Exponents,
    spec: &ResolventSpec,
    grid: &Arc<TorusGrid>,
    opts: &SolverOptions,
    v: &RealField,
) -> Result<GroundState> {
    let qfield = q.sample(grid, exps.eps)?;
    let functional = DualFunctional::new(&qfield, exps, spec)?;
    let y = q.maxima(grid.dim()).into_iter().next().ok_or(Error::ZeroField)?;
    let target: Point = y.iter().map(|c| c / exps.eps).collect();
    let to = grid.multi_index(grid.nearest_node(&target));
    let from = grid.multi_index(nodal_argmax(v).ok_or(Error::ZeroField)?);
    let shift: Vec<isize> = (0..grid.dim()).map(|a| to[a] as isize - from[a] as isize).collect();
    solve_ground_state(&v.translated(&shift), &functional, opts)
}

/// Sequential sweep over ascending `ks`, each solve warm-started from the
/// previous dual variable. Per-k failures are recorded, not propagated.
pub fn run_sweep(
    q: &CoefficientQ,
    ks: &[f64],
    template: &Exponents,
    grid: &Arc<TorusGrid>,
    spec: &ResolventSpec,
    opts: &SolverOptions,
    limit: &GroundState,
) -> Result<Sweep> {
    if ks.is_empty() {
        return Err(Error::InvalidParameter("sweep needs at least one k"));
    }
    if ks.windows(2).any(|w| !(w[0] < w[1])) || ks.iter().any(|&k| !(k > 0.0)) {
        return Err(Error::InvalidParameter("ks must be positive and ascending"));
    }
    let mut records = Vec::with_capacity(ks.len());
    let mut states: Vec<Option<GroundState>> = Vec::with_capacity(ks.len());
    for &k in ks {
        let warm = states.iter().rev().flatten().next().map(|gs| gs.state.v.clone());
        let (rec, gs) = sweep_point(q, k, template, grid, spec, opts, limit, warm.as_ref());
        records.push(rec);
        states.push(gs);
    }
    Ok(Sweep { records, states })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelRow {
    pub eps: f64,
    pub c_eps: f64,
    pub c_0: f64,
    /// `None` when `Q∞ = 0`.
    pub c_inf: Option<f64>,
    /// `c_ε - c_0`.
    pub gap_low: f64,
    /// `c_∞ - c_ε`.
    pub gap_high: Option<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct LevelTable {
    pub rows: Vec<LevelRow>,
    pub c_0: f64,
    pub c_inf: Option<f64>,
    /// Whether both limit problems converged.
    pub limits_converged: bool,
}

/// `c_ε` for each `ε` next to the limit levels `c_0 = c(Q0)` and
/// `c_∞ = c(Q∞)`, the latter computed once.
pub fn level_table(
    q: &CoefficientQ,
    eps_list: &[f64],
    template: &Exponents,
    grid: &Arc<TorusGrid>,
    spec: &ResolventSpec,
    opts: &SolverOptions,
) -> Result<LevelTable> {
    let zero = limit_ground_state(q.q0(), template, spec, grid, opts)?;
    let c_0 = zero.level;
    let (c_inf, inf_ok) = if q.q_inf() == q.q0() {
        (Some(c_0), zero.converged)
    } else if q.q_inf() > 0.0 {
        let inf = limit_ground_state(q.q_inf(), template, spec, grid, opts)?;
        (Some(inf.level), inf.converged)
    } else {
        (None, true)
    };
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter("eps must be positive"));
        }
        let (c_eps, converged) = template
            .with_k(1.0 / eps)
            .and_then(|e| solve_for_coefficient(q, &e, spec, grid, opts))
            .map(|gs| (gs.level, gs.converged))
            .unwrap_or((f64::NAN, false));
        rows.push(LevelRow {
            eps,
            c_eps,
            c_0,
            c_inf,
            gap_low: c_eps - c_0,
            gap_high: c_inf.map(|c| c - c_eps),
            converged,
        });
    }
    Ok(LevelTable {
        rows,
        c_0,
        c_inf,
        limits_converged: zero.converged && inf_ok,
    })
}

/// Whether at least `fraction` of `∫|v|^{p'}` lies within `0.25 L` of the
/// recorded peak.
pub fn single_bubble_check(record: &SweepRecord, gs: &GroundState, fraction: f64) -> bool {
    if fraction <= 0.0 {
        return true;
    }
    let v = &gs.state.v;
    let grid = v.grid();
    let pd = gs.exps.p_dual;
    let radius = 0.25 * grid.half_width();
    let mut inside = 0.0;
    let mut total = 0.0;
    for (i, x) in v.values().iter().enumerate() {
        let m = x.abs().powf(pd);
        total += m;
        if grid.periodic_distance(i, &record.peak_rescaled) <= radius {
            inside += m;
        }
    }
    total > 0.0 && inside >= fraction * total
}
