//! The six experiments. Each returns its results as plain data and knows
//! how to lay them out as tables.

use std::sync::Arc;
use std::thread;

use dualhelm_core::lab::{level_table, run_sweep, single_bubble_check, sweep_point};
use dualhelm_core::resolvent::{
    band_decompose, extract_kernel, fit_decay_exponent, interaction_decay, interaction_slope,
    radial_bump, radial_envelope, InteractionSample,
};
use dualhelm_core::solver::{
    limit_ground_state, positive_part_filter, solve_for_coefficient, solve_ground_state,
};
use dualhelm_core::{
    BandCutoff, DualFunctional, Error, GroundState, HypothesisCheck, LevelTable, RealField,
    ResolventSpec, Sweep, SweepRecord, TorusGrid,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::config::{Command, Delta, Init, RunConfig};
use crate::output::{json_float, Cell, Table};

const AXES: [&str; 3] = ["x", "y", "z"];

/// Fraction of the p'-mass the final sweep state must keep near its peak.
pub const BUBBLE_FRACTION: f64 = 0.9;

#[derive(Debug, Error)]
#[error("{step}: {source}")]
pub struct RunError {
    pub step: &'static str,
    #[source]
    pub source: Error,
}

trait Step<T> {
    fn step(self, step: &'static str) -> Result<T, RunError>;
}

impl<T> Step<T> for dualhelm_core::Result<T> {
    fn step(self, step: &'static str) -> Result<T, RunError> {
        self.map_err(|source| RunError { step, source })
    }
}

/// Tables plus the flags and scalars that go into the manifest.
#[derive(Debug, Default)]
pub struct Report {
    pub tables: Vec<Table>,
    /// Convergence of each required step. Any `false` means exit code 1.
    pub flags: Vec<(String, bool)>,
    pub summary: Map<String, Value>,
}

impl Report {
    pub fn all_converged(&self) -> bool {
        self.flags.iter().all(|(_, ok)| *ok)
    }
}

fn peak_header(dim: usize, prefix: &str) -> Vec<String> {
    AXES[..dim].iter().map(|a| format!("{prefix}_{a}")).collect()
}

fn table(name: &str, header: Vec<String>) -> Table {
    Table {
        name: name.to_string(),
        header,
        rows: Vec::new(),
    }
}

pub struct Validation {
    pub checks: [HypothesisCheck; 3],
    pub p_dual: f64,
    pub lambda_p: f64,
    pub passed: bool,
}

pub fn validate(cfg: &RunConfig) -> Result<Validation, RunError> {
    let e = cfg.exponents().step("exponents")?;
    let checks = e.hypotheses();
    Ok(Validation {
        passed: checks.iter().all(|c| c.passed),
        checks,
        p_dual: e.p_dual,
        lambda_p: e.lambda_p,
    })
}

impl Validation {
    pub fn lines(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .checks
            .iter()
            .map(|c| {
                let interval = if c.name == "dim" {
                    format!("[{}, inf)", c.lower)
                } else {
                    format!("({}, {})", c.lower, c.upper)
                };
                format!(
                    "{:<4} = {:<8} in {interval}: {}",
                    c.name,
                    c.value,
                    if c.passed { "pass" } else { "FAIL" }
                )
            })
            .collect();
        out.push(format!("p'   = {:.6}", self.p_dual));
        out.push(format!("lambda_p = {:.6}", self.lambda_p));
        out
    }

    fn report(&self) -> Report {
        let mut t = Table::new("validate", &["hypothesis", "value", "lower", "upper", "passed"]);
        for c in &self.checks {
            t.push(vec![
                c.name.into(),
                c.value.into(),
                c.lower.into(),
                c.upper.into(),
                c.passed.into(),
            ]);
        }
        let mut summary = Map::new();
        summary.insert("p_dual".into(), json_float(self.p_dual));
        summary.insert("lambda_p".into(), json_float(self.lambda_p));
        summary.insert("hypotheses_passed".into(), Value::Bool(self.passed));
        Report {
            tables: vec![t],
            flags: Vec::new(),
            summary,
        }
    }
}

pub struct DecayFit {
    pub part: &'static str,
    pub slope: f64,
    pub target: f64,
}

pub struct KernelCheck {
    pub delta: f64,
    /// `(radius, |K|, |K1|, |K2|)` shell maxima.
    pub envelope: Vec<(f64, f64, f64, f64)>,
    pub fits: Vec<DecayFit>,
    pub window: (f64, f64),
}

pub fn kernel_check(cfg: &RunConfig) -> Result<KernelCheck, RunError> {
    let grid = cfg.grid().step("grid")?;
    let spec = cfg.spec(&grid).step("resolvent")?;
    let cutoff = BandCutoff::new(cfg.kernel.plateau, cfg.kernel.support).step("band cutoff")?;
    let kernel = extract_kernel(&spec, &grid).step("kernel extraction")?;
    let bundle = band_decompose(&kernel, &cutoff).step("band decomposition")?;
    let shells = cfg.kernel.shells;
    let full = radial_envelope(&bundle.full, shells).step("envelope K")?;
    let band = radial_envelope(&bundle.band, shells).step("envelope K1")?;
    let rest = radial_envelope(&bundle.remainder, shells).step("envelope K2")?;
    let window = (cfg.kernel.window_lo, cfg.kernel.window_hi);
    let n = cfg.dim as f64;
    let fits = vec![
        DecayFit {
            part: "K1",
            slope: fit_decay_exponent(&band, window).step("K1 fit")?,
            target: (1.0 - n) / 2.0,
        },
        DecayFit {
            part: "K2",
            slope: fit_decay_exponent(&rest, window).step("K2 fit")?,
            target: -n,
        },
    ];
    let envelope = full
        .iter()
        .zip(&band)
        .zip(&rest)
        .map(|((a, b), c)| (a.0, a.1, b.1, c.1))
        .collect();
    Ok(KernelCheck {
        delta: spec.delta,
        envelope,
        fits,
        window,
    })
}

impl KernelCheck {
    fn report(&self) -> Report {
        let mut fits = Table::new(
            "kernel_decay",
            &["part", "window_lo", "window_hi", "slope", "target_slope"],
        );
        for f in &self.fits {
            fits.push(vec![
                f.part.into(),
                self.window.0.into(),
                self.window.1.into(),
                f.slope.into(),
                f.target.into(),
            ]);
        }
        let mut env = Table::new("kernel_envelope", &["radius", "K", "K1", "K2"]);
        for &(r, a, b, c) in &self.envelope {
            env.push(vec![r.into(), a.into(), b.into(), c.into()]);
        }
        let mut summary = Map::new();
        summary.insert("delta".into(), json_float(self.delta));
        Report {
            tables: vec![fits, env],
            flags: Vec::new(),
            summary,
        }
    }
}

pub struct InteractionCheck {
    pub delta: f64,
    pub samples: Vec<InteractionSample>,
    pub slope: f64,
    pub lambda_p: f64,
}

pub fn interaction_check(cfg: &RunConfig) -> Result<InteractionCheck, RunError> {
    let grid = cfg.grid().step("grid")?;
    let spec = cfg.spec(&grid).step("resolvent")?;
    let e = cfg.exponents().step("exponents")?;
    let u = radial_bump(&grid, cfg.interaction_radius);
    let samples = interaction_decay(&u, &spec, e.p, cfg.interaction_radius, &cfg.interaction_gaps)
        .step("interaction")?;
    let slope = interaction_slope(&samples).step("interaction fit")?;
    Ok(InteractionCheck {
        delta: spec.delta,
        samples,
        slope,
        lambda_p: e.lambda_p,
    })
}

impl InteractionCheck {
    fn report(&self) -> Report {
        let mut t = Table::new(
            "interaction",
            &["gap", "interaction", "u_norm", "v_norm", "normalized"],
        );
        for s in &self.samples {
            t.push(vec![
                s.gap.into(),
                s.interaction.into(),
                s.u_norm.into(),
                s.v_norm.into(),
                s.normalized.into(),
            ]);
        }
        let mut fit = Table::new("interaction_fit", &["slope", "lambda_p", "target_slope"]);
        fit.push(vec![self.slope.into(), self.lambda_p.into(), (-self.lambda_p).into()]);
        let mut summary = Map::new();
        summary.insert("delta".into(), json_float(self.delta));
        Report {
            tables: vec![t, fit],
            flags: Vec::new(),
            summary,
        }
    }
}

pub struct SolveRun {
    pub delta: f64,
    pub runs: Vec<GroundState>,
    /// Ground state per requested delta, `None` where the solve failed.
    pub delta_study: Vec<(f64, Option<GroundState>)>,
}

/// Seeded noise through the positive part of the symbol, redrawn until the
/// quadratic form is positive.
fn random_init(
    rng: &mut ChaCha8Rng,
    grid: &Arc<TorusGrid>,
    spec: &ResolventSpec,
    functional: &DualFunctional,
) -> Result<RealField, RunError> {
    for _ in 0..16 {
        let vals = (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let noise = RealField::new(grid.clone(), vals).step("random init")?;
        let v = positive_part_filter(&noise, spec).step("random init")?;
        if functional.quad_form(&v).step("random init")? > 0.0 {
            return Ok(v);
        }
    }
    Err(RunError {
        step: "random init",
        source: Error::NotInUPlus(0.0),
    })
}

pub fn solve(cfg: &RunConfig) -> Result<SolveRun, RunError> {
    let grid = cfg.grid().step("grid")?;
    let spec = cfg.spec(&grid).step("resolvent")?;
    let e = cfg.exponents().step("exponents")?;
    let q = cfg.coefficient().step("coefficient")?;
    let opts = cfg.solver_options();
    let runs = match cfg.solver.init {
        Init::Gaussian => vec![solve_for_coefficient(&q, &e, &spec, &grid, &opts).step("solve")?],
        Init::Random => {
            let qfield = q.sample(&grid, e.eps).step("sample Q")?;
            let functional = DualFunctional::new(&qfield, &e, &spec).step("functional")?;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.solver.seed);
            (0..cfg.solver.restarts)
                .map(|_| {
                    let init = random_init(&mut rng, &grid, &spec, &functional)?;
                    solve_ground_state(&init, &functional, &opts).step("solve")
                })
                .collect::<Result<Vec<_>, _>>()?
        }
    };
    let delta_study = cfg
        .delta_list
        .iter()
        .map(|&d| {
            let s = cfg.spec_with(&grid, Delta::Fixed(d)).step("resolvent")?;
            Ok((d, solve_for_coefficient(&q, &e, &s, &grid, &opts).ok()))
        })
        .collect::<Result<Vec<_>, RunError>>()?;
    Ok(SolveRun {
        delta: spec.delta,
        runs,
        delta_study,
    })
}

impl SolveRun {
    fn report(&self, dim: usize) -> Report {
        let mut header = vec!["run".to_string(), "level".to_string()];
        header.extend(peak_header(dim, "peak"));
        header.extend(["iterations", "residual", "converged"].map(String::from));
        let mut t = table("ground_state", header);
        let mut flags = Vec::new();
        for (i, gs) in self.runs.iter().enumerate() {
            let mut row = vec![i.into(), gs.level.into()];
            row.extend(gs.peak.iter().map(|&c| Cell::Float(c)));
            row.extend([
                gs.iterations.into(),
                gs.fixed_point_residual.into(),
                gs.converged.into(),
            ]);
            t.push(row);
            flags.push((format!("solve[{i}]"), gs.converged));
        }
        let mut tables = vec![t];
        if let Some(gs) = self.runs.first() {
            tables.push(profile_line(gs));
        }
        if !self.delta_study.is_empty() {
            let mut d = Table::new(
                "delta_study",
                &["delta", "level", "iterations", "residual", "converged"],
            );
            for (delta, gs) in &self.delta_study {
                let row = match gs {
                    Some(gs) => vec![
                        (*delta).into(),
                        gs.level.into(),
                        gs.iterations.into(),
                        gs.fixed_point_residual.into(),
                        gs.converged.into(),
                    ],
                    None => vec![(*delta).into(), Cell::Missing, Cell::Missing, Cell::Missing, false.into()],
                };
                d.push(row);
                flags.push((format!("delta_study[{delta}]"), gs.as_ref().is_some_and(|g| g.converged)));
            }
            tables.push(d);
        }
        let mut summary = Map::new();
        summary.insert("delta".into(), json_float(self.delta));
        if let Some(gs) = self.runs.first() {
            summary.insert("scale_factor".into(), json_float(gs.scale_factor));
            summary.insert("used_fallback".into(), Value::Bool(gs.used_fallback));
        }
        Report {
            tables,
            flags,
            summary,
        }
    }
}

/// `v` and `ũ` along the first axis through the nodal peak.
fn profile_line(gs: &GroundState) -> Table {
    let grid = gs.u_rescaled.grid();
    let n = grid.points_per_axis();
    let peak = grid.multi_index(grid.nearest_node(&gs.peak));
    let mut t = Table::new("profile", &["x", "v", "u"]);
    for j in 0..n {
        let mut idx = peak;
        idx[0] = j;
        let flat = grid.flat_index(&idx[..grid.dim()]);
        t.push(vec![
            grid.coordinate(j).into(),
            gs.state.v.values()[flat].into(),
            gs.u_rescaled.values()[flat].into(),
        ]);
    }
    t
}

pub struct LevelRun {
    pub delta: f64,
    pub table: LevelTable,
}

pub fn levels(cfg: &RunConfig) -> Result<LevelRun, RunError> {
    let grid = cfg.grid().step("grid")?;
    let spec = cfg.spec(&grid).step("resolvent")?;
    let e = cfg.exponents().step("exponents")?;
    let q = cfg.coefficient().step("coefficient")?;
    let table = level_table(&q, &cfg.eps_list, &e, &grid, &spec, &cfg.solver_options())
        .step("level table")?;
    Ok(LevelRun {
        delta: spec.delta,
        table,
    })
}

impl LevelRun {
    fn report(&self) -> Report {
        let mut t = Table::new(
            "levels",
            &["eps", "c_eps", "c_0", "c_inf", "gap_low", "gap_high", "converged"],
        );
        let mut flags = vec![("limits".to_string(), self.table.limits_converged)];
        for r in &self.table.rows {
            t.push(vec![
                r.eps.into(),
                r.c_eps.into(),
                r.c_0.into(),
                r.c_inf.into(),
                r.gap_low.into(),
                r.gap_high.into(),
                r.converged.into(),
            ]);
            flags.push((format!("eps={}", r.eps), r.converged));
        }
        let mut summary = Map::new();
        summary.insert("delta".into(), json_float(self.delta));
        summary.insert("c_0".into(), json_float(self.table.c_0));
        summary.insert(
            "c_inf".into(),
            self.table.c_inf.map_or(Value::Null, json_float),
        );
        Report {
            tables: vec![t],
            flags,
            summary,
        }
    }
}

pub struct SweepRun {
    pub delta: f64,
    pub limit: GroundState,
    pub sweep: Sweep,
    /// Single-bubble verdict per record; `false` where the solve failed.
    pub bubbles: Vec<bool>,
    pub threads: usize,
}

/// Fan-out width: `TOOL_THREADS` when set to a positive integer, else the
/// number of cores.
pub fn thread_count() -> usize {
    std::env::var("TOOL_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn sweep(cfg: &RunConfig) -> Result<SweepRun, RunError> {
    let grid = cfg.grid().step("grid")?;
    let spec = cfg.spec(&grid).step("resolvent")?;
    let e = cfg.exponents().step("exponents")?;
    let q = cfg.coefficient().step("coefficient")?;
    let opts = cfg.solver_options();
    let limit = limit_ground_state(q.q0(), &e, &spec, &grid, &opts).step("limit ground state")?;
    let ks = &cfg.k_list;
    let (sweep, threads) = if cfg.solver.warm_start && !cfg.solver.parallel {
        (run_sweep(&q, ks, &e, &grid, &spec, &opts, &limit).step("sweep")?, 1)
    } else {
        let threads = if cfg.solver.parallel {
            thread_count().min(ks.len())
        } else {
            1
        };
        let mut slots: Vec<Option<(SweepRecord, Option<GroundState>)>> =
            (0..ks.len()).map(|_| None).collect();
        thread::scope(|scope| {
            let workers: Vec<_> = (0..threads)
                .map(|t| {
                    let (q, e, grid, spec, opts, limit) = (&q, &e, &grid, &spec, &opts, &limit);
                    scope.spawn(move || {
                        (t..ks.len())
                            .step_by(threads)
                            .map(|i| (i, sweep_point(q, ks[i], e, grid, spec, opts, limit, None)))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            for w in workers {
                for (i, out) in w.join().expect("sweep worker panicked") {
                    slots[i] = Some(out);
                }
            }
        });
        let (records, states) = slots.into_iter().map(|s| s.expect("every k is assigned")).unzip();
        (Sweep { records, states }, threads)
    };
    let bubbles = sweep
        .records
        .iter()
        .zip(&sweep.states)
        .map(|(r, gs)| gs.as_ref().is_some_and(|gs| single_bubble_check(r, gs, BUBBLE_FRACTION)))
        .collect();
    Ok(SweepRun {
        delta: spec.delta,
        limit,
        sweep,
        bubbles,
        threads,
    })
}

impl SweepRun {
    fn report(&self, dim: usize) -> Report {
        let mut header = vec!["k".to_string(), "eps".to_string(), "level".to_string()];
        header.extend(peak_header(dim, "peak"));
        header.extend(peak_header(dim, "peak_phys"));
        header.extend(["profile_distance", "iterations", "converged"].map(String::from));
        let mut t = table("sweep", header);
        let mut flags = vec![("limit".to_string(), self.limit.converged)];
        for r in &self.sweep.records {
            let mut row = vec![r.k.into(), r.eps.into(), r.level.into()];
            row.extend(r.peak_rescaled.iter().map(|&c| Cell::Float(c)));
            row.extend(r.peak_physical.iter().map(|&c| Cell::Float(c)));
            row.extend([
                r.profile_distance.into(),
                r.iterations.into(),
                r.converged.into(),
            ]);
            t.push(row);
            flags.push((format!("k={}", r.k), r.converged));
        }
        let mut summary = Map::new();
        summary.insert("delta".into(), json_float(self.delta));
        summary.insert("limit_level".into(), json_float(self.limit.level));
        summary.insert("threads".into(), json!(self.threads));
        summary.insert(
            "single_bubble".into(),
            Value::Array(self.bubbles.iter().map(|&b| Value::Bool(b)).collect()),
        );
        Report {
            tables: vec![t],
            flags,
            summary,
        }
    }
}

pub fn execute(cmd: Command, cfg: &RunConfig) -> Result<Report, RunError> {
    Ok(match cmd {
        Command::ValidateParams => validate(cfg)?.report(),
        Command::KernelCheck => kernel_check(cfg)?.report(),
        Command::InteractionCheck => interaction_check(cfg)?.report(),
        Command::Solve => solve(cfg)?.report(cfg.dim),
        Command::Levels => levels(cfg)?.report(),
        Command::Sweep => sweep(cfg)?.report(cfg.dim),
    })
}
