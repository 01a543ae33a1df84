//! Flat `section.key = value` run configuration.
//!
//! Every key has a default, so an empty file is a valid config. The resolved
//! form written by [`RunConfig::to_text`] lists every key and parses back to
//! the same value.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::ValueEnum;
use dualhelm_core::{
    CoefficientQ, Exponents, Point, ResolventSpec, SolverOptions, TorusGrid,
};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    ValidateParams,
    KernelCheck,
    InteractionCheck,
    Solve,
    Levels,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::ValidateParams => "validate-params",
            Command::KernelCheck => "kernel-check",
            Command::InteractionCheck => "interaction-check",
            Command::Solve => "solve",
            Command::Levels => "levels",
            Command::Sweep => "sweep",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Self::value_variants().iter().copied().find(|c| c.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: `{key}` already set on line {first}")]
    Duplicate { line: usize, key: String, first: usize },
    #[error("line {line}: {key}: {reason}")]
    Value { line: usize, key: String, reason: String },
    #[error("{key} (default): {reason}")]
    Default { key: String, reason: String },
    #[error("command: config says `{file}` but `{cli}` was requested")]
    CommandMismatch { file: String, cli: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Delta {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QKind {
    Constant,
    Bump,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Init {
    /// Unit Gaussian at each maximum of Q.
    Gaussian,
    /// Seeded noise through the positive part of the symbol.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QConfig {
    pub kind: QKind,
    /// Level of the constant family.
    pub q0: f64,
    pub q_inf: f64,
    pub amplitude: f64,
    pub width: f64,
    /// `None` puts a single center at the origin.
    pub centers: Option<Vec<Point>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub fallback_after: usize,
    pub seed: u64,
    pub init: Init,
    pub restarts: usize,
    pub warm_start: bool,
    pub parallel: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelConfig {
    pub window_lo: f64,
    pub window_hi: f64,
    pub shells: usize,
    pub plateau: f64,
    pub support: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: Format,
    /// Significant digits in CSV cells.
    pub precision: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub dim: usize,
    pub s: f64,
    pub p: f64,
    pub k: f64,
    pub k_list: Vec<f64>,
    pub half_width: f64,
    pub n: usize,
    pub delta: Delta,
    pub q: QConfig,
    pub solver: SolverConfig,
    pub eps_list: Vec<f64>,
    pub kernel: KernelConfig,
    pub interaction_radius: f64,
    pub interaction_gaps: Vec<f64>,
    pub delta_list: Vec<f64>,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            dim: 3,
            s: 1.0,
            p: 5.0,
            k: 4.0,
            k_list: vec![2.0, 4.0, 8.0],
            half_width: 16.0,
            n: 64,
            delta: Delta::Auto,
            q: QConfig {
                kind: QKind::Bump,
                q0: 1.0,
                q_inf: 0.5,
                amplitude: 1.0,
                width: 1.0,
                centers: None,
            },
            solver: SolverConfig {
                tol: 1e-6,
                max_iter: 500,
                fallback_after: 5,
                seed: 0,
                init: Init::Gaussian,
                restarts: 1,
                warm_start: true,
                parallel: false,
            },
            eps_list: vec![0.5, 0.25, 0.125],
            kernel: KernelConfig {
                window_lo: 4.0,
                window_hi: 16.0,
                shells: 32,
                plateau: 1.0 / 6.0,
                support: 0.25,
            },
            interaction_radius: 2.0,
            interaction_gaps: vec![2.0, 4.0, 8.0],
            delta_list: Vec::new(),
            output: OutputConfig {
                dir: PathBuf::from("out"),
                format: Format::Csv,
                precision: 12,
            },
        }
    }
}

/// Every key in echo order.
pub const KEYS: &[&str] = &[
    "command",
    "exponents.dim",
    "exponents.s",
    "exponents.p",
    "exponents.k",
    "exponents.k_list",
    "grid.L",
    "grid.n",
    "resolvent.delta",
    "q.family",
    "q.q0",
    "q.q_inf",
    "q.amplitude",
    "q.width",
    "q.centers",
    "solver.tol",
    "solver.max_iter",
    "solver.fallback_after",
    "solver.seed",
    "solver.init",
    "solver.restarts",
    "solver.warm_start",
    "solver.parallel",
    "levels.eps_list",
    "kernel.window_lo",
    "kernel.window_hi",
    "kernel.shells",
    "kernel.plateau",
    "kernel.support",
    "interaction.radius",
    "interaction.gaps",
    "solve.delta_list",
    "output.dir",
    "output.format",
    "output.precision",
];

fn float(v: &str) -> Result<f64, String> {
    let x: f64 = v.parse().map_err(|_| format!("`{v}` is not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("`{v}` is not finite"))
    }
}

fn count(v: &str) -> Result<usize, String> {
    v.parse().map_err(|_| format!("`{v}` is not a nonnegative integer"))
}

fn flag(v: &str) -> Result<bool, String> {
    match v {
        "true" | "yes" | "on" => Ok(true),
        "false" | "no" | "off" => Ok(false),
        _ => Err(format!("`{v}` is not a boolean")),
    }
}

fn list(v: &str) -> Result<Vec<f64>, String> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|t| float(t.trim())).collect()
}

fn points(v: &str) -> Result<Option<Vec<Point>>, String> {
    if v == "origin" {
        return Ok(None);
    }
    let pts = v
        .split(';')
        .map(|p| list(p))
        .collect::<Result<Vec<_>, _>>()?;
    if pts.iter().any(|p| p.is_empty()) {
        return Err("empty center".into());
    }
    Ok(Some(pts))
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

impl RunConfig {
    /// Parses config text. Unknown keys, duplicates and malformed values are
    /// reported with their line; range errors on defaulted keys say so.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut seen: BTreeMap<String, usize> = BTreeMap::new();
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                text: body.to_string(),
            })?;
            let key = key.trim();
            let value = value.trim();
            if !KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                });
            }
            if let Some(&first) = seen.get(key) {
                return Err(ConfigError::Duplicate {
                    line,
                    key: key.to_string(),
                    first,
                });
            }
            seen.insert(key.to_string(), line);
            cfg.set(key, value).map_err(|reason| ConfigError::Value {
                line,
                key: key.to_string(),
                reason,
            })?;
        }
        cfg.check().map_err(|(key, reason)| match seen.get(key) {
            Some(&line) => ConfigError::Value {
                line,
                key: key.to_string(),
                reason,
            },
            None => ConfigError::Default {
                key: key.to_string(),
                reason,
            },
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::parse(&text)
    }

    /// Binds the config to the requested command, refusing a conflicting
    /// `command` line.
    pub fn for_command(mut self, cmd: Command) -> Result<Self, ConfigError> {
        match self.command {
            Some(c) if c != cmd => Err(ConfigError::CommandMismatch {
                file: c.name().into(),
                cli: cmd.name().into(),
            }),
            _ => {
                self.command = Some(cmd);
                Ok(self)
            }
        }
    }

    fn set(&mut self, key: &str, v: &str) -> Result<(), String> {
        match key {
            "command" => {
                self.command =
                    Some(Command::from_name(v).ok_or_else(|| format!("unknown command `{v}`"))?)
            }
            "exponents.dim" => self.dim = count(v)?,
            "exponents.s" => self.s = float(v)?,
            "exponents.p" => self.p = float(v)?,
            "exponents.k" => self.k = float(v)?,
            "exponents.k_list" => self.k_list = list(v)?,
            "grid.L" => self.half_width = float(v)?,
            "grid.n" => self.n = count(v)?,
            "resolvent.delta" => {
                self.delta = if v == "auto" {
                    Delta::Auto
                } else {
                    Delta::Fixed(float(v)?)
                }
            }
            "q.family" => {
                self.q.kind = match v {
                    "constant" => QKind::Constant,
                    "bump" => QKind::Bump,
                    _ => return Err(format!("unknown family `{v}`, expected constant or bump")),
                }
            }
            "q.q0" => self.q.q0 = float(v)?,
            "q.q_inf" => self.q.q_inf = float(v)?,
            "q.amplitude" => self.q.amplitude = float(v)?,
            "q.width" => self.q.width = float(v)?,
            "q.centers" => self.q.centers = points(v)?,
            "solver.tol" => self.solver.tol = float(v)?,
            "solver.max_iter" => self.solver.max_iter = count(v)?,
            "solver.fallback_after" => self.solver.fallback_after = count(v)?,
            "solver.seed" => {
                self.solver.seed = v.parse().map_err(|_| format!("`{v}` is not a u64 seed"))?
            }
            "solver.init" => {
                self.solver.init = match v {
                    "gaussian" => Init::Gaussian,
                    "random" => Init::Random,
                    _ => return Err(format!("unknown init `{v}`, expected gaussian or random")),
                }
            }
            "solver.restarts" => self.solver.restarts = count(v)?,
            "solver.warm_start" => self.solver.warm_start = flag(v)?,
            "solver.parallel" => self.solver.parallel = flag(v)?,
            "levels.eps_list" => self.eps_list = list(v)?,
            "kernel.window_lo" => self.kernel.window_lo = float(v)?,
            "kernel.window_hi" => self.kernel.window_hi = float(v)?,
            "kernel.shells" => self.kernel.shells = count(v)?,
            "kernel.plateau" => self.kernel.plateau = float(v)?,
            "kernel.support" => self.kernel.support = float(v)?,
            "interaction.radius" => self.interaction_radius = float(v)?,
            "interaction.gaps" => self.interaction_gaps = list(v)?,
            "solve.delta_list" => self.delta_list = list(v)?,
            "output.dir" => {
                if v.is_empty() {
                    return Err("empty directory".into());
                }
                self.output.dir = PathBuf::from(v)
            }
            "output.format" => {
                self.output.format = match v {
                    "csv" => Format::Csv,
                    "json" => Format::Json,
                    _ => return Err(format!("unknown format `{v}`, expected csv or json")),
                }
            }
            "output.precision" => self.output.precision = count(v)?,
            _ => unreachable!("key list and setter disagree on {key}"),
        }
        Ok(())
    }

    fn get(&self, key: &str) -> String {
        match key {
            "command" => self.command.map(|c| c.name()).unwrap_or("").to_string(),
            "exponents.dim" => self.dim.to_string(),
            "exponents.s" => self.s.to_string(),
            "exponents.p" => self.p.to_string(),
            "exponents.k" => self.k.to_string(),
            "exponents.k_list" => join(&self.k_list),
            "grid.L" => self.half_width.to_string(),
            "grid.n" => self.n.to_string(),
            "resolvent.delta" => match self.delta {
                Delta::Auto => "auto".into(),
                Delta::Fixed(d) => d.to_string(),
            },
            "q.family" => match self.q.kind {
                QKind::Constant => "constant".into(),
                QKind::Bump => "bump".into(),
            },
            "q.q0" => self.q.q0.to_string(),
            "q.q_inf" => self.q.q_inf.to_string(),
            "q.amplitude" => self.q.amplitude.to_string(),
            "q.width" => self.q.width.to_string(),
            "q.centers" => match &self.q.centers {
                None => "origin".into(),
                Some(c) => c.iter().map(|p| join(p)).collect::<Vec<_>>().join("; "),
            },
            "solver.tol" => self.solver.tol.to_string(),
            "solver.max_iter" => self.solver.max_iter.to_string(),
            "solver.fallback_after" => self.solver.fallback_after.to_string(),
            "solver.seed" => self.solver.seed.to_string(),
            "solver.init" => match self.solver.init {
                Init::Gaussian => "gaussian".into(),
                Init::Random => "random".into(),
            },
            "solver.restarts" => self.solver.restarts.to_string(),
            "solver.warm_start" => self.solver.warm_start.to_string(),
            "solver.parallel" => self.solver.parallel.to_string(),
            "levels.eps_list" => join(&self.eps_list),
            "kernel.window_lo" => self.kernel.window_lo.to_string(),
            "kernel.window_hi" => self.kernel.window_hi.to_string(),
            "kernel.shells" => self.kernel.shells.to_string(),
            "kernel.plateau" => self.kernel.plateau.to_string(),
            "kernel.support" => self.kernel.support.to_string(),
            "interaction.radius" => self.interaction_radius.to_string(),
            "interaction.gaps" => join(&self.interaction_gaps),
            "solve.delta_list" => join(&self.delta_list),
            "output.dir" => self.output.dir.display().to_string(),
            "output.format" => match self.output.format {
                Format::Csv => "csv".into(),
                Format::Json => "json".into(),
            },
            "output.precision" => self.output.precision.to_string(),
            _ => unreachable!("key list and getter disagree on {key}"),
        }
    }

    /// The fully resolved config, one key per line. An unset command is
    /// left out so that the text stays parseable.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            if *key == "command" && self.command.is_none() {
                continue;
            }
            let _ = writeln!(out, "{key} = {}", self.get(key));
        }
        out
    }

    fn check(&self) -> Result<(), (&'static str, String)> {
        fn need(ok: bool, key: &'static str, reason: &str) -> Result<(), (&'static str, String)> {
            if ok {
                Ok(())
            } else {
                Err((key, reason.to_string()))
            }
        }
        need((1..=3).contains(&self.dim), "exponents.dim", "must be 1, 2 or 3")?;
        need(self.s > 0.0, "exponents.s", "must be positive")?;
        need(self.p > 2.0, "exponents.p", "must exceed 2")?;
        need(self.k > 0.0, "exponents.k", "must be positive")?;
        need(!self.k_list.is_empty(), "exponents.k_list", "must not be empty")?;
        need(
            self.k_list.iter().all(|&k| k > 0.0) && self.k_list.windows(2).all(|w| w[0] < w[1]),
            "exponents.k_list",
            "must be positive and strictly ascending",
        )?;
        need(self.half_width > 0.0, "grid.L", "must be positive")?;
        need(self.n >= 8 && self.n % 2 == 0, "grid.n", "must be even and at least 8")?;
        if let Delta::Fixed(d) = self.delta {
            need(d >= 0.0, "resolvent.delta", "must be nonnegative or auto")?;
        }
        match self.q.kind {
            QKind::Constant => need(self.q.q0 > 0.0, "q.q0", "must be positive")?,
            QKind::Bump => {
                need(self.q.q_inf >= 0.0, "q.q_inf", "must be nonnegative")?;
                need(self.q.amplitude > 0.0, "q.amplitude", "must be positive")?;
                need(self.q.width > 0.0, "q.width", "must be positive")?;
                if let Some(c) = &self.q.centers {
                    need(
                        c.iter().all(|p| p.len() == self.dim),
                        "q.centers",
                        "every center needs one coordinate per dimension",
                    )?;
                }
            }
        }
        need(self.solver.tol > 0.0, "solver.tol", "must be positive")?;
        need(self.solver.max_iter >= 1, "solver.max_iter", "must be at least 1")?;
        need(self.solver.fallback_after >= 1, "solver.fallback_after", "must be at least 1")?;
        need(self.solver.restarts >= 1, "solver.restarts", "must be at least 1")?;
        need(
            !self.eps_list.is_empty() && self.eps_list.iter().all(|&e| e > 0.0),
            "levels.eps_list",
            "must be a nonempty list of positive values",
        )?;
        need(
            self.kernel.window_lo > 0.0 && self.kernel.window_hi > self.kernel.window_lo,
            "kernel.window_hi",
            "window must satisfy 0 < lo < hi",
        )?;
        need(self.kernel.shells >= 4, "kernel.shells", "must be at least 4")?;
        need(
            self.kernel.plateau >= 0.0 && self.kernel.support > self.kernel.plateau,
            "kernel.support",
            "must exceed the plateau half width",
        )?;
        need(self.interaction_radius > 0.0, "interaction.radius", "must be positive")?;
        need(
            !self.interaction_gaps.is_empty()
                && self.interaction_gaps.iter().all(|&g| g >= 1.0)
                && self.interaction_gaps.windows(2).all(|w| w[0] < w[1]),
            "interaction.gaps",
            "must be ascending values of at least 1",
        )?;
        need(
            self.delta_list.iter().all(|&d| d > 0.0),
            "solve.delta_list",
            "values must be positive",
        )?;
        need(
            (1..=17).contains(&self.output.precision),
            "output.precision",
            "must be between 1 and 17",
        )?;
        Ok(())
    }

    pub fn exponents(&self) -> dualhelm_core::Result<Exponents> {
        Exponents::new(self.dim, self.s, self.p, self.k)
    }

    pub fn grid(&self) -> dualhelm_core::Result<Arc<TorusGrid>> {
        TorusGrid::new(self.dim, self.half_width, self.n)
    }

    pub fn spec_with(&self, grid: &TorusGrid, delta: Delta) -> dualhelm_core::Result<ResolventSpec> {
        match delta {
            Delta::Auto => ResolventSpec::auto(self.s, grid),
            Delta::Fixed(d) => ResolventSpec::new(self.s, d),
        }
    }

    pub fn spec(&self, grid: &TorusGrid) -> dualhelm_core::Result<ResolventSpec> {
        self.spec_with(grid, self.delta)
    }

    pub fn coefficient(&self) -> dualhelm_core::Result<CoefficientQ> {
        match self.q.kind {
            QKind::Constant => CoefficientQ::constant(self.q.q0),
            QKind::Bump => {
                let centers = self
                    .q
                    .centers
                    .clone()
                    .unwrap_or_else(|| vec![vec![0.0; self.dim]]);
                CoefficientQ::bump(self.q.q_inf, self.q.amplitude, centers, self.q.width)
            }
        }
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.solver.tol,
            max_iter: self.solver.max_iter,
            fallback_after: self.solver.fallback_after,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
        assert_eq!(RunConfig::parse("# nothing\n\n").unwrap(), RunConfig::default());
    }

    #[test]
    fn echo_round_trips() {
        let text = "\
command = sweep
exponents.dim = 2
exponents.p = 4.5
exponents.k_list = 1.5, 3, 6
grid.L = 12.5
resolvent.delta = 0.3
q.centers = 0.25, -1; 1, 1
q.width = 0.7
solver.seed = 18446744073709551615
solver.init = random
solver.parallel = yes
kernel.plateau = 0.1
solve.delta_list = 0.4, 0.2
output.dir = runs/a b
output.format = json
output.precision = 17
";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.q.centers, Some(vec![vec![0.25, -1.0], vec![1.0, 1.0]]));
        assert_eq!(cfg.solver.seed, u64::MAX);
        let echo = cfg.to_text();
        let again = RunConfig::parse(&echo).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.to_text(), echo);
        let defaults = RunConfig::default();
        assert_eq!(RunConfig::parse(&defaults.to_text()).unwrap(), defaults);
    }

    #[test]
    fn diagnostics_carry_the_line() {
        let err = RunConfig::parse("grid.n = 64\n\ngrid.n = 32\n").unwrap_err();
        assert_eq!(
            err,
            ConfigError::Duplicate {
                line: 3,
                key: "grid.n".into(),
                first: 1
            }
        );
        assert!(matches!(
            RunConfig::parse("grid.m = 1").unwrap_err(),
            ConfigError::UnknownKey { line: 1, .. }
        ));
        assert!(matches!(
            RunConfig::parse("\ngrid.n 64").unwrap_err(),
            ConfigError::Syntax { line: 2, .. }
        ));
        assert!(matches!(
            RunConfig::parse("exponents.s = one").unwrap_err(),
            ConfigError::Value { line: 1, .. }
        ));
        // range errors point at the offending line too
        let err = RunConfig::parse("output.precision = 3\ngrid.n = 63").unwrap_err();
        assert!(matches!(err, ConfigError::Value { line: 2, ref key, .. } if key == "grid.n"));
    }

    #[test]
    fn dimension_change_invalidates_default_centers_only_when_explicit() {
        assert!(RunConfig::parse("exponents.dim = 1").is_ok());
        let err = RunConfig::parse("exponents.dim = 2\nq.centers = 0, 0, 0").unwrap_err();
        assert!(matches!(err, ConfigError::Value { line: 2, .. }));
        let err = RunConfig::parse("kernel.shells = 2").unwrap_err();
        assert!(err.to_string().starts_with("line 1: kernel.shells"));
        let err = RunConfig::parse("interaction.gaps = 4, 2").unwrap_err();
        assert!(err.to_string().contains("ascending"));
    }

    #[test]
    fn command_line_must_agree() {
        let cfg = RunConfig::parse("command = levels").unwrap();
        assert!(cfg.clone().for_command(Command::Levels).is_ok());
        assert!(matches!(
            cfg.for_command(Command::Sweep),
            Err(ConfigError::CommandMismatch { .. })
        ));
        assert_eq!(
            RunConfig::default().for_command(Command::Solve).unwrap().command,
            Some(Command::Solve)
        );
    }
}
