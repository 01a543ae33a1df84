//! Batch front end for the dual ground state experiments: config parsing,
//! hypothesis gating, dispatch, and the artifact directory.

pub mod commands;
pub mod config;
pub mod output;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Map, Value};

use crate::config::{Command, RunConfig};
use crate::output::ArtifactDir;

pub const OUTSIDE_HYPOTHESES: &str = "outside paper hypotheses";

pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const NOT_CONVERGED: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const HYPOTHESES: i32 = 3;
}

/// Name of the resolved config echo inside the output directory.
pub const CONFIG_ECHO: &str = "config.resolved";

#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: Command,
    pub config: PathBuf,
    pub force: bool,
    pub out: Option<PathBuf>,
}

pub fn run(inv: &Invocation) -> i32 {
    match RunConfig::load(&inv.config).and_then(|c| c.for_command(inv.command)) {
        Ok(cfg) => run_config(inv.command, cfg, inv.force, inv.out.as_deref()),
        Err(e) => {
            eprintln!("config error: {e}");
            exit::CONFIG
        }
    }
}

/// Runs an already parsed config and returns the exit code.
pub fn run_config(cmd: Command, mut cfg: RunConfig, force: bool, out: Option<&Path>) -> i32 {
    let started = Instant::now();
    cfg.command = Some(cmd);
    if let Some(dir) = out {
        cfg.output.dir = dir.to_path_buf();
    }
    let validation = match commands::validate(&cfg) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("config error: {e}");
            return exit::CONFIG;
        }
    };
    let outside = !validation.passed;
    if cmd == Command::ValidateParams {
        for line in validation.lines() {
            println!("{line}");
        }
    } else if outside && !force {
        for line in validation.lines() {
            eprintln!("{line}");
        }
        eprintln!("{}: {OUTSIDE_HYPOTHESES}; rerun with --force to proceed", cmd.name());
        return exit::HYPOTHESES;
    }

    let report = match commands::execute(cmd, &cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{}: {e}", cmd.name());
            return exit::NOT_CONVERGED;
        }
    };

    let marker = outside.then(|| OUTSIDE_HYPOTHESES.to_string());
    let mut dir = match ArtifactDir::create(
        &cfg.output.dir,
        cfg.output.format,
        cfg.output.precision,
        marker.clone(),
    ) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("cannot create {}: {e}", cfg.output.dir.display());
            return exit::CONFIG;
        }
    };
    let converged = report.all_converged();
    let written = (|| {
        dir.text(CONFIG_ECHO, &cfg.to_text())?;
        for t in &report.tables {
            dir.table(t)?;
        }
        let steps: Map<String, Value> = report
            .flags
            .iter()
            .map(|(k, v)| (k.clone(), Value::Bool(*v)))
            .collect();
        let mut files = dir.written().to_vec();
        files.push("manifest.json".into());
        let h = 2.0 * cfg.half_width / cfg.n as f64;
        let manifest = json!({
            "tool": "dualhelm",
            "version": env!("CARGO_PKG_VERSION"),
            "command": cmd.name(),
            "wall_time_s": started.elapsed().as_secs_f64(),
            "grid": {"dim": cfg.dim, "L": cfg.half_width, "n": cfg.n, "h": h},
            "exponents": {
                "s": cfg.s,
                "p": cfg.p,
                "k": cfg.k,
                "p_dual": output::json_float(validation.p_dual),
                "lambda_p": output::json_float(validation.lambda_p),
            },
            "seed": cfg.solver.seed,
            "within_hypotheses": !outside,
            "forced": force,
            "marker": marker,
            "converged": converged,
            "steps": steps,
            "summary": report.summary,
            "files": files,
        });
        dir.json("manifest.json", &manifest)
    })();
    if let Err(e) = written {
        eprintln!("writing {}: {e}", dir.path().display());
        return exit::NOT_CONVERGED;
    }
    for f in dir.written() {
        println!("wrote {}", dir.path().join(f).display());
    }

    if cmd == Command::ValidateParams {
        if outside {
            exit::HYPOTHESES
        } else {
            exit::SUCCESS
        }
    } else if converged {
        exit::SUCCESS
    } else {
        for (step, ok) in &report.flags {
            if !ok {
                eprintln!("{}: {step} did not converge", cmd.name());
            }
        }
        exit::NOT_CONVERGED
    }
}
