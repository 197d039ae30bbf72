//! `halfspace-stokes`: solve, verify, oracle, certify and sweep runs.
//!
//! Exit status: 0 when every check passes, 1 when a tolerance or inequality is
//! violated, 2 for an invalid configuration.

mod config;
mod run;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use config::{Command, RawConfig, RunConfig};
use run::{CertifyCheck, Outcome};

#[derive(Debug, Parser)]
#[command(name = "halfspace-stokes", version, about = "Stokes resolvent problem on the half-space with a dynamic boundary condition")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Flat `key = value` configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory for report.json, tables/ and fields/.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Override one configuration key; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Worker threads.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    /// Seed of the boundary data sampler.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Solve for band-limited data and dump the fields.
    Solve,
    /// Check the interior, boundary, fourth-order and weak-form identities.
    Verify,
    /// Compare the closed-form kernels with the finite-difference oracle.
    Oracle,
    /// Multiplier certificates and inequality checks.
    Certify {
        #[arg(long, value_enum, default_value = "all")]
        check: CertifyCheck,
    },
    /// Resolvent decay, α-uniformity, gradient and second-order ratio sweeps.
    Sweep,
}

fn load(cli: &Cli) -> Result<RawConfig, config::ConfigError> {
    let mut raw = RawConfig::default();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path)
            .map_err(|e| config::ConfigError(format!("cannot read {}: {e}", path.display())))?;
        raw.apply_text(&text)?;
    }
    for assignment in &cli.set {
        raw.apply_override(assignment)?;
    }
    if let Some(seed) = cli.seed {
        raw.set("seed", &seed.to_string())?;
    }
    if let Some(workers) = cli.workers {
        raw.set("workers", &workers.to_string())?;
    }
    Ok(raw)
}

fn write_report(dir: &Path, report: &Value) -> Result<PathBuf, String> {
    fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    let path = dir.join("report.json");
    let text = halfspace_stokes::report::to_json_string(report).map_err(|e| e.to_string())?;
    fs::write(&path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    Ok(path)
}

fn fail_with_config_error(cli: &Cli, command: Command, message: &str, config: Option<&RawConfig>) -> ExitCode {
    eprintln!("invalid configuration: {message}");
    let report = json!({
        "command": command.name(),
        "status": "invalid_configuration",
        "exit_code": 2,
        "error": message,
        "config": config.map(RawConfig::values),
    });
    if let Err(e) = write_report(&cli.out, &report) {
        eprintln!("{e}");
    }
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, which) = match cli.command {
        Cmd::Solve => (Command::Solve, None),
        Cmd::Verify => (Command::Verify, None),
        Cmd::Oracle => (Command::Oracle, None),
        Cmd::Certify { check } => (Command::Certify, Some(check)),
        Cmd::Sweep => (Command::Sweep, None),
    };
    let raw = match load(&cli) {
        Ok(raw) => raw,
        Err(e) => return fail_with_config_error(&cli, command, &e.0, None),
    };
    let cfg = match RunConfig::resolve(command, &raw) {
        Ok(cfg) => cfg,
        Err(e) => return fail_with_config_error(&cli, command, &e.0, Some(&raw)),
    };
    if let Some(n) = cfg.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("cannot configure {n} workers: {e}");
            return ExitCode::from(2);
        }
    }
    if let Err(e) = fs::create_dir_all(&cli.out) {
        eprintln!("cannot create {}: {e}", cli.out.display());
        return ExitCode::from(2);
    }

    let result = match command {
        Command::Solve => run::solve(&cfg, &cli.out),
        Command::Verify => run::verify(&cfg),
        Command::Oracle => run::oracle(&cfg),
        Command::Certify => run::certify(&cfg, &cli.out, which.unwrap_or(CertifyCheck::All)),
        Command::Sweep => run::sweep(&cfg, &cli.out),
    };
    let outcome: Outcome = match result {
        Ok(o) => o,
        Err(e) => return fail_with_config_error(&cli, command, &e.to_string(), Some(&cfg.resolved)),
    };

    let violations: Vec<&run::Check> = outcome.checks.iter().filter(|c| !c.passed).collect();
    let code: u8 = if violations.is_empty() { 0 } else { 1 };
    let mut report = json!({
        "command": command.name(),
        "status": if code == 0 { "pass" } else { "fail" },
        "exit_code": code,
        "config": cfg.resolved.values(),
        "checks": outcome.checks,
        "violations": violations.iter().map(|c| json!({ "name": c.name, "value": c.value, "location": c.location })).collect::<Vec<_>>(),
        "results": outcome.results,
    });
    if let Some(check) = which {
        report["certify_check"] = json!(format!("{check:?}"));
    }
    for c in &violations {
        let loc = c.location.as_ref().map(|l| format!(" at {l}")).unwrap_or_default();
        let bound = match (c.lower, c.upper) {
            (Some(l), Some(u)) => format!("in [{l}, {u}]"),
            (None, Some(u)) => format!("<= {u}"),
            (Some(l), None) => format!(">= {l}"),
            (None, None) => "finite".into(),
        };
        eprintln!("violated: {} = {:e}, expected {bound}{loc}", c.name, c.value);
    }
    match write_report(&cli.out, &report) {
        Ok(path) => println!("{} {}: {} checks, {} violated; report {}", command.name(), report["status"].as_str().unwrap_or(""), outcome.checks.len(), violations.len(), path.display()),
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    }
    ExitCode::from(code)
}
