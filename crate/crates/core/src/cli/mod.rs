//! Command-line front end behind the `lrd` binary: instance generation,
//! solving, certification, phase sweeps and self-tests, with JSON run manifests.
//!
//! Parameters resolve in layers: built-in defaults, then `LRD_SEED`, then the
//! `params` of a `--config` manifest, then flags given on the command line.

mod commands;
mod phase;
mod selftest;

pub use phase::{run_phase, write_phase_csv, PhaseGrid, PhaseRow, Problem, SamplerKind};
pub use selftest::{run_selftest, SuiteOutcome, SUITES};

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{LrdError, Result};

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const MAX_ITERS: i32 = 2;
    pub const NUMERICAL: i32 = 3;
    pub const ILL_POSED: i32 = 4;
    pub const SELFTEST: i32 = 5;
    pub const CERTIFICATE_FAILED: i32 = 6;
}

pub fn exit_code_for(e: &LrdError) -> i32 {
    match e {
        LrdError::NumericalFailure(_) => exit::NUMERICAL,
        LrdError::IllPosed(_) => exit::ILL_POSED,
        _ => exit::USAGE,
    }
}

#[derive(Parser, Debug)]
#[command(name = "lrd", version, about = "r*-norm solvers, dual certificates and recovery sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a seeded matrix-completion instance
    GenMc(commands::GenMcArgs),
    /// Generate a seeded robust-PCA instance
    GenRpca(commands::GenRpcaArgs),
    #[command(subcommand)]
    Solve(SolveCommand),
    #[command(subcommand)]
    Certify(CertifyCommand),
    /// Run a phase-transition sweep over a grid
    Phase(phase::PhaseArgs),
    /// Run the built-in property suites
    Selftest(selftest::SelftestArgs),
}

#[derive(Subcommand, Debug)]
enum SolveCommand {
    /// Matrix completion by the r*-norm bi-dual
    Mc(commands::SolveMcArgs),
    /// Robust PCA by the r*-norm bi-dual
    Rpca(commands::SolveRpcaArgs),
    /// Weighted low-rank approximation
    Wlra(commands::SolveWlraArgs),
}

#[derive(Subcommand, Debug)]
enum CertifyCommand {
    /// Least-squares completion certificate
    McLs(commands::CertifyMcLsArgs),
    /// Golfing completion certificate
    McGolfing(commands::CertifyMcGolfingArgs),
    /// Robust-PCA certificate W = W^L + W^S
    Rpca(commands::CertifyRpcaArgs),
}

/// Flags common to every command that writes files.
#[derive(Args, Debug, Clone, Default)]
pub(crate) struct Common {
    /// Re-run from a manifest (its params are the base layer under the flags)
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command, returning
/// the process exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::GenMc(a) => commands::gen_mc(a),
        Command::GenRpca(a) => commands::gen_rpca(a),
        Command::Solve(SolveCommand::Mc(a)) => commands::solve_mc(a),
        Command::Solve(SolveCommand::Rpca(a)) => commands::solve_rpca(a),
        Command::Solve(SolveCommand::Wlra(a)) => commands::solve_wlra(a),
        Command::Certify(CertifyCommand::McLs(a)) => commands::certify_mc_ls(a),
        Command::Certify(CertifyCommand::McGolfing(a)) => commands::certify_mc_golfing(a),
        Command::Certify(CertifyCommand::Rpca(a)) => commands::certify_rpca(a),
        Command::Phase(a) => phase::cmd_phase(a),
        Command::Selftest(a) => selftest::cmd_selftest(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: String,
    pub params: Value,
    pub seed: Option<u64>,
    /// files written, relative to the output directory
    pub artifacts: Vec<String>,
    pub started_at_unix: f64,
    pub wall_clock_seconds: f64,
    pub version: String,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| LrdError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Wall-clock bookkeeping for one command run.
pub(crate) struct Run {
    command: &'static str,
    started_at_unix: f64,
    clock: Instant,
}

impl Run {
    pub fn start(command: &'static str) -> Self {
        let started_at_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs_f64())
            .unwrap_or(0.0);
        Run {
            command,
            started_at_unix,
            clock: Instant::now(),
        }
    }

    /// Writes `manifest.json` into `out`.
    pub fn finish<P: Serialize>(
        self,
        out: &Path,
        params: &P,
        seed: Option<u64>,
        artifacts: &[&str],
    ) -> Result<()> {
        let mut artifacts: Vec<String> = artifacts.iter().map(|s| s.to_string()).collect();
        artifacts.push(MANIFEST_FILE.to_string());
        let manifest = RunManifest {
            schema_version: MANIFEST_SCHEMA_VERSION,
            command: self.command.to_string(),
            params: serde_json::to_value(params)?,
            seed,
            artifacts,
            started_at_unix: self.started_at_unix,
            wall_clock_seconds: self.clock.elapsed().as_secs_f64(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        };
        write_json(&out.join(MANIFEST_FILE), &manifest)
    }
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(fs::write(path, text)?)
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<()> {
    Ok(fs::create_dir_all(dir)?)
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var("LRD_SEED") {
        Ok(v) => v
            .trim()
            .parse::<u64>()
            .map(Some)
            .map_err(|_| LrdError::arg(format!("LRD_SEED = `{v}` is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

fn overlay(base: &mut Map<String, Value>, top: Value) {
    if let Value::Object(top) = top {
        for (k, v) in top {
            if !v.is_null() {
                base.insert(k, v);
            }
        }
    }
}

/// Merges the parameter layers into the resolved parameter struct `P`.
/// `flags` is the parsed flag struct; absent (`None`) flags serialize as null
/// and leave lower layers untouched.
pub(crate) fn resolve<F: Serialize, P: DeserializeOwned>(
    command: &str,
    config: Option<&Path>,
    flags: &F,
    has_seed: bool,
) -> Result<P> {
    let mut merged = Map::new();
    if has_seed {
        if let Some(seed) = env_seed()? {
            merged.insert("seed".into(), seed.into());
        }
    }
    if let Some(path) = config {
        let manifest = RunManifest::load(path)?;
        if manifest.command != command {
            return Err(LrdError::arg(format!(
                "{} records command `{}`, not `{command}`",
                path.display(),
                manifest.command
            )));
        }
        overlay(&mut merged, manifest.params);
    }
    overlay(&mut merged, serde_json::to_value(flags)?);
    serde_json::from_value(Value::Object(merged)).map_err(|e| {
        LrdError::arg(format!("{e} (pass it as --<name> or through --config)"))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    #[serde(rename_all = "kebab-case")]
    struct Flags {
        n1: Option<usize>,
        max_iters: Option<usize>,
    }

    #[derive(Deserialize, Debug, PartialEq)]
    #[serde(rename_all = "kebab-case", deny_unknown_fields)]
    struct Params {
        n1: usize,
        #[serde(default = "default_iters")]
        max_iters: usize,
        #[serde(default)]
        seed: u64,
    }

    fn default_iters() -> usize {
        7
    }

    #[test]
    fn flags_override_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        let manifest = RunManifest {
            schema_version: 1,
            command: "x".into(),
            params: serde_json::json!({"n1": 3, "max-iters": 9, "seed": 4}),
            seed: Some(4),
            artifacts: vec![],
            started_at_unix: 0.0,
            wall_clock_seconds: 0.0,
            version: "0".into(),
        };
        write_json(&path, &manifest).unwrap();
        let flags = Flags { n1: Some(5), max_iters: None };
        let p: Params = resolve("x", Some(&path), &flags, false).unwrap();
        assert_eq!(p, Params { n1: 5, max_iters: 9, seed: 4 });
        assert!(resolve::<_, Params>("y", Some(&path), &flags, false).is_err());
        let p: Params = resolve("x", None, &flags, false).unwrap();
        assert_eq!(p.max_iters, 7);
        let missing = Flags { n1: None, max_iters: None };
        assert!(resolve::<_, Params>("x", None, &missing, false).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code_for(&LrdError::IllPosed("x".into())), exit::ILL_POSED);
        assert_eq!(exit_code_for(&LrdError::NumericalFailure("x".into())), exit::NUMERICAL);
        assert_eq!(exit_code_for(&LrdError::arg("x")), exit::USAGE);
        assert_eq!(run(["lrd", "no-such-command"]), exit::USAGE);
        assert_eq!(run(["lrd", "--version"]), exit::OK);
    }
}
