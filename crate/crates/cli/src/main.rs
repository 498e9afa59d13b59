//! `awlab` — experiment runner for the adjacent-walk simulator.
//!
//! Subcommands:
//!
//! * `run <spec-file> [--key=value ...]` — execute an experiment, writing
//!   `<out>/<kind>.csv` and `<out>/summary.json`;
//! * `validate <spec-file> [--key=value ...]` — parse and echo the resolved
//!   spec without running anything;
//! * `list-kinds` — print every experiment kind with a one-line description.
//!
//! The environment variable `WORKER_COUNT` caps the worker threads (default:
//! available cores); it never changes output bytes.

mod runner;
mod spec;

use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn real_main() -> Result<()> {
    init_worker_pool()?;
    let args: Vec<String> = std::env::args().skip(1).collect();
    match args.first().map(String::as_str) {
        Some("run") => {
            let (path, overrides) = spec_args(&args[1..])?;
            let spec = spec::parse_spec(path, &overrides)?;
            let report = runner::run(&spec)?;
            for table in &report.tables {
                println!("wrote {}", table.display());
            }
            println!("wrote {}", spec.out.join("summary.json").display());
            for c in &report.checks {
                println!(
                    "check {}: value {:.6e} threshold {:.6e} -> {}",
                    c.name,
                    c.value,
                    c.threshold,
                    if c.pass { "pass" } else { "FAIL" }
                );
            }
            println!("elapsed {:.3}s", report.elapsed_seconds);
            Ok(())
        }
        Some("validate") => {
            let (path, overrides) = spec_args(&args[1..])?;
            let spec = spec::parse_spec(path, &overrides)?;
            for (k, v) in spec.to_kv() {
                println!("{k} = {v}");
            }
            println!("ok");
            Ok(())
        }
        Some("list-kinds") => {
            for kind in spec::Kind::ALL {
                println!("{:<16} {}", kind.name(), kind.describe());
            }
            Ok(())
        }
        Some(other) => bail!("unknown subcommand {other:?}; expected run, validate, list-kinds"),
        None => bail!("usage: awlab <run|validate|list-kinds> [args]"),
    }
}

fn spec_args(rest: &[String]) -> Result<(&Path, Vec<(String, String)>)> {
    let path = rest.first().context("missing spec file argument")?;
    let overrides = rest[1..]
        .iter()
        .map(|a| spec::parse_override(a))
        .collect::<Result<Vec<_>>>()?;
    Ok((Path::new(path), overrides))
}

fn init_worker_pool() -> Result<()> {
    if let Ok(raw) = std::env::var("WORKER_COUNT") {
        let count: usize = raw
            .parse()
            .ok()
            .filter(|&c| c > 0)
            .with_context(|| format!("WORKER_COUNT must be a positive integer, got {raw:?}"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(count)
            .build_global()
            .context("worker pool already initialized")?;
    }
    Ok(())
}
