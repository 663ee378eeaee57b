//! Batch experiment runner: every operation of the laboratory is exposed
//! as a subcommand with reproducible CSV output, optional SVG line plots,
//! and `key = value` config files with full flag override.
//!
//! Exit codes: 0 when all enabled assertions pass, 2 on an assertion
//! failure, 1 on any error.

pub mod commands;
pub mod config;
pub mod csvout;
pub mod select;
pub mod svg;

use std::io::Write;

use thiserror::Error;

use config::ExperimentConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at line {line}, field '{field}': {reason}")]
    Parse {
        line: usize,
        field: String,
        reason: String,
    },
    #[error("unknown key '{key}' for subcommand '{subcommand}'")]
    UnknownKey { subcommand: String, key: String },
    #[error("unknown subcommand '{0}'")]
    UnknownSubcommand(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Run(String),
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

/// Environment variable capping the rayon thread pool.
pub const THREADS_ENV: &str = "BERGMAN_LAB_THREADS";

fn init_threads() {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                // ignore failure: the pool may already be initialized
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn usage() -> String {
    let names: Vec<&str> = commands::registry().iter().map(|(n, _, _)| *n).collect();
    format!(
        "usage: bergman-lab <subcommand> [--config FILE] [--dry-run] [--key value]...\n\
         subcommands: {}\n\
         common keys: csv (output path, stdout when empty), svg (plot path)\n\
         {} caps the thread pool.",
        names.join(", "),
        THREADS_ENV
    )
}

/// Run with the given argument vector (including the program name) and
/// return the process exit code.
pub fn main_with_args(args: &[String]) -> i32 {
    init_threads();
    match run(args) {
        Ok(pass) => {
            if pass {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn run(args: &[String]) -> Result<bool, CliError> {
    let mut it = args.iter().skip(1);
    let sub = match it.next() {
        None => {
            println!("{}", usage());
            return Ok(true);
        }
        Some(s) if s == "--help" || s == "-h" || s == "help" => {
            println!("{}", usage());
            return Ok(true);
        }
        Some(s) => s.clone(),
    };

    let registry = commands::registry();
    let (name, defaults, runner) = registry
        .iter()
        .find(|(n, _, _)| *n == sub)
        .ok_or_else(|| CliError::UnknownSubcommand(sub.clone()))?;

    // collect --key value / --key=value overrides plus the control flags
    let mut overrides: Vec<(String, String)> = Vec::new();
    let mut config_path: Option<String> = None;
    let mut dry_run = false;
    let rest: Vec<String> = it.cloned().collect();
    let mut i = 0;
    while i < rest.len() {
        let arg = &rest[i];
        let stripped = arg.strip_prefix("--").ok_or_else(|| CliError::Parse {
            line: 0,
            field: arg.clone(),
            reason: "expected --key or --key=value".to_string(),
        })?;
        let (key, value) = if let Some((k, v)) = stripped.split_once('=') {
            (k.to_string(), Some(v.to_string()))
        } else {
            (stripped.to_string(), None)
        };
        match key.as_str() {
            "dry-run" => {
                dry_run = true;
                i += 1;
            }
            "config" => {
                let v = match value {
                    Some(v) => v,
                    None => {
                        i += 1;
                        rest.get(i)
                            .cloned()
                            .ok_or_else(|| CliError::Parse {
                                line: 0,
                                field: arg.clone(),
                                reason: "--config needs a path".to_string(),
                            })?
                    }
                };
                config_path = Some(v);
                i += 1;
            }
            _ => {
                let v = match value {
                    Some(v) => v,
                    None => {
                        i += 1;
                        rest.get(i)
                            .cloned()
                            .ok_or_else(|| CliError::Parse {
                                line: 0,
                                field: arg.clone(),
                                reason: format!("--{key} needs a value"),
                            })?
                    }
                };
                overrides.push((key, v));
                i += 1;
            }
        }
    }

    let file_cfg = match &config_path {
        Some(path) => Some(config::parse_config(&std::fs::read_to_string(path)?)?),
        None => None,
    };
    let cfg = ExperimentConfig::resolve(name, defaults, file_cfg.as_ref(), &overrides)?;

    if dry_run {
        print!("{}", cfg.to_text());
        println!("plan: validated; no computation performed");
        return Ok(true);
    }

    let out = runner(&cfg)?;

    let csv_path = cfg.get("csv")?;
    if csv_path.is_empty() {
        let stdout = std::io::stdout();
        let mut lock = stdout.lock();
        out.table.write_to(&mut lock)?;
        lock.flush()?;
    } else {
        let mut f = std::fs::File::create(csv_path)?;
        out.table.write_to(&mut f)?;
    }

    let svg_path = cfg.get("svg")?;
    if !svg_path.is_empty() {
        if let Some(plot) = &out.plot {
            let spec = svg::ChartSpec {
                title: &plot.title,
                x_label: &plot.x_label,
                y_label: &plot.y_label,
                log_x: plot.log_x,
                log_y: plot.log_y,
            };
            std::fs::write(svg_path, svg::line_chart(&spec, &plot.points))?;
        } else {
            eprintln!("note: subcommand '{name}' has no plottable series; svg skipped");
        }
    }

    for note in &out.notes {
        eprintln!("{note}");
    }
    eprintln!("{}", if out.pass { "PASS" } else { "FAIL" });
    Ok(out.pass)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(parts: &[&str]) -> Vec<String> {
        std::iter::once("bergman-lab")
            .chain(parts.iter().cloned())
            .map(String::from)
            .collect()
    }

    #[test]
    fn help_and_unknown_subcommand() {
        assert_eq!(main_with_args(&argv(&["--help"])), EXIT_PASS);
        assert_eq!(main_with_args(&argv(&["frobnicate"])), EXIT_ERROR);
    }

    #[test]
    fn dry_run_prints_resolved_plan() {
        assert_eq!(
            main_with_args(&argv(&["lct", "--weight", "log-abs:c=1", "--dry-run"])),
            EXIT_PASS
        );
    }

    #[test]
    fn unknown_key_is_an_error() {
        assert_eq!(
            main_with_args(&argv(&["lct", "--wat", "1"])),
            EXIT_ERROR
        );
    }

    #[test]
    fn every_registry_entry_has_unique_name_and_output_keys() {
        let reg = commands::registry();
        let mut names: Vec<&str> = reg.iter().map(|(n, _, _)| *n).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), reg.len());
        for (name, defaults, _) in &reg {
            let keys: Vec<&str> = defaults.iter().map(|(k, _)| *k).collect();
            assert!(keys.contains(&"csv"), "{name} misses csv");
            assert!(keys.contains(&"svg"), "{name} misses svg");
            let mut sorted = keys.clone();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted.len(), keys.len(), "{name} has duplicate keys");
        }
    }
}
