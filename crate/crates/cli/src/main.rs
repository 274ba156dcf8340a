mod commands;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde_json::{json, Value};

use crate::config::{config_error, ConfigError, RunConfig};

/// Floquet analysis of periodic ODE operators, driven by a JSON config.
#[derive(Parser, Debug)]
#[command(name = "floquet", version)]
struct Cli {
    /// One of: multipliers, jordan, discriminant-zeros, multipoint, monodromy, spectrum-scan,
    /// oracle-check, vandermonde-check, asymptotics, definition1-sets.
    command: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    threads: Option<usize>,
    /// Integrator tolerance; overrides `tolerances.ode_tol` from the config.
    #[arg(long)]
    tol: Option<f64>,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

struct Loaded {
    command: String,
    cfg: RunConfig,
    hash: String,
    base: PathBuf,
}

fn load(cli: &Cli) -> anyhow::Result<Loaded> {
    let (text, base) = match &cli.config {
        Some(p) => {
            let text = std::fs::read(p)
                .map_err(|e| config_error(format!("reading {}: {e}", p.display())))?;
            (text, p.parent().map(Path::to_path_buf).unwrap_or_default())
        }
        None => (b"{}".to_vec(), PathBuf::from(".")),
    };
    let hash = output::sha256_hex(&text);
    let text = String::from_utf8(text).map_err(|_| config_error("config is not UTF-8"))?;
    let mut cfg = RunConfig::parse(&text)?;
    let command = match (&cli.command, &cfg.command) {
        (Some(a), Some(b)) if a != b => {
            return Err(config_error(format!(
                "command '{a}' disagrees with config command '{b}'"
            )))
        }
        (Some(a), _) | (None, Some(a)) => a.clone(),
        (None, None) => return Err(config_error("no command given")),
    };
    if !commands::COMMANDS.contains(&command.as_str()) {
        return Err(config_error(format!(
            "unknown command '{command}'; expected one of {}",
            commands::COMMANDS.join(", ")
        )));
    }
    if let Some(t) = cli.tol {
        cfg.tolerances.ode_tol = t;
        cfg.tolerances
            .validate()
            .map_err(|e| config_error(format!("--tol: {e}")))?;
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(config_error("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| config_error(format!("thread pool: {e}")))?;
    }
    Ok(Loaded {
        command,
        cfg,
        hash,
        base,
    })
}

fn write(dir: &Path, name: &str, contents: &str) -> anyhow::Result<()> {
    std::fs::write(dir.join(name), contents).map_err(|e| anyhow::anyhow!("writing {name}: {e}"))
}

fn finish(dir: &Path, log: &[String], code: u8) -> ExitCode {
    for line in log {
        eprintln!("{line}");
    }
    if std::fs::create_dir_all(dir).is_ok() {
        let _ = write(dir, "diagnostics.log", &(log.join("\n") + "\n"));
    }
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let loaded = match load(&cli) {
        Ok(l) => l,
        Err(e) => return finish(&cli.out, &[format!("config error: {e}")], EXIT_CONFIG),
    };
    let mut log = vec![
        format!("command: {}", loaded.command),
        format!("config sha256: {}", loaded.hash),
    ];
    let started = std::time::Instant::now();
    let outcome = match commands::run(&loaded.command, &loaded.cfg, &loaded.base) {
        Ok(o) => o,
        Err(e) => {
            let code = if e.downcast_ref::<ConfigError>().is_some() {
                EXIT_CONFIG
            } else {
                EXIT_NUMERICAL
            };
            let kind = if code == EXIT_CONFIG {
                "config error"
            } else {
                "numerical failure"
            };
            log.push(format!("{kind}: {e:#}"));
            return finish(&cli.out, &log, code);
        }
    };
    log.extend(outcome.diagnostics.iter().cloned());
    log.extend(outcome.failures.iter().map(|f| format!("failed: {f}")));
    log.push(format!("elapsed: {:.3} s", started.elapsed().as_secs_f64()));

    let mut doc = json!({
        "schema": 1,
        "command": loaded.command,
        "config_sha256": loaded.hash,
        "tolerances": serde_json::to_value(&loaded.cfg.tolerances).unwrap_or(Value::Null),
        "result": outcome.result,
        "failures": outcome.failures,
    });
    if let Some(op) = &outcome.operator {
        doc["operator"] = serde_json::to_value(op).unwrap_or(Value::Null);
    }
    if let Some(p) = outcome.pass {
        doc["pass"] = Value::Bool(p);
        log.push(format!("pass: {p}"));
    }
    let written = std::fs::create_dir_all(&cli.out)
        .map_err(anyhow::Error::from)
        .and_then(|_| write(&cli.out, "result.json", &output::to_json(&doc)))
        .and_then(|_| match &outcome.csv {
            Some(csv) => write(&cli.out, "grid.csv", csv),
            None => Ok(()),
        });
    if let Err(e) = written {
        log.push(format!("output error: {e}"));
        return finish(&cli.out, &log, EXIT_NUMERICAL);
    }
    let failed = !outcome.failures.is_empty() || outcome.pass == Some(false);
    finish(&cli.out, &log, if failed { EXIT_NUMERICAL } else { 0 })
}
