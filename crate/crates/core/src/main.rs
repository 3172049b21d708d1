use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use odd_core::experiments::{builtin_script, compute_metrics, export_log, import_log, run_script};
use odd_core::service::{serve, Course, ServiceConfig};
use odd_core::sim::{ConfigFile, Mode, SimConfig};
use odd_core::{verify, OddError, Result};

#[derive(Parser)]
#[command(name = "odd", version, about = "Omni Differential Drive simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a builtin script and write the trajectory log.
    Run {
        #[arg(long)]
        script: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        mode: Option<Mode>,
    },
    /// Print deviation metrics of a trajectory log.
    Metrics {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Run the property suite.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a script once per value of one config key.
    Sweep {
        #[arg(long)]
        param: String,
        #[arg(long, num_args = 1.., value_delimiter = ',', required = true)]
        values: Vec<String>,
        #[arg(long, default_value = "circle_xz")]
        script: String,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Serve the real-time simulation over WebSocket and raw TCP.
    Serve {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        course: Option<PathBuf>,
        #[arg(long, default_value_t = 8765)]
        port: u16,
        #[arg(long, default_value_t = 200.0)]
        rate: f64,
    },
}

fn config_file(path: Option<&Path>) -> Result<ConfigFile> {
    match path {
        Some(p) => ConfigFile::load(p),
        None => Ok(ConfigFile::default()),
    }
}

fn load_config(path: Option<&Path>) -> Result<SimConfig> {
    config_file(path)?.into_config()
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run {
            script,
            config,
            out,
            seed,
            mode,
        } => {
            let mut cfg = load_config(config.as_deref())?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let mut script = builtin_script(&script)?;
            if let Some(m) = mode {
                script.mode = Some(m);
            }
            let log = run_script(&script, &cfg)?;
            export_log(&log, &out)?;
            let m = compute_metrics(&log)?;
            println!("{}", json!({ "script": script.name, "rows": log.len(), "metrics": m }));
        }
        Command::Metrics { input } => {
            let m = compute_metrics(&import_log(&input)?)?;
            println!("{}", serde_json::to_string(&m).expect("metrics serialize"));
        }
        Command::Verify { seed } => {
            let checks = verify::run_all(seed)?;
            let failed = checks.iter().filter(|c| !c.passed).count();
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            println!("{} checks, {} failed", checks.len(), failed);
            return Ok(failed == 0);
        }
        Command::Sweep {
            param,
            values,
            script,
            config,
        } => {
            let base = config_file(config.as_deref())?;
            let script = builtin_script(&script)?;
            for v in values {
                let mut file = base.clone();
                file.set(&param, &v)?;
                let log = run_script(&script, &file.into_config()?)?;
                let m = compute_metrics(&log)?;
                println!("{}", json!({ "param": param, "value": v, "metrics": m }));
            }
        }
        Command::Serve {
            config,
            course,
            port,
            rate,
        } => {
            let sim = load_config(config.as_deref())?;
            let course = match course {
                Some(p) => Course::load(&p)?,
                None => Course::open(sim.initial_d),
            };
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(serve(ServiceConfig::new(sim, course, port, rate)))?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("{}", error_line(&e));
            ExitCode::FAILURE
        }
    }
}

fn error_line(e: &OddError) -> String {
    json!({ "error": e.code(), "message": e.to_string() }).to_string()
}
