use cgt_cli::config::RunConfig;
use cgt_cli::{compute, trajectory_csv, verify, CliError};
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Conformal geometry toolkit. Log verbosity follows `CGT_LOG` (error, warn, info, debug).
#[derive(Parser)]
#[command(name = "cgt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and emit a JSON report.
    Verify {
        config: PathBuf,
        /// Restrict to these suites (repeatable).
        #[arg(long = "suite")]
        suites: Vec<String>,
        /// Write the report here instead of stdout; wall times go to `<report>.timing.json`.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Evaluate one quantity at a point and print its labelled components.
    Compute {
        config: PathBuf,
        #[arg(long)]
        what: String,
        /// Comma-separated coordinates.
        #[arg(long, allow_hyphen_values = true)]
        at: String,
    },
    /// Integrate the configured carrier and write the trajectory CSV.
    Trajectory {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Verify { config, suites, report } => {
            let cfg = RunConfig::load(&config)?;
            let (doc, timing) = verify(&cfg, &suites)?;
            let json = doc.to_json();
            match report {
                Some(path) => {
                    write(&path, &json)?;
                    let mut tpath = path.into_os_string();
                    tpath.push(".timing.json");
                    let t = serde_json::to_string_pretty(&timing).expect("timing serializes");
                    write(Path::new(&tpath), &(t + "\n"))?;
                }
                None => print!("{json}"),
            }
            for s in &doc.suites {
                eprintln!("{:<10} {:?}", s.name, s.status);
            }
            Ok(doc.status.exit_code())
        }
        Command::Compute { config, what, at } => {
            let cfg = RunConfig::load(&config)?;
            let p = at
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::Usage(format!("--at: {e}")))?;
            for (name, v) in compute::compute(&cfg, &what, &p)? {
                println!("{name} = {}", cgt_cli::fmt_num(v));
            }
            Ok(0)
        }
        Command::Trajectory { config, out } => {
            let cfg = RunConfig::load(&config)?;
            write(&out, &trajectory_csv(&cfg)?)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CGT_LOG", "warn")).init();
    let code = match run(Cli::parse()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
