//! Config-driven verification runs, one-shot evaluation and trajectory export.

pub mod compute;
pub mod config;
pub mod report;
pub mod suites;

use config::Loaded;
use report::{ReportDocument, SuiteTiming, TimingDocument};
use std::time::{Instant, SystemTime, UNIX_EPOCH};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Usage(String),
    #[error("cannot access {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("runtime error: {0}")]
    Runtime(#[from] cgt_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Io { .. } | CliError::Runtime(_) => 3,
        }
    }
}

/// Suite names in canonical order; an empty filter selects all of them.
pub fn select_suites(filter: &[String]) -> Result<Vec<&'static str>, CliError> {
    if let Some(bad) = filter.iter().find(|f| !suites::SUITES.contains(&f.as_str())) {
        return Err(CliError::Usage(format!("unknown suite '{bad}'; known: {}", suites::SUITES.join(", "))));
    }
    Ok(suites::SUITES.into_iter().filter(|s| filter.is_empty() || filter.iter().any(|f| f == s)).collect())
}

pub fn verify(cfg: &Loaded, filter: &[String]) -> Result<(ReportDocument, TimingDocument), CliError> {
    let selected = select_suites(filter)?;
    let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let mut reports = Vec::new();
    let mut timings = Vec::new();
    for name in selected {
        log::info!("running suite {name}");
        let t0 = Instant::now();
        reports.push(suites::run(name, cfg));
        timings.push(SuiteTiming { suite: name.to_string(), wall_seconds: t0.elapsed().as_secs_f64() });
    }
    let doc = ReportDocument::new(cfg.sha256.clone(), cfg.raw.seed, reports);
    Ok((doc, TimingDocument { started_unix, suites: timings }))
}

/// Shortest round-trip text, in exponent form outside `[1e-4, 1e15)`.
pub fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !a.is_finite() {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

/// CSV text for the configured carrier trajectory.
pub fn trajectory_csv(cfg: &Loaded) -> Result<String, CliError> {
    use cgt_core::anyon::{integrate_motion, trajectory_rows, CSV_HEADER};
    let a = cfg.anyon.as_ref().ok_or_else(|| CliError::Config("trajectory needs an anyon block".into()))?;
    let traj = integrate_motion(&a.field, a.initial, a.t_end, a.dt)?;
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in trajectory_rows(&traj, &a.field)? {
        let cells: Vec<String> = row.iter().map(|v| fmt_num(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}
