//! Machine-readable verification report. Everything here is a pure function of
//! config and seed; wall times live in a separate timing document.

use serde::Serialize;

pub const REPORT_SCHEMA: u32 = 1;

/// How the residual is judged against the tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// Pass iff `residual <= tolerance`.
    Upper,
    /// Pass iff `residual >= tolerance`.
    Lower,
    /// Measured and reported, never failing.
    Report,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityResult {
    pub name: String,
    pub reference: String,
    pub bound: Bound,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
}

impl IdentityResult {
    pub fn new(name: &str, reference: &str, bound: Bound, residual: f64, tolerance: f64, points: usize) -> Self {
        let pass = match bound {
            Bound::Upper => residual <= tolerance,
            Bound::Lower => residual >= tolerance,
            Bound::Report => true,
        };
        IdentityResult {
            name: name.to_string(),
            reference: reference.to_string(),
            bound,
            max_residual: residual,
            tolerance,
            pass,
            points,
            detail: None,
        }
    }

    pub fn with_detail(mut self, d: serde_json::Value) -> Self {
        self.detail = Some(d);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, PartialOrd, Ord)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Error => 3,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub status: Status,
    pub identities: Vec<IdentityResult>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SuiteReport {
    pub fn finish(name: &str, identities: Vec<IdentityResult>, notes: Vec<String>, error: Option<String>) -> Self {
        let status = if error.is_some() {
            Status::Error
        } else if identities.iter().all(|i| i.pass) {
            Status::Pass
        } else {
            Status::Fail
        };
        SuiteReport { name: name.to_string(), status, identities, notes, error }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub toolkit_version: String,
    pub config_sha256: String,
    pub seed: u64,
    pub status: Status,
    pub suites: Vec<SuiteReport>,
}

impl ReportDocument {
    pub fn new(config_sha256: String, seed: u64, suites: Vec<SuiteReport>) -> Self {
        let status = suites.iter().map(|s| s.status).max().unwrap_or(Status::Pass);
        ReportDocument {
            schema_version: REPORT_SCHEMA,
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
            config_sha256,
            seed,
            status,
            suites,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteTiming {
    pub suite: String,
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TimingDocument {
    pub started_unix: u64,
    pub suites: Vec<SuiteTiming>,
}
