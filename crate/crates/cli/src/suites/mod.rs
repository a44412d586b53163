//! Verification suites. Each suite evaluates residuals over (identity, point)
//! work items in parallel and reduces them to per-identity maxima; the
//! maximum is order-independent, so reports do not depend on scheduling.

mod algebra;
mod anyon;
mod conformal;
mod curvature;
mod jet_gauge;

use crate::config::Loaded;
use crate::report::{Bound, IdentityResult, SuiteReport};
use cgt_core::Result;
use rayon::prelude::*;
use std::collections::BTreeMap;

pub const SUITES: [&str; 5] = ["curvature", "conformal", "jet_gauge", "algebra", "anyon"];

pub fn run(name: &str, cfg: &Loaded) -> SuiteReport {
    let mut rec = Recorder { suite: name, tolerances: &cfg.raw.tolerances, identities: Vec::new(), notes: Vec::new() };
    let outcome = match name {
        "curvature" => curvature::run(cfg, &mut rec),
        "conformal" => conformal::run(cfg, &mut rec),
        "jet_gauge" => jet_gauge::run(cfg, &mut rec),
        "algebra" => algebra::run(cfg, &mut rec),
        "anyon" => anyon::run(cfg, &mut rec),
        _ => unreachable!("suite names are validated by the caller"),
    };
    let error = outcome.err().map(|e| e.to_string());
    if let Some(e) = &error {
        log::error!("suite {name}: {e}");
    }
    SuiteReport::finish(name, rec.identities, rec.notes, error)
}

pub struct Recorder<'a> {
    suite: &'a str,
    tolerances: &'a BTreeMap<String, f64>,
    identities: Vec<IdentityResult>,
    notes: Vec<String>,
}

impl Recorder<'_> {
    fn tolerance(&self, name: &str, default: f64) -> f64 {
        self.tolerances.get(&format!("{}.{name}", self.suite)).copied().unwrap_or(default)
    }

    fn push(&mut self, r: IdentityResult) -> &mut IdentityResult {
        log::info!(
            "{}.{}: residual {:e} vs {:e} -> {}",
            self.suite,
            r.name,
            r.max_residual,
            r.tolerance,
            if r.pass { "pass" } else { "FAIL" }
        );
        self.identities.push(r);
        self.identities.last_mut().expect("just pushed")
    }

    fn upper(&mut self, name: &str, reference: &str, residual: f64, tol: f64, points: usize) -> &mut IdentityResult {
        let tol = self.tolerance(name, tol);
        self.push(IdentityResult::new(name, reference, Bound::Upper, residual, tol, points))
    }

    fn lower(&mut self, name: &str, reference: &str, value: f64, tol: f64, points: usize) -> &mut IdentityResult {
        let tol = self.tolerance(name, tol);
        self.push(IdentityResult::new(name, reference, Bound::Lower, value, tol, points))
    }

    fn report(&mut self, name: &str, reference: &str, value: f64, points: usize) -> &mut IdentityResult {
        self.push(IdentityResult::new(name, reference, Bound::Report, value, 0.0, points))
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }
}

/// NaN-propagating maximum.
pub fn worst(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

/// Component-wise maxima of `f` over `items`, evaluated in parallel. The
/// first error in item order wins.
pub fn par_max<P: Sync, const K: usize>(items: &[P], f: impl Fn(&P) -> Result<[f64; K]> + Sync + Send) -> Result<[f64; K]> {
    let vals: Vec<Result<[f64; K]>> = items.par_iter().map(f).collect();
    let mut out = [0.0; K];
    for v in vals {
        let v = v?;
        for k in 0..K {
            out[k] = worst(out[k], v[k]);
        }
    }
    Ok(out)
}

/// Cartesian product of index ranges, used as parallel work items.
pub fn pairs(a: usize, b: usize) -> Vec<(usize, usize)> {
    (0..a).flat_map(|i| (0..b).map(move |j| (i, j))).collect()
}
