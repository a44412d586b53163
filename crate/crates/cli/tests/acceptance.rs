//! Acceptance gate: drives the `cgt` binary on the bundled configs and prints
//! one PASS/FAIL line per criterion. Thresholds are applied to the measured
//! residuals directly, not to the pass flags in the report.

use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_cgt");

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn scratch(name: &str) -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR")).join(name)
}

struct Run {
    code: i32,
    report: Value,
    bytes: Vec<u8>,
    timing: Value,
    stderr: String,
}

fn verify(config: &str, tag: &str, extra: &[&str]) -> Run {
    let out = scratch(&format!("{tag}.json"));
    let o = Command::new(BIN)
        .arg("verify")
        .arg(configs().join(config))
        .arg("--report")
        .arg(&out)
        .args(extra)
        .output()
        .expect("cgt runs");
    let bytes = std::fs::read(&out).unwrap_or_default();
    let timing = std::fs::read(format!("{}.timing.json", out.display())).unwrap_or_default();
    Run {
        code: o.status.code().unwrap_or(-1),
        report: serde_json::from_slice(&bytes).unwrap_or(Value::Null),
        bytes,
        timing: serde_json::from_slice(&timing).unwrap_or(Value::Null),
        stderr: String::from_utf8_lossy(&o.stderr).into_owned(),
    }
}

impl Run {
    fn identity(&self, suite: &str, name: &str) -> Option<&Value> {
        self.report["suites"].as_array()?.iter().find(|s| s["name"] == suite)?["identities"]
            .as_array()?
            .iter()
            .find(|i| i["name"] == name)
    }

    /// Residual of an identity; NaN when missing or null.
    fn residual(&self, suite: &str, name: &str) -> f64 {
        self.identity(suite, name).and_then(|i| i["max_residual"].as_f64()).unwrap_or(f64::NAN)
    }

    fn points(&self, suite: &str, name: &str) -> u64 {
        self.identity(suite, name).and_then(|i| i["points"].as_u64()).unwrap_or(0)
    }

    fn detail(&self, suite: &str, name: &str, key: &str) -> Value {
        self.identity(suite, name).map_or(Value::Null, |i| i["detail"][key].clone())
    }

    fn seconds(&self, suite: &str) -> f64 {
        self.timing["suites"]
            .as_array()
            .and_then(|v| v.iter().find(|s| s["suite"] == suite))
            .and_then(|s| s["wall_seconds"].as_f64())
            .unwrap_or(f64::NAN)
    }
}

struct Gate {
    failures: usize,
}

impl Gate {
    fn check(&mut self, n: usize, title: &str, ok: bool, evidence: String) {
        println!("{} criterion {n:>2} {title}: {evidence}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failures += 1;
        }
    }
}

fn below(v: f64, tol: f64) -> bool {
    v <= tol
}

/// Maximum that treats a missing (NaN) residual as infinitely bad.
fn worst(a: f64, v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        a.max(v)
    }
}

fn main() {
    let flat = verify("flat.json", "flat_a", &[]);
    let sphere = verify("sphere.json", "sphere", &[]);
    let mink = verify("minkowski.json", "minkowski", &[]);
    let e3 = verify("euclid3.json", "euclid3", &[]);
    let mut g = Gate { failures: 0 };

    let fv = flat.residual("curvature", "flat_vanishing");
    let rho = sphere.residual("curvature", "scalar_curvature");
    let rho_pts = sphere.points("curvature", "scalar_curvature");
    let t1 = flat.seconds("curvature").max(sphere.seconds("curvature"));
    g.check(
        1,
        "curvature sanity",
        below(fv, 1e-10) && below(rho, 1e-8) && rho_pts >= 100 && t1 < 5.0,
        format!("flat max {fv:e}, |rho_s - 12| {rho:e} at {rho_pts} points, {t1:.2} s"),
    );

    let wr = flat.residual("curvature", "weyl_random_conformal_factors");
    let factors = flat.detail("curvature", "weyl_random_conformal_factors", "factors").as_u64().unwrap_or(0);
    let wpts = flat.points("curvature", "weyl_random_conformal_factors");
    let t2 = flat.seconds("curvature");
    g.check(
        2,
        "conformal flatness implies Weyl vanishing",
        below(wr, 1e-8) && factors >= 20 && wpts >= 20 * 50 && t2 < 30.0,
        format!("max {wr:e} over {factors} factors, {wpts} evaluations, {t2:.2} s"),
    );

    let laws = ["connection_law", "riemann_law", "schouten_law", "trace_identity"];
    let mut worst_law: f64 = 0.0;
    let mut worst_forms: f64 = 0.0;
    let mut draws = 0;
    for r in [&flat, &sphere] {
        for l in laws {
            worst_law = worst(worst_law, r.residual("conformal", l));
        }
        worst_forms = worst(worst_forms, r.residual("conformal", "schouten_forms_agree"));
        draws += r.points("conformal", "connection_law");
    }
    g.check(
        3,
        "transformation-law fidelity",
        below(worst_law, 1e-7) && below(worst_forms, 1e-10) && draws >= 100,
        format!("formula vs brute force {worst_law:e}, internal agreement {worst_forms:e}, {draws} draws"),
    );

    let mut lie: f64 = 0.0;
    for r in [&flat, &sphere, &mink] {
        for name in ["lie_form_metric", "lie_form_connection"] {
            lie = worst(lie, r.residual("conformal", name));
        }
    }
    g.check(4, "Lie-form invariance", below(lie, 1e-7), format!("max pullback residual {lie:e} (flat, sphere, Minkowski)"));

    let hol = flat.residual("jet_gauge", "holonomic_spencer_vanishing");
    let duals = worst(worst(0.0, flat.residual("jet_gauge", "potential_a_dual_forms")), flat.residual("jet_gauge", "potential_b_dual_forms"));
    let nsec = flat.points("jet_gauge", "potential_a_dual_forms");
    let gh = flat.residual("jet_gauge", "holonomic_field_equations");
    let ker = flat.residual("jet_gauge", "linearized_kernel_affine");
    g.check(
        5,
        "jet/gauge exactness probes",
        below(hol, 1e-9) && below(duals, 1e-7) && nsec >= 100 && below(gh, 1e-7) && below(ker, 1e-10),
        format!("holonomic {hol:e}, dual forms {duals:e} on {nsec} sections, (G, H) {gh:e}, kernel {ker:e}"),
    );

    let mut ratios = Vec::new();
    for r in [&flat, &mink] {
        if let Some(v) = r.detail("jet_gauge", "weak_field_quadratic", "ratios").as_array() {
            ratios.extend(v.iter().filter_map(Value::as_f64));
        }
    }
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    g.check(
        6,
        "weak-field Maxwell limit",
        !ratios.is_empty() && lo >= 3.5 && hi <= 4.5,
        format!("{} Richardson ratios in [{lo:.4}, {hi:.4}]", ratios.len()),
    );

    let dim4 = flat.detail("conformal", "conformal_killing_dimension", "dimension").as_u64();
    let gap4 = flat.detail("conformal", "conformal_killing_dimension", "gap_ratio").as_f64().unwrap_or(0.0);
    let dim3 = e3.detail("conformal", "conformal_killing_dimension", "dimension").as_u64();
    g.check(
        7,
        "conformal Killing dimension",
        dim4 == Some(15) && gap4 > 1e6 && dim3 == Some(10),
        format!("n=4: {dim4:?} (gap {gap4:.3e}), n=3: {dim3:?}"),
    );

    let exact: f64 = ["generator_killing_exact", "bracket_antisymmetry", "jacobi_exact"]
        .iter()
        .fold(0.0, |m, n| worst(worst(m, flat.residual("algebra", n)), mink.residual("algebra", n)));
    let janet = worst(worst(0.0, flat.residual("algebra", "janet_complex")), mink.residual("algebra", "janet_complex"));
    let jpts = flat.points("algebra", "janet_complex");
    let cdim = flat.detail("algebra", "c_constraint_dimension", "dimension");
    g.check(
        8,
        "algebra exactness",
        exact == 0.0 && below(janet, 1e-8) && jpts >= 5 * 50 && cdim.is_u64(),
        format!("exact defects {exact}, D2∘D1 {janet:e} over {jpts} evaluations, c-constraint dimension {cdim}"),
    );

    let ibp = flat.detail("algebra", "ibp_balance_order", "ratios");
    let ibp_ok = ibp.as_array().is_some_and(|v| !v.is_empty() && v.iter().all(|r| r.as_f64().is_some_and(|r| (r - 4.0).abs() <= 0.8)));
    let oracles = worst(worst(0.0, flat.residual("algebra", "div2_oracle")), flat.residual("algebra", "zeta_oracle"));
    g.check(
        9,
        "variational duals",
        ibp_ok && below(oracles, 1e-13),
        format!("refinement ratios {ibp}, div2/zeta oracle residual {oracles:e}"),
    );

    let line = flat.residual("anyon", "constant_field_straight_line");
    let norm = flat.residual("anyon", "unit_norm_drift");
    let steps = flat.points("anyon", "unit_norm_drift");
    let order = flat.detail("anyon", "endpoint_order", "order").as_f64().unwrap_or(f64::NAN);
    let mono = flat.residual("anyon", "monopole_density_nonzero");
    let fd = flat.residual("anyon", "monopole_density_fd");
    let group = flat.residual("anyon", "susceptibility_group_action");
    g.check(
        10,
        "anyon suite",
        below(line, 1e-12)
            && below(norm, 1e-8)
            && steps >= 10_000
            && (order - 4.0).abs() <= 1.2
            && mono > 1e-3
            && below(fd, 1e-6)
            && below(group, 1e-10),
        format!(
            "line {line:e}, norm drift {norm:e} over {steps} steps, order {order:.3}, |div B| {mono:.3e}, fd {fd:e}, group {group:e}"
        ),
    );

    let again = verify("flat.json", "flat_b", &[]);
    let same = !flat.bytes.is_empty() && flat.bytes == again.bytes;
    let traj = |tag: &str| {
        let out = scratch(tag);
        let st = Command::new(BIN).arg("trajectory").arg(configs().join("flat.json")).arg("--out").arg(&out).status();
        st.map(|s| s.success()).unwrap_or(false).then(|| std::fs::read(&out).unwrap_or_default())
    };
    let (ta, tb) = (traj("traj_a.csv"), traj("traj_b.csv"));
    let rows = ta.as_ref().map_or(0, |b| b.iter().filter(|&&c| c == b'\n').count());
    let csv_same = ta.is_some() && ta == tb;
    g.check(
        11,
        "determinism",
        same && csv_same && rows == 10_002,
        format!("report {} bytes identical: {same}, trajectory {rows} lines identical: {csv_same}", flat.bytes.len()),
    );

    // exit-code contract
    let schw = verify("schwarzschild.json", "schwarzschild", &[]);
    let weyl = schw.identity("curvature", "weyl_vanishing").map(|i| i["pass"].clone());
    let bad = scratch("bad_expression.json");
    std::fs::write(&bad, "{\n  \"dimension\": 3,\n  \"signature\": [1, 1, 1],\n  \"metric\": { \"kind\": \"conformally_flat\", \"factor\": \"x1 + sin(y2)\" },\n  \"seed\": 1\n}\n")
        .expect("scratch write");
    let o = Command::new(BIN).arg("verify").arg(&bad).output().expect("cgt runs");
    let msg = String::from_utf8_lossy(&o.stderr);
    let located = msg.contains(":4:") && msg.contains("y2");
    let all_pass = [&flat, &sphere, &mink, &e3].iter().all(|r| r.code == 0);
    println!(
        "{} exit codes: bundled configs 0: {all_pass}, non-conformally-flat Weyl check {} (exit {}), bad expression exit {} located: {located}",
        if all_pass && schw.code == 1 && weyl == Some(Value::Bool(false)) && o.status.code() == Some(2) && located { "PASS" } else { "FAIL" },
        if weyl == Some(Value::Bool(false)) { "FAIL as designed" } else { "unexpected" },
        schw.code,
        o.status.code().unwrap_or(-1),
    );
    if !all_pass || schw.code != 1 || o.status.code() != Some(2) || !located {
        eprintln!("{}{}{}", flat.stderr, schw.stderr, msg);
        g.failures += 1;
    }

    if g.failures > 0 {
        eprintln!("{} acceptance check(s) failed", g.failures);
        std::process::exit(1);
    }
}
