use super::{par_max, Recorder};
use crate::config::Loaded;
use cgt_core::anyon::*;
use cgt_core::{Expr, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

fn mat_mul(a: &Mat4<f64>, b: &Mat4<f64>) -> Mat4<f64> {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..4).map(|k| a[i][k] * b[k][j]).sum()))
}

fn max_diff(a: &Susceptibility<f64>, b: &Susceptibility<f64>) -> f64 {
    a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn run(cfg: &Loaded, rec: &mut Recorder) -> Result<()> {
    let Some(a) = &cfg.anyon else {
        rec.note("no anyon block in this config");
        return Ok(());
    };
    let pf = &a.field;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.raw.seed.wrapping_add(6));

    // transport is a left action: T(Λ₂, T(Λ₁, χ)) = T(Λ₂Λ₁, χ)
    let chi: Susceptibility<f64> = (0..16).map(|_| (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let l1 = mat_mul(&boost_x(0.3), &rotation_z(0.7));
    let l2 = mat_mul(&rotation_z(-0.4), &boost_x(-0.5));
    let twice = transport_susceptibility(&transport_susceptibility(&chi, &l1)?, &l2)?;
    let once = transport_susceptibility(&chi, &mat_mul(&l2, &l1))?;
    let ident = max_diff(&transport_susceptibility(&chi, &identity4())?, &chi);
    rec.upper("susceptibility_group_action", "susceptibility transport (Λ⊗Λ)χ(Λ⊗Λ)⁻¹ is a group action", max_diff(&twice, &once).max(ident), 1e-10, 2);

    // constant w gives B = 0 and straight lines
    let c = |t: &str| Expr::Num(t.parse().expect("literal"));
    let flat = PolarizationField::new(
        [c("0"), c("0"), c("0"), c("0"), c("-0.2"), c("0.1")],
        [0.0, 0.0, 1.0],
        PolarizationMode::Direct,
        pf.m,
        pf.e,
    )?;
    let traj = integrate_motion(&flat, a.initial, 2.0, 0.01)?;
    let u = a.initial.u;
    let line = traj.samples.iter().fold(0.0f64, |m, s| {
        (0..3).fold(m, |m, i| m.max((s.r[i] - (a.initial.r[i] + u[i + 1] / u[0] * s.t)).abs()))
    });
    rec.upper("constant_field_straight_line", "constant w: no effective field, straight-line motion", line, 1e-12, traj.samples.len());

    let long = integrate_motion(pf, a.initial, a.dt * a.long_run_steps as f64, a.dt)?;
    let mon = invariant_monitors(&long, pf)?;
    let steps = long.samples.len() - 1;
    rec.upper("unit_norm_drift", "ω(u,u) = −1 preserved along RK4 trajectories", mon.norm_drift, 1e-8, steps);
    rec.upper("equation_residual", "trajectory satisfies du/dt = −(e/m) u × B_eff (central differences)", equation_residual(&long, pf)?, 1e-6, steps);
    rec.report("premise_w_dot_u_drift", "drift of w̃·ũ along the trajectory (premise of the effective field)", mon.w_dot_u_drift, steps)
        .detail = Some(json!({ "premise_violated": mon.premise_violated, "threshold": PREMISE_TOL }));

    let ends = a
        .richardson_dt
        .iter()
        .map(|&h| {
            let t = integrate_motion(pf, a.initial, a.richardson_t_end, h)?;
            let s = t.samples.last().expect("initial sample");
            Ok([s.r[0], s.r[1], s.r[2], s.u[1], s.u[2], s.u[3]])
        })
        .collect::<Result<Vec<_>>>()?;
    let gap = |x: &[f64; 6], y: &[f64; 6]| x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let ratio = gap(&ends[0], &ends[1]) / gap(&ends[1], &ends[2]);
    let order = ratio.ln() / (a.richardson_dt[0] / a.richardson_dt[1]).ln();
    rec.upper("endpoint_order", "RK4 endpoint convergence order 4 (Richardson)", (order - 4.0).abs() / 4.0, 0.3, 3)
        .detail = Some(json!({ "dt": a.richardson_dt, "ratio": ratio, "order": order }));

    // effective monopole density at the configured points (first three coordinates)
    let rs: Vec<[f64; 3]> = cfg.points.iter().filter(|p| p.len() >= 3).map(|p| [p[0], p[1], p[2]]).collect();
    let [peak, fd] = par_max(&rs, |r| {
        let rho = monopole_density(pf, &u, r)?;
        let h = 1e-4;
        let mut div = 0.0;
        for k in 0..3 {
            let (mut up, mut dn) = (*r, *r);
            up[k] += h;
            dn[k] -= h;
            div += (effective_faraday(pf, &u, &up)?.0[k] - effective_faraday(pf, &u, &dn)?.0[k]) / (2.0 * h);
        }
        Ok([rho.abs(), (rho - div).abs()])
    })?;
    if !rs.is_empty() {
        rec.lower("monopole_density_nonzero", "div B_eff ≠ 0 from a spatially varying w", peak, 1e-3, rs.len());
        rec.upper("monopole_density_fd", "div B_eff from jets versus central differences", fd, 1e-6, rs.len());
    }
    Ok(())
}
