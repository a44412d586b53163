use cgt_core::anyon::*;
use cgt_core::jet::invert;
use cgt_core::{parse, Error, Expr};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn field(upper: [&str; 6], v: [f64; 3], mode: PolarizationMode) -> PolarizationField {
    let e = |t: &str| parse(t, 3).unwrap();
    PolarizationField::new(upper.map(e), v, mode, 2.0, 0.5).unwrap()
}

/// `w = (c1, c2, c3)` through `P^{13} = −c1`, `P^{23} = −c2` and `v = e3`
/// (`w3` is always zero in this layout).
fn w_field(w1: &str, w2: &str) -> PolarizationField {
    let neg = |t: &str| format!("-({t})");
    let (a, b) = (neg(w1), neg(w2));
    field(["0", "0", "0", "0", &a, &b], [0.0, 0.0, 1.0], PolarizationMode::Direct)
}

fn random_chi(seed: u64) -> Susceptibility<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..16).map(|_| (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()
}

fn random_f(rng: &mut ChaCha8Rng) -> Mat4<f64> {
    let mut f = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in i + 1..4 {
            f[i][j] = rng.gen_range(-1.0..1.0);
            f[j][i] = -f[i][j];
        }
    }
    f
}

fn max_diff(a: &Susceptibility<f64>, b: &Susceptibility<f64>) -> f64 {
    a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn susceptibility_transport_examples() {
    let chi = random_chi(1);
    assert!(max_diff(&transport_susceptibility(&chi, &identity4()).unwrap(), &chi) < 1e-15);
    let iso: Susceptibility<f64> = (0..16).map(|i| (0..16).map(|j| if i == j { 0.7 } else { 0.0 }).collect()).collect();
    let (b, r) = (boost_x(0.4), rotation_z(0.3));
    let mut l = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            l[i][j] = (0..4).map(|k| r[i][k] * b[k][j]).sum();
        }
    }
    assert!(max_diff(&transport_susceptibility(&iso, &l).unwrap(), &iso) < 1e-12);
}

/// Componentwise `Λ^μ_α Λ^ν_β χ′^{αβ}_{γδ} (Λ⁻¹)^γ_ρ (Λ⁻¹)^δ_σ` with `Λ⁻¹`
/// from Gauss–Jordan elimination.
#[test]
fn boosted_uniaxial_susceptibility_matches_index_loops() {
    let mut chi = vec![vec![0.0; 16]; 16];
    for (a, b) in [(0, 3), (3, 0), (1, 2), (2, 1)] {
        chi[4 * a + b][4 * a + b] = 1.5;
    }
    chi[4 * 1 + 3][4 * 1 + 3] = 0.4;
    let l = boost_x(0.6f64);
    let rows: Vec<Vec<f64>> = l.iter().map(|r| r.to_vec()).collect();
    let (inv, _) = invert(&rows, 1e-12).unwrap();
    let got = transport_susceptibility(&chi, &l).unwrap();
    for mu in 0..4 {
        for nu in 0..4 {
            for rho in 0..4 {
                for sig in 0..4 {
                    let mut s = 0.0;
                    for a in 0..4 {
                        for b in 0..4 {
                            for c in 0..4 {
                                for d in 0..4 {
                                    s += l[mu][a] * l[nu][b] * chi[4 * a + b][4 * c + d] * inv[c][rho] * inv[d][sig];
                                }
                            }
                        }
                    }
                    assert!((got[4 * mu + nu][4 * rho + sig] - s).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn transport_makes_the_diagram_commute_and_is_a_group_action() {
    let chi = random_chi(2);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let l1 = boost_x(0.3);
    let l2 = rotation_z(-0.7);
    let chi1 = transport_susceptibility(&chi, &l1).unwrap();
    for _ in 0..20 {
        let f = random_f(&mut rng);
        let lhs = apply_susceptibility(&chi1, &transport_tensor(&f, &l1));
        let rhs = transport_tensor(&apply_susceptibility(&chi, &f), &l1);
        for i in 0..4 {
            for j in 0..4 {
                assert!((lhs[i][j] - rhs[i][j]).abs() < 1e-10);
            }
        }
    }
    let mut l21 = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            l21[i][j] = (0..4).map(|k| l2[i][k] * l1[k][j]).sum();
        }
    }
    let twice = transport_susceptibility(&chi1, &l2).unwrap();
    let once = transport_susceptibility(&chi, &l21).unwrap();
    assert!(max_diff(&twice, &once) < 1e-10);
    let mut bad = identity4::<f64>();
    bad[0][1] = 0.2;
    assert!(matches!(transport_susceptibility(&chi, &bad), Err(Error::Precondition(_))));
}

#[test]
fn effective_field_examples() {
    let u = four_velocity([0.3, -0.2, 0.1]);
    let r = [0.1f64, 0.2, -0.3];
    let constant = w_field("0.2", "-0.1");
    let (b, e) = effective_faraday(&constant, &u, &r).unwrap();
    assert_eq!(b, [0.0; 3]);
    assert_eq!(e, [0.0; 3]);

    // w = (0.2, κ x1, 0), u⃗ = e1: (u⃗·∇)w = κ e2 and w × κ e2 = 0.2 κ e3
    let kappa = 0.5f64;
    let pf = w_field("0.2", &format!("{kappa}*x1"));
    let u1 = four_velocity([1.0, 0.0, 0.0]);
    let (b, e) = effective_faraday(&pf, &u1, &r).unwrap();
    let w2 = 0.04 + (kappa * r[0]).powi(2);
    let gamma = 1.0 / (1.0 - w2).sqrt();
    let want = (2.0 / 0.5) * gamma / (1.0 + gamma) * 0.2 * kappa;
    assert!(b[0].abs() < 1e-16 && b[1].abs() < 1e-16);
    assert!((b[2] - want).abs() < 1e-14);
    assert_eq!(e, [0.0; 3]);

    // u⃗ ⊥ ∇w
    let (b, _) = effective_faraday(&pf, &four_velocity([0.0, 0.4, -0.3]), &r).unwrap();
    assert_eq!(b, [0.0; 3]);

    let strong = w_field("2*x1", "0");
    assert!(matches!(effective_faraday(&strong, &u, &[0.6, 0.0, 0.0]), Err(Error::Precondition(_))));
}

#[test]
fn dual_mode_uses_the_electric_block() {
    // P^{01} = 0.3: ∗P^{ij} = −ε_{ij1} P^{01}, so with v = e3, w2 = −ε_{231}·0.3 = −0.3
    let pf = field(["0.3", "0", "0", "0.9", "0.8", "0.7"], [0.0, 0.0, 1.0], PolarizationMode::Dual);
    let w = pf.w(&[0.1f64, 0.2, 0.3]).unwrap();
    assert!((w[0]).abs() < 1e-16 && (w[1] + 0.3).abs() < 1e-16 && w[2].abs() < 1e-16);
    let direct = field(["0.3", "0", "0", "0.9", "0.8", "0.7"], [0.0, 0.0, 1.0], PolarizationMode::Direct);
    let w = direct.w(&[0.1f64, 0.2, 0.3]).unwrap();
    assert_eq!(w, [-0.8, -0.7, 0.0]);
}

fn central_divergence(pf: &PolarizationField, u: &[f64; 4], r: &[f64; 3]) -> f64 {
    let h = 1e-5;
    (0..3)
        .map(|i| {
            let (mut a, mut b) = (*r, *r);
            a[i] += h;
            b[i] -= h;
            (effective_faraday(pf, u, &a).unwrap().0[i] - effective_faraday(pf, u, &b).unwrap().0[i]) / (2.0 * h)
        })
        .sum()
}

#[test]
fn monopole_density_examples() {
    let u = four_velocity([0.3, 0.1, 0.2]);
    let r = [0.2f64, -0.1, 0.3];
    assert_eq!(monopole_density(&w_field("0.1", "0.3"), &u, &r).unwrap(), 0.0);
    let linear = w_field("0.3*x3 + 0.2*x2", "0.25*x1 - 0.15*x3");
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let q: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-0.5..0.5));
        let rho = monopole_density(&linear, &u, &q).unwrap();
        assert!((rho - central_divergence(&linear, &u, &q)).abs() < 1e-6);
    }
    let show = PolarizationField::showcase();
    let rho = monopole_density(&show, &u, &r).unwrap();
    assert!(rho.abs() > 1e-3, "{rho}");
    assert!((rho - central_divergence(&show, &u, &r)).abs() < 1e-6);
}

fn start() -> CarrierState<f64> {
    CarrierState { t: 0.0, u: four_velocity([0.3, 0.1, 0.2]), r: [0.2, -0.1, 0.3] }
}

#[test]
fn constant_w_gives_straight_lines() {
    let pf = w_field("0.2", "-0.4");
    let traj = integrate_motion(&pf, start(), 2.0, 0.01).unwrap();
    assert_eq!(traj.samples.len(), 201);
    let s0 = start();
    for st in &traj.samples {
        for k in 0..4 {
            assert!((st.u[k] - s0.u[k]).abs() < 1e-12);
        }
        for k in 0..3 {
            assert!((st.r[k] - (s0.r[k] + st.t * s0.u[k + 1] / s0.u[0])).abs() < 1e-12);
        }
    }
    let m = invariant_monitors(&traj, &pf).unwrap();
    assert_eq!(m.norm_drift, 0.0);
    assert_eq!(m.w_dot_u_drift, 0.0);
    assert!(!m.premise_violated);
}

#[test]
fn showcase_norm_is_conserved_over_ten_thousand_steps() {
    let pf = PolarizationField::showcase();
    let traj = integrate_motion(&pf, start(), 10.0, 1e-3).unwrap();
    assert_eq!(traj.samples.len(), 10_001);
    let m = invariant_monitors(&traj, &pf).unwrap();
    eprintln!("showcase monitors {m:?}");
    assert!(m.norm_drift < 1e-8);
    assert!(equation_residual(&traj, &pf).unwrap() < 1e-6);
}

#[test]
fn endpoint_converges_at_fourth_order() {
    let pf = PolarizationField::showcase();
    let end = |dt: f64| *integrate_motion(&pf, start(), 4.0, dt).unwrap().samples.last().unwrap();
    let (a, b, c) = (end(0.4), end(0.2), end(0.1));
    let dist = |x: &CarrierState<f64>, y: &CarrierState<f64>| {
        (0..4).map(|k| (x.u[k] - y.u[k]).powi(2)).sum::<f64>().sqrt()
            + (0..3).map(|k| (x.r[k] - y.r[k]).powi(2)).sum::<f64>().sqrt()
    };
    let ratio = dist(&a, &b) / dist(&b, &c);
    eprintln!("endpoint ratio {ratio}");
    assert!((ratio - 16.0).abs() < 0.3 * 16.0);
}

/// RK4 on a rotation-type force loses `|u|²` at `O(θ⁶)` per step, so the
/// norm drift shrinks at least as fast as fourth order.
#[test]
fn norm_drift_shrinks_at_fourth_order() {
    let pf = PolarizationField::showcase();
    let drift = |dt: f64| invariant_monitors(&integrate_motion(&pf, start(), 4.0, dt).unwrap(), &pf).unwrap().norm_drift;
    let d: Vec<f64> = [0.4, 0.2, 0.1].iter().map(|&dt| drift(dt)).collect();
    for w in d.windows(2) {
        assert!(w[0] / w[1] > 0.7 * 16.0, "{d:?}");
    }
}

#[test]
fn rows_follow_the_sampling_contract() {
    let pf = PolarizationField::showcase();
    let traj = integrate_motion(&pf, start(), 0.55, 0.1).unwrap();
    let rows = trajectory_rows(&traj, &pf).unwrap();
    assert_eq!(rows.len(), 6);
    assert_eq!(CSV_HEADER.split(',').count(), 11);
    assert!((rows[0][8] + 1.0).abs() < 1e-14);
    let bad = CarrierState { u: [1.0, 0.5, 0.0, 0.0], ..start() };
    assert!(integrate_motion(&pf, bad, 1.0, 0.1).is_err());
    let bad_field = PolarizationField::new(
        std::array::from_fn(|_| Expr::sym(cgt_core::Sym::Alpha)),
        [0.0, 0.0, 1.0],
        PolarizationMode::Direct,
        1.0,
        1.0,
    );
    assert!(bad_field.is_err());
}
