use cgt_core::curvature::*;
use cgt_core::expr::{parse, Expr};
use cgt_core::metric::LocalGeometry;
use cgt_core::{MetricField, PointTensor};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_point(rng: &mut ChaCha8Rng, n: usize, r: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-r..r)).collect()
}

fn random_phi(rng: &mut ChaCha8Rng, n: usize, degree: usize) -> Expr {
    Expr::polynomial(n, degree, &vec![0.0; n], &mut || rng.gen_range(-0.3..0.3))
}

#[test]
fn flat_metrics_have_no_curvature() {
    for sig in [vec![1, 1, 1, 1], vec![-1, 1, 1, 1], vec![1, 1, 1]] {
        let g = MetricField::flat(&sig);
        let p = vec![0.3; sig.len()];
        assert!(christoffel(&g, &p).unwrap().max_abs() < 1e-15);
        assert!(riemann(&g, &p).unwrap().max_abs() < 1e-15);
        assert!(schouten(&g, &p).unwrap().max_abs() < 1e-15);
        assert!(weyl_residual(&g, &p).unwrap().max_abs() < 1e-15);
    }
}

#[test]
fn sphere_chart_christoffel_vanishes_at_origin() {
    let g = MetricField::round_sphere(3, 1.0);
    assert!(christoffel(&g, &[0.0, 0.0, 0.0]).unwrap().max_abs() < 1e-15);
}

#[test]
fn connection_is_metric_compatible() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let metrics = [MetricField::conformally_flat(&[1, 1, 1, 1], random_phi(&mut rng, 4, 3)), MetricField::schwarzschild_patch()];
    for g in &metrics {
        for _ in 0..10 {
            let p = random_point(&mut rng, 4, 0.4);
            let geo = LocalGeometry::<f64>::at(g, &p, 1).unwrap();
            let gv = geo.g_values();
            for k in 0..4 {
                for i in 0..4 {
                    for j in 0..4 {
                        let mut r = geo.g[i][j].partial(&[k]);
                        for l in 0..4 {
                            r -= geo.gamma[l][k][i].value() * gv[l][j] + geo.gamma[l][k][j].value() * gv[i][l];
                        }
                        assert!(r.abs() < 1e-9);
                    }
                }
            }
        }
    }
}

#[test]
fn riemann_matches_finite_difference_christoffel_curl() {
    let g = MetricField::conformally_flat(&[1, 1, 1, 1], parse("x1", 4).unwrap());
    let p = [0.1, -0.2, 0.05, 0.3];
    let h = 1e-4;
    let gam = |q: &[f64]| christoffel(&g, q).unwrap();
    let dgam = |k: usize| {
        let (mut a, mut b) = (p.to_vec(), p.to_vec());
        a[k] += h;
        b[k] -= h;
        let (ga, gb) = (gam(&a), gam(&b));
        ga.zip(&gb, |x, y| (x - y) / (2.0 * h))
    };
    let d: Vec<PointTensor<f64>> = (0..4).map(dgam).collect();
    let g0 = gam(&p);
    let r = riemann(&g, &p).unwrap();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for dd in 0..4 {
                    let mut s = d[c].get(&[a, dd, b]) - d[dd].get(&[a, c, b]);
                    for e in 0..4 {
                        s += g0.get(&[a, c, e]) * g0.get(&[e, dd, b]) - g0.get(&[a, dd, e]) * g0.get(&[e, c, b]);
                    }
                    assert!((s - r.get(&[a, b, c, dd])).abs() < 1e-5);
                }
            }
        }
    }
}

#[test]
fn riemann_symmetries_and_bianchi() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let g = MetricField::conformally_flat(&[-1, 1, 1, 1], random_phi(&mut rng, 4, 3));
    let p = random_point(&mut rng, 4, 0.4);
    let r = riemann(&g, &p).unwrap();
    assert!(r.symmetry_defect() < 1e-12);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let s = r.get(&[a, b, c, d]) + r.get(&[a, c, d, b]) + r.get(&[a, d, b, c]);
                    assert!(s.abs() < 1e-9);
                }
            }
        }
    }
    let (ric, _) = ricci_scalar(&g, &p).unwrap();
    assert!(ric.symmetry_defect() < 1e-9);
}

#[test]
fn sphere_sectional_curvature_normalization() {
    let g = MetricField::round_sphere(4, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let p = random_point(&mut rng, 4, 0.4);
        let gv = g.values(&p).unwrap();
        let r = riemann(&g, &p).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let low: f64 = (0..4).map(|e| gv[a][e] * r.get(&[e, b, a, b])).sum();
                let expect = gv[a][a] * gv[b][b] - gv[a][b] * gv[a][b];
                assert!((low - expect).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn sphere_scalar_curvature_at_many_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for r in [1.0, 0.5, 3.0] {
        let g = MetricField::round_sphere(4, r);
        for _ in 0..100 {
            let p = random_point(&mut rng, 4, 0.4);
            let (_, rho) = ricci_scalar(&g, &p).unwrap();
            assert!((rho - 12.0 / (r * r)).abs() < 1e-8);
        }
    }
}

#[test]
fn schouten_is_compositional() {
    let g = MetricField::conformally_flat(&[1, 1, 1, 1], parse("x1", 4).unwrap());
    let p = [0.2f64, 0.1, -0.3, 0.0];
    let s = schouten(&g, &p).unwrap();
    let (ric, rho) = ricci_scalar(&g, &p).unwrap();
    let gv = g.values(&p).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            assert!((s.get(&[i, j]) - (ric.get(&[i, j]) - rho / 6.0 * gv[i][j])).abs() < 1e-12);
        }
    }
}

/// On a constant-curvature substrate `σ = c₀(n−2)/2 ω` holds with `c₀` the
/// sectional curvature `ρ_s/(n(n−1))`, not `ρ_s` itself.
#[test]
fn schouten_constant_is_sectional_curvature() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for (n, r) in [(4, 1.0), (4, 2.0), (5, 1.5), (3, 1.0)] {
        let g = MetricField::round_sphere(n, r);
        let nf = n as f64;
        for _ in 0..20 {
            let p = random_point(&mut rng, n, 0.4);
            let s = schouten(&g, &p).unwrap();
            let (_, rho) = ricci_scalar(&g, &p).unwrap();
            let gv = g.values(&p).unwrap();
            let c0 = rho / (nf * (nf - 1.0));
            assert!((c0 - 1.0 / (r * r)).abs() < 1e-8);
            let mut worst: f64 = 0.0;
            let mut worst_raw: f64 = 0.0;
            for i in 0..n {
                for j in 0..n {
                    worst = worst.max((s.get(&[i, j]) - c0 * (nf - 2.0) / 2.0 * gv[i][j]).abs());
                    worst_raw = worst_raw.max((s.get(&[i, j]) - rho * (nf - 2.0) / 2.0 * gv[i][j]).abs());
                }
            }
            assert!(worst < 1e-7);
            if n > 2 && n != 3 {
                assert!(worst_raw > 1e-2);
            }
        }
    }
}

#[test]
fn conformally_flat_metrics_have_no_weyl_tensor() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for k in 0..20 {
        let sig = if k % 2 == 0 { vec![1, 1, 1, 1] } else { vec![-1, 1, 1, 1] };
        let g = MetricField::conformally_flat(&sig, random_phi(&mut rng, 4, 3));
        for _ in 0..10 {
            let p = random_point(&mut rng, 4, 0.4);
            assert!(weyl_residual(&g, &p).unwrap().max_abs() < 1e-8);
        }
    }
}

#[test]
fn weyl_is_nonzero_off_conformal_flatness() {
    let g = MetricField::schwarzschild_patch();
    let w = weyl_residual(&g, &[0.0, 0.0, 0.0, 0.0]).unwrap();
    assert!(w.max_abs() > 1e-3);
    assert!(w.symmetry_defect() < 1e-10);
}

#[test]
fn curvature_depends_only_on_the_four_jet() {
    let n = 4;
    let p = [0.1, -0.1, 0.2, 0.05];
    let base = MetricField::schwarzschild_patch();
    let bump = (0..n).fold(Expr::Num(0.0), |acc, i| acc + (Expr::x(i) - Expr::Num(p[i])).powi(2)).powi(3);
    let mut rows = Vec::new();
    for i in 0..n {
        let mut r = Vec::new();
        for j in 0..n {
            let c = base.component(i, j).clone();
            r.push(if i == j { c + bump.clone() } else { c });
        }
        rows.push(r);
    }
    let pert = MetricField::from_rows(base.signature(), rows).unwrap();
    assert!(christoffel(&base, &p).unwrap().max_diff(&christoffel(&pert, &p).unwrap()) < 1e-9);
    assert!(riemann(&base, &p).unwrap().max_diff(&riemann(&pert, &p).unwrap()) < 1e-9);
    assert!(weyl_residual(&base, &p).unwrap().max_diff(&weyl_residual(&pert, &p).unwrap()) < 1e-9);
}

#[test]
fn sharp_inverts_lowering() {
    let g = MetricField::schwarzschild_patch();
    let gv = g.values(&[0.0, 0.1, 0.2, 0.3]).unwrap();
    let a = PointTensor::from_fn(4, 0, 1, |i| [0.3, -1.0, 2.0, 0.5][i[0]]);
    let v = sharp(&gv, &a).unwrap();
    for x in 0..4 {
        let s: f64 = (0..4).map(|j| gv[x][j] * v.get(&[j])).sum();
        assert!((s - a.get(&[x])).abs() < 1e-12);
    }
    assert!(trace_omega(&gv, &a).is_err());
}

fn spd(vals: &[f64]) -> Vec<Vec<f64>> {
    let n = 4;
    let mut m = vec![vec![0.0; n]; n];
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            m[i][j] = vals[k] * 0.2;
            m[j][i] = vals[k] * 0.2;
            k += 1;
        }
        m[i][i] += 1.0;
    }
    m
}

fn det(m: &[Vec<f64>]) -> f64 {
    cgt_core::jet::invert(m, 0.0).unwrap().1
}

proptest! {
    #[test]
    fn unimodular_has_unit_determinant(vals in proptest::collection::vec(-1.0f64..1.0, 10)) {
        let u = unimodular_matrix(&spd(&vals)).unwrap();
        prop_assert!((det(&u).abs() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn unimodular_ignores_conformal_factor(vals in proptest::collection::vec(-1.0f64..1.0, 10), phi in -2.0f64..2.0) {
        let m = spd(&vals);
        let scaled: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(|x| x * (2.0 * phi).exp()).collect()).collect();
        let (a, b) = (unimodular_matrix(&m).unwrap(), unimodular_matrix(&scaled).unwrap());
        for i in 0..4 {
            for j in 0..4 {
                prop_assert!((a[i][j] - b[i][j]).abs() < 1e-10);
            }
        }
    }
}
