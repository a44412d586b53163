use cgt_core::conformal::*;
use cgt_core::curvature::christoffel;
use cgt_core::diffeo::DiffeoSpec;
use cgt_core::expr::{parse, Expr};
use cgt_core::{Error, MetricField};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-0.4..0.4)).collect()
}

fn random_poly(rng: &mut ChaCha8Rng, n: usize, degree: usize) -> Expr {
    Expr::polynomial(n, degree, &vec![0.0; n], &mut || rng.gen_range(-0.5..0.5))
}

fn flat4() -> MetricField {
    MetricField::flat(&[1, 1, 1, 1])
}

fn cd(g: MetricField, alpha: &str) -> ConformalData {
    let n = g.dim();
    ConformalData::new(g, parse(alpha, n).unwrap(), 0.0)
}

#[test]
fn rescale_metric_examples() {
    let p = [1.0f64, 0.0, 0.0, 0.0];
    assert_eq!(rescale_metric(&cd(flat4(), "0"), &p).unwrap().get(&[2, 2]), 1.0);
    assert!((rescale_metric(&cd(flat4(), "ln(2)"), &p).unwrap().get(&[1, 1]) - 4.0).abs() < 1e-14);
    let r = rescale_metric(&cd(flat4(), "x1"), &p).unwrap();
    assert!((r.get(&[0, 0]) - 1f64.exp().powi(2)).abs() < 1e-12);
    assert!(matches!(rescale_metric(&cd(flat4(), "400"), &p), Err(Error::Precondition(_))));
}

#[test]
fn connection_for_linear_factor_by_hand() {
    let t = transformed_connection(&cd(flat4(), "x1"), &[0.0; 4]).unwrap();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                let expect = match (a, b, c) {
                    (0, 0, 0) => 1.0,
                    (a, b, 0) | (a, 0, b) if a == b => 1.0,
                    (0, b, c) if b == c => -1.0,
                    _ => 0.0,
                };
                assert_eq!(t.get(&[a, b, c]), expect, "{a}{b}{c}");
            }
        }
    }
}

#[test]
fn constant_factor_leaves_connection_and_curvature() {
    let g = MetricField::round_sphere(4, 1.0);
    let c = cd(g.clone(), "0.7");
    let p = [0.1, 0.2, -0.1, 0.3];
    assert!(transformed_connection(&c, &p).unwrap().max_diff(&christoffel(&g, &p).unwrap()) < 1e-15);
    assert!(transformed_riemann(&cd(flat4(), "0.7"), &p).unwrap().max_abs() < 1e-15);
    let s0 = cgt_core::curvature::schouten(&g, &p).unwrap();
    assert!(transformed_schouten(&c, &p).unwrap().max_diff(&s0) < 1e-14);
}

#[test]
fn quadratic_factor_riemann_at_origin() {
    let c = cd(flat4(), "x1^2/2");
    let p = [0.0f64; 4];
    assert!(transformed_riemann(&c, &p).unwrap().max_diff(&direct_riemann(&c, &p).unwrap()) < 1e-8);
}

#[test]
fn linear_factor_schouten_on_flat_space() {
    let a = [0.3, -0.2, 0.5, 0.1];
    let alpha = format!("{}*x1 + {}*x2 + {}*x3 + {}*x4", a[0], a[1], a[2], a[3]);
    let c = cd(flat4(), &alpha);
    let p = [0.1, 0.1, -0.2, 0.3];
    let t = transformed_schouten(&c, &p).unwrap();
    let d = direct_schouten(&c, &p).unwrap();
    let a2: f64 = a.iter().map(|x| x * x).sum();
    for i in 0..4 {
        for j in 0..4 {
            let expect = 2.0 * (a[i] * a[j] - if i == j { 0.5 * a2 } else { 0.0 });
            assert!((t.get(&[i, j]) - expect).abs() < 1e-12);
            assert!((d.get(&[i, j]) - expect).abs() < 1e-9);
        }
    }
}

/// Formula versus brute force over flat and sphere substrates.
#[test]
fn transformation_laws_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let substrates = [flat4(), MetricField::round_sphere(4, 1.0), MetricField::flat(&[-1, 1, 1, 1])];
    let mut worst = [0.0f64; 5];
    for k in 0..100 {
        let g = substrates[k % substrates.len()].clone();
        let c = ConformalData::new(g, random_poly(&mut rng, 4, 3), 0.0);
        let p = random_point(&mut rng, 4);
        worst[0] = worst[0].max(transformed_connection(&c, &p).unwrap().max_diff(&direct_connection(&c, &p).unwrap()));
        worst[1] = worst[1].max(transformed_riemann(&c, &p).unwrap().max_diff(&direct_riemann(&c, &p).unwrap()));
        let s10 = transformed_schouten(&c, &p).unwrap();
        worst[2] = worst[2].max(s10.max_diff(&direct_schouten(&c, &p).unwrap()));
        worst[3] = worst[3].max(s10.max_diff(&transformed_schouten_hessian_form(&c, &p).unwrap()));
        worst[4] = worst[4].max(trace_identity_residual(&c, &p).unwrap().max_abs());
    }
    assert!(worst[0] < 1e-8, "{worst:?}");
    assert!(worst[1] < 1e-7, "{worst:?}");
    assert!(worst[2] < 1e-7, "{worst:?}");
    assert!(worst[3] < 1e-10, "{worst:?}");
    assert!(worst[4] < 1e-9, "{worst:?}");
}

#[test]
fn mu_tensor_examples() {
    let p2 = [0.3, -0.7];
    assert!(mu_tensor(&parse("1 + 2*x1 - x2", 2).unwrap(), &p2).unwrap().max_abs() < 1e-15);
    let m = mu_tensor(&parse("x1*x2", 2).unwrap(), &p2).unwrap();
    assert_eq!((m.get(&[0, 0]), m.get(&[0, 1]), m.get(&[1, 0]), m.get(&[1, 1])), (0.0, 1.0, 1.0, 0.0));
    let m = mu_tensor(&parse("exp(x1)", 3).unwrap(), &[0.0; 3]).unwrap();
    assert_eq!(m.get(&[0, 0]), 1.0);
    assert_eq!(m.max_abs(), 1.0);
}

#[test]
fn trace_identity_for_linear_factor() {
    let r = trace_identity_residual(&cd(flat4(), "x1"), &[0.2, 0.0, 0.1, 0.0]).unwrap();
    assert!(r.max_abs() < 1e-12);
}

#[test]
fn constraint_residual_examples() {
    let p = [0.0f64; 4];
    assert!(constraint_residual(&cd(flat4(), "0.3"), &[0.2, 0.1, 0.0, -0.3]).unwrap().max_abs() < 1e-15);
    // an affine factor is not the factor of a flat conformal map: the
    // residual is −(dα⊗dα − ½|dα|²ω)
    let r = constraint_residual(&cd(flat4(), "0.3 + x1 - 2*x3"), &[0.2, 0.1, 0.0, -0.3]).unwrap();
    let a = [1.0f64, 0.0, -2.0, 0.0];
    for i in 0..4 {
        for j in 0..4 {
            let expect = -(a[i] * a[j] - if i == j { 2.5 } else { 0.0 });
            assert!((r.get(&[i, j]) - expect).abs() < 1e-12);
        }
    }
    let r = constraint_residual(&cd(flat4(), "x1^2"), &p).unwrap();
    assert!((r.get(&[0, 0]) - 2.0).abs() < 1e-14);
    assert!(r.get(&[1, 1]).abs() < 1e-14);
    let sphere = ConformalData::new(MetricField::round_sphere(4, 1.0), Expr::Num(0.0), 1.0);
    assert!(constraint_residual(&sphere, &[0.1, 0.2, 0.0, -0.1]).unwrap().max_abs() < 1e-10);
    let wrong = ConformalData::new(MetricField::round_sphere(4, 1.0), Expr::Num(0.0), 12.0);
    assert!(matches!(constraint_residual(&wrong, &p), Err(Error::Precondition(_))));
}

/// The conformal factors of genuine flat conformal maps solve the reduced
/// system only with `+dα(X)dα(Y)` on the right.
#[test]
fn constraint_holds_for_inversion_factor() {
    let c = cd(flat4(), "-ln(x1^2 + x2^2 + x3^2 + x4^2)");
    let p = [0.7, -0.3, 0.5, 0.2];
    assert!(constraint_residual(&c, &p).unwrap().max_abs() < 1e-12);
    let sc = DiffeoSpec::special_conformal(&[1, 1, 1, 1], &[0.2, -0.1, 0.3, 0.05]);
    let c = ConformalData::new(flat4(), sc.flat_factor.clone().unwrap(), 0.0);
    for p in [[0.1, 0.2, -0.3, 0.0], [-0.3, 0.1, 0.2, 0.35]] {
        assert!(constraint_residual(&c, &p).unwrap().max_abs() < 1e-12);
    }
}

#[test]
fn schouten_law_rejects_surfaces() {
    let c = cd(MetricField::flat(&[1, 1]), "x1");
    assert!(matches!(transformed_schouten(&c, &[0.0, 0.0]), Err(Error::Dimension(_))));
}

#[test]
fn lie_form_invariance_under_flat_conformal_maps() {
    let sig = [1, 1, 1, 1];
    let maps = [
        DiffeoSpec::translation(&[0.1, -0.2, 0.3, 0.0]),
        DiffeoSpec::dilation(4, 1.7),
        DiffeoSpec::rotation(&sig, 0, 2, 0.6),
        DiffeoSpec::special_conformal(&sig, &[0.2, -0.1, 0.3, 0.05]),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let g = flat4();
    for f in &maps {
        for _ in 0..10 {
            let p = random_point(&mut rng, 4);
            let (a, b) = lie_form_residuals(&g, f, &p).unwrap();
            assert!(a < 1e-10 && b < 1e-7, "{}: {a} {b}", f.name);
        }
    }
    let (a, b) = lie_form_residuals(&g, &maps[0], &[0.0; 4]).unwrap();
    assert!(a < 1e-12 && b < 1e-12);
    // Minkowski boost and special conformal map, and a conformally flat substrate.
    let mink = MetricField::flat(&[-1, 1, 1, 1]);
    let boost = DiffeoSpec::rotation(&[-1, 1, 1, 1], 0, 1, 0.4);
    let scm = DiffeoSpec::special_conformal(&[-1, 1, 1, 1], &[0.1, 0.2, 0.0, -0.1]);
    let sphere = MetricField::round_sphere(4, 1.0);
    for _ in 0..10 {
        let p = random_point(&mut rng, 4);
        for (g, f) in [(&mink, &boost), (&mink, &scm), (&sphere, &maps[3]), (&sphere, &maps[1])] {
            let (a, b) = lie_form_residuals(g, f, &p).unwrap();
            assert!(a < 1e-10 && b < 1e-7, "{}: {a} {b}", f.name);
        }
    }
}

#[test]
fn lie_form_detects_non_conformal_maps() {
    let shear = DiffeoSpec::new("shear", vec![parse("x1 + 0.3*x2", 4).unwrap(), Expr::x(1), Expr::x(2), Expr::x(3)]);
    let (a, _) = lie_form_residuals(&flat4(), &shear, &[0.1; 4]).unwrap();
    assert!(a > 1e-2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rescalings_compose(c1 in proptest::collection::vec(-0.5f64..0.5, 5), c2 in proptest::collection::vec(-0.5f64..0.5, 5),
                          p in proptest::collection::vec(-0.4f64..0.4, 4)) {
        let lin = |c: &[f64]| (0..4).fold(Expr::Num(c[4]), |acc, i| acc + Expr::Num(c[i]) * Expr::x(i).powi(2));
        let (a1, a2) = (lin(&c1), lin(&c2));
        let g = MetricField::round_sphere(4, 1.0);
        let two_step = ConformalData::new(g.rescaled(&a1), a2.clone(), 0.0);
        let one_step = ConformalData::new(g.clone(), a1.clone() + a2.clone(), 0.0);
        let m2 = rescale_metric(&two_step, &p).unwrap();
        let m1 = rescale_metric(&one_step, &p).unwrap();
        prop_assert!(m1.max_diff(&m2) < 1e-12);
        let t2 = transformed_connection(&two_step, &p).unwrap();
        let t1 = transformed_connection(&one_step, &p).unwrap();
        prop_assert!(t1.max_diff(&t2) < 1e-8);
    }
}
