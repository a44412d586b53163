use cgt_core::expr::{differentiate, parse, Expr, Sym};
use cgt_core::killing::*;
use cgt_core::metric::LocalGeometry;
use cgt_core::{eval, MetricField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn jacobian(xi: &[Expr]) -> Vec<Vec<Expr>> {
    let n = xi.len();
    xi.iter().map(|e| (0..n).map(|b| differentiate(e, Sym::X(b))).collect()).collect()
}

fn field(texts: &[&str]) -> Vec<Expr> {
    texts.iter().map(|t| parse(t, texts.len()).unwrap()).collect()
}

fn points(seed: u64, n: usize, count: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (0..n).map(|_| rng.gen_range(-0.4..0.4)).collect()).collect()
}

/// `ξ = 2(b·x)x − |x|²b` for the signature inner product.
fn special_conformal_generator(sig: &[i8], b: &[f64]) -> Vec<Expr> {
    let n = sig.len();
    let dot = |u: &dyn Fn(usize) -> Expr, v: &dyn Fn(usize) -> Expr| {
        (0..n).fold(Expr::Num(0.0), |s, i| s + Expr::Num(sig[i] as f64) * u(i) * v(i))
    };
    let bx = dot(&|i| Expr::Num(b[i]), &|i| Expr::x(i));
    let xx = dot(&|i| Expr::x(i), &|i| Expr::x(i));
    (0..n).map(|i| Expr::Num(2.0) * bx.clone() * Expr::x(i) - xx.clone() * Expr::Num(b[i])).collect()
}

#[test]
fn trace_operator_examples() {
    let g = MetricField::flat(&[1, 1, 1, 1]);
    let p = [0.3f64, -0.1, 0.2, 0.4];
    let translation = field(&["1", "0", "-2", "0.5"]);
    assert!(killing_k(&g, &translation, &jacobian(&translation), &p).unwrap().abs() < 1e-15);
    let dilation = field(&["x1", "x2", "x3", "x4"]);
    assert!((killing_k(&g, &dilation, &jacobian(&dilation), &p).unwrap() - 1.0).abs() < 1e-15);
    let rotation = field(&["-x2", "x1", "0", "0"]);
    assert!(killing_k(&g, &rotation, &jacobian(&rotation), &p).unwrap().abs() < 1e-15);
}

/// `K₀` of a holonomic lift is `(1/n) div_g ξ = (1/n√g) ∂_k(√g ξ^k)`,
/// checked by central differences.
#[test]
fn trace_operator_is_the_metric_divergence() {
    let g = MetricField::round_sphere(3, 1.5);
    let xi = field(&["x2*x3 + 0.3", "sin(x1) - x3^2", "x1*x2*x3"]);
    let p = [0.1, 0.25, -0.2];
    let sqrt_det = |q: &[f64]| LocalGeometry::<f64>::at(&g, q, 0).unwrap().det.value().abs().sqrt();
    let h = 1e-5;
    let mut div = 0.0;
    for k in 0..3 {
        let (mut u, mut d) = (p.to_vec(), p.to_vec());
        u[k] += h;
        d[k] -= h;
        div += (sqrt_det(&u) * eval(&xi[k], &u).unwrap() - sqrt_det(&d) * eval(&xi[k], &d).unwrap()) / (2.0 * h);
    }
    div /= sqrt_det(&p);
    let eta = killing_k(&g, &xi, &jacobian(&xi), &p).unwrap();
    assert!((eta - div / 3.0).abs() < 1e-8);
}

/// Conformal Killing fields satisfy the full equation `L_ξ ω = 2η ω` with the
/// `η` returned by the trace operator, also on a conformally flat metric.
#[test]
fn special_conformal_generator_solves_the_full_system() {
    let sig = [-1i8, 1, 1, 1];
    let xi = special_conformal_generator(&sig, &[0.3, -0.2, 0.5, 0.1]);
    let dxi = jacobian(&xi);
    let phi = parse("0.2*x1*x2 - 0.1*x3^2 + 0.05*x4", 4).unwrap();
    for g in [MetricField::flat(&sig), MetricField::conformally_flat(&sig, phi)] {
        for p in points(41, 4, 10) {
            let eta = killing_k(&g, &xi, &dxi, &p).unwrap();
            let gj = g.jets(&p, 1).unwrap();
            let xv: Vec<f64> = xi.iter().map(|e| eval(e, &p).unwrap()).collect();
            let dv: Vec<Vec<f64>> = dxi.iter().map(|r| r.iter().map(|e| eval(e, &p).unwrap()).collect()).collect();
            for a in 0..4 {
                for b in 0..4 {
                    let mut lie = 0.0;
                    for c in 0..4 {
                        lie += xv[c] * gj[a][b].partial(&[c]) + gj[c][b].value() * dv[c][a] + gj[a][c].value() * dv[c][b];
                    }
                    assert!((lie - 2.0 * eta * gj[a][b].value()).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn flat_conformal_algebra_dimensions() {
    for (sig, want) in [(vec![1i8, 1, 1, 1], 15), (vec![1, 1, 1], 10), (vec![-1, 1, 1, 1], 15)] {
        let n = sig.len();
        assert_eq!(want, (n + 1) * (n + 2) / 2);
        let count = killing_dimension(&MetricField::flat(&sig), &points(42, n, 40), 2).unwrap();
        assert_eq!(count.dimension, want);
        assert!(count.gap_ratio > 1e6);
    }
    let cubic = killing_dimension(&MetricField::flat(&[1, 1, 1, 1]), &points(43, 4, 60), 3).unwrap();
    assert_eq!(cubic.dimension, 15);
}

#[test]
fn conformal_rescaling_keeps_the_count() {
    let phi = parse("0.3*x1 - 0.2*x2*x3 + 0.1*x4^2", 4).unwrap();
    let g = MetricField::conformally_flat(&[1, 1, 1, 1], phi);
    assert_eq!(killing_dimension(&g, &points(44, 4, 40), 2).unwrap().dimension, 15);
}

#[test]
fn schwarzschild_patch_has_fewer_polynomial_fields() {
    let g = MetricField::schwarzschild_patch();
    match killing_dimension(&g, &points(45, 4, 40), 2) {
        Ok(c) => assert!(c.dimension < 15),
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn too_few_points_is_reported() {
    assert!(killing_dimension(&MetricField::flat(&[1, 1, 1]), &points(46, 3, 2), 2).is_err());
}
