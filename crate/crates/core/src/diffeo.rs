//! Closed-form local diffeomorphisms, mostly flat-space conformal maps.

use crate::error::{Error, Result};
use crate::expr::{eval_jet, Expr, Func, Sym};
use crate::jet::Jet;
use crate::real::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct DiffeoSpec {
    pub name: String,
    pub map: Vec<Expr>,
    /// `α` with `f^*η = e^{2α} η` for the flat metric `η`, when known.
    pub flat_factor: Option<Expr>,
}

fn inner(signature: &[i8], a: &[Expr], b: &[Expr]) -> Expr {
    signature
        .iter()
        .enumerate()
        .fold(Expr::Num(0.0), |acc, (i, &s)| acc + Expr::Num(s as f64) * a[i].clone() * b[i].clone())
}

fn coords(n: usize) -> Vec<Expr> {
    (0..n).map(Expr::x).collect()
}

fn nums(v: &[f64]) -> Vec<Expr> {
    v.iter().map(|&c| Expr::Num(c)).collect()
}

impl DiffeoSpec {
    pub fn new(name: &str, map: Vec<Expr>) -> Self {
        DiffeoSpec { name: name.into(), map, flat_factor: None }
    }

    pub fn dim(&self) -> usize {
        self.map.len()
    }

    pub fn identity(n: usize) -> Self {
        DiffeoSpec { name: "identity".into(), map: coords(n), flat_factor: Some(Expr::Num(0.0)) }
    }

    pub fn translation(b: &[f64]) -> Self {
        let map = b.iter().enumerate().map(|(i, &c)| Expr::x(i) + Expr::Num(c)).collect();
        DiffeoSpec { name: "translation".into(), map, flat_factor: Some(Expr::Num(0.0)) }
    }

    pub fn dilation(n: usize, k: f64) -> Self {
        let map = (0..n).map(|i| Expr::Num(k) * Expr::x(i)).collect();
        DiffeoSpec { name: "dilation".into(), map, flat_factor: Some(Expr::Num(k.abs().ln())) }
    }

    /// Rotation in the `(i, j)` plane, or a boost when the two signature
    /// entries differ.
    pub fn rotation(signature: &[i8], i: usize, j: usize, theta: f64) -> Self {
        let mut map = coords(signature.len());
        let (xi, xj) = (Expr::x(i), Expr::x(j));
        if signature[i] == signature[j] {
            let (s, c) = theta.sin_cos();
            map[i] = Expr::Num(c) * xi.clone() - Expr::Num(s) * xj.clone();
            map[j] = Expr::Num(s) * xi + Expr::Num(c) * xj;
        } else {
            let (s, c) = (theta.sinh(), theta.cosh());
            map[i] = Expr::Num(c) * xi.clone() + Expr::Num(s) * xj.clone();
            map[j] = Expr::Num(s) * xi + Expr::Num(c) * xj;
        }
        DiffeoSpec { name: "rotation".into(), map, flat_factor: Some(Expr::Num(0.0)) }
    }

    /// `x ↦ (x − ⟨x,x⟩b) / (1 − 2⟨b,x⟩ + ⟨b,b⟩⟨x,x⟩)` for the signature inner product.
    pub fn special_conformal(signature: &[i8], b: &[f64]) -> Self {
        let x = coords(signature.len());
        let bb = nums(b);
        let xx = inner(signature, &x, &x);
        let bx = inner(signature, &bb, &x);
        let b2: f64 = signature.iter().zip(b).map(|(&s, &c)| s as f64 * c * c).sum();
        let den = Expr::Num(1.0) - Expr::Num(2.0) * bx + Expr::Num(b2) * xx.clone();
        let map = (0..x.len()).map(|i| (x[i].clone() - xx.clone() * bb[i].clone()) / den.clone()).collect();
        let factor = -Expr::call(Func::Ln, Expr::call(Func::Abs, den));
        DiffeoSpec { name: "special_conformal".into(), map, flat_factor: Some(factor) }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &DiffeoSpec) -> DiffeoSpec {
        let sub = |e: &Expr| e.substitute(&|s| match s {
            Sym::X(i) => Some(inner.map[*i].clone()),
            _ => None,
        });
        let flat_factor = match (&self.flat_factor, &inner.flat_factor) {
            (Some(a), Some(b)) => Some(sub(a) + b.clone()),
            _ => None,
        };
        DiffeoSpec { name: format!("{}*{}", self.name, inner.name), map: self.map.iter().map(sub).collect(), flat_factor }
    }

    pub fn jets<T: Real>(&self, p: &[T], order: usize) -> Result<Vec<Jet<T>>> {
        if p.len() != self.dim() {
            return Err(Error::Shape(format!("point has {} coordinates, map dimension is {}", p.len(), self.dim())));
        }
        Ok(self.map.iter().map(|e| eval_jet(e, p, order)).collect::<std::result::Result<_, _>>()?)
    }
}

/// Jacobian `J^k_b = ∂_b f^k` from map jets.
pub fn jacobian<T: Real>(f: &[Jet<T>]) -> Vec<Vec<T>> {
    f.iter().map(|fk| fk.gradient()).collect()
}
