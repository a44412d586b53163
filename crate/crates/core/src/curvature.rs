//! Pointwise curvature quantities of a metric field.
//!
//! Conventions: `R^a_{bcd}` is the a-component of `ρ(∂_c, ∂_d)∂_b`, so the
//! round sphere has positive scalar curvature; Ricci contracts the output
//! slot with the first vector argument, `Ric_{bd} = R^a_{bad}`.

use crate::error::{Error, Result};
use crate::jet::invert;
use crate::metric::{Jet3, Jet4, JetMat, LocalGeometry, MetricField};
use crate::real::Real;
use crate::tensor::{PointTensor, Symmetry};

pub(crate) fn mat_tensor<T: Real>(m: &JetMat<T>, up: usize, down: usize, sym: Symmetry) -> PointTensor<T> {
    PointTensor::from_fn(m.len(), up, down, |i| m[i[0]][i[1]].value()).with_symmetry(sym)
}

pub(crate) fn gamma_tensor<T: Real>(g: &Jet3<T>) -> PointTensor<T> {
    PointTensor::from_fn(g.len(), 1, 2, |i| g[i[0]][i[1]][i[2]].value()).with_symmetry(Symmetry::SymmetricPair)
}

pub(crate) fn riemann_tensor<T: Real>(r: &Jet4<T>) -> PointTensor<T> {
    PointTensor::from_fn(r.len(), 1, 3, |i| r[i[0]][i[1]][i[2]][i[3]].value()).with_symmetry(Symmetry::Riemann)
}

pub fn christoffel<T: Real>(g: &MetricField, p: &[T]) -> Result<PointTensor<T>> {
    let geo = LocalGeometry::at(g, p, 1)?;
    Ok(gamma_tensor(&geo.gamma))
}

pub fn riemann<T: Real>(g: &MetricField, p: &[T]) -> Result<PointTensor<T>> {
    let geo = LocalGeometry::at(g, p, 2)?;
    Ok(riemann_tensor(&geo.riemann()))
}

pub fn ricci_scalar<T: Real>(g: &MetricField, p: &[T]) -> Result<(PointTensor<T>, T)> {
    let geo = LocalGeometry::at(g, p, 2)?;
    let ric = geo.ricci(&geo.riemann());
    let rho = geo.trace_omega(&ric).value();
    Ok((mat_tensor(&ric, 0, 2, Symmetry::SymmetricPair), rho))
}

fn require_n3(n: usize) -> Result<()> {
    if n <= 2 {
        return Err(Error::Dimension(format!("Schouten tensor needs n >= 3, got {n}")));
    }
    Ok(())
}

pub fn schouten<T: Real>(g: &MetricField, p: &[T]) -> Result<PointTensor<T>> {
    require_n3(g.dim())?;
    let geo = LocalGeometry::at(g, p, 2)?;
    Ok(mat_tensor(&geo.schouten().0, 0, 2, Symmetry::SymmetricPair))
}

/// Fully covariant `ω(U, ρ(X,Y)Z)` minus its Schouten part; the Weyl tensor,
/// indexed `(U, Z, X, Y)`.
pub fn weyl_residual<T: Real>(g: &MetricField, p: &[T]) -> Result<PointTensor<T>> {
    require_n3(g.dim())?;
    let geo = LocalGeometry::at(g, p, 2)?;
    let r = riemann_tensor(&geo.riemann());
    let sigma = mat_tensor(&geo.schouten().0, 0, 2, Symmetry::SymmetricPair);
    Ok(weyl_from_parts(&geo.g_values(), &r, &sigma))
}

pub fn weyl_from_parts<T: Real>(g: &[Vec<T>], r: &PointTensor<T>, sigma: &PointTensor<T>) -> PointTensor<T> {
    let n = g.len();
    let k = T::one() / T::lit(n as f64 - 2.0);
    let s = |i: usize, j: usize| sigma.get(&[i, j]);
    PointTensor::from_fn(n, 0, 4, |i| {
        let (a, b, c, d) = (i[0], i[1], i[2], i[3]);
        let low = (0..n).fold(T::zero(), |acc, e| acc + g[a][e] * r.get(&[e, b, c, d]));
        let kn = g[a][c] * s(b, d) - g[a][d] * s(b, c) + g[b][d] * s(a, c) - g[b][c] * s(a, d);
        low - k * kn
    })
    .with_symmetry(Symmetry::Riemann)
}

pub fn check_shape<T: Real>(t: &PointTensor<T>, up: usize, down: usize, n: usize) -> Result<()> {
    if t.valence() != (up, down) || t.dim() != n {
        return Err(Error::Shape(format!(
            "expected a ({up},{down}) tensor in dimension {n}, got {:?} in dimension {}",
            t.valence(),
            t.dim()
        )));
    }
    Ok(())
}

fn inverse<T: Real>(g: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    let (inv, det) = invert(g, 0.0).ok_or(Error::Singular { what: "metric" })?;
    if det.abs() <= T::lit(crate::metric::DET_TOL) {
        return Err(Error::Singular { what: "metric" });
    }
    Ok(inv)
}

/// `Tr_ω t = ω^{ij} t_{ij}`.
pub fn trace_omega<T: Real>(g: &[Vec<T>], t: &PointTensor<T>) -> Result<T> {
    let n = g.len();
    check_shape(t, 0, 2, n)?;
    let gi = inverse(g)?;
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            s = s + gi[i][j] * t.get(&[i, j]);
        }
    }
    Ok(s)
}

/// The vector `∗a` with `ω(X, ∗a) = a(X)`.
pub fn sharp<T: Real>(g: &[Vec<T>], a: &PointTensor<T>) -> Result<PointTensor<T>> {
    let n = g.len();
    check_shape(a, 0, 1, n)?;
    let gi = inverse(g)?;
    Ok(PointTensor::from_fn(n, 1, 0, |i| (0..n).fold(T::zero(), |s, j| s + gi[i[0]][j] * a.get(&[j]))))
}

pub fn unimodular_matrix<T: Real>(g: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    let n = g.len();
    let (_, det) = invert(g, 0.0).ok_or(Error::Singular { what: "metric" })?;
    if det.abs() <= T::lit(crate::metric::DET_TOL) {
        return Err(Error::Singular { what: "metric" });
    }
    let s = det.abs().powf(-T::one() / T::lit(n as f64));
    Ok(g.iter().map(|r| r.iter().map(|&x| x * s).collect()).collect())
}

/// `ω̂ = ω / |det ω|^{1/n}`.
pub fn unimodular<T: Real>(g: &MetricField, p: &[T]) -> Result<PointTensor<T>> {
    let m = unimodular_matrix(&g.values(p)?)?;
    Ok(PointTensor::from_matrix(&m, 0, 2).with_symmetry(Symmetry::SymmetricPair))
}
