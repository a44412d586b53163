//! Transformation laws under `ω ↦ e^{2α} ω`, each paired with a brute-force
//! recomputation on the rescaled metric.

use crate::curvature::{christoffel, riemann, riemann_tensor, schouten};
use crate::diffeo::DiffeoSpec;
use crate::error::{Error, Result};
use crate::expr::{eval_jet, Expr};
use crate::jet::{invert, Jet};
use crate::metric::{Jet3, JetMat, LocalGeometry, MetricField};
use crate::real::Real;
use crate::tensor::{PointTensor, Symmetry};

/// Tolerance on `ρ_s / (n(n−1)) = c₀` when a formula needs constant curvature.
pub const CURVATURE_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct ConformalData {
    pub metric: MetricField,
    pub alpha: Expr,
    /// Constant sectional curvature of the substrate.
    pub c0: f64,
}

/// Pointwise pieces shared by the formulas: metric data, `dα`, `∗dα` and its
/// covariant derivative.
struct Pieces<T> {
    n: usize,
    geo: LocalGeometry<T>,
    alpha: Jet<T>,
    da: Vec<T>,
    v: Vec<T>,
    // nabla_v[c][a] = (∇_c ∗dα)^a
    nabla_v: Vec<Vec<T>>,
    // hess[c][b] = ω(∇_c ∗dα, ∂_b)
    hess: Vec<Vec<T>>,
    da2: T,
}

impl<T: Real> Pieces<T> {
    fn at(cd: &ConformalData, p: &[T]) -> Result<Self> {
        let n = cd.metric.dim();
        let geo = LocalGeometry::at(&cd.metric, p, 2)?;
        let alpha = eval_jet(&cd.alpha, p, 2)?;
        let dj: Vec<Jet<T>> = (0..n).map(|i| alpha.deriv(i)).collect();
        let vj: Vec<Jet<T>> = (0..n)
            .map(|a| (1..n).fold(&geo.ginv[a][0] * &dj[0], |s, b| s + &geo.ginv[a][b] * &dj[b]))
            .collect();
        let gam = &geo.gamma;
        let v: Vec<T> = vj.iter().map(|j| j.value()).collect();
        let nabla_v: Vec<Vec<T>> = (0..n)
            .map(|c| {
                (0..n)
                    .map(|a| (0..n).fold(vj[a].deriv(c).value(), |s, e| s + gam[a][c][e].value() * v[e]))
                    .collect()
            })
            .collect();
        let g = geo.g_values();
        let hess = (0..n)
            .map(|c| (0..n).map(|b| (0..n).fold(T::zero(), |s, e| s + g[b][e] * nabla_v[c][e])).collect())
            .collect();
        let da: Vec<T> = dj.iter().map(|j| j.value()).collect();
        let da2 = (0..n).fold(T::zero(), |s, i| s + da[i] * v[i]);
        Ok(Pieces { n, geo, alpha, da, v, nabla_v, hess, da2 })
    }
}

fn delta<T: Real>(a: usize, b: usize) -> T {
    if a == b {
        T::one()
    } else {
        T::zero()
    }
}

impl ConformalData {
    pub fn new(metric: MetricField, alpha: Expr, c0: f64) -> Self {
        ConformalData { metric, alpha, c0 }
    }

    pub fn rescaled(&self) -> MetricField {
        self.metric.rescaled(&self.alpha)
    }
}

/// `e^{2α(p)} g(p)`.
pub fn rescale_metric<T: Real>(cd: &ConformalData, p: &[T]) -> Result<PointTensor<T>> {
    let a = eval_jet(&cd.alpha, p, 0)?.value();
    if T::lit(2.0) * a > T::lit(700.0) {
        return Err(Error::Precondition(format!("conformal factor overflows: 2*alpha = {}", T::lit(2.0) * a)));
    }
    let k = (T::lit(2.0) * a).exp();
    let g = cd.metric.values(p)?;
    Ok(PointTensor::from_fn(g.len(), 0, 2, |i| k * g[i[0]][i[1]]).with_symmetry(Symmetry::SymmetricPair))
}

/// `∇̃_X Y = ∇_X Y + dα(X)Y + dα(Y)X − ω(X,Y) ∗dα`.
pub fn transformed_connection<T: Real>(cd: &ConformalData, p: &[T]) -> Result<PointTensor<T>> {
    let pc = Pieces::at(cd, p)?;
    let g = pc.geo.g_values();
    Ok(PointTensor::from_fn(pc.n, 1, 2, |i| {
        let (a, b, c) = (i[0], i[1], i[2]);
        pc.geo.gamma[a][b][c].value() + pc.da[b] * delta(a, c) + pc.da[c] * delta(a, b) - g[b][c] * pc.v[a]
    })
    .with_symmetry(Symmetry::SymmetricPair))
}

pub fn direct_connection<T: Real>(cd: &ConformalData, p: &[T]) -> Result<PointTensor<T>> {
    christoffel(&cd.rescaled(), p)
}

/// `ρ̃(X,Y)Z` from `ρ`, `dα` and `∇ ∗dα`, with `(X, Y, Z) = (∂_c, ∂_d, ∂_b)`.
pub fn transformed_riemann<T: Real>(cd: &ConformalData, p: &[T]) -> Result<PointTensor<T>> {
    let pc = Pieces::at(cd, p)?;
    let r = riemann_tensor(&pc.geo.riemann());
    let g = pc.geo.g_values();
    let (da, v, nv, h, da2) = (&pc.da, &pc.v, &pc.nabla_v, &pc.hess, pc.da2);
    Ok(PointTensor::from_fn(pc.n, 1, 3, |i| {
        let (a, b, c, d) = (i[0], i[1], i[2], i[3]);
        r.get(i) + g[c][b] * nv[d][a] - g[d][b] * nv[c][a]
            + (h[c][b] + g[c][b] * da2) * delta(a, d)
            - (h[d][b] + g[d][b] * da2) * delta(a, c)
            + (da[c] * g[d][b] - da[d] * g[c][b]) * v[a]
            + (da[d] * delta(a, c) - da[c] * delta(a, d)) * da[b]
    })
    .with_symmetry(Symmetry::Riemann))
}

pub fn direct_riemann<T: Real>(cd: &ConformalData, p: &[T]) -> Result<PointTensor<T>> {
    riemann(&cd.rescaled(), p)
}

/// Symmetrized coordinate Hessian `μ(X,Y) = ½[X.dα(Y) + Y.dα(X)]`.
pub fn mu_tensor<T: Real>(alpha: &Expr, p: &[T]) -> Result<PointTensor<T>> {
    let a = eval_jet(alpha, p, 2)?;
    let n = p.len();
    let h = |i: usize, j: usize| a.partial(&[i, j]);
    Ok(PointTensor::from_fn(n, 0, 2, |k| (h(k[0], k[1]) + h(k[1], k[0])) * T::lit(0.5)).with_symmetry(Symmetry::SymmetricPair))
}

fn require_n3(n: usize) -> Result<()> {
    if n <= 2 {
        return Err(Error::Dimension(format!("the conformal Schouten law needs n >= 3, got {n}")));
    }
    Ok(())
}

/// `σ̃` in the unsymmetrized form, built from `ω(∇_X ∗dα, Y)`.
pub fn transformed_schouten_hessian_form<T: Real>(cd: &ConformalData, p: &[T]) -> Result<PointTensor<T>> {
    require_n3(cd.metric.dim())?;
    let pc = Pieces::at(cd, p)?;
    let sigma = pc.geo.schouten().0;
    let g = pc.geo.g_values();
    let k = T::lit(pc.n as f64 - 2.0);
    Ok(PointTensor::from_fn(pc.n, 0, 2, |i| {
        let (x, y) = (i[0], i[1]);
        sigma[x][y].value() + k * (pc.da[x] * pc.da[y] - pc.hess[x][y] - T::lit(0.5) * g[x][y] * pc.da2)
    }))
}

/// `σ̃` in the symmetrized form, built from `μ` and `dα(∇_X Y + ∇_Y X)`.
pub fn transformed_schouten<T: Real>(cd: &ConformalData, p: &[T]) -> Result<PointTensor<T>> {
    require_n3(cd.metric.dim())?;
    let pc = Pieces::at(cd, p)?;
    let sigma = pc.geo.schouten().0;
    let g = pc.geo.g_values();
    let k = T::lit(pc.n as f64 - 2.0);
    let half = T::lit(0.5);
    let mu = |x: usize, y: usize| (pc.alpha.partial(&[x, y]) + pc.alpha.partial(&[y, x])) * half;
    let dnab = |x: usize, y: usize| {
        (0..pc.n).fold(T::zero(), |s, c| s + pc.da[c] * (pc.geo.gamma[c][x][y].value() + pc.geo.gamma[c][y][x].value()))
    };
    Ok(PointTensor::from_fn(pc.n, 0, 2, |i| {
        let (x, y) = (i[0], i[1]);
        sigma[x][y].value()
            + k * (pc.da[x] * pc.da[y] - mu(x, y) + half * dnab(x, y) - half * g[x][y] * pc.da2)
    })
    .with_symmetry(Symmetry::SymmetricPair))
}

pub fn direct_schouten<T: Real>(cd: &ConformalData, p: &[T]) -> Result<PointTensor<T>> {
    schouten(&cd.rescaled(), p)
}

/// Sectional curvature `ρ_s / (n(n−1))` measured at `p`, checked against `c0`.
pub fn check_constant_curvature<T: Real>(geo: &LocalGeometry<T>, c0: f64) -> Result<()> {
    let n = geo.n as f64;
    let (_, _, rho) = geo.schouten();
    let k = rho.value().as_f64() / (n * (n - 1.0));
    if (k - c0).abs() > CURVATURE_TOL {
        return Err(Error::Precondition(format!(
            "substrate curvature rho_s/(n(n-1)) = {k:.9} differs from c0 = {c0}"
        )));
    }
    Ok(())
}

/// `μ` minus the right side of the reduced second-order system on a
/// constant-curvature substrate:
/// `½{[c₀(1 − e^{2α}) − dα(∗dα)]ω + dα(∇_X Y + ∇_Y X)} + dα(X)dα(Y)`.
pub fn constraint_residual<T: Real>(cd: &ConformalData, p: &[T]) -> Result<PointTensor<T>> {
    let pc = Pieces::at(cd, p)?;
    check_constant_curvature(&pc.geo, cd.c0)?;
    let g = pc.geo.g_values();
    let half = T::lit(0.5);
    let c0 = T::lit(cd.c0);
    let e2a = (T::lit(2.0) * pc.alpha.value()).exp();
    Ok(PointTensor::from_fn(pc.n, 0, 2, |i| {
        let (x, y) = (i[0], i[1]);
        let mu = (pc.alpha.partial(&[x, y]) + pc.alpha.partial(&[y, x])) * half;
        let dnab =
            (0..pc.n).fold(T::zero(), |s, c| s + pc.da[c] * (pc.geo.gamma[c][x][y].value() + pc.geo.gamma[c][y][x].value()));
        let rhs = half * ((c0 * (T::one() - e2a) - pc.da2) * g[x][y] + dnab) + pc.da[x] * pc.da[y];
        mu - rhs
    })
    .with_symmetry(Symmetry::SymmetricPair))
}

/// `Tr¹(∇̃_X) − Tr¹(∇_X) − n dα(X)`, with `∇̃` taken directly from the rescaled metric.
pub fn trace_identity_residual<T: Real>(cd: &ConformalData, p: &[T]) -> Result<PointTensor<T>> {
    let n = cd.metric.dim();
    let gt = direct_connection(cd, p)?;
    let g0 = christoffel(&cd.metric, p)?;
    let a = eval_jet(&cd.alpha, p, 1)?;
    Ok(PointTensor::from_fn(n, 0, 1, |i| {
        let c = i[0];
        let tr = (0..n).fold(T::zero(), |s, k| s + gt.get(&[k, c, k]) - g0.get(&[k, c, k]));
        tr - T::lit(n as f64) * a.partial(&[c])
    }))
}

/// Jets of `ω̂ = ω / |det ω|^{1/n}` at `p`.
pub fn unimodular_jets<T: Real>(g: &JetMat<T>) -> Result<JetMat<T>> {
    let n = g.len();
    let (_, det) = invert(g, 0.0).ok_or(Error::Singular { what: "metric" })?;
    if det.value().abs() <= T::lit(crate::metric::DET_TOL) {
        return Err(Error::Singular { what: "metric" });
    }
    let s = det.abs().powf(-T::one() / T::lit(n as f64));
    Ok(g.iter().map(|r| r.iter().map(|x| x * &s).collect()).collect())
}

pub fn unimodular_connection<T: Real>(metric: &MetricField, p: &[T]) -> Result<Jet3<T>> {
    let geo = LocalGeometry::from_metric_jets(unimodular_jets(&metric.jets(p, 1)?)?)?;
    Ok(geo.gamma)
}

/// Max-norm residuals of `f^*ω̂ = ω̂` and `^f∇̂ = ∇̂` at `p`. `ω̂` is a
/// density, so its pullback carries `|det J|^{-2/n}`; `^f∇̂` is the
/// Levi-Civita connection of the pulled-back form.
pub fn lie_form_residuals<T: Real>(metric: &MetricField, f: &DiffeoSpec, p: &[T]) -> Result<(T, T)> {
    let n = metric.dim();
    let fj = f.jets(p, 2)?;
    let jac: JetMat<T> = (0..n).map(|k| (0..n).map(|b| fj[k].deriv(b)).collect()).collect();
    let (_, det) = invert(&jac, 0.0).ok_or(Error::Singular { what: "Jacobian" })?;
    if det.value().abs() <= T::lit(crate::metric::DET_TOL) {
        return Err(Error::Singular { what: "Jacobian" });
    }
    let target: Vec<Jet<T>> = fj.iter().map(|j| j.truncate(1)).collect();
    let wq = unimodular_jets(&metric.jets_with(&target)?)?;
    let weight = det.abs().powf(-T::lit(2.0) / T::lit(n as f64));
    let pulled: JetMat<T> = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    let mut s = weight.zero_like();
                    for i in 0..n {
                        for j in 0..n {
                            s = s + &(&jac[i][a] * &wq[i][j]) * &jac[j][b];
                        }
                    }
                    &s * &weight
                })
                .collect()
        })
        .collect();
    let here = unimodular_jets(&metric.jets(p, 1)?)?;
    let mut r0 = T::zero();
    for a in 0..n {
        for b in 0..n {
            r0 = r0.max((pulled[a][b].value() - here[a][b].value()).abs());
        }
    }
    let gp = LocalGeometry::from_metric_jets(here)?.gamma;
    let gf = LocalGeometry::from_metric_jets(pulled)?.gamma;
    let mut r1 = T::zero();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                r1 = r1.max((gf[a][b][c].value() - gp[a][b][c].value()).abs());
            }
        }
    }
    Ok((r0, r1))
}
