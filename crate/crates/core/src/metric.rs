//! Metric fields and their local jet data (inverse, Christoffel symbols, curvature).

use crate::error::{Error, Result};
use crate::expr::{eval_with, parse, EvalError, Expr, Func, Sym};
use crate::jet::{invert, Jet};
use crate::real::Real;

pub type JetVec<T> = Vec<Jet<T>>;
pub type JetMat<T> = Vec<Vec<Jet<T>>>;
pub type Jet3<T> = Vec<Vec<Vec<Jet<T>>>>;
pub type Jet4<T> = Vec<Vec<Vec<Vec<Jet<T>>>>>;

pub const DET_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct MetricField {
    n: usize,
    signature: Vec<i8>,
    // upper triangle, row-major
    upper: Vec<Expr>,
    conformal_factor: Option<Expr>,
}

fn tri(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

fn squared_norm(n: usize, signature: Option<&[i8]>) -> Expr {
    (0..n).fold(Expr::Num(0.0), |acc, i| {
        let s = signature.map_or(1.0, |s| s[i] as f64);
        acc + Expr::Num(s) * Expr::x(i).powi(2)
    })
}

impl MetricField {
    pub fn from_upper(signature: &[i8], upper: Vec<Expr>) -> Result<Self> {
        let n = signature.len();
        if n < 2 {
            return Err(Error::Dimension(format!("metric dimension {n} < 2")));
        }
        if upper.len() != n * (n + 1) / 2 {
            return Err(Error::Shape(format!("expected {} upper-triangle components", n * (n + 1) / 2)));
        }
        if signature.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Shape("signature entries must be +1 or -1".into()));
        }
        Ok(MetricField { n, signature: signature.to_vec(), upper, conformal_factor: None })
    }

    /// Full component rows; the array must be symmetric expression-by-expression.
    pub fn from_rows(signature: &[i8], rows: Vec<Vec<Expr>>) -> Result<Self> {
        let n = signature.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Shape(format!("metric needs {n}x{n} components")));
        }
        let mut upper = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::Shape(format!("metric component ({},{}) is not symmetric", i + 1, j + 1)));
                }
                upper.push(rows[i][j].clone());
            }
        }
        Self::from_upper(signature, upper)
    }

    /// Parse rows of component strings.
    pub fn parse_rows(signature: &[i8], rows: &[Vec<String>]) -> Result<Self> {
        let n = signature.len();
        let parsed = rows
            .iter()
            .map(|r| r.iter().map(|s| parse(s, n)).collect::<std::result::Result<Vec<_>, _>>())
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::from_rows(signature, parsed)
    }

    pub fn flat(signature: &[i8]) -> Self {
        let n = signature.len();
        let mut upper = Vec::new();
        for i in 0..n {
            for j in i..n {
                upper.push(Expr::Num(if i == j { signature[i] as f64 } else { 0.0 }));
            }
        }
        MetricField { n, signature: signature.to_vec(), upper, conformal_factor: None }
    }

    /// `e^{2 phi}` times the flat metric of the given signature.
    pub fn conformally_flat(signature: &[i8], phi: Expr) -> Self {
        let n = signature.len();
        let factor = Expr::call(Func::Exp, Expr::Num(2.0) * phi.clone());
        let mut upper = Vec::new();
        for i in 0..n {
            for j in i..n {
                upper.push(if i == j { Expr::Num(signature[i] as f64) * factor.clone() } else { Expr::Num(0.0) });
            }
        }
        MetricField { n, signature: signature.to_vec(), upper, conformal_factor: Some(phi) }
    }

    /// Stereographic chart of the round sphere of the given radius.
    pub fn round_sphere(n: usize, radius: f64) -> Self {
        let r2 = radius * radius;
        let phi = Expr::call(Func::Ln, Expr::Num(2.0 * r2) / (Expr::Num(r2) + squared_norm(n, None)));
        Self::conformally_flat(&vec![1; n], phi)
    }

    /// Poincaré ball chart of hyperbolic space, valid for |x| < 1.
    pub fn hyperbolic_ball(n: usize) -> Self {
        let phi = Expr::call(Func::Ln, Expr::Num(2.0) / (Expr::Num(1.0) - squared_norm(n, None)));
        Self::conformally_flat(&vec![1; n], phi)
    }

    /// Exterior Schwarzschild metric (mass 1) on a patch around r = 3, theta = 1.2;
    /// not conformally flat.
    pub fn schwarzschild_patch() -> Self {
        let text = [
            "-(1 - 2/(3 + x2))",
            "0",
            "0",
            "0",
            "1/(1 - 2/(3 + x2))",
            "0",
            "0",
            "(3 + x2)^2",
            "0",
            "(3 + x2)^2*sin(1.2 + x3)^2",
        ];
        let upper = text.iter().map(|s| parse(s, 4).expect("built-in metric parses")).collect();
        MetricField { n: 4, signature: vec![-1, 1, 1, 1], upper, conformal_factor: None }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn signature(&self) -> &[i8] {
        &self.signature
    }

    pub fn conformal_factor(&self) -> Option<&Expr> {
        self.conformal_factor.as_ref()
    }

    pub fn component(&self, i: usize, j: usize) -> &Expr {
        &self.upper[tri(self.n, i, j)]
    }

    /// Multiply by `e^{2 alpha}`.
    pub fn rescaled(&self, alpha: &Expr) -> MetricField {
        let factor = Expr::call(Func::Exp, Expr::Num(2.0) * alpha.clone());
        let upper = self.upper.iter().map(|c| if c.is_zero() { c.clone() } else { factor.clone() * c.clone() }).collect();
        let conformal_factor = self.conformal_factor.clone().map(|phi| phi + alpha.clone());
        MetricField { n: self.n, signature: self.signature.clone(), upper, conformal_factor }
    }

    /// Component jets with coordinates supplied by `coords` (which may be
    /// the jets of a map, giving the pulled-back composition `g ∘ f`).
    pub fn jets_with<T: Real>(&self, coords: &[Jet<T>]) -> Result<JetMat<T>> {
        let n = self.n;
        let order = coords[0].order();
        let leaf = |s: &Sym| match s {
            Sym::X(i) if *i < n => Ok(coords[*i].clone()),
            other => Err(EvalError::Unbound(other.to_string())),
        };
        let mut upper = Vec::with_capacity(self.upper.len());
        for c in &self.upper {
            upper.push(eval_with(c, n, order, &leaf)?);
        }
        Ok((0..n).map(|i| (0..n).map(|j| upper[tri(n, i, j)].clone()).collect()).collect())
    }

    pub fn jets<T: Real>(&self, p: &[T], order: usize) -> Result<JetMat<T>> {
        self.check_point(p)?;
        let coords: Vec<Jet<T>> = (0..self.n).map(|i| Jet::variable(self.n, order, i, p[i])).collect();
        self.jets_with(&coords)
    }

    pub fn values<T: Real>(&self, p: &[T]) -> Result<Vec<Vec<T>>> {
        Ok(self.jets(p, 0)?.iter().map(|r| r.iter().map(|j| j.value()).collect()).collect())
    }

    pub fn check_point<T: Real>(&self, p: &[T]) -> Result<()> {
        if p.len() != self.n {
            return Err(Error::Shape(format!("point has {} coordinates, metric dimension is {}", p.len(), self.n)));
        }
        Ok(())
    }
}

/// Christoffel symbols `Γ^a_{bc}` from metric jets and their inverse.
pub fn christoffel_jets<T: Real>(g: &JetMat<T>, ginv: &JetMat<T>) -> Jet3<T> {
    let n = g.len();
    let dg: Vec<Vec<Vec<Jet<T>>>> =
        (0..n).map(|k| (0..n).map(|i| (0..n).map(|j| g[i][j].deriv(k)).collect()).collect()).collect();
    // lowered: Γ_{d b c} = ½(∂_b g_dc + ∂_c g_db − ∂_d g_bc)
    let low: Jet3<T> = (0..n)
        .map(|d| {
            (0..n)
                .map(|b| {
                    (0..n)
                        .map(|c| (&(&dg[b][d][c] + &dg[c][d][b]) - &dg[d][b][c]).scale(T::lit(0.5)))
                        .collect()
                })
                .collect()
        })
        .collect();
    (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    (0..n)
                        .map(|c| {
                            let mut s = &ginv[a][0] * &low[0][b][c];
                            for d in 1..n {
                                s = s + &ginv[a][d] * &low[d][b][c];
                            }
                            s
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// `R^a_{bcd} = [ρ(∂_c, ∂_d) ∂_b]^a` with `ρ(X,Y) = ∇_X∇_Y − ∇_Y∇_X − ∇_[X,Y]`.
pub fn riemann_jets<T: Real>(gamma: &Jet3<T>) -> Jet4<T> {
    let n = gamma.len();
    let mut out: Jet4<T> = Vec::with_capacity(n);
    for a in 0..n {
        let mut ra = Vec::with_capacity(n);
        for b in 0..n {
            let mut rb = Vec::with_capacity(n);
            for c in 0..n {
                let mut rc = Vec::with_capacity(n);
                for d in 0..n {
                    let mut s = &gamma[a][d][b].deriv(c) - &gamma[a][c][b].deriv(d);
                    for e in 0..n {
                        s = s + &gamma[a][c][e] * &gamma[e][d][b] - &gamma[a][d][e] * &gamma[e][c][b];
                    }
                    rc.push(s);
                }
                rb.push(rc);
            }
            ra.push(rb);
        }
        out.push(ra);
    }
    out
}

/// Local geometry of a metric at one point, carried as jets.
#[derive(Clone, Debug)]
pub struct LocalGeometry<T> {
    pub n: usize,
    pub g: JetMat<T>,
    pub ginv: JetMat<T>,
    pub det: Jet<T>,
    pub gamma: Jet3<T>,
}

impl<T: Real> LocalGeometry<T> {
    pub fn from_metric_jets(g: JetMat<T>) -> Result<Self> {
        let (ginv, det) = invert(&g, 0.0).ok_or(Error::Singular { what: "metric" })?;
        if det.value().abs() <= T::lit(DET_TOL) {
            return Err(Error::Singular { what: "metric" });
        }
        let gamma = if g[0][0].order() > 0 { christoffel_jets(&g, &ginv) } else { Vec::new() };
        Ok(LocalGeometry { n: g.len(), g, ginv, det, gamma })
    }

    /// Geometry with metric jets of `order` (Christoffel symbols one lower).
    pub fn at(metric: &MetricField, p: &[T], order: usize) -> Result<Self> {
        Self::from_metric_jets(metric.jets(p, order)?)
    }

    pub fn order(&self) -> usize {
        self.g[0][0].order()
    }

    pub fn g_values(&self) -> Vec<Vec<T>> {
        self.g.iter().map(|r| r.iter().map(|j| j.value()).collect()).collect()
    }

    pub fn ginv_values(&self) -> Vec<Vec<T>> {
        self.ginv.iter().map(|r| r.iter().map(|j| j.value()).collect()).collect()
    }

    pub fn riemann(&self) -> Jet4<T> {
        riemann_jets(&self.gamma)
    }

    /// Ricci tensor: the output slot of `ρ(X,Y)Z` contracted with the X slot.
    pub fn ricci(&self, r: &Jet4<T>) -> JetMat<T> {
        let n = self.n;
        (0..n)
            .map(|b| {
                (0..n)
                    .map(|d| {
                        let mut s = r[0][b][0][d].clone();
                        for a in 1..n {
                            s = s + &r[a][b][a][d];
                        }
                        s
                    })
                    .collect()
            })
            .collect()
    }

    pub fn trace_omega(&self, t: &JetMat<T>) -> Jet<T> {
        let n = self.n;
        let mut s = &self.ginv[0][0] * &t[0][0];
        for i in 0..n {
            for j in 0..n {
                if i + j > 0 {
                    s = s + &self.ginv[i][j] * &t[i][j];
                }
            }
        }
        s
    }

    /// Schouten tensor `Ric − ρ_s/(2(n−1)) ω` as jets, with the Ricci and scalar pieces.
    pub fn schouten(&self) -> (JetMat<T>, JetMat<T>, Jet<T>) {
        let r = self.riemann();
        let ric = self.ricci(&r);
        let rho = self.trace_omega(&ric);
        let k = T::lit(1.0 / (2.0 * (self.n as f64 - 1.0)));
        let sigma = (0..self.n)
            .map(|i| (0..self.n).map(|j| &ric[i][j] - &(&rho * &self.g[i][j]).scale(k)).collect())
            .collect();
        (sigma, ric, rho)
    }

    /// `‖g‖·‖g⁻¹‖` in the max-row-sum norm.
    pub fn condition(&self) -> T {
        let norm = |m: &Vec<Vec<T>>| {
            m.iter().map(|r| r.iter().fold(T::zero(), |s, &x| s + x.abs())).fold(T::zero(), |a, b| a.max(b))
        };
        norm(&self.g_values()) * norm(&self.ginv_values())
    }
}

pub fn values2<T: Real>(m: &JetMat<T>) -> Vec<Vec<T>> {
    m.iter().map(|r| r.iter().map(|j| j.value()).collect()).collect()
}
