//! Gauge objects built from fields of second-order groupoid data: the
//! extended first-order system `(α, β, μ)`, the comparison tensors between a
//! section and the jets of its own map, the potentials `𝒜̂`, `ℬ̂` and their
//! field strengths.
//!
//! Everything is evaluated pointwise on jets, so derivatives of derived
//! quantities (needed by `ℬ̂` and the field strengths) are exact.
//!
//! Index conventions: `τ₁[b][e][d] = τ^b_{e,d}` and `τ₂[b][y][z][x] =
//! τ^b_{yz,x}`, the last slot being the form slot; `ℬ̂` is stored as
//! `[j][i] = ℬ̂_{j,i}`.

use crate::conformal::check_constant_curvature;
use crate::diffeo::DiffeoSpec;
use crate::error::{Error, Result};
use crate::expr::{differentiate, eval_jet, Expr, Sym};
use crate::jet::{invert, mat_mul, Jet};
use crate::metric::{Jet3, Jet4, JetMat, LocalGeometry, MetricField, DET_TOL};
use crate::real::Real;
use crate::tensor::{PointTensor, Symmetry};

/// A field `(α, β)` of the extended first-order system; `μ` follows from it.
#[derive(Clone, Debug)]
pub struct Jet1Field {
    pub alpha: Expr,
    pub beta: Vec<Expr>,
}

impl Jet1Field {
    pub fn new(alpha: Expr, beta: Vec<Expr>) -> Self {
        Jet1Field { alpha, beta }
    }

    pub fn zero(n: usize) -> Self {
        Jet1Field { alpha: Expr::Num(0.0), beta: vec![Expr::Num(0.0); n] }
    }

    /// `(α, dα)`.
    pub fn exact(alpha: Expr, n: usize) -> Self {
        let beta = (0..n).map(|i| differentiate(&alpha, Sym::X(i))).collect();
        Jet1Field { alpha, beta }
    }

    pub fn dim(&self) -> usize {
        self.beta.len()
    }
}

/// Groupoid section `(f, f₁, f₂)` given as expression fields. `f₂[a][b][c]`
/// is symmetric in `b, c`.
#[derive(Clone, Debug)]
pub struct DiffeoSection {
    pub f: Vec<Expr>,
    pub f1: Vec<Vec<Expr>>,
    pub f2: Vec<Vec<Vec<Expr>>>,
    pub holonomic: bool,
}

/// Which third-order data completes `f₂` when `τ₂` is formed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LiftPad {
    /// Totally symmetrized `∂f₂`; equals `j₃f` on holonomic sections.
    Symmetrized,
    Zero,
}

fn check_square(n: usize, m: &[Vec<Expr>], what: &str) -> Result<()> {
    if m.len() != n || m.iter().any(|r| r.len() != n) {
        return Err(Error::Shape(format!("{what} must be {n}x{n}")));
    }
    Ok(())
}

impl DiffeoSection {
    /// Builds a section; `f2[a][b][c]` is read for `b <= c` and mirrored.
    pub fn new(f: Vec<Expr>, f1: Vec<Vec<Expr>>, f2: Vec<Vec<Vec<Expr>>>) -> Result<Self> {
        let n = f.len();
        if n == 0 {
            return Err(Error::Dimension("empty section".into()));
        }
        check_square(n, &f1, "f1")?;
        if f2.len() != n {
            return Err(Error::Shape(format!("f2 must have {n} slices")));
        }
        for s in &f2 {
            check_square(n, s, "f2 slice")?;
        }
        Ok(DiffeoSection { f, f1, f2: symmetrize(f2), holonomic: false })
    }

    pub fn identity(n: usize) -> Self {
        Self::holonomic(&DiffeoSpec::identity(n))
    }

    /// `(f, j₁f, j₂f)` by symbolic differentiation.
    pub fn holonomic(map: &DiffeoSpec) -> Self {
        let n = map.dim();
        let f = map.map.clone();
        let f1: Vec<Vec<Expr>> = f.iter().map(|e| (0..n).map(|b| differentiate(e, Sym::X(b))).collect()).collect();
        let f2 = f1
            .iter()
            .map(|row| (0..n).map(|b| (0..n).map(|c| differentiate(&row[b], Sym::X(c))).collect()).collect())
            .collect();
        DiffeoSection { f, f1, f2, holonomic: true }
    }

    pub fn dim(&self) -> usize {
        self.f.len()
    }

    /// Adds `eps·m` to the 1-jet slot and `eps·h` to the 2-jet slot.
    pub fn perturbed(&self, eps: f64, m: &[Vec<Expr>], h: &[Vec<Vec<Expr>>]) -> Result<Self> {
        let n = self.dim();
        check_square(n, m, "perturbation of f1")?;
        if h.len() != n {
            return Err(Error::Shape(format!("perturbation of f2 must have {n} slices")));
        }
        let e = Expr::Num(eps);
        let f1 = (0..n)
            .map(|a| (0..n).map(|b| self.f1[a][b].clone() + e.clone() * m[a][b].clone()).collect())
            .collect();
        let f2 = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| (0..n).map(|c| self.f2[a][b][c].clone() + e.clone() * h[a][b][c].clone()).collect())
                    .collect()
            })
            .collect();
        Ok(DiffeoSection { f: self.f.clone(), f1, f2: symmetrize(f2), holonomic: self.holonomic && eps == 0.0 })
    }

    /// Groupoid composite `j(left) ∘ self ∘ j(right)`.
    pub fn compose(&self, left: &DiffeoSpec, right: &DiffeoSpec) -> Self {
        let n = self.dim();
        let at = |e: &Expr, args: &[Expr]| {
            e.substitute(&|s| match s {
                Sym::X(i) => Some(args[*i].clone()),
                _ => None,
            })
        };
        let k = &right.map;
        let dk: Vec<Vec<Expr>> = k.iter().map(|e| (0..n).map(|b| differentiate(e, Sym::X(b))).collect()).collect();
        let f: Vec<Expr> = self.f.iter().map(|e| at(e, k)).collect();
        let fk: Vec<Vec<Expr>> = self.f1.iter().map(|r| r.iter().map(|e| at(e, k)).collect()).collect();
        let mut f1 = vec![vec![Expr::Num(0.0); n]; n];
        let mut f2 = vec![vec![vec![Expr::Num(0.0); n]; n]; n];
        for p in 0..n {
            for b in 0..n {
                for q in 0..n {
                    f1[p][b] = f1[p][b].clone() + fk[p][q].clone() * dk[q][b].clone();
                }
                for c in b..n {
                    let mut s = Expr::Num(0.0);
                    for q in 0..n {
                        s = s + fk[p][q].clone() * differentiate(&dk[q][b], Sym::X(c));
                        for r in 0..n {
                            s = s + at(&self.f2[p][q][r], k) * dk[q][b].clone() * dk[r][c].clone();
                        }
                    }
                    f2[p][b][c] = s;
                }
            }
        }
        let h = &left.map;
        let dh: Vec<Vec<Expr>> = h.iter().map(|e| (0..n).map(|b| differentiate(e, Sym::X(b))).collect()).collect();
        let mut g1 = vec![vec![Expr::Num(0.0); n]; n];
        let mut g2 = vec![vec![vec![Expr::Num(0.0); n]; n]; n];
        for a in 0..n {
            let dha: Vec<Expr> = (0..n).map(|p| at(&dh[a][p], &f)).collect();
            for b in 0..n {
                for p in 0..n {
                    g1[a][b] = g1[a][b].clone() + dha[p].clone() * f1[p][b].clone();
                }
                for c in b..n {
                    let mut s = Expr::Num(0.0);
                    for p in 0..n {
                        s = s + dha[p].clone() * f2[p][b][c].clone();
                        for r in 0..n {
                            let hpr = differentiate(&dh[a][p], Sym::X(r));
                            if !hpr.is_zero() {
                                s = s + at(&hpr, &f) * f1[p][b].clone() * f1[r][c].clone();
                            }
                        }
                    }
                    g2[a][b][c] = s;
                }
            }
        }
        let g = h.iter().map(|e| at(e, &f)).collect();
        DiffeoSection { f: g, f1: g1, f2: symmetrize(g2), holonomic: self.holonomic }
    }
}

fn symmetrize(mut f2: Vec<Vec<Vec<Expr>>>) -> Vec<Vec<Vec<Expr>>> {
    let n = f2.len();
    for s in f2.iter_mut() {
        for b in 0..n {
            for c in 0..b {
                s[b][c] = s[c][b].clone();
            }
        }
    }
    f2
}

/// Comparison tensors of a section with the jets of its own map at a point.
#[derive(Clone, Debug)]
pub struct SpencerComparison<T> {
    /// `A = f₁⁻¹ ∘ j₁f`.
    pub a: PointTensor<T>,
    pub b: PointTensor<T>,
    pub chi0: PointTensor<T>,
    pub tau0: PointTensor<T>,
    pub chi1: PointTensor<T>,
    pub tau1: PointTensor<T>,
    pub tau2: PointTensor<T>,
    /// Largest of `|BA − id|` and the re-substitution residuals of the
    /// relations defining `τ₁` and `τ₂`.
    pub residual: T,
}

/// Potentials with their dual-form diagnostics.
#[derive(Clone, Debug)]
pub struct PotentialA<T> {
    /// `𝒜̂_i = B^k_i ∂_k α − β_i`.
    pub value: PointTensor<T>,
    /// `(1/n)(τ^k_{k,i} + τ^k_{,i} γ^j_{jk})`.
    pub trace_form: PointTensor<T>,
    pub residual: T,
}

#[derive(Clone, Debug)]
pub struct PotentialB<T> {
    /// `ℬ̂_{j,i} = B^k_i ∂_k β_j − μ_ij − τ^k_{j,i} β_k`.
    pub value: PointTensor<T>,
    /// `(1/n)(τ^k_{kj,i} + τ^k_{j,i} γ^h_{hk} + τ^k_{,i} ∂_k γ^h_{hj})` with the
    /// third-order lift projected so that its trace matches the extended system.
    pub trace_form: PointTensor<T>,
    /// `max |trace_form − value|`: the skew part of the raw mismatch, which no
    /// symmetric third-order lift can absorb.
    pub residual: T,
    /// `max |λ|` of the lift correction `F^a_k(δ^k_y λ_{zx} + δ^k_z λ_{yx} + δ^k_x λ_{yz})`.
    pub lift_correction: T,
}

#[derive(Clone, Debug)]
pub struct PotentialPair<T> {
    pub cal_a: PointTensor<T>,
    pub cal_b: PointTensor<T>,
}

/// `G_ij`, `H_{j,ki}` (stored `[j][k][i]`), `F = ℬ̂_{i,j} − ℬ̂_{j,i}`,
/// `P = ½(ℬ̂_{i,j} + ℬ̂_{j,i})` and `E_{jk,i} = ⟨Ê(∂_j,∂_k)|∂_i⟩`.
#[derive(Clone, Debug)]
pub struct FieldStrengths<T> {
    pub g: PointTensor<T>,
    pub h: PointTensor<T>,
    pub f: PointTensor<T>,
    pub p: PointTensor<T>,
    pub e: PointTensor<T>,
}

fn delta<T: Real>(a: usize, b: usize) -> T {
    if a == b {
        T::one()
    } else {
        T::zero()
    }
}

fn inverse<T: Real>(m: &JetMat<T>, what: &'static str) -> Result<(JetMat<T>, Jet<T>)> {
    let (inv, det) = invert(m, 0.0).ok_or(Error::Singular { what })?;
    if det.value().abs() <= T::lit(DET_TOL) {
        return Err(Error::Singular { what });
    }
    Ok((inv, det))
}

fn eval_all<T: Real>(es: &[Expr], p: &[T], order: usize) -> Result<Vec<Jet<T>>> {
    es.iter().map(|e| eval_jet(e, p, order).map_err(Error::from)).collect()
}

/// Metric-free comparison data at jet level `k` (outputs carry order `k`).
struct Core<T> {
    n: usize,
    zero: Jet<T>,
    fj: Vec<Jet<T>>,
    f1: JetMat<T>,
    f1inv: JetMat<T>,
    det_f1: Jet<T>,
    f2: Jet3<T>,
    // df2[c][a][y][z] = ∂_c F^a_{yz}
    df2: Vec<Jet3<T>>,
    a: JetMat<T>,
    b: JetMat<T>,
    tau0: JetMat<T>,
    tau1: Jet3<T>,
}

impl<T: Real> Core<T> {
    fn new(s: &DiffeoSection, p: &[T], k: usize) -> Result<Self> {
        let n = s.dim();
        if p.len() != n {
            return Err(Error::Shape(format!("point has {} coordinates, section dimension is {n}", p.len())));
        }
        let zero = Jet::constant(n, k + 2, T::zero());
        let fj = eval_all(&s.f, p, k + 2)?;
        let jac: JetMat<T> = (0..n).map(|a| (0..n).map(|b| fj[a].deriv(b)).collect()).collect();
        let f1: JetMat<T> = s.f1.iter().map(|r| eval_all(r, p, k + 1)).collect::<Result<_>>()?;
        let f2: Jet3<T> =
            s.f2.iter().map(|sl| sl.iter().map(|r| eval_all(r, p, k + 1)).collect::<Result<_>>()).collect::<Result<_>>()?;
        let (f1inv, det_f1) = inverse(&f1, "f1")?;
        let (jinv, _) = inverse(&jac, "j1(f)")?;
        let a = mat_mul(&f1inv, &jac);
        let b = mat_mul(&jinv, &f1);
        let tau0: JetMat<T> =
            (0..n).map(|i| (0..n).map(|j| b[i][j].const_like(delta(i, j)) - &b[i][j]).collect()).collect();
        let df2: Vec<Jet3<T>> = (0..n)
            .map(|c| f2.iter().map(|sl| sl.iter().map(|r| r.iter().map(|x| x.deriv(c)).collect()).collect()).collect())
            .collect();
        let mut tau1 = Vec::with_capacity(n);
        for bb in 0..n {
            let mut te = Vec::with_capacity(n);
            for e in 0..n {
                let mut td = Vec::with_capacity(n);
                for d in 0..n {
                    let mut s = zero.clone();
                    for aa in 0..n {
                        let mut inner = -&f2[aa][e][d];
                        for c in 0..n {
                            inner = inner + f1[aa][e].deriv(c) * &b[c][d];
                        }
                        s = s + &f1inv[bb][aa] * &inner;
                    }
                    td.push(s);
                }
                te.push(td);
            }
            tau1.push(te);
        }
        Ok(Core { n, zero, fj, f1, f1inv, det_f1, f2, df2, a, b, tau0, tau1 })
    }

    /// Third-order data `f₃[a][y][z][x]` before any trace projection.
    fn lift(&self, pad: LiftPad) -> Jet4<T> {
        let n = self.n;
        let third = T::lit(1.0 / 3.0);
        (0..n)
            .map(|a| {
                (0..n)
                    .map(|y| {
                        (0..n)
                            .map(|z| {
                                (0..n)
                                    .map(|x| match pad {
                                        LiftPad::Symmetrized => (&self.df2[x][a][y][z]
                                            + &self.df2[y][a][z][x]
                                            + &self.df2[z][a][x][y])
                                            .scale(third),
                                        LiftPad::Zero => self.df2[0][0][0][0].zero_like(),
                                    })
                                    .collect()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    fn tau2(&self, f3: &Jet4<T>) -> Jet4<T> {
        let n = self.n;
        let (f2, t1, b) = (&self.f2, &self.tau1, &self.b);
        // inner[a][y][z][x]; then τ₂ = F⁻¹ · inner
        let mut inner = vec![vec![vec![vec![self.zero.clone(); n]; n]; n]; n];
        for a in 0..n {
            for y in 0..n {
                for z in 0..n {
                    for x in 0..n {
                        let mut s = -&f3[a][y][z][x];
                        for c in 0..n {
                            s = s + &self.df2[c][a][y][z] * &b[c][x];
                        }
                        for e in 0..n {
                            s = s - &f2[a][e][y] * &t1[e][z][x] - &f2[a][e][z] * &t1[e][y][x];
                        }
                        inner[a][y][z][x] = s;
                    }
                }
            }
        }
        (0..n)
            .map(|bb| {
                (0..n)
                    .map(|y| {
                        (0..n)
                            .map(|z| {
                                (0..n)
                                    .map(|x| {
                                        (0..n).fold(self.zero.clone(), |s, a| s + &self.f1inv[bb][a] * &inner[a][y][z][x])
                                    })
                                    .collect()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    fn residuals(&self, f3: &Jet4<T>, tau2: &Jet4<T>) -> T {
        let n = self.n;
        let v = |j: &Jet<T>| j.value();
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..n {
                let ba = (0..n).fold(-delta::<T>(i, j), |s, k| s + v(&self.b[i][k]) * v(&self.a[k][j]));
                worst = worst.max(ba.abs());
            }
        }
        for a in 0..n {
            for e in 0..n {
                for d in 0..n {
                    let mut r = T::zero();
                    for k in 0..n {
                        r = r + v(&self.f2[a][e][k]) * v(&self.tau0[k][d]) + v(&self.f1[a][k]) * v(&self.tau1[k][e][d]);
                        r = r - (self.f1[a][e].partial(&[k]) - v(&self.f2[a][e][k])) * v(&self.b[k][d]);
                    }
                    worst = worst.max(r.abs());
                }
            }
        }
        for a in 0..n {
            for y in 0..n {
                for z in 0..n {
                    for x in 0..n {
                        let mut r = T::zero();
                        for c in 0..n {
                            r = r + (v(&self.df2[c][a][y][z]) - v(&f3[a][y][z][c])) * v(&self.b[c][x]);
                            r = r - v(&f3[a][y][z][c]) * v(&self.tau0[c][x]);
                            r = r - v(&self.f2[a][c][y]) * v(&self.tau1[c][z][x]);
                            r = r - v(&self.f2[a][c][z]) * v(&self.tau1[c][y][x]);
                            r = r - v(&self.f1[a][c]) * v(&tau2[c][y][z][x]);
                        }
                        worst = worst.max(r.abs());
                    }
                }
            }
        }
        worst
    }
}

/// Comparison data plus the metric-dependent `(α, β)` of the section.
struct Gauge<T> {
    core: Core<T>,
    geo: LocalGeometry<T>,
    alpha: Jet<T>,
    beta: Vec<Jet<T>>,
    // trg[k] = γ^j_{jk}
    trg: Vec<Jet<T>>,
}

impl<T: Real> Gauge<T> {
    fn new(s: &DiffeoSection, metric: &MetricField, p: &[T], k: usize) -> Result<Self> {
        if metric.dim() != s.dim() {
            return Err(Error::Shape("metric and section dimensions differ".into()));
        }
        let core = Core::new(s, p, k)?;
        let n = core.n;
        let geo = LocalGeometry::at(metric, p, k + 2)?;
        let y0: Vec<T> = core.fj.iter().map(|j| j.value()).collect();
        let geo_y = LocalGeometry::at(metric, &y0, k + 2)?;
        let det_f = geo_y.det.substitute(&core.fj);
        let inv_n = T::lit(1.0 / n as f64);
        let half = T::lit(0.5);
        let alpha = (core.det_f1.abs().ln() + (det_f.abs().ln() - geo.det.abs().ln()).scale(half)).scale(inv_n);
        let trace_of = |gam: &Jet3<T>, c: usize| (0..n).fold(core.zero.clone(), |s, j| s + &gam[j][j][c]);
        let trg: Vec<Jet<T>> = (0..n).map(|c| trace_of(&geo.gamma, c)).collect();
        let trg_f: Vec<Jet<T>> = (0..n).map(|c| trace_of(&geo_y.gamma, c).substitute(&core.fj)).collect();
        let beta = (0..n)
            .map(|i| {
                let mut s = -&trg[i];
                for kk in 0..n {
                    s = s + &trg_f[kk] * &core.f1[kk][i];
                    for a in 0..n {
                        s = s + &core.f1inv[kk][a] * &core.f2[a][kk][i];
                    }
                }
                s.scale(inv_n)
            })
            .collect();
        Ok(Gauge { core, geo, alpha, beta, trg })
    }

    fn potential_a(&self) -> (Vec<Jet<T>>, Vec<Jet<T>>) {
        let (n, c) = (self.core.n, &self.core);
        let inv_n = T::lit(1.0 / n as f64);
        let closed = (0..n)
            .map(|i| (0..n).fold(-&self.beta[i], |s, k| s + &c.b[k][i] * &self.alpha.deriv(k)))
            .collect();
        let trace = (0..n)
            .map(|i| (0..n).fold(c.zero.clone(), |s, k| s + &c.tau1[k][k][i] + &c.tau0[k][i] * &self.trg[k]).scale(inv_n))
            .collect();
        (closed, trace)
    }

    fn potential_b_closed(&self, c0: f64) -> JetMat<T> {
        let (n, c) = (self.core.n, &self.core);
        let mu = mu_jets(&self.alpha, &self.beta, &self.geo, c0);
        (0..n)
            .map(|j| {
                (0..n)
                    .map(|i| {
                        let mut s = -&mu[i][j];
                        for k in 0..n {
                            s = s + &c.b[k][i] * &self.beta[j].deriv(k) - &c.tau1[k][j][i] * &self.beta[k];
                        }
                        s
                    })
                    .collect()
            })
            .collect()
    }

    fn potential_b_trace(&self, tau2: &Jet4<T>) -> JetMat<T> {
        let (n, c) = (self.core.n, &self.core);
        let inv_n = T::lit(1.0 / n as f64);
        (0..n)
            .map(|j| {
                (0..n)
                    .map(|i| {
                        let mut s = c.zero.clone();
                        for k in 0..n {
                            s = s + &tau2[k][k][j][i] + &c.tau1[k][j][i] * &self.trg[k];
                            s = s + &c.tau0[k][i] * &self.trg[j].deriv(k);
                        }
                        s.scale(inv_n)
                    })
                    .collect()
            })
            .collect()
    }
}

/// `μ_ij = ½{[c₀(1 − e^{2α}) − β(∗β)]ω_ij + β_k(Γ^k_ij + Γ^k_ji)} + β_iβ_j`.
fn mu_jets<T: Real>(alpha: &Jet<T>, beta: &[Jet<T>], geo: &LocalGeometry<T>, c0: f64) -> JetMat<T> {
    let n = beta.len();
    let half = T::lit(0.5);
    let mut bb = beta[0].zero_like();
    for k in 0..n {
        for l in 0..n {
            bb = bb + &(&geo.ginv[k][l] * &beta[k]) * &beta[l];
        }
    }
    let c0 = T::lit(c0);
    let e2a = alpha.scale(T::lit(2.0)).exp();
    let scalar = e2a.scale(-c0).add_scalar(c0) - &bb;
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut s = &scalar * &geo.g[i][j];
                    for k in 0..n {
                        s = s + (&geo.gamma[k][i][j] + &geo.gamma[k][j][i]) * &beta[k];
                    }
                    s.scale(half) + &beta[i] * &beta[j]
                })
                .collect()
        })
        .collect()
}

fn tensor1<T: Real>(v: &[Jet<T>]) -> PointTensor<T> {
    PointTensor::from_fn(v.len(), 0, 1, |i| v[i[0]].value())
}

fn tensor2<T: Real>(m: &JetMat<T>, up: usize) -> PointTensor<T> {
    PointTensor::from_fn(m.len(), up, 2 - up, |i| m[i[0]][i[1]].value())
}

fn check_field<T: Real>(j: &Jet1Field, g: &MetricField, p: &[T]) -> Result<()> {
    if j.dim() != g.dim() || p.len() != g.dim() {
        return Err(Error::Shape("field, metric and point dimensions differ".into()));
    }
    Ok(())
}

/// `μ` determined by `(α, β)` through the extended system, on a substrate of
/// constant sectional curvature `c0`.
pub fn mu_from_jet<T: Real>(j: &Jet1Field, g: &MetricField, c0: f64, p: &[T]) -> Result<PointTensor<T>> {
    check_field(j, g, p)?;
    let geo = LocalGeometry::at(g, p, 2)?;
    check_constant_curvature(&geo, c0)?;
    let alpha = eval_jet(&j.alpha, p, 0)?;
    let beta = eval_all(&j.beta, p, 0)?;
    let mu = mu_jets(&alpha, &beta, &geo, c0);
    Ok(tensor2(&mu, 0).with_symmetry(Symmetry::SymmetricPair))
}

/// `α = (1/n) ln(|det f₁| √|g∘f| / √|g|)`, `β = (1/n) Tr¹(^{f₂}∇ − ∇)`.
pub fn phi0<T: Real>(s: &DiffeoSection, g: &MetricField, p: &[T]) -> Result<(T, PointTensor<T>)> {
    let ga = Gauge::new(s, g, p, 0)?;
    Ok((ga.alpha.value(), tensor1(&ga.beta)))
}

pub fn spencer_comparison<T: Real>(s: &DiffeoSection, p: &[T]) -> Result<SpencerComparison<T>> {
    let c = Core::new(s, p, 0)?;
    let n = c.n;
    let f3 = c.lift(LiftPad::Symmetrized);
    let tau2 = c.tau2(&f3);
    let residual = c.residuals(&f3, &tau2);
    let chi1 = PointTensor::from_fn(n, 1, 2, |i| {
        (0..n).fold(T::zero(), |s, d| s + c.tau1[i[0]][i[1]][d].value() * c.a[d][i[2]].value())
    });
    Ok(SpencerComparison {
        a: tensor2(&c.a, 1),
        b: tensor2(&c.b, 1),
        chi0: PointTensor::from_fn(n, 1, 1, |i| c.a[i[0]][i[1]].value() - delta::<T>(i[0], i[1])),
        tau0: tensor2(&c.tau0, 1),
        chi1,
        tau1: PointTensor::from_fn(n, 1, 2, |i| c.tau1[i[0]][i[1]][i[2]].value()),
        tau2: PointTensor::from_fn(n, 1, 3, |i| tau2[i[0]][i[1]][i[2]][i[3]].value()),
        residual,
    })
}

pub fn potential_a<T: Real>(s: &DiffeoSection, g: &MetricField, p: &[T]) -> Result<PotentialA<T>> {
    let ga = Gauge::new(s, g, p, 0)?;
    let (closed, trace) = ga.potential_a();
    let (value, trace_form) = (tensor1(&closed), tensor1(&trace));
    let residual = value.max_diff(&trace_form);
    Ok(PotentialA { value, trace_form, residual })
}

pub fn potential_b<T: Real>(s: &DiffeoSection, g: &MetricField, c0: f64, p: &[T]) -> Result<PotentialB<T>> {
    potential_b_with(s, g, c0, p, LiftPad::Symmetrized)
}

/// `potential_b` with an explicit choice of third-order pad.
pub fn potential_b_with<T: Real>(
    s: &DiffeoSection,
    g: &MetricField,
    c0: f64,
    p: &[T],
    pad: LiftPad,
) -> Result<PotentialB<T>> {
    let ga = Gauge::new(s, g, p, 0)?;
    check_constant_curvature(&ga.geo, c0)?;
    let n = ga.core.n;
    let closed = ga.potential_b_closed(c0);
    let tau2 = ga.core.tau2(&ga.core.lift(pad));
    let raw = ga.potential_b_trace(&tau2);
    let value = tensor2(&closed, 0);
    // The symmetric part of the mismatch is carried by the trace of f₃; the
    // lift is moved along `F^a_k(δ^k_y λ_zx + δ^k_z λ_yx + δ^k_x λ_yz)`, which
    // shifts the trace form by −(n+2)/n · λ.
    let r = |j: usize, i: usize| raw[j][i].value() - closed[j][i].value();
    let half = T::lit(0.5);
    let nf = T::lit(n as f64);
    let mut lift_correction = T::zero();
    let trace_form = PointTensor::from_fn(n, 0, 2, |ix| {
        let (j, i) = (ix[0], ix[1]);
        let sym = (r(j, i) + r(i, j)) * half;
        raw[j][i].value() - sym
    });
    for j in 0..n {
        for i in 0..n {
            let lam = nf / (nf + T::lit(2.0)) * (r(j, i) + r(i, j)) * half;
            lift_correction = lift_correction.max(lam.abs());
        }
    }
    let residual = value.max_diff(&trace_form);
    Ok(PotentialB { value, trace_form, residual, lift_correction })
}

pub fn potentials<T: Real>(s: &DiffeoSection, g: &MetricField, c0: f64, p: &[T]) -> Result<PotentialPair<T>> {
    let ga = Gauge::new(s, g, p, 0)?;
    check_constant_curvature(&ga.geo, c0)?;
    let (a, _) = ga.potential_a();
    Ok(PotentialPair { cal_a: tensor1(&a), cal_b: tensor2(&ga.potential_b_closed(c0), 0) })
}

/// `ν(X, Y) = ω(BX, BY)`.
pub fn gauge_metric_nu<T: Real>(s: &DiffeoSection, g: &MetricField, p: &[T]) -> Result<PointTensor<T>> {
    let c = Core::new(s, p, 0)?;
    let gv = g.values(p)?;
    let n = c.n;
    Ok(PointTensor::from_fn(n, 0, 2, |ix| {
        let mut s = T::zero();
        for a in 0..n {
            for b in 0..n {
                s = s + gv[a][b] * c.b[a][ix[0]].value() * c.b[b][ix[1]].value();
            }
        }
        s
    })
    .with_symmetry(Symmetry::SymmetricPair))
}

/// Field strengths together with the first jets of the potentials.
struct Strengths<T> {
    out: FieldStrengths<T>,
    cal_a: Vec<Jet<T>>,
    f: JetMat<T>,
}

fn strengths<T: Real>(s: &DiffeoSection, metric: &MetricField, c0: f64, p: &[T]) -> Result<Strengths<T>> {
    let ga = Gauge::new(s, metric, p, 1)?;
    check_constant_curvature(&ga.geo, c0)?;
    let n = ga.core.n;
    let (cal_a, _) = ga.potential_a();
    let cb = ga.potential_b_closed(c0);
    let c = &ga.core;
    let tau2 = c.tau2(&c.lift(LiftPad::Symmetrized));
    let v = |j: &Jet<T>| j.value();
    let gv = ga.geo.g_values();
    let c0t = T::lit(c0);
    let t1 = |b: usize, e: usize, d: usize| v(&c.tau1[b][e][d]);
    let e_at = |j: usize, k: usize, i: usize| {
        (0..n).fold(-c0t * gv[j][k] * v(&cal_a[i]), |s, r| s + ga.geo.gamma[r][j][k].value() * v(&cb[r][i]))
    };
    let f: JetMat<T> = (0..n).map(|i| (0..n).map(|j| &cb[i][j] - &cb[j][i]).collect()).collect();
    let g = PointTensor::from_fn(n, 0, 2, |ix| {
        let (i, j) = (ix[0], ix[1]);
        let mut s = -v(&f[i][j]);
        for k in 0..n {
            s = s + v(&c.b[k][i]) * cal_a[j].partial(&[k]) - v(&c.b[k][j]) * cal_a[i].partial(&[k]);
            s = s - (t1(k, j, i) - t1(k, i, j)) * v(&cal_a[k]);
        }
        s
    });
    let h = PointTensor::from_fn(n, 0, 3, |ix| {
        let (j, k, i) = (ix[0], ix[1], ix[2]);
        let mut s = -(e_at(j, k, i) - e_at(j, i, k));
        for r in 0..n {
            s = s + v(&c.b[r][k]) * cb[j][i].partial(&[r]) - v(&c.b[r][i]) * cb[j][k].partial(&[r]);
            s = s - (t1(r, i, k) - t1(r, k, i)) * v(&cb[j][r]);
            s = s - (t1(r, j, k) * v(&cb[r][i]) - t1(r, j, i) * v(&cb[r][k]));
            s = s - (v(&tau2[r][j][i][k]) - v(&tau2[r][j][k][i])) * v(&cal_a[r]);
        }
        s
    });
    let half = T::lit(0.5);
    let out = FieldStrengths {
        g,
        h,
        f: tensor2(&f, 0),
        p: PointTensor::from_fn(n, 0, 2, |ix| (v(&cb[ix[0]][ix[1]]) + v(&cb[ix[1]][ix[0]])) * half)
            .with_symmetry(Symmetry::SymmetricPair),
        e: PointTensor::from_fn(n, 0, 3, |ix| e_at(ix[0], ix[1], ix[2])),
    };
    Ok(Strengths { out, cal_a, f })
}

pub fn field_strengths<T: Real>(s: &DiffeoSection, g: &MetricField, c0: f64, p: &[T]) -> Result<FieldStrengths<T>> {
    Ok(strengths(s, g, c0, p)?.out)
}

/// One-parameter family `s_ε = (f_ε, j₁f_ε + εM, j₂f_ε + εN)` around the
/// identity, `f_ε` being a flow of conformal maps with `f_0 = id`.
pub struct WeakFieldFamily {
    pub flow: Box<dyn Fn(f64) -> DiffeoSpec + Send + Sync>,
    pub m: Vec<Vec<Expr>>,
    pub h: Vec<Vec<Vec<Expr>>>,
}

impl WeakFieldFamily {
    /// Dilation by `e^ε` after the special conformal map with parameter `εb`.
    pub fn dilation_special_conformal(
        signature: &[i8],
        b: &[f64],
        m: Vec<Vec<Expr>>,
        h: Vec<Vec<Vec<Expr>>>,
    ) -> Self {
        let sig = signature.to_vec();
        let b = b.to_vec();
        let flow = move |eps: f64| {
            let sc = DiffeoSpec::special_conformal(&sig, &b.iter().map(|x| x * eps).collect::<Vec<_>>());
            DiffeoSpec::dilation(sig.len(), eps.exp()).compose(&sc)
        };
        WeakFieldFamily { flow: Box::new(flow), m, h }
    }

    pub fn at(&self, eps: f64) -> Result<DiffeoSection> {
        DiffeoSection::holonomic(&(self.flow)(eps)).perturbed(eps, &self.m, &self.h)
    }
}

/// `(max |F̂ − d𝒜̂|, max |dF̂|)` for the member `s_ε` of the family.
pub fn weak_field_check<T: Real>(
    family: &WeakFieldFamily,
    g: &MetricField,
    c0: f64,
    p: &[T],
    eps: f64,
) -> Result<(T, T)> {
    let st = strengths(&family.at(eps)?, g, c0, p)?;
    let n = g.dim();
    let (a, f) = (&st.cal_a, &st.f);
    let (mut r1, mut r2) = (T::zero(), T::zero());
    for i in 0..n {
        for j in 0..n {
            let da = a[j].partial(&[i]) - a[i].partial(&[j]);
            r1 = r1.max((f[i][j].value() - da).abs());
            for k in 0..n {
                let df = f[i][j].partial(&[k]) + f[j][k].partial(&[i]) + f[k][i].partial(&[j]);
                r2 = r2.max(df.abs());
            }
        }
    }
    Ok((r1, r2))
}

/// Linearized first-order operator: `𝒜 = dα − β`, `ℬ_{j,i} = ∂_i β_j − μ_ij`
/// with `μ(X,Y) = ½β(∇_X Y + ∇_Y X) − c₀ α ω(X,Y)`.
pub fn spencer_d1<T: Real>(
    j: &Jet1Field,
    g: &MetricField,
    c0: f64,
    p: &[T],
) -> Result<(PointTensor<T>, PointTensor<T>)> {
    check_field(j, g, p)?;
    let geo = LocalGeometry::at(g, p, 2)?;
    check_constant_curvature(&geo, c0)?;
    let n = g.dim();
    let alpha = eval_jet(&j.alpha, p, 1)?;
    let beta = eval_all(&j.beta, p, 1)?;
    let gv = geo.g_values();
    let cal_a = PointTensor::from_fn(n, 0, 1, |i| alpha.partial(&[i[0]]) - beta[i[0]].value());
    let half = T::lit(0.5);
    let cal_b = PointTensor::from_fn(n, 0, 2, |ix| {
        let (jj, i) = (ix[0], ix[1]);
        let mu = (0..n).fold(-T::lit(c0) * alpha.value() * gv[i][jj], |s, k| {
            s + half * beta[k].value() * (geo.gamma[k][i][jj].value() + geo.gamma[k][jj][i].value())
        });
        beta[jj].partial(&[i]) - mu
    });
    Ok((cal_a, cal_b))
}
