//! The flat conformal algebra with exact coefficients, its action on the
//! field slots `(alpha, beta, A, B)`, the first two Janet operators of an
//! equivariant Lagrangian density, and the variational dual operators.
//!
//! Generator order is fixed: translations `P_i`, rotations/boosts `M_ij`
//! (`i < j`, lexicographic), the dilation `D`, then special conformal `K_i`.
//! Brackets are the base vector-field bracket `[X, Y] = X·∇Y − Y·∇X`.

use crate::error::{Error, Result};
use crate::expr::{differentiate, eval_jet, eval_with, parse, EvalError, Expr, Sym};
use crate::jet::Jet;
use crate::metric::{LocalGeometry, MetricField};
use crate::poly::{null_space, q, q_frac, solve_in_span, Poly, Q};
use num_traits::{Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorKind {
    Translation,
    RotationBoost,
    Dilation,
    SpecialConformal,
}

#[derive(Clone, Debug)]
pub struct Generator {
    pub kind: GeneratorKind,
    pub label: String,
    pub xi: Vec<Poly>,
    /// `jac[k][j] = ∂_j ξ^k`.
    jac: Vec<Vec<Poly>>,
    div: Poly,
}

impl Generator {
    pub fn new(kind: GeneratorKind, label: impl Into<String>, xi: Vec<Poly>) -> Generator {
        let n = xi.len();
        let jac: Vec<Vec<Poly>> = xi.iter().map(|c| (0..n).map(|j| c.deriv(j)).collect()).collect();
        let div = (0..n).fold(Poly::zero(n), |acc, k| &acc + &jac[k][k]);
        Generator { kind, label: label.into(), xi, jac, div }
    }

    pub fn dim(&self) -> usize {
        self.xi.len()
    }

    pub fn jacobian(&self) -> &[Vec<Poly>] {
        &self.jac
    }

    pub fn divergence(&self) -> &Poly {
        &self.div
    }

    /// `η_aa ∂_b ξ^a + η_bb ∂_a ξ^b − (2/n) div ξ η_ab`, entrywise.
    pub fn killing_defect(&self, signature: &[i8]) -> Vec<Vec<Poly>> {
        let n = self.dim();
        let two_over_n = q_frac(2, n as i64);
        (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        let lhs = &self.jac[a][b].scale(&q(signature[a] as i64))
                            + &self.jac[b][a].scale(&q(signature[b] as i64));
                        if a == b {
                            &lhs - &self.div.scale(&(&two_over_n * q(signature[a] as i64)))
                        } else {
                            lhs
                        }
                    })
                    .collect()
            })
            .collect()
    }

    pub fn is_conformal_killing(&self, signature: &[i8]) -> bool {
        self.killing_defect(signature).iter().flatten().all(Poly::is_zero)
    }

    /// `ξ^k_k = 0` identically (so `ξ^k_{kj} = 0` too).
    pub fn is_trace_free(&self) -> bool {
        self.div.is_zero()
    }

    /// Coefficient of the prolonged generator along the total-space
    /// coordinate `s`:
    /// `φ(α) = −ξ^k_k/n`, `φ(β_j) = −(ξ^k_j β_k + ξ^k_{kj})`,
    /// `φ(A_j) = −ξ^k_j A_k`, `φ(B_kl) = −(ξ^h_k B_hl + ξ^h_l B_kh)`.
    pub fn coefficient(&self, s: Sym) -> Expr {
        let n = self.dim();
        let j = |k: usize, i: usize| self.jac[k][i].to_expr();
        let sum = |f: &dyn Fn(usize) -> Expr| (0..n).fold(Expr::Num(0.0), |acc, k| acc + f(k));
        match s {
            Sym::X(i) => self.xi[i].to_expr(),
            Sym::Alpha => -(self.div.to_expr() / Expr::Num(n as f64)),
            Sym::Beta(i) => -(sum(&|k| j(k, i) * Expr::sym(Sym::Beta(k))) + self.div.deriv(i).to_expr()),
            Sym::A(i) => -sum(&|k| j(k, i) * Expr::sym(Sym::A(k))),
            Sym::B(k, l) => -sum(&|h| j(h, k) * Expr::sym(Sym::B(h, l)) + j(h, l) * Expr::sym(Sym::B(k, h))),
            Sym::C0 | Sym::Pi => Expr::Num(0.0),
        }
    }
}

/// Base bracket `[X, Y] = X·∇Y − Y·∇X`.
pub fn bracket(x: &[Poly], y: &[Poly]) -> Vec<Poly> {
    let n = x.len();
    (0..n)
        .map(|i| {
            (0..n).fold(Poly::zero(n), |acc, k| &(&acc + &(&x[k] * &y[i].deriv(k))) - &(&y[k] * &x[i].deriv(k)))
        })
        .collect()
}

/// The `(n+1)(n+2)/2` conformal Killing fields of the flat metric with the
/// given signature.
pub fn generators(n: usize, signature: &[i8]) -> Result<Vec<Generator>> {
    if n < 3 {
        return Err(Error::Dimension(format!("conformal algebra needs n >= 3, got {n}")));
    }
    if signature.len() != n || signature.iter().any(|&s| s != 1 && s != -1) {
        return Err(Error::Shape(format!("signature {signature:?} does not describe {n} coordinates")));
    }
    let x = |i: usize| Poly::var(n, i);
    let eta = |i: usize| q(signature[i] as i64);
    let unit = |i: usize, p: Poly| -> Vec<Poly> { (0..n).map(|k| if k == i { p.clone() } else { Poly::zero(n) }).collect() };
    let mut out = Vec::new();
    for i in 0..n {
        out.push(Generator::new(GeneratorKind::Translation, format!("P{}", i + 1), unit(i, Poly::constant(n, q(1)))));
    }
    for i in 0..n {
        for j in i + 1..n {
            let a = unit(i, x(j).scale(&eta(j)));
            let b = unit(j, x(i).scale(&eta(i)));
            let xi = a.iter().zip(&b).map(|(u, v)| u - v).collect();
            out.push(Generator::new(GeneratorKind::RotationBoost, format!("M{}{}", i + 1, j + 1), xi));
        }
    }
    out.push(Generator::new(GeneratorKind::Dilation, "D", (0..n).map(x).collect()));
    let xx = (0..n).fold(Poly::zero(n), |acc, k| &acc + &(&x(k) * &x(k)).scale(&eta(k)));
    for i in 0..n {
        // ξ = 2(b·x)x − (x·x)b with b = e_i
        let bx = x(i).scale(&eta(i));
        let xi = (0..n)
            .map(|k| {
                let t = (&bx * &x(k)).scale(&q(2));
                if k == i {
                    &t - &xx
                } else {
                    t
                }
            })
            .collect();
        out.push(Generator::new(GeneratorKind::SpecialConformal, format!("K{}", i + 1), xi));
    }
    Ok(out)
}

/// `c[μ][ν][λ]` with `[ξ^μ, ξ^ν] = Σ_λ c^{μν}_λ ξ^λ`.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureConstants {
    c: Vec<Vec<Vec<Q>>>,
}

impl StructureConstants {
    pub fn abelian(dim: usize) -> Self {
        StructureConstants { c: vec![vec![vec![Q::zero(); dim]; dim]; dim] }
    }

    /// Table from the listed brackets `[e_μ, e_ν] = k e_λ`; the reversed
    /// brackets are filled by antisymmetry.
    pub fn from_brackets(dim: usize, brackets: &[(usize, usize, usize, Q)]) -> Self {
        let mut s = Self::abelian(dim);
        for (mu, nu, lam, k) in brackets {
            s.c[*mu][*nu][*lam] += k;
            s.c[*nu][*mu][*lam] -= k;
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn get(&self, mu: usize, nu: usize, lam: usize) -> &Q {
        &self.c[mu][nu][lam]
    }

    pub fn is_antisymmetric(&self) -> bool {
        let d = self.dim();
        (0..d).all(|m| (0..d).all(|v| (0..d).all(|l| self.c[m][v][l] == -self.c[v][m][l].clone())))
    }

    /// Largest entry of the Jacobi expression
    /// `c^{μν}_λ c^{λρ}_σ + c^{νρ}_λ c^{λμ}_σ + c^{ρμ}_λ c^{λν}_σ`.
    pub fn jacobi_residual(&self) -> Q {
        let d = self.dim();
        let nz: Vec<Vec<Vec<(usize, &Q)>>> = self
            .c
            .iter()
            .map(|row| row.iter().map(|v| v.iter().enumerate().filter(|(_, x)| !x.is_zero()).collect()).collect())
            .collect();
        let mut worst = Q::zero();
        let mut acc = vec![Q::zero(); d];
        for m in 0..d {
            for v in m + 1..d {
                for r in v + 1..d {
                    acc.iter_mut().for_each(|a| a.set_zero());
                    for (a, b, e) in [(m, v, r), (v, r, m), (r, m, v)] {
                        for &(l, x) in &nz[a][b] {
                            for &(s, y) in &nz[l][e] {
                                acc[s] += x * y;
                            }
                        }
                    }
                    for a in &acc {
                        if a.abs() > worst {
                            worst = a.abs();
                        }
                    }
                }
            }
        }
        worst
    }
}

pub fn structure_constants(gens: &[Generator]) -> Result<StructureConstants> {
    let d = gens.len();
    let mut index: BTreeMap<(usize, Vec<u32>), usize> = BTreeMap::new();
    for g in gens {
        for (k, c) in g.xi.iter().enumerate() {
            for (e, _) in c.terms() {
                let len = index.len();
                index.entry((k, e.to_vec())).or_insert(len);
            }
        }
    }
    let flatten = |xi: &[Poly]| -> Option<Vec<Q>> {
        let mut v = vec![Q::zero(); index.len()];
        for (k, c) in xi.iter().enumerate() {
            for (e, coeff) in c.terms() {
                v[*index.get(&(k, e.to_vec()))?] = coeff.clone();
            }
        }
        Some(v)
    };
    let cols: Vec<Vec<Q>> = gens.iter().map(|g| flatten(&g.xi).expect("generator terms are indexed")).collect();
    if null_space(&transpose(&cols), d).len() > 0 {
        return Err(Error::Precondition("generators are linearly dependent".into()));
    }
    let mut sc = StructureConstants::abelian(d);
    for m in 0..d {
        for v in m + 1..d {
            let b = bracket(&gens[m].xi, &gens[v].xi);
            let coords = flatten(&b).and_then(|rhs| solve_in_span(&cols, &rhs)).ok_or_else(|| {
                Error::Consistency(format!("[{}, {}] leaves the span of the generators", gens[m].label, gens[v].label))
            })?;
            for (l, c) in coords.into_iter().enumerate() {
                sc.c[v][m][l] = -c.clone();
                sc.c[m][v][l] = c;
            }
        }
    }
    Ok(sc)
}

fn transpose(cols: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let rows = cols.first().map_or(0, |c| c.len());
    (0..rows).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CConstraint {
    pub dimension: usize,
    pub basis: Vec<Vec<Q>>,
}

/// Solutions of `Σ_λ c^{μν}_λ c^λ = 0` for all `μ, ν`.
pub fn c_constraint(sc: &StructureConstants) -> CConstraint {
    let d = sc.dim();
    let rows: Vec<Vec<Q>> =
        (0..d).flat_map(|m| (m + 1..d).map(move |v| (m, v))).map(|(m, v)| sc.c[m][v].clone()).collect();
    let basis = null_space(&rows, d);
    CConstraint { dimension: basis.len(), basis }
}

// ------------------------------------------------------------------ fields

/// Values of the field slots at one point of the total space.
pub type SlotValues = BTreeMap<Sym, f64>;

#[derive(Clone, Debug)]
pub struct LagrangianDensity {
    pub expr: Expr,
    pub slots: Vec<Sym>,
    n: usize,
}

fn check_symbols(e: &Expr, n: usize) -> Result<()> {
    for s in e.symbols() {
        let ok = match s {
            Sym::X(i) | Sym::Beta(i) | Sym::A(i) => i < n,
            Sym::B(i, j) => i < n && j < n,
            Sym::Alpha | Sym::Pi => true,
            Sym::C0 => false,
        };
        if !ok {
            return Err(Error::Precondition(format!("symbol {s} is not available in dimension {n}")));
        }
    }
    Ok(())
}

impl LagrangianDensity {
    pub fn new(expr: Expr, n: usize) -> Result<Self> {
        check_symbols(&expr, n)?;
        let slots = expr.symbols().into_iter().filter(Sym::is_slot).collect();
        Ok(LagrangianDensity { expr, slots, n })
    }

    pub fn parse(text: &str, n: usize) -> Result<Self> {
        Self::new(parse(text, n)?, n)
    }

    pub fn dim(&self) -> usize {
        self.n
    }
}

/// Assignment of field slots to expressions in the chart coordinates.
#[derive(Clone, Debug, Default)]
pub struct FieldConfig {
    fields: BTreeMap<Sym, Expr>,
}

impl FieldConfig {
    pub fn new() -> Self {
        Self::default()
    }

    /// Pairs like `("beta2", "x1*x3")`.
    pub fn from_pairs(n: usize, pairs: &[(&str, &str)]) -> Result<Self> {
        let mut cfg = Self::new();
        for (name, text) in pairs {
            let slot = match parse(name, n)? {
                Expr::Sym(s) if s.is_slot() => s,
                _ => return Err(Error::Precondition(format!("'{name}' is not a field slot"))),
            };
            cfg.set(slot, parse(text, n)?)?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, slot: Sym, e: Expr) -> Result<()> {
        if e.symbols().iter().any(|s| s.is_slot() || *s == Sym::C0) {
            return Err(Error::Precondition(format!("assignment of {slot} must depend on coordinates only")));
        }
        self.fields.insert(slot, e);
        Ok(())
    }

    pub fn get(&self, slot: Sym) -> Option<&Expr> {
        self.fields.get(&slot)
    }

    pub fn values(&self, p: &[f64]) -> Result<SlotValues> {
        self.fields.iter().map(|(s, e)| Ok((*s, eval_jet(e, p, 0)?.value()))).collect()
    }

    /// `e` with every slot replaced by its assignment.
    pub fn restrict(&self, e: &Expr) -> Result<Expr> {
        if let Some(s) = e.symbols().into_iter().find(|s| s.is_slot() && !self.fields.contains_key(s)) {
            return Err(Error::Precondition(format!("missing slot assignment for {s}")));
        }
        Ok(e.substitute(&|s| self.fields.get(s).cloned()))
    }
}

/// Value of a total-space expression at coordinates `x` and slot values.
pub fn eval_total(e: &Expr, x: &[f64], slots: &SlotValues) -> Result<f64> {
    let n = x.len();
    let leaf = |s: &Sym| match s {
        Sym::X(i) if *i < n => Ok(Jet::constant(n, 0, x[*i])),
        s if s.is_slot() => slots
            .get(s)
            .map(|&v| Jet::constant(n, 0, v))
            .ok_or_else(|| EvalError::Unbound(format!("{s} (missing slot assignment)"))),
        s => Err(EvalError::Unbound(s.to_string())),
    };
    Ok(eval_with(e, n, 0, &leaf)?.value())
}

/// `𝔎^μ = v^μ(𝔏) + (div ξ^μ) 𝔏` as total-space expressions.
pub fn janet_d1_exprs(l: &LagrangianDensity, gens: &[Generator]) -> Vec<Expr> {
    let mut syms: Vec<Sym> = (0..l.n).map(Sym::X).collect();
    syms.extend(l.slots.iter().copied());
    let partials: Vec<(Sym, Expr)> = syms.iter().map(|&s| (s, differentiate(&l.expr, s))).collect();
    gens.iter()
        .map(|g| {
            let v = partials.iter().fold(Expr::Num(0.0), |acc, (s, d)| {
                if d.is_zero() {
                    acc
                } else {
                    acc + g.coefficient(*s) * d.clone()
                }
            });
            v + g.div.to_expr() * l.expr.clone()
        })
        .collect()
}

pub fn janet_d1(l: &LagrangianDensity, gens: &[Generator], config: &FieldConfig, p: &[f64]) -> Result<Vec<f64>> {
    let slots = config.values(p)?;
    janet_d1_exprs(l, gens).iter().map(|k| eval_total(k, p, &slots)).collect()
}

/// `v^μ(𝔎^ν) − v^ν(𝔎^μ) − c^{μν}_λ 𝔎^λ + (div ξ^μ)𝔎^ν − (div ξ^ν)𝔎^μ`.
pub fn janet_d2(
    k: &[Expr],
    gens: &[Generator],
    sc: &StructureConstants,
    config: &FieldConfig,
    p: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let d = gens.len();
    if k.len() != d || sc.dim() != d {
        return Err(Error::Shape(format!("{} components and {} structure constants for {d} generators", k.len(), sc.dim())));
    }
    let slots = config.values(p)?;
    let syms: BTreeSet<Sym> = k.iter().flat_map(|e| e.symbols()).filter(|s| *s != Sym::Pi).collect();
    let kv: Vec<f64> = k.iter().map(|e| eval_total(e, p, &slots)).collect::<Result<_>>()?;
    let grads: Vec<Vec<f64>> = k
        .iter()
        .map(|e| syms.iter().map(|&s| eval_total(&differentiate(e, s), p, &slots)).collect())
        .collect::<Result<_>>()?;
    let coeffs: Vec<Vec<f64>> = gens
        .iter()
        .map(|g| syms.iter().map(|&s| eval_total(&g.coefficient(s), p, &slots)).collect())
        .collect::<Result<_>>()?;
    let div: Vec<f64> = gens.iter().map(|g| g.div.eval(p)).collect();
    let vk = |m: usize, v: usize| coeffs[m].iter().zip(&grads[v]).map(|(a, b)| a * b).sum::<f64>();
    let mut out = vec![vec![0.0; d]; d];
    for m in 0..d {
        for v in 0..d {
            if m == v {
                continue;
            }
            let ck: f64 = (0..d).map(|l| crate::poly::q_to_f64(sc.get(m, v, l)) * kv[l]).sum();
            out[m][v] = vk(m, v) - vk(v, m) - ck + div[m] * kv[v] - div[v] * kv[m];
        }
    }
    Ok(out)
}

// -------------------------------------------------------- variational duals

#[derive(Clone, Debug, PartialEq)]
pub struct VariationalDuals {
    /// `Ĵ^i = ∂𝔏/∂𝒜̂_i`.
    pub j: Vec<f64>,
    /// `N̂^{ij} = ∂𝔏/∂ℬ̂_{ij}`.
    pub n: Vec<Vec<f64>>,
    /// `Ŝ = div Ĵ − c₀⟨ω|N̂⟩`.
    pub s: f64,
    /// `Q̂ = Ĵ + div₂ N̂ + ⟨ζ|N̂⟩`.
    pub q: Vec<f64>,
    pub div2: Vec<f64>,
    pub zeta: Vec<f64>,
    /// `max_k |Γ^k_{ij}(N̂^{ij} − N̂^{ji})|`, the gap between `γ(u)v` and `γ(v)u`.
    pub zeta_defect: f64,
}

/// `div₂(N)^j = ∂_i(N^{ij} − N^{ji})`, which is `v div u − u div v + [u, v]`
/// on `N = u ⊗ v`.
pub fn div2(nfield: &[Vec<Expr>], p: &[f64]) -> Result<Vec<f64>> {
    let n = p.len();
    let jets: Vec<Vec<Jet<f64>>> =
        nfield.iter().map(|r| r.iter().map(|e| eval_jet(e, p, 1)).collect::<std::result::Result<_, _>>()).collect::<std::result::Result<_, _>>()?;
    Ok((0..n).map(|j| (0..n).map(|i| jets[i][j].partial(&[i]) - jets[j][i].partial(&[i])).sum()).collect())
}

/// `ζ(N)^k = Γ^k_{ij} N^{ij}` and the symmetry defect.
pub fn zeta(geo: &LocalGeometry<f64>, nvals: &[Vec<f64>]) -> (Vec<f64>, f64) {
    let n = geo.n;
    let mut z = vec![0.0; n];
    let mut defect: f64 = 0.0;
    for k in 0..n {
        let mut skew = 0.0;
        for i in 0..n {
            for j in 0..n {
                let gam = geo.gamma[k][i][j].value();
                z[k] += gam * nvals[i][j];
                skew += gam * (nvals[i][j] - nvals[j][i]);
            }
        }
        defect = defect.max(skew.abs());
    }
    (z, defect)
}

pub fn variational_duals(
    l: &LagrangianDensity,
    config: &FieldConfig,
    g: &MetricField,
    c0: f64,
    p: &[f64],
) -> Result<VariationalDuals> {
    let n = l.n;
    if g.dim() != n || p.len() != n {
        return Err(Error::Shape(format!("density, metric and point must share dimension {n}")));
    }
    let geo = LocalGeometry::<f64>::at(g, p, 1)?;
    let omega = geo.g_values();
    let j_exprs: Vec<Expr> =
        (0..n).map(|i| config.restrict(&differentiate(&l.expr, Sym::A(i)))).collect::<Result<_>>()?;
    let n_exprs: Vec<Vec<Expr>> = (0..n)
        .map(|i| (0..n).map(|k| config.restrict(&differentiate(&l.expr, Sym::B(i, k)))).collect())
        .collect::<Result<_>>()?;
    let j_jets: Vec<Jet<f64>> = j_exprs.iter().map(|e| eval_jet(e, p, 1)).collect::<std::result::Result<_, _>>()?;
    let j: Vec<f64> = j_jets.iter().map(Jet::value).collect();
    let nv: Vec<Vec<f64>> =
        n_exprs.iter().map(|r| r.iter().map(|e| eval_jet(e, p, 0).map(|x| x.value())).collect()).collect::<std::result::Result<_, _>>()?;
    let div_j: f64 = (0..n).map(|i| j_jets[i].partial(&[i])).sum();
    let pair: f64 = (0..n).flat_map(|i| (0..n).map(move |k| (i, k))).map(|(i, k)| omega[i][k] * nv[i][k]).sum();
    let d2 = div2(&n_exprs, p)?;
    let (z, zeta_defect) = zeta(&geo, &nv);
    let qv = (0..n).map(|i| j[i] + d2[i] + z[i]).collect();
    Ok(VariationalDuals { j, n: nv, s: div_j - c0 * pair, q: qv, div2: d2, zeta: z, zeta_defect })
}

/// Compactly supported test variations `(δα, δβ)` on `[−1, 1]^n`.
#[derive(Clone, Debug)]
pub struct TestFields {
    pub alpha: Expr,
    pub beta: Vec<Expr>,
}

/// Midpoint-rule value of `∫ Ĵ·𝒜̂ + N̂:ℬ̂ + Ŝα + Q̂·β` over `[−1, 1]^n` with
/// `cells` cells per side, where `𝒜̂ = dα − β`, `ℬ̂ = dβ − μ` and
/// `μ_ij = Γ^k_{ij}β_k − c₀αω_ij` are built from the test fields. The
/// integral vanishes when the test fields vanish on the boundary, so the
/// returned value is pure quadrature error.
pub fn adjoint_balance(
    l: &LagrangianDensity,
    config: &FieldConfig,
    g: &MetricField,
    c0: f64,
    test: &TestFields,
    cells: usize,
) -> Result<f64> {
    let n = l.n;
    if test.beta.len() != n {
        return Err(Error::Shape(format!("test covector needs {n} components")));
    }
    let h = 2.0 / cells as f64;
    let total = cells.pow(n as u32);
    let mut sum = 0.0;
    let mut p = vec![0.0; n];
    for idx in 0..total {
        let mut r = idx;
        for c in p.iter_mut() {
            *c = -1.0 + h * ((r % cells) as f64 + 0.5);
            r /= cells;
        }
        let duals = variational_duals(l, config, g, c0, &p)?;
        let geo = LocalGeometry::<f64>::at(g, &p, 1)?;
        let omega = geo.g_values();
        let a = eval_jet(&test.alpha, &p, 1)?;
        let b: Vec<Jet<f64>> = test.beta.iter().map(|e| eval_jet(e, &p, 1)).collect::<std::result::Result<_, _>>()?;
        let mut integrand = duals.s * a.value();
        for i in 0..n {
            integrand += duals.j[i] * (a.partial(&[i]) - b[i].value()) + duals.q[i] * b[i].value();
            for k in 0..n {
                let mu: f64 = (0..n).map(|m| geo.gamma[m][i][k].value() * b[m].value()).sum::<f64>()
                    - c0 * a.value() * omega[i][k];
                integrand += duals.n[i][k] * (b[k].partial(&[i]) - b[i].partial(&[k]) - mu);
            }
        }
        sum += integrand;
    }
    Ok(sum * h.powi(n as i32))
}

/// `[ξ^{μ,k}∂_k − (η^k ξ^{μ,h}_k) 𝒜̂_h] 𝔏 − c^μ 𝔏` for a density of `x` and
/// constant `𝒜̂` only, over trace-free generators.
pub fn dirac_analogue_residual(
    l: &LagrangianDensity,
    gens: &[Generator],
    a_const: &[f64],
    eta: &[f64],
    c: &[f64],
    p: &[f64],
) -> Result<Vec<f64>> {
    let n = l.n;
    if a_const.len() != n || eta.len() != n || p.len() != n || c.len() != gens.len() {
        return Err(Error::Shape("potential, eta and point need n entries; c one per generator".into()));
    }
    if let Some(s) = l.slots.iter().find(|s| !matches!(s, Sym::A(_))) {
        return Err(Error::Precondition(format!("density depends on {s}; this case needs alpha = beta = 0 and constant A")));
    }
    if let Some(g) = gens.iter().find(|g| !g.is_trace_free()) {
        return Err(Error::Precondition(format!("generator {} has a non-vanishing trace", g.label)));
    }
    let slots: SlotValues = (0..n).map(|i| (Sym::A(i), a_const[i])).collect();
    let lv = eval_total(&l.expr, p, &slots)?;
    let grad: Vec<f64> = (0..n).map(|k| eval_total(&differentiate(&l.expr, Sym::X(k)), p, &slots)).collect::<Result<_>>()?;
    Ok(gens
        .iter()
        .zip(c)
        .map(|(g, &cm)| {
            let transport: f64 = (0..n).map(|k| g.xi[k].eval(p) * grad[k]).sum();
            let twist: f64 = (0..n)
                .flat_map(|k| (0..n).map(move |h| (k, h)))
                .map(|(k, h)| eta[k] * g.jac[h][k].eval(p) * a_const[h])
                .sum();
            transport - twist * lv - cm * lv
        })
        .collect())
}
