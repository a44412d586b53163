//! Polarized-crystal carrier phenomenology: susceptibility transport under
//! Lorentz maps, the effective magnetic field built from `w = −P·v`, its
//! monopole density, and trajectory integration with invariant monitors.
//!
//! Signature `(−, +, +, +)`, `c = 1`. Spatial positions `r` are the chart
//! coordinates `x1, x2, x3` of the polarization expressions.

use crate::error::{Error, Result};
use crate::expr::{eval_jet, Expr};
use crate::jet::Jet;
use crate::real::Real;

pub type Mat4<T> = [[T; 4]; 4];
/// Linear map on 4×4 tensors, row/column index `4μ + ν`.
pub type Susceptibility<T> = Vec<Vec<T>>;

pub const LORENTZ_TOL: f64 = 1e-10;
/// `w̃·ũ` drift above which the derivation's premise is flagged.
pub const PREMISE_TOL: f64 = 1e-6;
pub const CSV_HEADER: &str = "t,r1,r2,r3,u0,u1,u2,u3,omega_uu,w_dot_u,monopole_density";

fn eta<T: Real>(i: usize) -> T {
    if i == 0 {
        -T::one()
    } else {
        T::one()
    }
}

pub fn minkowski_dot<T: Real>(a: &[T; 4], b: &[T; 4]) -> T {
    (0..4).fold(T::zero(), |s, i| s + eta::<T>(i) * a[i] * b[i])
}

fn mat_mul4<T: Real>(a: &Mat4<T>, b: &Mat4<T>) -> Mat4<T> {
    let mut out = [[T::zero(); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).fold(T::zero(), |s, k| s + a[i][k] * b[k][j]);
        }
    }
    out
}

pub fn boost_x<T: Real>(rapidity: T) -> Mat4<T> {
    let (c, s) = (rapidity.cosh(), rapidity.sinh());
    let mut m = identity4();
    m[0][0] = c;
    m[0][1] = s;
    m[1][0] = s;
    m[1][1] = c;
    m
}

pub fn rotation_z<T: Real>(theta: T) -> Mat4<T> {
    let (c, s) = (theta.cos(), theta.sin());
    let mut m = identity4();
    m[1][1] = c;
    m[1][2] = -s;
    m[2][1] = s;
    m[2][2] = c;
    m
}

pub fn identity4<T: Real>() -> Mat4<T> {
    let mut m = [[T::zero(); 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = T::one();
    }
    m
}

/// Largest entry of `Λᵀ η Λ − η`.
pub fn lorentz_defect<T: Real>(l: &Mat4<T>) -> T {
    let mut worst = T::zero();
    for a in 0..4 {
        for b in 0..4 {
            let v = (0..4).fold(T::zero(), |s, k| s + l[k][a] * eta::<T>(k) * l[k][b]);
            let want = if a == b { eta::<T>(a) } else { T::zero() };
            worst = worst.max((v - want).abs());
        }
    }
    worst
}

/// `Λ⊗Λ` acting on `X ↦ Λ X Λᵀ`.
fn kron<T: Real>(l: &Mat4<T>) -> Susceptibility<T> {
    (0..16).map(|r| (0..16).map(|c| l[r / 4][c / 4] * l[r % 4][c % 4]).collect()).collect()
}

/// `χ = (Λ⊗Λ) χ′ (Λ⊗Λ)⁻¹`, with `Λ⁻¹ = η Λᵀ η`.
pub fn transport_susceptibility<T: Real>(chi_prime: &Susceptibility<T>, lambda: &Mat4<T>) -> Result<Susceptibility<T>> {
    if chi_prime.len() != 16 || chi_prime.iter().any(|r| r.len() != 16) {
        return Err(Error::Shape("susceptibility must be 16×16".into()));
    }
    let defect = lorentz_defect(lambda);
    if defect > T::lit(LORENTZ_TOL) {
        return Err(Error::Precondition(format!("matrix is not a Lorentz transformation (defect {:e})", defect.as_f64())));
    }
    let mut inv = [[T::zero(); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            inv[i][j] = eta::<T>(i) * lambda[j][i] * eta::<T>(j);
        }
    }
    let (k, kinv) = (kron(lambda), kron(&inv));
    let mul = |a: &Susceptibility<T>, b: &Susceptibility<T>| -> Susceptibility<T> {
        (0..16).map(|i| (0..16).map(|j| (0..16).fold(T::zero(), |s, m| s + a[i][m] * b[m][j])).collect()).collect()
    };
    Ok(mul(&mul(&k, chi_prime), &kinv))
}

pub fn apply_susceptibility<T: Real>(chi: &Susceptibility<T>, f: &Mat4<T>) -> Mat4<T> {
    let mut out = [[T::zero(); 4]; 4];
    for r in 0..16 {
        out[r / 4][r % 4] = (0..16).fold(T::zero(), |s, c| s + chi[r][c] * f[c / 4][c % 4]);
    }
    out
}

/// `Λ X Λᵀ`.
pub fn transport_tensor<T: Real>(x: &Mat4<T>, lambda: &Mat4<T>) -> Mat4<T> {
    let mut lt = [[T::zero(); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            lt[i][j] = lambda[j][i];
        }
    }
    mat_mul4(&mat_mul4(lambda, x), &lt)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolarizationMode {
    /// `w̃ = −P·ṽ`
    Direct,
    /// `w̃ = ∗P·ṽ`, with `∗P^{μν} = ½ ε^{μνρσ} P_{ρσ}` and `ε^{0123} = 1`.
    Dual,
}

/// Antisymmetric polarization tensor over `r`, stored by its upper entries
/// `P^{01}, P^{02}, P^{03}, P^{12}, P^{13}, P^{23}`.
#[derive(Clone, Debug)]
pub struct PolarizationField {
    pub upper: [Expr; 6],
    pub v: [f64; 3],
    pub mode: PolarizationMode,
    pub m: f64,
    pub e: f64,
}

const UPPER: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

impl PolarizationField {
    pub fn new(upper: [Expr; 6], v: [f64; 3], mode: PolarizationMode, m: f64, e: f64) -> Result<Self> {
        if !(m > 0.0) || e == 0.0 {
            return Err(Error::Precondition(format!("carrier needs m > 0 and e != 0 (m = {m}, e = {e})")));
        }
        for ex in &upper {
            if let Some(s) = ex.symbols().into_iter().find(|s| !matches!(s, crate::Sym::X(i) if *i < 3) && *s != crate::Sym::Pi) {
                return Err(Error::Precondition(format!("polarization entries depend on x1..x3 only, found {s}")));
            }
        }
        Ok(PolarizationField { upper, v, mode, m, e })
    }

    /// The showcase field: `v = e3`, direct mode, `m/e = 4`, and
    /// `w = (0.3 tanh x3 + 0.2 sin x2, 0.25 sin x1 − 0.15 tanh x3, 0)`.
    /// `|w| < 0.64` everywhere, and the effective field has a nonzero
    /// divergence.
    pub fn showcase() -> Self {
        let p = |t: &str| crate::expr::parse(t, 3).expect("showcase expression");
        let upper = [p("0"), p("0"), p("0"), p("0"), p("-(0.3*tanh(x3) + 0.2*sin(x2))"), p("-(0.25*sin(x1) - 0.15*tanh(x3))")];
        PolarizationField::new(upper, [0.0, 0.0, 1.0], PolarizationMode::Direct, 2.0, 0.5).expect("valid showcase")
    }

    /// `P^{μν}` as jets at `r`.
    fn tensor<T: Real>(&self, r: &[T; 3], order: usize) -> Result<Vec<Vec<Jet<T>>>> {
        let zero = Jet::constant(3, order, T::zero());
        let mut p = vec![vec![zero; 4]; 4];
        for (k, &(a, b)) in UPPER.iter().enumerate() {
            let j = eval_jet(&self.upper[k], r, order)?;
            p[b][a] = -&j;
            p[a][b] = j;
        }
        Ok(p)
    }

    /// Spatial part of `w̃` as jets at `r`; the time component of `−P·ṽ`
    /// is discarded (`w̃ = (0, w⃗)`).
    pub fn w_jets<T: Real>(&self, r: &[T; 3], order: usize) -> Result<[Jet<T>; 3]> {
        let p = self.tensor(r, order)?;
        let v: Vec<T> = self.v.iter().map(|&x| T::lit(x)).collect();
        let w = |i: usize| -> Jet<T> {
            let mut acc = p[0][0].zero_like();
            for j in 1..4 {
                let coeff = match self.mode {
                    // −P^{ij} v_j
                    PolarizationMode::Direct => -&p[i][j],
                    // ∗P^{ij} = −ε_{ijk} P^{0k}
                    PolarizationMode::Dual => {
                        let k = 6 - i - j;
                        if i == j {
                            continue;
                        }
                        p[0][k].scale(-levi3::<T>(i, j, k))
                    }
                };
                acc = acc + coeff.scale(v[j - 1]);
            }
            acc
        };
        Ok([w(1), w(2), w(3)])
    }

    pub fn w<T: Real>(&self, r: &[T; 3]) -> Result<[T; 3]> {
        let j = self.w_jets(r, 0)?;
        Ok([j[0].value(), j[1].value(), j[2].value()])
    }
}

/// `ε_{ijk}` on spatial indices 1..=3.
fn levi3<T: Real>(i: usize, j: usize, k: usize) -> T {
    match (i, j, k) {
        (1, 2, 3) | (2, 3, 1) | (3, 1, 2) => T::one(),
        (1, 3, 2) | (3, 2, 1) | (2, 1, 3) => -T::one(),
        _ => T::zero(),
    }
}

fn cross<T: Real>(a: &[Jet<T>; 3], b: &[Jet<T>; 3]) -> [Jet<T>; 3] {
    [&a[1] * &b[2] - &a[2] * &b[1], &a[2] * &b[0] - &a[0] * &b[2], &a[0] * &b[1] - &a[1] * &b[0]]
}

/// `B_eff = (m/e)(γ/(1+γ)) w × (u⃗·∇)w` as jets of order `order` at `r`.
fn b_eff_jets<T: Real>(pf: &PolarizationField, u: &[T; 4], r: &[T; 3], order: usize) -> Result<[Jet<T>; 3]> {
    let w = pf.w_jets(r, order + 1)?;
    let w2 = (&w[0] * &w[0] + &w[1] * &w[1] + &w[2] * &w[2]).truncate(order);
    if w2.value() >= T::one() {
        return Err(Error::Precondition(format!("|w| = {} >= 1 at r = {r:?}; gamma is undefined", w2.value().sqrt())));
    }
    let gamma = (&w2.const_like(T::one()) - &w2).sqrt().recip();
    let k = (&gamma / &gamma.add_scalar(T::one())).scale(T::lit(pf.m / pf.e));
    let dw: [Jet<T>; 3] = std::array::from_fn(|i| {
        (0..3).fold(w[i].deriv(0).zero_like(), |acc, j| acc + w[i].deriv(j).scale(u[j + 1]))
    });
    let wt: [Jet<T>; 3] = std::array::from_fn(|i| w[i].truncate(order));
    let c = cross(&wt, &dw);
    Ok(std::array::from_fn(|i| &k * &c[i]))
}

/// `(B_eff, E_eff)` at `r` for a carrier with 4-velocity `u`; `E_eff = 0`.
pub fn effective_faraday<T: Real>(pf: &PolarizationField, u: &[T; 4], r: &[T; 3]) -> Result<([T; 3], [T; 3])> {
    let b = b_eff_jets(pf, u, r, 0)?;
    Ok(([b[0].value(), b[1].value(), b[2].value()], [T::zero(); 3]))
}

/// `div_r B_eff` at fixed `u`.
pub fn monopole_density<T: Real>(pf: &PolarizationField, u: &[T; 4], r: &[T; 3]) -> Result<T> {
    let b = b_eff_jets(pf, u, r, 1)?;
    Ok((0..3).fold(T::zero(), |s, i| s + b[i].partial(&[i])))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CarrierState<T> {
    pub t: T,
    pub u: [T; 4],
    pub r: [T; 3],
}

#[derive(Clone, Debug)]
pub struct Trajectory<T> {
    pub samples: Vec<CarrierState<T>>,
    pub dt: T,
}

type Deriv<T> = ([T; 4], [T; 3]);

/// Right-hand side of `dũ/dt = (−e/m) F_eff·ũ` with `E_eff = 0`:
/// `du⃗/dt = −(e/m) u⃗ × B_eff`, `du⁰/dt = 0`, `dr/dt = u⃗/u⁰`.
fn rhs<T: Real>(pf: &PolarizationField, u: &[T; 4], r: &[T; 3]) -> Result<Deriv<T>> {
    let (b, _) = effective_faraday(pf, u, r)?;
    let s = -T::lit(pf.e / pf.m);
    let du = [
        T::zero(),
        s * (u[2] * b[2] - u[3] * b[1]),
        s * (u[3] * b[0] - u[1] * b[2]),
        s * (u[1] * b[1] - u[2] * b[0]),
    ];
    Ok((du, [u[1] / u[0], u[2] / u[0], u[3] / u[0]]))
}

fn advance<T: Real>(st: &CarrierState<T>, k: &Deriv<T>, h: T) -> CarrierState<T> {
    CarrierState {
        t: st.t + h,
        u: std::array::from_fn(|i| st.u[i] + h * k.0[i]),
        r: std::array::from_fn(|i| st.r[i] + h * k.1[i]),
    }
}

/// Classic fourth-order Runge–Kutta with `floor(t_end/dt)` steps.
pub fn integrate_motion<T: Real>(
    pf: &PolarizationField,
    initial: CarrierState<T>,
    t_end: T,
    dt: T,
) -> Result<Trajectory<T>> {
    if !(dt > T::zero()) || t_end < T::zero() {
        return Err(Error::Precondition("need dt > 0 and t_end >= 0".into()));
    }
    let norm = minkowski_dot(&initial.u, &initial.u);
    if (norm + T::one()).abs() > T::lit(1e-10) || initial.u[0] <= T::zero() {
        return Err(Error::Precondition(format!("initial velocity must be future unit timelike, ω(u,u) = {norm}")));
    }
    pf.w_jets(&initial.r, 0).and_then(|_| effective_faraday(pf, &initial.u, &initial.r))?;
    let steps = (t_end / dt + T::lit(1e-9)).floor().to_usize().unwrap_or(0);
    let half = dt / T::lit(2.0);
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(initial);
    let mut st = initial;
    for step in 0..steps {
        let k1 = rhs(pf, &st.u, &st.r)?;
        let s2 = advance(&st, &k1, half);
        let k2 = rhs(pf, &s2.u, &s2.r)?;
        let s3 = advance(&st, &k2, half);
        let k3 = rhs(pf, &s3.u, &s3.r)?;
        let s4 = advance(&st, &k3, dt);
        let k4 = rhs(pf, &s4.u, &s4.r)?;
        let six = T::lit(6.0);
        let two = T::lit(2.0);
        let comb: Deriv<T> = (
            std::array::from_fn(|i| (k1.0[i] + two * k2.0[i] + two * k3.0[i] + k4.0[i]) / six),
            std::array::from_fn(|i| (k1.1[i] + two * k2.1[i] + two * k3.1[i] + k4.1[i]) / six),
        );
        st = advance(&st, &comb, dt);
        st.t = initial.t + dt * T::lit((step + 1) as f64);
        let drift = (minkowski_dot(&st.u, &st.u) + T::one()).abs();
        if !drift.is_finite() || drift > T::lit(1e-3) {
            return Err(Error::Consistency(format!("step {} rejected: ω(u,u) drifted by {:e}", step + 1, drift.as_f64())));
        }
        samples.push(st);
    }
    Ok(Trajectory { samples, dt })
}

/// `w̃·ũ` with `w̃ = (0, w⃗)`.
pub fn w_dot_u<T: Real>(pf: &PolarizationField, st: &CarrierState<T>) -> Result<T> {
    let w = pf.w(&st.r)?;
    Ok(w[0] * st.u[1] + w[1] * st.u[2] + w[2] * st.u[3])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonitorReport<T> {
    /// `max |ω(u,u) − ω(u₀,u₀)|`.
    pub norm_drift: T,
    /// `max |w̃·ũ − (w̃·ũ)₀|`.
    pub w_dot_u_drift: T,
    /// `w_dot_u_drift > PREMISE_TOL`.
    pub premise_violated: bool,
}

pub fn invariant_monitors<T: Real>(traj: &Trajectory<T>, pf: &PolarizationField) -> Result<MonitorReport<T>> {
    let Some(first) = traj.samples.first() else {
        return Ok(MonitorReport { norm_drift: T::zero(), w_dot_u_drift: T::zero(), premise_violated: false });
    };
    let n0 = minkowski_dot(&first.u, &first.u);
    let wu0 = w_dot_u(pf, first)?;
    let mut report = MonitorReport { norm_drift: T::zero(), w_dot_u_drift: T::zero(), premise_violated: false };
    for st in &traj.samples {
        report.norm_drift = report.norm_drift.max((minkowski_dot(&st.u, &st.u) - n0).abs());
        report.w_dot_u_drift = report.w_dot_u_drift.max((w_dot_u(pf, st)? - wu0).abs());
    }
    report.premise_violated = report.w_dot_u_drift > T::lit(PREMISE_TOL);
    Ok(report)
}

/// Largest deviation between the central-difference acceleration of the
/// sampled trajectory and the force law, `O(dt²)` for a converged run.
pub fn equation_residual<T: Real>(traj: &Trajectory<T>, pf: &PolarizationField) -> Result<T> {
    let s = &traj.samples;
    let mut worst = T::zero();
    for i in 1..s.len().saturating_sub(1) {
        let (du, _) = rhs(pf, &s[i].u, &s[i].r)?;
        for k in 0..4 {
            let fd = (s[i + 1].u[k] - s[i - 1].u[k]) / (T::lit(2.0) * traj.dt);
            worst = worst.max((fd - du[k]).abs());
        }
    }
    Ok(worst)
}

/// One row per sample, columns as in [`CSV_HEADER`].
pub fn trajectory_rows<T: Real>(traj: &Trajectory<T>, pf: &PolarizationField) -> Result<Vec<[T; 11]>> {
    traj.samples
        .iter()
        .map(|st| {
            let rho = monopole_density(pf, &st.u, &st.r)?;
            Ok([
                st.t,
                st.r[0],
                st.r[1],
                st.r[2],
                st.u[0],
                st.u[1],
                st.u[2],
                st.u[3],
                minkowski_dot(&st.u, &st.u),
                w_dot_u(pf, st)?,
                rho,
            ])
        })
        .collect()
}

/// Unit timelike 4-velocity with spatial part `u⃗`.
pub fn four_velocity<T: Real>(spatial: [T; 3]) -> [T; 4] {
    let s2 = spatial.iter().fold(T::zero(), |s, &x| s + x * x);
    [(T::one() + s2).sqrt(), spatial[0], spatial[1], spatial[2]]
}
