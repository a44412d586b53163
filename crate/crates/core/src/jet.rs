//! Truncated multivariate Taylor series ("jets").
//!
//! A jet of order `k` in `n` variables stores `∂^I f(p) / I!` for every
//! multi-index `|I| <= k`. Coefficients are ordered by total degree and then
//! lexicographically, so a lower-order jet is a prefix of a higher-order one.

use crate::real::Real;
use std::collections::HashMap;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

pub const MAX_ORDER: usize = 4;
pub const MAX_DIM: usize = 6;

#[derive(Debug)]
pub struct Layout {
    n: usize,
    order: usize,
    index: Vec<Vec<u8>>,
    degree: Vec<usize>,
    pos: HashMap<Vec<u8>, usize>,
    mul: Vec<(u32, u32, u32)>,
    // per variable: (source, destination, factor)
    deriv: Vec<Vec<(u32, u32, u32)>>,
    factorial: Vec<f64>,
}

fn multi_indices(n: usize, degree: usize) -> Vec<Vec<u8>> {
    fn rec(n: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if cur.len() == n - 1 {
            cur.push(left as u8);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for e in (0..=left).rev() {
            cur.push(e as u8);
            rec(n, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, degree, &mut Vec::new(), &mut out);
    out
}

impl Layout {
    fn build(n: usize, order: usize) -> Layout {
        assert!((1..=MAX_DIM).contains(&n), "jet dimension {n} outside 1..={MAX_DIM}");
        assert!(order <= MAX_ORDER, "jet order {order} above {MAX_ORDER}");
        let mut index = Vec::new();
        for d in 0..=order {
            index.extend(multi_indices(n, d));
        }
        let degree: Vec<usize> = index.iter().map(|m| m.iter().map(|&e| e as usize).sum()).collect();
        let pos: HashMap<Vec<u8>, usize> = index.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        let mut mul = Vec::new();
        for (i, a) in index.iter().enumerate() {
            for (j, b) in index.iter().enumerate() {
                if degree[i] + degree[j] <= order {
                    let s: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                    mul.push((i as u32, j as u32, pos[&s] as u32));
                }
            }
        }
        let mut deriv = vec![Vec::new(); n];
        for (v, table) in deriv.iter_mut().enumerate() {
            for (dst, m) in index.iter().enumerate() {
                if degree[dst] < order {
                    let mut s = m.clone();
                    s[v] += 1;
                    table.push((pos[&s] as u32, dst as u32, s[v] as u32));
                }
            }
        }
        let factorial = index
            .iter()
            .map(|m| m.iter().map(|&e| (1..=e as u64).product::<u64>() as f64).product())
            .collect();
        Layout { n, order, index, degree, pos, mul, deriv, factorial }
    }

    pub fn get(n: usize, order: usize) -> Arc<Layout> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Layout>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("layout cache poisoned");
        guard.entry((n, order)).or_insert_with(|| Arc::new(Layout::build(n, order))).clone()
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.degree[i]
    }

    pub fn multi_index(&self, i: usize) -> &[u8] {
        &self.index[i]
    }

    pub fn position(&self, m: &[u8]) -> Option<usize> {
        self.pos.get(m).copied()
    }
}

#[derive(Clone, Debug)]
pub struct Jet<T> {
    layout: Arc<Layout>,
    c: Vec<T>,
}

impl<T: Real> Jet<T> {
    pub fn constant(n: usize, order: usize, v: T) -> Self {
        let layout = Layout::get(n, order);
        let mut c = vec![T::zero(); layout.len()];
        c[0] = v;
        Jet { layout, c }
    }

    /// The coordinate function `x_i` expanded at a point whose `i`-th coordinate is `v`.
    pub fn variable(n: usize, order: usize, i: usize, v: T) -> Self {
        let mut j = Self::constant(n, order, v);
        if order > 0 {
            let mut m = vec![0u8; n];
            m[i] = 1;
            let p = j.layout.pos[&m];
            j.c[p] = T::one();
        }
        j
    }

    pub fn from_coeffs(n: usize, order: usize, c: Vec<T>) -> Self {
        let layout = Layout::get(n, order);
        assert_eq!(c.len(), layout.len(), "coefficient count does not match layout");
        Jet { layout, c }
    }

    pub fn dim(&self) -> usize {
        self.layout.n
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn value(&self) -> T {
        self.c[0]
    }

    pub fn coeffs(&self) -> &[T] {
        &self.c
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    /// Taylor coefficient `∂^I f / I!` for the exponent vector `m`.
    pub fn coeff(&self, m: &[u8]) -> T {
        self.layout.position(m).map(|p| self.c[p]).unwrap_or_else(T::zero)
    }

    /// Partial derivative along the listed variables (repeats allowed).
    pub fn partial(&self, vars: &[usize]) -> T {
        let mut m = vec![0u8; self.dim()];
        for &v in vars {
            m[v] += 1;
        }
        match self.layout.position(&m) {
            Some(p) => self.c[p] * T::lit(self.layout.factorial[p]),
            None => panic!("partial of order {} requested from a jet of order {}", vars.len(), self.order()),
        }
    }

    pub fn gradient(&self) -> Vec<T> {
        (0..self.dim()).map(|i| self.partial(&[i])).collect()
    }

    pub fn truncate(&self, order: usize) -> Self {
        if order >= self.order() {
            return self.clone();
        }
        let layout = Layout::get(self.dim(), order);
        let c = self.c[..layout.len()].to_vec();
        Jet { layout, c }
    }

    /// Exact derivative of the represented polynomial; the order drops by one.
    pub fn deriv(&self, var: usize) -> Self {
        assert!(self.order() > 0, "cannot differentiate an order-0 jet");
        let layout = Layout::get(self.dim(), self.order() - 1);
        let mut c = vec![T::zero(); layout.len()];
        for &(src, dst, f) in &self.layout.deriv[var] {
            c[dst as usize] = self.c[src as usize] * T::lit(f as f64);
        }
        Jet { layout, c }
    }

    fn zip_order(&self, other: &Self) -> (Self, Self) {
        assert_eq!(self.dim(), other.dim(), "jets over different dimensions");
        let k = self.order().min(other.order());
        (self.truncate(k), other.truncate(k))
    }

    pub fn scale(&self, s: T) -> Self {
        Jet { layout: self.layout.clone(), c: self.c.iter().map(|&x| x * s).collect() }
    }

    pub fn add_scalar(&self, s: T) -> Self {
        let mut out = self.clone();
        out.c[0] = out.c[0] + s;
        out
    }

    pub fn zero_like(&self) -> Self {
        Jet { layout: self.layout.clone(), c: vec![T::zero(); self.c.len()] }
    }

    pub fn const_like(&self, v: T) -> Self {
        let mut z = self.zero_like();
        z.c[0] = v;
        z
    }

    fn mul_same(&self, other: &Self) -> Self {
        let mut c = vec![T::zero(); self.c.len()];
        for &(i, j, o) in &self.layout.mul {
            c[o as usize] = c[o as usize] + self.c[i as usize] * other.c[j as usize];
        }
        Jet { layout: self.layout.clone(), c }
    }

    /// `f(self)` given `f^(m)(a0)` for `m = 0..=order`.
    pub fn compose(&self, derivs: &[T]) -> Self {
        let k = self.order();
        assert!(derivs.len() > k, "need {} derivatives for order-{k} composition", k + 1);
        let mut h = self.clone();
        h.c[0] = T::zero();
        let mut fact = T::one();
        let mut taylor = Vec::with_capacity(k + 1);
        for (m, &d) in derivs.iter().enumerate().take(k + 1) {
            if m > 0 {
                fact = fact * T::lit(m as f64);
            }
            taylor.push(d / fact);
        }
        let mut acc = self.const_like(taylor[k]);
        for m in (0..k).rev() {
            acc = acc.mul_same(&h).add_scalar(taylor[m]);
        }
        acc
    }

    /// `self ∘ inner`, where `self` is expanded at the values of `inner` and
    /// `inner[i]` is the jet of its i-th argument. The order is the smaller of
    /// the two.
    pub fn substitute(&self, inner: &[Jet<T>]) -> Self {
        assert_eq!(inner.len(), self.dim(), "one inner jet per variable");
        let k = self.order().min(inner[0].order());
        let one = inner[0].truncate(k).const_like(T::one());
        let powers: Vec<Vec<Jet<T>>> = inner
            .iter()
            .map(|j| {
                let s = j.truncate(k).add_scalar(-j.value());
                let mut v = vec![one.clone()];
                for e in 1..=k {
                    let next = &v[e - 1] * &s;
                    v.push(next);
                }
                v
            })
            .collect();
        let mut acc = one.zero_like();
        for p in 0..self.c.len() {
            if self.layout.degree[p] > k {
                break;
            }
            if self.c[p] == T::zero() {
                continue;
            }
            let mut term = one.scale(self.c[p]);
            for (i, &e) in self.layout.index[p].iter().enumerate() {
                if e > 0 {
                    term = &term * &powers[i][e as usize];
                }
            }
            acc = acc + term;
        }
        acc
    }

    pub fn recip(&self) -> Self {
        let a = self.value();
        let mut d = Vec::with_capacity(self.order() + 1);
        let mut coef = T::one();
        for m in 0..=self.order() {
            d.push(coef / a.powi(m as i32 + 1));
            coef = -coef * T::lit((m + 1) as f64);
        }
        self.compose(&d)
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        self.compose(&vec![e; self.order() + 1])
    }

    pub fn ln(&self) -> Self {
        let a = self.value();
        let mut d = vec![a.ln()];
        let mut coef = T::one();
        for m in 1..=self.order() {
            d.push(coef / a.powi(m as i32));
            coef = -coef * T::lit(m as f64);
        }
        self.compose(&d)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = (self.value().sin(), self.value().cos());
        let cycle = [s, c, -s, -c];
        self.compose(&(0..=self.order()).map(|m| cycle[m % 4]).collect::<Vec<_>>())
    }

    pub fn cos(&self) -> Self {
        let (s, c) = (self.value().sin(), self.value().cos());
        let cycle = [c, -s, -c, s];
        self.compose(&(0..=self.order()).map(|m| cycle[m % 4]).collect::<Vec<_>>())
    }

    /// Real power `a^q` for a positive base, via the generalized binomial series.
    fn pow_series(&self, q: T) -> Self {
        let a = self.value();
        let mut d = Vec::with_capacity(self.order() + 1);
        let mut falling = T::one();
        for m in 0..=self.order() {
            d.push(falling * a.powf(q - T::lit(m as f64)));
            falling = falling * (q - T::lit(m as f64));
        }
        self.compose(&d)
    }

    pub fn sqrt(&self) -> Self {
        self.pow_series(T::lit(0.5))
    }

    pub fn tanh(&self) -> Self {
        // d/dx p(t) = p'(t) (1 - t^2) with t = tanh x; track p as polynomial coefficients
        let t = self.value().tanh();
        let mut poly: Vec<T> = vec![T::zero(), T::one()];
        let mut d = Vec::with_capacity(self.order() + 1);
        for _ in 0..=self.order() {
            d.push(poly.iter().rev().fold(T::zero(), |acc, &c| acc * t + c));
            let dp: Vec<T> = (1..poly.len()).map(|i| poly[i] * T::lit(i as f64)).collect();
            let mut next = vec![T::zero(); dp.len() + 2];
            for (i, &c) in dp.iter().enumerate() {
                next[i] = next[i] + c;
                next[i + 2] = next[i + 2] - c;
            }
            poly = next;
        }
        self.compose(&d)
    }

    /// Sign-flipped copy; only meaningful away from zero.
    pub fn abs(&self) -> Self {
        if self.value() < T::zero() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn powi(&self, e: i32) -> Self {
        let base = if e < 0 { self.recip() } else { self.clone() };
        let mut acc = self.const_like(T::one());
        for _ in 0..e.unsigned_abs() {
            acc = &acc * &base;
        }
        acc
    }

    pub fn powf(&self, q: T) -> Self {
        (&self.ln().scale(q)).exp()
    }
}

impl<'a, T: Real> Add<&'a Jet<T>> for &'a Jet<T> {
    type Output = Jet<T>;
    fn add(self, o: &Jet<T>) -> Jet<T> {
        let (a, b) = self.zip_order(o);
        Jet { layout: a.layout.clone(), c: a.c.iter().zip(&b.c).map(|(&x, &y)| x + y).collect() }
    }
}

impl<'a, T: Real> Sub<&'a Jet<T>> for &'a Jet<T> {
    type Output = Jet<T>;
    fn sub(self, o: &Jet<T>) -> Jet<T> {
        let (a, b) = self.zip_order(o);
        Jet { layout: a.layout.clone(), c: a.c.iter().zip(&b.c).map(|(&x, &y)| x - y).collect() }
    }
}

impl<'a, T: Real> Mul<&'a Jet<T>> for &'a Jet<T> {
    type Output = Jet<T>;
    fn mul(self, o: &Jet<T>) -> Jet<T> {
        if self.order() == o.order() {
            return self.mul_same(o);
        }
        let (a, b) = self.zip_order(o);
        a.mul_same(&b)
    }
}

impl<'a, T: Real> Div<&'a Jet<T>> for &'a Jet<T> {
    type Output = Jet<T>;
    fn div(self, o: &Jet<T>) -> Jet<T> {
        self * &o.recip()
    }
}

impl<T: Real> Neg for &Jet<T> {
    type Output = Jet<T>;
    fn neg(self) -> Jet<T> {
        self.scale(-T::one())
    }
}

macro_rules! owned_ops {
    ($($tr:ident $f:ident),*) => {$(
        impl<T: Real> $tr<Jet<T>> for Jet<T> {
            type Output = Jet<T>;
            fn $f(self, o: Jet<T>) -> Jet<T> { <&Jet<T> as $tr<&Jet<T>>>::$f(&self, &o) }
        }
        impl<'a, T: Real> $tr<&'a Jet<T>> for Jet<T> {
            type Output = Jet<T>;
            fn $f(self, o: &Jet<T>) -> Jet<T> { <&Jet<T> as $tr<&Jet<T>>>::$f(&self, o) }
        }
        impl<'a, T: Real> $tr<Jet<T>> for &'a Jet<T> {
            type Output = Jet<T>;
            fn $f(self, o: Jet<T>) -> Jet<T> { <&Jet<T> as $tr<&Jet<T>>>::$f(self, &o) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul, Div div);

impl<T: Real> Neg for Jet<T> {
    type Output = Jet<T>;
    fn neg(self) -> Jet<T> {
        -&self
    }
}

/// Minimal field interface shared by plain scalars and jets, so that small
/// dense linear algebra is written once.
pub trait FieldElem: Clone + Sized {
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn magnitude(&self) -> f64;
    fn zero_as(&self) -> Self;
    fn one_as(&self) -> Self;
}

impl<T: Real> FieldElem for T {
    fn add(&self, o: &Self) -> Self {
        *self + *o
    }
    fn sub(&self, o: &Self) -> Self {
        *self - *o
    }
    fn mul(&self, o: &Self) -> Self {
        *self * *o
    }
    fn div(&self, o: &Self) -> Self {
        *self / *o
    }
    fn magnitude(&self) -> f64 {
        self.as_f64().abs()
    }
    fn zero_as(&self) -> Self {
        T::zero()
    }
    fn one_as(&self) -> Self {
        T::one()
    }
}

impl<T: Real> FieldElem for Jet<T> {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn magnitude(&self) -> f64 {
        self.value().as_f64().abs()
    }
    fn zero_as(&self) -> Self {
        self.zero_like()
    }
    fn one_as(&self) -> Self {
        self.const_like(T::one())
    }
}

/// Gauss-Jordan inverse with partial pivoting on magnitudes. Returns the
/// inverse and the determinant, or `None` when a pivot falls below `tol`.
pub fn invert<F: FieldElem>(m: &[Vec<F>], tol: f64) -> Option<(Vec<Vec<F>>, F)> {
    let n = m.len();
    let mut a: Vec<Vec<F>> = m.to_vec();
    let one = a[0][0].one_as();
    let zero = a[0][0].zero_as();
    let mut inv: Vec<Vec<F>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { one.clone() } else { zero.clone() }).collect()).collect();
    let mut det = one.clone();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].magnitude().total_cmp(&a[j][col].magnitude()))?;
        if a[piv][col].magnitude() < tol {
            return None;
        }
        if piv != col {
            a.swap(piv, col);
            inv.swap(piv, col);
            det = zero.sub(&det);
        }
        let p = a[col][col].clone();
        det = det.mul(&p);
        for j in 0..n {
            a[col][j] = a[col][j].div(&p);
            inv[col][j] = inv[col][j].div(&p);
        }
        for i in 0..n {
            if i != col {
                let f = a[i][col].clone();
                for j in 0..n {
                    a[i][j] = a[i][j].sub(&f.mul(&a[col][j]));
                    inv[i][j] = inv[i][j].sub(&f.mul(&inv[col][j]));
                }
            }
        }
    }
    Some((inv, det))
}

pub fn mat_mul<F: FieldElem>(a: &[Vec<F>], b: &[Vec<F>]) -> Vec<Vec<F>> {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut s = a[i][0].mul(&b[0][j]);
                    for l in 1..k {
                        s = s.add(&a[i][l].mul(&b[l][j]));
                    }
                    s
                })
                .collect()
        })
        .collect()
}
