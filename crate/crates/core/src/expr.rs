//! Scalar expressions over chart coordinates and field slots: parsing,
//! printing, symbolic differentiation and jet evaluation.

use crate::jet::Jet;
use crate::real::Real;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use thiserror::Error;

/// Leaf symbols. Indices are zero-based internally and one-based in text.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sym {
    X(usize),
    Alpha,
    Beta(usize),
    A(usize),
    B(usize, usize),
    C0,
    Pi,
}

impl Sym {
    pub fn is_slot(&self) -> bool {
        matches!(self, Sym::Alpha | Sym::Beta(_) | Sym::A(_) | Sym::B(_, _))
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sym::X(i) => write!(f, "x{}", i + 1),
            Sym::Alpha => write!(f, "alpha"),
            Sym::Beta(i) => write!(f, "beta{}", i + 1),
            Sym::A(i) => write!(f, "A{}", i + 1),
            Sym::B(i, j) => write!(f, "B{}{}", i + 1, j + 1),
            Sym::C0 => write!(f, "c0"),
            Sym::Pi => write!(f, "pi"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
    Sqrt,
    Tanh,
    Abs,
}

impl Func {
    pub fn name(&self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Tanh => "tanh",
            Func::Abs => "abs",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            "tanh" => Func::Tanh,
            "abs" => Func::Abs,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Sym(Sym),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// Integer exponent, evaluated by repeated multiplication.
    PowI(Box<Expr>, i32),
    /// Constant real exponent, evaluated as `exp(q ln u)`.
    PowF(Box<Expr>, f64),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownIdent(String),
    Arity { func: String, expected: usize, found: usize },
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{} at column {}", describe(.kind), .pos + 1)]
pub struct ParseError {
    /// Zero-based character offset.
    pub pos: usize,
    pub kind: ParseErrorKind,
}

fn describe(k: &ParseErrorKind) -> String {
    match k {
        ParseErrorKind::Syntax(m) => format!("syntax error: {m}"),
        ParseErrorKind::UnknownIdent(s) => format!("unknown identifier '{s}'"),
        ParseErrorKind::Arity { func, expected, found } => {
            format!("{func} takes {expected} argument(s), found {found}")
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("domain error in {op}: {subexpr}")]
    Domain { op: &'static str, subexpr: String },
    #[error("unbound symbol {0}")]
    Unbound(String),
}

// ---------------------------------------------------------------- building

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn x(i: usize) -> Expr {
        Expr::Sym(Sym::X(i))
    }

    pub fn sym(s: Sym) -> Expr {
        Expr::Sym(s)
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            Expr::Num(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_num() == Some(0.0)
    }

    /// Polynomial of total degree `<= degree` in `n` coordinates, centred at
    /// `center`, with one coefficient drawn from `coeff` per monomial
    /// (degree-ordered, constant term first).
    pub fn polynomial(n: usize, degree: usize, center: &[f64], coeff: &mut dyn FnMut() -> f64) -> Expr {
        fn walk(n: usize, start: usize, left: usize, m: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            out.push(m.clone());
            if left == 0 {
                return;
            }
            for i in start..n {
                m.push(i);
                walk(n, i, left - 1, m, out);
                m.pop();
            }
        }
        let mut monos = Vec::new();
        walk(n, 0, degree, &mut Vec::new(), &mut monos);
        monos.sort_by_key(|m| m.len());
        let mut acc = Expr::Num(0.0);
        for m in monos {
            let c = coeff();
            let term = m.iter().fold(Expr::Num(c), |t, &i| {
                let xi = if center[i] == 0.0 { Expr::x(i) } else { Expr::x(i) - Expr::Num(center[i]) };
                t * xi
            });
            acc = acc + term;
        }
        acc
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::Call(f, Box::new(a))
    }

    pub fn powi(self, k: i32) -> Expr {
        match (k, &self) {
            (0, _) => Expr::Num(1.0),
            (1, _) => self,
            (_, Expr::Num(v)) => Expr::Num(v.powi(k)),
            _ => Expr::PowI(Box::new(self), k),
        }
    }

    pub fn powf(self, q: f64) -> Expr {
        if q.fract() == 0.0 && q.abs() < i32::MAX as f64 {
            return self.powi(q as i32);
        }
        Expr::PowF(Box::new(self), q)
    }

    /// Number of AST nodes; integer and constant real exponents are stored inline.
    pub fn node_count(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Sym(_) => 1,
            Expr::Neg(a) | Expr::PowI(a, _) | Expr::PowF(a, _) | Expr::Call(_, a) => 1 + a.node_count(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                1 + a.node_count() + b.node_count()
            }
        }
    }

    pub fn symbols(&self) -> Vec<Sym> {
        fn walk(e: &Expr, out: &mut Vec<Sym>) {
            match e {
                Expr::Num(_) => {}
                Expr::Sym(s) => {
                    if !out.contains(s) {
                        out.push(*s)
                    }
                }
                Expr::Neg(a) | Expr::PowI(a, _) | Expr::PowF(a, _) | Expr::Call(_, a) => walk(a, out),
                Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out.sort();
        out
    }

    /// Replace symbols for which `f` returns a value.
    pub fn substitute(&self, f: &dyn Fn(&Sym) -> Option<Expr>) -> Expr {
        let r = |e: &Expr| Box::new(e.substitute(f));
        match self {
            Expr::Num(_) => self.clone(),
            Expr::Sym(s) => f(s).unwrap_or_else(|| self.clone()),
            Expr::Neg(a) => Expr::Neg(r(a)),
            Expr::Add(a, b) => Expr::Add(r(a), r(b)),
            Expr::Sub(a, b) => Expr::Sub(r(a), r(b)),
            Expr::Mul(a, b) => Expr::Mul(r(a), r(b)),
            Expr::Div(a, b) => Expr::Div(r(a), r(b)),
            Expr::PowI(a, k) => Expr::PowI(r(a), *k),
            Expr::PowF(a, q) => Expr::PowF(r(a), *q),
            Expr::Pow(a, b) => Expr::Pow(r(a), r(b)),
            Expr::Call(g, a) => Expr::Call(*g, r(a)),
        }
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, o: Expr) -> Expr {
        match (self.as_num(), o.as_num()) {
            (Some(a), Some(b)) => Expr::Num(a + b),
            (Some(a), _) if a == 0.0 => o,
            (_, Some(b)) if b == 0.0 => self,
            _ => Expr::Add(Box::new(self), Box::new(o)),
        }
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, o: Expr) -> Expr {
        match (self.as_num(), o.as_num()) {
            (Some(a), Some(b)) => Expr::Num(a - b),
            (Some(a), _) if a == 0.0 => -o,
            (_, Some(b)) if b == 0.0 => self,
            _ => Expr::Sub(Box::new(self), Box::new(o)),
        }
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, o: Expr) -> Expr {
        match (self.as_num(), o.as_num()) {
            (Some(a), Some(b)) => Expr::Num(a * b),
            (Some(a), _) | (_, Some(a)) if a == 0.0 => Expr::Num(0.0),
            (Some(a), _) if a == 1.0 => o,
            (_, Some(b)) if b == 1.0 => self,
            _ => Expr::Mul(Box::new(self), Box::new(o)),
        }
    }
}

impl Div for Expr {
    type Output = Expr;
    fn div(self, o: Expr) -> Expr {
        match (self.as_num(), o.as_num()) {
            (Some(a), _) if a == 0.0 => Expr::Num(0.0),
            (_, Some(b)) if b == 1.0 => self,
            _ => Expr::Div(Box::new(self), Box::new(o)),
        }
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self {
            Expr::Num(v) => Expr::Num(-v),
            Expr::Neg(a) => *a,
            e => Expr::Neg(Box::new(e)),
        }
    }
}

// ---------------------------------------------------------------- printing

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(_) => 3,
        Expr::PowI(..) | Expr::PowF(..) | Expr::Pow(..) => 4,
        Expr::Num(v) if *v < 0.0 || v.is_sign_negative() => 3,
        _ => 5,
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if prec(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Sym(s) => write!(f, "{s}"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                write_child(f, a, 4)
            }
            Expr::Add(a, b) => {
                write_child(f, a, 1)?;
                write!(f, " + ")?;
                write_child(f, b, 2)
            }
            Expr::Sub(a, b) => {
                write_child(f, a, 1)?;
                write!(f, " - ")?;
                write_child(f, b, 2)
            }
            Expr::Mul(a, b) => {
                write_child(f, a, 2)?;
                write!(f, "*")?;
                write_child(f, b, 3)
            }
            Expr::Div(a, b) => {
                write_child(f, a, 2)?;
                write!(f, "/")?;
                write_child(f, b, 4)
            }
            Expr::PowI(a, k) => {
                write_child(f, a, 5)?;
                write!(f, "^{k}")
            }
            Expr::PowF(a, q) => {
                write_child(f, a, 5)?;
                write!(f, "^{q}")
            }
            Expr::Pow(a, b) => {
                write_child(f, a, 5)?;
                write!(f, "^")?;
                write_child(f, b, 5)
            }
            Expr::Call(g, a) => write!(f, "{}({a})", g.name()),
        }
    }
}

// ---------------------------------------------------------------- parsing

struct Parser<'a> {
    chars: Vec<char>,
    i: usize,
    dim: usize,
    _src: &'a str,
}

fn syntax(pos: usize, msg: impl Into<String>) -> ParseError {
    ParseError { pos, kind: ParseErrorKind::Syntax(msg.into()) }
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.i < self.chars.len() && self.chars[self.i].is_whitespace() {
            self.i += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.i).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let negate = self.eat('-');
        let base = self.base()?;
        let out = if self.eat('^') {
            let e = self.exponent()?;
            match e.as_num() {
                Some(q) if q.fract() == 0.0 && q.abs() <= i32::MAX as f64 => Expr::PowI(Box::new(base), q as i32),
                Some(q) => Expr::PowF(Box::new(base), q),
                None => Expr::Pow(Box::new(base), Box::new(e)),
            }
        } else {
            base
        };
        Ok(match (negate, out) {
            (false, e) => e,
            (true, Expr::Num(v)) => Expr::Num(-v),
            (true, e) => Expr::Neg(Box::new(e)),
        })
    }

    fn exponent(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            let start = self.i;
            match self.base()? {
                Expr::Num(v) => Ok(Expr::Num(-v)),
                _ => Err(syntax(start, "negative exponent must be a number")),
            }
        } else {
            self.base()
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.i;
        let c = &self.chars;
        let mut j = self.i;
        while j < c.len() && (c[j].is_ascii_digit() || c[j] == '.') {
            j += 1;
        }
        if j < c.len() && (c[j] == 'e' || c[j] == 'E') {
            let mut k = j + 1;
            if k < c.len() && (c[k] == '+' || c[k] == '-') {
                k += 1;
            }
            if k < c.len() && c[k].is_ascii_digit() {
                j = k;
                while j < c.len() && c[j].is_ascii_digit() {
                    j += 1;
                }
            }
        }
        let text: String = c[start..j].iter().collect();
        self.i = j;
        text.parse::<f64>().map(Expr::Num).map_err(|_| syntax(start, format!("malformed number '{text}'")))
    }

    fn ident(&mut self) -> String {
        let start = self.i;
        while self.i < self.chars.len() && (self.chars[self.i].is_ascii_alphanumeric() || self.chars[self.i] == '_') {
            self.i += 1;
        }
        self.chars[start..self.i].iter().collect()
    }

    fn resolve(&self, name: &str, pos: usize) -> Result<Sym, ParseError> {
        let n = self.dim;
        let unknown = || ParseError { pos, kind: ParseErrorKind::UnknownIdent(name.to_string()) };
        let index = |digits: &str| -> Option<usize> {
            if digits.is_empty() || digits.starts_with('0') || !digits.chars().all(|c| c.is_ascii_digit()) {
                return None;
            }
            let k: usize = digits.parse().ok()?;
            (1..=n).contains(&k).then_some(k - 1)
        };
        match name {
            "alpha" => return Ok(Sym::Alpha),
            "c0" => return Ok(Sym::C0),
            "pi" => return Ok(Sym::Pi),
            _ => {}
        }
        if let Some(d) = name.strip_prefix("beta") {
            return index(d).map(Sym::Beta).ok_or_else(unknown);
        }
        if let Some(d) = name.strip_prefix('x') {
            return index(d).map(Sym::X).ok_or_else(unknown);
        }
        if let Some(d) = name.strip_prefix('A') {
            return index(d).map(Sym::A).ok_or_else(unknown);
        }
        if let Some(d) = name.strip_prefix('B') {
            if d.len() == 2 && n <= 9 {
                let (a, b) = d.split_at(1);
                if let (Some(i), Some(j)) = (index(a), index(b)) {
                    return Ok(Sym::B(i, j));
                }
            }
            return Err(unknown());
        }
        Err(unknown())
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            None => Err(syntax(self.i, "unexpected end of input")),
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some('(') => {
                self.i += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(syntax(self.i, "expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.i;
                let name = self.ident();
                if let Some(func) = Func::from_name(&name) {
                    if !self.eat('(') {
                        return Err(syntax(self.i, format!("expected '(' after {name}")));
                    }
                    let mut args = vec![self.expr()?];
                    while self.eat(',') {
                        args.push(self.expr()?);
                    }
                    if !self.eat(')') {
                        return Err(syntax(self.i, "expected ')'"));
                    }
                    if args.len() != 1 {
                        return Err(ParseError {
                            pos: start,
                            kind: ParseErrorKind::Arity { func: name, expected: 1, found: args.len() },
                        });
                    }
                    return Ok(Expr::Call(func, Box::new(args.pop().expect("one argument"))));
                }
                let sym = self.resolve(&name, start)?;
                if self.peek() == Some('(') {
                    return Err(ParseError {
                        pos: start,
                        kind: ParseErrorKind::Arity { func: name, expected: 0, found: 1 },
                    });
                }
                Ok(Expr::Sym(sym))
            }
            Some(c) => Err(syntax(self.i, format!("unexpected character '{c}'"))),
        }
    }
}

/// Parse `text` with chart dimension `dim`.
pub fn parse(text: &str, dim: usize) -> Result<Expr, ParseError> {
    let mut p = Parser { chars: text.chars().collect(), i: 0, dim, _src: text };
    let e = p.expr()?;
    if let Some(c) = p.peek() {
        return Err(syntax(p.i, format!("unexpected trailing '{c}'")));
    }
    Ok(e)
}

// ---------------------------------------------------------------- calculus

/// Symbolic partial derivative with respect to `s`.
pub fn differentiate(e: &Expr, s: Sym) -> Expr {
    let d = |a: &Expr| differentiate(a, s);
    match e {
        Expr::Num(_) => Expr::Num(0.0),
        Expr::Sym(t) => Expr::Num(if *t == s { 1.0 } else { 0.0 }),
        Expr::Neg(a) => -d(a),
        Expr::Add(a, b) => d(a) + d(b),
        Expr::Sub(a, b) => d(a) - d(b),
        Expr::Mul(a, b) => d(a) * (**b).clone() + (**a).clone() * d(b),
        Expr::Div(a, b) => {
            let (da, db) = (d(a), d(b));
            if db.is_zero() {
                da / (**b).clone()
            } else {
                (da * (**b).clone() - (**a).clone() * db) / (**b).clone().powi(2)
            }
        }
        Expr::PowI(a, k) => Expr::Num(*k as f64) * (**a).clone().powi(k - 1) * d(a),
        Expr::PowF(a, q) => Expr::Num(*q) * (**a).clone().powf(q - 1.0) * d(a),
        Expr::Pow(a, b) => {
            let ln_a = Expr::call(Func::Ln, (**a).clone());
            e.clone() * (d(b) * ln_a + (**b).clone() * d(a) / (**a).clone())
        }
        Expr::Call(g, a) => {
            let u = (**a).clone();
            let outer = match g {
                Func::Exp => e.clone(),
                Func::Ln => Expr::Num(1.0) / u,
                Func::Sin => Expr::call(Func::Cos, u),
                Func::Cos => -Expr::call(Func::Sin, u),
                Func::Sqrt => Expr::Num(0.5) / e.clone(),
                Func::Tanh => Expr::Num(1.0) - e.clone().powi(2),
                Func::Abs => e.clone() / u,
            };
            outer * d(a)
        }
    }
}

/// Evaluate with a caller-supplied jet for every leaf symbol.
pub fn eval_with<T: Real>(
    e: &Expr,
    n: usize,
    order: usize,
    leaf: &dyn Fn(&Sym) -> Result<Jet<T>, EvalError>,
) -> Result<Jet<T>, EvalError> {
    let rec = |a: &Expr| eval_with(a, n, order, leaf);
    let domain = |op: &'static str| EvalError::Domain { op, subexpr: e.to_string() };
    let out = match e {
        Expr::Num(v) => Jet::constant(n, order, T::lit(*v)),
        Expr::Sym(Sym::Pi) => Jet::constant(n, order, T::PI()),
        Expr::Sym(s) => leaf(s)?,
        Expr::Neg(a) => -rec(a)?,
        Expr::Add(a, b) => rec(a)? + rec(b)?,
        Expr::Sub(a, b) => rec(a)? - rec(b)?,
        Expr::Mul(a, b) => rec(a)? * rec(b)?,
        Expr::Div(a, b) => {
            let den = rec(b)?;
            if den.value() == T::zero() {
                return Err(domain("division"));
            }
            rec(a)? / den
        }
        Expr::PowI(a, k) => {
            let u = rec(a)?;
            if *k < 0 && u.value() == T::zero() {
                return Err(domain("negative power"));
            }
            u.powi(*k)
        }
        Expr::PowF(a, q) => {
            let u = rec(a)?;
            if u.value() <= T::zero() {
                return Err(domain("real power"));
            }
            u.powf(T::lit(*q))
        }
        Expr::Pow(a, b) => {
            let u = rec(a)?;
            if u.value() <= T::zero() {
                return Err(domain("real power"));
            }
            (u.ln() * rec(b)?).exp()
        }
        Expr::Call(g, a) => {
            let u = rec(a)?;
            let v = u.value();
            match g {
                Func::Exp => u.exp(),
                Func::Ln if v <= T::zero() => return Err(domain("ln")),
                Func::Ln => u.ln(),
                Func::Sin => u.sin(),
                Func::Cos => u.cos(),
                Func::Sqrt if v < T::zero() || (v == T::zero() && u.order() > 0) => return Err(domain("sqrt")),
                Func::Sqrt => u.sqrt(),
                Func::Tanh => u.tanh(),
                Func::Abs if v == T::zero() => return Err(domain("abs")),
                Func::Abs => u.abs(),
            }
        }
    };
    if !out.value().is_finite() {
        return Err(domain("overflow"));
    }
    Ok(out)
}

/// Jet of `e` at `p`; only chart coordinates (and `pi`) may appear.
pub fn eval_jet<T: Real>(e: &Expr, p: &[T], order: usize) -> Result<Jet<T>, EvalError> {
    let n = p.len();
    eval_with(e, n, order, &|s| match s {
        Sym::X(i) if *i < n => Ok(Jet::variable(n, order, *i, p[*i])),
        other => Err(EvalError::Unbound(other.to_string())),
    })
}

pub fn eval<T: Real>(e: &Expr, p: &[T]) -> Result<T, EvalError> {
    eval_jet(e, p, 0).map(|j| j.value())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_count_of_reference_expression() {
        let e = parse("x1^2 + exp(2*x2)", 4).unwrap();
        assert_eq!(e.node_count(), 7);
    }

    #[test]
    fn unknown_and_out_of_range_identifiers() {
        assert!(matches!(parse("x5", 4).unwrap_err().kind, ParseErrorKind::UnknownIdent(_)));
        assert!(matches!(parse("x0", 4).unwrap_err().kind, ParseErrorKind::UnknownIdent(_)));
        assert!(matches!(parse("gamma", 4).unwrap_err().kind, ParseErrorKind::UnknownIdent(_)));
        assert!(parse("ln(1 + x1*x1 + x2*x2)", 2).is_ok());
    }

    #[test]
    fn arity_and_syntax_errors_carry_positions() {
        let err = parse("exp(x1, x2)", 2).unwrap_err();
        assert_eq!(err.pos, 0);
        assert!(matches!(err.kind, ParseErrorKind::Arity { found: 2, .. }));
        let err = parse("x1 + * x2", 2).unwrap_err();
        assert_eq!(err.pos, 5);
        let err = parse("(x1 + x2", 2).unwrap_err();
        assert_eq!(err.pos, 8);
    }

    #[test]
    fn slots_resolve() {
        let e = parse("alpha + beta2*A1 - B12 + c0*pi", 3).unwrap();
        assert_eq!(e.symbols(), vec![Sym::Alpha, Sym::Beta(1), Sym::A(0), Sym::B(0, 1), Sym::C0, Sym::Pi]);
    }

    #[test]
    fn bilinear_jet() {
        let e = parse("x1*x2", 2).unwrap();
        let j = eval_jet(&e, &[1.0f64, 2.0], 2).unwrap();
        assert_eq!(j.value(), 2.0);
        assert_eq!(j.partial(&[0]), 2.0);
        assert_eq!(j.partial(&[1]), 1.0);
        assert_eq!(j.partial(&[0, 1]), 1.0);
        assert_eq!(j.partial(&[0, 0]), 0.0);
        assert_eq!(j.partial(&[1, 1]), 0.0);
    }

    #[test]
    fn power_rule_prints_simply() {
        let d = differentiate(&parse("x1^2", 1).unwrap(), Sym::X(0));
        assert_eq!(d.to_string(), "2*x1");
        let d = differentiate(&parse("x1", 2).unwrap(), Sym::X(1));
        assert_eq!(d, Expr::Num(0.0));
    }

    #[test]
    fn domain_errors_name_the_subexpression() {
        let e = parse("ln(x1 - 1)", 1).unwrap();
        match eval_jet(&e, &[0.5f64], 1).unwrap_err() {
            EvalError::Domain { op, subexpr } => {
                assert_eq!(op, "ln");
                assert_eq!(subexpr, "ln(x1 - 1)");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(eval_jet(&parse("abs(x1)", 1).unwrap(), &[0.0f64], 1).is_err());
        assert!(eval_jet(&parse("1/x1", 1).unwrap(), &[0.0f64], 0).is_err());
    }

    #[test]
    fn negative_literals_round_trip() {
        for s in ["-2", "x1*-2", "(-2)^2", "-x1^2", "x1^-2", "x1 - (x2 - x3)", "x1/(x2*x3)", "2^x1"] {
            let e = parse(s, 3).unwrap();
            assert_eq!(parse(&e.to_string(), 3).unwrap(), e, "{s} -> {e}");
        }
    }
}
