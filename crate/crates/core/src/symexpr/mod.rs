//! Symbolic scalar expressions over a chart.
//!
//! [`Expr`] is an immutable expression tree. Every operation that produces an
//! expression returns it in canonical form: a sum of monomials with rational
//! coefficients in graded lexicographic order, where transcendental calls and
//! reciprocals of sums are opaque atoms compared syntactically.

mod display;
mod parse;
mod poly;
mod zero;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::{Error, Result};
use poly::{Atom, Poly};

pub use display::ExprDisplay;
pub use parse::{
    parse_expr, parse_product, tokenize, ParamScope, ParseError, ParseErrorKind, Pos, Scope, Token,
    TokenKind, TokenStream,
};
pub use zero::{is_exact_zero, Certainty, Confidence, Sampler, Verdict};

/// Exact rational numbers used for every constant in the symbolic core.
pub type Rational = num_rational::BigRational;

/// Largest chart dimension accepted by [`Chart::new`].
pub const MAX_CHART_DIM: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            _ => None,
        }
    }
}

/// An ordered list of coordinate names.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Chart {
    names: Vec<String>,
}

impl Chart {
    pub fn new<I, S>(names: I) -> Result<Chart>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::Chart("a chart needs at least one coordinate".into()));
        }
        if names.len() > MAX_CHART_DIM {
            return Err(Error::Chart(format!(
                "dimension {} exceeds the maximum of {MAX_CHART_DIM}",
                names.len()
            )));
        }
        for (i, name) in names.iter().enumerate() {
            let valid = name
                .chars()
                .next()
                .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !valid {
                return Err(Error::Chart(format!(
                    "`{name}` is not a valid coordinate name"
                )));
            }
            if Func::from_name(name).is_some() {
                return Err(Error::Chart(format!("`{name}` is reserved for a function")));
            }
            if names[..i].contains(name) {
                return Err(Error::Chart(format!("duplicate coordinate `{name}`")));
            }
        }
        Ok(Chart { names })
    }

    /// `prefix1 … prefixN`.
    pub fn numbered(prefix: &str, dim: usize) -> Result<Chart> {
        Chart::new((1..=dim).map(|i| format!("{prefix}{i}")))
    }

    /// Chart of the coordinates listed in `free`, in that order. May be
    /// zero-dimensional.
    pub(crate) fn subchart(&self, free: &[usize]) -> Chart {
        Chart {
            names: free.iter().map(|&i| self.names[i].clone()).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn var(&self, name: &str) -> Result<Expr> {
        self.index_of(name)
            .map(Expr::Var)
            .ok_or_else(|| Error::Chart(format!("unknown coordinate `{name}`")))
    }

    pub(crate) fn check_var(&self, v: usize) -> Result<()> {
        if v < self.dim() {
            Ok(())
        } else {
            Err(Error::UnknownVariable {
                index: v,
                dim: self.dim(),
            })
        }
    }
}

/// Expression tree.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    /// Chart coordinate by index.
    Var(usize),
    /// Free symbolic constant (independent of every coordinate).
    Param(String),
    Const(Rational),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Box<Expr>, i32),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Const(Rational::zero())
    }

    pub fn one() -> Expr {
        Expr::Const(Rational::one())
    }

    pub fn int(n: i64) -> Expr {
        Expr::Const(Rational::from_integer(n.into()))
    }

    pub fn ratio(n: i64, d: i64) -> Expr {
        Expr::Const(Rational::new(n.into(), d.into()))
    }

    pub fn param(name: impl Into<String>) -> Expr {
        Expr::Param(name.into())
    }

    pub fn pow(self, k: i32) -> Expr {
        Expr::Pow(Box::new(self), k)
    }

    pub fn sin(self) -> Expr {
        Expr::Call(Func::Sin, Box::new(self))
    }

    pub fn cos(self) -> Expr {
        Expr::Call(Func::Cos, Box::new(self))
    }

    pub fn exp(self) -> Expr {
        Expr::Call(Func::Exp, Box::new(self))
    }

    pub fn log(self) -> Expr {
        Expr::Call(Func::Log, Box::new(self))
    }

    pub(crate) fn to_poly(&self) -> Poly {
        match self {
            Expr::Var(i) => Poly::var(*i),
            Expr::Param(p) => Poly::atom(Atom::Param(p.clone())),
            Expr::Const(c) => Poly::constant(c.clone()),
            Expr::Add(xs) => xs.iter().fold(Poly::zero(), |acc, x| acc.add(&x.to_poly())),
            Expr::Mul(xs) => xs.iter().fold(Poly::one(), |acc, x| acc.mul(&x.to_poly())),
            Expr::Pow(b, k) => b.to_poly().pow(*k),
            Expr::Neg(x) => x.to_poly().neg(),
            Expr::Call(f, x) => Poly::call(*f, x.to_poly()),
        }
    }

    pub(crate) fn from_poly(p: &Poly) -> Expr {
        let mut terms: Vec<Expr> = p
            .terms()
            .map(|(m, c)| {
                let factors: Vec<Expr> = m
                    .factors()
                    .iter()
                    .map(|(a, e)| {
                        let (base, e) = match a {
                            Atom::Var(i) => (Expr::Var(*i), *e),
                            Atom::Param(s) => (Expr::Param(s.clone()), *e),
                            Atom::Call(f, arg) => {
                                (Expr::Call(*f, Box::new(Expr::from_poly(arg))), *e)
                            }
                            Atom::Recip(q) => (Expr::from_poly(q), -*e),
                        };
                        if e == 1 {
                            base
                        } else {
                            Expr::Pow(Box::new(base), e)
                        }
                    })
                    .collect();
                if factors.is_empty() {
                    Expr::Const(c.clone())
                } else if c.is_one() {
                    single_or_mul(factors)
                } else if *c == -Rational::one() {
                    Expr::Neg(Box::new(single_or_mul(factors)))
                } else {
                    let mut all = vec![Expr::Const(c.clone())];
                    all.extend(factors);
                    Expr::Mul(all)
                }
            })
            .collect();
        match terms.len() {
            0 => Expr::zero(),
            1 => terms.pop().unwrap(),
            _ => Expr::Add(terms),
        }
    }

    /// Canonical form. Idempotent and value-preserving.
    pub fn simplify(&self) -> Expr {
        Expr::from_poly(&self.to_poly())
    }

    /// Partial derivative with respect to coordinate `v`, without a chart
    /// check. See [`differentiate`] for the checked form.
    pub fn diff(&self, v: usize) -> Expr {
        Expr::from_poly(&self.to_poly().derivative(v))
    }

    pub fn constant_value(&self) -> Option<Rational> {
        self.to_poly().as_constant()
    }

    pub fn is_constant(&self) -> bool {
        self.constant_value().is_some()
    }

    /// True when no coordinate (parameters are allowed) occurs.
    pub fn is_coordinate_free(&self) -> bool {
        let mut vars = Default::default();
        let mut params = Default::default();
        self.to_poly().collect_symbols(&mut vars, &mut params);
        vars.is_empty()
    }

    /// True when the canonical form is a polynomial in coordinates and
    /// parameters (no calls, reciprocals or negative powers).
    pub fn is_polynomial(&self) -> bool {
        self.to_poly().is_polynomial()
    }

    pub fn contains_var(&self, v: usize) -> bool {
        self.to_poly().contains_var(v)
    }

    /// Largest coordinate index that occurs, if any.
    pub fn max_var(&self) -> Option<usize> {
        let mut vars = std::collections::BTreeSet::new();
        let mut params = Default::default();
        self.to_poly().collect_symbols(&mut vars, &mut params);
        vars.last().copied()
    }

    pub fn params(&self) -> Vec<String> {
        let mut vars = Default::default();
        let mut params = std::collections::BTreeSet::new();
        self.to_poly().collect_symbols(&mut vars, &mut params);
        params.into_iter().collect()
    }

    /// Numeric value at `point` (one coordinate value per chart index).
    pub fn evaluate(&self, point: &[f64]) -> Result<f64> {
        self.evaluate_with(point, &BTreeMap::new())
    }

    pub fn evaluate_with(&self, point: &[f64], params: &BTreeMap<String, f64>) -> Result<f64> {
        let p = self.to_poly();
        let mut vars = Default::default();
        let mut names = std::collections::BTreeSet::new();
        p.collect_symbols(&mut vars, &mut names);
        if let Some(&v) = vars.last() {
            if v >= point.len() {
                return Err(Error::Evaluation(format!("coordinate {v} has no value")));
            }
        }
        if let Some(missing) = names.iter().find(|n| !params.contains_key(*n)) {
            return Err(Error::Evaluation(format!(
                "parameter `{missing}` is unbound"
            )));
        }
        let (value, _) = p.eval(point, params);
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::Evaluation("value is not finite".into()))
        }
    }

    /// Replaces named parameters by expressions.
    pub fn substitute_params(&self, bindings: &BTreeMap<String, Expr>) -> Expr {
        let bindings: BTreeMap<String, Poly> = bindings
            .iter()
            .map(|(k, v)| (k.clone(), v.to_poly()))
            .collect();
        Expr::from_poly(&self.to_poly().substitute_params(&bindings))
    }

    pub fn display<'a>(&'a self, chart: &'a Chart) -> ExprDisplay<'a> {
        ExprDisplay::new(self, chart)
    }

    /// Parses an expression over `chart`; unknown identifiers are errors.
    pub fn parse(text: &str, chart: &Chart) -> std::result::Result<Expr, ParseError> {
        parse::parse_complete(text, chart)
    }
}

fn single_or_mul(mut factors: Vec<Expr>) -> Expr {
    if factors.len() == 1 {
        factors.pop().unwrap()
    } else {
        Expr::Mul(factors)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

impl From<Rational> for Expr {
    fn from(r: Rational) -> Expr {
        Expr::Const(r)
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Add(vec![self, rhs])
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Add(vec![self, Expr::Neg(Box::new(rhs))])
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(vec![self, rhs])
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

impl fmt::Display for Expr {
    /// Prints with generic coordinate names `x0, x1, …`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        display::write_generic(f, &self.to_poly())
    }
}

/// Checked partial derivative `∂e/∂v`.
pub fn differentiate(e: &Expr, v: usize, chart: &Chart) -> Result<Expr> {
    chart.check_var(v)?;
    Ok(e.diff(v))
}

/// Canonical form of `e`.
pub fn simplify(e: &Expr) -> Expr {
    e.simplify()
}

/// Simultaneous substitution of coordinates, followed by simplification.
/// Unbound coordinates are left untouched.
pub fn substitute(e: &Expr, bindings: &BTreeMap<usize, Expr>) -> Expr {
    let bindings: BTreeMap<usize, Poly> = bindings.iter().map(|(k, v)| (*k, v.to_poly())).collect();
    Expr::from_poly(&e.to_poly().substitute(&bindings))
}

/// Antiderivative in `v` with zero constant. The integrand must be
/// polynomial in `v`; other atoms are treated as constants.
pub fn integrate_poly(e: &Expr, v: usize, chart: &Chart) -> Result<Expr> {
    chart.check_var(v)?;
    integrate_unchecked(e, v)
}

pub(crate) fn integrate_unchecked(e: &Expr, v: usize) -> Result<Expr> {
    e.to_poly()
        .integrate(v)
        .map(|p| Expr::from_poly(&p))
        .map_err(Error::UnsupportedIntegrand)
}

/// Determinant of a square table by cofactor expansion.
pub fn determinant(rows: &[Vec<Expr>]) -> Result<Expr> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Arity("determinant of a non-square table".into()));
    }
    if n == 0 {
        return Ok(Expr::one());
    }
    let table: Vec<Vec<Poly>> = rows
        .iter()
        .map(|r| r.iter().map(Expr::to_poly).collect())
        .collect();
    let mut memo = std::collections::HashMap::new();
    Ok(Expr::from_poly(&minor(
        &table,
        0,
        (1u32 << n) - 1,
        &mut memo,
    )))
}

fn minor(
    table: &[Vec<Poly>],
    row: usize,
    cols: u32,
    memo: &mut std::collections::HashMap<u32, Poly>,
) -> Poly {
    if row == table.len() {
        return Poly::one();
    }
    if let Some(p) = memo.get(&cols) {
        return p.clone();
    }
    let mut acc = Poly::zero();
    let mut sign_positive = true;
    for c in 0..table.len() {
        if cols & (1 << c) == 0 {
            continue;
        }
        let entry = &table[row][c];
        if !entry.is_zero() {
            let sub = minor(table, row + 1, cols & !(1 << c), memo);
            let term = entry.mul(&sub);
            acc = if sign_positive {
                acc.add(&term)
            } else {
                acc.sub(&term)
            };
        }
        sign_positive = !sign_positive;
    }
    memo.insert(cols, acc.clone());
    acc
}
