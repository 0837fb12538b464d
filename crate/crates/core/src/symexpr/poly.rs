//! Canonical polynomial representation backing [`Expr`](super::Expr).
//!
//! A [`Poly`] is a finite sum of rational multiples of [`Monomial`]s. A
//! monomial is a product of [`Atom`]s raised to nonzero integer exponents.
//! Atoms are chart variables, free parameters, transcendental calls with a
//! canonical argument, and reciprocals of multi-term polynomials.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use super::{Func, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum Atom {
    Var(usize),
    Param(String),
    Call(Func, Poly),
    /// `1 / p` for a multi-term polynomial `p` with leading coefficient 1.
    Recip(Poly),
}

impl Atom {
    pub(crate) fn contains_var(&self, v: usize) -> bool {
        match self {
            Atom::Var(i) => *i == v,
            Atom::Param(_) => false,
            Atom::Call(_, p) | Atom::Recip(p) => p.contains_var(v),
        }
    }
}

/// Product of atoms, sorted by atom, with nonzero exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub(crate) struct Monomial(Vec<(Atom, i32)>);

impl Monomial {
    pub(crate) fn one() -> Self {
        Monomial(Vec::new())
    }

    pub(crate) fn from_atom(atom: Atom, exp: i32) -> Self {
        if exp == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(atom, exp)])
        }
    }

    pub(crate) fn factors(&self) -> &[(Atom, i32)] {
        &self.0
    }

    pub(crate) fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    fn degree(&self) -> i64 {
        self.0.iter().map(|(_, e)| *e as i64).sum()
    }

    pub(crate) fn exponent_of(&self, atom: &Atom) -> i32 {
        self.0
            .iter()
            .find(|(a, _)| a == atom)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub(crate) fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            let (a, ea) = &self.0[i];
            let (b, eb) = &other.0[j];
            match a.cmp(b) {
                Ordering::Less => {
                    out.push((a.clone(), *ea));
                    i += 1;
                }
                Ordering::Greater => {
                    out.push((b.clone(), *eb));
                    j += 1;
                }
                Ordering::Equal => {
                    let e = ea + eb;
                    if e != 0 {
                        out.push((a.clone(), e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    pub(crate) fn powi(&self, k: i32) -> Monomial {
        if k == 0 {
            return Monomial::one();
        }
        Monomial(self.0.iter().map(|(a, e)| (a.clone(), e * k)).collect())
    }

    /// The monomial with one factor removed (exponent lowered by `by`).
    pub(crate) fn lower(&self, atom: &Atom, by: i32) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len());
        for (a, e) in &self.0 {
            if a == atom {
                if e - by != 0 {
                    out.push((a.clone(), e - by));
                }
            } else {
                out.push((a.clone(), *e));
            }
        }
        Monomial(out)
    }
}

// Graded lexicographic order, larger monomials first: higher total degree
// wins, then the larger exponent on the earliest atom.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let (da, db) = (self.degree(), other.degree());
        if da != db {
            return db.cmp(&da);
        }
        let (mut i, mut j) = (0, 0);
        loop {
            match (self.0.get(i), other.0.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some((_, ea)), None) => {
                    return if *ea > 0 {
                        Ordering::Less
                    } else {
                        Ordering::Greater
                    }
                }
                (None, Some((_, eb))) => {
                    return if *eb > 0 {
                        Ordering::Greater
                    } else {
                        Ordering::Less
                    }
                }
                (Some((a, ea)), Some((b, eb))) => match a.cmp(b) {
                    Ordering::Equal => {
                        if ea != eb {
                            return eb.cmp(ea);
                        }
                        i += 1;
                        j += 1;
                    }
                    Ordering::Less => {
                        return if *ea > 0 {
                            Ordering::Less
                        } else {
                            Ordering::Greater
                        }
                    }
                    Ordering::Greater => {
                        return if *eb > 0 {
                            Ordering::Greater
                        } else {
                            Ordering::Less
                        }
                    }
                },
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub(crate) struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub(crate) fn zero() -> Self {
        Poly::default()
    }

    pub(crate) fn one() -> Self {
        Poly::constant(Rational::one())
    }

    pub(crate) fn constant(c: Rational) -> Self {
        let mut p = Poly::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub(crate) fn atom(atom: Atom) -> Self {
        Poly::term(Rational::one(), Monomial::from_atom(atom, 1))
    }

    pub(crate) fn var(i: usize) -> Self {
        Poly::atom(Atom::Var(i))
    }

    /// Builds a single term, expanding reciprocal atoms that carry a
    /// negative exponent (`(1/p)^-k = p^k`).
    pub(crate) fn term(c: Rational, m: Monomial) -> Self {
        if m.0
            .iter()
            .any(|(a, e)| matches!(a, Atom::Recip(_)) && *e < 0)
        {
            let mut plain = Vec::new();
            let mut expanded = Poly::constant(c);
            for (a, e) in m.0 {
                match a {
                    Atom::Recip(p) if e < 0 => expanded = expanded.mul(&p.pow(-e)),
                    other => plain.push((other, e)),
                }
            }
            return expanded.mul(&Poly::term(Rational::one(), Monomial(plain)));
        }
        let mut p = Poly::zero();
        p.add_term(m, c);
        p
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub(crate) fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub(crate) fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub(crate) fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub(crate) fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub(crate) fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub(crate) fn scale(&self, k: &Rational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub(crate) fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.mul(mb);
                let c = ca * cb;
                if m.0
                    .iter()
                    .any(|(a, e)| matches!(a, Atom::Recip(_)) && *e < 0)
                {
                    out = out.add(&Poly::term(c, m));
                } else {
                    out.add_term(m, c);
                }
            }
        }
        out
    }

    pub(crate) fn pow(&self, k: i32) -> Poly {
        if k < 0 {
            return self.inverse().pow(-k);
        }
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            return Poly::term(num_traits::pow(c.clone(), k as usize), m.powi(k));
        }
        let mut result = Poly::one();
        let mut base = self.clone();
        let mut k = k as u32;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Multiplicative inverse. Single terms invert exactly; multi-term
    /// polynomials become a reciprocal atom; zero becomes the reciprocal of
    /// zero, which evaluates to a pole everywhere.
    pub(crate) fn inverse(&self) -> Poly {
        match self.terms.len() {
            0 => Poly::atom(Atom::Recip(Poly::zero())),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                Poly::term(c.recip(), m.powi(-1))
            }
            _ => {
                let lead = self.terms.values().next().unwrap().clone();
                let normalized = self.scale(&lead.recip());
                Poly::atom(Atom::Recip(normalized)).scale(&lead.recip())
            }
        }
    }

    pub(crate) fn call(func: Func, arg: Poly) -> Poly {
        if let Some(c) = arg.as_constant() {
            match func {
                Func::Sin if c.is_zero() => return Poly::zero(),
                Func::Cos | Func::Exp if c.is_zero() => return Poly::one(),
                Func::Log if c.is_one() => return Poly::zero(),
                _ => {}
            }
        }
        Poly::atom(Atom::Call(func, arg))
    }

    pub(crate) fn contains_var(&self, v: usize) -> bool {
        self.terms
            .keys()
            .any(|m| m.0.iter().any(|(a, _)| a.contains_var(v)))
    }

    pub(crate) fn has_calls(&self) -> bool {
        self.terms.keys().any(|m| {
            m.0.iter().any(|(a, _)| match a {
                Atom::Call(..) => true,
                Atom::Recip(p) => p.has_calls(),
                _ => false,
            })
        })
    }

    /// True when every atom is a variable or parameter with a nonnegative
    /// exponent.
    pub(crate) fn is_polynomial(&self) -> bool {
        self.terms.keys().all(|m| {
            m.0.iter()
                .all(|(a, e)| matches!(a, Atom::Var(_) | Atom::Param(_)) && *e > 0)
        })
    }

    pub(crate) fn collect_symbols(
        &self,
        vars: &mut BTreeSet<usize>,
        params: &mut BTreeSet<String>,
    ) {
        for m in self.terms.keys() {
            for (a, _) in &m.0 {
                match a {
                    Atom::Var(i) => {
                        vars.insert(*i);
                    }
                    Atom::Param(p) => {
                        params.insert(p.clone());
                    }
                    Atom::Call(_, p) | Atom::Recip(p) => p.collect_symbols(vars, params),
                }
            }
        }
    }

    /// Numeric evaluation. Returns the value together with the sum of the
    /// absolute values of the terms (a scale for relative comparisons).
    pub(crate) fn eval(&self, vars: &[f64], params: &BTreeMap<String, f64>) -> (f64, f64) {
        let mut value = 0.0;
        let mut magnitude = 0.0;
        for (m, c) in &self.terms {
            let mut t = rational_to_f64(c);
            for (a, e) in &m.0 {
                let base = match a {
                    Atom::Var(i) => vars.get(*i).copied().unwrap_or(f64::NAN),
                    Atom::Param(p) => params.get(p).copied().unwrap_or(f64::NAN),
                    Atom::Call(f, arg) => {
                        let x = arg.eval(vars, params).0;
                        match f {
                            Func::Sin => x.sin(),
                            Func::Cos => x.cos(),
                            Func::Exp => x.exp(),
                            Func::Log => {
                                if x > 0.0 {
                                    x.ln()
                                } else {
                                    f64::NAN
                                }
                            }
                        }
                    }
                    Atom::Recip(p) => 1.0 / p.eval(vars, params).0,
                };
                t *= base.powi(*e);
            }
            value += t;
            magnitude += t.abs();
        }
        (value, magnitude)
    }

    /// Partial derivative with respect to variable `v`.
    pub(crate) fn derivative(&self, v: usize) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            for (a, e) in &m.0 {
                if !a.contains_var(v) {
                    continue;
                }
                let inner = atom_derivative(a, v);
                if inner.is_zero() {
                    continue;
                }
                let rest = Poly::term(c * Rational::from_integer((*e).into()), m.lower(a, 1));
                out = out.add(&rest.mul(&inner));
            }
        }
        out
    }

    /// Simultaneous substitution of variables by polynomials.
    pub(crate) fn substitute(&self, bindings: &BTreeMap<usize, Poly>) -> Poly {
        if bindings.is_empty() {
            return self.clone();
        }
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut acc = Poly::constant(c.clone());
            let mut plain = Vec::new();
            for (a, e) in &m.0 {
                match a {
                    Atom::Var(i) => match bindings.get(i) {
                        Some(p) => acc = acc.mul(&p.pow(*e)),
                        None => plain.push((a.clone(), *e)),
                    },
                    Atom::Param(_) => plain.push((a.clone(), *e)),
                    Atom::Call(f, arg) => {
                        acc = acc.mul(&Poly::call(*f, arg.substitute(bindings)).pow(*e))
                    }
                    Atom::Recip(p) => acc = acc.mul(&p.substitute(bindings).pow(-*e)),
                }
            }
            out = out.add(&acc.mul(&Poly::term(Rational::one(), Monomial(plain))));
        }
        out
    }

    /// Substitution of named parameters by polynomials.
    pub(crate) fn substitute_params(&self, bindings: &BTreeMap<String, Poly>) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut acc = Poly::constant(c.clone());
            for (a, e) in &m.0 {
                let factor = match a {
                    Atom::Param(name) => match bindings.get(name) {
                        Some(p) => p.clone(),
                        None => Poly::atom(a.clone()),
                    },
                    Atom::Var(_) => Poly::atom(a.clone()),
                    Atom::Call(f, arg) => Poly::call(*f, arg.substitute_params(bindings)),
                    Atom::Recip(p) => p.substitute_params(bindings).inverse(),
                };
                acc = acc.mul(&factor.pow(*e));
            }
            out = out.add(&acc);
        }
        out
    }

    /// Antiderivative in `v` with zero constant, for integrands polynomial
    /// in `v`.
    pub(crate) fn integrate(&self, v: usize) -> Result<Poly, String> {
        let var = Atom::Var(v);
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            for (a, e) in &m.0 {
                if a == &var {
                    if *e < 0 {
                        return Err("negative power of the integration variable".into());
                    }
                } else if a.contains_var(v) {
                    return Err("integration variable inside a non-polynomial subterm".into());
                }
            }
            let k = m.exponent_of(&var);
            let coeff = c / Rational::from_integer((k + 1).into());
            out = out.add(&Poly::term(
                coeff,
                m.mul(&Monomial::from_atom(var.clone(), 1)),
            ));
        }
        Ok(out)
    }

    /// Exact rational-function normal form `num / den`, with both parts free
    /// of reciprocal atoms and negative exponents. Transcendental calls are
    /// kept as opaque symbols.
    pub(crate) fn to_fraction(&self) -> (Poly, Poly) {
        let mut num = Poly::zero();
        let mut den = Poly::one();
        for (m, c) in &self.terms {
            let mut tn = Poly::constant(c.clone());
            let mut td = Poly::one();
            for (a, e) in &m.0 {
                let (an, ad) = match a {
                    Atom::Recip(p) => {
                        let (pn, pd) = p.to_fraction();
                        (pd, pn)
                    }
                    other => (Poly::atom(other.clone()), Poly::one()),
                };
                if *e > 0 {
                    tn = tn.mul(&an.pow(*e));
                    td = td.mul(&ad.pow(*e));
                } else {
                    tn = tn.mul(&ad.pow(-*e));
                    td = td.mul(&an.pow(-*e));
                }
            }
            if td == den {
                num = num.add(&tn);
            } else {
                num = num.mul(&td).add(&tn.mul(&den));
                den = den.mul(&td);
            }
        }
        (num, den)
    }
}

fn atom_derivative(a: &Atom, v: usize) -> Poly {
    match a {
        Atom::Var(i) => {
            if *i == v {
                Poly::one()
            } else {
                Poly::zero()
            }
        }
        Atom::Param(_) => Poly::zero(),
        Atom::Call(f, arg) => {
            let inner = arg.derivative(v);
            if inner.is_zero() {
                return Poly::zero();
            }
            let outer = match f {
                Func::Sin => Poly::call(Func::Cos, arg.clone()),
                Func::Cos => Poly::call(Func::Sin, arg.clone()).neg(),
                Func::Exp => Poly::call(Func::Exp, arg.clone()),
                Func::Log => arg.inverse(),
            };
            outer.mul(&inner)
        }
        Atom::Recip(p) => {
            let inner = p.derivative(v);
            Poly::atom(a.clone()).pow(2).mul(&inner).neg()
        }
    }
}

pub(crate) fn rational_to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}
