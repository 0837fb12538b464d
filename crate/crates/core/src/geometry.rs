//! Connections on a deforming frame and the commutator of an evolutionary
//! form.
//!
//! On a frame carrying a connection `Γ^σ_{αβ}` the basis differentials no
//! longer vanish: `d(dx^σ) = Σ_{α<β} T^σ_{αβ} dx^α ∧ dx^β` with torsion
//! `T^σ_{αβ} = Γ^σ_{βα} − Γ^σ_{αβ}`. Only this antisymmetric part enters;
//! the symmetric part is stored but inert.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{ToPrimitive, Zero};

use crate::forms::{exterior_derivative_flat, Form, Pseudostructure};
use crate::symexpr::{self, is_exact_zero, Chart, Expr, Rational, Sampler, Verdict};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Connection {
    chart: Arc<Chart>,
    table: Vec<Expr>,
}

impl Connection {
    pub fn zero(chart: Arc<Chart>) -> Connection {
        let n = chart.dim();
        Connection {
            chart,
            table: vec![Expr::zero(); n * n * n],
        }
    }

    /// Builds a connection from `(σ, α, β, Γ^σ_{αβ})` entries; unlisted
    /// components are zero and repeated ones overwrite.
    pub fn from_entries<I>(chart: Arc<Chart>, entries: I) -> Result<Connection>
    where
        I: IntoIterator<Item = (usize, usize, usize, Expr)>,
    {
        let mut c = Connection::zero(chart);
        for (s, a, b, e) in entries {
            c.set(s, a, b, e)?;
        }
        Ok(c)
    }

    fn slot(&self, s: usize, a: usize, b: usize) -> Result<usize> {
        let n = self.chart.dim();
        if s >= n || a >= n || b >= n {
            return Err(Error::InvalidIndex(vec![s, a, b]));
        }
        Ok((s * n + a) * n + b)
    }

    pub fn set(&mut self, s: usize, a: usize, b: usize, e: Expr) -> Result<()> {
        let k = self.slot(s, a, b)?;
        self.table[k] = e.simplify();
        Ok(())
    }

    /// `Γ^s_{ab}`.
    pub fn get(&self, s: usize, a: usize, b: usize) -> &Expr {
        let n = self.chart.dim();
        &self.table[(s * n + a) * n + b]
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    /// Nonzero components as `(σ, α, β, Γ)`, in index order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, usize, &Expr)> {
        let n = self.chart.dim();
        self.table.iter().enumerate().filter_map(move |(k, e)| {
            (!is_exact_zero(e)).then_some((k / (n * n), (k / n) % n, k % n, e))
        })
    }

    pub fn is_zero(&self) -> bool {
        self.entries().next().is_none()
    }

    /// Restriction to a slice: constrained rows and columns are dropped, the
    /// remaining components have the constrained coordinates substituted and
    /// are renumbered onto the induced chart.
    pub fn pullback(&self, pi: &Pseudostructure) -> Result<Connection> {
        if self.chart != *pi.chart() {
            return Err(Error::ChartMismatch);
        }
        let free = pi.free_indices();
        let bindings = pi.bindings();
        let mut out = Connection::zero(pi.induced_chart().clone());
        for (ns, &s) in free.iter().enumerate() {
            for (na, &a) in free.iter().enumerate() {
                for (nb, &b) in free.iter().enumerate() {
                    let e = self.get(s, a, b);
                    if !is_exact_zero(e) {
                        out.set(ns, na, nb, symexpr::substitute(e, &bindings))?;
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Antisymmetric part `T^σ_{αβ} = Γ^σ_{βα} − Γ^σ_{αβ}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Torsion {
    chart: Arc<Chart>,
    table: Vec<Expr>,
}

impl Torsion {
    pub fn get(&self, s: usize, a: usize, b: usize) -> &Expr {
        let n = self.chart.dim();
        &self.table[(s * n + a) * n + b]
    }

    pub fn is_zero(&self) -> bool {
        self.table.iter().all(is_exact_zero)
    }

    /// `d(dx^σ) = Σ_{α<β} T^σ_{αβ} dx^α ∧ dx^β`.
    pub fn two_form(&self, s: usize) -> Form {
        let n = self.chart.dim();
        if n < 2 {
            return Form::zero(self.chart.clone(), 2);
        }
        let entries: Vec<_> = (0..n)
            .flat_map(|a| ((a + 1)..n).map(move |b| (a, b)))
            .map(|(a, b)| (vec![a, b], self.get(s, a, b).clone()))
            .collect();
        Form::new(self.chart.clone(), 2, entries).expect("indices in range")
    }
}

pub fn torsion(c: &Connection) -> Torsion {
    let n = c.chart.dim();
    let mut table = Vec::with_capacity(n * n * n);
    for s in 0..n {
        for a in 0..n {
            for b in 0..n {
                table.push((c.get(s, b, a).clone() - c.get(s, a, b).clone()).simplify());
            }
        }
    }
    Torsion {
        chart: c.chart.clone(),
        table,
    }
}

/// `d(dx^{i_1} ∧ … ∧ dx^{i_p})` by the graded Leibniz rule,
/// `Σ_k (−1)^{k−1} dx^{i_1} ∧ … ∧ d(dx^{i_k}) ∧ … ∧ dx^{i_p}`.
pub fn basis_differential(c: &Connection, idx: &[usize]) -> Result<Form> {
    basis_differential_with(&torsion(c), idx)
}

fn basis_differential_with(t: &Torsion, idx: &[usize]) -> Result<Form> {
    let n = t.chart.dim();
    if idx.iter().any(|&i| i >= n) || idx.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidIndex(idx.to_vec()));
    }
    let degree = idx.len() + 1;
    let mut entries = Vec::new();
    if degree <= n {
        for (k, &s) in idx.iter().enumerate() {
            for a in 0..n {
                for b in (a + 1)..n {
                    let coef = t.get(s, a, b);
                    if is_exact_zero(coef) {
                        continue;
                    }
                    let mut full = idx[..k].to_vec();
                    full.extend([a, b]);
                    full.extend_from_slice(&idx[k + 1..]);
                    let coef = if k % 2 == 0 {
                        coef.clone()
                    } else {
                        -coef.clone()
                    };
                    entries.push((full, coef));
                }
            }
        }
    }
    Form::new(t.chart.clone(), degree, entries)
}

/// The basis-deformation part `Σ_I a_I d(dx^I)`.
fn metric_term(t: &Form, tor: &Torsion) -> Form {
    let mut acc = Form::zero(t.chart().clone(), t.degree() + 1);
    for (idx, a) in t.terms() {
        let bd = basis_differential_with(tor, idx).expect("stored indices are sorted");
        acc = acc.add(&bd.scale(a)).expect("same chart and degree");
    }
    acc
}

/// `d t` on the deforming frame: the flat derivative plus the
/// basis-deformation term.
pub fn evolutionary_derivative(t: &Form, c: &Connection) -> Result<Form> {
    if t.chart() != c.chart() {
        return Err(Error::ChartMismatch);
    }
    let flat = exterior_derivative_flat(t);
    if t.degree() + 1 > t.chart().dim() {
        return Ok(flat);
    }
    flat.add(&metric_term(t, &torsion(c)))
}

/// Two-term split of the commutator of an evolutionary form.
#[derive(Clone, Debug, PartialEq)]
pub struct CommutatorReport {
    /// Derivatives of the form's coefficients.
    pub coefficient_term: Form,
    /// Contribution of the connection's antisymmetric part.
    pub metric_term: Form,
    pub total: Form,
    /// `Holds` when the respective term vanishes identically.
    pub coefficient_vanishes: Verdict,
    pub metric_vanishes: Verdict,
    pub total_vanishes: Verdict,
    /// Euclidean norm of the total-term coefficients at the probe point.
    /// `None` when a coefficient is undefined there.
    pub discontinuity: Option<f64>,
    /// Exact square of the norm, when every coefficient evaluates to a
    /// rational at the probe.
    pub discontinuity_squared: Option<Rational>,
}

pub fn form_commutator(
    t: &Form,
    c: &Connection,
    probe: &[Rational],
    sampler: &Sampler,
) -> Result<CommutatorReport> {
    if t.chart() != c.chart() {
        return Err(Error::ChartMismatch);
    }
    let n = t.chart().dim();
    if probe.len() != n {
        return Err(Error::ProbeDimension {
            got: probe.len(),
            expected: n,
        });
    }
    let coefficient_term = exterior_derivative_flat(t);
    let metric_term = if t.degree() < n {
        metric_term(t, &torsion(c))
    } else {
        Form::zero(t.chart().clone(), t.degree() + 1)
    };
    let total = coefficient_term.add(&metric_term)?;
    let (discontinuity, discontinuity_squared) = probe_norm(&total, probe);
    Ok(CommutatorReport {
        coefficient_vanishes: coefficient_term.vanishes(sampler),
        metric_vanishes: metric_term.vanishes(sampler),
        total_vanishes: total.vanishes(sampler),
        coefficient_term,
        metric_term,
        total,
        discontinuity,
        discontinuity_squared,
    })
}

/// Norm of the coefficients of `t` at `probe`, as a float and, when the
/// coefficients are rational functions, as an exact square.
pub fn probe_norm(t: &Form, probe: &[Rational]) -> (Option<f64>, Option<Rational>) {
    let bindings: BTreeMap<usize, Expr> = probe
        .iter()
        .enumerate()
        .map(|(i, r)| (i, Expr::Const(r.clone())))
        .collect();
    let point: Vec<f64> = probe
        .iter()
        .map(|r| r.to_f64().unwrap_or(f64::NAN))
        .collect();
    let mut exact = Some(Rational::zero());
    let mut sum = 0.0;
    let mut defined = true;
    for (_, a) in t.terms() {
        let at = symexpr::substitute(a, &bindings);
        match (&mut exact, at.constant_value()) {
            (Some(acc), Some(v)) => *acc += &v * &v,
            _ => exact = None,
        }
        match a.evaluate(&point) {
            Ok(v) => sum += v * v,
            Err(_) => defined = false,
        }
    }
    let float = match &exact {
        Some(r) => r.to_f64().map(f64::sqrt),
        None if defined => Some(sum.sqrt()),
        None => None,
    };
    (float, exact)
}

/// Independent expansion of the degree-1 commutator coefficient
/// `K_{αβ} = (∂a_β/∂x^α − ∂a_α/∂x^β) + (Γ^σ_{βα} − Γ^σ_{αβ}) a_σ`.
pub fn one_form_commutator_coefficient(t: &Form, c: &Connection, a: usize, b: usize) -> Expr {
    let n = t.chart().dim();
    let mut parts = vec![t.coefficient(&[b]).diff(a), -t.coefficient(&[a]).diff(b)];
    for s in 0..n {
        parts.push((c.get(s, b, a).clone() - c.get(s, a, b).clone()) * t.coefficient(&[s]));
    }
    Expr::Add(parts).simplify()
}
