use std::sync::Arc;

use crate::forms::{homotopy_antiderivative, Form};
use crate::geometry::Connection;
use crate::symexpr::{Chart, Expr, Sampler, Verdict};
use crate::{Error, Result};

use super::closure::is_closed;

/// A map `(q, p) ↦ (Q, P)` on a chart split as `(q_1 … q_m, p_1 … p_m)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalMap {
    chart: Arc<Chart>,
    q: Vec<Expr>,
    p: Vec<Expr>,
}

impl CanonicalMap {
    pub fn new(chart: Arc<Chart>, q: Vec<Expr>, p: Vec<Expr>) -> Result<CanonicalMap> {
        let n = chart.dim();
        if !n.is_multiple_of(2) {
            return Err(Error::Arity(format!(
                "canonical maps need an even-dimensional chart, got {n}"
            )));
        }
        if q.len() != n / 2 || p.len() != n / 2 {
            return Err(Error::Arity(format!(
                "expected {} images for Q and for P, got {} and {}",
                n / 2,
                q.len(),
                p.len()
            )));
        }
        Ok(CanonicalMap { chart, q, p })
    }

    pub fn identity(chart: Arc<Chart>) -> Result<CanonicalMap> {
        let m = chart.dim() / 2;
        let q = (0..m).map(Expr::Var).collect();
        let p = (m..2 * m).map(Expr::Var).collect();
        CanonicalMap::new(chart, q, p)
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn q_images(&self) -> &[Expr] {
        &self.q
    }

    pub fn p_images(&self) -> &[Expr] {
        &self.p
    }
}

/// `Σ p_j dq_j` on a chart split as `(q, p)`.
pub fn liouville_form(chart: Arc<Chart>) -> Result<Form> {
    let n = chart.dim();
    if !n.is_multiple_of(2) {
        return Err(Error::Arity(format!(
            "the Liouville form needs an even-dimensional chart, got {n}"
        )));
    }
    let m = n / 2;
    Form::new(
        chart,
        1,
        (0..m)
            .map(|j| (vec![j], Expr::Var(m + j)))
            .collect::<Vec<_>>(),
    )
}

/// `Σ dp_i ∧ dq_i`.
pub fn symplectic_form(chart: Arc<Chart>) -> Result<Form> {
    let n = chart.dim();
    if !n.is_multiple_of(2) {
        return Err(Error::Arity(format!(
            "the symplectic form needs an even-dimensional chart, got {n}"
        )));
    }
    let m = n / 2;
    Form::new(
        chart,
        2,
        (0..m)
            .map(|i| (vec![m + i, i], Expr::one()))
            .collect::<Vec<_>>(),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalReport {
    /// `δ = Σ p_j dq_j − Σ P_j dQ_j`.
    pub delta: Form,
    pub is_canonical: Verdict,
    /// Generating function with `dW = δ`, when `δ` is exactly closed and
    /// polynomial.
    pub generating_function: Option<Form>,
}

pub fn verify_canonical(map: &CanonicalMap, sampler: &Sampler) -> Result<CanonicalReport> {
    let chart = map.chart.clone();
    let n = chart.dim();
    let mut entries: Vec<(Vec<usize>, Expr)> = liouville_form(chart.clone())?
        .terms()
        .map(|(i, e)| (i.clone(), e.clone()))
        .collect();
    for (big_q, big_p) in map.q.iter().zip(&map.p) {
        for i in 0..n {
            entries.push((vec![i], -(big_p.clone() * big_q.diff(i))));
        }
    }
    let delta = Form::new(chart.clone(), 1, entries)?;
    let is_canonical = is_closed(&delta, &Connection::zero(chart), sampler)?;
    let generating_function = if is_canonical == Verdict::EXACT_TRUE {
        homotopy_antiderivative(&delta).ok()
    } else {
        None
    };
    Ok(CanonicalReport {
        delta,
        is_canonical,
        generating_function,
    })
}
