use std::collections::BTreeMap;

use crate::forms::Pseudostructure;
use crate::symexpr::{self, Chart, Expr, Sampler, Verdict};
use crate::{Error, Result};

/// Degeneracy indicators of a family of functions. Each is present only
/// when its arity condition is met.
#[derive(Clone, Debug, PartialEq)]
pub struct DegeneracyIndicators {
    /// `det(∂f_i/∂x^j)` when there are as many functions as coordinates.
    pub jacobian: Option<Expr>,
    /// `{f, g}` for two functions on an even-dimensional chart.
    pub poisson_bracket: Option<Expr>,
}

pub fn jacobian(fns: &[Expr], chart: &Chart) -> Result<Expr> {
    let n = chart.dim();
    if fns.len() != n {
        return Err(Error::Arity(format!(
            "jacobian needs {n} functions, got {}",
            fns.len()
        )));
    }
    let rows: Vec<Vec<Expr>> = fns
        .iter()
        .map(|f| (0..n).map(|j| f.diff(j)).collect())
        .collect();
    symexpr::determinant(&rows)
}

/// `{f, g} = Σ_i (∂f/∂q_i ∂g/∂p_i − ∂f/∂p_i ∂g/∂q_i)` with the chart split
/// as `(q_1 … q_m, p_1 … p_m)`.
pub fn poisson_bracket(f: &Expr, g: &Expr, chart: &Chart) -> Result<Expr> {
    let n = chart.dim();
    if !n.is_multiple_of(2) {
        return Err(Error::Arity(format!(
            "poisson bracket needs an even-dimensional chart, got {n}"
        )));
    }
    let m = n / 2;
    let parts: Vec<Expr> = (0..m)
        .map(|i| f.diff(i) * g.diff(m + i) - f.diff(m + i) * g.diff(i))
        .collect();
    Ok(Expr::Add(parts).simplify())
}

pub fn degeneracy_indicators(fns: &[Expr], chart: &Chart) -> Result<DegeneracyIndicators> {
    let n = chart.dim();
    let jacobian = (fns.len() == n).then(|| jacobian(fns, chart)).transpose()?;
    let poisson_bracket = (fns.len() == 2 && n.is_multiple_of(2))
        .then(|| poisson_bracket(&fns[0], &fns[1], chart))
        .transpose()?;
    if jacobian.is_none() && poisson_bracket.is_none() {
        return Err(Error::Arity(format!(
            "{} functions on a {n}-dimensional chart admit neither a jacobian nor a poisson bracket",
            fns.len()
        )));
    }
    Ok(DegeneracyIndicators {
        jacobian,
        poisson_bracket,
    })
}

/// Whether `e` vanishes identically on the slice `pi`.
pub fn vanishes_on(e: &Expr, pi: &Pseudostructure, sampler: &Sampler) -> Verdict {
    let bindings: BTreeMap<usize, Expr> = pi
        .constraints()
        .iter()
        .map(|(k, v)| (*k, v.clone()))
        .collect();
    sampler.is_zero(&symexpr::substitute(e, &bindings))
}
