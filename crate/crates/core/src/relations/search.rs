use crate::forms::{hodge_star, pullback_to, Form, Metric, Pseudostructure};
use crate::geometry::{evolutionary_derivative, Connection};
use crate::symexpr::{Sampler, Verdict};
use crate::{Error, Result};

use super::closure::is_closed;
use super::relation::{restrict_unchecked, Relation};

/// Largest chart dimension accepted by [`pseudostructure_search`].
pub const MAX_SEARCH_DIM: usize = 6;

/// A slice on which an unclosed form and its dual both close.
#[derive(Clone, Debug, PartialEq)]
pub struct OriginationEvent {
    pub pseudostructure: Pseudostructure,
    /// The form restricted to the slice.
    pub restricted: Form,
    pub form_closed: Verdict,
    pub dual_closed: Verdict,
    /// The relation on the slice, with the homotopy potential when one
    /// exists.
    pub relation: Relation,
    /// Total commutator of the form off the slice.
    pub residual: Form,
    pub residual_vanishes: Verdict,
}

/// Nonempty subsets of `0..n` ordered by size, then lexicographically. The
/// full set is included only when `include_full` holds.
pub(crate) fn subsets(n: usize, include_full: bool) -> Vec<Vec<usize>> {
    let top = if include_full { n } else { n.saturating_sub(1) };
    (1..=top)
        .flat_map(|k| crate::forms::multi_indices(n, k))
        .collect()
}

/// Searches coordinate slices `{x^j = c_j : j ∈ J}` with symbolic constants
/// on which both `t` and its Hodge dual close.
///
/// Events are emitted only when the total commutator of `t` is nonzero off
/// the slice. Slices on which `t` restricts to the zero form are skipped as
/// trivial, and supersets of an accepted slice are not reported separately
/// since they lie inside its family.
pub fn pseudostructure_search(
    t: &Form,
    g: &Metric,
    c: &Connection,
    sampler: &Sampler,
) -> Result<Vec<OriginationEvent>> {
    let chart = t.chart().clone();
    let n = chart.dim();
    if n > MAX_SEARCH_DIM {
        return Err(Error::OutOfRange(format!(
            "pseudostructure search is limited to {MAX_SEARCH_DIM} dimensions, got {n}"
        )));
    }
    let dual = hodge_star(t, g)?;
    let residual = evolutionary_derivative(t, c)?;
    let residual_vanishes = residual.vanishes(sampler);
    if !residual_vanishes.fails() {
        return Ok(Vec::new());
    }
    let base = Relation::new(None, t.clone(), c.clone(), sampler)?;
    let mut accepted: Vec<Vec<usize>> = Vec::new();
    let mut events = Vec::new();
    for subset in subsets(n, true) {
        if accepted
            .iter()
            .any(|a| a.iter().all(|j| subset.contains(j)))
        {
            continue;
        }
        let pi = Pseudostructure::symbolic(chart.clone(), &subset)?;
        let restricted = pullback_to(t, &pi)?;
        if restricted.is_zero() {
            continue;
        }
        let local = c.pullback(&pi)?;
        let form_closed = is_closed(&restricted, &local, sampler)?;
        if !form_closed.holds() {
            continue;
        }
        let dual_closed = is_closed(&pullback_to(&dual, &pi)?, &local, sampler)?;
        if !dual_closed.holds() {
            continue;
        }
        let relation = restrict_unchecked(&base, &pi, sampler)?;
        accepted.push(subset);
        events.push(OriginationEvent {
            pseudostructure: pi,
            restricted,
            form_closed,
            dual_closed,
            relation,
            residual: residual.clone(),
            residual_vanishes,
        });
    }
    Ok(events)
}
