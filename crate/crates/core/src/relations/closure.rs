use crate::forms::{pullback_to, Form, Pseudostructure};
use crate::geometry::{evolutionary_derivative, Connection};
use crate::symexpr::{Sampler, Verdict};
use crate::Result;

/// Whether every coefficient of the evolutionary differential of `t`
/// vanishes. `Holds` means closed.
pub fn is_closed(t: &Form, c: &Connection, sampler: &Sampler) -> Result<Verdict> {
    Ok(evolutionary_derivative(t, c)?.vanishes(sampler))
}

/// Closure of the restriction of `t` to `pi`, under the restricted
/// connection.
pub fn is_closed_on(
    t: &Form,
    pi: &Pseudostructure,
    c: &Connection,
    sampler: &Sampler,
) -> Result<Verdict> {
    let restricted = pullback_to(t, pi)?;
    is_closed(&restricted, &c.pullback(pi)?, sampler)
}
