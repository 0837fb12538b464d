use std::fmt;

use crate::forms::{
    exterior_derivative_flat, homotopy_antiderivative, pullback_to, Form, Pseudostructure,
};
use crate::geometry::Connection;
use crate::symexpr::{Confidence, Sampler, Verdict};
use crate::{Error, Result};

use super::closure::is_closed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RelationKind {
    /// Both sides are closed objects and agree: `dψ = ω` with `ω` closed.
    Identical,
    /// The right-hand side is not closed, so no potential can exist.
    Nonidentical,
    /// Only probabilistic evidence is available; never silently decided.
    Indeterminate,
}

impl RelationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RelationKind::Identical => "identical",
            RelationKind::Nonidentical => "nonidentical",
            RelationKind::Indeterminate => "indeterminate",
        }
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `dψ = ω` together with the connection of the frame it lives on.
///
/// When the relation has been restricted, the forms live on the induced
/// chart of [`Relation::pseudostructure`], which is expressed in the
/// coordinates of the original chart.
#[derive(Clone, Debug, PartialEq)]
pub struct Relation {
    lhs: Option<Form>,
    rhs: Form,
    connection: Connection,
    pseudostructure: Option<Pseudostructure>,
    kind: RelationKind,
    confidence: Confidence,
}

impl Relation {
    /// Builds and diagnoses a relation. Without a candidate potential the
    /// kind is judged from the right-hand side alone.
    pub fn new(
        lhs: Option<Form>,
        rhs: Form,
        connection: Connection,
        sampler: &Sampler,
    ) -> Result<Relation> {
        if connection.chart() != rhs.chart() {
            return Err(Error::ChartMismatch);
        }
        if let Some(psi) = &lhs {
            rhs.same_chart(psi)?;
            if psi.degree() + 1 != rhs.degree() {
                return Err(Error::DegreeMismatch(format!(
                    "potential of degree {} against a form of degree {}",
                    psi.degree(),
                    rhs.degree()
                )));
            }
        }
        let mut r = Relation {
            lhs,
            rhs,
            connection,
            pseudostructure: None,
            kind: RelationKind::Indeterminate,
            confidence: Confidence::Indeterminate,
        };
        let (kind, confidence) = diagnose(&r, sampler)?;
        r.kind = kind;
        r.confidence = confidence;
        Ok(r)
    }

    pub fn lhs(&self) -> Option<&Form> {
        self.lhs.as_ref()
    }

    pub fn rhs(&self) -> &Form {
        &self.rhs
    }

    pub fn connection(&self) -> &Connection {
        &self.connection
    }

    pub fn pseudostructure(&self) -> Option<&Pseudostructure> {
        self.pseudostructure.as_ref()
    }

    pub fn kind(&self) -> RelationKind {
        self.kind
    }

    pub fn confidence(&self) -> Confidence {
        self.confidence
    }

    /// Degree of the right-hand side.
    pub fn degree(&self) -> usize {
        self.rhs.degree()
    }
}

fn diagnose(r: &Relation, sampler: &Sampler) -> Result<(RelationKind, Confidence)> {
    let mut verdicts = vec![is_closed(&r.rhs, &r.connection, sampler)?];
    if let Some(psi) = &r.lhs {
        verdicts.push(exterior_derivative_flat(psi).sub(&r.rhs)?.vanishes(sampler));
    }
    Ok(kind_of(Verdict::all(verdicts)))
}

/// A relation is identical only on exact evidence; a probable identity is
/// surfaced as indeterminate with probable confidence.
fn kind_of(v: Verdict) -> (RelationKind, Confidence) {
    match v {
        Verdict::Holds(crate::symexpr::Certainty::Exact) => {
            (RelationKind::Identical, Confidence::Exact)
        }
        Verdict::Holds(_) => (RelationKind::Indeterminate, Confidence::Probable),
        Verdict::Fails(c) => (RelationKind::Nonidentical, c.into()),
        Verdict::Indeterminate => (RelationKind::Indeterminate, Confidence::Indeterminate),
    }
}

/// Kind and confidence of `r`, recomputed from its forms.
pub fn relation_kind(r: &Relation, sampler: &Sampler) -> Result<(RelationKind, Confidence)> {
    diagnose(r, sampler)
}

/// Restricts a nonidentical relation to a slice of its chart. When the
/// restricted right-hand side closes, the restricted potential is the
/// homotopy representative of it (absent when the coefficients are not
/// polynomial or the closure is due to torsion only).
///
/// Confidence never increases: the result is capped by the input's.
pub fn restrict_relation(
    r: &Relation,
    pi: &Pseudostructure,
    sampler: &Sampler,
) -> Result<Relation> {
    if r.kind != RelationKind::Nonidentical {
        return Err(Error::Precondition(format!(
            "only nonidentical relations are restricted; this one is {}",
            r.kind
        )));
    }
    let restricted = restrict_unchecked(r, pi, sampler)?;
    if restricted.kind == RelationKind::Nonidentical {
        return Err(Error::NoOrigination(format!(
            "the restriction to {pi} is still not closed"
        )));
    }
    Ok(restricted)
}

pub(crate) fn restrict_unchecked(
    r: &Relation,
    pi: &Pseudostructure,
    sampler: &Sampler,
) -> Result<Relation> {
    let rhs = pullback_to(&r.rhs, pi)?;
    let connection = r.connection.pullback(pi)?;
    let closure = is_closed(&rhs, &connection, sampler)?.capped(r.confidence);
    let (kind, confidence) = kind_of(closure);
    let lhs = match kind {
        RelationKind::Nonidentical => None,
        _ if rhs.degree() == 0 => None,
        _ => homotopy_antiderivative(&rhs).ok(),
    };
    let pseudostructure = Some(match &r.pseudostructure {
        Some(outer) => outer.compose(pi)?,
        None => pi.clone(),
    });
    Ok(Relation {
        lhs,
        rhs,
        connection,
        pseudostructure,
        kind,
        confidence,
    })
}

/// One step of sequential integration: the potential `χ` of the closed
/// right-hand side becomes the right-hand side of a new relation of degree
/// one lower, with an unknown potential, re-diagnosed under the same
/// connection.
pub fn integrate_relation(r: &Relation, sampler: &Sampler) -> Result<Relation> {
    if r.kind != RelationKind::Identical {
        return Err(Error::Precondition(format!(
            "only identical relations are integrated; this one is {}",
            r.kind
        )));
    }
    if r.rhs.degree() == 0 {
        return Err(Error::DegreeMismatch(
            "a 0-form cannot be integrated further".into(),
        ));
    }
    let chi = homotopy_antiderivative(&r.rhs)?;
    let mut next = Relation::new(None, chi, r.connection.clone(), sampler)?;
    next.pseudostructure = r.pseudostructure.clone();
    Ok(next)
}

/// A closed form produced by sequential integration, with the
/// pseudostructure it is closed on.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainStep {
    /// Degree `k` of the closed form.
    pub degree: usize,
    pub relation: Relation,
    /// Closure of the step's form on its pseudostructure.
    pub closed: Verdict,
}

/// Runs sequential integration from an identical relation down to degree
/// zero. Whenever an integrated relation is not identical, the first
/// coordinate slice (smallest, then lexicographic, constants symbolic) on
/// which it restricts to an identical relation with a nonzero right-hand
/// side is taken. The chain stops early if no such slice exists.
pub fn integration_chain(r: &Relation, sampler: &Sampler) -> Result<Vec<ChainStep>> {
    if r.kind != RelationKind::Identical {
        return Err(Error::Precondition(format!(
            "sequential integration starts from an identical relation; this one is {}",
            r.kind
        )));
    }
    let mut steps = vec![step(r.clone(), sampler)?];
    let mut current = r.clone();
    while current.rhs.degree() > 0 {
        let next = integrate_relation(&current, sampler)?;
        let closed = if next.kind == RelationKind::Identical {
            Some(next)
        } else {
            slice_to_identical(&next, sampler)?
        };
        match closed {
            Some(rel) => {
                steps.push(step(rel.clone(), sampler)?);
                current = rel;
            }
            None => break,
        }
    }
    Ok(steps)
}

fn step(relation: Relation, sampler: &Sampler) -> Result<ChainStep> {
    let closed = is_closed(&relation.rhs, &relation.connection, sampler)?;
    Ok(ChainStep {
        degree: relation.rhs.degree(),
        relation,
        closed,
    })
}

fn slice_to_identical(r: &Relation, sampler: &Sampler) -> Result<Option<Relation>> {
    let chart = r.rhs.chart().clone();
    for subset in super::search::subsets(chart.dim(), true) {
        let pi = Pseudostructure::symbolic(chart.clone(), &subset)?;
        let restricted = restrict_unchecked(r, &pi, sampler)?;
        if restricted.kind == RelationKind::Identical && !restricted.rhs.is_zero() {
            return Ok(Some(restricted));
        }
    }
    Ok(None)
}
