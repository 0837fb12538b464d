//! Balance conservation laws of a material system and their equilibrium
//! diagnosis.
//!
//! In the accompanying chart `(ξ^1, …, ξ^n)`, with `ξ^1` along the
//! trajectory, the energy and momentum balance equations read
//! `∂ψ/∂ξ^μ = A_μ`. Convolved together they give `dψ = A_μ dξ^μ`, a relation
//! that is identical only when the form `ω = A_μ dξ^μ` is closed.

use std::fmt;
use std::sync::Arc;

use crate::forms::{Form, Metric};
use crate::geometry::{form_commutator, CommutatorReport, Connection};
use crate::relations::{pseudostructure_search, OriginationEvent, Relation};
use crate::symexpr::{Chart, Confidence, Expr, Rational, Sampler, Verdict};
use crate::{Error, Result};

/// Groups of balance laws; each one added raises the degree of the
/// evolutionary form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LawGroup {
    Energy,
    Momentum,
    AngularMomentum,
    Mass,
}

/// Degree implied by a set of law groups: energy and momentum give 1,
/// angular momentum raises it to 2 and mass to 3.
pub fn degree_for_laws(groups: &[LawGroup]) -> Result<usize> {
    let has = |g| groups.contains(&g);
    if !(has(LawGroup::Energy) && has(LawGroup::Momentum)) {
        return Err(Error::UnsupportedDegree(
            "energy and momentum laws are both required".into(),
        ));
    }
    match (has(LawGroup::AngularMomentum), has(LawGroup::Mass)) {
        (false, false) => Ok(1),
        (true, false) => Ok(2),
        (true, true) => Ok(3),
        (false, true) => Err(Error::UnsupportedDegree(
            "the mass law requires the angular momentum law".into(),
        )),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BalanceSystem {
    chart: Arc<Chart>,
    coefficients: Vec<Expr>,
    connection: Option<Connection>,
    degree: usize,
    form: Option<Form>,
}

impl BalanceSystem {
    /// First-degree system with action coefficients `A_μ`.
    pub fn new(chart: Arc<Chart>, coefficients: Vec<Expr>) -> Result<BalanceSystem> {
        if coefficients.len() != chart.dim() {
            return Err(Error::Arity(format!(
                "{} action coefficients for a chart of dimension {}",
                coefficients.len(),
                chart.dim()
            )));
        }
        Ok(BalanceSystem {
            chart,
            coefficients,
            connection: None,
            degree: 1,
            form: None,
        })
    }

    pub fn with_connection(mut self, c: Connection) -> Result<BalanceSystem> {
        if c.chart() != &self.chart {
            return Err(Error::ChartMismatch);
        }
        self.connection = Some(c);
        Ok(self)
    }

    pub fn with_degree(mut self, degree: usize) -> Result<BalanceSystem> {
        if degree > 3 {
            return Err(Error::UnsupportedDegree(format!(
                "balance degree must be at most 3, got {degree}"
            )));
        }
        self.degree = degree;
        Ok(self)
    }

    /// Supplies the evolutionary form directly; required for degrees 2
    /// and 3.
    pub fn with_form(mut self, form: Form) -> Result<BalanceSystem> {
        if form.chart() != &self.chart {
            return Err(Error::ChartMismatch);
        }
        self.form = Some(form);
        Ok(self)
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn coefficients(&self) -> &[Expr] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn connection(&self) -> Connection {
        self.connection
            .clone()
            .unwrap_or_else(|| Connection::zero(self.chart.clone()))
    }

    /// The evolutionary form of the system: the supplied one, or
    /// `Σ A_μ dξ^μ` for first-degree systems.
    pub fn evolutionary_form(&self) -> Result<Form> {
        if self.degree == 0 {
            return Err(Error::UnsupportedDegree(
                "a degree-0 balance relation has no differential form".into(),
            ));
        }
        match &self.form {
            Some(f) if f.degree() != self.degree => Err(Error::DegreeMismatch(format!(
                "declared degree {} but the supplied form has degree {}",
                self.degree,
                f.degree()
            ))),
            Some(f) => Ok(f.clone()),
            None => assemble_balance_form(self),
        }
    }
}

/// `ω = Σ A_μ dξ^μ`. Only first-degree systems are assembled.
pub fn assemble_balance_form(s: &BalanceSystem) -> Result<Form> {
    if s.degree != 1 {
        return Err(Error::UnsupportedDegree(format!(
            "only first-degree balance forms are assembled from coefficients, got degree {}",
            s.degree
        )));
    }
    Form::one_form(s.chart.clone(), &s.coefficients)
}

/// `dψ = ω` for the system, with an optional candidate state function.
pub fn build_evolutionary_relation(
    s: &BalanceSystem,
    psi: Option<Form>,
    sampler: &Sampler,
) -> Result<Relation> {
    let omega = s.evolutionary_form()?;
    Relation::new(psi, omega, s.connection(), sampler)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EquilibriumState {
    Equilibrium,
    Nonequilibrium,
    /// Unclosed overall, but closed on the pseudostructures of the events.
    LocallyEquilibrium,
    /// Only probabilistic evidence about the commutator.
    Indeterminate,
}

impl EquilibriumState {
    pub fn as_str(self) -> &'static str {
        match self {
            EquilibriumState::Equilibrium => "EQUILIBRIUM",
            EquilibriumState::Nonequilibrium => "NONEQUILIBRIUM",
            EquilibriumState::LocallyEquilibrium => "LOCALLY_EQUILIBRIUM",
            EquilibriumState::Indeterminate => "INDETERMINATE",
        }
    }
}

impl fmt::Display for EquilibriumState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumDiagnosis {
    pub relation: Relation,
    pub commutator: CommutatorReport,
    pub state: EquilibriumState,
    pub confidence: Confidence,
    /// Norm of the commutator at the probe point.
    pub internal_force: Option<f64>,
    /// Slices where the system is locally in equilibrium, with the state
    /// functions found there.
    pub events: Vec<OriginationEvent>,
}

pub fn equilibrium_report(
    s: &BalanceSystem,
    g: &Metric,
    probe: &[Rational],
    sampler: &Sampler,
) -> Result<EquilibriumDiagnosis> {
    if g.chart() != &s.chart {
        return Err(Error::ChartMismatch);
    }
    let relation = build_evolutionary_relation(s, None, sampler)?;
    let connection = s.connection();
    let commutator = form_commutator(relation.rhs(), &connection, probe, sampler)?;
    let verdict = commutator.total_vanishes;
    let (state, confidence, events) = match verdict {
        Verdict::Holds(_) if verdict.is_exact() => {
            (EquilibriumState::Equilibrium, Confidence::Exact, Vec::new())
        }
        Verdict::Fails(c) => {
            let events = pseudostructure_search(relation.rhs(), g, &connection, sampler)?;
            let state = if events.is_empty() {
                EquilibriumState::Nonequilibrium
            } else {
                EquilibriumState::LocallyEquilibrium
            };
            (state, c.into(), events)
        }
        v => (EquilibriumState::Indeterminate, v.confidence(), Vec::new()),
    };
    Ok(EquilibriumDiagnosis {
        internal_force: commutator.discontinuity,
        relation,
        commutator,
        state,
        confidence,
        events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::exterior_derivative_flat;
    use crate::relations::{restrict_relation, RelationKind};

    fn xi(n: usize) -> Arc<Chart> {
        Arc::new(Chart::numbered("xi", n).unwrap())
    }

    fn v(i: usize) -> Expr {
        Expr::Var(i)
    }

    fn ones(n: usize) -> Vec<Rational> {
        vec![Rational::from_integer(1.into()); n]
    }

    fn report(s: &BalanceSystem) -> EquilibriumDiagnosis {
        let g = Metric::euclidean(s.chart().clone());
        equilibrium_report(s, &g, &ones(s.chart().dim()), &Sampler::default()).unwrap()
    }

    #[test]
    fn assembly_examples() {
        let c = xi(2);
        let s = BalanceSystem::new(c.clone(), vec![v(1), v(0)]).unwrap();
        let w = assemble_balance_form(&s).unwrap();
        assert_eq!(
            w,
            exterior_derivative_flat(&Form::scalar(c.clone(), v(0) * v(1)))
        );

        let s = BalanceSystem::new(c.clone(), vec![v(1), -v(0)]).unwrap();
        let r = build_evolutionary_relation(&s, None, &Sampler::default()).unwrap();
        assert_eq!(r.kind(), RelationKind::Nonidentical);
        let k = form_commutator(r.rhs(), &s.connection(), &ones(2), &Sampler::default()).unwrap();
        assert_eq!(k.total.coefficient(&[0, 1]), Expr::int(-2));

        let s = BalanceSystem::new(c, vec![Expr::one(), Expr::one()]).unwrap();
        let r = build_evolutionary_relation(&s, None, &Sampler::default()).unwrap();
        assert_eq!(r.kind(), RelationKind::Identical);
    }

    #[test]
    fn relation_examples() {
        let c = xi(2);
        let sampler = Sampler::default();
        let s = BalanceSystem::new(c.clone(), vec![v(1), v(0)]).unwrap();
        let psi = Form::scalar(c.clone(), v(0) * v(1));
        let r = build_evolutionary_relation(&s, Some(psi.clone()), &sampler).unwrap();
        assert_eq!(r.kind(), RelationKind::Identical);

        let s = BalanceSystem::new(c.clone(), vec![v(1), Expr::zero()]).unwrap();
        let r = build_evolutionary_relation(&s, Some(psi), &sampler).unwrap();
        assert_eq!(r.kind(), RelationKind::Nonidentical);

        let s = BalanceSystem::new(c, vec![v(1), v(0)])
            .unwrap()
            .with_degree(0)
            .unwrap();
        assert!(matches!(
            build_evolutionary_relation(&s, None, &sampler),
            Err(Error::UnsupportedDegree(_))
        ));
    }

    #[test]
    fn higher_degrees_need_a_supplied_form() {
        let c = xi(3);
        let s = BalanceSystem::new(c.clone(), vec![Expr::zero(); 3])
            .unwrap()
            .with_degree(2)
            .unwrap();
        assert!(matches!(
            s.evolutionary_form(),
            Err(Error::UnsupportedDegree(_))
        ));
        let s = s.with_form(Form::basis(c.clone(), &[0]).unwrap()).unwrap();
        assert!(matches!(
            s.evolutionary_form(),
            Err(Error::DegreeMismatch(_))
        ));
    }

    #[test]
    fn equilibrium() {
        let d = report(&BalanceSystem::new(xi(2), vec![v(1), v(0)]).unwrap());
        assert_eq!(d.state, EquilibriumState::Equilibrium);
        assert_eq!(d.internal_force, Some(0.0));
        assert!(d.events.is_empty());
    }

    #[test]
    fn local_equilibrium_on_trajectory_slices() {
        let s = BalanceSystem::new(xi(2), vec![v(1), Expr::zero()]).unwrap();
        let d = report(&s);
        assert_eq!(d.state, EquilibriumState::LocallyEquilibrium);
        assert_eq!(d.internal_force, Some(1.0));
        let e = &d.events[0];
        assert_eq!(e.pseudostructure.to_string(), "{ xi2 = c_xi2 }");
        assert_eq!(e.relation.lhs().unwrap().display().to_string(), "xi1*c_xi2");
        // every reported slice re-verifies
        for e in &d.events {
            let r =
                restrict_relation(&d.relation, &e.pseudostructure, &Sampler::default()).unwrap();
            assert_eq!(r.kind(), RelationKind::Identical);
        }
    }

    #[test]
    fn rotational_actions_close_on_one_dimensional_slices() {
        // Every 1-form closes on a 1-dimensional slice, so in two
        // dimensions the rotational system is locally in equilibrium even
        // though its commutator is the constant -2.
        let d = report(&BalanceSystem::new(xi(2), vec![v(1), -v(0)]).unwrap());
        assert_eq!(d.internal_force, Some(2.0));
        assert_eq!(d.state, EquilibriumState::LocallyEquilibrium);
    }

    #[test]
    fn nonequilibrium_second_degree_system() {
        // the dual (xi1 + xi3) dxi1 + xi1 dxi2 + xi2 dxi3 fails to close on
        // every coordinate plane while the form itself survives on each
        let c = xi(3);
        let w = Form::new(
            c.clone(),
            2,
            [
                (vec![1, 2], v(0) + v(2)),
                (vec![0, 2], -v(0)),
                (vec![0, 1], v(1)),
            ],
        )
        .unwrap();
        let s = BalanceSystem::new(c, vec![Expr::zero(); 3])
            .unwrap()
            .with_degree(2)
            .unwrap()
            .with_form(w)
            .unwrap();
        let d = report(&s);
        assert_eq!(d.state, EquilibriumState::Nonequilibrium);
        assert_eq!(d.internal_force, Some(1.0));
        assert_eq!(d.relation.kind(), RelationKind::Nonidentical);
    }

    #[test]
    fn inconsistent_actions_are_never_in_equilibrium() {
        let c = xi(2);
        let s = BalanceSystem::new(c, vec![v(1).pow(2), v(0) * v(1)]).unwrap();
        assert_ne!(report(&s).state, EquilibriumState::Equilibrium);
    }

    #[test]
    fn law_group_degrees() {
        use LawGroup::*;
        assert_eq!(degree_for_laws(&[Energy, Momentum]).unwrap(), 1);
        assert_eq!(
            degree_for_laws(&[Energy, Momentum, AngularMomentum]).unwrap(),
            2
        );
        assert_eq!(
            degree_for_laws(&[Mass, Energy, Momentum, AngularMomentum]).unwrap(),
            3
        );
        assert!(degree_for_laws(&[Energy]).is_err());
        assert!(degree_for_laws(&[Energy, Momentum, Mass]).is_err());
    }
}
