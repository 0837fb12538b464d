//! Closure, relations and the structures they generate.

mod canonical;
mod classify;
mod closure;
mod degeneracy;
mod relation;
mod search;

pub use canonical::{
    liouville_form, symplectic_form, verify_canonical, CanonicalMap, CanonicalReport,
};
pub use classify::{classify, Interaction, StructureClass};
pub use closure::{is_closed, is_closed_on};
pub use degeneracy::{
    degeneracy_indicators, jacobian, poisson_bracket, vanishes_on, DegeneracyIndicators,
};
pub use relation::{
    integrate_relation, integration_chain, relation_kind, restrict_relation, ChainStep, Relation,
    RelationKind,
};
pub use search::{pseudostructure_search, OriginationEvent, MAX_SEARCH_DIM};
