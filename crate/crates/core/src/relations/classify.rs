use std::fmt;

use crate::{Error, Result};

/// Interaction type labelled by the degree `k` of the generated closed form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Interaction {
    Strong,
    Weak,
    Electromagnetic,
    Gravitational,
}

impl Interaction {
    pub fn from_degree(k: usize) -> Option<Interaction> {
        match k {
            0 => Some(Interaction::Strong),
            1 => Some(Interaction::Weak),
            2 => Some(Interaction::Electromagnetic),
            3 => Some(Interaction::Gravitational),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Interaction::Strong => "strong",
            Interaction::Weak => "weak",
            Interaction::Electromagnetic => "electromagnetic",
            Interaction::Gravitational => "gravitational",
        }
    }
}

impl fmt::Display for Interaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The `(p, k, n)` label of a generated structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StructureClass {
    /// Degree of the evolutionary form.
    pub p: usize,
    /// Degree of the closed form generated.
    pub k: usize,
    /// Dimension of the original space.
    pub n: usize,
    /// Dimension of the space the structures form.
    pub formed_dim: usize,
    /// `N − k`.
    pub pseudostructure_dim: usize,
    pub interaction: Interaction,
}

pub fn classify(p: usize, k: usize, n: usize, formed_dim: usize) -> Result<StructureClass> {
    if p > 3 || k > p {
        return Err(Error::OutOfRange(format!(
            "degrees must satisfy 0 <= k <= p <= 3, got p = {p}, k = {k}"
        )));
    }
    if formed_dim < k {
        return Err(Error::OutOfRange(format!(
            "dimension N = {formed_dim} is smaller than k = {k}"
        )));
    }
    Ok(StructureClass {
        p,
        k,
        n,
        formed_dim,
        pseudostructure_dim: formed_dim - k,
        interaction: Interaction::from_degree(k).expect("k <= 3"),
    })
}
