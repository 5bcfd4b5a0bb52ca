//! Machine checks of the structural results and LP bound harnesses.

mod bounds;
mod checks;
pub mod fixtures;
pub mod sampler;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bounds::{bound_cutting_plane, bound_dynamic_linearization, bound_static, BoundReport, Relaxation};
pub use checks::{
    check_fig3_propositions, check_path_lemma, check_projection_lemma, check_theorem, enumerate_partitioning_linearizations,
};

use crate::linearization::LinError;
use crate::model::{ModelError, VarKey, VarSet};
use crate::poly::{LinIneq, PolyError};
use crate::rational::{self, Rational};
use crate::relax::RelaxError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("{what} exceeds the guard: {got} > {limit}")]
    TooLarge { what: &'static str, got: usize, limit: usize },
    #[error("{0} is not an edge of the hypergraph")]
    NotAnEdge(VarSet),
    #[error("extra linearization #{index} is not a linearization of the hypergraph: {reason}")]
    InvalidExtraLinearization { index: usize, reason: String },
    #[error("the relaxation together with the constraints is infeasible")]
    Infeasible,
    #[error(transparent)]
    Lin(#[from] LinError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Relax(#[from] RelaxError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub(crate) fn guard(what: &'static str, got: usize, limit: usize) -> Result<(), VerifyError> {
    if got > limit {
        return Err(VerifyError::TooLarge { what, got, limit });
    }
    Ok(())
}

/// One coordinate of a point file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointEntry {
    pub vars: Vec<u32>,
    #[serde(with = "rational::serde_str")]
    pub value: Rational,
}

pub fn point_entries(point: &BTreeMap<VarKey, Rational>) -> Vec<PointEntry> {
    point.iter().map(|(k, v)| PointEntry { vars: k.members().to_vec(), value: v.clone() }).collect()
}

pub fn point_from_entries(entries: &[PointEntry]) -> Result<BTreeMap<VarKey, Rational>, ModelError> {
    let mut out = BTreeMap::new();
    for e in entries {
        let key = VarKey::from_set(VarSet::new(e.vars.iter().copied())?);
        out.insert(key, e.value.clone());
    }
    Ok(out)
}

/// Data needed to replay a failed check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub description: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_vars: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<Vec<u32>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<PointEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inequality: Option<LinIneq>,
}

impl Counterexample {
    pub fn new(description: impl Into<String>) -> Self {
        Counterexample { description: description.into(), num_vars: None, edges: None, point: None, inequality: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
    pub stats: BTreeMap<String, u64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CheckReport {
    pub(crate) fn new(name: impl Into<String>) -> Self {
        CheckReport { name: name.into(), holds: true, counterexample: None, stats: BTreeMap::new(), notes: Vec::new() }
    }

    pub(crate) fn fail(&mut self, cex: Counterexample) {
        self.holds = false;
        if self.counterexample.is_none() {
            self.counterexample = Some(cex);
        }
    }

    pub(crate) fn count(&mut self, key: &str, by: u64) {
        *self.stats.entry(key.to_string()).or_insert(0) += by;
    }
}
