//! Exact-rational H-representations: LP, validity, membership, equality and
//! Fourier–Motzkin projection.

mod fm;
mod ineq;
mod lp;

use std::collections::BTreeMap;

use num_traits::Signed;
use thiserror::Error;

pub use fm::{fm_eliminate, project_onto, remove_redundant};
pub use ineq::{IneqSystem, LinIneq};
pub use lp::{lp_solve, Direction, LpOutcome};

use crate::model::VarKey;
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("variable {0} is not part of the system")]
    UnsupportedVariable(VarKey),
    #[error("cannot eliminate {0}: not a variable of the system")]
    UnknownVariable(VarKey),
    #[error("point has no coordinate for {0}")]
    MissingCoordinate(VarKey),
    #[error("systems are over different variable sets")]
    VariableMismatch,
}

/// Whether every point of `sys` satisfies `ineq`. An empty system implies everything.
pub fn is_valid(sys: &IneqSystem, ineq: &LinIneq) -> Result<bool, PolyError> {
    sys.check_support(ineq)?;
    if ineq.is_trivial() {
        return Ok(!ineq.rhs().is_positive() || matches!(feasibility(sys)?, LpOutcome::Infeasible));
    }
    Ok(match lp_solve(sys, ineq.coeffs(), Direction::Min)? {
        LpOutcome::Optimal { value, .. } => value >= *ineq.rhs(),
        LpOutcome::Infeasible => true,
        LpOutcome::Unbounded => false,
    })
}

fn feasibility(sys: &IneqSystem) -> Result<LpOutcome, PolyError> {
    lp_solve(sys, &BTreeMap::new(), Direction::Min)
}

/// Whether the system has any feasible point.
pub fn is_feasible(sys: &IneqSystem) -> Result<bool, PolyError> {
    Ok(!matches!(feasibility(sys)?, LpOutcome::Infeasible))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Membership {
    Inside,
    /// Every violated row, including materialized box rows.
    Outside(Vec<LinIneq>),
}

impl Membership {
    pub fn is_inside(&self) -> bool {
        matches!(self, Membership::Inside)
    }
}

/// Exact membership test; coordinates not in `sys` are ignored.
pub fn is_member(sys: &IneqSystem, point: &BTreeMap<VarKey, Rational>) -> Result<Membership, PolyError> {
    if let Some(k) = sys.vars().iter().find(|k| !point.contains_key(*k)) {
        return Err(PolyError::MissingCoordinate(k.clone()));
    }
    let mut violated = Vec::new();
    if sys.is_boxed() {
        for k in sys.vars() {
            let v = &point[k];
            if v.is_negative() {
                violated.push(ineq::box_rows_for(k)[0].clone());
            } else if *v > rational::one() {
                violated.push(ineq::box_rows_for(k)[1].clone());
            }
        }
    }
    for row in sys.ineqs() {
        let lhs = row.lhs_at(point).expect("coordinates checked above");
        if lhs < *row.rhs() {
            violated.push(row.clone());
        }
    }
    Ok(if violated.is_empty() { Membership::Inside } else { Membership::Outside(violated) })
}

/// The first row of `a` (box rows included) that `b` does not imply.
pub fn first_unimplied(a: &IneqSystem, b: &IneqSystem) -> Result<Option<LinIneq>, PolyError> {
    if a.vars() != b.vars() {
        return Err(PolyError::VariableMismatch);
    }
    let box_rows = if a.is_boxed() && !b.is_boxed() { a.box_rows() } else { Vec::new() };
    for row in a.ineqs().iter().chain(box_rows.iter()) {
        if !is_valid(b, row)? {
            return Ok(Some(row.clone()));
        }
    }
    Ok(None)
}

/// Whether `a` and `b` describe the same polyhedron (mutual implication of all rows).
pub fn poly_equal(a: &IneqSystem, b: &IneqSystem) -> Result<bool, PolyError> {
    Ok(first_unimplied(a, b)?.is_none() && first_unimplied(b, a)?.is_none())
}

/// Whether `inner ⊆ outer`: every row of `outer` is implied by `inner`.
pub fn is_contained(inner: &IneqSystem, outer: &IneqSystem) -> Result<bool, PolyError> {
    Ok(first_unimplied(outer, inner)?.is_none())
}
