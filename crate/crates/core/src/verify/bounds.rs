use std::collections::BTreeMap;

use serde::Serialize;

use super::VerifyError;
use crate::linearization::mccormick_from_flower;
use crate::model::{integer_optimum, merge_terms, MultilinearInstance, VarKey};
use crate::poly::{lp_solve, Direction, IneqSystem, LinIneq, LpOutcome};
use crate::rational::{self, Rational};
use crate::relax::{flower_relaxation, separate_flower, standard_relaxation, DEFAULT_CENTER_GUARD};

/// Brute force is attempted only up to this many variables.
const INTEGER_GUARD: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Relaxation {
    Standard,
    /// `None`: no cap on the number of neighbors.
    Flower(Option<usize>),
    /// Rows concatenated over shared variables (e.g. several linearization relaxations).
    Systems(Vec<IneqSystem>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub method: String,
    #[serde(with = "rational::serde_str")]
    pub bound: Rational,
    #[serde(with = "rational::serde_str::option")]
    pub integer_opt: Option<Rational>,
    pub rows_generated: u64,
    /// LP solves performed.
    pub iterations: u64,
    /// The loop stopped because separation found nothing (always true for static bounds).
    pub completed: bool,
    pub rows_total: u64,
    pub vars_total: u64,
    /// Bound after each LP solve.
    #[serde(with = "rational::serde_str::vec")]
    pub per_iteration: Vec<Rational>,
}

fn integer_opt(inst: &MultilinearInstance) -> Option<Rational> {
    integer_optimum(inst, INTEGER_GUARD).ok().map(|o| o.value)
}

fn with_constraints(mut sys: IneqSystem, inst: &MultilinearInstance) -> IneqSystem {
    for key in inst.hypergraph().keys() {
        sys.add_var(key);
    }
    for c in inst.constraints() {
        sys.push(LinIneq::le(merge_terms(&c.terms), c.rhs.clone())).expect("constraint monomials are variables");
    }
    sys
}

fn solve(sys: &IneqSystem, inst: &MultilinearInstance) -> Result<(Rational, BTreeMap<VarKey, Rational>), VerifyError> {
    match lp_solve(sys, &inst.linear_objective(), Direction::Min)? {
        LpOutcome::Optimal { value, point } => Ok((value, point)),
        LpOutcome::Infeasible => Err(VerifyError::Infeasible),
        LpOutcome::Unbounded => unreachable!("boxed systems are bounded"),
    }
}

fn report(method: String, sys: &IneqSystem, inst: &MultilinearInstance, per_iteration: Vec<Rational>) -> BoundReport {
    BoundReport {
        method,
        bound: per_iteration.last().cloned().expect("at least one solve"),
        integer_opt: integer_opt(inst),
        rows_generated: 0,
        iterations: per_iteration.len() as u64,
        completed: true,
        rows_total: sys.len() as u64,
        vars_total: sys.vars().len() as u64,
        per_iteration,
    }
}

/// LP bound of the linearized problem over the chosen relaxation.
pub fn bound_static(inst: &MultilinearInstance, relaxation: &Relaxation) -> Result<BoundReport, VerifyError> {
    let g = inst.hypergraph();
    let (method, base) = match relaxation {
        Relaxation::Standard => ("standard".to_string(), standard_relaxation(g)),
        Relaxation::Flower(cap) => (
            match cap {
                Some(k) => format!("flower(max_neighbors={k})"),
                None => "flower".to_string(),
            },
            flower_relaxation(g, *cap),
        ),
        Relaxation::Systems(systems) => {
            let mut sys = IneqSystem::boxed(g.keys());
            for s in systems {
                sys.extend_from(s);
            }
            sys.dedup();
            (format!("linearizations({})", systems.len()), sys)
        }
    };
    let sys = with_constraints(base, inst);
    let (value, _) = solve(&sys, inst)?;
    Ok(report(method, &sys, inst, vec![value]))
}

/// Shared loop: solve, separate a flower, let `respond` strengthen the system.
fn separation_loop(
    inst: &MultilinearInstance,
    max_neighbors: Option<usize>,
    max_iters: usize,
    method: String,
    mut respond: impl FnMut(&mut IneqSystem, &crate::relax::ExtendedFlower) -> Result<u64, VerifyError>,
) -> Result<BoundReport, VerifyError> {
    let g = inst.hypergraph();
    let mut sys = with_constraints(standard_relaxation(g), inst);
    let mut bounds = Vec::new();
    let mut rows_generated = 0;
    let mut rounds = 0;
    let completed = loop {
        let (value, point) = solve(&sys, inst)?;
        bounds.push(value);
        if rounds == max_iters {
            break false;
        }
        let Some(sep) = separate_flower(g, &point, max_neighbors, DEFAULT_CENTER_GUARD)? else {
            break true;
        };
        let added = respond(&mut sys, &sep.flower)?;
        if added == 0 {
            // Nothing new to add: the point cannot be cut off.
            break false;
        }
        rows_generated += added;
        rounds += 1;
    };
    let mut r = report(method, &sys, inst, bounds);
    r.rows_generated = rows_generated;
    r.completed = completed;
    Ok(r)
}

/// Starts from the standard relaxation and adds the most violated flower row
/// until none is violated or `max_iters` rows were added.
pub fn bound_cutting_plane(
    inst: &MultilinearInstance,
    max_neighbors: Option<usize>,
    max_iters: usize,
) -> Result<BoundReport, VerifyError> {
    separation_loop(inst, max_neighbors, max_iters, "cutting-plane".into(), |sys, f| {
        Ok(u64::from(sys.push_unique(f.to_ineq())?))
    })
}

/// Like the cutting-plane loop, but answers each violated flower with every
/// row of a McCormick linearization certifying it; auxiliary variables with
/// the same subset are shared.
pub fn bound_dynamic_linearization(
    inst: &MultilinearInstance,
    max_neighbors: Option<usize>,
    max_iters: usize,
) -> Result<BoundReport, VerifyError> {
    let g = inst.hypergraph().clone();
    separation_loop(inst, max_neighbors, max_iters, "dynamic-linearization".into(), |sys, f| {
        let d = mccormick_from_flower(&g, f)?;
        let rows = d.relaxation_system();
        for k in rows.vars() {
            sys.add_var(k.clone());
        }
        let mut added = 0;
        for row in rows.ineqs() {
            added += u64::from(sys.push_unique(row.clone())?);
        }
        Ok(added)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use crate::verify::fixtures;

    fn single_edge() -> MultilinearInstance {
        MultilinearInstance::from_monomials(2, vec![(int(-1), vec![1]), (int(-1), vec![2]), (int(2), vec![1, 2])], vec![])
            .unwrap()
    }

    #[test]
    fn single_edge_bound() {
        let r = bound_static(&single_edge(), &Relaxation::Standard).unwrap();
        assert_eq!(r.bound, int(-1));
        assert_eq!(r.integer_opt, Some(int(-1)));
        let r = bound_cutting_plane(&single_edge(), None, 10).unwrap();
        assert_eq!((r.iterations, r.rows_generated, r.completed), (1, 0, true));
    }

    #[test]
    fn nonnegative_objective_gives_zero() {
        let r = bound_static(&fixtures::fig1_instance(), &Relaxation::Flower(None)).unwrap();
        assert_eq!(r.bound, int(0));
    }

    #[test]
    fn constraints_are_appended() {
        // x1 + x2 >= 1/2 as -x1 - x2 <= -1/2; objective x1 + x2.
        let inst = MultilinearInstance::from_monomials(
            2,
            vec![(int(1), vec![1]), (int(1), vec![2])],
            vec![(vec![(int(-1), vec![1]), (int(-1), vec![2])], rational::ratio(-1, 2))],
        )
        .unwrap();
        assert_eq!(bound_static(&inst, &Relaxation::Standard).unwrap().bound, rational::ratio(1, 2));
        let infeasible = MultilinearInstance::from_monomials(1, vec![], vec![(vec![(int(1), vec![1])], int(-1))]).unwrap();
        assert_eq!(bound_static(&infeasible, &Relaxation::Standard), Err(VerifyError::Infeasible));
    }
}
