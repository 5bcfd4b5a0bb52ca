use std::collections::BTreeSet;

use num_traits::{Signed, Zero};

use super::ineq::box_rows_for;
use super::{is_valid, IneqSystem, LinIneq, PolyError};
use crate::model::VarKey;
use crate::rational::Rational;

/// Orthogonal projection that removes `victim`.
///
/// Every pair of rows with opposite signs on `victim` is combined so that the
/// victim cancels; rows without it carry over. The victim's own box rows take
/// part in the pairing. With `prune`, redundant rows are removed afterwards.
pub fn fm_eliminate(sys: &IneqSystem, victim: &VarKey, prune: bool) -> Result<IneqSystem, PolyError> {
    if !sys.vars().contains(victim) {
        return Err(PolyError::UnknownVariable(victim.clone()));
    }
    let mut positive = Vec::new();
    let mut negative = Vec::new();
    let mut out = Vec::new();
    let own_box = if sys.is_boxed() { box_rows_for(victim).to_vec() } else { Vec::new() };
    for row in sys.ineqs().iter().chain(own_box.iter()) {
        match row.coeff(victim) {
            Some(c) if c.is_positive() => positive.push(row),
            Some(_) => negative.push(row),
            None => out.push(row.clone()),
        }
    }
    for p in &positive {
        let cp = p.coeff(victim).expect("positive row").clone();
        for n in &negative {
            let cn = -n.coeff(victim).expect("negative row");
            // cn·p + cp·n cancels the victim; normalization takes care of scale.
            let combined = p.combine(n, &cn, &cp);
            debug_assert!(combined.coeff(victim).is_none());
            if !combined.is_tautology(sys.is_boxed()) {
                out.push(combined);
            }
        }
    }
    let mut result = sys.clone();
    result.remove_var_unchecked(victim);
    result.replace_ineqs(out);
    result.dedup();
    if prune {
        result = remove_redundant(&result)?;
    }
    Ok(result)
}

fn pairings(sys: &IneqSystem, key: &VarKey) -> usize {
    let (mut p, mut n) = if sys.is_boxed() { (1, 1) } else { (0, 0) };
    for row in sys.ineqs() {
        match row.coeff(key) {
            Some(c) if c.is_positive() => p += 1,
            Some(_) => n += 1,
            None => {}
        }
    }
    p * n
}

/// Projects onto `keep`, eliminating the remaining variables one at a time in
/// order of fewest sign pairings (recomputed after each step).
pub fn project_onto(sys: &IneqSystem, keep: &BTreeSet<VarKey>, prune: bool) -> Result<IneqSystem, PolyError> {
    if let Some(k) = keep.iter().find(|k| !sys.vars().contains(*k)) {
        return Err(PolyError::UnknownVariable(k.clone()));
    }
    let mut current = sys.clone();
    loop {
        let victim = current
            .vars()
            .iter()
            .filter(|k| !keep.contains(*k))
            .min_by_key(|k| pairings(&current, k))
            .cloned();
        match victim {
            Some(v) => current = fm_eliminate(&current, &v, prune)?,
            None => return Ok(current),
        }
    }
}

/// `q` follows from `p` together with the unit box.
fn dominated_in_box(q: &LinIneq, p: &LinIneq) -> bool {
    // q·z = p·z + (q − p)·z ≥ p.rhs + min over the box of (q − p)·z
    let mut bound = p.rhs().clone();
    for (k, cp) in p.coeffs() {
        let diff = q.coeff(k).cloned().unwrap_or_else(Rational::zero) - cp;
        if diff.is_negative() {
            bound += diff;
        }
    }
    for (k, cq) in q.coeffs() {
        if p.coeff(k).is_none() && cq.is_negative() {
            bound += cq;
        }
    }
    bound >= *q.rhs()
}

/// `q` follows from `p` alone (same direction, weaker right-hand side).
fn dominated_plain(q: &LinIneq, p: &LinIneq) -> bool {
    q.coeffs() == p.coeffs() && q.rhs() <= p.rhs()
}

/// Removes rows implied by the others, leaving the polyhedron unchanged.
///
/// Cheap syntactic filters run first (tautologies, duplicates, single-row
/// dominance); every surviving row is then tested by LP against the rest.
pub fn remove_redundant(sys: &IneqSystem) -> Result<IneqSystem, PolyError> {
    let boxed = sys.is_boxed();
    let mut rows: Vec<Option<LinIneq>> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for row in sys.ineqs() {
        if !row.is_tautology(boxed) && seen.insert(row.clone()) {
            rows.push(Some(row.clone()));
        }
    }
    for i in 0..rows.len() {
        let Some(q) = rows[i].as_ref() else { continue };
        let dominated = rows.iter().enumerate().any(|(j, p)| {
            j != i
                && p.as_ref().is_some_and(|p| {
                    if boxed {
                        dominated_in_box(q, p)
                    } else {
                        dominated_plain(q, p)
                    }
                })
        });
        if dominated {
            rows[i] = None;
        }
    }
    let mut kept: Vec<LinIneq> = rows.into_iter().flatten().collect();
    let mut i = 0;
    while i < kept.len() {
        let candidate = kept.remove(i);
        let mut rest = sys.clone();
        rest.replace_ineqs(kept.clone());
        if is_valid(&rest, &candidate)? {
            continue;
        }
        kept.insert(i, candidate);
        i += 1;
    }
    let mut out = sys.clone();
    out.replace_ineqs(kept);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::poly_equal;
    use crate::rational::{half, int};

    #[test]
    fn single_pair() {
        let (x, y) = (VarKey::x(1), VarKey::x(2));
        let sys = IneqSystem::from_parts(
            [x.clone(), y.clone()],
            vec![
                LinIneq::new([(y.clone(), int(1)), (x.clone(), int(-1))], int(0)),
                LinIneq::new([(y.clone(), int(-1))], -half()),
            ],
            false,
        )
        .unwrap();
        let out = fm_eliminate(&sys, &y, true).unwrap();
        assert_eq!(out.ineqs(), &[LinIneq::new([(x.clone(), int(-1))], -half())]);
        assert!(!out.vars().contains(&y));
    }

    #[test]
    fn unused_variable_only_drops_box() {
        let (x, y) = (VarKey::x(1), VarKey::x(2));
        let sys = IneqSystem::from_parts([x.clone(), y.clone()], vec![LinIneq::new([(x.clone(), int(1))], half())], true)
            .unwrap();
        let out = fm_eliminate(&sys, &y, false).unwrap();
        assert_eq!(out.ineqs(), sys.ineqs());
        assert_eq!(out.vars().len(), 1);
        assert_eq!(fm_eliminate(&sys, &VarKey::x(3), false), Err(PolyError::UnknownVariable(VarKey::x(3))));
    }

    #[test]
    fn redundancy_examples() {
        let x = VarKey::x(1);
        let sys = IneqSystem::from_parts(
            [x.clone()],
            vec![LinIneq::new([(x.clone(), int(1))], int(0)), LinIneq::new([(x.clone(), int(1))], int(-1))],
            false,
        )
        .unwrap();
        let out = remove_redundant(&sys).unwrap();
        assert_eq!(out.ineqs(), &[LinIneq::new([(x.clone(), int(1))], int(0))]);

        let row = LinIneq::new([(x.clone(), int(1))], half());
        let sys = IneqSystem::from_parts([x.clone()], vec![row.clone(), row.clone()], true).unwrap();
        assert_eq!(remove_redundant(&sys).unwrap().ineqs(), &[row]);
    }

    #[test]
    fn lp_redundancy_keeps_polyhedron() {
        // x + y >= 1 and x - y >= 0 imply 2x >= 1.
        let (x, y) = (VarKey::x(1), VarKey::x(2));
        let sys = IneqSystem::from_parts(
            [x.clone(), y.clone()],
            vec![
                LinIneq::new([(x.clone(), int(1)), (y.clone(), int(1))], int(1)),
                LinIneq::new([(x.clone(), int(1)), (y.clone(), int(-1))], int(0)),
                LinIneq::new([(x.clone(), int(2))], int(1)),
            ],
            true,
        )
        .unwrap();
        let out = remove_redundant(&sys).unwrap();
        assert_eq!(out.len(), 2);
        assert!(poly_equal(&sys, &out).unwrap());
    }

    #[test]
    fn infeasible_system_stays_infeasible() {
        let x = VarKey::x(1);
        let sys = IneqSystem::from_parts(
            [x.clone()],
            vec![LinIneq::new([(x.clone(), int(1))], int(1)), LinIneq::new([(x.clone(), int(-1))], int(0))],
            false,
        )
        .unwrap();
        let out = remove_redundant(&sys).unwrap();
        assert!(!crate::poly::is_feasible(&out).unwrap());
    }
}
