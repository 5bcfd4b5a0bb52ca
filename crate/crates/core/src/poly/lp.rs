//! Exact two-phase primal simplex with bounded variables and Bland's rule.
//!
//! Rows `a·x ≥ b` get a surplus column `a·x − s = b, s ≥ 0`. Rows that the
//! starting point violates also get an artificial column, and phase one
//! minimizes the sum of artificials. Box bounds are handled as column bounds,
//! so a boxed system adds no rows for them.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::{IneqSystem, PolyError};
use crate::model::VarKey;
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rational, point: BTreeMap<VarKey, Rational> },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn value(&self) -> Option<&Rational> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }
}

/// Optimizes `objective` over `sys` exactly.
pub fn lp_solve(
    sys: &IneqSystem,
    objective: &BTreeMap<VarKey, Rational>,
    direction: Direction,
) -> Result<LpOutcome, PolyError> {
    if let Some(k) = objective.keys().find(|k| !sys.vars().contains(*k)) {
        return Err(PolyError::UnsupportedVariable(k.clone()));
    }
    let index: BTreeMap<&VarKey, usize> = sys.vars().iter().enumerate().map(|(i, k)| (k, i)).collect();
    let n = index.len();
    let (lower, upper) = if sys.is_boxed() {
        (Some(rational::zero()), Some(rational::one()))
    } else {
        (None, None)
    };
    let mut cost = vec![Rational::zero(); n];
    for (k, c) in objective {
        cost[index[k]] = match direction {
            Direction::Min => c.clone(),
            Direction::Max => -c,
        };
    }
    let rows: Vec<(Vec<(usize, Rational)>, Rational)> = sys
        .ineqs()
        .iter()
        .map(|ineq| {
            let coeffs = ineq.coeffs().iter().map(|(k, c)| (index[k], c.clone())).collect();
            (coeffs, ineq.rhs().clone())
        })
        .collect();
    let lp = Dense { bounds: vec![(lower, upper); n], rows, cost };
    Ok(match lp.solve() {
        Solved::Optimal(x) => {
            let mut value = Rational::zero();
            for (k, c) in objective {
                value += c * &x[index[k]];
            }
            let point = sys.vars().iter().cloned().zip(x).collect();
            LpOutcome::Optimal { value, point }
        }
        Solved::Infeasible => LpOutcome::Infeasible,
        Solved::Unbounded => LpOutcome::Unbounded,
    })
}

type Bound = Option<Rational>;

/// `min cost·x` s.t. `rows` (each `a·x ≥ b`) and column bounds.
pub(crate) struct Dense {
    pub bounds: Vec<(Bound, Bound)>,
    pub rows: Vec<(Vec<(usize, Rational)>, Rational)>,
    pub cost: Vec<Rational>,
}

pub(crate) enum Solved {
    Optimal(Vec<Rational>),
    Infeasible,
    Unbounded,
}

struct Tableau {
    /// `m × ncols`; row `i` reads `∑_j t[i][j] x_j = const` with `t[i][basis[i]] = 1`.
    t: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    lower: Vec<Bound>,
    upper: Vec<Bound>,
    value: Vec<Rational>,
    /// Reduced costs of the current phase.
    d: Vec<Rational>,
}

enum Step {
    Optimal,
    Unbounded,
    Moved,
}

impl Tableau {
    fn ncols(&self) -> usize {
        self.value.len()
    }

    fn set_costs(&mut self, cost: &[Rational]) {
        let mut d = cost.to_vec();
        for (i, row) in self.t.iter().enumerate() {
            let cb = &cost[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (j, tij) in row.iter().enumerate() {
                if !tij.is_zero() {
                    d[j] -= cb * tij;
                }
            }
        }
        self.d = d;
    }

    fn entering(&self) -> Option<(usize, bool)> {
        (0..self.ncols()).find_map(|j| {
            if self.is_basic[j] {
                return None;
            }
            let dj = &self.d[j];
            if dj.is_negative() && self.upper[j].as_ref().is_none_or(|u| self.value[j] < *u) {
                Some((j, true))
            } else if dj.is_positive() && self.lower[j].as_ref().is_none_or(|l| self.value[j] > *l) {
                Some((j, false))
            } else {
                None
            }
        })
    }

    fn step(&mut self) -> Step {
        let Some((j, increase)) = self.entering() else {
            return Step::Optimal;
        };
        // (step length, variable index, row or None for a bound flip)
        let mut best: Option<(Rational, usize, Option<usize>)> = None;
        let mut consider = |theta: Rational, var: usize, row: Option<usize>| {
            let better = match &best {
                None => true,
                Some((b, bv, _)) => theta < *b || (theta == *b && var < *bv),
            };
            if better {
                best = Some((theta, var, row));
            }
        };
        if increase {
            if let Some(u) = &self.upper[j] {
                consider(u - &self.value[j], j, None);
            }
        } else if let Some(l) = &self.lower[j] {
            consider(&self.value[j] - l, j, None);
        }
        for (i, row) in self.t.iter().enumerate() {
            let tij = &row[j];
            if tij.is_zero() {
                continue;
            }
            let b = self.basis[i];
            // Basic variable moves by -tij per unit increase of x_j.
            let rate = if increase { -tij } else { tij.clone() };
            if rate.is_negative() {
                if let Some(l) = &self.lower[b] {
                    consider((&self.value[b] - l) / -&rate, b, Some(i));
                }
            } else if let Some(u) = &self.upper[b] {
                consider((u - &self.value[b]) / &rate, b, Some(i));
            }
        }
        let Some((theta, _, row)) = best else {
            return Step::Unbounded;
        };
        if !theta.is_zero() {
            let signed = if increase { theta.clone() } else { -theta.clone() };
            self.value[j] += &signed;
            for (i, r) in self.t.iter().enumerate() {
                if !r[j].is_zero() {
                    let delta = &r[j] * &signed;
                    self.value[self.basis[i]] -= delta;
                }
            }
        }
        if let Some(r) = row {
            self.pivot(r, j);
        }
        Step::Moved
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let piv = self.t[r][j].clone();
        if !piv.is_one() {
            for x in self.t[r].iter_mut() {
                if !x.is_zero() {
                    *x /= &piv;
                }
            }
        }
        let pivot_row = std::mem::take(&mut self.t[r]);
        let nz: Vec<usize> = (0..pivot_row.len()).filter(|&c| !pivot_row[c].is_zero()).collect();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r || row[j].is_zero() {
                continue;
            }
            let f = row[j].clone();
            for &c in &nz {
                let delta = &f * &pivot_row[c];
                row[c] -= delta;
            }
        }
        if !self.d[j].is_zero() {
            let f = self.d[j].clone();
            for &c in &nz {
                let delta = &f * &pivot_row[c];
                self.d[c] -= delta;
            }
        }
        self.t[r] = pivot_row;
        let leaving = self.basis[r];
        self.is_basic[leaving] = false;
        self.is_basic[j] = true;
        self.basis[r] = j;
    }

    fn run(&mut self) -> bool {
        loop {
            match self.step() {
                Step::Optimal => return true,
                Step::Unbounded => return false,
                Step::Moved => {}
            }
        }
    }
}

impl Dense {
    pub fn solve(&self) -> Solved {
        let n = self.bounds.len();
        let m = self.rows.len();
        // Start every structural column at a finite bound, or at 0 when free.
        let start: Vec<Rational> = self
            .bounds
            .iter()
            .map(|(l, u)| l.clone().or_else(|| u.clone()).unwrap_or_else(Rational::zero))
            .collect();
        let residual: Vec<Rational> = self
            .rows
            .iter()
            .map(|(coeffs, b)| {
                let mut s = -b;
                for (j, a) in coeffs {
                    s += a * &start[*j];
                }
                s
            })
            .collect();
        let artificial_rows: Vec<usize> = (0..m).filter(|&i| residual[i].is_negative()).collect();
        let ncols = n + m + artificial_rows.len();
        let mut lower: Vec<Bound> = self.bounds.iter().map(|b| b.0.clone()).collect();
        let mut upper: Vec<Bound> = self.bounds.iter().map(|b| b.1.clone()).collect();
        lower.extend((0..m + artificial_rows.len()).map(|_| Some(Rational::zero())));
        upper.extend((0..m + artificial_rows.len()).map(|_| None));
        let mut value = start;
        value.extend((0..m + artificial_rows.len()).map(|_| Rational::zero()));

        let mut t = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut art_of_row = vec![None; m];
        for (a, &i) in artificial_rows.iter().enumerate() {
            art_of_row[i] = Some(n + m + a);
        }
        for (i, (coeffs, _)) in self.rows.iter().enumerate() {
            let mut row = vec![Rational::zero(); ncols];
            match art_of_row[i] {
                None => {
                    // -a·x + s = -b, s basic at the (non-negative) residual.
                    for (j, a) in coeffs {
                        row[*j] = -a;
                    }
                    row[n + i] = rational::one();
                    value[n + i] = residual[i].clone();
                    basis.push(n + i);
                }
                Some(col) => {
                    // a·x - s + art = b, art basic at -residual > 0.
                    for (j, a) in coeffs {
                        row[*j] = a.clone();
                    }
                    row[n + i] = -rational::one();
                    row[col] = rational::one();
                    value[col] = -&residual[i];
                    basis.push(col);
                }
            }
            t.push(row);
        }
        let mut is_basic = vec![false; ncols];
        for &b in &basis {
            is_basic[b] = true;
        }
        let mut tab = Tableau { t, basis, is_basic, lower, upper, value, d: Vec::new() };

        if !artificial_rows.is_empty() {
            let mut phase1 = vec![Rational::zero(); ncols];
            for c in phase1.iter_mut().skip(n + m) {
                *c = rational::one();
            }
            tab.set_costs(&phase1);
            tab.run();
            let infeas: Rational = tab.value[n + m..].iter().fold(Rational::zero(), |s, v| s + v);
            if infeas.is_positive() {
                return Solved::Infeasible;
            }
            for c in n + m..ncols {
                tab.upper[c] = Some(Rational::zero());
            }
        }
        let mut cost = self.cost.clone();
        cost.resize(ncols, Rational::zero());
        tab.set_costs(&cost);
        if !tab.run() {
            return Solved::Unbounded;
        }
        tab.value.truncate(n);
        Solved::Optimal(tab.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::LinIneq;
    use crate::rational::{int, ratio};

    fn obj(pairs: &[(VarKey, i64)]) -> BTreeMap<VarKey, Rational> {
        pairs.iter().map(|(k, c)| (k.clone(), int(*c))).collect()
    }

    #[test]
    fn box_only() {
        let sys = IneqSystem::boxed([VarKey::x(1)]);
        let out = lp_solve(&sys, &obj(&[(VarKey::x(1), 1)]), Direction::Min).unwrap();
        assert_eq!(out.value(), Some(&int(0)));
        let out = lp_solve(&sys, &obj(&[(VarKey::x(1), 1)]), Direction::Max).unwrap();
        assert_eq!(out.value(), Some(&int(1)));
    }

    #[test]
    fn infeasible_without_box() {
        let x = VarKey::x(1);
        let sys = IneqSystem::from_parts(
            [x.clone()],
            vec![
                LinIneq::new([(x.clone(), int(1))], int(1)),
                LinIneq::new([(x.clone(), int(-1))], int(0)),
            ],
            false,
        )
        .unwrap();
        assert_eq!(lp_solve(&sys, &BTreeMap::new(), Direction::Min).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn unbounded_without_box() {
        let x = VarKey::x(1);
        let sys = IneqSystem::from_parts([x.clone()], vec![LinIneq::new([(x.clone(), int(1))], int(1))], false)
            .unwrap();
        assert_eq!(lp_solve(&sys, &obj(&[(x.clone(), 1)]), Direction::Max).unwrap(), LpOutcome::Unbounded);
        assert_eq!(lp_solve(&sys, &obj(&[(x, 1)]), Direction::Min).unwrap().value(), Some(&int(1)));
    }

    #[test]
    fn free_variables_and_fractions() {
        // min x + y s.t. 2x + y >= 1, x + 3y >= 1, free variables.
        let (x, y) = (VarKey::x(1), VarKey::x(2));
        let sys = IneqSystem::from_parts(
            [x.clone(), y.clone()],
            vec![
                LinIneq::new([(x.clone(), int(2)), (y.clone(), int(1))], int(1)),
                LinIneq::new([(x.clone(), int(1)), (y.clone(), int(3))], int(1)),
            ],
            false,
        )
        .unwrap();
        let out = lp_solve(&sys, &obj(&[(x.clone(), 1), (y.clone(), 1)]), Direction::Min).unwrap();
        match out {
            LpOutcome::Optimal { value, point } => {
                assert_eq!(value, ratio(3, 5));
                assert_eq!(point[&x], ratio(2, 5));
                assert_eq!(point[&y], ratio(1, 5));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_objective_variable() {
        let sys = IneqSystem::boxed([VarKey::x(1)]);
        assert!(matches!(
            lp_solve(&sys, &obj(&[(VarKey::x(2), 1)]), Direction::Min),
            Err(PolyError::UnsupportedVariable(_))
        ));
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Many redundant rows through the same vertex.
        let keys: Vec<VarKey> = (1..=4).map(VarKey::x).collect();
        let mut rows = Vec::new();
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    rows.push(LinIneq::new([(keys[i].clone(), int(1)), (keys[j].clone(), int(-1))], int(0)));
                }
            }
        }
        rows.push(LinIneq::new(keys.iter().map(|k| (k.clone(), int(1))), int(2)));
        let sys = IneqSystem::from_parts(keys.clone(), rows, true).unwrap();
        let out = lp_solve(&sys, &obj(&[(keys[0].clone(), 1)]), Direction::Min).unwrap();
        assert_eq!(out.value(), Some(&ratio(1, 2)));
    }
}
