//! The standard relaxation, extended flower inequalities and their separation.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::model::{Hypergraph, VarKey, VarSet};
use crate::poly::{IneqSystem, LinIneq};
use crate::rational::{self, Rational};

/// Largest center the separation DP will handle by default (`2^|I|` cover states).
pub const DEFAULT_CENTER_GUARD: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RelaxError {
    #[error("malformed flower: {0}")]
    MalformedFlower(String),
    #[error("{0} is not a variable of the hypergraph")]
    NotInGraph(VarKey),
    #[error("center {center} has {size} elements, above the guard of {guard}")]
    CenterTooLarge { center: VarSet, size: usize, guard: usize },
    #[error("point has no coordinate for {0}")]
    MissingCoordinate(VarKey),
}

/// `z_center + ∑_i (1 − z_{J_i}) ≥ 1` with neighbors `J_1, ..., J_k`.
///
/// Neighbors are a set (kept sorted), each one meets the center, none equals
/// it, and together they cover it. Centers are normally edges; a singleton
/// center with one edge neighbor is the short standard row `z_J ≤ x_v`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExtendedFlower {
    center: VarKey,
    neighbors: Vec<VarKey>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowerKind {
    /// The neighbors' traces on the center partition it.
    Flower,
    ExtendedOnly,
}

impl ExtendedFlower {
    pub fn new(center: VarKey, neighbors: impl IntoIterator<Item = VarKey>) -> Result<Self, RelaxError> {
        let mut neighbors: Vec<VarKey> = neighbors.into_iter().collect();
        neighbors.sort();
        neighbors.dedup();
        if neighbors.is_empty() {
            return Err(RelaxError::MalformedFlower("no neighbors".into()));
        }
        let center_set = center.to_set();
        let mut covered: Vec<u32> = Vec::new();
        for j in &neighbors {
            if *j == center {
                return Err(RelaxError::MalformedFlower(format!("{center} cannot neighbor itself")));
            }
            let trace = center_set.intersection(&j.to_set()).ok_or_else(|| {
                RelaxError::MalformedFlower(format!("neighbor {j} does not meet the center {center}"))
            })?;
            covered.extend_from_slice(trace.members());
        }
        covered.sort_unstable();
        covered.dedup();
        if covered.len() != center.len() {
            let missing: Vec<String> = center
                .members()
                .iter()
                .filter(|v| covered.binary_search(v).is_err())
                .map(|v| v.to_string())
                .collect();
            return Err(RelaxError::MalformedFlower(format!(
                "neighbors do not cover {} of the center {center}",
                missing.join(",")
            )));
        }
        Ok(ExtendedFlower { center, neighbors })
    }

    pub fn center(&self) -> &VarKey {
        &self.center
    }

    pub fn neighbors(&self) -> &[VarKey] {
        &self.neighbors
    }

    pub fn k(&self) -> usize {
        self.neighbors.len()
    }

    /// Rejects centers and neighbors that are not variables of `g`.
    pub fn check_in(&self, g: &Hypergraph) -> Result<(), RelaxError> {
        match std::iter::once(&self.center).chain(&self.neighbors).find(|k| !g.has_key(k)) {
            Some(k) => Err(RelaxError::NotInGraph(k.clone())),
            None => Ok(()),
        }
    }

    fn traces(&self) -> Vec<VarSet> {
        let c = self.center.to_set();
        self.neighbors
            .iter()
            .map(|j| c.intersection(&j.to_set()).expect("neighbors meet the center"))
            .collect()
    }

    pub fn kind(&self) -> FlowerKind {
        let traces = self.traces();
        let disjoint = traces
            .iter()
            .enumerate()
            .all(|(i, a)| traces[i + 1..].iter().all(|b| a.is_disjoint(b)));
        if disjoint {
            FlowerKind::Flower
        } else {
            FlowerKind::ExtendedOnly
        }
    }

    /// Elements of the center covered by neighbor `i` and by no other neighbor.
    pub fn exclusive_elements(&self, i: usize) -> Vec<u32> {
        let traces = self.traces();
        traces[i]
            .members()
            .iter()
            .copied()
            .filter(|v| traces.iter().enumerate().all(|(j, t)| j == i || !t.contains(*v)))
            .collect()
    }

    /// Every neighbor covers some element of the center on its own.
    ///
    /// A neighbor without such an element can be dropped: the smaller flower
    /// plus `1 − z_J ≥ 0` gives back this one.
    pub fn is_nonredundant(&self) -> bool {
        (0..self.k()).all(|i| !self.exclusive_elements(i).is_empty())
    }

    /// Greedily drops neighbors (in order) whose removal keeps the center covered.
    pub fn minimalize(&self) -> ExtendedFlower {
        let mut neighbors = self.neighbors.clone();
        let mut i = 0;
        while i < neighbors.len() {
            let mut without = neighbors.clone();
            without.remove(i);
            if !without.is_empty() && ExtendedFlower::new(self.center.clone(), without.clone()).is_ok() {
                neighbors = without;
            } else {
                i += 1;
            }
        }
        ExtendedFlower { center: self.center.clone(), neighbors }
    }

    /// `z_center − ∑ z_{J_i} ≥ 1 − k`.
    pub fn to_ineq(&self) -> LinIneq {
        let one = rational::one();
        let coeffs = std::iter::once((self.center.clone(), one.clone()))
            .chain(self.neighbors.iter().map(|j| (j.clone(), -one.clone())));
        LinIneq::new(coeffs, rational::int(1 - self.k() as i64))
    }

    /// `1 − z_center − ∑ (1 − z_{J_i})`; positive means the point violates the row.
    pub fn violation_at(&self, point: &BTreeMap<VarKey, Rational>) -> Option<Rational> {
        self.to_ineq().violation_at(point)
    }
}

/// Free-function form of [`ExtendedFlower::to_ineq`].
pub fn flower_ineq(f: &ExtendedFlower) -> LinIneq {
    f.to_ineq()
}

impl fmt::Display for ExtendedFlower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} |", self.center.to_set())?;
        for (i, j) in self.neighbors.iter().enumerate() {
            write!(f, "{}{}", if i == 0 { " " } else { ", " }, j.to_set())?;
        }
        Ok(())
    }
}

impl Serialize for ExtendedFlower {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ExtendedFlower", 4)?;
        st.serialize_field("center", self.center.members())?;
        let neighbors: Vec<&[u32]> = self.neighbors.iter().map(|n| n.members()).collect();
        st.serialize_field("neighbors", &neighbors)?;
        st.serialize_field("kind", &self.kind())?;
        st.serialize_field("inequality", &self.to_ineq())?;
        st.end()
    }
}

/// Short rows `z_I ≤ x_v`, one long row per edge, and the unit box.
pub fn standard_relaxation(g: &Hypergraph) -> IneqSystem {
    let mut sys = IneqSystem::boxed(g.keys());
    for e in g.edges() {
        let z = VarKey::Edge(e.clone());
        for &v in e.members() {
            sys.push(LinIneq::geq_var(VarKey::x(v), z.clone())).expect("keys of g");
        }
    }
    for e in g.edges() {
        let singletons = e.members().iter().map(|&v| VarKey::x(v));
        let f = ExtendedFlower::new(VarKey::Edge(e.clone()), singletons).expect("singletons cover an edge");
        sys.push(f.to_ineq()).expect("keys of g");
    }
    sys
}

/// Candidate neighbors of `center`: keys of `E ∪ S` other than the center that meet it.
fn candidates(g: &Hypergraph, center: &VarKey) -> Vec<VarKey> {
    let c = center.to_set();
    g.keys().into_iter().filter(|k| k != center && c.meets(&k.to_set())).collect()
}

/// Bit masks of each candidate's trace on the center.
fn trace_masks(center: &VarKey, cands: &[VarKey]) -> Vec<u32> {
    let members = center.members();
    cands
        .iter()
        .map(|k| {
            members
                .iter()
                .enumerate()
                .filter(|(_, v)| k.members().binary_search(v).is_ok())
                .fold(0u32, |m, (i, _)| m | (1 << i))
        })
        .collect()
}

/// Depth-first search over neighbor sets in lexicographic order, keeping only
/// sets in which every neighbor still owns an element of the center.
struct CoverSearch<'a> {
    masks: &'a [u32],
    full: u32,
    cap: usize,
}

impl CoverSearch<'_> {
    /// Calls `visit` on each non-redundant cover in lexicographic order until it returns `false`.
    fn run(&self, visit: &mut dyn FnMut(&[usize]) -> bool, admit: &mut dyn FnMut(&[usize]) -> bool) {
        let mut chosen = Vec::new();
        self.dfs(0, &mut chosen, visit, admit);
    }

    fn owns_something(&self, chosen: &[usize]) -> bool {
        chosen.iter().enumerate().all(|(i, &a)| {
            let others = chosen.iter().enumerate().filter(|(j, _)| *j != i).fold(0, |m, (_, &b)| m | self.masks[b]);
            self.masks[a] & !others != 0
        })
    }

    fn dfs(
        &self,
        start: usize,
        chosen: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]) -> bool,
        admit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        let covered = chosen.iter().fold(0, |m, &c| m | self.masks[c]);
        if covered == self.full {
            return visit(chosen);
        }
        if chosen.len() == self.cap {
            return true;
        }
        for c in start..self.masks.len() {
            if self.masks[c] & !covered == 0 {
                continue;
            }
            chosen.push(c);
            if self.owns_something(chosen) && admit(chosen) && !self.dfs(c + 1, chosen, visit, admit) {
                chosen.pop();
                return false;
            }
            chosen.pop();
        }
        true
    }
}

/// Every non-redundant extended flower centered at an edge, with at most
/// `max_neighbors` neighbors (`None`: no cap beyond the center size).
///
/// Listing order: centers in key order, then neighbor sets lexicographically.
pub fn enumerate_flowers(g: &Hypergraph, max_neighbors: Option<usize>) -> Vec<(ExtendedFlower, FlowerKind)> {
    let mut out = Vec::new();
    for e in g.edges() {
        let center = VarKey::Edge(e.clone());
        let cands = candidates(g, &center);
        let masks = trace_masks(&center, &cands);
        let cap = max_neighbors.unwrap_or(e.len()).min(e.len());
        let search = CoverSearch { masks: &masks, full: (1u32 << e.len()) - 1, cap };
        search.run(
            &mut |chosen| {
                let f = ExtendedFlower { center: center.clone(), neighbors: chosen.iter().map(|&c| cands[c].clone()).collect() };
                let kind = f.kind();
                out.push((f, kind));
                true
            },
            &mut |_| true,
        );
    }
    out
}

/// Box, every standard row, and every enumerated non-redundant flower row (deduplicated).
pub fn flower_relaxation(g: &Hypergraph, max_neighbors: Option<usize>) -> IneqSystem {
    let mut sys = standard_relaxation(g);
    for (f, _) in enumerate_flowers(g, max_neighbors) {
        sys.push(f.to_ineq()).expect("keys of g");
    }
    sys.dedup();
    sys
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Separation {
    pub flower: ExtendedFlower,
    pub violation: Rational,
}

impl Serialize for Separation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Separation", 2)?;
        st.serialize_field("flower", &self.flower)?;
        st.serialize_field("violation", &rational::format(&self.violation))?;
        st.end()
    }
}

/// Minimum cover cost per target mask: `cover[T]` is the cheapest candidate
/// set (at most `cap` members) whose traces cover at least `T`.
fn min_cover_costs(masks: &[u32], costs: &[Rational], bits: usize, cap: usize) -> Vec<Option<Rational>> {
    let size = 1usize << bits;
    // exact[M]: cheapest set with union exactly M, using at most `layer` members.
    let mut exact: Vec<Option<Rational>> = vec![None; size];
    exact[0] = Some(Rational::zero());
    for _ in 0..cap {
        let mut next = exact.clone();
        for (m, base) in exact.iter().enumerate() {
            let Some(base) = base else { continue };
            for (cm, cost) in masks.iter().zip(costs) {
                let nm = m | *cm as usize;
                let cand = base + cost;
                if next[nm].as_ref().is_none_or(|cur| cand < *cur) {
                    next[nm] = Some(cand);
                }
            }
        }
        if next == exact {
            break;
        }
        exact = next;
    }
    // Superset minimum.
    let mut cover = exact;
    for bit in 0..bits {
        for m in 0..size {
            if m & (1 << bit) == 0 {
                if let Some(sup) = cover[m | (1 << bit)].clone() {
                    if cover[m].as_ref().is_none_or(|cur| sup < *cur) {
                        cover[m] = Some(sup);
                    }
                }
            }
        }
    }
    cover
}

fn separate_center(
    g: &Hypergraph,
    center: &VarKey,
    point: &BTreeMap<VarKey, Rational>,
    max_neighbors: Option<usize>,
) -> Option<Separation> {
    let m = center.len();
    let cap = max_neighbors.unwrap_or(m).min(m);
    let cands = candidates(g, center);
    let masks = trace_masks(center, &cands);
    let costs: Vec<Rational> = cands.iter().map(|k| rational::one() - &point[k]).collect();
    let full = (1u32 << m) - 1;
    let mut best: Option<ExtendedFlower> = None;
    let base = rational::one() - &point[center];
    let opt = if cap > 0 { min_cover_costs(&masks, &costs, m, cap)[full as usize].clone() } else { None };
    if let Some(opt) = opt.filter(|o| (&base - o).is_positive()) {
        // Fewest neighbors first: the smallest cap that still reaches the optimum.
        let (size, cover) = (1..=cap)
            .map(|c| (c, min_cover_costs(&masks, &costs, m, c)))
            .find(|(_, cover)| cover[full as usize].as_ref() == Some(&opt))
            .expect("the full cap reaches the optimum");
        let search = CoverSearch { masks: &masks, full, cap: size };
        search.run(
            &mut |chosen| {
                let cost: Rational = chosen.iter().map(|&c| &costs[c]).sum();
                if cost == opt {
                    best = Some(ExtendedFlower {
                        center: center.clone(),
                        neighbors: chosen.iter().map(|&c| cands[c].clone()).collect(),
                    });
                    return false;
                }
                true
            },
            &mut |chosen| {
                let covered = chosen.iter().fold(0, |acc, &c| acc | masks[c]);
                let spent: Rational = chosen.iter().map(|&c| &costs[c]).sum();
                match &cover[(full & !covered) as usize] {
                    Some(rest) => spent + rest <= opt,
                    None => false,
                }
            },
        );
    }
    // The long standard row stays in the relaxation even when the cap excludes it.
    if m > cap && !center.is_singleton() {
        let long = ExtendedFlower { center: center.clone(), neighbors: center.members().iter().map(|&v| VarKey::x(v)).collect() };
        let better = match &best {
            None => true,
            Some(b) => {
                let (vl, vb) = (long.violation_at(point).unwrap(), b.violation_at(point).unwrap());
                vl > vb
            }
        };
        if better {
            best = Some(long);
        }
    }
    let flower = best?;
    let violation = flower.violation_at(point).expect("point covers all keys");
    violation.is_positive().then_some(Separation { flower, violation })
}

/// Most violated row of `flower_relaxation(g, max_neighbors)` at `point`, as a flower.
///
/// Edge centers are solved by a subset DP over the `2^|I|` cover states;
/// singleton centers give the short standard rows. Ties go to the smallest
/// center, then the fewest neighbors, then the lexicographically smallest neighbor set.
/// The returned flower is non-redundant.
pub fn separate_flower(
    g: &Hypergraph,
    point: &BTreeMap<VarKey, Rational>,
    max_neighbors: Option<usize>,
    guard: usize,
) -> Result<Option<Separation>, RelaxError> {
    if let Some(k) = g.keys().into_iter().find(|k| !point.contains_key(k)) {
        return Err(RelaxError::MissingCoordinate(k));
    }
    if let Some(e) = g.edges().iter().find(|e| e.len() > guard.min(31)) {
        return Err(RelaxError::CenterTooLarge { center: e.clone(), size: e.len(), guard });
    }
    let mut best: Option<Separation> = None;
    for center in g.keys() {
        let Some(sep) = separate_center(g, &center, point, max_neighbors) else { continue };
        if best.as_ref().is_none_or(|b| sep.violation > b.violation) {
            best = Some(sep);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ml_vertices, validate_hypergraph};
    use crate::rational::int;

    fn set(v: &[u32]) -> VarKey {
        VarKey::from_set(VarSet::new(v.iter().copied()).unwrap())
    }

    fn fig1() -> Hypergraph {
        validate_hypergraph(4, &[vec![1, 2, 3], vec![2, 3, 4], vec![1, 2]]).unwrap()
    }

    /// `u1 = 1, u2 = 2, v_i = i + 2`, edges `{u1, u2, v_i}`.
    fn fig2(k: u32) -> Hypergraph {
        let edges: Vec<Vec<u32>> = (1..=k).map(|i| vec![1, 2, i + 2]).collect();
        validate_hypergraph(k + 2, &edges).unwrap()
    }

    #[test]
    fn standard_rows() {
        let g = validate_hypergraph(2, &[vec![1, 2]]).unwrap();
        let sys = standard_relaxation(&g);
        let z = set(&[1, 2]);
        assert_eq!(
            sys.ineqs(),
            &[
                LinIneq::geq_var(VarKey::x(1), z.clone()),
                LinIneq::geq_var(VarKey::x(2), z.clone()),
                LinIneq::new([(z, int(1)), (VarKey::x(1), int(-1)), (VarKey::x(2), int(-1))], int(-1)),
            ]
        );
        assert_eq!(standard_relaxation(&fig1()).len(), 3 + 3 + 2 + 3);
        let empty = validate_hypergraph(3, &[]).unwrap();
        assert!(standard_relaxation(&empty).is_empty());
        assert!(standard_relaxation(&empty).is_boxed());
    }

    #[test]
    fn flower_rows() {
        let f = ExtendedFlower::new(set(&[1, 2]), [VarKey::x(1), VarKey::x(2)]).unwrap();
        assert_eq!(f.to_ineq().to_string(), "-x1 + z{1,2} - x2 >= -1");
        let f = ExtendedFlower::new(set(&[1, 2, 3]), [set(&[2, 3, 4]), VarKey::x(1)]).unwrap();
        assert_eq!(
            f.to_ineq(),
            LinIneq::new([(set(&[1, 2, 3]), int(1)), (set(&[2, 3, 4]), int(-1)), (VarKey::x(1), int(-1))], int(-1))
        );
        for v in ml_vertices(&fig1(), 20).unwrap() {
            assert!(!f.violation_at(&v.to_point()).unwrap().is_positive());
        }
        assert!(matches!(ExtendedFlower::new(set(&[1, 2, 3]), [set(&[1, 2])]), Err(RelaxError::MalformedFlower(_))));
        assert!(matches!(
            ExtendedFlower::new(set(&[1, 2]), [set(&[1, 2]), VarKey::x(1)]),
            Err(RelaxError::MalformedFlower(_))
        ));
        assert!(matches!(
            ExtendedFlower::new(set(&[1, 2]), [VarKey::x(1), VarKey::x(2), VarKey::x(3)]),
            Err(RelaxError::MalformedFlower(_))
        ));
    }

    #[test]
    fn kinds_and_redundancy() {
        // u1 = 1, u2 = 2, v1 = 3, v2 = 4, v3 = 5
        let f = ExtendedFlower::new(set(&[1, 2, 3]), [set(&[1, 2, 4]), VarKey::x(3)]).unwrap();
        assert!(f.is_nonredundant());
        assert_eq!(f.kind(), FlowerKind::Flower);
        let f = ExtendedFlower::new(set(&[1, 2, 3]), [set(&[1, 2, 4]), set(&[1, 2, 5]), VarKey::x(3)]).unwrap();
        assert!(!f.is_nonredundant());
        assert_eq!(f.kind(), FlowerKind::ExtendedOnly);
        assert_eq!(f.minimalize().neighbors(), &[set(&[1, 2, 5]), VarKey::x(3)]);
        let single = ExtendedFlower::new(set(&[1, 2]), [set(&[1, 2, 3])]).unwrap();
        assert!(single.is_nonredundant());
    }

    #[test]
    fn fig2_counts() {
        for k in 3..=6u32 {
            let flowers = enumerate_flowers(&fig2(k), None);
            let with_edge = flowers.iter().filter(|(f, _)| f.neighbors().iter().any(|n| !n.is_singleton())).count();
            let singles = flowers.len() - with_edge;
            assert_eq!(with_edge as u32, k * (k - 1));
            assert_eq!(singles as u32, k);
        }
    }

    #[test]
    fn single_edge_has_one_flower_and_fr_is_standard() {
        let g = validate_hypergraph(2, &[vec![1, 2]]).unwrap();
        let flowers = enumerate_flowers(&g, None);
        assert_eq!(flowers.len(), 1);
        assert_eq!(flower_relaxation(&g, None), standard_relaxation(&g));
        let empty = validate_hypergraph(2, &[]).unwrap();
        assert!(flower_relaxation(&empty, None).is_empty());
    }

    #[test]
    fn enumeration_respects_cap() {
        let g = fig1();
        let all = enumerate_flowers(&g, None);
        let capped = enumerate_flowers(&g, Some(2));
        assert!(capped.iter().all(|(f, _)| f.k() <= 2));
        assert!(capped.iter().all(|c| all.contains(c)));
        assert!(all.iter().all(|(f, _)| f.is_nonredundant() && f.k() <= f.center().len()));
    }

    #[test]
    fn separation_examples() {
        let g = validate_hypergraph(3, &[vec![1, 2], vec![1, 2, 3]]).unwrap();
        let mut p: BTreeMap<VarKey, Rational> = g.keys().into_iter().map(|k| (k, int(1))).collect();
        p.insert(set(&[1, 2, 3]), int(0));
        let sep = separate_flower(&g, &p, None, DEFAULT_CENTER_GUARD).unwrap().unwrap();
        assert_eq!(sep.flower.center(), &set(&[1, 2, 3]));
        assert_eq!(sep.flower.neighbors(), &[set(&[1, 2]), VarKey::x(3)]);
        assert_eq!(sep.violation, int(1));

        for v in ml_vertices(&fig1(), 20).unwrap() {
            assert_eq!(separate_flower(&fig1(), &v.to_point(), None, 20).unwrap(), None);
        }
        p.remove(&VarKey::x(2));
        assert_eq!(separate_flower(&g, &p, None, 20), Err(RelaxError::MissingCoordinate(VarKey::x(2))));
        assert!(matches!(
            separate_flower(&g, &g.keys().into_iter().map(|k| (k, int(0))).collect(), None, 2),
            Err(RelaxError::CenterTooLarge { .. })
        ));
    }

    #[test]
    fn separation_finds_short_rows() {
        let g = validate_hypergraph(2, &[vec![1, 2]]).unwrap();
        let p: BTreeMap<VarKey, Rational> =
            [(VarKey::x(1), int(0)), (VarKey::x(2), int(1)), (set(&[1, 2]), int(1))].into_iter().collect();
        let sep = separate_flower(&g, &p, None, 20).unwrap().unwrap();
        assert_eq!(sep.flower.center(), &VarKey::x(1));
        assert_eq!(sep.flower.neighbors(), &[set(&[1, 2])]);
        assert_eq!(sep.violation, int(1));
    }
}
