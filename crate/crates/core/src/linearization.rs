//! Recursive linearizations: digraphs on subsets whose arcs say which smaller
//! products a product is built from.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Hypergraph, ModelError, VarKey, VarSet};
use crate::poly::{project_onto, IneqSystem, LinIneq, PolyError};
use crate::rational::{self, Rational};
use crate::relax::{ExtendedFlower, RelaxError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinError {
    #[error("node {node} mentions variable {var} outside 1..={num_vars}")]
    VarOutOfRange { node: VarSet, var: u32, num_vars: u32 },
    #[error("{0} is not a node of the linearization")]
    UnknownNode(VarSet),
    #[error("arc {from} -> {to} appears twice")]
    DuplicateArc { from: VarSet, to: VarSet },
    #[error("arc {from} -> {to}: head must be a strict subset of the tail")]
    ArcNotStrictSubset { from: VarSet, to: VarSet },
    #[error("successors of {node} cover {covered} instead of the node")]
    SuccessorUnionMismatch { node: VarSet, covered: String },
    #[error("not a linearization of the hypergraph: {0}")]
    NotOfG(String),
    #[error("a path from {from} to {to} exists")]
    PathExists { from: VarSet, to: VarSet },
    #[error("flower {flower} is redundant: neighbor {neighbor} covers no element of the center on its own")]
    RedundantFlower { flower: String, neighbor: VarSet },
    #[error("unsupported file format {0}")]
    UnsupportedFormat(u32),
    #[error("arc index {0} is out of range")]
    ArcIndex(usize),
    #[error(transparent)]
    Relax(#[from] RelaxError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A simple digraph `D = (V, A)` on non-empty subsets of `{1, ..., n}`.
///
/// Every singleton is a node, every arc points to a strict subset, and the
/// successors of each non-singleton node cover it exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Linearization {
    num_vars: u32,
    succ: BTreeMap<VarSet, BTreeSet<VarSet>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LinClass {
    pub of_g: bool,
    pub partitioning: bool,
    pub binary: bool,
    pub mccormick: bool,
}

impl Linearization {
    pub fn new(
        num_vars: u32,
        nodes: impl IntoIterator<Item = VarSet>,
        arcs: impl IntoIterator<Item = (VarSet, VarSet)>,
    ) -> Result<Self, LinError> {
        let mut succ: BTreeMap<VarSet, BTreeSet<VarSet>> =
            (1..=num_vars).map(|v| (VarSet::singleton(v), BTreeSet::new())).collect();
        for node in nodes {
            if let Some(&var) = node.members().iter().find(|&&v| v == 0 || v > num_vars) {
                return Err(LinError::VarOutOfRange { node, var, num_vars });
            }
            succ.entry(node).or_default();
        }
        for (from, to) in arcs {
            for end in [&from, &to] {
                if !succ.contains_key(end) {
                    return Err(LinError::UnknownNode(end.clone()));
                }
            }
            if from == to || !to.is_subset(&from) {
                return Err(LinError::ArcNotStrictSubset { from, to });
            }
            if !succ.get_mut(&from).expect("checked").insert(to.clone()) {
                return Err(LinError::DuplicateArc { from, to });
            }
        }
        for (node, out) in &succ {
            if node.len() < 2 {
                continue;
            }
            let covered = out.iter().fold(None::<VarSet>, |acc, s| Some(acc.map_or(s.clone(), |a| a.union(s))));
            if covered.as_ref() != Some(node) {
                return Err(LinError::SuccessorUnionMismatch {
                    node: node.clone(),
                    covered: covered.map_or_else(|| "nothing".to_string(), |c| c.to_string()),
                });
            }
        }
        Ok(Linearization { num_vars, succ })
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    /// Nodes in set order.
    pub fn nodes(&self) -> impl Iterator<Item = &VarSet> {
        self.succ.keys()
    }

    pub fn num_nodes(&self) -> usize {
        self.succ.len()
    }

    pub fn has_node(&self, node: &VarSet) -> bool {
        self.succ.contains_key(node)
    }

    pub fn successors(&self, node: &VarSet) -> Option<&BTreeSet<VarSet>> {
        self.succ.get(node)
    }

    /// Arcs ordered by tail, then head.
    pub fn arcs(&self) -> impl Iterator<Item = (&VarSet, &VarSet)> {
        self.succ.iter().flat_map(|(from, out)| out.iter().map(move |to| (from, to)))
    }

    pub fn num_arcs(&self) -> usize {
        self.succ.values().map(BTreeSet::len).sum()
    }

    /// Nodes without predecessors.
    pub fn roots(&self) -> BTreeSet<VarSet> {
        let heads: BTreeSet<&VarSet> = self.succ.values().flatten().collect();
        self.succ.keys().filter(|n| !heads.contains(n)).cloned().collect()
    }

    /// The hypergraph whose edges are the non-singleton roots.
    pub fn implied_hypergraph(&self) -> Hypergraph {
        let edges: Vec<Vec<u32>> = self.roots().into_iter().filter(|n| n.len() >= 2).map(Vec::from).collect();
        Hypergraph::new(self.num_vars, &edges).expect("nodes are within range")
    }

    pub fn classify(&self, g: &Hypergraph) -> LinClass {
        let of_g = self.of_g_violation(g).is_none();
        let partitioning = self.succ.values().all(|out| {
            let out: Vec<&VarSet> = out.iter().collect();
            out.iter().enumerate().all(|(i, a)| out[i + 1..].iter().all(|b| a.is_disjoint(b)))
        });
        let binary = self.succ.iter().all(|(n, out)| n.len() < 2 || out.len() == 2);
        LinClass { of_g, partitioning, binary, mccormick: partitioning && binary }
    }

    fn of_g_violation(&self, g: &Hypergraph) -> Option<String> {
        if g.num_vars() != self.num_vars {
            return Some(format!("ground sets differ ({} vs {} variables)", g.num_vars(), self.num_vars));
        }
        if let Some(e) = g.edges().iter().find(|e| !self.has_node(e)) {
            return Some(format!("edge {e} is not a node"));
        }
        self.roots()
            .into_iter()
            .find(|r| r.len() >= 2 && !g.has_edge(r))
            .map(|r| format!("node {r} has no predecessor but is not an edge"))
    }

    /// Arc rows `z_I ≤ z_J`, one long row `z_I + ∑_J (1 − z_J) ≥ 1` per
    /// non-singleton node, and the unit box.
    pub fn relaxation_system(&self) -> IneqSystem {
        let mut sys = IneqSystem::boxed(self.succ.keys().cloned().map(VarKey::from_set));
        for (from, to) in self.arcs() {
            sys.push(LinIneq::geq_var(VarKey::from_set(to.clone()), VarKey::from_set(from.clone())))
                .expect("nodes are variables");
        }
        for (node, out) in &self.succ {
            if node.len() < 2 {
                continue;
            }
            let one = rational::one();
            let coeffs = std::iter::once((VarKey::from_set(node.clone()), one.clone()))
                .chain(out.iter().map(|j| (VarKey::from_set(j.clone()), -one.clone())));
            sys.push(LinIneq::new(coeffs, rational::int(1 - out.len() as i64))).expect("nodes are variables");
        }
        sys
    }

    fn reachable_from(&self, from: &VarSet) -> BTreeSet<&VarSet> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![self.succ.get_key_value(from).expect("caller checked").0];
        while let Some(n) = stack.pop() {
            if seen.insert(n) {
                stack.extend(self.succ[n].iter());
            }
        }
        seen
    }

    /// Whether a directed path (possibly of length 0) leads from `from` to `to`.
    pub fn has_path(&self, from: &VarSet, to: &VarSet) -> Result<bool, LinError> {
        for n in [from, to] {
            if !self.has_node(n) {
                return Err(LinError::UnknownNode(n.clone()));
            }
        }
        Ok(self.reachable_from(from).contains(to))
    }

    /// A point of the relaxation violating `z_{i_star} ≤ z_{j_star}` by 1/2:
    /// `0` on nodes with a path to `j_star`, `1/2` elsewhere.
    pub fn nonpath_witness(&self, i_star: &VarSet, j_star: &VarSet) -> Result<BTreeMap<VarKey, Rational>, LinError> {
        if self.has_path(i_star, j_star)? {
            return Err(LinError::PathExists { from: i_star.clone(), to: j_star.clone() });
        }
        Ok(self
            .succ
            .keys()
            .map(|n| {
                let v = if self.reachable_from(n).contains(j_star) { rational::zero() } else { rational::half() };
                (VarKey::from_set(n.clone()), v)
            })
            .collect())
    }

    /// The relaxation projected onto `targets` and all singletons.
    pub fn project_relaxation(&self, targets: &BTreeSet<VarSet>) -> Result<IneqSystem, LinError> {
        if let Some(t) = targets.iter().find(|t| !self.has_node(t)) {
            return Err(LinError::UnknownNode(t.clone()));
        }
        let keep: BTreeSet<VarKey> = targets
            .iter()
            .cloned()
            .chain((1..=self.num_vars).map(VarSet::singleton))
            .map(VarKey::from_set)
            .collect();
        Ok(project_onto(&self.relaxation_system(), &keep, true)?)
    }

    /// Projection onto the edges of `g` (and the singletons).
    pub fn project_onto_edges(&self, g: &Hypergraph) -> Result<IneqSystem, LinError> {
        self.project_relaxation(&g.edges().iter().cloned().collect())
    }

    pub fn to_dot(&self) -> String {
        let index: BTreeMap<&VarSet, usize> = self.succ.keys().enumerate().map(|(i, n)| (n, i)).collect();
        let mut out = String::from("digraph linearization {\n  node [shape=box, style=rounded];\n");
        for (n, i) in &index {
            writeln!(out, "  n{i} [label=\"{n}\"];").expect("write to string");
        }
        for (from, to) in self.arcs() {
            writeln!(out, "  n{} -> n{};", index[from], index[to]).expect("write to string");
        }
        out.push_str("}\n");
        out
    }

    pub fn to_file(&self, edges: Option<&Hypergraph>) -> LinearizationFile {
        let index: BTreeMap<&VarSet, usize> = self.succ.keys().enumerate().map(|(i, n)| (n, i)).collect();
        LinearizationFile {
            format: 1,
            num_vars: self.num_vars,
            nodes: self.succ.keys().cloned().map(Vec::from).collect(),
            arcs: self.arcs().map(|(a, b)| [index[a], index[b]]).collect(),
            edges: edges.map(Hypergraph::to_raw),
        }
    }
}

/// Checks the digraph and classifies it against `g`; with `require_of_g`,
/// a digraph that is not a linearization of `g` is an error.
pub fn validate_linearization(
    num_vars: u32,
    nodes: impl IntoIterator<Item = VarSet>,
    arcs: impl IntoIterator<Item = (VarSet, VarSet)>,
    g: &Hypergraph,
    require_of_g: bool,
) -> Result<(Linearization, LinClass), LinError> {
    let d = Linearization::new(num_vars, nodes, arcs)?;
    if require_of_g {
        if let Some(reason) = d.of_g_violation(g) {
            return Err(LinError::NotOfG(reason));
        }
    }
    let class = d.classify(g);
    Ok((d, class))
}

/// Serialized form: `arcs` index into `nodes`; singletons may be omitted.
/// Without `edges`, the hypergraph is the set of non-singleton roots.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearizationFile {
    pub format: u32,
    pub num_vars: u32,
    pub nodes: Vec<Vec<u32>>,
    pub arcs: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<Vec<u32>>>,
}

impl LinearizationFile {
    /// Builds and validates the digraph together with its hypergraph.
    pub fn load(&self) -> Result<(Linearization, Hypergraph, LinClass), LinError> {
        if self.format != 1 {
            return Err(LinError::UnsupportedFormat(self.format));
        }
        let nodes: Vec<VarSet> = self.nodes.iter().map(|n| VarSet::new(n.iter().copied())).collect::<Result<_, _>>()?;
        let mut arcs = Vec::with_capacity(self.arcs.len());
        for &[a, b] in &self.arcs {
            let from = nodes.get(a).ok_or(LinError::ArcIndex(a))?;
            let to = nodes.get(b).ok_or(LinError::ArcIndex(b))?;
            arcs.push((from.clone(), to.clone()));
        }
        let d = Linearization::new(self.num_vars, nodes, arcs)?;
        let g = match &self.edges {
            Some(edges) => Hypergraph::new(self.num_vars, edges)?,
            None => d.implied_hypergraph(),
        };
        if let Some(reason) = d.of_g_violation(&g) {
            return Err(LinError::NotOfG(reason));
        }
        let class = d.classify(&g);
        Ok((d, g, class))
    }
}

/// Each edge points to its singletons.
pub fn standard_linearization(g: &Hypergraph) -> Linearization {
    let arcs = g
        .edges()
        .iter()
        .flat_map(|e| e.members().iter().map(move |&v| (e.clone(), VarSet::singleton(v))));
    Linearization::new(g.num_vars(), g.edges().iter().cloned(), arcs).expect("standard linearization is valid")
}

/// The part of the construction fixed by the flower, before any completion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowerSkeleton {
    /// `L_i`: the elements of the center first covered by neighbor `i`.
    pub l_sets: Vec<VarSet>,
    /// Unions `L_1 ∪ ... ∪ L_j` for `j = k−1, ..., 2`.
    pub prefix_nodes: Vec<VarSet>,
    pub arcs: Vec<(VarSet, VarSet)>,
    /// Nodes still to be split down to singletons, in processing order.
    pub unprocessed: Vec<VarSet>,
}

fn redundant_neighbor(f: &ExtendedFlower) -> Option<VarSet> {
    (0..f.k()).find(|&i| f.exclusive_elements(i).is_empty()).map(|i| f.neighbors()[i].to_set())
}

/// Prefix tree over the `L_i` plus arcs `J_i → L_i`, `J_i → J_i \ L_i` for neighbors with `J_i ≠ L_i`.
pub fn flower_skeleton(f: &ExtendedFlower) -> Result<FlowerSkeleton, LinError> {
    if let Some(neighbor) = redundant_neighbor(f) {
        return Err(LinError::RedundantFlower { flower: f.to_string(), neighbor });
    }
    let center = f.center().to_set();
    let neighbors: Vec<VarSet> = f.neighbors().iter().map(VarKey::to_set).collect();
    let mut seen: Option<VarSet> = None;
    let mut l_sets = Vec::with_capacity(neighbors.len());
    for j in &neighbors {
        let fresh = match &seen {
            Some(s) => j.difference(s),
            None => Some(j.clone()),
        };
        let l = fresh.and_then(|x| x.intersection(&center)).expect("non-redundant neighbors own an element");
        l_sets.push(l);
        seen = Some(seen.map_or(j.clone(), |s| s.union(j)));
    }
    let prefixes: Vec<VarSet> = l_sets
        .iter()
        .scan(None::<VarSet>, |acc, l| {
            *acc = Some(acc.as_ref().map_or(l.clone(), |a| a.union(l)));
            acc.clone()
        })
        .collect();
    let k = l_sets.len();
    let mut arcs = Vec::new();
    for i in (1..k).rev() {
        arcs.push((prefixes[i].clone(), prefixes[i - 1].clone()));
        arcs.push((prefixes[i].clone(), l_sets[i].clone()));
    }
    let mut unprocessed = l_sets.clone();
    for (j, l) in neighbors.iter().zip(&l_sets) {
        if j != l {
            let rest = j.difference(l).expect("J differs from its L");
            arcs.push((j.clone(), l.clone()));
            arcs.push((j.clone(), rest.clone()));
            unprocessed.push(rest);
        }
    }
    let prefix_nodes = if k >= 2 { prefixes[1..k - 1].iter().rev().cloned().collect() } else { Vec::new() };
    Ok(FlowerSkeleton { l_sets, prefix_nodes, arcs, unprocessed })
}

/// Binary partitioning digraph under construction.
#[derive(Default)]
struct Builder {
    nodes: BTreeSet<VarSet>,
    succ: BTreeMap<VarSet, (VarSet, VarSet)>,
}

impl Builder {
    fn expand(&mut self, node: &VarSet, a: &VarSet, b: &VarSet) {
        if let Some(existing) = self.succ.get(node) {
            debug_assert!(
                (&existing.0, &existing.1) == (a, b) || (&existing.0, &existing.1) == (b, a),
                "{node} expanded twice with different successors"
            );
            return;
        }
        for n in [node, a, b] {
            self.nodes.insert(n.clone());
        }
        self.succ.insert(node.clone(), (a.clone(), b.clone()));
    }

    /// Splits `node` along the largest existing strict sub-node, or into two
    /// halves of its sorted member list when none exists.
    fn split(&self, node: &VarSet) -> (VarSet, VarSet) {
        let reuse = self
            .nodes
            .iter()
            .filter(|n| n.len() >= 2 && *n != node && n.is_subset(node))
            .min_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        match reuse {
            Some(n) => (n.clone(), node.difference(n).expect("strict subset")),
            None => {
                let m = node.members();
                let half = m.len().div_ceil(2);
                (
                    VarSet::new(m[..half].iter().copied()).expect("non-empty"),
                    VarSet::new(m[half..].iter().copied()).expect("non-empty"),
                )
            }
        }
    }

    fn complete(&mut self, start: impl IntoIterator<Item = VarSet>) {
        let mut queue: VecDeque<VarSet> = start.into_iter().collect();
        while let Some(node) = queue.pop_front() {
            self.nodes.insert(node.clone());
            if node.len() < 2 || self.succ.contains_key(&node) {
                continue;
            }
            let (a, b) = self.split(&node);
            self.expand(&node, &a, &b);
            queue.push_back(a);
            queue.push_back(b);
        }
    }

    fn finish(self, num_vars: u32) -> Linearization {
        let arcs = self.succ.iter().flat_map(|(n, (a, b))| [(n.clone(), a.clone()), (n.clone(), b.clone())]);
        Linearization::new(num_vars, self.nodes.iter().cloned(), arcs).expect("construction yields a linearization")
    }
}

/// A recursive McCormick linearization of `g` whose projected relaxation onto
/// the edges implies the flower's inequality.
///
/// Neighbors are taken in their sorted order. Leftover nodes and untouched
/// edges are split deterministically, reusing existing nodes when possible.
pub fn mccormick_from_flower(g: &Hypergraph, f: &ExtendedFlower) -> Result<Linearization, LinError> {
    f.check_in(g)?;
    let skeleton = flower_skeleton(f)?;
    let mut b = Builder::default();
    b.nodes.insert(f.center().to_set());
    b.nodes.extend(skeleton.l_sets.iter().cloned());
    for pair in skeleton.arcs.chunks(2) {
        b.expand(&pair[0].0, &pair[0].1, &pair[1].1);
    }
    b.complete(skeleton.unprocessed);
    b.complete(g.edges().iter().cloned());
    let d = b.finish(g.num_vars());
    debug_assert!(d.classify(g).mccormick && d.classify(g).of_g);
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_hypergraph;
    use crate::poly::{is_member, is_valid, poly_equal};
    use crate::relax::{enumerate_flowers, standard_relaxation};

    fn s(v: &[u32]) -> VarSet {
        VarSet::new(v.iter().copied()).unwrap()
    }

    fn arcs(list: &[(&[u32], &[u32])]) -> Vec<(VarSet, VarSet)> {
        list.iter().map(|(a, b)| (s(a), s(b))).collect()
    }

    fn fig1() -> Hypergraph {
        validate_hypergraph(4, &[vec![1, 2, 3], vec![2, 3, 4], vec![1, 2]]).unwrap()
    }

    fn d_c() -> Linearization {
        let a = arcs(&[
            (&[1, 2, 3], &[1]),
            (&[1, 2, 3], &[2, 3]),
            (&[2, 3, 4], &[2, 3]),
            (&[2, 3, 4], &[4]),
            (&[1, 2], &[1]),
            (&[1, 2], &[2]),
            (&[2, 3], &[2]),
            (&[2, 3], &[3]),
        ]);
        Linearization::new(4, [s(&[1, 2, 3]), s(&[2, 3, 4]), s(&[1, 2]), s(&[2, 3])], a).unwrap()
    }

    fn d_d() -> Linearization {
        let a = arcs(&[
            (&[1, 2, 3], &[1, 2]),
            (&[1, 2, 3], &[2, 3]),
            (&[2, 3, 4], &[2, 3]),
            (&[2, 3, 4], &[4]),
            (&[1, 2], &[1]),
            (&[1, 2], &[2]),
            (&[2, 3], &[2]),
            (&[2, 3], &[3]),
        ]);
        Linearization::new(4, [s(&[1, 2, 3]), s(&[2, 3, 4]), s(&[1, 2]), s(&[2, 3])], a).unwrap()
    }

    #[test]
    fn fig1_classes() {
        let g = fig1();
        let c = d_c().classify(&g);
        assert!(c.mccormick && c.of_g);
        let d = d_d().classify(&g);
        assert!(d.binary && !d.partitioning && d.of_g);
        let b = standard_linearization(&g).classify(&g);
        assert!(b.partitioning && !b.binary && b.of_g);
        assert_eq!(standard_linearization(&g).num_arcs(), 8);
    }

    #[test]
    fn validation_errors() {
        let n = [s(&[1, 2])];
        assert!(matches!(
            Linearization::new(2, n.clone(), arcs(&[(&[1, 2], &[1])])),
            Err(LinError::SuccessorUnionMismatch { .. })
        ));
        assert!(matches!(
            Linearization::new(2, n.clone(), arcs(&[(&[1], &[1, 2])])),
            Err(LinError::ArcNotStrictSubset { .. })
        ));
        assert!(matches!(
            Linearization::new(2, n.clone(), arcs(&[(&[1, 2], &[1]), (&[1, 2], &[1])])),
            Err(LinError::DuplicateArc { .. })
        ));
        assert!(matches!(Linearization::new(2, n, arcs(&[(&[1, 2], &[1, 3])])), Err(LinError::UnknownNode(_))));
        let g = validate_hypergraph(3, &[vec![1, 2, 3]]).unwrap();
        let (d, _) = validate_linearization(3, [], [], &validate_hypergraph(3, &[]).unwrap(), true).unwrap();
        assert_eq!(d.num_nodes(), 3);
        assert!(matches!(validate_linearization(3, [], [], &g, true), Err(LinError::NotOfG(_))));
    }

    #[test]
    fn relaxation_rows() {
        let g = validate_hypergraph(2, &[vec![1, 2]]).unwrap();
        let d = standard_linearization(&g);
        assert_eq!(d.relaxation_system(), standard_relaxation(&g));
        let sys = d_c().relaxation_system();
        assert_eq!(sys.len(), 8 + 4);
        let row = LinIneq::new(
            [(VarKey::from_set(s(&[2, 3, 4])), rational::one()), (VarKey::from_set(s(&[2, 3])), -rational::one()), (VarKey::x(4), -rational::one())],
            rational::int(-1),
        );
        assert!(sys.contains(&row));
        let g = fig1();
        assert!(poly_equal(&standard_linearization(&g).relaxation_system(), &standard_relaxation(&g)).unwrap());
    }

    #[test]
    fn paths_and_witness() {
        let d = d_c();
        assert!(d.has_path(&s(&[1, 2, 3]), &s(&[2, 3])).unwrap());
        assert!(!d.has_path(&s(&[1, 2]), &s(&[2, 3])).unwrap());
        assert!(d.has_path(&s(&[1, 2]), &s(&[1, 2])).unwrap());
        assert!(matches!(d.has_path(&s(&[1, 4]), &s(&[1])), Err(LinError::UnknownNode(_))));
        let w = d.nonpath_witness(&s(&[1, 2]), &s(&[2, 3])).unwrap();
        let zeros: Vec<VarSet> = w.iter().filter(|(_, v)| *v == &rational::zero()).map(|(k, _)| k.to_set()).collect();
        assert_eq!(zeros, vec![s(&[1, 2, 3]), s(&[2, 3]), s(&[2, 3, 4])]);
        let sys = d.relaxation_system();
        assert!(is_member(&sys, &w).unwrap().is_inside());
        assert!(matches!(d.nonpath_witness(&s(&[1, 2, 3]), &s(&[2, 3])), Err(LinError::PathExists { .. })));
    }

    #[test]
    fn fig4_skeleton() {
        let center = VarKey::from_set(s(&[1, 2, 3, 4, 5, 6, 7, 8, 9, 10]));
        let neighbors = [s(&[1, 2, 3]), s(&[4, 5, 6, 11, 12]), s(&[7, 8, 13]), s(&[9, 10, 14, 15])].map(VarKey::from_set);
        let f = ExtendedFlower::new(center, neighbors).unwrap();
        let sk = flower_skeleton(&f).unwrap();
        assert_eq!(sk.l_sets, vec![s(&[1, 2, 3]), s(&[4, 5, 6]), s(&[7, 8]), s(&[9, 10])]);
        assert_eq!(sk.prefix_nodes, vec![s(&[1, 2, 3, 4, 5, 6, 7, 8]), s(&[1, 2, 3, 4, 5, 6])]);
        let expected: BTreeSet<(VarSet, VarSet)> = arcs(&[
            (&[1, 2, 3, 4, 5, 6, 7, 8, 9, 10], &[1, 2, 3, 4, 5, 6, 7, 8]),
            (&[1, 2, 3, 4, 5, 6, 7, 8, 9, 10], &[9, 10]),
            (&[1, 2, 3, 4, 5, 6, 7, 8], &[1, 2, 3, 4, 5, 6]),
            (&[1, 2, 3, 4, 5, 6, 7, 8], &[7, 8]),
            (&[1, 2, 3, 4, 5, 6], &[1, 2, 3]),
            (&[1, 2, 3, 4, 5, 6], &[4, 5, 6]),
            (&[4, 5, 6, 11, 12], &[4, 5, 6]),
            (&[4, 5, 6, 11, 12], &[11, 12]),
            (&[7, 8, 13], &[7, 8]),
            (&[7, 8, 13], &[13]),
            (&[9, 10, 14, 15], &[9, 10]),
            (&[9, 10, 14, 15], &[14, 15]),
        ])
        .into_iter()
        .collect();
        assert_eq!(sk.arcs.iter().cloned().collect::<BTreeSet<_>>(), expected);
        assert_eq!(
            sk.unprocessed,
            vec![s(&[1, 2, 3]), s(&[4, 5, 6]), s(&[7, 8]), s(&[9, 10]), s(&[11, 12]), s(&[13]), s(&[14, 15])]
        );
    }

    #[test]
    fn single_neighbor_construction() {
        let g = validate_hypergraph(3, &[vec![1, 2], vec![1, 2, 3]]).unwrap();
        let f = ExtendedFlower::new(VarKey::from_set(s(&[1, 2])), [VarKey::from_set(s(&[1, 2, 3]))]).unwrap();
        let d = mccormick_from_flower(&g, &f).unwrap();
        let got: BTreeSet<_> = d.successors(&s(&[1, 2, 3])).unwrap().iter().cloned().collect();
        assert_eq!(got, [s(&[1, 2]), s(&[3])].into_iter().collect());
        let c = d.classify(&g);
        assert!(c.mccormick && c.of_g);
    }

    #[test]
    fn redundant_flower_rejected() {
        let g = validate_hypergraph(5, &[vec![1, 2, 3], vec![1, 2, 4], vec![1, 2, 5]]).unwrap();
        let f = ExtendedFlower::new(
            VarKey::from_set(s(&[1, 2, 3])),
            [VarKey::from_set(s(&[1, 2, 4])), VarKey::from_set(s(&[1, 2, 5])), VarKey::x(3)],
        )
        .unwrap();
        assert!(matches!(mccormick_from_flower(&g, &f), Err(LinError::RedundantFlower { .. })));
        assert!(mccormick_from_flower(&g, &f.minimalize()).is_ok());
    }

    #[test]
    fn construction_certifies_every_flower() {
        for g in [fig1(), validate_hypergraph(5, &[vec![1, 2, 3], vec![1, 2, 4], vec![1, 2, 5]]).unwrap()] {
            for (f, _) in enumerate_flowers(&g, None) {
                let d = mccormick_from_flower(&g, &f).unwrap();
                let c = d.classify(&g);
                assert!(c.mccormick && c.of_g, "{f}");
                assert!(is_valid(&d.relaxation_system(), &f.to_ineq()).unwrap(), "{f}");
            }
        }
    }

    #[test]
    fn fig2_construction_reuses_arcs() {
        let k = 4u32;
        let edges: Vec<Vec<u32>> = (1..=k).map(|i| vec![1, 2, i + 2]).collect();
        let g = validate_hypergraph(k + 2, &edges).unwrap();
        let f = ExtendedFlower::new(VarKey::from_set(s(&[1, 2, 3])), [VarKey::from_set(s(&[1, 2, 4])), VarKey::x(3)]).unwrap();
        let d = mccormick_from_flower(&g, &f).unwrap();
        let extra: Vec<&VarSet> = d.nodes().filter(|n| n.len() >= 2 && !g.has_edge(n)).collect();
        assert_eq!(extra, vec![&s(&[1, 2])]);
        let std = standard_relaxation(&g);
        let new_rows = d.relaxation_system().ineqs().iter().filter(|r| !std.contains(r)).count();
        assert_eq!(new_rows as u32, 2 * k + 3);
    }

    #[test]
    fn projection_of_fig1() {
        let g = fig1();
        let z1: BTreeMap<VarKey, Rational> = [
            (s(&[2, 3, 4]), rational::zero()),
            (s(&[1, 2, 3]), rational::half()),
            (s(&[1, 2]), rational::half()),
            (s(&[1]), rational::half()),
            (s(&[2]), rational::half()),
            (s(&[3]), rational::half()),
            (s(&[4]), rational::one()),
        ]
        .into_iter()
        .map(|(k, v)| (VarKey::from_set(k), v))
        .collect();
        let pc = d_c().project_onto_edges(&g).unwrap();
        assert!(!pc.vars().contains(&VarKey::from_set(s(&[2, 3]))));
        assert!(!is_member(&pc, &z1).unwrap().is_inside());
        assert!(is_member(&standard_linearization(&g).relaxation_system(), &z1).unwrap().is_inside());
        let all: BTreeSet<VarSet> = d_c().nodes().cloned().collect();
        assert_eq!(d_c().project_relaxation(&all).unwrap(), crate::poly::remove_redundant(&d_c().relaxation_system()).unwrap());
    }

    #[test]
    fn file_round_trip_and_dot() {
        let g = fig1();
        let file = d_c().to_file(Some(&g));
        let (d, g2, class) = file.load().unwrap();
        assert_eq!(d, d_c());
        assert_eq!(g2, g);
        assert!(class.mccormick);
        let dot = d.to_dot();
        assert!(dot.contains("[label=\"{1,2,3}\"]"));
        assert_eq!(dot.matches("->").count(), 8);
        let mut bad = file.clone();
        bad.arcs.push([0, 99]);
        assert_eq!(bad.load(), Err(LinError::ArcIndex(99)));
    }
}
