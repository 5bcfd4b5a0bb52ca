//! Ground sets, hypergraphs and multilinear instances over 0/1 variables.
//!
//! Every relaxation variable is addressed by a [`VarKey`]: a singleton `{v}`
//! stands for `x_v`, a larger subset `I` for the product variable `z_I`.
//! Keys are compared as sorted member lists, so the same subset built by two
//! different formulations is the same variable.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{self, Rational};

/// Largest ground set the brute-force oracles will enumerate by default.
pub const DEFAULT_ENUMERATION_GUARD: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("hyperedge {0:?} is empty")]
    EmptyEdge(Vec<u32>),
    #[error("hyperedge {0:?} has fewer than two variables")]
    EdgeTooSmall(Vec<u32>),
    #[error("variable {var} is outside 1..={num_vars}")]
    VarOutOfRange { var: u32, num_vars: u32 },
    #[error("the ground set must contain at least one variable")]
    EmptyGroundSet,
    #[error("monomial {0:?} repeats a variable")]
    RepeatedVariable(Vec<u32>),
    #[error("monomial {0} is not a hyperedge of the instance")]
    UnknownMonomial(VarKey),
    #[error("enumeration over {num_vars} variables exceeds the guard of {guard}")]
    TooLarge { num_vars: usize, guard: usize },
    #[error("no 0/1 point satisfies the constraints")]
    Infeasible,
}

/// A variable `v` of the ground set `V = {1, ..., n}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroundVar(pub u32);

/// A non-empty subset of the ground set, stored sorted and without repetition.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct VarSet(Vec<u32>);

impl VarSet {
    pub fn new(members: impl IntoIterator<Item = u32>) -> Result<Self, ModelError> {
        let mut v: Vec<u32> = members.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        if v.is_empty() {
            return Err(ModelError::EmptyEdge(v));
        }
        Ok(VarSet(v))
    }

    pub fn singleton(v: u32) -> Self {
        VarSet(vec![v])
    }

    pub fn members(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: u32) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn is_subset(&self, other: &VarSet) -> bool {
        is_subset(&self.0, &other.0)
    }

    pub fn is_disjoint(&self, other: &VarSet) -> bool {
        intersect(&self.0, &other.0).is_empty()
    }

    pub fn meets(&self, other: &VarSet) -> bool {
        !self.is_disjoint(other)
    }

    pub fn union(&self, other: &VarSet) -> VarSet {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        v.sort_unstable();
        v.dedup();
        VarSet(v)
    }

    /// `None` when the intersection is empty.
    pub fn intersection(&self, other: &VarSet) -> Option<VarSet> {
        let v = intersect(&self.0, &other.0);
        (!v.is_empty()).then_some(VarSet(v))
    }

    /// `None` when the difference is empty.
    pub fn difference(&self, other: &VarSet) -> Option<VarSet> {
        let v: Vec<u32> = self.0.iter().copied().filter(|x| !other.contains(*x)).collect();
        (!v.is_empty()).then_some(VarSet(v))
    }
}

fn is_subset(a: &[u32], b: &[u32]) -> bool {
    let mut j = 0;
    for &x in a {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        if j == b.len() || b[j] != x {
            return false;
        }
    }
    true
}

fn intersect(a: &[u32], b: &[u32]) -> Vec<u32> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

impl TryFrom<Vec<u32>> for VarSet {
    type Error = ModelError;
    fn try_from(v: Vec<u32>) -> Result<Self, Self::Error> {
        VarSet::new(v)
    }
}

impl From<VarSet> for Vec<u32> {
    fn from(s: VarSet) -> Self {
        s.0
    }
}

impl fmt::Display for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// Identity of a relaxation variable: `x_v` for a singleton, `z_I` otherwise.
///
/// Ordered by the sorted member list, so `{1} < {1,2} < {2}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub enum VarKey {
    Singleton(GroundVar),
    Edge(VarSet),
}

impl VarKey {
    pub fn x(v: u32) -> Self {
        VarKey::Singleton(GroundVar(v))
    }

    pub fn from_set(set: VarSet) -> Self {
        if set.len() == 1 {
            VarKey::Singleton(GroundVar(set.0[0]))
        } else {
            VarKey::Edge(set)
        }
    }

    pub fn members(&self) -> &[u32] {
        match self {
            VarKey::Singleton(v) => std::slice::from_ref(&v.0),
            VarKey::Edge(s) => s.members(),
        }
    }

    pub fn to_set(&self) -> VarSet {
        VarSet(self.members().to_vec())
    }

    pub fn len(&self) -> usize {
        self.members().len()
    }

    /// Always false; keys have at least one member.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_singleton(&self) -> bool {
        matches!(self, VarKey::Singleton(_))
    }
}

impl From<VarSet> for VarKey {
    fn from(set: VarSet) -> Self {
        VarKey::from_set(set)
    }
}

impl TryFrom<Vec<u32>> for VarKey {
    type Error = ModelError;
    fn try_from(v: Vec<u32>) -> Result<Self, Self::Error> {
        Ok(VarKey::from_set(VarSet::new(v)?))
    }
}

impl From<VarKey> for Vec<u32> {
    fn from(k: VarKey) -> Self {
        k.members().to_vec()
    }
}

impl PartialOrd for VarKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for VarKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.members().cmp(other.members())
    }
}

impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarKey::Singleton(v) => write!(f, "x{}", v.0),
            VarKey::Edge(s) => write!(f, "z{s}"),
        }
    }
}

/// `G = (V, E)` with `V = {1, ..., num_vars}` and every edge of size at least two.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Hypergraph {
    num_vars: u32,
    edges: Vec<VarSet>,
}

/// Checks and canonicalizes a raw edge list: members sorted, edges deduplicated and sorted.
pub fn validate_hypergraph(num_vars: u32, raw_edges: &[Vec<u32>]) -> Result<Hypergraph, ModelError> {
    if num_vars == 0 {
        return Err(ModelError::EmptyGroundSet);
    }
    let mut edges = Vec::with_capacity(raw_edges.len());
    for raw in raw_edges {
        if raw.is_empty() {
            return Err(ModelError::EmptyEdge(raw.clone()));
        }
        if let Some(&var) = raw.iter().find(|&&v| v == 0 || v > num_vars) {
            return Err(ModelError::VarOutOfRange { var, num_vars });
        }
        let set = VarSet::new(raw.iter().copied())?;
        if set.len() < 2 {
            return Err(ModelError::EdgeTooSmall(raw.clone()));
        }
        edges.push(set);
    }
    edges.sort();
    edges.dedup();
    Ok(Hypergraph { num_vars, edges })
}

impl Hypergraph {
    pub fn new(num_vars: u32, raw_edges: &[Vec<u32>]) -> Result<Self, ModelError> {
        validate_hypergraph(num_vars, raw_edges)
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn edges(&self) -> &[VarSet] {
        &self.edges
    }

    pub fn has_edge(&self, set: &VarSet) -> bool {
        self.edges.binary_search(set).is_ok()
    }

    pub fn singletons(&self) -> impl Iterator<Item = VarKey> + '_ {
        (1..=self.num_vars).map(VarKey::x)
    }

    /// Singleton keys followed by edge keys, in key order.
    pub fn keys(&self) -> Vec<VarKey> {
        let mut keys: Vec<VarKey> = self.singletons().collect();
        keys.extend(self.edges.iter().cloned().map(VarKey::Edge));
        keys.sort();
        keys
    }

    /// Whether `key` is a variable of `E ∪ S`.
    pub fn has_key(&self, key: &VarKey) -> bool {
        match key {
            VarKey::Singleton(v) => v.0 >= 1 && v.0 <= self.num_vars,
            VarKey::Edge(s) => self.has_edge(s),
        }
    }

    pub fn without_edge(&self, edge: &VarSet) -> Hypergraph {
        Hypergraph {
            num_vars: self.num_vars,
            edges: self.edges.iter().filter(|e| *e != edge).cloned().collect(),
        }
    }

    pub fn to_raw(&self) -> Vec<Vec<u32>> {
        self.edges.iter().map(|e| e.members().to_vec()).collect()
    }
}

/// One monomial `coef · ∏_{v ∈ key} x_v`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    #[serde(with = "rational::serde_str")]
    pub coef: Rational,
    pub key: VarKey,
}

/// `∑ terms ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub terms: Vec<Term>,
    #[serde(with = "rational::serde_str")]
    pub rhs: Rational,
}

/// Monomials as `(coef, vars)` with a right-hand side: `∑ coef · ∏ x_v ≤ rhs`.
pub type RawConstraint = (Vec<(Rational, Vec<u32>)>, Rational);

/// Minimize a multilinear objective subject to multilinear `≤` constraints over `{0,1}^V`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultilinearInstance {
    hypergraph: Hypergraph,
    objective: Vec<Term>,
    constraints: Vec<Constraint>,
}

impl MultilinearInstance {
    pub fn new(
        hypergraph: Hypergraph,
        objective: Vec<Term>,
        constraints: Vec<Constraint>,
    ) -> Result<Self, ModelError> {
        let all_terms = objective.iter().chain(constraints.iter().flat_map(|c| c.terms.iter()));
        for term in all_terms {
            if let VarKey::Singleton(v) = &term.key {
                if v.0 == 0 || v.0 > hypergraph.num_vars {
                    return Err(ModelError::VarOutOfRange { var: v.0, num_vars: hypergraph.num_vars });
                }
            } else if !hypergraph.has_key(&term.key) {
                return Err(ModelError::UnknownMonomial(term.key.clone()));
            }
        }
        Ok(MultilinearInstance { hypergraph, objective, constraints })
    }

    /// Builds the instance whose hypergraph is the union of all monomials of degree two or more.
    pub fn from_monomials(
        num_vars: u32,
        objective: Vec<(Rational, Vec<u32>)>,
        constraints: Vec<RawConstraint>,
    ) -> Result<Self, ModelError> {
        fn term(num_vars: u32, coef: Rational, vars: Vec<u32>) -> Result<Term, ModelError> {
            if vars.is_empty() {
                return Err(ModelError::EmptyEdge(vars));
            }
            if let Some(&var) = vars.iter().find(|&&v| v == 0 || v > num_vars) {
                return Err(ModelError::VarOutOfRange { var, num_vars });
            }
            let set = VarSet::new(vars.iter().copied())?;
            if set.len() != vars.len() {
                return Err(ModelError::RepeatedVariable(vars));
            }
            Ok(Term { coef, key: VarKey::from_set(set) })
        }
        let objective = objective
            .into_iter()
            .map(|(c, v)| term(num_vars, c, v))
            .collect::<Result<Vec<_>, _>>()?;
        let constraints = constraints
            .into_iter()
            .map(|(terms, rhs)| {
                let terms = terms
                    .into_iter()
                    .map(|(c, v)| term(num_vars, c, v))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Constraint { terms, rhs })
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        let raw_edges: Vec<Vec<u32>> = objective
            .iter()
            .chain(constraints.iter().flat_map(|c| c.terms.iter()))
            .filter(|t| !t.key.is_singleton())
            .map(|t| t.key.members().to_vec())
            .collect();
        let hypergraph = validate_hypergraph(num_vars, &raw_edges)?;
        MultilinearInstance::new(hypergraph, objective, constraints)
    }

    pub fn hypergraph(&self) -> &Hypergraph {
        &self.hypergraph
    }

    pub fn objective(&self) -> &[Term] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Objective as a linear function of the relaxation variables (coefficients merged per key).
    pub fn linear_objective(&self) -> BTreeMap<VarKey, Rational> {
        merge_terms(&self.objective)
    }
}

pub(crate) fn merge_terms(terms: &[Term]) -> BTreeMap<VarKey, Rational> {
    let mut out: BTreeMap<VarKey, Rational> = BTreeMap::new();
    for t in terms {
        *out.entry(t.key.clone()).or_insert_with(Rational::zero) += &t.coef;
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// A vertex of the multilinear polytope: a 0/1 assignment to `x` and the induced products.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MLVertex {
    pub assignment: BTreeMap<VarKey, bool>,
}

impl MLVertex {
    fn from_x(g: &Hypergraph, x: &[bool]) -> Self {
        let mut assignment = BTreeMap::new();
        for v in 1..=g.num_vars {
            assignment.insert(VarKey::x(v), x[(v - 1) as usize]);
        }
        for e in &g.edges {
            let value = e.members().iter().all(|&v| x[(v - 1) as usize]);
            assignment.insert(VarKey::Edge(e.clone()), value);
        }
        MLVertex { assignment }
    }

    pub fn value(&self, key: &VarKey) -> Option<bool> {
        self.assignment.get(key).copied()
    }

    /// The `x` part in variable order.
    pub fn x(&self) -> Vec<bool> {
        self.assignment
            .iter()
            .filter(|(k, _)| k.is_singleton())
            .map(|(_, &b)| b)
            .collect()
    }

    pub fn to_point(&self) -> BTreeMap<VarKey, Rational> {
        self.assignment
            .iter()
            .map(|(k, &b)| (k.clone(), if b { rational::one() } else { rational::zero() }))
            .collect()
    }
}

fn check_guard(num_vars: u32, guard: usize) -> Result<(), ModelError> {
    if num_vars as usize > guard {
        return Err(ModelError::TooLarge { num_vars: num_vars as usize, guard });
    }
    Ok(())
}

/// The 0/1 assignment with index `rank` in lexicographic order (`x_1` most significant).
fn nth_x(num_vars: u32, rank: u64) -> Vec<bool> {
    (1..=num_vars).map(|v| (rank >> (num_vars - v)) & 1 == 1).collect()
}

/// All `2^n` vertices of `ML(G)`, ordered lexicographically by `x`.
pub fn ml_vertices(g: &Hypergraph, guard: usize) -> Result<Vec<MLVertex>, ModelError> {
    check_guard(g.num_vars, guard)?;
    let n = g.num_vars;
    Ok((0..1u64 << n).map(|rank| MLVertex::from_x(g, &nth_x(n, rank))).collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerOptimum {
    pub value: Rational,
    pub argmin: MLVertex,
}

fn eval_terms(terms: &[Term], x: &[bool]) -> Rational {
    let mut sum = Rational::zero();
    for t in terms {
        if t.key.members().iter().all(|&v| x[(v - 1) as usize]) {
            sum += &t.coef;
        }
    }
    sum
}

/// Brute-force minimum over `{0,1}^V`; ties go to the lexicographically smallest `x`.
pub fn integer_optimum(inst: &MultilinearInstance, guard: usize) -> Result<IntegerOptimum, ModelError> {
    let g = &inst.hypergraph;
    check_guard(g.num_vars, guard)?;
    let n = g.num_vars;
    let mut best: Option<(Rational, Vec<bool>)> = None;
    for rank in 0..1u64 << n {
        let x = nth_x(n, rank);
        if inst.constraints.iter().any(|c| eval_terms(&c.terms, &x) > c.rhs) {
            continue;
        }
        let value = eval_terms(&inst.objective, &x);
        if best.as_ref().is_none_or(|(b, _)| value < *b) {
            best = Some((value, x));
        }
    }
    let (value, x) = best.ok_or(ModelError::Infeasible)?;
    Ok(IntegerOptimum { value, argmin: MLVertex::from_x(g, &x) })
}
