//! Instances, digraphs and points from the figures.

use std::collections::BTreeMap;

use crate::linearization::Linearization;
use crate::model::{Hypergraph, MultilinearInstance, VarKey, VarSet};
use crate::rational::{self, Rational};
use crate::relax::ExtendedFlower;

fn set(v: &[u32]) -> VarSet {
    VarSet::new(v.iter().copied()).expect("fixture sets are non-empty")
}

fn lin(num_vars: u32, arcs: &[(&[u32], &[u32])]) -> Linearization {
    let arcs: Vec<(VarSet, VarSet)> = arcs.iter().map(|(a, b)| (set(a), set(b))).collect();
    let nodes: Vec<VarSet> = arcs.iter().flat_map(|(a, b)| [a.clone(), b.clone()]).collect();
    Linearization::new(num_vars, nodes, arcs).expect("fixture digraphs are valid")
}

/// `E = {{1,2,3}, {2,3,4}, {1,2}}` over four variables.
pub fn fig1_hypergraph() -> Hypergraph {
    Hypergraph::new(4, &[vec![1, 2, 3], vec![2, 3, 4], vec![1, 2]]).expect("valid")
}

/// Nonnegative objective over the Fig. 1 monomials.
pub fn fig1_instance() -> MultilinearInstance {
    let one = rational::one();
    MultilinearInstance::from_monomials(
        4,
        vec![(one.clone(), vec![1, 2, 3]), (one.clone(), vec![2, 3, 4]), (one, vec![1, 2])],
        vec![],
    )
    .expect("valid")
}

/// The standard linearization as drawn: each edge points to its singletons, no `{2,3}` node.
pub fn fig1_d_b() -> Linearization {
    lin(
        4,
        &[
            (&[1, 2, 3], &[1]),
            (&[1, 2, 3], &[2]),
            (&[1, 2, 3], &[3]),
            (&[2, 3, 4], &[2]),
            (&[2, 3, 4], &[3]),
            (&[2, 3, 4], &[4]),
            (&[1, 2], &[1]),
            (&[1, 2], &[2]),
        ],
    )
}

pub fn fig1_d_c() -> Linearization {
    lin(
        4,
        &[
            (&[1, 2, 3], &[1]),
            (&[1, 2, 3], &[2, 3]),
            (&[2, 3, 4], &[2, 3]),
            (&[2, 3, 4], &[4]),
            (&[1, 2], &[1]),
            (&[1, 2], &[2]),
            (&[2, 3], &[2]),
            (&[2, 3], &[3]),
        ],
    )
}

pub fn fig1_d_d() -> Linearization {
    lin(
        4,
        &[
            (&[1, 2, 3], &[1, 2]),
            (&[1, 2, 3], &[2, 3]),
            (&[2, 3, 4], &[2, 3]),
            (&[2, 3, 4], &[4]),
            (&[1, 2], &[1]),
            (&[1, 2], &[2]),
            (&[2, 3], &[2]),
            (&[2, 3], &[3]),
        ],
    )
}

fn fig1_point(zero_edge: &[u32], one_var: Option<u32>) -> BTreeMap<VarKey, Rational> {
    let g = fig1_hypergraph();
    g.keys()
        .into_iter()
        .map(|k| {
            let v = if k.members() == zero_edge {
                rational::zero()
            } else if one_var.is_some_and(|v| k.members() == [v]) {
                rational::one()
            } else {
                rational::half()
            };
            (k, v)
        })
        .collect()
}

/// `z_{234} = 0`, `x_4 = 1`, everything else `1/2`.
pub fn fig1_z1() -> BTreeMap<VarKey, Rational> {
    fig1_point(&[2, 3, 4], Some(4))
}

/// `z_{123} = 0`, `x_1 = 1`, everything else `1/2`.
pub fn fig1_z2() -> BTreeMap<VarKey, Rational> {
    fig1_point(&[1, 2, 3], Some(1))
}

/// `z_{12} = 0`, everything else `1/2`.
pub fn fig1_z3() -> BTreeMap<VarKey, Rational> {
    fig1_point(&[1, 2], None)
}

/// Variables `u1 = 1`, `u2 = 2`, `v_i = i + 2`; edges `{u1, u2, v_i}` for `i = 1..=k`.
pub fn fig2_hypergraph(k: u32) -> Hypergraph {
    let edges: Vec<Vec<u32>> = (1..=k).map(|i| vec![1, 2, i + 2]).collect();
    Hypergraph::new(k + 2, &edges).expect("valid")
}

/// An objective whose standard-relaxation optimum violates a flower centered
/// at `{u1, u2, v1}` with neighbors `{u1, u2, v2}` and `{v1}`. Edges beyond
/// the third carry coefficient zero.
pub fn fig2_instance(k: u32) -> MultilinearInstance {
    let mut objective: Vec<(Rational, Vec<u32>)> = vec![(rational::one(), vec![2])];
    for i in 1..=k {
        let (z, x) = match i {
            2 => (3, -1),
            1 | 3 => (-3, 2),
            _ => (0, 0),
        };
        objective.push((rational::int(z), vec![1, 2, i + 2]));
        objective.push((rational::int(x), vec![i + 2]));
    }
    MultilinearInstance::from_monomials(k + 2, objective, vec![]).expect("valid")
}

/// `G = ({1,2,3}, {{1,2,3}, {1,2}, {2,3}})`.
pub fn fig3a_hypergraph() -> Hypergraph {
    Hypergraph::new(3, &[vec![1, 2, 3], vec![1, 2], vec![2, 3]]).expect("valid")
}

/// `{1,2,3}` points to both `{1,2}` and `{2,3}`.
pub fn fig3a_linearization() -> Linearization {
    lin(3, &[(&[1, 2, 3], &[1, 2]), (&[1, 2, 3], &[2, 3]), (&[1, 2], &[1]), (&[1, 2], &[2]), (&[2, 3], &[2]), (&[2, 3], &[3])])
}

pub fn fig3b_linearization() -> Linearization {
    lin(
        6,
        &[
            (&[1, 2, 3, 4, 5, 6], &[1, 2]),
            (&[1, 2, 3, 4, 5, 6], &[3, 4]),
            (&[1, 2, 3, 4, 5, 6], &[5, 6]),
            (&[1, 2], &[1]),
            (&[1, 2], &[2]),
            (&[3, 4], &[3]),
            (&[3, 4], &[4]),
            (&[5, 6], &[5]),
            (&[5, 6], &[6]),
            (&[1, 2, 3, 4], &[1, 3]),
            (&[1, 2, 3, 4], &[2, 4]),
            (&[1, 2, 5, 6], &[1, 5]),
            (&[1, 2, 5, 6], &[2, 6]),
            (&[3, 4, 5, 6], &[3, 5]),
            (&[3, 4, 5, 6], &[4, 6]),
            (&[1, 3], &[1]),
            (&[1, 3], &[3]),
            (&[2, 4], &[2]),
            (&[2, 4], &[4]),
            (&[1, 5], &[1]),
            (&[1, 5], &[5]),
            (&[2, 6], &[2]),
            (&[2, 6], &[6]),
            (&[3, 5], &[3]),
            (&[3, 5], &[5]),
            (&[4, 6], &[4]),
            (&[4, 6], &[6]),
        ],
    )
}

/// Center `{1..10}` with neighbors `{1,2,3}`, `{4,5,6,11,12}`, `{7,8,13}`, `{9,10,14,15}`.
pub fn fig4_hypergraph() -> Hypergraph {
    Hypergraph::new(
        15,
        &[(1..=10).collect(), vec![1, 2, 3], vec![4, 5, 6, 11, 12], vec![7, 8, 13], vec![9, 10, 14, 15]],
    )
    .expect("valid")
}

pub fn fig4_flower() -> ExtendedFlower {
    let g = fig4_hypergraph();
    let center = VarKey::from_set(g.edges().iter().find(|e| e.len() == 10).expect("center").clone());
    let neighbors = g.edges().iter().filter(|e| e.len() < 10).cloned().map(VarKey::from_set);
    ExtendedFlower::new(center, neighbors).expect("valid flower")
}
