use std::collections::BTreeSet;

use super::{fixtures, guard, point_entries, CheckReport, Counterexample, VerifyError};
use crate::linearization::{mccormick_from_flower, standard_linearization, Linearization};
use crate::model::{Hypergraph, VarKey, VarSet};
use crate::poly::{fm_eliminate, first_unimplied, is_member, is_valid, remove_redundant, IneqSystem, LinIneq};
use crate::relax::{enumerate_flowers, flower_relaxation};

fn graph_cex(g: &Hypergraph, description: String, inequality: Option<LinIneq>) -> Counterexample {
    Counterexample {
        num_vars: Some(g.num_vars()),
        edges: Some(g.to_raw()),
        inequality,
        ..Counterexample::new(description)
    }
}

/// Records the first row of either side that the other side does not imply.
fn compare(
    report: &mut CheckReport,
    g: &Hypergraph,
    (a_name, a): (&str, &IneqSystem),
    (b_name, b): (&str, &IneqSystem),
) -> Result<(), VerifyError> {
    for ((from, x), (to, y)) in [((a_name, a), (b_name, b)), ((b_name, b), (a_name, a))] {
        if let Some(row) = first_unimplied(x, y)? {
            report.fail(graph_cex(g, format!("row of {from} not implied by {to}: {row}"), Some(row)));
            return Ok(());
        }
    }
    Ok(())
}

/// Eliminating `z_{i_star}` from the flower relaxation of `g` yields the flower
/// relaxation of `g` without that edge.
pub fn check_projection_lemma(g: &Hypergraph, i_star: &VarSet) -> Result<CheckReport, VerifyError> {
    guard("variables", g.num_vars() as usize, 5)?;
    guard("edges", g.edges().len(), 5)?;
    if !g.has_edge(i_star) {
        return Err(VerifyError::NotAnEdge(i_star.clone()));
    }
    let mut report = CheckReport::new(format!("projection lemma, eliminating {i_star}"));
    let fr = flower_relaxation(g, None);
    let projected = fm_eliminate(&fr, &VarKey::from_set(i_star.clone()), true)?;
    let target = flower_relaxation(&g.without_edge(i_star), None);
    report.count("rows_flower_relaxation", fr.len() as u64);
    report.count("rows_projected", projected.len() as u64);
    report.count("rows_target", target.len() as u64);
    compare(&mut report, g, ("the projection", &projected), ("FR without the edge", &target))?;
    Ok(report)
}

/// `z_I ≤ z_J` is LP-valid for the relaxation exactly when a path `I → J`
/// exists; every non-path pair's witness is a violating member.
pub fn check_path_lemma(d: &Linearization) -> Result<CheckReport, VerifyError> {
    guard("nodes", d.num_nodes(), 12)?;
    let mut report = CheckReport::new("path lemma");
    let sys = d.relaxation_system();
    let nodes: Vec<&VarSet> = d.nodes().collect();
    for &i in &nodes {
        for &j in &nodes {
            if i == j {
                continue;
            }
            let row = LinIneq::geq_var(VarKey::from_set(j.clone()), VarKey::from_set(i.clone()));
            let valid = is_valid(&sys, &row)?;
            let path = d.has_path(i, j)?;
            report.count("pairs", 1);
            report.count("lp_calls", 1);
            if valid != path {
                let what = if path { "path exists but the row is not valid" } else { "row is valid without a path" };
                report.fail(Counterexample { inequality: Some(row), ..Counterexample::new(format!("{i} -> {j}: {what}")) });
                continue;
            }
            if !path {
                let w = d.nonpath_witness(i, j)?;
                let inside = is_member(&sys, &w)?.is_inside();
                let violated = row.violation_at(&w).is_some_and(|v| v > crate::rational::zero());
                report.count("witnesses", 1);
                if !inside || !violated {
                    report.fail(Counterexample {
                        point: Some(point_entries(&w)),
                        inequality: Some(row),
                        ..Counterexample::new(format!(
                            "witness for {i} -> {j} is {}",
                            if inside { "not violating" } else { "outside the relaxation" }
                        ))
                    });
                }
            }
        }
    }
    Ok(report)
}

/// The flower relaxation equals the intersection of the projected relaxations
/// of the standard linearization, one constructed McCormick linearization per
/// non-redundant flower, and `extra`. Each extra must also contain FR.
pub fn check_theorem(g: &Hypergraph, extra: &[Linearization]) -> Result<CheckReport, VerifyError> {
    guard("variables", g.num_vars() as usize, 6)?;
    guard("edges", g.edges().len(), 4)?;
    for (index, d) in extra.iter().enumerate() {
        let class = d.classify(g);
        if !class.of_g {
            let reason = format!("{} nodes, roots {:?}", d.num_nodes(), d.roots().iter().map(ToString::to_string).collect::<Vec<_>>());
            return Err(VerifyError::InvalidExtraLinearization { index, reason });
        }
    }
    let mut report = CheckReport::new("theorem: flower relaxation equals the intersection of projected relaxations");
    let fr = flower_relaxation(g, None);
    let mut family: Vec<Linearization> = vec![standard_linearization(g)];
    for (f, _) in enumerate_flowers(g, None) {
        let d = mccormick_from_flower(g, &f)?;
        if !family.contains(&d) {
            family.push(d);
        }
    }
    let constructed = family.len();
    let mut q = IneqSystem::boxed(g.keys());
    let mut aux: BTreeSet<VarSet> = BTreeSet::new();
    for (index, d) in family.iter().chain(extra).enumerate() {
        aux.extend(d.nodes().filter(|n| n.len() >= 2 && !g.has_edge(n)).cloned());
        let p = d.project_onto_edges(g)?;
        if index >= constructed {
            if let Some(row) = first_unimplied(&p, &fr)? {
                report.fail(graph_cex(
                    g,
                    format!("row of the projected relaxation of extra linearization #{} not implied by FR: {row}", index - constructed),
                    Some(row),
                ));
            }
        }
        for row in p.ineqs() {
            q.push_unique(row.clone())?;
        }
    }
    let q = remove_redundant(&q)?;
    report.count("linearizations_constructed", constructed as u64);
    report.count("linearizations_extra", extra.len() as u64);
    report.count("rows_flower_relaxation", fr.len() as u64);
    report.count("rows_intersection", q.len() as u64);
    report.count("auxiliary_nodes", aux.len() as u64);
    if !aux.is_empty() {
        report.notes.push(format!(
            "auxiliary nodes: {}",
            aux.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
        ));
    }
    compare(&mut report, g, ("FR", &fr), ("the intersection", &q))?;
    Ok(report)
}

/// Every way to split `set` into at least two blocks drawn from `allowed`.
fn partitions_into(set: &VarSet, allowed: &BTreeSet<VarSet>) -> Vec<Vec<VarSet>> {
    fn go(rest: &[u32], blocks: &mut Vec<Vec<u32>>, out: &mut Vec<Vec<Vec<u32>>>) {
        let Some((&v, tail)) = rest.split_first() else {
            out.push(blocks.clone());
            return;
        };
        for i in 0..blocks.len() {
            blocks[i].push(v);
            go(tail, blocks, out);
            blocks[i].pop();
        }
        blocks.push(vec![v]);
        go(tail, blocks, out);
        blocks.pop();
    }
    let mut raw = Vec::new();
    go(set.members(), &mut Vec::new(), &mut raw);
    raw.into_iter()
        .filter(|p| p.len() >= 2)
        .map(|p| p.into_iter().map(|b| VarSet::new(b).expect("non-empty block")).collect::<Vec<_>>())
        .filter(|p| p.iter().all(|b| allowed.contains(b)))
        .collect()
}

/// All partitioning recursive linearizations of `g` whose nodes are subsets
/// of the ground set (at most 4 variables).
pub fn enumerate_partitioning_linearizations(g: &Hypergraph) -> Result<Vec<Linearization>, VerifyError> {
    guard("variables", g.num_vars() as usize, 4)?;
    let n = g.num_vars();
    let optional: Vec<VarSet> = (1u32..1 << n)
        .filter(|m| m.count_ones() >= 2)
        .map(|m| VarSet::new((0..n).filter(|b| m & (1 << b) != 0).map(|b| b + 1)).expect("non-empty"))
        .filter(|s| !g.has_edge(s))
        .collect();
    let mut out = Vec::new();
    for pick in 0u32..1 << optional.len() {
        let mut nodes: BTreeSet<VarSet> = g.edges().iter().cloned().collect();
        nodes.extend(optional.iter().enumerate().filter(|(i, _)| pick & (1 << i) != 0).map(|(_, s)| s.clone()));
        let allowed: BTreeSet<VarSet> = nodes.iter().cloned().chain((1..=n).map(VarSet::singleton)).collect();
        let choices: Vec<(VarSet, Vec<Vec<VarSet>>)> =
            nodes.iter().map(|node| (node.clone(), partitions_into(node, &allowed))).collect();
        if choices.iter().any(|(_, c)| c.is_empty()) {
            continue;
        }
        let mut index = vec![0usize; choices.len()];
        loop {
            let arcs = choices
                .iter()
                .zip(&index)
                .flat_map(|((node, c), &i)| c[i].iter().map(move |b| (node.clone(), b.clone())));
            let d = Linearization::new(n, nodes.iter().cloned(), arcs)?;
            let class = d.classify(g);
            if class.of_g && class.partitioning {
                out.push(d);
            }
            let mut pos = 0;
            while pos < index.len() {
                index[pos] += 1;
                if index[pos] < choices[pos].1.len() {
                    break;
                }
                index[pos] = 0;
                pos += 1;
            }
            if pos == index.len() {
                break;
            }
        }
    }
    Ok(out)
}

/// (a) No partitioning linearization of `({1,2,3}, {123, 12, 23})` has a
/// projected relaxation inside that of the non-partitioning one, by
/// exhaustive search. (b) The path facts used against binary linearizations
/// of the six-variable digraph hold by LP.
pub fn check_fig3_propositions() -> Result<CheckReport, VerifyError> {
    let mut report = CheckReport::new("restriction propositions");
    let g = fixtures::fig3a_hypergraph();
    let target = fixtures::fig3a_linearization().relaxation_system();
    for d in enumerate_partitioning_linearizations(&g)? {
        report.count("part_a_linearizations", 1);
        let p = d.project_onto_edges(&g)?;
        if first_unimplied(&target, &p)?.is_none() {
            let arcs: Vec<String> = d.arcs().map(|(a, b)| format!("{a}->{b}")).collect();
            report.fail(graph_cex(
                &g,
                format!("partitioning linearization dominates the non-partitioning one: {}", arcs.join(" ")),
                None,
            ));
        }
    }
    let d = fixtures::fig3b_linearization();
    let sys = d.relaxation_system();
    let s = |v: &[u32]| VarSet::new(v.iter().copied()).expect("non-empty");
    let facts = [
        (s(&[1, 2, 3, 4]), s(&[1, 3])),
        (s(&[1, 2, 3, 4]), s(&[2, 4])),
        (s(&[1, 2, 3, 4, 5, 6]), s(&[1, 2])),
        (s(&[1, 2, 3, 4, 5, 6]), s(&[3, 4])),
        (s(&[1, 2, 3, 4, 5, 6]), s(&[5, 6])),
    ];
    for (i, j) in facts {
        report.count("part_b_facts", 1);
        let row = LinIneq::geq_var(VarKey::from_set(j.clone()), VarKey::from_set(i.clone()));
        if !is_valid(&sys, &row)? {
            report.fail(Counterexample { inequality: Some(row), ..Counterexample::new(format!("z_{i} <= z_{j} is not valid")) });
        }
    }
    report.notes.push(
        "part (b) checks only the validity facts of the argument; linearizations of the six-variable instance are not enumerated"
            .into(),
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::fixtures::*;

    #[test]
    fn partitions_of_three() {
        let all: BTreeSet<VarSet> = (1u32..8)
            .map(|m| VarSet::new((0..3).filter(|b| m & (1 << b) != 0).map(|b| b + 1)).unwrap())
            .collect();
        assert_eq!(partitions_into(&VarSet::new([1, 2, 3]).unwrap(), &all).len(), 4);
    }

    #[test]
    fn fig3a_enumeration_size() {
        assert_eq!(enumerate_partitioning_linearizations(&fig3a_hypergraph()).unwrap().len(), 4);
    }

    #[test]
    fn small_checks_hold() {
        let g = Hypergraph::new(2, &[vec![1, 2]]).unwrap();
        assert!(check_projection_lemma(&g, &VarSet::new([1, 2]).unwrap()).unwrap().holds);
        assert!(check_theorem(&g, &[]).unwrap().holds);
        assert!(check_path_lemma(&fig1_d_c()).unwrap().holds);
        assert!(check_path_lemma(&fig1_d_b()).unwrap().holds);
        assert!(matches!(
            check_projection_lemma(&g, &VarSet::new([1]).unwrap()),
            Err(VerifyError::NotAnEdge(_))
        ));
    }
}
