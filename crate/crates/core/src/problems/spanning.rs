//! Spanning trees: membership, backtracking enumeration, Kruskal.

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use super::graph::{DisjointSets, Graph};
use super::{element_costs, Visit};
use crate::error::Result;
use crate::game::LossFunction;
use crate::label::{Action, Label};
use crate::scalar::Scalar;

pub(crate) fn is_spanning_tree(g: &Graph, action: &Action) -> bool {
    if action.len() + 1 != g.num_vertices() {
        return false;
    }
    let mut dsu = DisjointSets::new(g.num_vertices());
    action.iter().all(|l| match g.edge(l) {
        Some(e) => dsu.union(e.u, e.v),
        None => false,
    })
}

pub(crate) fn for_each_tree(g: &Graph, allowed: &BTreeSet<Label>, visit: &mut Visit<'_>) -> Result<ControlFlow<()>> {
    let candidates: Vec<usize> = (0..g.edges().len())
        .filter(|&i| {
            let e = &g.edges()[i];
            e.u != e.v && allowed.contains(&e.label)
        })
        .collect();
    let needed = g.num_vertices().saturating_sub(1);
    let mut chosen = Vec::with_capacity(needed);
    Ok(grow(g, &candidates, 0, DisjointSets::new(g.num_vertices()), needed, &mut chosen, visit))
}

fn grow(
    g: &Graph,
    candidates: &[usize],
    pos: usize,
    dsu: DisjointSets,
    needed: usize,
    chosen: &mut Vec<Label>,
    visit: &mut Visit<'_>,
) -> ControlFlow<()> {
    if chosen.len() == needed {
        return visit(chosen.iter().copied().collect());
    }
    if candidates.len() - pos < needed - chosen.len() {
        return ControlFlow::Continue(());
    }
    let e = &g.edges()[candidates[pos]];
    let mut with = dsu.clone();
    if with.union(e.u, e.v) {
        chosen.push(e.label);
        let flow = grow(g, candidates, pos + 1, with, needed, chosen, visit);
        chosen.pop();
        flow?;
    }
    grow(g, candidates, pos + 1, dsu, needed, chosen, visit)
}

pub(crate) fn min_tree<S: Scalar>(
    g: &Graph,
    awake: &BTreeSet<Label>,
    losses: &LossFunction<S>,
) -> Result<Option<(Action, S)>> {
    let usable: Vec<bool> = g.edges().iter().map(|e| awake.contains(&e.label)).collect();
    let cost = element_costs(g.edges().iter().map(|e| e.label), &usable, losses)?;
    let mut order: Vec<usize> = (0..g.edges().len()).filter(|&i| usable[i]).collect();
    order.sort_by(|&a, &b| {
        cost[a]
            .partial_cmp(&cost[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(g.edges()[a].label.cmp(&g.edges()[b].label))
    });
    let mut dsu = DisjointSets::new(g.num_vertices());
    let mut labels = BTreeSet::new();
    let mut total = S::zero();
    for i in order {
        let e = &g.edges()[i];
        if dsu.union(e.u, e.v) {
            labels.insert(e.label);
            total += cost[i].clone().unwrap();
        }
    }
    if labels.len() + 1 != g.num_vertices() {
        return Ok(None);
    }
    Ok(Some((Action::new(labels), total)))
}
