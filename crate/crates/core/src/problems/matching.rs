//! Maximal matchings of a bipartite multigraph. "Maximal" means no edge of the
//! full graph can be added, so awake members are maximal with respect to every
//! edge, sleeping or not.

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use super::graph::Graph;
use super::Visit;
use crate::error::Result;
use crate::label::{Action, Label};

pub(crate) fn is_maximal_matching(g: &Graph, action: &Action) -> bool {
    let mut matched = vec![false; g.num_vertices()];
    for l in action.iter() {
        let Some(e) = g.edge(l) else { return false };
        if matched[e.u] || matched[e.v] {
            return false;
        }
        matched[e.u] = true;
        matched[e.v] = true;
    }
    g.edges().iter().all(|e| matched[e.u] || matched[e.v])
}

pub(crate) fn for_each_maximal(g: &Graph, allowed: &BTreeSet<Label>, visit: &mut Visit<'_>) -> Result<ControlFlow<()>> {
    let mut matched = vec![false; g.num_vertices()];
    let mut chosen = Vec::new();
    Ok(extend(g, allowed, 0, &mut matched, &mut chosen, visit))
}

fn extend(
    g: &Graph,
    allowed: &BTreeSet<Label>,
    pos: usize,
    matched: &mut [bool],
    chosen: &mut Vec<Label>,
    visit: &mut Visit<'_>,
) -> ControlFlow<()> {
    if pos == g.edges().len() {
        if g.edges().iter().all(|e| matched[e.u] || matched[e.v]) {
            return visit(chosen.iter().copied().collect());
        }
        return ControlFlow::Continue(());
    }
    let e = &g.edges()[pos];
    if !matched[e.u] && !matched[e.v] && allowed.contains(&e.label) {
        matched[e.u] = true;
        matched[e.v] = true;
        chosen.push(e.label);
        let flow = extend(g, allowed, pos + 1, matched, chosen, visit);
        chosen.pop();
        matched[e.u] = false;
        matched[e.v] = false;
        flow?;
    }
    // Skipping an edge with both ends free needs a later edge to cover it.
    if !matched[e.u] && !matched[e.v] && !coverable_later(g, allowed, pos, e.u, e.v) {
        return ControlFlow::Continue(());
    }
    extend(g, allowed, pos + 1, matched, chosen, visit)
}

fn coverable_later(g: &Graph, allowed: &BTreeSet<Label>, pos: usize, u: usize, v: usize) -> bool {
    g.edges()[pos + 1..]
        .iter()
        .any(|f| allowed.contains(&f.label) && (f.u == u || f.v == u || f.u == v || f.v == v))
}
