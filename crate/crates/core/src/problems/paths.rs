//! Simple s-t paths: membership, enumeration, and min-loss solvers.

use std::collections::{BTreeSet, VecDeque};
use std::ops::ControlFlow;

use super::graph::Graph;
use super::{element_costs, Visit};
use crate::error::{Error, Result};
use crate::label::{Action, Label};
use crate::game::LossFunction;
use crate::scalar::Scalar;

pub(crate) fn is_path(g: &Graph, action: &Action) -> bool {
    let Ok((s, t)) = g.terminals() else { return false };
    let mut idx = Vec::with_capacity(action.len());
    for l in action.iter() {
        match g.edge_index(l) {
            Some(i) => idx.push(i),
            None => return false,
        }
    }
    let set: BTreeSet<usize> = idx.iter().copied().collect();
    let adj = g.adjacency(|i, _| set.contains(&i));
    let mut used = vec![false; g.edges().len()];
    let mut visited = vec![false; g.num_vertices()];
    let mut cur = s;
    let mut steps = 0;
    visited[s] = true;
    loop {
        if cur == t {
            return steps == action.len();
        }
        let next: Vec<_> = adj[cur].iter().filter(|(i, _)| !used[*i]).collect();
        if next.len() != 1 {
            return false;
        }
        let &(i, y) = next[0];
        if visited[y] {
            return false;
        }
        used[i] = true;
        visited[y] = true;
        steps += 1;
        cur = y;
    }
}

pub(crate) fn for_each_path(g: &Graph, allowed: &BTreeSet<Label>, visit: &mut Visit<'_>) -> Result<ControlFlow<()>> {
    let (s, t) = g.terminals()?;
    let adj = g.adjacency(|_, e| allowed.contains(&e.label));
    let mut visited = vec![false; g.num_vertices()];
    let mut stack = Vec::new();
    visited[s] = true;
    Ok(dfs(g, &adj, s, t, &mut visited, &mut stack, visit))
}

fn dfs(
    g: &Graph,
    adj: &[Vec<(usize, usize)>],
    cur: usize,
    t: usize,
    visited: &mut [bool],
    stack: &mut Vec<Label>,
    visit: &mut Visit<'_>,
) -> ControlFlow<()> {
    if cur == t {
        return visit(stack.iter().copied().collect());
    }
    for &(i, y) in &adj[cur] {
        if visited[y] {
            continue;
        }
        visited[y] = true;
        stack.push(g.edges()[i].label);
        let flow = dfs(g, adj, y, t, visited, stack, visit);
        stack.pop();
        visited[y] = false;
        flow?;
    }
    ControlFlow::Continue(())
}

fn topological_order(g: &Graph, usable: &[bool]) -> Option<Vec<usize>> {
    let mut indegree = vec![0usize; g.num_vertices()];
    for (i, e) in g.edges().iter().enumerate() {
        if usable[i] {
            indegree[e.v] += 1;
        }
    }
    let adj = g.adjacency(|i, _| usable[i]);
    let mut queue: VecDeque<usize> = (0..g.num_vertices()).filter(|&v| indegree[v] == 0).collect();
    let mut order = Vec::with_capacity(g.num_vertices());
    while let Some(x) = queue.pop_front() {
        order.push(x);
        for &(_, y) in &adj[x] {
            indegree[y] -= 1;
            if indegree[y] == 0 {
                queue.push_back(y);
            }
        }
    }
    (order.len() == g.num_vertices()).then_some(order)
}

/// DAG relaxation on directed acyclic awake subgraphs (any sign), Dijkstra
/// otherwise (nonnegative losses only).
pub(crate) fn min_path<S: Scalar>(
    g: &Graph,
    awake: &BTreeSet<Label>,
    losses: &LossFunction<S>,
) -> Result<Option<(Action, S)>> {
    let (s, t) = g.terminals()?;
    let usable: Vec<bool> = g.edges().iter().map(|e| awake.contains(&e.label)).collect();
    let cost = element_costs(g.edges().iter().map(|e| e.label), &usable, losses)?;
    let adj = g.adjacency(|i, _| usable[i]);

    let mut dist: Vec<Option<S>> = vec![None; g.num_vertices()];
    let mut pred: Vec<Option<(usize, usize)>> = vec![None; g.num_vertices()];
    dist[s] = Some(S::zero());

    let order = if g.directed() { topological_order(g, &usable) } else { None };
    if let Some(order) = order {
        for x in order {
            let Some(dx) = dist[x].clone() else { continue };
            for &(i, y) in &adj[x] {
                let cand = dx.clone() + cost[i].clone().unwrap();
                if dist[y].as_ref().is_none_or(|dy| cand < *dy) {
                    dist[y] = Some(cand);
                    pred[y] = Some((i, x));
                }
            }
        }
    } else {
        if let Some(neg) = (0..g.edges().len()).find(|&i| usable[i] && cost[i].as_ref().unwrap().is_negative()) {
            return Err(Error::UnsupportedLossRange(format!(
                "negative loss on edge {} in a graph with cycles",
                g.edges()[neg].label
            )));
        }
        let mut settled = vec![false; g.num_vertices()];
        loop {
            let mut best: Option<usize> = None;
            for v in 0..g.num_vertices() {
                if settled[v] {
                    continue;
                }
                if let Some(dv) = &dist[v] {
                    if best.is_none_or(|b| *dv < *dist[b].as_ref().unwrap()) {
                        best = Some(v);
                    }
                }
            }
            let Some(x) = best else { break };
            settled[x] = true;
            if x == t {
                break;
            }
            let dx = dist[x].clone().unwrap();
            for &(i, y) in &adj[x] {
                if settled[y] {
                    continue;
                }
                let cand = dx.clone() + cost[i].clone().unwrap();
                if dist[y].as_ref().is_none_or(|dy| cand < *dy) {
                    dist[y] = Some(cand);
                    pred[y] = Some((i, x));
                }
            }
        }
    }

    let Some(total) = dist[t].clone() else { return Ok(None) };
    let mut labels = BTreeSet::new();
    let mut cur = t;
    while cur != s {
        let (i, x) = pred[cur].expect("predecessor chain reaches source");
        labels.insert(g.edges()[i].label);
        cur = x;
    }
    Ok(Some((Action::new(labels), total)))
}
