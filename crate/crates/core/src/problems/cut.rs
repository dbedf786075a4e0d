//! s-t cuts: any edge set whose removal disconnects `s` from `t`.

use std::collections::{BTreeSet, VecDeque};
use std::ops::ControlFlow;

use super::graph::Graph;
use super::{element_costs, Visit};
use crate::error::{Error, Result};
use crate::game::LossFunction;
use crate::label::{Action, Label};
use crate::scalar::Scalar;

/// Largest number of awake edges whose subsets are enumerated.
pub const CUT_ENUM_EDGE_LIMIT: usize = 24;

pub(crate) fn is_cut(g: &Graph, action: &Action) -> bool {
    let Ok((s, t)) = g.terminals() else { return false };
    if action.iter().any(|l| g.edge(l).is_none()) {
        return false;
    }
    !g.reachable(s, |_, e| !action.contains(&e.label))[t]
}

pub(crate) fn for_each_cut(g: &Graph, allowed: &BTreeSet<Label>, visit: &mut Visit<'_>) -> Result<ControlFlow<()>> {
    let (s, t) = g.terminals()?;
    let pool: Vec<usize> = (0..g.edges().len()).filter(|&i| allowed.contains(&g.edges()[i].label)).collect();
    if pool.len() > CUT_ENUM_EDGE_LIMIT {
        return Err(Error::TooLarge {
            what: format!("cut enumeration over {} edges", pool.len()),
            cap: CUT_ENUM_EDGE_LIMIT,
        });
    }
    let mut removed = vec![false; g.edges().len()];
    for mask in 0u64..(1u64 << pool.len()) {
        for (bit, &i) in pool.iter().enumerate() {
            removed[i] = mask >> bit & 1 == 1;
        }
        if !g.reachable(s, |i, _| !removed[i])[t] {
            let action = pool.iter().filter(|&&i| removed[i]).map(|&i| g.edges()[i].label).collect();
            if visit(action).is_break() {
                return Ok(ControlFlow::Break(()));
            }
        }
    }
    Ok(ControlFlow::Continue(()))
}

struct Arc<S> {
    to: usize,
    cap: S,
    rev: usize,
}

/// Max-flow min-cut with awake capacities equal to losses and sleeping edges
/// uncuttable. Returns `None` when `s` and `t` are joined by sleeping edges.
pub(crate) fn min_cut<S: Scalar>(
    g: &Graph,
    awake: &BTreeSet<Label>,
    losses: &LossFunction<S>,
) -> Result<Option<(Action, S)>> {
    let (s, t) = g.terminals()?;
    let usable: Vec<bool> = g.edges().iter().map(|e| awake.contains(&e.label)).collect();
    let cost = element_costs(g.edges().iter().map(|e| e.label), &usable, losses)?;
    if let Some(i) = (0..cost.len()).find(|&i| cost[i].as_ref().is_some_and(|c| c.is_negative())) {
        return Err(Error::UnsupportedLossRange(format!(
            "min cut needs nonnegative losses, edge {} has {}",
            g.edges()[i].label,
            cost[i].as_ref().unwrap()
        )));
    }
    if g.reachable(s, |i, _| !usable[i])[t] {
        return Ok(None);
    }
    let finite_total: S = cost.iter().flatten().cloned().sum();
    let uncuttable = finite_total + S::one();

    let n = g.num_vertices();
    let mut arcs: Vec<Vec<Arc<S>>> = (0..n).map(|_| Vec::new()).collect();
    for (i, e) in g.edges().iter().enumerate() {
        if e.u == e.v {
            continue;
        }
        let c = cost[i].clone().unwrap_or_else(|| uncuttable.clone());
        let back = if g.directed() { S::zero() } else { c.clone() };
        let (ru, rv) = (arcs[e.v].len(), arcs[e.u].len());
        arcs[e.u].push(Arc { to: e.v, cap: c, rev: ru });
        arcs[e.v].push(Arc { to: e.u, cap: back, rev: rv });
    }

    // Edmonds-Karp. Residuals within tolerance count as saturated.
    let eps = S::tolerance();
    loop {
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            if x == t {
                break;
            }
            for (k, a) in arcs[x].iter().enumerate() {
                if !seen[a.to] && a.cap > eps {
                    seen[a.to] = true;
                    prev[a.to] = Some((x, k));
                    queue.push_back(a.to);
                }
            }
        }
        if !seen[t] {
            break;
        }
        let mut bottleneck: Option<S> = None;
        let mut cur = t;
        while let Some((x, k)) = prev[cur] {
            let c = arcs[x][k].cap.clone();
            if bottleneck.as_ref().is_none_or(|b| c < *b) {
                bottleneck = Some(c);
            }
            cur = x;
        }
        let b = bottleneck.expect("augmenting path has an arc");
        let mut cur = t;
        while let Some((x, k)) = prev[cur] {
            arcs[x][k].cap -= b.clone();
            let (to, rev) = (arcs[x][k].to, arcs[x][k].rev);
            arcs[to][rev].cap += b.clone();
            cur = x;
        }
    }

    let mut side = vec![false; n];
    side[s] = true;
    let mut queue = VecDeque::from([s]);
    while let Some(x) = queue.pop_front() {
        for a in &arcs[x] {
            if !side[a.to] && a.cap > eps {
                side[a.to] = true;
                queue.push_back(a.to);
            }
        }
    }
    let mut labels = BTreeSet::new();
    let mut total = S::zero();
    for (i, e) in g.edges().iter().enumerate() {
        let crosses = if g.directed() { side[e.u] && !side[e.v] } else { side[e.u] != side[e.v] };
        if crosses {
            let Some(c) = &cost[i] else {
                return Err(Error::ConstructionDefect(format!("minimum cut crosses sleeping edge {}", e.label)));
            };
            labels.insert(e.label);
            total += c.clone();
        }
    }
    Ok(Some((Action::new(labels), total)))
}
