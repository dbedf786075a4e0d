//! The six problem families and their decision-set oracles.

mod cut;
pub mod graph;
mod matching;
mod paths;
pub mod random;
pub mod permutations;
mod spanning;
mod subsets;

use std::collections::BTreeSet;
use std::fmt;
use std::ops::ControlFlow;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use cut::CUT_ENUM_EDGE_LIMIT;
pub use graph::{Edge, Graph};
pub use permutations::PermGrid;

use crate::error::{Error, Result};
use crate::game::LossFunction;
use crate::label::{Action, GroundSet, Label, SleepingSet};
use crate::scalar::Scalar;

pub const DEFAULT_ENUM_CAP: usize = 100_000;

/// Callback for streaming enumeration; `Break` stops early.
pub type Visit<'a> = dyn FnMut(Action) -> ControlFlow<()> + 'a;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FamilyKind {
    ShortestPath,
    SpanningTree,
    KSubsets,
    TruncatedPerm,
    BipartiteMatching,
    MinCut,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 6] = [
        FamilyKind::ShortestPath,
        FamilyKind::SpanningTree,
        FamilyKind::KSubsets,
        FamilyKind::TruncatedPerm,
        FamilyKind::BipartiteMatching,
        FamilyKind::MinCut,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::ShortestPath => "shortest-path",
            FamilyKind::SpanningTree => "spanning-tree",
            FamilyKind::KSubsets => "k-subsets",
            FamilyKind::TruncatedPerm => "truncated-perm",
            FamilyKind::BipartiteMatching => "bipartite-matching",
            FamilyKind::MinCut => "min-cut",
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<FamilyKind> {
        FamilyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown family {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    ShortestPath(Graph),
    SpanningTree(Graph),
    KSubsets { k: usize },
    TruncatedPerm(PermGrid),
    BipartiteMatching(Graph),
    MinCut(Graph),
}

/// A ground set plus the decision set of one family over it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemInstance {
    family: Family,
    ground: GroundSet,
    enum_cap: usize,
}

impl ProblemInstance {
    fn from_family(family: Family, labels: Vec<Label>) -> Result<ProblemInstance> {
        Ok(ProblemInstance { family, ground: GroundSet::new(labels)?, enum_cap: DEFAULT_ENUM_CAP })
    }

    /// Simple `s`-`t` paths. Requires `t` reachable from `s`.
    pub fn shortest_path(graph: Graph) -> Result<ProblemInstance> {
        let (s, t) = graph.terminals()?;
        if !graph.reachable(s, |_, _| true)[t] {
            return Err(Error::InvalidInput("sink unreachable from source: no paths".into()));
        }
        let labels = graph.labels();
        ProblemInstance::from_family(Family::ShortestPath(graph), labels)
    }

    /// Spanning trees of a connected undirected graph.
    pub fn spanning_tree(graph: Graph) -> Result<ProblemInstance> {
        if graph.directed() {
            return Err(Error::InvalidInput("spanning trees need an undirected graph".into()));
        }
        if graph.num_vertices() == 0 || !graph.is_connected() {
            return Err(Error::InvalidInput("graph is not connected: no spanning trees".into()));
        }
        let labels = graph.labels();
        ProblemInstance::from_family(Family::SpanningTree(graph), labels)
    }

    pub fn k_subsets(k: usize, labels: Vec<Label>) -> Result<ProblemInstance> {
        if k > labels.len() {
            return Err(Error::InvalidInput(format!("k={k} exceeds d={}", labels.len())));
        }
        ProblemInstance::from_family(Family::KSubsets { k }, labels)
    }

    pub fn truncated_perm(grid: PermGrid) -> Result<ProblemInstance> {
        let labels = grid.labels_row_major();
        ProblemInstance::from_family(Family::TruncatedPerm(grid), labels)
    }

    /// Maximal matchings of an undirected bipartite graph.
    pub fn bipartite_matching(graph: Graph) -> Result<ProblemInstance> {
        if graph.directed() {
            return Err(Error::InvalidInput("matchings need an undirected graph".into()));
        }
        if graph.bipartition().is_none() {
            return Err(Error::InvalidInput("graph is not bipartite".into()));
        }
        let labels = graph.labels();
        ProblemInstance::from_family(Family::BipartiteMatching(graph), labels)
    }

    /// Edge sets whose removal disconnects `s` from `t`.
    pub fn min_cut(graph: Graph) -> Result<ProblemInstance> {
        graph.terminals()?;
        let labels = graph.labels();
        ProblemInstance::from_family(Family::MinCut(graph), labels)
    }

    /// Builds a graph-based family from a parsed graph.
    pub fn from_graph(kind: FamilyKind, graph: Graph) -> Result<ProblemInstance> {
        match kind {
            FamilyKind::ShortestPath => ProblemInstance::shortest_path(graph),
            FamilyKind::SpanningTree => ProblemInstance::spanning_tree(graph),
            FamilyKind::BipartiteMatching => ProblemInstance::bipartite_matching(graph),
            FamilyKind::MinCut => ProblemInstance::min_cut(graph),
            other => Err(Error::InvalidInput(format!("{other} is not a graph family"))),
        }
    }

    pub fn with_enum_cap(mut self, cap: usize) -> ProblemInstance {
        self.enum_cap = cap;
        self
    }

    pub fn enum_cap(&self) -> usize {
        self.enum_cap
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn kind(&self) -> FamilyKind {
        match self.family {
            Family::ShortestPath(_) => FamilyKind::ShortestPath,
            Family::SpanningTree(_) => FamilyKind::SpanningTree,
            Family::KSubsets { .. } => FamilyKind::KSubsets,
            Family::TruncatedPerm(_) => FamilyKind::TruncatedPerm,
            Family::BipartiteMatching(_) => FamilyKind::BipartiteMatching,
            Family::MinCut(_) => FamilyKind::MinCut,
        }
    }

    pub fn graph(&self) -> Option<&Graph> {
        match &self.family {
            Family::ShortestPath(g) | Family::SpanningTree(g) | Family::BipartiteMatching(g) | Family::MinCut(g) => {
                Some(g)
            }
            _ => None,
        }
    }

    pub fn ground_set(&self) -> &GroundSet {
        &self.ground
    }

    /// Upper bound on the number of elements in any action.
    pub fn max_action_size(&self) -> usize {
        match &self.family {
            Family::ShortestPath(g) | Family::SpanningTree(g) => g.num_vertices().saturating_sub(1),
            Family::KSubsets { k } => *k,
            Family::TruncatedPerm(grid) => grid.k(),
            Family::BipartiteMatching(g) => g.num_vertices() / 2,
            Family::MinCut(g) => g.edges().len(),
        }
    }

    pub fn contains(&self, action: &Action) -> bool {
        if !action.is_subset_of(self.ground.as_set()) {
            return false;
        }
        match &self.family {
            Family::ShortestPath(g) => paths::is_path(g, action),
            Family::SpanningTree(g) => spanning::is_spanning_tree(g, action),
            Family::KSubsets { k } => subsets::is_k_subset(&self.ground, *k, action),
            Family::TruncatedPerm(grid) => grid.is_member(action),
            Family::BipartiteMatching(g) => matching::is_maximal_matching(g, action),
            Family::MinCut(g) => cut::is_cut(g, action),
        }
    }

    /// Streams every member using only elements of `allowed`, in an
    /// unspecified but deterministic order.
    pub fn for_each_within(&self, allowed: &BTreeSet<Label>, visit: &mut Visit<'_>) -> Result<ControlFlow<()>> {
        match &self.family {
            Family::ShortestPath(g) => paths::for_each_path(g, allowed, visit),
            Family::SpanningTree(g) => spanning::for_each_tree(g, allowed, visit),
            Family::KSubsets { k } => subsets::for_each_subset(&self.ground, *k, allowed, visit),
            Family::TruncatedPerm(grid) => grid.for_each(allowed, visit),
            Family::BipartiteMatching(g) => matching::for_each_maximal(g, allowed, visit),
            Family::MinCut(g) => cut::for_each_cut(g, allowed, visit),
        }
    }

    /// Members using only `allowed` elements, sorted, or `TooLarge` past the cap.
    pub fn enumerate_within(&self, allowed: &BTreeSet<Label>) -> Result<Vec<Action>> {
        let cap = self.enum_cap;
        let mut out = Vec::new();
        let mut overflow = false;
        let _ = self.for_each_within(allowed, &mut |a| {
            if out.len() == cap {
                overflow = true;
                return ControlFlow::Break(());
            }
            out.push(a);
            ControlFlow::Continue(())
        })?;
        if overflow {
            return Err(Error::TooLarge { what: format!("{} decision set", self.kind()), cap });
        }
        out.sort();
        Ok(out)
    }

    pub fn enumerate(&self) -> Result<Vec<Action>> {
        self.enumerate_within(self.ground.as_set())
    }

    /// Awake members (disjoint from `sleeping`), sorted.
    pub fn awake_actions(&self, sleeping: &SleepingSet) -> Result<Vec<Action>> {
        self.enumerate_within(&self.ground.awake(sleeping))
    }

    /// Counts members up to `budget`; `None` if the budget is exceeded.
    pub fn count_up_to(&self, budget: usize) -> Result<Option<usize>> {
        let mut n = 0usize;
        let flow = self.for_each_within(self.ground.as_set(), &mut |_| {
            if n == budget {
                return ControlFlow::Break(());
            }
            n += 1;
            ControlFlow::Continue(())
        })?;
        Ok(flow.is_continue().then_some(n))
    }

    /// A minimum-loss awake action and its loss, or `None` if nothing is awake.
    ///
    /// Shortest paths accept negative losses only on directed acyclic graphs;
    /// minimum cuts need nonnegative losses.
    pub fn min_loss_awake<S: Scalar>(
        &self,
        sleeping: &SleepingSet,
        losses: &LossFunction<S>,
    ) -> Result<Option<(Action, S)>> {
        let awake = self.ground.awake(sleeping);
        match &self.family {
            Family::ShortestPath(g) => paths::min_path(g, &awake, losses),
            Family::SpanningTree(g) => spanning::min_tree(g, &awake, losses),
            Family::KSubsets { k } => subsets::min_subset(*k, &awake, losses),
            Family::TruncatedPerm(grid) => grid.min_assignment(&awake, losses),
            Family::BipartiteMatching(_) => min_by_enumeration(self, sleeping, losses),
            Family::MinCut(g) => cut::min_cut(g, &awake, losses),
        }
    }

    pub fn has_awake(&self, sleeping: &SleepingSet) -> Result<bool> {
        let awake = self.ground.awake(sleeping);
        match &self.family {
            Family::BipartiteMatching(_) => {
                let flow = self.for_each_within(&awake, &mut |_| ControlFlow::Break(()))?;
                Ok(flow.is_break())
            }
            Family::MinCut(g) => {
                let (s, t) = g.terminals()?;
                Ok(!g.reachable(s, |_, e| !awake.contains(&e.label))[t])
            }
            _ => {
                let zero = LossFunction::<f64>::constant(awake.iter().copied(), 0.0);
                Ok(self.min_loss_awake(sleeping, &zero)?.is_some())
            }
        }
    }
}

/// Exhaustive minimum over awake members; ties go to the smallest action.
pub fn min_by_enumeration<S: Scalar>(
    instance: &ProblemInstance,
    sleeping: &SleepingSet,
    losses: &LossFunction<S>,
) -> Result<Option<(Action, S)>> {
    let mut best: Option<(Action, S)> = None;
    for a in instance.awake_actions(sleeping)? {
        let v = losses.action_loss(&a)?;
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some((a, v));
        }
    }
    Ok(best)
}

/// Per-edge costs for usable edges, `MissingLoss` if one has no value.
pub(crate) fn element_costs<S: Scalar>(
    labels: impl Iterator<Item = Label>,
    usable: &[bool],
    losses: &LossFunction<S>,
) -> Result<Vec<Option<S>>> {
    labels
        .zip(usable)
        .map(|(l, &u)| {
            if !u {
                return Ok(None);
            }
            losses.get(&l).cloned().map(Some).ok_or(Error::MissingLoss(l))
        })
        .collect()
}

#[cfg(test)]
mod tests;
