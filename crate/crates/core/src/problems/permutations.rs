//! k-truncated permutations: maximal matchings of a complete bipartite graph
//! with `k` left and `m >= k` right nodes, which all have exactly `k` edges.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::ControlFlow;

use super::Visit;
use crate::error::{Error, Result};
use crate::game::LossFunction;
use crate::label::{Action, Label};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermGrid {
    k: usize,
    m: usize,
    labels: Vec<Vec<Label>>,
    position: BTreeMap<Label, (usize, usize)>,
}

impl PermGrid {
    /// `labels[i][j]` labels the edge from left node `i` to right node `j`.
    pub fn new(labels: Vec<Vec<Label>>) -> Result<PermGrid> {
        let k = labels.len();
        let m = labels.first().map_or(0, |r| r.len());
        if labels.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidInput("ragged label grid".into()));
        }
        if k > m {
            return Err(Error::InvalidInput(format!("need k <= m, got k={k}, m={m}")));
        }
        let mut position = BTreeMap::new();
        for (i, row) in labels.iter().enumerate() {
            for (j, l) in row.iter().enumerate() {
                if position.insert(*l, (i, j)).is_some() {
                    return Err(Error::InvalidInput(format!("duplicate label {l}")));
                }
            }
        }
        Ok(PermGrid { k, m, labels, position })
    }

    /// Complete bipartite grid with anonymous labels `a0..a(km-1)`, row-major.
    pub fn anonymous(k: usize, m: usize) -> Result<PermGrid> {
        let mut next = 0u32;
        let labels = (0..k)
            .map(|_| {
                (0..m)
                    .map(|_| {
                        next += 1;
                        Label::Anon(next - 1)
                    })
                    .collect()
            })
            .collect();
        PermGrid::new(labels)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn label(&self, left: usize, right: usize) -> Label {
        self.labels[left][right]
    }

    pub fn position(&self, label: &Label) -> Option<(usize, usize)> {
        self.position.get(label).copied()
    }

    pub fn labels_row_major(&self) -> Vec<Label> {
        self.labels.iter().flatten().copied().collect()
    }

    pub(crate) fn is_member(&self, action: &Action) -> bool {
        if action.len() != self.k {
            return false;
        }
        let mut left = vec![false; self.k];
        let mut right = vec![false; self.m];
        for l in action.iter() {
            let Some((i, j)) = self.position(l) else { return false };
            if left[i] || right[j] {
                return false;
            }
            left[i] = true;
            right[j] = true;
        }
        true
    }

    pub(crate) fn for_each(&self, allowed: &BTreeSet<Label>, visit: &mut Visit<'_>) -> Result<ControlFlow<()>> {
        let mut used = vec![false; self.m];
        let mut chosen = Vec::with_capacity(self.k);
        Ok(self.assign(0, allowed, &mut used, &mut chosen, visit))
    }

    fn assign(
        &self,
        row: usize,
        allowed: &BTreeSet<Label>,
        used: &mut [bool],
        chosen: &mut Vec<Label>,
        visit: &mut Visit<'_>,
    ) -> ControlFlow<()> {
        if row == self.k {
            return visit(chosen.iter().copied().collect());
        }
        for j in 0..self.m {
            let l = self.labels[row][j];
            if used[j] || !allowed.contains(&l) {
                continue;
            }
            used[j] = true;
            chosen.push(l);
            let flow = self.assign(row + 1, allowed, used, chosen, visit);
            chosen.pop();
            used[j] = false;
            flow?;
        }
        ControlFlow::Continue(())
    }

    /// Min-cost assignment over awake edges. Costs are shifted to be
    /// nonnegative (every member has exactly `k` edges, so the shift changes
    /// all totals equally) and sleeping edges get a cost no awake assignment
    /// can reach.
    pub(crate) fn min_assignment<S: Scalar>(
        &self,
        awake: &BTreeSet<Label>,
        losses: &LossFunction<S>,
    ) -> Result<Option<(Action, S)>> {
        if self.k == 0 {
            return Ok(Some((Action::empty(), S::zero())));
        }
        let mut raw: Vec<Vec<Option<S>>> = vec![vec![None; self.m]; self.k];
        let mut floor: Option<S> = None;
        #[allow(clippy::needless_range_loop)]
        for i in 0..self.k {
            for j in 0..self.m {
                let l = self.labels[i][j];
                if awake.contains(&l) {
                    let v = losses.get(&l).cloned().ok_or(Error::MissingLoss(l))?;
                    if floor.as_ref().is_none_or(|f| v < *f) {
                        floor = Some(v.clone());
                    }
                    raw[i][j] = Some(v);
                }
            }
        }
        let Some(floor) = floor else { return Ok(None) };
        let mut ceiling = S::zero();
        for v in raw.iter().flatten().flatten() {
            let shifted = v.clone() - floor.clone();
            if shifted > ceiling {
                ceiling = shifted;
            }
        }
        let blocked = S::from_usize_lossy(self.k) * (ceiling + S::one()) + S::one();
        let cost: Vec<Vec<S>> = raw
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| match c {
                        Some(v) => v.clone() - floor.clone(),
                        None => blocked.clone(),
                    })
                    .collect()
            })
            .collect();
        let assignment = hungarian(&cost);
        let mut labels = BTreeSet::new();
        let mut total = S::zero();
        for (i, &j) in assignment.iter().enumerate() {
            let Some(v) = &raw[i][j] else { return Ok(None) };
            labels.insert(self.labels[i][j]);
            total += v.clone();
        }
        Ok(Some((Action::new(labels), total)))
    }
}

/// Rectangular Hungarian method with potentials (rows <= columns).
/// Returns the column assigned to each row.
pub(crate) fn hungarian<S: Scalar>(cost: &[Vec<S>]) -> Vec<usize> {
    let n = cost.len();
    let m = cost.first().map_or(0, |r| r.len());
    assert!(n <= m, "hungarian needs rows <= columns");
    let mut u = vec![S::zero(); n + 1];
    let mut v = vec![S::zero(); m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        let mut minv: Vec<Option<S>> = vec![None; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta: Option<S> = None;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1].clone() - u[i0].clone() - v[j].clone();
                if minv[j].as_ref().is_none_or(|mv| cur < *mv) {
                    minv[j] = Some(cur);
                    way[j] = j0;
                }
                let mj = minv[j].as_ref().unwrap();
                if delta.as_ref().is_none_or(|d| *mj < *d) {
                    delta = Some(mj.clone());
                    j1 = j;
                }
            }
            let delta = delta.expect("free column exists while rows <= columns");
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta.clone();
                    v[j] -= delta.clone();
                } else if let Some(mv) = minv[j].as_mut() {
                    *mv -= delta.clone();
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; n];
    for j in 1..=m {
        if owner[j] != 0 {
            assignment[owner[j] - 1] = j - 1;
        }
    }
    assignment
}
