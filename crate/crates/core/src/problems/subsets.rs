use std::collections::BTreeSet;
use std::ops::ControlFlow;

use itertools::Itertools;

use super::Visit;
use crate::error::{Error, Result};
use crate::game::LossFunction;
use crate::label::{Action, GroundSet, Label};
use crate::scalar::Scalar;

pub(crate) fn is_k_subset(ground: &GroundSet, k: usize, action: &Action) -> bool {
    action.len() == k && action.iter().all(|l| ground.contains(l))
}

pub(crate) fn for_each_subset(
    ground: &GroundSet,
    k: usize,
    allowed: &BTreeSet<Label>,
    visit: &mut Visit<'_>,
) -> Result<ControlFlow<()>> {
    let pool: Vec<Label> = ground.as_set().intersection(allowed).copied().collect();
    for combo in pool.into_iter().combinations(k) {
        if visit(combo.into_iter().collect()).is_break() {
            return Ok(ControlFlow::Break(()));
        }
    }
    Ok(ControlFlow::Continue(()))
}

/// The k smallest awake losses, ties by label.
pub(crate) fn min_subset<S: Scalar>(
    k: usize,
    awake: &BTreeSet<Label>,
    losses: &LossFunction<S>,
) -> Result<Option<(Action, S)>> {
    if awake.len() < k {
        return Ok(None);
    }
    let mut scored = Vec::with_capacity(awake.len());
    for l in awake {
        let v = losses.get(l).cloned().ok_or(Error::MissingLoss(*l))?;
        scored.push((v, *l));
    }
    scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1)));
    let chosen = &scored[..k];
    let total = chosen.iter().map(|(v, _)| v.clone()).sum();
    Ok(Some((chosen.iter().map(|(_, l)| *l).collect(), total)))
}
