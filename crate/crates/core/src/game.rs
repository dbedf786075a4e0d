//! Game protocol, loss accounting, per-action and ranking regret.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::{Action, Label, SleepingSet};
use crate::problems::ProblemInstance;
use crate::scalar::Scalar;

/// Largest decision set searched by [`best_ranking_bruteforce`].
pub const RANKING_SEARCH_CAP: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LossRange {
    /// Element losses in `[-1, 1]`.
    Signed,
    /// Element losses in `[0, 1]`.
    Unit,
}

impl LossRange {
    pub fn admits<S: Scalar>(self, x: &S) -> bool {
        let lo = match self {
            LossRange::Signed => -S::one(),
            LossRange::Unit => S::zero(),
        };
        *x >= lo && *x <= S::one()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LossFunction<S> {
    values: BTreeMap<Label, S>,
    range: LossRange,
}

impl<S: Scalar> LossFunction<S> {
    pub fn new(range: LossRange) -> Self {
        LossFunction { values: BTreeMap::new(), range }
    }

    pub fn from_pairs(range: LossRange, pairs: impl IntoIterator<Item = (Label, S)>) -> Self {
        LossFunction { values: pairs.into_iter().collect(), range }
    }

    pub fn constant(labels: impl IntoIterator<Item = Label>, value: S) -> Self {
        let range = if value.is_negative() { LossRange::Signed } else { LossRange::Unit };
        LossFunction { values: labels.into_iter().map(|l| (l, value.clone())).collect(), range }
    }

    pub fn set(&mut self, label: Label, value: S) {
        self.values.insert(label, value);
    }

    pub fn get(&self, label: &Label) -> Option<&S> {
        self.values.get(label)
    }

    pub fn range(&self) -> LossRange {
        self.range
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Label, &S)> {
        self.values.iter()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn action_loss(&self, action: &Action) -> Result<S> {
        action_loss(action, self)
    }

    /// Values on `keep` only.
    pub fn restricted(&self, keep: &BTreeSet<Label>) -> Self {
        LossFunction {
            values: self.values.iter().filter(|(l, _)| keep.contains(l)).map(|(l, v)| (*l, v.clone())).collect(),
            range: self.range,
        }
    }

    /// First value outside the declared range, if any.
    pub fn out_of_range(&self) -> Option<(Label, S)> {
        self.values.iter().find(|(_, v)| !self.range.admits(*v)).map(|(l, v)| (*l, v.clone()))
    }
}

/// Sum of element losses; `MissingLoss` means a sleeping element was charged.
pub fn action_loss<S: Scalar>(action: &Action, losses: &LossFunction<S>) -> Result<S> {
    let mut total = S::zero();
    for l in action.iter() {
        total += losses.get(l).cloned().ok_or(Error::MissingLoss(*l))?;
    }
    Ok(total)
}

/// Awake members of the decision set.
pub fn awake_set(instance: &ProblemInstance, sleeping: &SleepingSet) -> Result<Vec<Action>> {
    instance.awake_actions(sleeping)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Played(Action),
    Skipped,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundRecord<S> {
    pub sleeping: SleepingSet,
    pub outcome: Outcome,
    /// Losses of the awake elements of this round.
    pub losses: LossFunction<S>,
}

impl<S: Scalar> RoundRecord<S> {
    pub fn played(&self) -> Option<&Action> {
        match &self.outcome {
            Outcome::Played(a) => Some(a),
            Outcome::Skipped => None,
        }
    }

    pub fn algo_loss(&self) -> Result<S> {
        match &self.outcome {
            Outcome::Played(a) => self.losses.action_loss(a),
            Outcome::Skipped => Ok(S::zero()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GameHistory<S> {
    rounds: Vec<RoundRecord<S>>,
}

impl<S: Scalar> Default for GameHistory<S> {
    fn default() -> Self {
        GameHistory { rounds: Vec::new() }
    }
}

impl<S: Scalar> GameHistory<S> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, record: RoundRecord<S>) {
        self.rounds.push(record);
    }

    pub fn rounds(&self) -> &[RoundRecord<S>] {
        &self.rounds
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn total_algo_loss(&self) -> Result<S> {
        let mut total = S::zero();
        for r in &self.rounds {
            total += r.algo_loss()?;
        }
        Ok(total)
    }

    /// CSV with columns `round,skipped,chosen_action,sleeping,algo_loss`.
    /// Rounds are 1-based; label lists are semicolon-joined in label order.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        self.write_csv_with(out, &[], |_| Vec::new())
    }

    /// As [`GameHistory::write_csv`], with `extra` columns after the fixed
    /// ones. `fields(i)` gives row `i`'s extra values (0-based).
    pub fn write_csv_with<W: Write>(
        &self,
        out: W,
        extra: &[&str],
        mut fields: impl FnMut(usize) -> Vec<String>,
    ) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["round", "skipped", "chosen_action", "sleeping", "algo_loss"];
        header.extend_from_slice(extra);
        w.write_record(&header)?;
        for (i, r) in self.rounds.iter().enumerate() {
            let (skipped, chosen) = match &r.outcome {
                Outcome::Played(a) => ("0", a.to_field()),
                Outcome::Skipped => ("1", String::new()),
            };
            let mut row = vec![
                (i + 1).to_string(),
                skipped.to_string(),
                chosen,
                r.sleeping.to_field(),
                r.algo_loss()?.to_string(),
            ];
            row.extend(fields(i));
            if row.len() != header.len() {
                return Err(Error::InvalidInput(format!("row {} has {} fields, header {}", i + 1, row.len(), header.len())));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

/// Sum of `loss(V_t) - loss(V)` over played rounds in which `V` is awake.
pub fn per_action_regret<S: Scalar>(history: &GameHistory<S>, action: &Action) -> Result<S> {
    let mut regret = S::zero();
    for r in history.rounds() {
        let Some(played) = r.played() else { continue };
        if !action.is_awake(&r.sleeping) {
            continue;
        }
        regret += r.losses.action_loss(played)? - r.losses.action_loss(action)?;
    }
    Ok(regret)
}

/// An explicit prefix of distinct actions, completed by label-lexicographic
/// order of the remaining actions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ranking {
    order: Vec<Action>,
    listed: BTreeSet<Action>,
}

impl Ranking {
    pub fn new(instance: &ProblemInstance, order: Vec<Action>) -> Result<Ranking> {
        let mut listed = BTreeSet::new();
        for a in &order {
            if !instance.contains(a) {
                return Err(Error::InvalidInput(format!("ranked action {a} not in decision set")));
            }
            if !listed.insert(a.clone()) {
                return Err(Error::InvalidInput(format!("ranked action {a} listed twice")));
            }
        }
        Ok(Ranking { order, listed })
    }

    /// Keeps the first occurrence of every action.
    pub fn dedup(instance: &ProblemInstance, order: Vec<Action>) -> Result<Ranking> {
        let mut seen = BTreeSet::new();
        let order = order.into_iter().filter(|a| seen.insert(a.clone())).collect();
        Ranking::new(instance, order)
    }

    pub fn prefix(&self) -> &[Action] {
        &self.order
    }

    /// The highest-ranked awake action.
    pub fn top_awake(&self, instance: &ProblemInstance, sleeping: &SleepingSet) -> Result<Option<Action>> {
        if let Some(a) = self.order.iter().find(|a| a.is_awake(sleeping)) {
            return Ok(Some(a.clone()));
        }
        Ok(instance.awake_actions(sleeping)?.into_iter().find(|a| !self.listed.contains(a)))
    }
}

/// Total loss of always playing the top-ranked awake action.
pub fn ranking_loss<S: Scalar>(history: &GameHistory<S>, ranking: &Ranking, instance: &ProblemInstance) -> Result<S> {
    let mut total = S::zero();
    for r in history.rounds() {
        if r.played().is_none() {
            continue;
        }
        let top = ranking.top_awake(instance, &r.sleeping)?.ok_or(Error::NoAwakeAction)?;
        total += r.losses.action_loss(&top)?;
    }
    Ok(total)
}

pub fn ranking_regret<S: Scalar>(history: &GameHistory<S>, ranking: &Ranking, instance: &ProblemInstance) -> Result<S> {
    Ok(history.total_algo_loss()? - ranking_loss(history, ranking, instance)?)
}

/// Exhaustive search over all orderings of a decision set of at most
/// [`RANKING_SEARCH_CAP`] actions. Ties go to the lexicographically smallest
/// ordering.
pub fn best_ranking_bruteforce<S: Scalar>(
    history: &GameHistory<S>,
    instance: &ProblemInstance,
) -> Result<(Ranking, S)> {
    let actions = instance.clone().with_enum_cap(RANKING_SEARCH_CAP).enumerate().map_err(|_| Error::TooLarge {
        what: "ranking search".into(),
        cap: RANKING_SEARCH_CAP,
    })?;
    let mut best: Option<(Ranking, S)> = None;
    for perm in actions.iter().cloned().permutations(actions.len()) {
        let ranking = Ranking::new(instance, perm)?;
        let loss = ranking_loss(history, &ranking, instance)?;
        if best.as_ref().is_none_or(|(_, b)| loss < *b) {
            best = Some((ranking, loss));
        }
    }
    Ok(best.expect("decision set is nonempty"))
}

pub trait Adversary<S: Scalar> {
    fn sleeping(&mut self, round: usize, history: &GameHistory<S>) -> SleepingSet;

    /// Called before the learner chooses, so losses cannot depend on `V_t`.
    fn losses(&mut self, round: usize, sleeping: &SleepingSet, history: &GameHistory<S>) -> LossFunction<S>;
}

pub trait Learner<S: Scalar> {
    /// An awake action, or `None` to skip a round with no awake actions.
    fn choose(&mut self, sleeping: &SleepingSet) -> Result<Option<Action>>;

    /// Full-information feedback on the awake elements of a played round.
    fn observe(&mut self, sleeping: &SleepingSet, losses: &LossFunction<S>) -> Result<()>;

    /// Expected loss over the learner's own randomization in the last
    /// observed round, for randomized learners.
    fn expected_loss(&self) -> Option<f64> {
        None
    }
}

impl<S: Scalar, L: Learner<S> + ?Sized> Learner<S> for Box<L> {
    fn choose(&mut self, sleeping: &SleepingSet) -> Result<Option<Action>> {
        (**self).choose(sleeping)
    }

    fn observe(&mut self, sleeping: &SleepingSet, losses: &LossFunction<S>) -> Result<()> {
        (**self).observe(sleeping, losses)
    }

    fn expected_loss(&self) -> Option<f64> {
        (**self).expected_loss()
    }
}

/// Plays `rounds` rounds of the sleeping game and checks the protocol.
pub fn run_game<S, A, L>(
    instance: &ProblemInstance,
    adversary: &mut A,
    learner: &mut L,
    rounds: usize,
) -> Result<GameHistory<S>>
where
    S: Scalar,
    A: Adversary<S> + ?Sized,
    L: Learner<S> + ?Sized,
{
    if rounds == 0 {
        return Err(Error::InvalidInput("a game needs at least one round".into()));
    }
    let mut history = GameHistory::new();
    for t in 1..=rounds {
        let sleeping = adversary.sleeping(t, &history);
        if let Some(l) = sleeping.labels().iter().find(|l| !instance.ground_set().contains(l)) {
            return Err(Error::ProtocolViolation(format!("sleeping element {l} outside ground set")));
        }
        let awake = instance.ground_set().awake(&sleeping);
        let losses = adversary.losses(t, &sleeping, &history).restricted(&awake);
        if let Some(l) = awake.iter().find(|l| losses.get(l).is_none()) {
            return Err(Error::MissingLoss(*l));
        }
        if let Some((l, v)) = losses.out_of_range() {
            return Err(Error::UnsupportedLossRange(format!("loss {v} on {l} outside declared range")));
        }
        let outcome = match learner.choose(&sleeping)? {
            Some(action) => {
                if !action.is_awake(&sleeping) {
                    return Err(Error::ProtocolViolation(format!("round {t}: played sleeping action {action}")));
                }
                if !instance.contains(&action) {
                    return Err(Error::ProtocolViolation(format!("round {t}: {action} not in decision set")));
                }
                learner.observe(&sleeping, &losses)?;
                Outcome::Played(action)
            }
            None => {
                if instance.has_awake(&sleeping)? {
                    return Err(Error::ProtocolViolation(format!("round {t}: skipped with awake actions")));
                }
                Outcome::Skipped
            }
        };
        history.push(RoundRecord { sleeping, outcome, losses });
    }
    Ok(history)
}

#[cfg(test)]
mod tests;
