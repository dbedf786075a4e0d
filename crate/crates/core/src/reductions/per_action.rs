//! Per-action regret from a ranking-regret learner on the extended instance.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::extensible::{extend, ExtendedInstance};
use crate::game::{
    per_action_regret, ranking_regret, GameHistory, Learner, LossFunction, LossRange, Outcome, Ranking, RoundRecord,
};
use crate::label::{Action, SleepingSet};
use crate::problems::{min_by_enumeration, ProblemInstance};
use crate::scalar::Scalar;

/// `max(1, ceil(log2 T))`.
pub fn bit_width(horizon: usize) -> usize {
    let mut p = 1;
    while (1usize << p) < horizon {
        p += 1;
    }
    p
}

/// Binary encoding of `t - 1` in `p` bits, least significant first.
pub fn round_bits(t: usize, p: usize) -> Vec<bool> {
    (0..p).map(|i| i < usize::BITS as usize && (t - 1) >> i & 1 == 1).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PatternMode {
    Deterministic,
    /// Uniform i.i.d. patterns on `multiplier * bit_width(T)` bits.
    StochasticIid { seed: u64, multiplier: usize },
}

impl PatternMode {
    pub fn iid(seed: u64) -> PatternMode {
        PatternMode::StochasticIid { seed, multiplier: 2 }
    }
}

/// Per-round bit patterns for a horizon.
#[derive(Clone, Debug)]
pub struct PatternSource {
    mode: PatternMode,
    horizon: usize,
    p: usize,
    rng: Option<ChaCha8Rng>,
}

impl PatternSource {
    pub fn new(mode: PatternMode, horizon: usize) -> Result<PatternSource> {
        if horizon == 0 {
            return Err(Error::InvalidInput("horizon must be positive".into()));
        }
        let (p, rng) = match mode {
            PatternMode::Deterministic => (bit_width(horizon), None),
            PatternMode::StochasticIid { seed, multiplier } => {
                if multiplier == 0 {
                    return Err(Error::InvalidInput("pattern multiplier must be positive".into()));
                }
                (multiplier * bit_width(horizon), Some(ChaCha8Rng::seed_from_u64(seed)))
            }
        };
        Ok(PatternSource { mode, horizon, p, rng })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn mode(&self) -> PatternMode {
        self.mode
    }

    /// Pattern for round `t` (1-based); rounds must be requested in order.
    pub fn pattern(&mut self, t: usize) -> Result<Vec<bool>> {
        if t == 0 || t > self.horizon {
            return Err(Error::ProtocolViolation(format!("round {t} outside horizon {}", self.horizon)));
        }
        Ok(match &mut self.rng {
            None => round_bits(t, self.p),
            Some(rng) => (0..self.p).map(|_| rng.gen()).collect(),
        })
    }
}

pub fn has_collision(patterns: &[Vec<bool>]) -> bool {
    let mut seen = BTreeSet::new();
    !patterns.iter().all(|b| seen.insert(b))
}

/// Union bound `T(T-1) / 2^(p+1)` on the probability of a repeated pattern.
pub fn collision_bound(horizon: usize, p: usize) -> f64 {
    let t = horizon as f64;
    t * (t - 1.0) / 2f64.powi(p as i32 + 1)
}

#[derive(Clone, Debug)]
struct Pending {
    sleeping: SleepingSet,
    choice: Option<Action>,
}

/// Plays on a base instance by running `inner` on its extension with
/// `p` bit elements that encode the round.
pub struct PerActionWrapper<S: Scalar, L> {
    ext: ExtendedInstance,
    inner: L,
    patterns: PatternSource,
    round: usize,
    log: Vec<Vec<bool>>,
    pending: Option<Pending>,
    derived: GameHistory<S>,
}

impl<S: Scalar, L: Learner<S>> PerActionWrapper<S, L> {
    /// Extends `base` with the pattern width of `mode` and builds the inner
    /// learner on the derived instance.
    pub fn new(
        base: &ProblemInstance,
        horizon: usize,
        mode: PatternMode,
        build_inner: impl FnOnce(&ProblemInstance) -> Result<L>,
    ) -> Result<Self> {
        let patterns = PatternSource::new(mode, horizon)?;
        let ext = extend(base, patterns.p())?;
        let derived_instance = ext.derived.clone().with_enum_cap(base.enum_cap());
        let inner = build_inner(&derived_instance)?;
        Ok(PerActionWrapper {
            ext: ExtendedInstance { derived: derived_instance, ..ext },
            inner,
            patterns,
            round: 0,
            log: Vec::new(),
            pending: None,
            derived: GameHistory::new(),
        })
    }

    pub fn extension(&self) -> &ExtendedInstance {
        &self.ext
    }

    pub fn inner(&self) -> &L {
        &self.inner
    }

    /// Bit patterns of the rounds played so far.
    pub fn patterns(&self) -> &[Vec<bool>] {
        &self.log
    }

    /// The inner learner's game on the derived instance.
    pub fn derived_history(&self) -> &GameHistory<S> {
        &self.derived
    }

    /// Derived sleeping set for the base sleeping set and a pattern.
    pub fn derived_sleeping(&self, sleeping: &SleepingSet, bits: &[bool]) -> SleepingSet {
        let mut s = sleeping.clone();
        s.extend(self.ext.sleeping_bits(bits));
        s.extend(self.ext.permanently_sleeping.iter().copied());
        s
    }

    pub fn pa_step(&mut self, sleeping: &SleepingSet) -> Result<Option<Action>> {
        let base = self.ext.base.ground_set();
        if let Some(l) = sleeping.labels().iter().find(|l| !base.contains(l)) {
            return Err(Error::ProtocolViolation(format!("sleeping element {l} outside base ground set")));
        }
        self.flush_pending();
        let t = self.round + 1;
        let bits = self.patterns.pattern(t)?;
        self.round = t;
        let derived_sleeping = self.derived_sleeping(sleeping, &bits);
        self.log.push(bits);
        let choice = self.inner.choose(&derived_sleeping)?;
        let out = match &choice {
            Some(v) => {
                if !v.is_awake(&derived_sleeping) {
                    return Err(Error::ProtocolViolation(format!("round {t}: inner played sleeping action {v}")));
                }
                if !self.ext.derived.contains(v) {
                    return Err(Error::ProtocolViolation(format!("round {t}: {v} not a derived action")));
                }
                Some(self.ext.pi(v)?)
            }
            None => None,
        };
        self.pending = Some(Pending { sleeping: derived_sleeping, choice });
        Ok(out)
    }

    /// Forwards base losses to the inner learner, with 0 on the bit elements.
    pub fn pa_feed(&mut self, losses: &LossFunction<S>) -> Result<()> {
        if let Some((l, v)) = losses.iter().find(|(_, v)| v.is_negative()) {
            return Err(Error::UnsupportedLossRange(format!("negative base loss {v} on {l}")));
        }
        let pending = self
            .pending
            .take()
            .ok_or_else(|| Error::ProtocolViolation("losses fed before a step".into()))?;
        let awake = self.ext.derived.ground_set().awake(&pending.sleeping);
        let mut derived = LossFunction::new(LossRange::Unit);
        for l in &awake {
            if self.ext.base.ground_set().contains(l) {
                derived.set(*l, losses.get(l).cloned().ok_or(Error::MissingLoss(*l))?);
            } else {
                derived.set(*l, S::zero());
            }
        }
        let outcome = match pending.choice {
            Some(v) => {
                self.inner.observe(&pending.sleeping, &derived)?;
                Outcome::Played(v)
            }
            None => Outcome::Skipped,
        };
        self.derived.push(RoundRecord { sleeping: pending.sleeping, outcome, losses: derived });
        Ok(())
    }

    /// Records an unfed step as skipped.
    fn flush_pending(&mut self) {
        if let Some(p) = self.pending.take() {
            let outcome = match p.choice {
                Some(v) => Outcome::Played(v),
                None => Outcome::Skipped,
            };
            self.derived.push(RoundRecord { sleeping: p.sleeping, outcome, losses: LossFunction::new(LossRange::Unit) });
        }
    }

    /// Closes the last round and returns the derived history.
    pub fn finish(mut self) -> (ExtendedInstance, L, Vec<Vec<bool>>, GameHistory<S>) {
        self.flush_pending();
        (self.ext, self.inner, self.log, self.derived)
    }
}

impl<S: Scalar, L: Learner<S>> Learner<S> for PerActionWrapper<S, L> {
    fn choose(&mut self, sleeping: &SleepingSet) -> Result<Option<Action>> {
        self.pa_step(sleeping)
    }

    fn observe(&mut self, _sleeping: &SleepingSet, losses: &LossFunction<S>) -> Result<()> {
        self.pa_feed(losses)
    }

    fn expected_loss(&self) -> Option<f64> {
        self.inner.expected_loss()
    }
}

/// The ranking whose `t`-th entry is `{(i, b_i)} ∪ V_t*` with `t`'s pattern,
/// where `V_t*` is `action` when awake and otherwise an awake minimizer of
/// the round's base loss.
pub fn build_comparator_ranking<S: Scalar>(
    ext: &ExtendedInstance,
    base_history: &GameHistory<S>,
    patterns: &[Vec<bool>],
    action: &Action,
) -> Result<Ranking> {
    if patterns.len() != base_history.len() {
        return Err(Error::InvalidInput(format!(
            "{} patterns for {} rounds",
            patterns.len(),
            base_history.len()
        )));
    }
    let mut order = Vec::with_capacity(patterns.len());
    for (r, bits) in base_history.rounds().iter().zip(patterns) {
        let star = if action.is_awake(&r.sleeping) {
            Some(action.clone())
        } else {
            min_by_enumeration(&ext.base, &r.sleeping, &r.losses)?.map(|(a, _)| a)
        };
        if let Some(star) = star {
            order.push(ext.bit_action(bits).union(&star));
        }
    }
    Ranking::dedup(&ext.derived, order)
}

/// Outcome of [`check_chain`]. Each field holds the first failure found.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ChainReport {
    /// Round where the base loss exceeded the derived loss.
    pub dominance: Option<usize>,
    /// Action whose comparator ranking did not replay its entries in order.
    pub replay: Option<Action>,
    /// Action whose per-action regret exceeded its comparator's ranking regret.
    pub chain: Option<Action>,
}

impl ChainReport {
    pub fn holds(&self) -> bool {
        self.dominance.is_none() && self.replay.is_none() && self.chain.is_none()
    }
}

/// Checks `l_t(V_t) <= l'_t(V'_t)` each round, then for every base action
/// `V` that the comparator's `t`-th entry is its top awake action at round
/// `t` and that the per-action regret of `V` is at most the comparator's
/// ranking regret.
pub fn check_chain<S: Scalar>(
    ext: &ExtendedInstance,
    base_history: &GameHistory<S>,
    derived_history: &GameHistory<S>,
    patterns: &[Vec<bool>],
) -> Result<ChainReport> {
    let mut report = ChainReport::default();
    for (t, (r, dr)) in base_history.rounds().iter().zip(derived_history.rounds()).enumerate() {
        if let (Some(v), Some(dv)) = (r.played(), dr.played()) {
            if r.losses.action_loss(v)? > dr.losses.action_loss(dv)? {
                report.dominance = Some(t + 1);
                break;
            }
        }
    }
    for v in ext.base.enumerate()? {
        let ranking = build_comparator_ranking(ext, base_history, patterns, &v)?;
        if report.replay.is_none() {
            let mut entries = ranking.prefix().iter();
            for dr in derived_history.rounds() {
                let top = ranking.top_awake(&ext.derived, &dr.sleeping)?;
                if top.is_some() && top.as_ref() != entries.next() {
                    report.replay = Some(v.clone());
                    break;
                }
            }
        }
        if report.chain.is_none() {
            let rhs = ranking_regret(derived_history, &ranking, &ext.derived)?;
            if per_action_regret(base_history, &v)? > rhs {
                report.chain = Some(v.clone());
            }
        }
        if report.replay.is_some() && report.chain.is_some() {
            break;
        }
    }
    Ok(report)
}
