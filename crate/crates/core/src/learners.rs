//! Sleeping learners over explicitly enumerated decision sets.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{Learner, LossFunction, LossRange};
use crate::label::{Action, SleepingSet};
use crate::problems::ProblemInstance;
use crate::scalar::Scalar;

/// Awake actions of the current round, cached between `choose` and `observe`.
#[derive(Clone, Debug, Default)]
struct RoundCache {
    sleeping: Option<SleepingSet>,
    awake: Vec<Action>,
}

impl RoundCache {
    fn awake(&mut self, instance: &ProblemInstance, sleeping: &SleepingSet) -> Result<&[Action]> {
        if self.sleeping.as_ref() != Some(sleeping) {
            self.awake = instance.awake_actions(sleeping)?;
            self.sleeping = Some(sleeping.clone());
        }
        Ok(&self.awake)
    }
}

/// Uniform over the awake actions.
#[derive(Clone, Debug)]
pub struct RandomAwake {
    instance: ProblemInstance,
    rng: ChaCha8Rng,
    cache: RoundCache,
    last_expected: Option<f64>,
}

impl RandomAwake {
    pub fn new(instance: ProblemInstance, seed: u64) -> RandomAwake {
        RandomAwake { instance, rng: ChaCha8Rng::seed_from_u64(seed), cache: RoundCache::default(), last_expected: None }
    }
}

impl<S: Scalar> Learner<S> for RandomAwake {
    fn choose(&mut self, sleeping: &SleepingSet) -> Result<Option<Action>> {
        let awake = self.cache.awake(&self.instance, sleeping)?;
        if awake.is_empty() {
            return Ok(None);
        }
        let i = self.rng.gen_range(0..awake.len());
        Ok(Some(awake[i].clone()))
    }

    fn observe(&mut self, sleeping: &SleepingSet, losses: &LossFunction<S>) -> Result<()> {
        let awake = self.cache.awake(&self.instance, sleeping)?;
        let mut total = 0.0;
        for a in awake {
            total += losses.action_loss(a)?.to_f64_lossy();
        }
        self.last_expected = Some(total / awake.len() as f64);
        Ok(())
    }

    fn expected_loss(&self) -> Option<f64> {
        self.last_expected
    }
}

/// The awake action with least cumulative loss over the rounds it was awake.
/// Ties go to the smallest action.
#[derive(Clone, Debug)]
pub struct FollowAwakeLeader<S> {
    instance: ProblemInstance,
    cumulative: HashMap<Action, S>,
    cache: RoundCache,
}

impl<S: Scalar> FollowAwakeLeader<S> {
    pub fn new(instance: ProblemInstance) -> Self {
        FollowAwakeLeader { instance, cumulative: HashMap::new(), cache: RoundCache::default() }
    }

    pub fn cumulative(&self, action: &Action) -> S {
        self.cumulative.get(action).cloned().unwrap_or_else(S::zero)
    }
}

impl<S: Scalar> Learner<S> for FollowAwakeLeader<S> {
    fn choose(&mut self, sleeping: &SleepingSet) -> Result<Option<Action>> {
        let awake = self.cache.awake(&self.instance, sleeping)?;
        let zero = S::zero();
        let mut best: Option<(&Action, &S)> = None;
        for a in awake {
            let c = self.cumulative.get(a).unwrap_or(&zero);
            if best.is_none_or(|(_, b)| c < b) {
                best = Some((a, c));
            }
        }
        Ok(best.map(|(a, _)| a.clone()))
    }

    fn observe(&mut self, sleeping: &SleepingSet, losses: &LossFunction<S>) -> Result<()> {
        let awake = self.cache.awake(&self.instance, sleeping)?;
        for a in awake {
            let l = losses.action_loss(a)?;
            *self.cumulative.entry(a.clone()).or_insert_with(S::zero) += l;
        }
        Ok(())
    }
}

/// Specialists-style exponential weights. Awake actions are reweighted by
/// `exp(-eta * (loss - mix))` where `mix` is the round's mix loss, so the
/// total weight, and with it every sleeping action's share, stays fixed.
#[derive(Clone, Debug)]
pub struct SleepingHedge {
    instance: ProblemInstance,
    eta: f64,
    /// Log weights; absent actions have log weight 0.
    log_w: HashMap<Action, f64>,
    rng: ChaCha8Rng,
    cache: RoundCache,
    last_expected: Option<f64>,
}

impl SleepingHedge {
    pub fn new(instance: ProblemInstance, eta: f64, seed: u64) -> Result<SleepingHedge> {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::InvalidInput(format!("learning rate must be positive, got {eta}")));
        }
        Ok(SleepingHedge {
            instance,
            eta,
            log_w: HashMap::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            cache: RoundCache::default(),
            last_expected: None,
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn log_weight(&self, action: &Action) -> f64 {
        self.log_w.get(action).copied().unwrap_or(0.0)
    }

    /// Sampling distribution over the awake actions, in sorted action order.
    pub fn distribution(&mut self, sleeping: &SleepingSet) -> Result<Vec<(Action, f64)>> {
        let awake = self.cache.awake(&self.instance, sleeping)?.to_vec();
        let probs = self.probabilities(&awake);
        Ok(awake.into_iter().zip(probs).collect())
    }

    fn probabilities(&self, awake: &[Action]) -> Vec<f64> {
        let logs: Vec<f64> = awake.iter().map(|a| self.log_weight(a)).collect();
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
        let z: f64 = w.iter().sum();
        w.into_iter().map(|x| x / z).collect()
    }
}

impl<S: Scalar> Learner<S> for SleepingHedge {
    fn choose(&mut self, sleeping: &SleepingSet) -> Result<Option<Action>> {
        let awake = self.cache.awake(&self.instance, sleeping)?.to_vec();
        if awake.is_empty() {
            return Ok(None);
        }
        let probs = self.probabilities(&awake);
        let u: f64 = self.rng.gen();
        let mut acc = 0.0;
        for (a, p) in awake.iter().zip(&probs) {
            acc += p;
            if u < acc {
                return Ok(Some(a.clone()));
            }
        }
        Ok(awake.last().cloned())
    }

    fn observe(&mut self, sleeping: &SleepingSet, losses: &LossFunction<S>) -> Result<()> {
        let awake = self.cache.awake(&self.instance, sleeping)?.to_vec();
        if awake.is_empty() {
            return Ok(());
        }
        let probs = self.probabilities(&awake);
        let ls: Vec<f64> = awake.iter().map(|a| losses.action_loss(a).map(|v| v.to_f64_lossy())).collect::<Result<_>>()?;
        self.last_expected = Some(probs.iter().zip(&ls).map(|(p, l)| p * l).sum());
        // Mix loss, computed around the smallest loss for stability.
        let lo = ls.iter().copied().fold(f64::INFINITY, f64::min);
        let s: f64 = probs.iter().zip(&ls).map(|(p, l)| p * (-self.eta * (l - lo)).exp()).sum();
        let mix = lo - s.ln() / self.eta;
        for (a, l) in awake.iter().zip(&ls) {
            *self.log_w.entry(a.clone()).or_insert(0.0) -= self.eta * (l - mix);
        }
        Ok(())
    }

    fn expected_loss(&self) -> Option<f64> {
        self.last_expected
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum LearnerKind {
    SleepingHedge { eta: Option<f64> },
    FollowAwakeLeader,
    RandomAwake,
}

impl LearnerKind {
    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::SleepingHedge { .. } => "hedge",
            LearnerKind::FollowAwakeLeader => "ftl",
            LearnerKind::RandomAwake => "random",
        }
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LearnerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<LearnerKind> {
        match s {
            "hedge" => Ok(LearnerKind::SleepingHedge { eta: None }),
            "ftl" => Ok(LearnerKind::FollowAwakeLeader),
            "random" => Ok(LearnerKind::RandomAwake),
            _ => Err(Error::InvalidInput(format!("unknown learner {s:?} (hedge, ftl, random)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LearnerConfig {
    pub kind: LearnerKind,
    pub seed: u64,
    /// Horizon used by the default learning rate.
    pub horizon: usize,
    pub range: LossRange,
}

/// `sqrt(8 ln N / T) / width`, where `width` bounds the spread of action
/// losses. When the decision set is past the cap, `ln N <= d ln 2` is used.
pub fn default_eta(instance: &ProblemInstance, horizon: usize, range: LossRange) -> Result<f64> {
    let ln_n = match instance.count_up_to(instance.enum_cap())? {
        Some(n) => (n.max(2) as f64).ln(),
        None => instance.ground_set().size() as f64 * std::f64::consts::LN_2,
    };
    let size = instance.max_action_size().max(1) as f64;
    let width = match range {
        LossRange::Signed => 2.0 * size,
        LossRange::Unit => size,
    };
    Ok((8.0 * ln_n / horizon.max(1) as f64).sqrt() / width)
}

pub fn make_learner<S: Scalar>(instance: &ProblemInstance, config: &LearnerConfig) -> Result<Box<dyn Learner<S> + Send>> {
    Ok(match config.kind {
        LearnerKind::SleepingHedge { eta } => {
            let eta = match eta {
                Some(e) => e,
                None => default_eta(instance, config.horizon, config.range)?,
            };
            Box::new(SleepingHedge::new(instance.clone(), eta, config.seed)?)
        }
        LearnerKind::FollowAwakeLeader => Box::new(FollowAwakeLeader::<S>::new(instance.clone())),
        LearnerKind::RandomAwake => Box::new(RandomAwake::new(instance.clone(), config.seed)),
    })
}
