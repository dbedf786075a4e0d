//! Agnostic disjunction learning from a sleeping learner on a hard instance.

use std::collections::HashMap;

use crate::disjunctions::{enumerate_disjunctions, Disjunction, LabeledStream};
use crate::error::{Error, Result};
use crate::game::{per_action_regret, GameHistory, Learner, LossFunction, LossRange, Outcome, RoundRecord};
use crate::hard::HardInstance;
use crate::label::{Action, Label, SleepingSet, Tag};
use crate::scalar::Scalar;

/// `S_t = {(i, 1 - x(i))}`.
pub fn input_sleeping(x: &[bool]) -> SleepingSet {
    x.iter().enumerate().map(|(i, &b)| Label::tagged(i as u32 + 1, Tag::from_bit(!b))).collect()
}

/// Round losses on the awake elements: `(1-y)/(n+1)` off `F`, and
/// `y - n(1-y)/(n+1)` on `F`.
pub fn disjunction_losses<S: Scalar>(n: usize, y: bool, awake: impl IntoIterator<Item = Label>) -> LossFunction<S> {
    let n1 = n as i64 + 1;
    let yv = i64::from(y);
    let other = S::from_ratio(1 - yv, n1);
    let f = S::from_ratio(yv * n1 - n as i64 * (1 - yv), n1);
    LossFunction::from_pairs(
        LossRange::Signed,
        awake.into_iter().map(|l| (l, if l == Label::F { f.clone() } else { other.clone() })),
    )
}

pub struct DisjunctionLearner<S: Scalar, L> {
    hard: HardInstance,
    inner: L,
    pending: Option<(SleepingSet, Action, bool)>,
    history: GameHistory<S>,
}

impl<S: Scalar, L: Learner<S>> DisjunctionLearner<S, L> {
    pub fn new(hard: HardInstance, inner: L) -> Self {
        DisjunctionLearner { hard, inner, pending: None, history: GameHistory::new() }
    }

    pub fn n(&self) -> usize {
        self.hard.n
    }

    pub fn hard(&self) -> &HardInstance {
        &self.hard
    }

    pub fn inner(&self) -> &L {
        &self.inner
    }

    /// The inner learner's game on the hard instance.
    pub fn history(&self) -> &GameHistory<S> {
        &self.history
    }

    /// `ŷ = 1[F ∉ V_t]` for the inner learner's action under `S_t`.
    pub fn predict(&mut self, x: &[bool]) -> Result<bool> {
        if x.len() != self.hard.n {
            return Err(Error::InvalidInput(format!("input has {} bits, expected {}", x.len(), self.hard.n)));
        }
        if self.pending.is_some() {
            return Err(Error::ProtocolViolation("predict called twice without update".into()));
        }
        let sleeping = input_sleeping(x);
        let v = self.inner.choose(&sleeping)?.ok_or(Error::NoAwakeAction)?;
        if !v.is_awake(&sleeping) || !self.hard.instance.contains(&v) {
            return Err(Error::ProtocolViolation(format!("inner played {v}, not an awake action")));
        }
        let y_hat = !v.contains(&Label::F);
        self.pending = Some((sleeping, v, y_hat));
        Ok(y_hat)
    }

    pub fn update(&mut self, y: bool) -> Result<()> {
        let (sleeping, v, _) =
            self.pending.take().ok_or_else(|| Error::ProtocolViolation("update without predict".into()))?;
        let awake = self.hard.instance.ground_set().awake(&sleeping);
        let losses = disjunction_losses(self.hard.n, y, awake);
        self.inner.observe(&sleeping, &losses)?;
        self.history.push(RoundRecord { sleeping, outcome: Outcome::Played(v), losses });
        Ok(())
    }

    /// Plays the whole stream.
    pub fn run(mut self, stream: &LabeledStream) -> Result<DisjunctionRun<S>> {
        if stream.n != self.hard.n {
            return Err(Error::InvalidInput(format!("stream has n={}, learner n={}", stream.n, self.hard.n)));
        }
        let mut predictions = Vec::with_capacity(stream.rounds.len());
        let mut expected = Vec::with_capacity(stream.rounds.len());
        for (x, y) in &stream.rounds {
            predictions.push(self.predict(x)?);
            self.update(*y)?;
            expected.push(self.inner.expected_loss());
        }
        Ok(DisjunctionRun {
            hard: self.hard,
            stream: stream.clone(),
            predictions,
            expected_losses: expected.into_iter().collect(),
            history: self.history,
        })
    }
}

/// Ledgers of one learning run.
#[derive(Clone, Debug)]
pub struct DisjunctionRun<S> {
    pub hard: HardInstance,
    pub stream: LabeledStream,
    pub predictions: Vec<bool>,
    /// Per-round expected inner loss, for randomized inner learners.
    pub expected_losses: Option<Vec<f64>>,
    pub history: GameHistory<S>,
}

impl<S: Scalar> DisjunctionRun<S> {
    pub fn mistakes(&self) -> usize {
        self.predictions.iter().zip(&self.stream.rounds).filter(|(p, (_, y))| *p != y).count()
    }

    /// `mistakes(algorithm) - mistakes(phi)`.
    pub fn regret(&self, phi: &Disjunction) -> i64 {
        self.mistakes() as i64 - self.stream.mistakes(phi) as i64
    }

    /// Sum of the inner learner's per-action regret over `D_phi`.
    pub fn dphi_regret(&self, phi: &Disjunction) -> Result<S> {
        let mut total = S::zero();
        for v in build_dphi(phi, self.hard.n) {
            total += per_action_regret(&self.history, &v)?;
        }
        Ok(total)
    }

    /// First round where `loss(V_t) < 1[y_t != ŷ_t]`, if any.
    pub fn loss_bound_violation(&self) -> Result<Option<usize>> {
        for (t, (r, (p, (_, y)))) in self.history.rounds().iter().zip(self.predictions.iter().zip(&self.stream.rounds)).enumerate() {
            let mistake = S::from_usize_lossy(usize::from(p != y));
            if r.algo_loss()? < mistake {
                return Ok(Some(t + 1));
            }
        }
        Ok(None)
    }

    /// A disjunction whose regret exceeds its `D_phi` per-action regret
    /// sum, among all disjunctions over `n` variables.
    pub fn chain_violation(&self) -> Result<Option<Disjunction>> {
        let mut cache: HashMap<Action, S> = HashMap::new();
        for phi in enumerate_disjunctions(self.hard.n)? {
            let mut total = S::zero();
            for v in build_dphi(&phi, self.hard.n) {
                let r = match cache.get(&v) {
                    Some(r) => r.clone(),
                    None => {
                        let r = per_action_regret(&self.history, &v)?;
                        cache.insert(v, r.clone());
                        r
                    }
                };
                total += r;
            }
            let lhs = S::from_i64(self.regret(&phi)).expect("integer regret fits");
            if !lhs.approx_le(&total) {
                return Ok(Some(phi));
            }
        }
        Ok(None)
    }
}

/// `D_phi = {V^1, ..., V^(m+1)}` over the relevant indices `i_1 < ... < i_m`.
pub fn build_dphi(phi: &Disjunction, n: usize) -> Vec<Action> {
    let rel = phi.relevant();
    let tag = |i: usize, t: Tag| Label::tagged(i as u32, t);
    let w: Vec<Label> = (1..=n).filter(|i| rel.iter().all(|(j, _)| j != i)).map(|i| tag(i, Tag::Star)).collect();
    let mut out = Vec::with_capacity(rel.len() + 1);
    for j in 0..=rel.len() {
        let mut v: Vec<Label> = w.clone();
        for (l, &(i, f)) in rel.iter().enumerate() {
            let t = if l < j {
                Tag::from_bit(!f)
            } else if l == j {
                Tag::from_bit(f)
            } else {
                Tag::Star
            };
            v.push(tag(i, t));
        }
        v.push(if j < rel.len() { Label::T } else { Label::F });
        out.push(v.into_iter().collect());
    }
    out
}

/// The unique awake member of `D_phi` under input `x`, and whether it
/// contains `T`. Fails if the member is not unique or disagrees with `phi(x)`.
pub fn verify_dphi_round(phi: &Disjunction, x: &[bool]) -> Result<(Action, bool)> {
    let n = x.len();
    let sleeping = input_sleeping(x);
    let awake: Vec<Action> = build_dphi(phi, n).into_iter().filter(|v| v.is_awake(&sleeping)).collect();
    let [v] = awake.as_slice() else {
        return Err(Error::ConstructionDefect(format!("{} awake members of D_phi for {phi}", awake.len())));
    };
    let has_t = v.contains(&Label::T);
    if has_t != phi.eval(x) {
        return Err(Error::ConstructionDefect(format!("{v} disagrees with {phi} on {x:?}")));
    }
    Ok((v.clone(), has_t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hard::build_hard;
    use crate::learners::FollowAwakeLeader;
    use crate::problems::FamilyKind;
    use crate::Q;

    fn act(labels: &[&str]) -> Action {
        labels.iter().map(|s| s.parse::<Label>().unwrap()).collect()
    }

    #[test]
    fn sleeping_from_input() {
        let s = input_sleeping(&[true, false]);
        assert_eq!(s, ["1:0", "2:1"].iter().map(|l| l.parse::<Label>().unwrap()).collect());
    }

    #[test]
    fn loss_values() {
        let awake = [Label::tagged(1, Tag::Zero), Label::F];
        let l1 = disjunction_losses::<Q>(3, true, awake);
        assert_eq!(l1.get(&awake[0]), Some(&Q::from_integer(0)));
        assert_eq!(l1.get(&Label::F), Some(&Q::from_integer(1)));
        let l0 = disjunction_losses::<Q>(3, false, awake);
        assert_eq!(l0.get(&awake[0]), Some(&Q::new(1, 4)));
        assert_eq!(l0.get(&Label::F), Some(&Q::new(-3, 4)));
    }

    #[test]
    fn exact_size_action_loss_is_mistake() {
        for n in 1..=5 {
            for y in [false, true] {
                for with_f in [false, true] {
                    let mut v: Vec<Label> = (1..=n as u32).map(|i| Label::tagged(i, Tag::Star)).collect();
                    v.push(if with_f { Label::F } else { Label::T });
                    let a: Action = v.iter().copied().collect();
                    let l = disjunction_losses::<Q>(n, y, v).action_loss(&a).unwrap();
                    let y_hat = !with_f;
                    assert_eq!(l, Q::from_integer(i64::from(y != y_hat)));
                }
            }
        }
    }

    #[test]
    fn dphi_examples() {
        let x1 = Disjunction::new(2, [1], []).unwrap();
        assert_eq!(build_dphi(&x1, 2), vec![act(&["1:1", "2:*", "T"]), act(&["1:0", "2:*", "F"])]);
        assert_eq!(build_dphi(&Disjunction::empty(), 2), vec![act(&["1:*", "2:*", "F"])]);
        let (v, t) = verify_dphi_round(&x1, &[true, false]).unwrap();
        assert_eq!((v, t), (act(&["1:1", "2:*", "T"]), true));
        let (v, t) = verify_dphi_round(&x1, &[false, true]).unwrap();
        assert_eq!((v, t), (act(&["1:0", "2:*", "F"]), false));
    }

    #[test]
    fn dphi_members_are_actions() {
        for family in FamilyKind::ALL {
            let hard = build_hard(family, 2).unwrap();
            for phi in enumerate_disjunctions(2).unwrap() {
                for v in build_dphi(&phi, 2) {
                    assert_eq!(v.len(), 3);
                    assert!(hard.instance.contains(&v), "{family}: {v}");
                }
            }
        }
    }

    #[test]
    fn predict_update_protocol() {
        let hard = build_hard(FamilyKind::KSubsets, 2).unwrap();
        let inner = FollowAwakeLeader::<Q>::new(hard.instance.clone());
        let mut d = DisjunctionLearner::new(hard, inner);
        assert!(d.update(true).is_err());
        d.predict(&[true, false]).unwrap();
        assert!(d.predict(&[true, false]).is_err());
        d.update(false).unwrap();
        assert_eq!(d.history().len(), 1);
        assert!(d.predict(&[true]).is_err());
    }
}
