use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::hard::{build_hard, stage_graph};
use crate::learners::FollowAwakeLeader;
use crate::problems::FamilyKind;
use crate::Q;

fn act(labels: &[&str]) -> Action {
    labels.iter().map(|s| s.parse::<Label>().unwrap()).collect()
}

fn lab(s: &str) -> Label {
    s.parse().unwrap()
}

fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

fn anon_subsets(k: usize, d: u32) -> ProblemInstance {
    ProblemInstance::k_subsets(k, (0..d).map(Label::Anon).collect()).unwrap()
}

#[test]
fn action_loss_examples() {
    let l = LossFunction::from_pairs(LossRange::Unit, [(lab("a0"), 0.5), (lab("a1"), 0.25)]);
    assert_eq!(action_loss(&Action::empty(), &l).unwrap(), 0.0);
    assert_eq!(action_loss(&act(&["a0", "a1"]), &l).unwrap(), 0.75);
    assert_eq!(action_loss(&act(&["a0", "a2"]), &l), Err(Error::MissingLoss(lab("a2"))));
}

#[test]
fn stage_path_loss_on_zero_label() {
    let n = 3;
    let inst = ProblemInstance::shortest_path(stage_graph(n, true)).unwrap();
    let l = LossFunction::constant(inst.ground_set().elements().iter().copied(), Q::new(1, n as i64 + 1));
    for p in inst.enumerate().unwrap() {
        assert_eq!(p.len(), n + 1);
        assert_eq!(action_loss(&p, &l).unwrap(), Q::from_integer(1));
    }
}

#[test]
fn awake_set_extremes() {
    let inst = anon_subsets(2, 4);
    assert_eq!(awake_set(&inst, &SleepingSet::empty()).unwrap(), inst.enumerate().unwrap());
    let all: SleepingSet = inst.ground_set().elements().iter().copied().collect();
    assert!(awake_set(&inst, &all).unwrap().is_empty());
    let empty_k = anon_subsets(0, 3);
    assert_eq!(awake_set(&empty_k, &all).unwrap(), vec![Action::empty()]);
}

fn played(sleeping: &[&str], v: &[&str], losses: &[(&str, Q)]) -> RoundRecord<Q> {
    RoundRecord {
        sleeping: sleeping.iter().map(|s| lab(s)).collect(),
        outcome: Outcome::Played(act(v)),
        losses: LossFunction::from_pairs(LossRange::Unit, losses.iter().map(|(l, v)| (lab(l), *v))),
    }
}

#[test]
fn per_action_regret_two_rounds() {
    let mut h = GameHistory::new();
    // V_t = {a0}, comparator {a1}: losses 1,1 versus 0,1.
    h.push(played(&[], &["a0"], &[("a0", q(1, 1)), ("a1", q(0, 1))]));
    h.push(played(&[], &["a0"], &[("a0", q(1, 1)), ("a1", q(1, 1))]));
    assert_eq!(per_action_regret(&h, &act(&["a1"])).unwrap(), q(1, 1));
    assert_eq!(per_action_regret(&h, &act(&["a0"])).unwrap(), q(0, 1));
}

#[test]
fn per_action_regret_ignores_sleeping_and_skipped_rounds() {
    let mut h = GameHistory::new();
    h.push(played(&["a1"], &["a0"], &[("a0", q(1, 1))]));
    h.push(RoundRecord { sleeping: SleepingSet::empty(), outcome: Outcome::Skipped, losses: LossFunction::new(LossRange::Unit) });
    assert_eq!(per_action_regret(&h, &act(&["a1"])).unwrap(), q(0, 1));
}

fn random_history(inst: &ProblemInstance, rounds: usize, rng: &mut ChaCha8Rng) -> GameHistory<Q> {
    let actions = inst.enumerate().unwrap();
    let mut h = GameHistory::new();
    for _ in 0..rounds {
        let sleeping: SleepingSet = inst.ground_set().elements().iter().copied().filter(|_| rng.gen_bool(0.3)).collect();
        let awake = inst.ground_set().awake(&sleeping);
        let losses = LossFunction::from_pairs(LossRange::Unit, awake.iter().map(|l| (*l, q(rng.gen_range(0..=4), 4))));
        let choices: Vec<&Action> = actions.iter().filter(|a| a.is_awake(&sleeping)).collect();
        let outcome = if choices.is_empty() {
            Outcome::Skipped
        } else {
            Outcome::Played(choices[rng.gen_range(0..choices.len())].clone())
        };
        h.push(RoundRecord { sleeping, outcome, losses });
    }
    h
}

/// Round-by-round simulation of a full ordering.
fn replay_loss(h: &GameHistory<Q>, order: &[Action]) -> Q {
    let mut total = q(0, 1);
    for r in h.rounds() {
        if r.played().is_none() {
            continue;
        }
        let top = order.iter().find(|a| a.is_awake(&r.sleeping)).unwrap();
        total += action_loss(top, &r.losses).unwrap();
    }
    total
}

#[test]
fn ranking_loss_matches_replay() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let inst = ProblemInstance::k_subsets(1, (0..3).map(Label::Anon).collect()).unwrap();
    for _ in 0..20 {
        let h = random_history(&inst, 4, &mut rng);
        let mut order = inst.enumerate().unwrap();
        let rotate = rng.gen_range(0..3);
        order.rotate_left(rotate);
        let r = Ranking::new(&inst, order.clone()).unwrap();
        assert_eq!(ranking_loss(&h, &r, &inst).unwrap(), replay_loss(&h, &order));
        assert_eq!(ranking_regret(&h, &r, &inst).unwrap(), h.total_algo_loss().unwrap() - replay_loss(&h, &order));

        // A one-element prefix is completed lexicographically.
        let head = vec![order[0].clone()];
        let mut full = head.clone();
        full.extend(inst.enumerate().unwrap().into_iter().filter(|a| *a != order[0]));
        let r = Ranking::new(&inst, head).unwrap();
        assert_eq!(ranking_loss(&h, &r, &inst).unwrap(), replay_loss(&h, &full));
    }
}

#[test]
fn single_action_ranking() {
    let inst = anon_subsets(2, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let h = random_history(&inst, 5, &mut rng);
    let only = inst.enumerate().unwrap();
    let r = Ranking::new(&inst, only.clone()).unwrap();
    let direct: Q = h.rounds().iter().filter(|r| r.played().is_some()).map(|r| action_loss(&only[0], &r.losses).unwrap()).sum();
    assert_eq!(ranking_loss(&h, &r, &inst).unwrap(), direct);
    let (best, v) = best_ranking_bruteforce(&h, &inst).unwrap();
    assert_eq!(best.prefix(), only.as_slice());
    assert_eq!(v, direct);
}

#[test]
fn per_round_minimizer_on_top() {
    // Nested awake sets: a0 sleeps in round 2 only, and is best when awake.
    let inst = anon_subsets(1, 2);
    let mut h = GameHistory::new();
    h.push(played(&[], &["a1"], &[("a0", q(0, 1)), ("a1", q(1, 2))]));
    h.push(played(&["a0"], &["a1"], &[("a1", q(1, 4))]));
    let r = Ranking::new(&inst, vec![act(&["a0"]), act(&["a1"])]).unwrap();
    assert_eq!(ranking_loss(&h, &r, &inst).unwrap(), q(1, 4));
}

#[test]
fn full_availability_best_ranking_leads_with_best_action() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let inst = anon_subsets(1, 4);
    let actions = inst.enumerate().unwrap();
    let mut h = GameHistory::new();
    for _ in 0..6 {
        let losses = LossFunction::from_pairs(LossRange::Unit, (0..4).map(|i| (Label::Anon(i), q(rng.gen_range(0..=4), 4))));
        h.push(RoundRecord { sleeping: SleepingSet::empty(), outcome: Outcome::Played(actions[0].clone()), losses });
    }
    let totals: Vec<Q> = actions.iter().map(|a| h.rounds().iter().map(|r| action_loss(a, &r.losses).unwrap()).sum()).collect();
    let min = *totals.iter().min().unwrap();
    let first_best = totals.iter().position(|t| *t == min).unwrap();
    let (best, v) = best_ranking_bruteforce(&h, &inst).unwrap();
    assert_eq!(v, min);
    assert_eq!(best.prefix()[0], actions[first_best]);
}

#[test]
fn best_ranking_matches_independent_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let inst = anon_subsets(1, 4);
    let actions = inst.enumerate().unwrap();
    for _ in 0..10 {
        let h = random_history(&inst, 6, &mut rng);
        // Heap's algorithm over all 24 orderings.
        let mut perm = actions.clone();
        let mut c = vec![0usize; perm.len()];
        let mut best = replay_loss(&h, &perm);
        let mut i = 0;
        while i < perm.len() {
            if c[i] < i {
                perm.swap(if i % 2 == 0 { 0 } else { c[i] }, i);
                best = best.min(replay_loss(&h, &perm));
                c[i] += 1;
                i = 0;
            } else {
                c[i] = 0;
                i += 1;
            }
        }
        assert_eq!(best_ranking_bruteforce(&h, &inst).unwrap().1, best);
    }
}

#[test]
fn best_ranking_cap() {
    let inst = anon_subsets(1, 9);
    let h: GameHistory<Q> = GameHistory::new();
    assert!(matches!(best_ranking_bruteforce(&h, &inst), Err(Error::TooLarge { .. })));
}

#[test]
fn ranking_rejects_bad_orders() {
    let inst = anon_subsets(1, 2);
    assert!(Ranking::new(&inst, vec![act(&["a0"]), act(&["a0"])]).is_err());
    assert!(Ranking::new(&inst, vec![act(&["a0", "a1"])]).is_err());
    assert_eq!(Ranking::dedup(&inst, vec![act(&["a1"]), act(&["a1"])]).unwrap().prefix(), &[act(&["a1"])]);
}

struct Script {
    rounds: Vec<(SleepingSet, LossFunction<Q>)>,
}

impl Adversary<Q> for Script {
    fn sleeping(&mut self, round: usize, _: &GameHistory<Q>) -> SleepingSet {
        self.rounds[round - 1].0.clone()
    }

    fn losses(&mut self, round: usize, _: &SleepingSet, _: &GameHistory<Q>) -> LossFunction<Q> {
        self.rounds[round - 1].1.clone()
    }
}

struct Fixed(Option<Action>);

impl Learner<Q> for Fixed {
    fn choose(&mut self, _: &SleepingSet) -> Result<Option<Action>> {
        Ok(self.0.clone())
    }

    fn observe(&mut self, _: &SleepingSet, _: &LossFunction<Q>) -> Result<()> {
        Ok(())
    }
}

fn unit(pairs: &[(&str, Q)]) -> LossFunction<Q> {
    LossFunction::from_pairs(LossRange::Unit, pairs.iter().map(|(l, v)| (lab(l), *v)))
}

#[test]
fn single_round_single_action() {
    let inst = anon_subsets(1, 1);
    let mut adv = Script { rounds: vec![(SleepingSet::empty(), unit(&[("a0", q(1, 2))]))] };
    let h = run_game(&inst, &mut adv, &mut FollowAwakeLeader::new(inst.clone()), 1).unwrap();
    assert_eq!(h.len(), 1);
    assert_eq!(h.rounds()[0].played(), Some(&act(&["a0"])));
    assert!(run_game(&inst, &mut adv, &mut Fixed(None), 0).is_err());
}

#[test]
fn everything_asleep_skips() {
    let inst = anon_subsets(1, 2);
    let all: SleepingSet = inst.ground_set().elements().iter().copied().collect();
    let mut adv = Script { rounds: vec![(all.clone(), unit(&[])); 3] };
    let h = run_game(&inst, &mut adv, &mut FollowAwakeLeader::new(inst.clone()), 3).unwrap();
    assert!(h.rounds().iter().all(|r| r.outcome == Outcome::Skipped));
    let csv = h.to_csv_string().unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.lines().nth(1).unwrap().starts_with("1,1,"));
}

#[test]
fn scripted_leader_trace() {
    let inst = anon_subsets(1, 3);
    let s = |ls: &[&str]| -> SleepingSet { ls.iter().map(|l| lab(l)).collect() };
    let mut adv = Script {
        rounds: vec![
            (s(&[]), unit(&[("a0", q(1, 1)), ("a1", q(1, 2)), ("a2", q(3, 4))])),
            (s(&["a1"]), unit(&[("a0", q(0, 1)), ("a2", q(0, 1))])),
            (s(&[]), unit(&[("a0", q(1, 4)), ("a1", q(1, 4)), ("a2", q(1, 4))])),
        ],
    };
    let mut ftl = FollowAwakeLeader::new(inst.clone());
    let h = run_game(&inst, &mut adv, &mut ftl, 3).unwrap();
    // Round 1: all tied at 0, a0. Round 2: a1 asleep; a0=1 > a2=3/4, a2.
    // Round 3: a0=1, a1=1/2, a2=3/4, a1.
    let chosen: Vec<_> = h.rounds().iter().map(|r| r.played().unwrap().clone()).collect();
    assert_eq!(chosen, vec![act(&["a0"]), act(&["a2"]), act(&["a1"])]);
    assert_eq!(h.total_algo_loss().unwrap(), q(5, 4));
    let again = run_game(&inst, &mut Script { rounds: adv.rounds.clone() }, &mut FollowAwakeLeader::new(inst.clone()), 3).unwrap();
    assert_eq!(h.to_csv_string().unwrap(), again.to_csv_string().unwrap());
    assert_eq!(ftl.cumulative(&act(&["a1"])), q(3, 4));
}

#[test]
fn protocol_violations() {
    let inst = anon_subsets(1, 2);
    let rounds = vec![(s1("a0"), unit(&[("a1", q(1, 2))]))];
    let err = run_game(&inst, &mut Script { rounds: rounds.clone() }, &mut Fixed(Some(act(&["a0"]))), 1);
    assert!(matches!(err, Err(Error::ProtocolViolation(_))));
    let err = run_game(&inst, &mut Script { rounds: rounds.clone() }, &mut Fixed(Some(act(&["a1", "a0"]))), 1);
    assert!(matches!(err, Err(Error::ProtocolViolation(_))));
    let err = run_game(&inst, &mut Script { rounds: rounds.clone() }, &mut Fixed(None), 1);
    assert!(matches!(err, Err(Error::ProtocolViolation(_))));
    let bad_sleep = vec![(s1("a7"), unit(&[("a0", q(0, 1)), ("a1", q(0, 1))]))];
    let err = run_game(&inst, &mut Script { rounds: bad_sleep }, &mut Fixed(Some(act(&["a0"]))), 1);
    assert!(matches!(err, Err(Error::ProtocolViolation(_))));
    let missing = vec![(SleepingSet::empty(), unit(&[("a0", q(0, 1))]))];
    let err = run_game(&inst, &mut Script { rounds: missing }, &mut Fixed(Some(act(&["a0"]))), 1);
    assert!(matches!(err, Err(Error::MissingLoss(_))));
    let out_of_range = vec![(SleepingSet::empty(), unit(&[("a0", q(-1, 2)), ("a1", q(0, 1))]))];
    let err = run_game(&inst, &mut Script { rounds: out_of_range }, &mut Fixed(Some(act(&["a0"]))), 1);
    assert!(matches!(err, Err(Error::UnsupportedLossRange(_))));
}

fn s1(l: &str) -> SleepingSet {
    [lab(l)].into_iter().collect()
}

#[test]
fn losses_on_sleeping_elements_are_dropped() {
    let inst = anon_subsets(1, 2);
    let rounds = vec![(s1("a0"), unit(&[("a0", q(1, 1)), ("a1", q(1, 2))]))];
    let h = run_game(&inst, &mut Script { rounds }, &mut Fixed(Some(act(&["a1"]))), 1).unwrap();
    assert_eq!(h.rounds()[0].losses.get(&lab("a0")), None);
}

#[test]
fn csv_layout() {
    let inst = anon_subsets(2, 3);
    let rounds = vec![(s1("a2"), unit(&[("a0", q(1, 2)), ("a1", q(1, 4))]))];
    let h = run_game(&inst, &mut Script { rounds }, &mut Fixed(Some(act(&["a0", "a1"]))), 1).unwrap();
    let csv = h.to_csv_string().unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("round,skipped,chosen_action,sleeping,algo_loss"));
    assert_eq!(lines.next(), Some("1,0,a0;a1,a2,3/4"));
}

struct RandomAdversary {
    labels: Vec<Label>,
    rng: ChaCha8Rng,
}

impl Adversary<Q> for RandomAdversary {
    fn sleeping(&mut self, _: usize, _: &GameHistory<Q>) -> SleepingSet {
        let rng = &mut self.rng;
        self.labels.iter().copied().filter(|_| rng.gen_bool(0.3)).collect()
    }

    fn losses(&mut self, _: usize, _: &SleepingSet, _: &GameHistory<Q>) -> LossFunction<Q> {
        let rng = &mut self.rng;
        LossFunction::from_pairs(LossRange::Signed, self.labels.iter().map(|l| (*l, q(rng.gen_range(-3..=3), 3))))
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn game_invariants(seed in any::<u64>(), family_ix in 0usize..6, rounds in 1usize..12) {
        let family = FamilyKind::ALL[family_ix];
        let inst = build_hard(family, 1).unwrap().instance;
        let mut adv = RandomAdversary { labels: inst.ground_set().elements().to_vec(), rng: ChaCha8Rng::seed_from_u64(seed) };
        let signed = !matches!(family, FamilyKind::MinCut);
        let h = if signed {
            run_game(&inst, &mut adv, &mut FollowAwakeLeader::new(inst.clone()), rounds).unwrap()
        } else {
            let mut adv = UnitOf(adv);
            run_game(&inst, &mut adv, &mut FollowAwakeLeader::new(inst.clone()), rounds).unwrap()
        };
        for r in h.rounds() {
            let awake = inst.awake_actions(&r.sleeping).unwrap();
            prop_assert_eq!(r.played().is_none(), awake.is_empty());
            if let Some(v) = r.played() {
                prop_assert!(v.is_awake(&r.sleeping) && inst.contains(v));
            }
            prop_assert!(r.losses.iter().all(|(l, _)| !r.sleeping.contains(l)));
        }
        for v in inst.enumerate().unwrap() {
            let mut fold = q(0, 1);
            for r in h.rounds() {
                if let (Some(p), true) = (r.played(), v.is_awake(&r.sleeping)) {
                    fold += action_loss(p, &r.losses).unwrap() - action_loss(&v, &r.losses).unwrap();
                }
            }
            prop_assert_eq!(per_action_regret(&h, &v).unwrap(), fold);
        }
    }

    #[test]
    fn improving_the_top_never_hurts(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = anon_subsets(1, 4);
        let h = random_history(&inst, 6, &mut rng);
        let order = inst.enumerate().unwrap();
        let base = replay_loss(&h, &order);
        // Swap the leader with any action whose total over the leader's
        // awake rounds is no larger; on nested awake sets this cannot hurt.
        let lead = &order[0];
        for j in 1..order.len() {
            let mut every_round_better = true;
            for r in h.rounds().iter().filter(|r| r.played().is_some()) {
                if !lead.is_awake(&r.sleeping) || !order[j].is_awake(&r.sleeping) {
                    every_round_better = false;
                    break;
                }
                if action_loss(&order[j], &r.losses).unwrap() > action_loss(lead, &r.losses).unwrap() {
                    every_round_better = false;
                }
            }
            if every_round_better {
                let mut swapped = order.clone();
                swapped.swap(0, j);
                prop_assert!(replay_loss(&h, &swapped) <= base);
            }
        }
    }
}

struct UnitOf(RandomAdversary);

impl Adversary<Q> for UnitOf {
    fn sleeping(&mut self, round: usize, history: &GameHistory<Q>) -> SleepingSet {
        self.0.sleeping(round, history)
    }

    fn losses(&mut self, round: usize, sleeping: &SleepingSet, history: &GameHistory<Q>) -> LossFunction<Q> {
        let raw = self.0.losses(round, sleeping, history);
        LossFunction::from_pairs(LossRange::Unit, raw.iter().map(|(l, v)| (*l, num_traits::Signed::abs(v))))
    }
}
