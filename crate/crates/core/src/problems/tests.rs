use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::random::{random_float_losses, random_instance, random_losses, random_sleeping};
use super::*;
use crate::hard::{build_hard, parallel_series_graph, stage_graph};
use crate::{LossFunction, LossRange, Q};

fn act(labels: &[&str]) -> Action {
    labels.iter().map(|s| s.parse::<Label>().unwrap()).collect()
}

fn anon(d: u32) -> Vec<Label> {
    (0..d).map(Label::Anon).collect()
}

#[test]
fn k_subset_membership() {
    let inst = ProblemInstance::k_subsets(2, anon(4)).unwrap();
    assert!(inst.contains(&act(&["a0", "a3"])));
    assert!(!inst.contains(&act(&["a0"])));
    assert!(!inst.contains(&act(&["a0", "a9"])));
}

#[test]
fn stage_graph_paths() {
    let inst = ProblemInstance::shortest_path(stage_graph(1, true)).unwrap();
    assert!(inst.contains(&act(&["1:0", "T"])));
    assert!(!inst.contains(&act(&["1:0", "1:1"])));
    assert!(!inst.contains(&act(&["1:0"])));
    let all = inst.enumerate().unwrap();
    assert_eq!(all.len(), 6);
    assert!(all.iter().all(|p| p.len() == 2));
}

#[test]
fn stage_graph_awake_after_sleeping_two_tags() {
    let inst = ProblemInstance::shortest_path(stage_graph(1, true)).unwrap();
    let s: SleepingSet = act(&["1:0", "1:1"]).iter().copied().collect();
    let awake = inst.awake_actions(&s).unwrap();
    assert_eq!(awake, vec![act(&["1:*", "F"]), act(&["1:*", "T"])]);
    assert_eq!(inst.awake_actions(&SleepingSet::empty()).unwrap().len(), 6);
    let everything: SleepingSet = inst.ground_set().elements().iter().copied().collect();
    assert!(inst.awake_actions(&everything).unwrap().is_empty());
}

#[test]
fn single_branch_is_not_a_cut() {
    let inst = ProblemInstance::min_cut(parallel_series_graph(1)).unwrap();
    assert!(!inst.contains(&act(&["1:0"])));
    assert!(inst.contains(&act(&["1:0", "F"])));
    assert!(inst.contains(&inst.ground_set().elements().iter().copied().collect()));
}

#[test]
fn hard_k_subsets_count() {
    let hi = build_hard(FamilyKind::KSubsets, 1).unwrap();
    assert_eq!(hi.instance.enumerate().unwrap().len(), 10);
}

#[test]
fn single_edge_spanning_tree() {
    let mut g = Graph::new(false, 2);
    g.add_edge(0, 1, Label::Anon(0)).unwrap();
    let inst = ProblemInstance::spanning_tree(g).unwrap();
    assert_eq!(inst.enumerate().unwrap(), vec![act(&["a0"])]);
}

#[test]
fn two_smallest_k_subset() {
    let inst = ProblemInstance::k_subsets(2, anon(4)).unwrap();
    let losses = LossFunction::from_pairs(LossRange::Unit, anon(4).into_iter().zip([0.1, 0.2, 0.3, 0.4]));
    let (a, v) = inst.min_loss_awake(&SleepingSet::empty(), &losses).unwrap().unwrap();
    assert_eq!(a, act(&["a0", "a1"]));
    assert!((v - 0.3f64).abs() < 1e-12);
}

#[test]
fn zero_losses_give_zero() {
    for family in FamilyKind::ALL {
        let hi = build_hard(family, 1).unwrap();
        let zero = LossFunction::constant(hi.instance.ground_set().elements().iter().copied(), Q::from_integer(0));
        let (a, v) = hi.instance.min_loss_awake(&SleepingSet::empty(), &zero).unwrap().unwrap();
        assert_eq!(v, Q::from_integer(0));
        assert!(hi.instance.contains(&a));
    }
}

#[test]
fn cap_is_enforced() {
    let inst = ProblemInstance::k_subsets(3, anon(10)).unwrap().with_enum_cap(50);
    assert!(matches!(inst.enumerate(), Err(Error::TooLarge { cap: 50, .. })));
    assert_eq!(inst.count_up_to(200).unwrap(), Some(120));
    assert_eq!(inst.count_up_to(100).unwrap(), None);
}

#[test]
fn negative_losses_rejected_where_unsupported() {
    let cut = ProblemInstance::min_cut(parallel_series_graph(1)).unwrap();
    let neg = LossFunction::constant(cut.ground_set().elements().iter().copied(), -0.5);
    assert!(matches!(cut.min_loss_awake(&SleepingSet::empty(), &neg), Err(Error::UnsupportedLossRange(_))));

    let mut g = Graph::new(false, 3);
    for (i, (u, v)) in [(0, 1), (1, 2), (0, 2)].into_iter().enumerate() {
        g.add_edge(u, v, Label::Anon(i as u32)).unwrap();
    }
    let sp = ProblemInstance::shortest_path(g.with_terminals(0, 2).unwrap()).unwrap();
    let neg = LossFunction::constant(sp.ground_set().elements().iter().copied(), -0.5);
    assert!(matches!(sp.min_loss_awake(&SleepingSet::empty(), &neg), Err(Error::UnsupportedLossRange(_))));

    // Negative losses are fine on a DAG.
    let dag = ProblemInstance::shortest_path(stage_graph(2, true)).unwrap();
    let neg = LossFunction::constant(dag.ground_set().elements().iter().copied(), -1.0);
    let (_, v) = dag.min_loss_awake(&SleepingSet::empty(), &neg).unwrap().unwrap();
    assert!((v + 3.0f64).abs() < 1e-12);
}

#[test]
fn missing_awake_loss_is_reported() {
    let inst = ProblemInstance::k_subsets(1, anon(2)).unwrap();
    let partial = LossFunction::from_pairs(LossRange::Unit, [(Label::Anon(0), 0.5)]);
    assert!(matches!(inst.min_loss_awake(&SleepingSet::empty(), &partial), Err(Error::MissingLoss(_))));
}

#[test]
fn sleeping_path_blocks_every_cut() {
    let mut g = Graph::new(false, 3);
    g.add_edge(0, 1, Label::Anon(0)).unwrap();
    g.add_edge(1, 2, Label::Anon(1)).unwrap();
    g.add_edge(0, 2, Label::Anon(2)).unwrap();
    let inst = ProblemInstance::min_cut(g.with_terminals(0, 2).unwrap()).unwrap();
    let s: SleepingSet = [Label::Anon(0), Label::Anon(1)].into_iter().collect();
    let losses = LossFunction::constant(inst.ground_set().awake(&s), 0.25);
    assert_eq!(inst.min_loss_awake(&s, &losses).unwrap(), None);
    assert!(!inst.has_awake(&s).unwrap());
}

#[test]
fn kinds_round_trip() {
    for k in FamilyKind::ALL {
        assert_eq!(k.name().parse::<FamilyKind>().unwrap(), k);
    }
    assert!("nope".parse::<FamilyKind>().is_err());
}

fn solver_matches_enumeration(kind: FamilyKind, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..100 {
        let (inst, range) = random_instance(kind, &mut rng);
        let sleeping = random_sleeping(&inst, 0.3, &mut rng);
        let losses: LossFunction<Q> = random_losses(&inst, range, 6, &mut rng);
        let got = inst.min_loss_awake(&sleeping, &losses).unwrap();
        let want = min_by_enumeration(&inst, &sleeping, &losses).unwrap();
        assert_eq!(got.as_ref().map(|g| g.1), want.as_ref().map(|w| w.1), "{kind} case {case}");
        assert_eq!(inst.has_awake(&sleeping).unwrap(), want.is_some(), "{kind} case {case}");
        if let Some((a, v)) = got {
            assert!(a.is_awake(&sleeping) && inst.contains(&a), "{kind} case {case}: {a}");
            assert_eq!(losses.action_loss(&a).unwrap(), v);
        }

        let floats = random_float_losses(&inst, range, &mut rng);
        let got = inst.min_loss_awake(&sleeping, &floats).unwrap().map(|g| g.1);
        let want = min_by_enumeration(&inst, &sleeping, &floats).unwrap().map(|w| w.1);
        match (got, want) {
            (Some(g), Some(w)) => assert!((g - w).abs() <= 1e-9, "{kind} case {case}: {g} vs {w}"),
            (g, w) => assert_eq!(g.is_some(), w.is_some()),
        }
    }
}

#[test]
fn solver_oracle_shortest_path() {
    solver_matches_enumeration(FamilyKind::ShortestPath, 100);
}

#[test]
fn solver_oracle_spanning_tree() {
    solver_matches_enumeration(FamilyKind::SpanningTree, 101);
}

#[test]
fn solver_oracle_k_subsets() {
    solver_matches_enumeration(FamilyKind::KSubsets, 102);
}

#[test]
fn solver_oracle_truncated_perm() {
    solver_matches_enumeration(FamilyKind::TruncatedPerm, 103);
}

#[test]
fn solver_oracle_bipartite_matching() {
    solver_matches_enumeration(FamilyKind::BipartiteMatching, 104);
}

#[test]
fn solver_oracle_min_cut() {
    solver_matches_enumeration(FamilyKind::MinCut, 105);
}

#[test]
fn membership_agrees_with_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for kind in FamilyKind::ALL {
        for _ in 0..20 {
            let (inst, _) = random_instance(kind, &mut rng);
            let all: BTreeSet<Action> = inst.enumerate().unwrap().into_iter().collect();
            assert!(all.iter().all(|a| inst.contains(a)));
            let d = inst.ground_set().size();
            if d <= 10 {
                let elems = inst.ground_set().elements();
                for mask in 0u32..1 << d {
                    let a: Action = (0..d).filter(|&i| mask >> i & 1 == 1).map(|i| elems[i]).collect();
                    assert_eq!(inst.contains(&a), all.contains(&a), "{kind}: {a}");
                }
            }
        }
    }
}

#[test]
fn grid_truncated_perm_members_have_k_edges() {
    let hi = build_hard(FamilyKind::TruncatedPerm, 1).unwrap();
    let all = hi.instance.enumerate().unwrap();
    assert_eq!(all.len(), 5 * 4);
    assert!(all.iter().all(|a| a.len() == 2));
    assert!(hi.instance.contains(&act(&["1:*", "T"])));
}
