use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::hard::build_hard;
use crate::problems::FamilyKind;

fn opts() -> VerifyOptions {
    VerifyOptions::default()
}

#[test]
fn k_subsets_sizes() {
    let base = ProblemInstance::k_subsets(2, (0..5).map(Label::Anon).collect()).unwrap();
    let ext = extend(&base, 3).unwrap();
    assert_eq!(ext.derived.ground_set().size(), 11);
    assert!(matches!(ext.derived.family(), Family::KSubsets { k: 5 }));
    assert_eq!(ext.distinguished().len(), 6);
    assert!(ext.permanently_sleeping.is_empty());
}

#[test]
fn shortest_path_chain_lengthens_every_path() {
    let base = build_hard(FamilyKind::ShortestPath, 1).unwrap().instance;
    let ext = extend(&base, 2).unwrap();
    let paths = ext.derived.enumerate().unwrap();
    assert_eq!(paths.len(), 6 * 4);
    assert!(paths.iter().all(|p| p.len() == 4));
}

#[test]
fn pi_strips_bits() {
    for family in FamilyKind::ALL {
        let base = build_hard(family, 1).unwrap().instance;
        let ext = extend(&base, 1).unwrap();
        for v in base.enumerate().unwrap() {
            let lifted = ext.bit_action(&[false]).union(&v);
            assert_eq!(ext.pi(&lifted).unwrap(), v, "{family}");
            assert_eq!(ext.pi(&lifted).unwrap(), ext.pi(&lifted).unwrap());
        }
    }
}

#[test]
fn properties_hold_for_all_families() {
    for family in FamilyKind::ALL {
        for n in 1..=2 {
            let base = build_hard(family, n).unwrap().instance;
            for p in 1..=3 {
                let ext = extend(&base, p).unwrap();
                let v1 = verify_property1(&ext, &opts()).unwrap();
                let v2 = verify_property2(&ext, &opts()).unwrap();
                assert!(v1.holds && v1.mode == CheckMode::Exhaustive, "{family} n={n} p={p}: {v1:?}");
                assert!(v2.holds && v2.mode == CheckMode::Exhaustive, "{family} n={n} p={p}: {v2:?}");
                assert!(v1.checked > 0 && v2.checked > 0);
            }
        }
    }
}

#[test]
fn parallel_min_cut_gadget_fails_property2() {
    let base = build_hard(FamilyKind::MinCut, 1).unwrap().instance;
    let ext = extend_with(&base, 2, MinCutGadget::Parallel).unwrap();
    let v = verify_property2(&ext, &opts()).unwrap();
    assert!(!v.holds);
    let witness: Action = v.counterexample.unwrap().split(';').map(|l| l.parse().unwrap()).collect();
    assert!(!ext.derived.contains(&witness));
    assert_eq!(witness.count_in(&ext.distinguished()), 2);
    // Property 1 is unaffected.
    assert!(verify_property1(&ext, &opts()).unwrap().holds);
}

#[test]
fn intersect_projection_breaks_k_subsets() {
    let base = build_hard(FamilyKind::KSubsets, 1).unwrap().instance;
    let ext = ExtendedInstance { projection: Projection::Intersect, ..extend(&base, 2).unwrap() };
    let v = verify_property1(&ext, &opts()).unwrap();
    assert!(!v.holds);
    let witness: Action = v.counterexample.unwrap().split(';').map(|l| l.parse().unwrap()).collect();
    assert!(witness.count_in(&ext.distinguished()) < ext.p);
}

#[test]
fn k_subsets_projection_size() {
    let base = build_hard(FamilyKind::KSubsets, 2).unwrap().instance;
    let ext = extend(&base, 3).unwrap();
    let all_bits = ext.distinguished();
    for v in ext.derived.enumerate_within(&ext.base_and_bits()).unwrap() {
        let bits = v.count_in(&all_bits);
        if bits <= ext.p {
            let pi = ext.pi(&v).unwrap();
            assert_eq!(pi.len(), 3);
            assert!(base.contains(&pi));
        }
    }
}

#[test]
fn single_bit_membership_is_contains() {
    for family in FamilyKind::ALL {
        let base = build_hard(family, 1).unwrap().instance;
        let ext = extend(&base, 1).unwrap();
        for v in base.enumerate().unwrap() {
            for b in [false, true] {
                assert!(ext.derived.contains(&ext.bit_action(&[b]).union(&v)));
            }
        }
    }
}

#[test]
fn permanently_sleeping_is_honored() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for family in FamilyKind::ALL {
        let base = build_hard(family, 1).unwrap().instance;
        let ext = extend(&base, 2).unwrap();
        if family == FamilyKind::TruncatedPerm {
            // (k+p)(m+2p) - km - 2p unintended edges.
            assert_eq!(ext.permanently_sleeping.len(), 4 * 9 - 10 - 4);
        } else {
            assert!(ext.permanently_sleeping.is_empty(), "{family}");
        }
        for _ in 0..30 {
            let bits: Vec<bool> = (0..2).map(|_| rng.gen()).collect();
            let mut s: SleepingSet = base.ground_set().elements().iter().copied().filter(|_| rng.gen_bool(0.2)).collect();
            s.extend(ext.sleeping_bits(&bits));
            s.extend(ext.permanently_sleeping.iter().copied());
            let losses = LossFunction::from_pairs(
                LossRange::Unit,
                ext.derived.ground_set().awake(&s).into_iter().map(|l| (l, rng.gen::<f64>())),
            );
            let got = ext.derived.min_loss_awake(&s, &losses).unwrap();
            let base_awake = base.has_awake(&s.labels().iter().filter(|l| base.ground_set().contains(l)).copied().collect()).unwrap();
            assert_eq!(got.is_some(), base_awake, "{family}");
            if let Some((v, _)) = got {
                assert!(v.members().is_disjoint(&ext.permanently_sleeping));
                assert!(v.is_awake(&s));
                assert!(base.contains(&ext.pi(&v).unwrap()));
            }
            for v in ext.derived.awake_actions(&s).unwrap() {
                assert!(v.members().is_disjoint(&ext.permanently_sleeping));
            }
        }
    }
}

#[test]
fn p_zero_rejected() {
    let base = build_hard(FamilyKind::KSubsets, 1).unwrap().instance;
    assert!(extend(&base, 0).is_err());
}

fn best_time(base: &ProblemInstance, p: usize, reps: usize) -> f64 {
    (0..5)
        .map(|_| {
            let start = Instant::now();
            for _ in 0..reps {
                std::hint::black_box(extend(base, p).unwrap());
            }
            start.elapsed().as_secs_f64()
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn construction_time_grows_polynomially() {
    for family in FamilyKind::ALL {
        let base = build_hard(family, 2).unwrap().instance;
        let small = best_time(&base, 16, 20);
        let large = best_time(&base, 32, 20);
        let limit = if family == FamilyKind::TruncatedPerm { 8.0 } else { 4.0 };
        assert!(large < limit * small.max(1e-4), "{family}: {small:.5}s -> {large:.5}s");
    }
}
