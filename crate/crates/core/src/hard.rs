//! Hard instances with parameter `n` and verifiers for their two properties:
//! every action uses at least `n + 1` special elements (heaviness), and every
//! one-per-group selection of special elements is an action (richness).

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{LossFunction, LossRange};
use crate::label::{Action, Label, SleepingSet, Tag};
use crate::problems::{FamilyKind, Graph, PermGrid, ProblemInstance};

/// Largest `n` for which the `2 * 3^n` richness patterns are enumerated.
pub const RICHNESS_MAX_N: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HardInstance {
    pub instance: ProblemInstance,
    pub n: usize,
    /// The `3n + 2` special elements. Their labels are the bijection.
    pub special: BTreeSet<Label>,
}

/// `(1,0), (1,1), (1,*), ..., (n,*), F, T`.
pub fn special_labels(n: usize) -> Vec<Label> {
    let mut out: Vec<Label> = (1..=n as u32).flat_map(|i| Tag::ALL.map(|t| Label::tagged(i, t))).collect();
    out.push(Label::F);
    out.push(Label::T);
    out
}

/// Constant `c` with `d <= c * n^2` for the family's hard instance.
pub fn size_constant(family: FamilyKind) -> usize {
    match family {
        FamilyKind::TruncatedPerm => 10,
        _ => 5,
    }
}

/// Chain of `n` stages of three parallel edges then a stage of two (`F`, `T`).
/// Vertex `0` is `s`, vertex `n + 1` is `t`.
pub fn stage_graph(n: usize, directed: bool) -> Graph {
    let mut g = Graph::new(directed, n + 2);
    for i in 1..=n {
        for tag in Tag::ALL {
            g.add_edge(i - 1, i, Label::tagged(i as u32, tag)).expect("fresh labels");
        }
    }
    g.add_edge(n, n + 1, Label::F).expect("fresh label");
    g.add_edge(n, n + 1, Label::T).expect("fresh label");
    g.with_terminals(0, n + 1).expect("distinct terminals")
}

/// `n` node pairs joined by three parallel edges, one pair joined by `F`, `T`.
pub fn pair_graph(n: usize) -> Graph {
    let mut g = Graph::new(false, 2 * (n + 1));
    for i in 0..n {
        for tag in Tag::ALL {
            g.add_edge(2 * i, 2 * i + 1, Label::tagged(i as u32 + 1, tag)).expect("fresh labels");
        }
    }
    g.add_edge(2 * n, 2 * n + 1, Label::F).expect("fresh label");
    g.add_edge(2 * n, 2 * n + 1, Label::T).expect("fresh label");
    g
}

/// `n + 1` internally disjoint `s`-`t` paths: path `i <= n` is three edges in
/// series `(i,0), (i,1), (i,*)`, the last path is `F` then `T`.
/// Vertex `0` is `s`, vertex `1` is `t`.
pub fn parallel_series_graph(n: usize) -> Graph {
    let mut g = Graph::new(false, 2);
    let (s, t) = (0, 1);
    for i in 1..=n as u32 {
        let x = g.add_vertex();
        let y = g.add_vertex();
        g.add_edge(s, x, Label::tagged(i, Tag::Zero)).expect("fresh label");
        g.add_edge(x, y, Label::tagged(i, Tag::One)).expect("fresh label");
        g.add_edge(y, t, Label::tagged(i, Tag::Star)).expect("fresh label");
    }
    let z = g.add_vertex();
    g.add_edge(s, z, Label::F).expect("fresh label");
    g.add_edge(z, t, Label::T).expect("fresh label");
    g.with_terminals(s, t).expect("distinct terminals")
}

/// Complete bipartite `(n+1) x (3n+2)` grid. Row `i - 1` joins columns
/// `3(i-1) + {0,1,2}` by `(i,0), (i,1), (i,*)`; the last row joins columns
/// `3n`, `3n + 1` by `F`, `T`. Every other edge is anonymous.
pub fn special_grid(n: usize) -> PermGrid {
    let (k, m) = (n + 1, 3 * n + 2);
    let mut next = 0u32;
    let labels = (0..k)
        .map(|row| {
            (0..m)
                .map(|col| {
                    if row < n && col / 3 == row {
                        Label::tagged(row as u32 + 1, Tag::ALL[col % 3])
                    } else if row == n && col == 3 * n {
                        Label::F
                    } else if row == n && col == 3 * n + 1 {
                        Label::T
                    } else {
                        next += 1;
                        Label::Anon(next - 1)
                    }
                })
                .collect()
        })
        .collect();
    PermGrid::new(labels).expect("grid labels are distinct")
}

pub fn build_hard(family: FamilyKind, n: usize) -> Result<HardInstance> {
    if n == 0 {
        return Err(Error::InvalidInput("hard instances need n >= 1".into()));
    }
    let instance = match family {
        FamilyKind::ShortestPath => ProblemInstance::shortest_path(stage_graph(n, true))?,
        FamilyKind::SpanningTree => ProblemInstance::spanning_tree(stage_graph(n, false))?,
        FamilyKind::KSubsets => ProblemInstance::k_subsets(n + 1, special_labels(n))?,
        FamilyKind::TruncatedPerm => ProblemInstance::truncated_perm(special_grid(n))?,
        FamilyKind::BipartiteMatching => ProblemInstance::bipartite_matching(pair_graph(n))?,
        FamilyKind::MinCut => ProblemInstance::min_cut(parallel_series_graph(n))?,
    };
    Ok(HardInstance { instance, n, special: special_labels(n).into_iter().collect() })
}

/// `{(1, s_1), ..., (n, s_n), terminal}`.
pub fn pattern_action(tags: &[Tag], terminal: Label) -> Action {
    tags.iter()
        .enumerate()
        .map(|(i, &t)| Label::tagged(i as u32 + 1, t))
        .chain(std::iter::once(terminal))
        .collect()
}

/// All `2 * 3^n` richness patterns.
pub fn sign_patterns(n: usize) -> impl Iterator<Item = (Vec<Tag>, Label)> {
    let total = 3usize.pow(n as u32);
    (0..total).flat_map(move |code| {
        let mut c = code;
        let tags: Vec<Tag> = (0..n)
            .map(|_| {
                let t = Tag::ALL[c % 3];
                c /= 3;
                t
            })
            .collect();
        [Label::F, Label::T].into_iter().map(move |term| (tags.clone(), term))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CheckMode {
    Exhaustive,
    /// Solver spot checks after the enumeration budget ran out.
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub property: String,
    pub holds: bool,
    pub mode: CheckMode,
    pub checked: usize,
    pub counterexample: Option<String>,
}

impl Verdict {
    pub(crate) fn new(property: &str, mode: CheckMode, checked: usize, counterexample: Option<&Action>) -> Verdict {
        Verdict {
            property: property.to_string(),
            holds: counterexample.is_none(),
            mode,
            checked,
            counterexample: counterexample.map(|a| a.to_field()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Most actions streamed before falling back to sampling.
    pub budget: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { budget: 2_000_000, samples: 200, seed: 0 }
    }
}

/// Every action has at least `n + 1` elements, the bound the disjunction
/// losses rely on.
pub fn verify_heaviness(hi: &HardInstance, opts: &VerifyOptions) -> Result<Verdict> {
    let all = hi.instance.ground_set().as_set().clone();
    count_check(hi, "heaviness", &all, opts)
}

/// Every action has at least `n + 1` elements of `U_s`. Fails on the
/// truncated-permutation grid, whose matchings may use anonymous edges only.
pub fn verify_special_heaviness(hi: &HardInstance, opts: &VerifyOptions) -> Result<Verdict> {
    count_check(hi, "special-heaviness", &hi.special, opts)
}

fn count_check(hi: &HardInstance, property: &str, counted: &BTreeSet<Label>, opts: &VerifyOptions) -> Result<Verdict> {
    let need = hi.n + 1;
    let mut checked = 0usize;
    let mut bad: Option<Action> = None;
    let mut over_budget = false;
    let _ = hi.instance.for_each_within(hi.instance.ground_set().as_set(), &mut |a| {
        if checked == opts.budget {
            over_budget = true;
            return ControlFlow::Break(());
        }
        checked += 1;
        if a.count_in(counted) < need {
            bad = Some(a);
            return ControlFlow::Break(());
        }
        ControlFlow::Continue(())
    })?;
    if !over_budget {
        return Ok(Verdict::new(property, CheckMode::Exhaustive, checked, bad.as_ref()));
    }

    // Unit losses on counted elements make the minimum the fewest-counted action.
    let ground = hi.instance.ground_set();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let indicator = LossFunction::from_pairs(
        LossRange::Unit,
        ground.elements().iter().map(|l| (*l, if counted.contains(l) { 1.0 } else { 0.0 })),
    );
    let mut draws = vec![(SleepingSet::empty(), indicator)];
    for _ in 0..opts.samples {
        let sleeping: SleepingSet = ground.elements().iter().copied().filter(|_| rng.gen_bool(0.2)).collect();
        let losses =
            LossFunction::from_pairs(LossRange::Unit, ground.elements().iter().map(|l| (*l, rng.gen::<f64>())));
        draws.push((sleeping, losses));
    }
    for (i, (sleeping, losses)) in draws.iter().enumerate() {
        if let Some((a, _)) = hi.instance.min_loss_awake(sleeping, losses)? {
            if a.count_in(counted) < need {
                return Ok(Verdict::new(property, CheckMode::Sampled, i + 1, Some(&a)));
            }
        }
    }
    Ok(Verdict::new(property, CheckMode::Sampled, draws.len(), None))
}

pub fn verify_richness(hi: &HardInstance) -> Result<Verdict> {
    if hi.n > RICHNESS_MAX_N {
        return Err(Error::TooLarge { what: format!("richness patterns for n={}", hi.n), cap: RICHNESS_MAX_N });
    }
    let mut checked = 0;
    for (tags, term) in sign_patterns(hi.n) {
        checked += 1;
        let a = pattern_action(&tags, term);
        if !hi.instance.contains(&a) {
            return Ok(Verdict::new("richness", CheckMode::Exhaustive, checked, Some(&a)));
        }
    }
    Ok(Verdict::new("richness", CheckMode::Exhaustive, checked, None))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_match_constructions() {
        let sp = build_hard(FamilyKind::ShortestPath, 1).unwrap();
        assert_eq!(sp.instance.ground_set().size(), 5);
        assert_eq!(sp.instance.enumerate().unwrap().len(), 6);
        assert!(sp.instance.enumerate().unwrap().iter().all(|a| a.len() == 2));

        let tp = build_hard(FamilyKind::TruncatedPerm, 2).unwrap();
        let grid = match tp.instance.family() {
            crate::problems::Family::TruncatedPerm(g) => g.clone(),
            _ => unreachable!(),
        };
        assert_eq!((grid.k(), grid.m()), (3, 8));
        assert_eq!(tp.instance.ground_set().size(), 24);

        let ks = build_hard(FamilyKind::KSubsets, 3).unwrap();
        assert_eq!(ks.instance.ground_set().size(), 11);
        assert_eq!(ks.instance.max_action_size(), 4);
    }

    #[test]
    fn ground_size_bounds() {
        for family in FamilyKind::ALL {
            for n in 1..=4 {
                let hi = build_hard(family, n).unwrap();
                let d = hi.instance.ground_set().size();
                assert_eq!(hi.special.len(), 3 * n + 2);
                assert!(hi.special.is_subset(hi.instance.ground_set().as_set()));
                assert!(d >= 3 * n + 2 && d <= size_constant(family) * n * n, "{family} n={n} d={d}");
                if family == FamilyKind::TruncatedPerm {
                    assert_eq!(d, (n + 1) * (3 * n + 2));
                } else {
                    assert_eq!(d, 3 * n + 2);
                }
            }
        }
    }

    #[test]
    fn exact_action_size_for_paths_and_pair_matchings() {
        for family in [FamilyKind::ShortestPath, FamilyKind::BipartiteMatching, FamilyKind::SpanningTree] {
            for n in 1..=3 {
                let hi = build_hard(family, n).unwrap();
                assert!(hi.instance.enumerate().unwrap().iter().all(|a| a.len() == n + 1));
            }
        }
    }

    #[test]
    fn shortcut_breaks_heaviness() {
        let mut g = stage_graph(2, true);
        g.add_edge(0, 3, Label::Anon(0)).unwrap();
        let hi = HardInstance {
            instance: ProblemInstance::shortest_path(g).unwrap(),
            n: 2,
            special: special_labels(2).into_iter().collect(),
        };
        let v = verify_heaviness(&hi, &VerifyOptions::default()).unwrap();
        assert!(!v.holds);
        assert_eq!(v.counterexample.as_deref(), Some("a0"));
        assert!(verify_richness(&hi).unwrap().holds);
    }

    #[test]
    fn deleted_series_edge_breaks_richness() {
        let full = parallel_series_graph(1);
        let mut g = Graph::new(false, full.num_vertices());
        for e in full.edges().iter().filter(|e| e.label != Label::tagged(1, Tag::One)) {
            g.add_edge(e.u, e.v, e.label).unwrap();
        }
        let g = g.with_terminals(0, 1).unwrap();
        let hi = HardInstance {
            instance: ProblemInstance::min_cut(g).unwrap(),
            n: 1,
            special: special_labels(1).into_iter().collect(),
        };
        let v = verify_richness(&hi).unwrap();
        assert!(!v.holds);
        assert!(v.counterexample.unwrap().starts_with("1:1"));
    }

    #[test]
    fn star_pattern_is_a_pair_matching() {
        let hi = build_hard(FamilyKind::BipartiteMatching, 1).unwrap();
        assert!(hi.instance.contains(&pattern_action(&[Tag::Star], Label::T)));
    }

    #[test]
    fn special_heaviness_fails_only_on_the_grid() {
        for family in FamilyKind::ALL {
            let hi = build_hard(family, 2).unwrap();
            let v = verify_special_heaviness(&hi, &VerifyOptions::default()).unwrap();
            assert_eq!(v.holds, family != FamilyKind::TruncatedPerm, "{family}");
        }
    }

    #[test]
    fn sampled_mode_kicks_in_past_budget() {
        let hi = build_hard(FamilyKind::TruncatedPerm, 2).unwrap();
        let v = verify_heaviness(&hi, &VerifyOptions { budget: 10, samples: 20, seed: 3 }).unwrap();
        assert_eq!(v.mode, CheckMode::Sampled);
        assert!(v.holds);
        assert_eq!(v.checked, 21);
    }

    #[test]
    fn pattern_count() {
        assert_eq!(sign_patterns(0).count(), 2);
        assert_eq!(sign_patterns(3).count(), 54);
        let all: BTreeSet<_> = sign_patterns(2).map(|(t, l)| pattern_action(&t, l)).collect();
        assert_eq!(all.len(), 18);
    }
}
