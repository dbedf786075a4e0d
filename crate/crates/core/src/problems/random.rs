//! Random small instances, sleeping sets and losses for oracle checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::game::{Adversary, GameHistory, LossFunction, LossRange};
use crate::label::{Label, SleepingSet};
use crate::scalar::Scalar;

use super::{FamilyKind, Graph, PermGrid, ProblemInstance};

/// A random instance small enough to enumerate, and the loss range its
/// solver accepts.
pub fn random_instance<R: Rng>(kind: FamilyKind, rng: &mut R) -> (ProblemInstance, LossRange) {
    loop {
        if let Some(out) = try_instance(kind, rng) {
            return out;
        }
    }
}

fn try_instance<R: Rng>(kind: FamilyKind, rng: &mut R) -> Option<(ProblemInstance, LossRange)> {
    match kind {
        FamilyKind::ShortestPath => {
            let v = rng.gen_range(2..=5);
            if rng.gen_bool(0.5) {
                // Forward edges only: a DAG, so signed losses are fine.
                let e = rng.gen_range(v..=2 * v + 2);
                let g = random_graph(rng, true, v, e, true);
                Some((ProblemInstance::shortest_path(g.with_terminals(0, v - 1).ok()?).ok()?, LossRange::Signed))
            } else {
                let directed = rng.gen_bool(0.5);
                let e = rng.gen_range(v..=2 * v + 2);
                let g = random_graph(rng, directed, v, e, false);
                Some((ProblemInstance::shortest_path(g.with_terminals(0, v - 1).ok()?).ok()?, LossRange::Unit))
            }
        }
        FamilyKind::SpanningTree => {
            let v = rng.gen_range(1..=5);
            let mut g = Graph::new(false, v);
            let mut next = 0;
            for x in 1..v {
                let y = rng.gen_range(0..x);
                g.add_edge(x, y, Label::Anon(next)).ok()?;
                next += 1;
            }
            for _ in 0..rng.gen_range(0..=v + 1) {
                let (x, y) = (rng.gen_range(0..v), rng.gen_range(0..v));
                if x != y {
                    g.add_edge(x, y, Label::Anon(next)).ok()?;
                    next += 1;
                }
            }
            Some((ProblemInstance::spanning_tree(g).ok()?, LossRange::Signed))
        }
        FamilyKind::KSubsets => {
            let d = rng.gen_range(1..=8);
            let k = rng.gen_range(0..=d);
            Some((ProblemInstance::k_subsets(k, (0..d as u32).map(Label::Anon).collect()).ok()?, LossRange::Signed))
        }
        FamilyKind::TruncatedPerm => {
            let m = rng.gen_range(1..=5);
            let k = rng.gen_range(1..=m.min(4));
            Some((ProblemInstance::truncated_perm(PermGrid::anonymous(k, m).ok()?).ok()?, LossRange::Signed))
        }
        FamilyKind::BipartiteMatching => {
            let (a, b) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
            let mut g = Graph::new(false, a + b);
            let edges = rng.gen_range(1..=a * b + 2) as u32;
            for id in 0..edges {
                g.add_edge(rng.gen_range(0..a), a + rng.gen_range(0..b), Label::Anon(id)).ok()?;
            }
            Some((ProblemInstance::bipartite_matching(g).ok()?, LossRange::Signed))
        }
        FamilyKind::MinCut => {
            let v = rng.gen_range(2..=5);
            let directed = rng.gen_bool(0.3);
            let e = rng.gen_range(1..=9);
            let g = random_graph(rng, directed, v, e, false);
            Some((ProblemInstance::min_cut(g.with_terminals(0, v - 1).ok()?).ok()?, LossRange::Unit))
        }
    }
}

/// `edges` edges with anonymous labels; `forward` orients every edge from
/// the smaller vertex to the larger.
pub fn random_graph<R: Rng>(rng: &mut R, directed: bool, vertices: usize, edges: usize, forward: bool) -> Graph {
    let mut g = Graph::new(directed, vertices);
    let mut next = 0;
    while next < edges as u32 {
        let (x, y) = (rng.gen_range(0..vertices), rng.gen_range(0..vertices));
        if x == y {
            continue;
        }
        let (x, y) = if forward { (x.min(y), x.max(y)) } else { (x, y) };
        g.add_edge(x, y, Label::Anon(next)).expect("fresh label, valid endpoints");
        next += 1;
    }
    g
}

/// Each element sleeps independently with probability `rate`.
pub fn random_sleeping<R: Rng>(instance: &ProblemInstance, rate: f64, rng: &mut R) -> SleepingSet {
    instance.ground_set().elements().iter().copied().filter(|_| rng.gen_bool(rate)).collect()
}

/// Losses on every element, multiples of `1/den` within `range`.
pub fn random_losses<S: Scalar, R: Rng>(
    instance: &ProblemInstance,
    range: LossRange,
    den: i64,
    rng: &mut R,
) -> LossFunction<S> {
    let lo = match range {
        LossRange::Signed => -den,
        LossRange::Unit => 0,
    };
    LossFunction::from_pairs(
        range,
        instance.ground_set().elements().iter().map(|l| (*l, S::from_ratio(rng.gen_range(lo..=den), den))),
    )
}

/// Losses drawn uniformly from the continuous range.
pub fn random_float_losses<R: Rng>(instance: &ProblemInstance, range: LossRange, rng: &mut R) -> LossFunction<f64> {
    let lo = match range {
        LossRange::Signed => -1.0,
        LossRange::Unit => 0.0,
    };
    LossFunction::from_pairs(range, instance.ground_set().elements().iter().map(|l| (*l, rng.gen_range(lo..=1.0))))
}

/// Oblivious adversary: each element sleeps with probability `rate`; awake
/// losses are multiples of `1/den` drawn uniformly from the range.
#[derive(Clone, Debug)]
pub struct RandomAdversary {
    labels: Vec<Label>,
    rate: f64,
    range: LossRange,
    den: i64,
    rng: ChaCha8Rng,
}

impl RandomAdversary {
    pub fn new(instance: &ProblemInstance, rate: f64, range: LossRange, den: i64, seed: u64) -> RandomAdversary {
        RandomAdversary {
            labels: instance.ground_set().elements().to_vec(),
            rate,
            range,
            den: den.max(1),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl<S: Scalar> Adversary<S> for RandomAdversary {
    fn sleeping(&mut self, _round: usize, _history: &GameHistory<S>) -> SleepingSet {
        let (rng, rate) = (&mut self.rng, self.rate);
        self.labels.iter().copied().filter(|_| rng.gen_bool(rate)).collect()
    }

    fn losses(&mut self, _round: usize, sleeping: &SleepingSet, _history: &GameHistory<S>) -> LossFunction<S> {
        let lo = match self.range {
            LossRange::Signed => -self.den,
            LossRange::Unit => 0,
        };
        let (rng, den) = (&mut self.rng, self.den);
        LossFunction::from_pairs(
            self.range,
            self.labels
                .iter()
                .filter(|l| !sleeping.contains(l))
                .map(|l| (*l, S::from_ratio(rng.gen_range(lo..=den), den))),
        )
    }
}
