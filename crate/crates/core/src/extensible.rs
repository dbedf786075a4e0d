//! Extensible structure: grafting `p` pairs of bit elements `(i,0), (i,1)`
//! onto an instance so that any bit pattern joined with any base action is a
//! derived action, plus the projection back to base actions.

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::{LossFunction, LossRange};
use crate::hard::{CheckMode, Verdict, VerifyOptions};
use crate::label::{Action, Label, SleepingSet};
use crate::problems::{Family, Graph, PermGrid, ProblemInstance};

/// Largest `p` whose `2^p` bit patterns are enumerated exhaustively.
pub const PATTERN_MAX_P: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MinCutGadget {
    /// A fresh node `w_i` with `s - w_i` labeled `(i,0)` and `w_i - t` labeled `(i,1)`.
    #[default]
    Series,
    /// Both `(i,0)` and `(i,1)` as parallel `s - t` edges. Fails property 2.
    Parallel,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Projection {
    /// `V' ∩ U`.
    Intersect,
    /// The label-lexicographically smallest `k`-subset of `V' ∩ U`.
    SmallestKSubset { k: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtendedInstance {
    pub base: ProblemInstance,
    pub derived: ProblemInstance,
    pub p: usize,
    /// Elements of `U' \ (U ∪ L)`; always sleeping in the reduction.
    pub permanently_sleeping: BTreeSet<Label>,
    pub projection: Projection,
}

impl ExtendedInstance {
    pub fn bit_label(i: usize, value: bool) -> Label {
        Label::bit(i as u32, value)
    }

    /// The `2p` distinguished labels `L`.
    pub fn distinguished(&self) -> BTreeSet<Label> {
        (1..=self.p).flat_map(|i| [Self::bit_label(i, false), Self::bit_label(i, true)]).collect()
    }

    /// `U ∪ L`.
    pub fn base_and_bits(&self) -> BTreeSet<Label> {
        let mut s = self.base.ground_set().as_set().clone();
        s.extend(self.distinguished());
        s
    }

    /// `{(1, b_1), ..., (p, b_p)}`.
    pub fn bit_action(&self, bits: &[bool]) -> Action {
        assert_eq!(bits.len(), self.p, "bit pattern length");
        bits.iter().enumerate().map(|(i, &b)| Self::bit_label(i + 1, b)).collect()
    }

    /// `{(i, 1 - b_i)}`: the bit elements put to sleep for pattern `bits`.
    pub fn sleeping_bits<'a>(&self, bits: &'a [bool]) -> impl Iterator<Item = Label> + 'a {
        bits.iter().enumerate().map(|(i, &b)| Self::bit_label(i + 1, !b))
    }

    /// The projection `π`. Defined on derived actions inside `U ∪ L` with at
    /// most `p` bit elements.
    pub fn pi(&self, derived_action: &Action) -> Result<Action> {
        let base = derived_action.intersect(self.base.ground_set().as_set());
        match self.projection {
            Projection::Intersect => Ok(base),
            Projection::SmallestKSubset { k } => {
                if base.len() < k {
                    return Err(Error::InvalidInput(format!(
                        "{derived_action} has fewer than {k} base elements; outside the projection domain"
                    )));
                }
                Ok(base.iter().take(k).copied().collect())
            }
        }
    }
}

pub fn extend(base: &ProblemInstance, p: usize) -> Result<ExtendedInstance> {
    extend_with(base, p, MinCutGadget::Series)
}

pub fn extend_with(base: &ProblemInstance, p: usize, gadget: MinCutGadget) -> Result<ExtendedInstance> {
    if p == 0 {
        return Err(Error::InvalidInput("extension needs p >= 1".into()));
    }
    let bit = ExtendedInstance::bit_label;
    let mut permanently_sleeping = BTreeSet::new();
    let mut projection = Projection::Intersect;
    let derived = match base.family() {
        Family::ShortestPath(g) => {
            let (s, t) = g.terminals()?;
            let (mut g2, head) = with_chain(g, p, s)?;
            g2.set_terminals(head, t)?;
            ProblemInstance::shortest_path(g2)?
        }
        Family::SpanningTree(g) => {
            let (g2, _) = with_chain(g, p, 0)?;
            ProblemInstance::spanning_tree(g2)?
        }
        Family::KSubsets { k } => {
            let mut labels = base.ground_set().elements().to_vec();
            labels.extend((1..=p).flat_map(|i| [bit(i, false), bit(i, true)]));
            projection = Projection::SmallestKSubset { k: *k };
            ProblemInstance::k_subsets(k + p, labels)?
        }
        Family::TruncatedPerm(grid) => {
            let (k, m) = (grid.k(), grid.m());
            let mut next = fresh_anon(base);
            let labels = (0..k + p)
                .map(|row| {
                    (0..m + 2 * p)
                        .map(|col| {
                            if row < k && col < m {
                                return grid.label(row, col);
                            }
                            if row >= k && col >= m {
                                let i = row - k + 1;
                                let (j, b) = ((col - m) / 2 + 1, (col - m) % 2 == 1);
                                if i == j {
                                    return bit(i, b);
                                }
                            }
                            let l = Label::Anon(next);
                            next += 1;
                            permanently_sleeping.insert(l);
                            l
                        })
                        .collect()
                })
                .collect();
            ProblemInstance::truncated_perm(PermGrid::new(labels)?)?
        }
        Family::BipartiteMatching(g) => {
            let mut g2 = g.clone();
            for i in 1..=p {
                let u = g2.add_vertex();
                let v = g2.add_vertex();
                g2.add_edge(u, v, bit(i, false))?;
                g2.add_edge(u, v, bit(i, true))?;
            }
            ProblemInstance::bipartite_matching(g2)?
        }
        Family::MinCut(g) => {
            let (s, t) = g.terminals()?;
            let mut g2 = g.clone();
            for i in 1..=p {
                match gadget {
                    MinCutGadget::Series => {
                        let w = g2.add_vertex();
                        g2.add_edge(s, w, bit(i, false))?;
                        g2.add_edge(w, t, bit(i, true))?;
                    }
                    MinCutGadget::Parallel => {
                        g2.add_edge(s, t, bit(i, false))?;
                        g2.add_edge(s, t, bit(i, true))?;
                    }
                }
            }
            ProblemInstance::min_cut(g2)?
        }
    };
    Ok(ExtendedInstance {
        base: base.clone(),
        derived: derived.with_enum_cap(base.enum_cap()),
        p,
        permanently_sleeping,
        projection,
    })
}

/// Copies `g` and prepends `p` stages of two parallel bit edges ending at
/// `anchor`. Returns the new graph and the chain head.
fn with_chain(g: &Graph, p: usize, anchor: usize) -> Result<(Graph, usize)> {
    let mut g2 = g.clone();
    let nodes: Vec<usize> = (0..p).map(|_| g2.add_vertex()).collect();
    for i in 1..=p {
        let from = nodes[i - 1];
        let to = if i < p { nodes[i] } else { anchor };
        g2.add_edge(from, to, ExtendedInstance::bit_label(i, false))?;
        g2.add_edge(from, to, ExtendedInstance::bit_label(i, true))?;
    }
    Ok((g2, nodes[0]))
}

fn fresh_anon(instance: &ProblemInstance) -> u32 {
    instance
        .ground_set()
        .elements()
        .iter()
        .filter_map(|l| match l {
            Label::Anon(id) => Some(id + 1),
            _ => None,
        })
        .max()
        .unwrap_or(0)
}

/// `π(V') ⊆ V' ∩ U` and `π(V') ∈ D` for derived actions inside `U ∪ L` with
/// at most `p` bit elements.
pub fn verify_property1(ext: &ExtendedInstance, opts: &VerifyOptions) -> Result<Verdict> {
    let bits = ext.distinguished();
    let base_set = ext.base.ground_set().as_set();
    let check = |v: &Action| -> bool {
        match ext.pi(v) {
            Ok(image) => image.is_subset_of(&v.intersect(base_set).into_members()) && ext.base.contains(&image),
            Err(_) => false,
        }
    };
    let mut checked = 0usize;
    let mut bad = None;
    let mut over_budget = false;
    let _ = ext.derived.for_each_within(&ext.base_and_bits(), &mut |v| {
        if checked == opts.budget {
            over_budget = true;
            return ControlFlow::Break(());
        }
        if v.count_in(&bits) > ext.p {
            return ControlFlow::Continue(());
        }
        checked += 1;
        if !check(&v) {
            bad = Some(v);
            return ControlFlow::Break(());
        }
        ControlFlow::Continue(())
    })?;
    if !over_budget {
        return Ok(Verdict::new("property1", CheckMode::Exhaustive, checked, bad.as_ref()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for i in 0..opts.samples {
        let pattern: Vec<bool> = (0..ext.p).map(|_| rng.gen()).collect();
        let mut sleeping: SleepingSet =
            base_set.iter().copied().filter(|_| rng.gen_bool(0.2)).collect();
        sleeping.extend(ext.sleeping_bits(&pattern));
        sleeping.extend(ext.permanently_sleeping.iter().copied());
        let losses = LossFunction::from_pairs(
            LossRange::Unit,
            ext.derived.ground_set().elements().iter().map(|l| (*l, rng.gen::<f64>())),
        );
        if let Some((v, _)) = ext.derived.min_loss_awake(&sleeping, &losses)? {
            if !check(&v) {
                return Ok(Verdict::new("property1", CheckMode::Sampled, i + 1, Some(&v)));
            }
        }
    }
    Ok(Verdict::new("property1", CheckMode::Sampled, opts.samples, None))
}

/// `{(1,b_1), ..., (p,b_p)} ∪ V ∈ D'` for every pattern and base action.
pub fn verify_property2(ext: &ExtendedInstance, opts: &VerifyOptions) -> Result<Verdict> {
    let patterns = if ext.p <= PATTERN_MAX_P { Some(1usize << ext.p) } else { None };
    let base_count = ext.base.count_up_to(opts.budget)?;
    if let (Some(np), Some(nd)) = (patterns, base_count) {
        if np.saturating_mul(nd) <= opts.budget {
            let mut checked = 0;
            let mut bad = None;
            let _ = ext.base.for_each_within(ext.base.ground_set().as_set(), &mut |v| {
                for code in 0..np {
                    let bits: Vec<bool> = (0..ext.p).map(|i| code >> i & 1 == 1).collect();
                    let union = ext.bit_action(&bits).union(&v);
                    checked += 1;
                    if !ext.derived.contains(&union) {
                        bad = Some(union);
                        return ControlFlow::Break(());
                    }
                }
                ControlFlow::Continue(())
            })?;
            return Ok(Verdict::new("property2", CheckMode::Exhaustive, checked, bad.as_ref()));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let ground = ext.base.ground_set();
    for i in 0..opts.samples {
        let bits: Vec<bool> = (0..ext.p).map(|_| rng.gen()).collect();
        let sleeping: SleepingSet = ground.elements().iter().copied().filter(|_| rng.gen_bool(0.2)).collect();
        let losses =
            LossFunction::from_pairs(LossRange::Unit, ground.elements().iter().map(|l| (*l, rng.gen::<f64>())));
        if let Some((v, _)) = ext.base.min_loss_awake(&sleeping, &losses)? {
            let union = ext.bit_action(&bits).union(&v);
            if !ext.derived.contains(&union) {
                return Ok(Verdict::new("property2", CheckMode::Sampled, i + 1, Some(&union)));
            }
        }
    }
    Ok(Verdict::new("property2", CheckMode::Sampled, opts.samples, None))
}

#[cfg(test)]
mod tests;
