//! Online sleeping combinatorial optimization.
//!
//! The crate covers six problem families (shortest path, spanning tree,
//! k-subsets, k-truncated permutations, bipartite matching, minimum cut)
//! with awake-action solvers, hard-instance and extensible-structure
//! constructions with property verifiers, and the two wrapper reductions:
//! disjunction learning from a sleeping optimizer, and per-action regret
//! from a ranking-regret optimizer.
//!
//! Loss arithmetic is generic over [`Scalar`]. Exact rational bookkeeping
//! uses [`Q`]; the floating-point aliases use `f64`.

pub mod disjunctions;
pub mod error;
pub mod extensible;
pub mod game;
pub mod hard;
pub mod label;
pub mod learners;
pub mod problems;
pub mod reductions;
pub mod scalar;

pub use error::{Error, Result};
pub use game::{
    action_loss, awake_set, best_ranking_bruteforce, per_action_regret, ranking_loss,
    ranking_regret, run_game, Adversary, GameHistory, Learner, LossFunction, LossRange,
    Outcome, Ranking, RoundRecord,
};
pub use label::{Action, GroundSet, Label, SleepingSet, Tag};
pub use problems::{FamilyKind, ProblemInstance, DEFAULT_ENUM_CAP};
pub use scalar::Scalar;

/// Exact rational scalar used for reduction bookkeeping.
pub type Q = num_rational::Rational64;

pub type LossFunctionF64 = LossFunction<f64>;
pub type LossFunctionQ = LossFunction<Q>;
pub type GameHistoryF64 = GameHistory<f64>;
pub type GameHistoryQ = GameHistory<Q>;
