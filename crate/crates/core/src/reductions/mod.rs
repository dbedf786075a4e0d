//! The two wrapper reductions and the comparators used to audit them.

pub mod disjunction;
pub mod per_action;

pub use disjunction::{
    build_dphi, disjunction_losses, input_sleeping, verify_dphi_round, DisjunctionLearner, DisjunctionRun,
};
pub use per_action::{
    bit_width, build_comparator_ranking, check_chain, collision_bound, has_collision, round_bits, ChainReport,
    PatternMode, PatternSource, PerActionWrapper,
};
