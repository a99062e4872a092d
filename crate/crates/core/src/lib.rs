//! Feint actions in two-player combat games.
//!
//! * [`action`]: timed actions, pose frames and the action-set file format.
//! * [`feint`]: palindrome-directed feint extraction from attack frames.
//! * [`combo`]: lookahead-bounded action combinations and feint timing regimes.
//! * [`reward`]: zero-sum reward matrices over actions and combinations.
//! * [`strategy`]: maximin policies via a dense simplex solver.
//! * [`sim`]: a seeded discrete-event simulator for two NPCs.
//!
//! Numeric code is generic over [`Scalar`]; the aliases below fix the common
//! instantiations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod action;
pub mod combo;
pub mod error;
pub mod feint;
pub mod reward;
pub mod scalar;
pub mod sim;
mod simplex;
pub mod strategy;

pub use action::{
    actions_to_json, pose_distance, validate_stages, ActionKind, ActionSet, ActionSpec, FrameSequence, Pose,
    StageAnnotation, STANCE_LEFT_FORWARD, STANCE_NEUTRAL, STANCE_RIGHT_FORWARD,
};
pub use combo::{
    check_physical_link, classify_feint_timing, compute_timing_marks, enumerate_combinations, ActionCombination,
    EffectiveUnit, EnumerationConfig, FeintRegime, Lead, Step, TimingMarks,
};
pub use error::{Error, Result};
pub use feint::{
    enumerate_feints, export_feints, find_identical_pairs, gen_feint_backward_cut, gen_feint_forward_cut,
    gen_feint_identical, ExtractionMethod, FeintAction, DEFAULT_PALINDROME_EPS,
};
pub use reward::{
    align_pairs, align_pairs_with, combination_matrix, combination_matrix_with, combination_reward, pair_reward,
    single_action_matrix, Alignment, CompetingPair, RewardMatrix,
};
pub use scalar::{Exact, Real, Scalar};
pub use sim::{
    run_episode, sweep_csv_string, sweep_feint_length, Actor, DualActionProbe, EpisodeLog, EpisodeScore, Event,
    EventKind, Npc, Planner, Scenario, ScenarioConfig, ScenarioKind, SummaryStats, SweepRow, SYNTHETIC_FEINT_ID,
};
pub use strategy::{expected_reward, policy_entropy, solve_maximin, GameSolution, Policy};

pub type Pose64 = Pose<f64>;
pub type FrameSequence64 = FrameSequence<f64>;
pub type ActionSpec64 = ActionSpec<f64>;
pub type ActionSet64 = ActionSet<f64>;
pub type FeintAction64 = FeintAction<f64>;
pub type ActionCombination64 = ActionCombination<f64>;
pub type RewardMatrix64 = RewardMatrix<f64>;
pub type Policy64 = Policy<f64>;
pub type GameSolution64 = GameSolution<f64>;
pub type ExactMatrix = RewardMatrix<Exact>;
