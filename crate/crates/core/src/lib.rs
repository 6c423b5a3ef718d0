//! Combinatorial adversarial bandits with slack-regularized exponential
//! weights.
//!
//! Actions are binary incidence vectors over `{0,1}^d`; the player only sees
//! the scalar loss `aᵀ l` of the action it plays. Besides the standard Exp2,
//! Exp3, Exp3.P and CombBand baselines, the crate implements two
//! exponential-weights learners that reweight every action by its slack with
//! respect to the hyperplane induced by the feedback, keep the resulting
//! weight vectors in a growing slack-weight matrix, and factorize that matrix
//! non-negatively to drive exploration.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the double-precision instantiation used by the CLI.

// `!(x >= 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod action_space;
pub mod adversary;
pub mod cli;
pub mod config;
pub mod error;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod nnmf;
pub mod policies;
pub mod scalar;
pub mod slack;

pub use action_space::{Action, ActionSet};
pub use adversary::{best_fixed_action_value, Adversary, AdversaryConfig, LossVector};
pub use error::{Error, Result};
pub use harness::{
    pseudo_regret, run_game, run_game_with, run_replicated, Experiment, GameRecord, RegretSeries,
    Replicated,
};
pub use linalg::Matrix;
pub use nnmf::{
    exploration_entropy, factorize, min_nonneg_rank, rank_one_components, sample_exploration,
    ExplorationSample, NnmfConfig, NnmfResult,
};
pub use policies::{
    build_policy, covariance_of, estimate_loss, mix_distribution, CovarianceState, Policy,
    PolicyConfig, PolicyKind, PolicyState, SlackReference,
};
pub use scalar::Scalar;
pub use slack::{exp_weight_update, slack_regularity, SlackWeightMatrix};

pub type Matrix64 = Matrix<f64>;
pub type LossVector64 = LossVector<f64>;
pub type NnmfResult64 = NnmfResult<f64>;
pub type PolicyState64 = PolicyState<f64>;
pub type CovarianceState64 = CovarianceState<f64>;
pub type GameRecord64 = GameRecord<f64>;
pub type RegretSeries64 = RegretSeries<f64>;
pub type Experiment64 = Experiment<f64>;

pub type Matrix32 = Matrix<f32>;
pub type NnmfResult32 = NnmfResult<f32>;
