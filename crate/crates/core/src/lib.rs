//! Regret minimization anchored to a reference policy.
//!
//! The crate covers normal-form games ([`game`], [`games`]), no-regret
//! learners including anchor-regularized Hedge ([`solvers`]), closed-form
//! anchored best responses and equilibria ([`anchored`]), PUCT search with a
//! policy prior ([`mcts`]), and the experiment drivers behind the `pikl`
//! binary ([`harness`]).

// Negated comparisons are used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod anchored;
pub mod error;
pub mod game;
pub mod games;
pub mod mcts;
pub mod policy;
pub mod harness;
pub mod solvers;

pub use anchored::{anchored_qre, reverse_kl_opt, softmax_anchored, QreOptions, QreResult, ReverseKlSolution};
pub use error::{Error, Result};
pub use game::{Exploitability, GameDump, NormalFormGame, RewardBounds};
pub use policy::{kl_divergence, Policy, Profile};
