//! Iterative no-regret learners for normal-form games.
//!
//! Every learner follows the same two-phase protocol per iteration:
//! [`Learner::next_policy`] produces the iterate `π^t` (and folds it into the
//! average), then [`Learner::observe`] receives the per-action utilities
//! `u(a, ·)` against whatever the opponents did.

mod eta;
mod hedge;
mod pikl;
mod regret;
mod rm;
mod selfplay;

pub use eta::{adaptive_eta, theory_eta, EtaMode, EtaSchedule, ADAPTIVE_C};
pub use hedge::HedgeState;
pub use pikl::{pikl_iterate, PiklState};
pub use regret::RegretTracker;
pub use rm::RmState;
pub use selfplay::{
    checkpoint_times, run_selfplay, Checkpoint, EtaSpec, Mode, PlayerSpec, SelfplayOptions,
    SelfplayResult, SolverSpec,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::game::NormalFormGame;
use crate::policy::{Policy, Profile};

pub trait Learner {
    fn num_actions(&self) -> usize;

    /// Advances the iteration counter and returns the new iterate.
    fn next_policy(&mut self) -> &Policy;

    /// Completes the current iteration with `u(a, ·)` for every action.
    fn observe(&mut self, utilities: &[f64]);

    /// The iterate produced by the last [`Learner::next_policy`] call.
    fn current_policy(&self) -> &Policy;

    /// Mean of the iterates so far.
    fn average_policy(&self) -> Policy;

    fn iterations(&self) -> u64;

    /// Learning rate used for the current iterate, if the learner has one.
    fn current_eta(&self) -> Option<f64> {
        None
    }

    /// Samples an action from the current iterate with the learner's own RNG.
    fn sample_action(&mut self) -> usize;
}

/// One full-information iteration against a fixed opponent joint action.
/// Returns the sampled action.
pub fn play_sampled<L: Learner + ?Sized>(
    learner: &mut L,
    game: &NormalFormGame,
    player: usize,
    opponents: &[usize],
) -> usize {
    learner.next_policy();
    let action = learner.sample_action();
    let values = game.action_values_vs_joint(opponents, player);
    learner.observe(&values);
    action
}

/// One iteration against the expected utilities of a mixed opponent profile.
/// Returns the iterate that was used.
pub fn play_exact<L: Learner + ?Sized>(
    learner: &mut L,
    game: &NormalFormGame,
    player: usize,
    opponents: &Profile,
) -> Result<Policy> {
    let values = game.action_values(opponents, player)?;
    let pi = learner.next_policy().clone();
    learner.observe(&values);
    Ok(pi)
}

pub(crate) fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Running sum of iterates.
#[derive(Debug, Clone)]
pub(crate) struct Averager {
    sum: Vec<f64>,
    count: u64,
}

impl Averager {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            sum: vec![0.0; n],
            count: 0,
        }
    }

    pub(crate) fn add(&mut self, p: &[f64]) {
        for (s, x) in self.sum.iter_mut().zip(p) {
            *s += x;
        }
        self.count += 1;
    }

    pub(crate) fn average(&self) -> Policy {
        if self.count == 0 {
            return Policy::uniform(self.sum.len());
        }
        Policy::from_weights(self.sum.clone()).expect("sum of iterates is positive")
    }
}
