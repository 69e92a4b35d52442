use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::eta::{EtaMode, EtaSchedule};
use super::{rng_for, Averager, Learner};
use crate::game::dot;
use crate::policy::{softmax_into, Policy};

/// Hedge over cumulative regrets: `π ∝ exp(η R)`.
///
/// `R(a) = V(a) − B` where `V` sums each action's utilities and `B` the
/// expected utilities of the iterates. `B` does not depend on the action, so
/// the policy is computed from `η V` alone, which keeps it bit-identical to
/// the unregularized piKL iterate.
#[derive(Debug, Clone)]
pub struct HedgeState {
    values: Vec<f64>,
    baseline: f64,
    t: u64,
    eta: EtaSchedule,
    last_eta: f64,
    avg: Averager,
    iterate: Policy,
    logits: Vec<f64>,
    rng: ChaCha8Rng,
}

impl HedgeState {
    pub fn new(num_actions: usize, eta: EtaMode, seed: u64) -> Self {
        Self {
            values: vec![0.0; num_actions],
            baseline: 0.0,
            t: 0,
            eta: EtaSchedule::new(eta),
            last_eta: f64::NAN,
            avg: Averager::new(num_actions),
            iterate: Policy::uniform(num_actions),
            logits: vec![0.0; num_actions],
            rng: rng_for(seed),
        }
    }

    pub fn regrets(&self) -> Vec<f64> {
        self.values.iter().map(|v| v - self.baseline).collect()
    }
}

impl Learner for HedgeState {
    fn num_actions(&self) -> usize {
        self.values.len()
    }

    fn next_policy(&mut self) -> &Policy {
        self.t += 1;
        let eta = self.eta.eta(self.t);
        self.last_eta = eta;
        for (l, v) in self.logits.iter_mut().zip(&self.values) {
            *l = eta * v;
        }
        softmax_into(&self.logits, self.iterate.probs_mut());
        self.avg.add(self.iterate.probs());
        &self.iterate
    }

    fn observe(&mut self, utilities: &[f64]) {
        let baseline = dot(self.iterate.probs(), utilities);
        self.eta.record(baseline);
        self.baseline += baseline;
        for (v, u) in self.values.iter_mut().zip(utilities) {
            *v += u;
        }
    }

    fn current_policy(&self) -> &Policy {
        &self.iterate
    }

    fn average_policy(&self) -> Policy {
        self.avg.average()
    }

    fn iterations(&self) -> u64 {
        self.t
    }

    fn current_eta(&self) -> Option<f64> {
        Some(self.last_eta)
    }

    fn sample_action(&mut self) -> usize {
        let u: f64 = self.rng.gen();
        self.iterate.sample_with(u)
    }
}
