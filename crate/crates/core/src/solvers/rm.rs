use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{rng_for, Averager, Learner};
use crate::game::dot;
use crate::policy::Policy;

/// Regret matching: `π ∝ max(R, 0)`, uniform when no regret is positive.
#[derive(Debug, Clone)]
pub struct RmState {
    regrets: Vec<f64>,
    t: u64,
    avg: Averager,
    iterate: Policy,
    rng: ChaCha8Rng,
}

/// The regret-matching distribution for a regret vector.
pub(crate) fn regret_matching(regrets: &[f64], out: &mut [f64]) {
    let total: f64 = regrets.iter().map(|r| r.max(0.0)).sum();
    if total > 0.0 {
        for (o, r) in out.iter_mut().zip(regrets) {
            *o = r.max(0.0) / total;
        }
    } else {
        let u = 1.0 / out.len() as f64;
        out.iter_mut().for_each(|o| *o = u);
    }
}

impl RmState {
    pub fn new(num_actions: usize, seed: u64) -> Self {
        Self {
            regrets: vec![0.0; num_actions],
            t: 0,
            avg: Averager::new(num_actions),
            iterate: Policy::uniform(num_actions),
            rng: rng_for(seed),
        }
    }

    /// Starts from given regrets instead of zeros.
    pub fn with_regrets(regrets: Vec<f64>, seed: u64) -> Self {
        let mut s = Self::new(regrets.len(), seed);
        s.regrets = regrets;
        s
    }

    pub fn regrets(&self) -> &[f64] {
        &self.regrets
    }
}

impl Learner for RmState {
    fn num_actions(&self) -> usize {
        self.regrets.len()
    }

    fn next_policy(&mut self) -> &Policy {
        self.t += 1;
        regret_matching(&self.regrets, self.iterate.probs_mut());
        self.avg.add(self.iterate.probs());
        &self.iterate
    }

    fn observe(&mut self, utilities: &[f64]) {
        let baseline = dot(self.iterate.probs(), utilities);
        for (r, u) in self.regrets.iter_mut().zip(utilities) {
            *r += u - baseline;
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

    fn sample_action(&mut self) -> usize {
        let u: f64 = self.rng.gen();
        self.iterate.sample_with(u)
    }
}
