use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::eta::{EtaMode, EtaSchedule};
use super::{rng_for, Averager, Learner};
use crate::error::{Error, Result};
use crate::game::dot;
use crate::policy::{softmax_into, Policy};

/// Anchor-regularized Hedge over cumulative action values.
///
/// Iterate `t` is the softmax of
/// `(η·CV^{t−1}(a) + tλη·log τ(a)) / (1 + tλη)`, where `CV` sums the observed
/// per-action utilities. With `λ = 0` this is Hedge on cumulative values.
#[derive(Debug, Clone)]
pub struct PiklState {
    cv: Vec<f64>,
    t: u64,
    anchor: Policy,
    log_anchor: Vec<f64>,
    lambda: f64,
    eta: EtaSchedule,
    last_eta: f64,
    avg: Averager,
    iterate: Policy,
    logits: Vec<f64>,
    seed: u64,
    rng: ChaCha8Rng,
}

/// The iterate formula on its own, for a given counter `t` (1-based) and `CV^{t−1}`.
pub fn pikl_iterate(cv: &[f64], log_anchor: &[f64], lambda: f64, eta: f64, t: u64) -> Vec<f64> {
    let mut logits = vec![0.0; cv.len()];
    fill_logits(cv, log_anchor, lambda, eta, t, &mut logits);
    let mut out = vec![0.0; cv.len()];
    softmax_into(&logits, &mut out);
    out
}

fn fill_logits(cv: &[f64], log_anchor: &[f64], lambda: f64, eta: f64, t: u64, out: &mut [f64]) {
    let tle = t as f64 * lambda * eta;
    let denom = 1.0 + tle;
    for ((o, c), l) in out.iter_mut().zip(cv).zip(log_anchor) {
        *o = (eta * c + tle * l) / denom;
    }
}

impl PiklState {
    pub fn new(anchor: Policy, lambda: f64, eta: EtaMode, seed: u64) -> Result<Self> {
        if let Some(a) = anchor.probs().iter().position(|p| *p <= 0.0) {
            return Err(Error::AnchorNotFullSupport { action: a });
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("lambda must be >= 0, got {lambda}")));
        }
        let (EtaMode::Constant(e) | EtaMode::Adaptive { c: e }) = eta;
        if !(e > 0.0 && e.is_finite()) {
            return Err(Error::InvalidArgument(format!("eta must be > 0, got {e}")));
        }
        let n = anchor.len();
        let log_anchor = anchor.probs().iter().map(|p| p.ln()).collect();
        Ok(Self {
            cv: vec![0.0; n],
            t: 0,
            iterate: anchor.clone(),
            anchor,
            log_anchor,
            lambda,
            eta: EtaSchedule::new(eta),
            last_eta: f64::NAN,
            avg: Averager::new(n),
            logits: vec![0.0; n],
            seed,
            rng: rng_for(seed),
        })
    }

    pub fn cv(&self) -> &[f64] {
        &self.cv
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn anchor(&self) -> &Policy {
        &self.anchor
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The iterate the next [`Learner::next_policy`] call will produce,
    /// without advancing any state.
    pub fn peek_policy(&self) -> Policy {
        let t = self.t + 1;
        let eta = self.eta.eta(t);
        Policy::from_normalized(pikl_iterate(&self.cv, &self.log_anchor, self.lambda, eta, t))
    }
}

impl Learner for PiklState {
    fn num_actions(&self) -> usize {
        self.cv.len()
    }

    fn next_policy(&mut self) -> &Policy {
        self.t += 1;
        let eta = self.eta.eta(self.t);
        self.last_eta = eta;
        fill_logits(&self.cv, &self.log_anchor, self.lambda, eta, self.t, &mut self.logits);
        softmax_into(&self.logits, self.iterate.probs_mut());
        self.avg.add(self.iterate.probs());
        &self.iterate
    }

    fn observe(&mut self, utilities: &[f64]) {
        debug_assert_eq!(utilities.len(), self.cv.len());
        self.eta.record(dot(self.iterate.probs(), utilities));
        for (c, u) in self.cv.iter_mut().zip(utilities) {
            *c += u;
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
