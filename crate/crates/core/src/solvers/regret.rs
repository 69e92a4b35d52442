use crate::game::dot;
use crate::policy::{kl_with_log, Policy};

/// Measures realized regret of a sequence of iterates against the observed
/// utility vectors, both raw and under the KL-regularized utility
/// `u(π) − λ·KL(π ‖ τ)`.
#[derive(Debug, Clone)]
pub struct RegretTracker {
    lambda: f64,
    log_anchor: Vec<f64>,
    cumulative: Vec<f64>,
    realized: f64,
    kl_sum: f64,
    t: u64,
}

impl RegretTracker {
    /// `anchor` must have full support; it is also the reference for the
    /// KL diagnostics when `λ = 0`.
    pub fn new(anchor: &Policy, lambda: f64) -> Self {
        Self {
            lambda,
            log_anchor: anchor.probs().iter().map(|p| p.ln()).collect(),
            cumulative: vec![0.0; anchor.len()],
            realized: 0.0,
            kl_sum: 0.0,
            t: 0,
        }
    }

    pub fn record(&mut self, iterate: &Policy, utilities: &[f64]) {
        self.realized += dot(iterate.probs(), utilities);
        self.kl_sum += kl_with_log(iterate.probs(), &self.log_anchor);
        for (c, u) in self.cumulative.iter_mut().zip(utilities) {
            *c += u;
        }
        self.t += 1;
    }

    pub fn iterations(&self) -> u64 {
        self.t
    }

    /// `max_a Σ_t u^t(a) − Σ_t π^t·u^t`.
    pub fn raw_regret(&self) -> f64 {
        let best = self.cumulative.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        best - self.realized
    }

    /// Regret against the best fixed policy under the regularized utilities.
    ///
    /// The comparator term has the closed form
    /// `max_π π·C − Tλ·KL(π‖τ) = Tλ·log Σ_a τ(a)·exp(C(a) / (Tλ))`.
    pub fn regularized_regret(&self) -> f64 {
        if self.lambda == 0.0 {
            return self.raw_regret();
        }
        let scale = self.t as f64 * self.lambda;
        let best = scale * log_sum_exp(
            self.log_anchor
                .iter()
                .zip(&self.cumulative)
                .map(|(l, c)| l + c / scale),
        );
        best - (self.realized - self.lambda * self.kl_sum)
    }
}

fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    max + xs.map(|x| (x - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparator_closed_form_matches_direct_maximization() {
        // two actions: scan the simplex finely
        let tau = Policy::new(vec![0.7, 0.3]).unwrap();
        let lambda = 0.4;
        let mut tr = RegretTracker::new(&tau, lambda);
        let it = Policy::uniform(2);
        tr.record(&it, &[0.2, 0.9]);
        tr.record(&it, &[-0.5, 0.1]);
        let c = [0.2 - 0.5, 0.9 + 0.1];
        let mut best = f64::NEG_INFINITY;
        for k in 1..100_000 {
            let p = k as f64 / 100_000.0;
            let kl = p * (p / 0.7).ln() + (1.0 - p) * ((1.0 - p) / 0.3).ln();
            best = best.max(p * c[0] + (1.0 - p) * c[1] - 2.0 * lambda * kl);
        }
        let realized = 0.5 * (0.2 + 0.9) + 0.5 * (-0.5 + 0.1);
        let kl_uniform = 0.5 * (0.5f64 / 0.7).ln() + 0.5 * (0.5f64 / 0.3).ln();
        let expect = best - (realized - lambda * 2.0 * kl_uniform);
        assert!((tr.regularized_regret() - expect).abs() < 1e-8);
    }

    #[test]
    fn raw_regret_of_constant_play() {
        let tau = Policy::uniform(3);
        let mut tr = RegretTracker::new(&tau, 0.0);
        let it = Policy::pure(3, 0);
        for _ in 0..4 {
            tr.record(&it, &[0.0, 1.0, -1.0]);
        }
        assert_eq!(tr.raw_regret(), 4.0);
        assert_eq!(tr.regularized_regret(), 4.0);
    }
}
