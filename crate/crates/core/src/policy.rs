//! Distributions over a finite action set and the divergences between them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|sum - 1|` accepted by [`Policy::new`].
pub const SUM_TOLERANCE: f64 = 1e-9;

/// A probability distribution over one player's actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Policy(Vec<f64>);

impl Policy {
    /// Validates that `probs` is non-empty, non-negative and sums to one.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidPolicy("empty action set".into()));
        }
        if let Some((a, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::InvalidPolicy(format!("entry {a} is {p}")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidPolicy(format!("entries sum to {sum}")));
        }
        Ok(Self(probs))
    }

    /// Normalizes non-negative weights into a policy.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum.is_finite() && sum > 0.0) || weights.iter().any(|w| *w < 0.0) {
            return Err(Error::InvalidPolicy(format!(
                "cannot normalize weights with sum {sum}"
            )));
        }
        Ok(Self(weights.into_iter().map(|w| w / sum).collect()))
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform policy over an empty action set");
        Self(vec![1.0 / n as f64; n])
    }

    pub fn pure(n: usize, action: usize) -> Self {
        assert!(action < n);
        let mut probs = vec![0.0; n];
        probs[action] = 1.0;
        Self(probs)
    }

    /// Wraps probabilities produced by a normalized softmax without re-checking them.
    pub(crate) fn from_normalized(probs: Vec<f64>) -> Self {
        debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        Self(probs)
    }

    /// In-place access for learners that overwrite the whole distribution.
    pub(crate) fn probs_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub(crate) fn copy_from(&mut self, other: &Policy) {
        self.0.clear();
        self.0.extend_from_slice(&other.0);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn has_full_support(&self) -> bool {
        self.0.iter().all(|p| *p > 0.0)
    }

    /// Lowest-index action with maximal probability.
    pub fn argmax(&self) -> usize {
        argmax(&self.0)
    }

    /// `max_a log(1 / p(a))`, infinite when some action has zero mass.
    pub fn max_log_inverse(&self) -> f64 {
        self.0
            .iter()
            .map(|p| -p.ln())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn linf_distance(&self, other: &Policy) -> f64 {
        linf(&self.0, &other.0)
    }

    /// Inverse-CDF sample from a uniform draw `u ∈ [0, 1)`.
    pub fn sample_with(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (a, p) in self.0.iter().enumerate() {
            acc += p;
            if u < acc {
                return a;
            }
        }
        // u landed in the rounding gap above the cumulative sum
        self.0.iter().rposition(|p| *p > 0.0).unwrap_or(0)
    }
}

impl TryFrom<Vec<f64>> for Policy {
    type Error = Error;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        Policy::new(value)
    }
}

impl From<Policy> for Vec<f64> {
    fn from(p: Policy) -> Self {
        p.0
    }
}

impl std::ops::Index<usize> for Policy {
    type Output = f64;

    fn index(&self, a: usize) -> &f64 {
        &self.0[a]
    }
}

/// One policy per player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile(Vec<Policy>);

impl Profile {
    pub fn new(policies: Vec<Policy>) -> Self {
        Self(policies)
    }

    pub fn num_players(&self) -> usize {
        self.0.len()
    }

    pub fn policies(&self) -> &[Policy] {
        &self.0
    }

    pub fn get(&self, player: usize) -> &Policy {
        &self.0[player]
    }

    /// Copy of this profile with `player`'s policy replaced.
    pub fn with_policy(&self, player: usize, policy: Policy) -> Self {
        let mut out = self.clone();
        out.0[player] = policy;
        out
    }

    pub fn into_inner(self) -> Vec<Policy> {
        self.0
    }

    /// Largest per-player L∞ distance.
    pub fn linf_distance(&self, other: &Profile) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(p, q)| p.linf_distance(q))
            .fold(0.0, f64::max)
    }
}

/// `KL(p ‖ q)` in nats with `0 log 0 = 0`.
pub fn kl_divergence(p: &Policy, q: &Policy) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::InvalidArgument(format!(
            "policies over {} and {} actions",
            p.len(),
            q.len()
        )));
    }
    let mut kl = 0.0;
    for (a, (&pa, &qa)) in p.probs().iter().zip(q.probs()).enumerate() {
        if pa > 0.0 {
            if qa <= 0.0 {
                return Err(Error::SupportViolation { action: a, p: pa });
            }
            kl += pa * (pa / qa).ln();
        }
    }
    Ok(kl.max(0.0))
}

/// KL against a precomputed `log q`; the caller guarantees full support of `q`.
pub(crate) fn kl_with_log(p: &[f64], log_q: &[f64]) -> f64 {
    p.iter()
        .zip(log_q)
        .filter(|(pa, _)| **pa > 0.0)
        .map(|(pa, lq)| pa * (pa.ln() - lq))
        .sum::<f64>()
        .max(0.0)
}

/// Softmax of `logits` into `out`, subtracting the max first.
pub(crate) fn softmax_into(logits: &[f64], out: &mut [f64]) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, &l) in out.iter_mut().zip(logits) {
        *o = (l - max).exp();
        sum += *o;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; logits.len()];
    softmax_into(logits, &mut out);
    out
}

/// Lowest index attaining the maximum.
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
