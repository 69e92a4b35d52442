use serde::{Deserialize, Serialize};

/// Constant used by the adaptive step-size heuristic.
pub const ADAPTIVE_C: f64 = 10.0 / 3.0;

/// How a learner picks its step size each iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaMode {
    Constant(f64),
    /// `c / (σ √t)` with `σ` the running standard deviation of the learner's
    /// per-iteration expected utility.
    Adaptive { c: f64 },
}

/// The largest constant step size covered by the logarithmic regret bound:
/// `1 / (λβ + 2D)`.
pub fn theory_eta(lambda: f64, beta: f64, range: f64) -> f64 {
    1.0 / (lambda * beta + 2.0 * range)
}

/// `c / (σ √t)`, falling back to `c` while `σ` is zero or undefined.
pub fn adaptive_eta(c: f64, sigma: f64, t: u64) -> f64 {
    if t < 2 || !(sigma > 0.0) {
        c
    } else {
        c / (sigma * (t as f64).sqrt())
    }
}

/// Step-size state, fed one utility sample per completed iteration.
#[derive(Debug, Clone)]
pub struct EtaSchedule {
    mode: EtaMode,
    n: u64,
    mean: f64,
    m2: f64,
}

impl EtaSchedule {
    pub fn new(mode: EtaMode) -> Self {
        Self {
            mode,
            n: 0,
            mean: 0.0,
            m2: 0.0,
        }
    }

    pub fn mode(&self) -> EtaMode {
        self.mode
    }

    /// Population standard deviation of the recorded utilities.
    pub fn sigma(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.m2 / self.n as f64).sqrt()
        }
    }

    /// Step size for iteration `t` (1-based).
    pub fn eta(&self, t: u64) -> f64 {
        match self.mode {
            EtaMode::Constant(eta) => eta,
            EtaMode::Adaptive { c } => adaptive_eta(c, self.sigma(), t),
        }
    }

    pub fn record(&mut self, utility: f64) {
        // Welford
        self.n += 1;
        let delta = utility - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (utility - self.mean);
    }
}
