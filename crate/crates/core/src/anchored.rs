//! Closed-form and fixed-point solvers for anchor-regularized objectives.
//!
//! * [`softmax_anchored`] maximizes `Σ π·Q − λ·KL(π ‖ τ)`.
//! * [`reverse_kl_opt`] maximizes `Σ π·Q − λ·KL(τ ‖ π)`, whose maximizer has
//!   the form `π(a) = λ·τ(a) / (α − Q(a))` for a scalar `α > max Q`.
//! * [`anchored_qre`] finds profiles where every player plays
//!   `softmax_anchored` against the others' expected utilities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{dot, NormalFormGame};
use crate::policy::{kl_divergence, linf, softmax, Policy, Profile};

const BISECTION_MAX_ITERS: usize = 200;
const BISECTION_TOL: f64 = 1e-12;

fn check_inputs(q: &[f64], tau: &Policy, lambda: f64) -> Result<()> {
    if q.len() != tau.len() {
        return Err(Error::InvalidArgument(format!(
            "{} values for {} actions",
            q.len(),
            tau.len()
        )));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "lambda must be positive and finite, got {lambda}"
        )));
    }
    if let Some(a) = tau.probs().iter().position(|p| *p <= 0.0) {
        return Err(Error::AnchorNotFullSupport { action: a });
    }
    if q.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("non-finite action value".into()));
    }
    Ok(())
}

/// `π(a) ∝ τ(a)·exp(Q(a)/λ)`.
pub fn softmax_anchored(q: &[f64], tau: &Policy, lambda: f64) -> Result<Policy> {
    check_inputs(q, tau, lambda)?;
    let logits: Vec<f64> = q
        .iter()
        .zip(tau.probs())
        .map(|(v, t)| t.ln() + v / lambda)
        .collect();
    Ok(Policy::from_normalized(softmax(&logits)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReverseKlSolution {
    pub policy: Policy,
    /// Normalizer with `π(a) = λ·τ(a) / (α − Q(a))`.
    pub alpha: f64,
    pub iterations: usize,
}

fn mass(q: &[f64], tau: &[f64], lambda: f64, alpha: f64) -> f64 {
    q.iter().zip(tau).map(|(v, t)| lambda * t / (alpha - v)).sum()
}

/// Maximizer of `Σ π·Q − λ·KL(τ ‖ π)` over the simplex.
///
/// `Σ_a λτ(a)/(α − Q(a))` is strictly decreasing on `(max Q, ∞)` and at most
/// one at `α = max Q + λ`, so `α` is bracketed by
/// `(max Q, max Q + λ]` and found by bisection.
pub fn reverse_kl_opt(q: &[f64], tau: &Policy, lambda: f64) -> Result<ReverseKlSolution> {
    check_inputs(q, tau, lambda)?;
    let tau = tau.probs();
    let q_max = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut lo = q_max + 1e-13 * (1.0 + q_max.abs());
    let mut hi = q_max + lambda;
    let mut alpha = hi;
    let mut total = mass(q, tau, lambda, hi);
    let mut iterations = 0;
    // upper end is never below one in exact arithmetic; grow it if rounding says otherwise
    while total > 1.0 + BISECTION_TOL {
        lo = hi;
        hi = q_max + 2.0 * (hi - q_max);
        alpha = hi;
        total = mass(q, tau, lambda, hi);
    }
    while (total - 1.0).abs() > BISECTION_TOL && iterations < BISECTION_MAX_ITERS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        alpha = mid;
        total = mass(q, tau, lambda, alpha);
        if total > 1.0 {
            lo = alpha;
        } else {
            hi = alpha;
        }
        iterations += 1;
    }
    let weights: Vec<f64> = q.iter().zip(tau).map(|(v, t)| lambda * t / (alpha - v)).collect();
    let sum: f64 = weights.iter().sum();
    let probs = weights.into_iter().map(|w| w / sum).collect();
    Ok(ReverseKlSolution {
        policy: Policy::from_normalized(probs),
        alpha,
        iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QreOptions {
    pub max_iters: usize,
    /// Initial mixing weight of the softmax response.
    pub damping: f64,
    /// Stop once the fixed-point residual falls to this level.
    pub tol: f64,
}

impl Default for QreOptions {
    fn default() -> Self {
        Self {
            max_iters: 100_000,
            damping: 0.5,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QreResult {
    pub profile: Profile,
    pub converged: bool,
    /// `max_i ‖softmax_anchored(u_i(·, π_{−i}), τ_i, λ) − π_i‖_∞` at the output.
    pub residual: f64,
    pub iterations: usize,
    /// Mixing weight in use when the iteration stopped.
    pub final_damping: f64,
}

struct QreState {
    targets: Vec<Policy>,
    residual: f64,
    /// Regularized Nash gap: `Σ_i max_σ [σ·u_i − λ KL(σ‖τ_i)] − [π_i·u_i − λ KL(π_i‖τ_i)]`.
    gap: f64,
}

fn evaluate(game: &NormalFormGame, profile: &Profile, anchors: &[Policy], lambda: f64) -> Result<QreState> {
    let mut targets = Vec::with_capacity(anchors.len());
    let (mut residual, mut gap) = (0.0f64, 0.0);
    for (p, (pi, tau)) in profile.policies().iter().zip(anchors).enumerate() {
        let values = game.action_values(profile, p)?;
        let logits: Vec<f64> = tau.probs().iter().zip(&values).map(|(t, v)| t.ln() + v / lambda).collect();
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
        gap += lambda * lse - dot(pi.probs(), &values) + lambda * kl_divergence(pi, tau)?;
        let target = softmax_anchored(&values, tau, lambda)?;
        residual = residual.max(linf(pi.probs(), target.probs()));
        targets.push(target);
    }
    Ok(QreState { targets, residual, gap })
}

fn mix(profile: &Profile, targets: &[Policy], gamma: f64) -> Profile {
    Profile::new(
        profile
            .policies()
            .iter()
            .zip(targets)
            .map(|(p, t)| {
                let mixed = p.probs().iter().zip(t.probs()).map(|(x, y)| (1.0 - gamma) * x + gamma * y).collect();
                Policy::from_weights(mixed).expect("convex combination of policies")
            })
            .collect(),
    )
}

/// Below this the gap is dominated by rounding.
const GAP_FLOOR: f64 = 1e-12;
/// Residual at which the damped phase hands over to Newton steps.
const NEWTON_HANDOFF: f64 = 1e-4;
const NEWTON_STEPS: usize = 100;
/// The damped phase counts as stalled once this many steps fail to halve the
/// best residual.
const STALL_WINDOW: usize = 2_000;

/// Fixed point of the anchored logit response
/// `π_i(a) ∝ τ_i(a)·exp(u_i(a, π_{−i})/λ)`, starting from the anchors.
///
/// The main loop is a damped iteration: each step moves a fraction `γ`
/// toward the anchored softmax responses. A step is kept if it lowers the
/// regularized Nash gap; otherwise `γ` is halved and the step retried, and
/// kept steps let `γ` grow back toward `options.damping`. The gap is a
/// Lyapunov function for these dynamics in two-player zero-sum games, so the
/// iteration cannot cycle even where the plain response map rotates
/// (matching pennies at small `λ`). Once the residual is small or progress
/// stalls, Newton steps on the log-odds finish the job.
pub fn anchored_qre(
    game: &NormalFormGame,
    anchors: &[Policy],
    lambda: f64,
    options: QreOptions,
) -> Result<QreResult> {
    if anchors.len() != game.num_players() {
        return Err(Error::InvalidArgument(format!(
            "{} anchors for a {}-player game",
            anchors.len(),
            game.num_players()
        )));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("lambda must be > 0, got {lambda}")));
    }
    if !(options.damping > 0.0 && options.damping <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "damping must lie in (0, 1], got {}",
            options.damping
        )));
    }
    if let Some(action) = anchors.iter().find_map(|t| t.probs().iter().position(|p| *p <= 0.0)) {
        return Err(Error::AnchorNotFullSupport { action });
    }
    let mut profile = Profile::new(anchors.to_vec());
    let mut state = evaluate(game, &profile, anchors, lambda)?;
    let mut gamma = options.damping;
    let mut iterations = 0;
    let (mut best, mut best_at) = (state.residual, 0);
    while state.residual > options.tol.max(NEWTON_HANDOFF) && iterations < options.max_iters {
        iterations += 1;
        let trial = mix(&profile, &state.targets, gamma);
        let next = evaluate(game, &trial, anchors, lambda)?;
        let improved = if state.gap > GAP_FLOOR {
            next.gap < state.gap
        } else {
            next.residual < state.residual
        };
        if improved {
            profile = trial;
            state = next;
            gamma = (gamma * 1.5).min(options.damping);
        } else if gamma > 1e-12 {
            gamma *= 0.5;
        } else {
            break;
        }
        if state.residual < 0.5 * best {
            (best, best_at) = (state.residual, iterations);
        } else if iterations - best_at > STALL_WINDOW {
            break;
        }
    }
    if state.residual > options.tol {
        let mut newton = LogOdds::new(game, anchors, lambda, &profile);
        for _ in 0..NEWTON_STEPS {
            if iterations >= options.max_iters || !newton.step()? {
                break;
            }
            iterations += 1;
            let candidate = newton.profile();
            let next = evaluate(game, &candidate, anchors, lambda)?;
            if next.residual < state.residual {
                profile = candidate;
                state = next;
            }
            if state.residual <= options.tol {
                break;
            }
        }
    }
    Ok(QreResult {
        profile,
        converged: state.residual <= options.tol,
        residual: state.residual,
        iterations,
        final_damping: gamma,
    })
}

/// Newton iteration on log-odds coordinates `x_i(a) = ln π_i(a) − ln π_i(0)`,
/// solving `x_i(a) = ln τ_i(a)/τ_i(0) + (u_i(a) − u_i(0))/λ` for `a ≥ 1`.
struct LogOdds<'a> {
    game: &'a NormalFormGame,
    log_anchor_odds: Vec<f64>,
    lambda: f64,
    offsets: Vec<usize>,
    x: Vec<f64>,
}

impl<'a> LogOdds<'a> {
    fn new(game: &'a NormalFormGame, anchors: &[Policy], lambda: f64, start: &Profile) -> Self {
        let mut offsets = vec![0];
        let (mut log_anchor_odds, mut x) = (Vec::new(), Vec::new());
        for (tau, pi) in anchors.iter().zip(start.policies()) {
            let (t, p) = (tau.probs(), pi.probs());
            let p0 = p[0].max(f64::MIN_POSITIVE).ln();
            for a in 1..t.len() {
                log_anchor_odds.push((t[a] / t[0]).ln());
                x.push(p[a].max(f64::MIN_POSITIVE).ln() - p0);
            }
            offsets.push(x.len());
        }
        Self {
            game,
            log_anchor_odds,
            lambda,
            offsets,
            x,
        }
    }

    fn profile_at(&self, x: &[f64]) -> Profile {
        let policies = self
            .offsets
            .windows(2)
            .map(|w| {
                let mut logits = vec![0.0];
                logits.extend_from_slice(&x[w[0]..w[1]]);
                Policy::from_normalized(softmax(&logits))
            })
            .collect();
        Profile::new(policies)
    }

    fn profile(&self) -> Profile {
        self.profile_at(&self.x)
    }

    fn residual_at(&self, x: &[f64]) -> Result<Vec<f64>> {
        let profile = self.profile_at(x);
        let mut out = Vec::with_capacity(x.len());
        for (p, w) in self.offsets.windows(2).enumerate() {
            let values = self.game.action_values(&profile, p)?;
            for (k, i) in (w[0]..w[1]).enumerate() {
                let target = self.log_anchor_odds[i] + (values[k + 1] - values[0]) / self.lambda;
                out.push(x[i] - target);
            }
        }
        Ok(out)
    }

    /// One Newton step with backtracking on the residual norm; `false` when
    /// no step makes progress.
    fn step(&mut self) -> Result<bool> {
        let n = self.x.len();
        let g = self.residual_at(&self.x)?;
        let norm = |v: &[f64]| v.iter().map(|e| e * e).sum::<f64>().sqrt();
        let g_norm = norm(&g);
        if g_norm == 0.0 {
            return Ok(false);
        }
        let mut jac = nalgebra::DMatrix::<f64>::zeros(n, n);
        let mut probe = self.x.clone();
        for j in 0..n {
            let h = 1e-7 * (1.0 + self.x[j].abs());
            probe[j] = self.x[j] + h;
            let shifted = self.residual_at(&probe)?;
            probe[j] = self.x[j];
            for i in 0..n {
                jac[(i, j)] = (shifted[i] - g[i]) / h;
            }
        }
        let rhs = nalgebra::DVector::from_iterator(n, g.iter().map(|e| -e));
        let Some(dir) = jac.lu().solve(&rhs) else {
            return Ok(false);
        };
        let mut t = 1.0;
        for _ in 0..40 {
            let trial: Vec<f64> = self.x.iter().zip(dir.iter()).map(|(x, d)| x + t * d).collect();
            if norm(&self.residual_at(&trial)?) < g_norm {
                self.x = trial;
                return Ok(true);
            }
            t *= 0.5;
        }
        Ok(false)
    }
}
