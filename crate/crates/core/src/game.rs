//! Normal-form games behind a utility oracle, with exact best responses and
//! exploitability.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::{Policy, Profile};

/// Joint-action count up to which utilities are cached densely and bounds are
/// checked exhaustively.
pub const DENSE_LIMIT: u128 = 1_000_000;
/// Joint-action count up to which exact expectations are computed.
pub const EXACT_LIMIT: u128 = 10_000_000;
const SAMPLED_CHECKS: usize = 10_000;
const ZERO_SUM_TOL: f64 = 1e-9;

/// `u(player, joint) -> reward`.
pub type UtilityFn = dyn Fn(usize, &[usize]) -> f64 + Send + Sync;

/// Declared reward interval `[lo, hi]` of one player.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardBounds {
    pub lo: f64,
    pub hi: f64,
}

impl RewardBounds {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    /// Width of the interval, the `D` constant of the anchor-distance and
    /// step-size bounds.
    pub fn range(&self) -> f64 {
        self.hi - self.lo
    }

    fn contains(&self, x: f64) -> bool {
        x >= self.lo - 1e-12 && x <= self.hi + 1e-12
    }
}

/// A finite game in normal form.
///
/// Utilities come from an oracle; games with at most [`DENSE_LIMIT`] joint
/// actions are tabulated once at construction. Immutable after construction.
#[derive(Clone)]
pub struct NormalFormGame {
    name: String,
    action_counts: Vec<usize>,
    bounds: Vec<RewardBounds>,
    zero_sum: bool,
    strides: Vec<usize>,
    oracle: Arc<UtilityFn>,
    dense: Option<Arc<Vec<Vec<f64>>>>,
    labels: Option<Arc<Vec<Vec<String>>>>,
}

impl fmt::Debug for NormalFormGame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NormalFormGame")
            .field("name", &self.name)
            .field("action_counts", &self.action_counts)
            .field("bounds", &self.bounds)
            .field("zero_sum", &self.zero_sum)
            .field("dense", &self.dense.is_some())
            .finish()
    }
}

impl NormalFormGame {
    /// Builds a game and checks the declared reward bounds (and the zero-sum
    /// property, when flagged) exhaustively for small games and on a seeded
    /// sample of joint actions otherwise.
    pub fn new(
        name: impl Into<String>,
        action_counts: Vec<usize>,
        bounds: Vec<RewardBounds>,
        zero_sum: bool,
        oracle: Arc<UtilityFn>,
    ) -> Result<Self> {
        if action_counts.is_empty() || action_counts.contains(&0) {
            return Err(Error::InvalidArgument(
                "every player needs at least one action".into(),
            ));
        }
        if bounds.len() != action_counts.len() {
            return Err(Error::InvalidArgument(format!(
                "{} players but {} reward bounds",
                action_counts.len(),
                bounds.len()
            )));
        }
        if let Some(b) = bounds.iter().find(|b| !(b.lo <= b.hi)) {
            return Err(Error::InvalidArgument(format!(
                "empty reward interval [{}, {}]",
                b.lo, b.hi
            )));
        }
        let mut strides = vec![1usize; action_counts.len()];
        for p in (0..action_counts.len().saturating_sub(1)).rev() {
            strides[p] = strides[p + 1].saturating_mul(action_counts[p + 1]);
        }
        let mut game = Self {
            name: name.into(),
            action_counts,
            bounds,
            zero_sum,
            strides,
            oracle,
            dense: None,
            labels: None,
        };
        game.tabulate_and_check()?;
        Ok(game)
    }

    /// Two-player game from player 0's payoff matrix `rows[a0][a1]`; player 1
    /// receives the negation.
    pub fn zero_sum_matrix(
        name: impl Into<String>,
        rows: Vec<Vec<f64>>,
        bounds: RewardBounds,
    ) -> Result<Self> {
        let n0 = rows.len();
        let n1 = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n1) {
            return Err(Error::InvalidArgument("ragged payoff matrix".into()));
        }
        let neg = RewardBounds::new(-bounds.hi, -bounds.lo);
        let rows = Arc::new(rows);
        let oracle = move |player: usize, joint: &[usize]| {
            let u = rows[joint[0]][joint[1]];
            if player == 0 {
                u
            } else {
                -u
            }
        };
        Self::new(name, vec![n0, n1], vec![bounds, neg], true, Arc::new(oracle))
    }

    pub fn with_labels(mut self, labels: Vec<Vec<String>>) -> Result<Self> {
        if labels.len() != self.num_players()
            || labels
                .iter()
                .zip(&self.action_counts)
                .any(|(l, &n)| l.len() != n)
        {
            return Err(Error::InvalidArgument(
                "label table does not match action counts".into(),
            ));
        }
        self.labels = Some(Arc::new(labels));
        Ok(self)
    }

    fn tabulate_and_check(&mut self) -> Result<()> {
        let joint_count = self.num_joint_actions();
        let players = self.num_players();
        let mut joint = vec![0usize; players];
        let check = |joint: &[usize], values: &[f64]| -> Result<()> {
            for (p, &u) in values.iter().enumerate() {
                if !self.bounds[p].contains(u) {
                    return Err(Error::InvalidArgument(format!(
                        "utility {u} of player {p} at {joint:?} outside [{}, {}]",
                        self.bounds[p].lo, self.bounds[p].hi
                    )));
                }
            }
            if self.zero_sum && values.iter().sum::<f64>().abs() > ZERO_SUM_TOL {
                return Err(Error::InvalidArgument(format!(
                    "game flagged zero-sum but utilities at {joint:?} sum to {}",
                    values.iter().sum::<f64>()
                )));
            }
            Ok(())
        };
        let mut values = vec![0.0; players];
        if joint_count <= DENSE_LIMIT {
            let n = joint_count as usize;
            let mut table = vec![Vec::with_capacity(n); players];
            for _ in 0..n {
                for (p, v) in values.iter_mut().enumerate() {
                    *v = (self.oracle)(p, &joint);
                    table[p].push(*v);
                }
                check(&joint, &values)?;
                advance(&mut joint, &self.action_counts);
            }
            self.dense = Some(Arc::new(table));
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            for _ in 0..SAMPLED_CHECKS {
                for (j, &n) in joint.iter_mut().zip(&self.action_counts) {
                    *j = rng.gen_range(0..n);
                }
                for (p, v) in values.iter_mut().enumerate() {
                    *v = (self.oracle)(p, &joint);
                }
                check(&joint, &values)?;
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_players(&self) -> usize {
        self.action_counts.len()
    }

    pub fn action_counts(&self) -> &[usize] {
        &self.action_counts
    }

    pub fn num_actions(&self, player: usize) -> usize {
        self.action_counts[player]
    }

    pub fn bounds(&self, player: usize) -> RewardBounds {
        self.bounds[player]
    }

    pub fn is_zero_sum(&self) -> bool {
        self.zero_sum
    }

    pub fn labels(&self) -> Option<&[Vec<String>]> {
        self.labels.as_deref().map(Vec::as_slice)
    }

    pub fn num_joint_actions(&self) -> u128 {
        self.action_counts.iter().map(|&n| n as u128).product()
    }

    pub fn joint_index(&self, joint: &[usize]) -> usize {
        joint.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }

    pub fn utility(&self, player: usize, joint: &[usize]) -> f64 {
        match &self.dense {
            Some(table) => table[player][self.joint_index(joint)],
            None => (self.oracle)(player, joint),
        }
    }

    fn check_exact(&self) -> Result<()> {
        let joint = self.num_joint_actions();
        if joint > EXACT_LIMIT {
            return Err(Error::TooLarge {
                joint,
                limit: EXACT_LIMIT,
            });
        }
        Ok(())
    }

    fn check_profile(&self, profile: &Profile) -> Result<()> {
        if profile.num_players() != self.num_players() {
            return Err(Error::InvalidArgument(format!(
                "profile has {} policies for a {}-player game",
                profile.num_players(),
                self.num_players()
            )));
        }
        for (p, (pol, &n)) in profile.policies().iter().zip(&self.action_counts).enumerate() {
            if pol.len() != n {
                return Err(Error::InvalidArgument(format!(
                    "player {p} policy has {} entries, game has {n} actions",
                    pol.len()
                )));
            }
        }
        Ok(())
    }

    /// `u_i(a, π_{-i})` for every action `a` of `player`; `π_i` is ignored.
    pub fn action_values(&self, profile: &Profile, player: usize) -> Result<Vec<f64>> {
        self.check_exact()?;
        self.check_profile(profile)?;
        let mut out = vec![0.0; self.action_counts[player]];
        self.action_values_into(profile.policies(), player, &mut out);
        Ok(out)
    }

    /// Unchecked core of [`Self::action_values`], reused by the solvers' inner loop.
    pub(crate) fn action_values_into(&self, policies: &[Policy], player: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let players = self.num_players();
        if players == 2 {
            if let Some(table) = &self.dense {
                let opp = 1 - player;
                let row = &table[player];
                let (s_self, s_opp) = (self.strides[player], self.strides[opp]);
                for (b, &w) in policies[opp].probs().iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    let base = b * s_opp;
                    for (a, v) in out.iter_mut().enumerate() {
                        *v += w * row[base + a * s_self];
                    }
                }
                return;
            }
        }
        // odometer over the opponents' joint actions, skipping zero-weight branches
        let mut joint = vec![0usize; players];
        loop {
            let w: f64 = (0..players)
                .filter(|&p| p != player)
                .map(|p| policies[p][joint[p]])
                .product();
            if w != 0.0 {
                for (a, v) in out.iter_mut().enumerate() {
                    joint[player] = a;
                    *v += w * self.utility(player, &joint);
                }
                joint[player] = 0;
            }
            if !advance_skipping(&mut joint, &self.action_counts, player) {
                break;
            }
        }
    }

    /// `u_i(a, a_{-i})` for every action `a` of `player` against a fixed joint action.
    pub fn action_values_vs_joint(&self, joint: &[usize], player: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.action_counts[player]];
        self.action_values_vs_joint_into(joint, player, &mut out);
        out
    }

    pub(crate) fn action_values_vs_joint_into(&self, joint: &[usize], player: usize, out: &mut [f64]) {
        let mut j = joint.to_vec();
        for (a, v) in out.iter_mut().enumerate() {
            j[player] = a;
            *v = self.utility(player, &j);
        }
    }

    /// Exact multilinear extension of `u_player` to the mixed profile.
    pub fn expected_utility(&self, profile: &Profile, player: usize) -> Result<f64> {
        let values = self.action_values(profile, player)?;
        Ok(dot(profile.get(player).probs(), &values))
    }

    /// Best pure response of `player`; ties go to the lowest action index.
    pub fn best_response(&self, profile: &Profile, player: usize) -> Result<(usize, f64)> {
        let values = self.action_values(profile, player)?;
        let a = crate::policy::argmax(&values);
        Ok((a, values[a]))
    }

    /// Per-player gain from unilaterally best-responding.
    pub fn exploitability(&self, profile: &Profile) -> Result<Exploitability> {
        let mut gaps = Vec::with_capacity(self.num_players());
        for p in 0..self.num_players() {
            let values = self.action_values(profile, p)?;
            let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            gaps.push(best - dot(profile.get(p).probs(), &values));
        }
        Ok(Exploitability::from_gaps(gaps))
    }

    /// Serializable description of the game with its full payoff table.
    pub fn dump(&self) -> Result<GameDump> {
        let joint_count = self.num_joint_actions();
        if joint_count > DENSE_LIMIT {
            return Err(Error::TooLarge {
                joint: joint_count,
                limit: DENSE_LIMIT,
            });
        }
        let payoffs = match &self.dense {
            Some(t) => t.as_ref().clone(),
            None => unreachable!("games below the dense limit are tabulated"),
        };
        Ok(GameDump {
            name: self.name.clone(),
            num_players: self.num_players(),
            action_counts: self.action_counts.clone(),
            actions: self.labels.as_deref().cloned(),
            bounds: self.bounds.clone(),
            zero_sum: self.zero_sum,
            payoffs,
        })
    }
}

/// Nash gaps of a profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exploitability {
    pub gaps: Vec<f64>,
    pub total: f64,
}

impl Exploitability {
    pub fn from_gaps(gaps: Vec<f64>) -> Self {
        let total = gaps.iter().sum();
        Self { gaps, total }
    }

    /// Smallest `ε` for which the profile is an `ε`-Nash equilibrium.
    pub fn max_gap(&self) -> f64 {
        self.gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// JSON form of a game: payoffs are listed per player over joint actions in
/// row-major order (last player's action varies fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameDump {
    pub name: String,
    pub num_players: usize,
    pub action_counts: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub actions: Option<Vec<Vec<String>>>,
    pub bounds: Vec<RewardBounds>,
    pub zero_sum: bool,
    pub payoffs: Vec<Vec<f64>>,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Row-major odometer step; wraps to all zeros after the last joint action.
fn advance(joint: &mut [usize], counts: &[usize]) {
    for p in (0..joint.len()).rev() {
        joint[p] += 1;
        if joint[p] < counts[p] {
            return;
        }
        joint[p] = 0;
    }
}

/// Odometer step that leaves `fixed` untouched; false once exhausted.
fn advance_skipping(joint: &mut [usize], counts: &[usize], fixed: usize) -> bool {
    for p in (0..joint.len()).rev() {
        if p == fixed {
            continue;
        }
        joint[p] += 1;
        if joint[p] < counts[p] {
            return true;
        }
        joint[p] = 0;
    }
    false
}
