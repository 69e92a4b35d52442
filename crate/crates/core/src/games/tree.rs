//! Complete `branching`-ary trees of fixed depth with alternating moves.
//!
//! Nodes are numbered in level order: the root is 0 and the children of `n`
//! are `n * branching + 1 ..= n * branching + branching`. Player 0 moves at
//! even depths and maximizes the leaf reward; player 1 moves at odd depths.
//! All stored values are from player 0's perspective.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::{argmax, softmax, Policy};

/// Largest leaf count accepted by [`make_tree_game`].
pub const TREE_LEAF_LIMIT: u128 = 100_000;

/// Knobs for the synthetic anchor and value model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// Multiplier on the mover's child minimax values inside the anchor softmax.
    pub concentration: f64,
    /// Standard deviation of the Gaussian logit noise added to the anchor.
    pub anchor_noise: f64,
    /// Half-width of the uniform noise added to the value model.
    pub value_noise: f64,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            concentration: 2.0,
            anchor_noise: 1.0,
            value_noise: 0.2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TreeGame {
    branching: usize,
    depth: usize,
    seed: u64,
    first_leaf: usize,
    leaf_rewards: Vec<f64>,
    node_depth: Vec<usize>,
    minimax: Vec<f64>,
}

impl TreeGame {
    /// Tree with the given leaf rewards (player 0's perspective, level order).
    pub fn from_leaves(branching: usize, depth: usize, leaf_rewards: Vec<f64>) -> Result<Self> {
        Self::build(branching, depth, leaf_rewards, 0)
    }

    fn build(branching: usize, depth: usize, leaf_rewards: Vec<f64>, seed: u64) -> Result<Self> {
        let leaves = check_size(branching, depth)?;
        if leaf_rewards.len() != leaves {
            return Err(Error::InvalidArgument(format!(
                "expected {leaves} leaf rewards, got {}",
                leaf_rewards.len()
            )));
        }
        if leaf_rewards.iter().any(|r| !(-1.0..=1.0).contains(r)) {
            return Err(Error::InvalidArgument("leaf rewards must lie in [-1, 1]".into()));
        }
        let first_leaf = interior_count(branching, depth);
        let total = first_leaf + leaves;
        let mut node_depth = vec![0usize; total];
        for n in 1..total {
            node_depth[n] = node_depth[(n - 1) / branching] + 1;
        }
        let mut minimax = vec![0.0; total];
        minimax[first_leaf..].copy_from_slice(&leaf_rewards);
        for n in (0..first_leaf).rev() {
            let kids = (0..branching).map(|a| minimax[n * branching + 1 + a]);
            minimax[n] = if node_depth[n].is_multiple_of(2) {
                kids.fold(f64::NEG_INFINITY, f64::max)
            } else {
                kids.fold(f64::INFINITY, f64::min)
            };
        }
        Ok(Self {
            branching,
            depth,
            seed,
            first_leaf,
            leaf_rewards,
            node_depth,
            minimax,
        })
    }

    pub fn branching(&self) -> usize {
        self.branching
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn num_nodes(&self) -> usize {
        self.node_depth.len()
    }

    pub fn num_leaves(&self) -> usize {
        self.leaf_rewards.len()
    }

    pub fn is_terminal(&self, node: usize) -> bool {
        node >= self.first_leaf
    }

    pub fn node_depth(&self, node: usize) -> usize {
        self.node_depth[node]
    }

    /// 0 or 1; only meaningful for interior nodes.
    pub fn player_to_move(&self, node: usize) -> usize {
        self.node_depth[node] % 2
    }

    pub fn child(&self, node: usize, action: usize) -> usize {
        debug_assert!(!self.is_terminal(node) && action < self.branching);
        node * self.branching + 1 + action
    }

    /// Reward of a leaf for player 0.
    pub fn terminal_reward(&self, node: usize) -> f64 {
        self.leaf_rewards[node - self.first_leaf]
    }

    /// Exact minimax value of `node` for player 0, by backward induction.
    pub fn minimax_value(&self, node: usize) -> f64 {
        self.minimax[node]
    }

    /// `sign` that converts player-0 values to `player`'s perspective.
    pub fn sign(player: usize) -> f64 {
        if player == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Child minimax values from the perspective of the player to move.
    pub fn child_values_for_mover(&self, node: usize) -> Vec<f64> {
        let s = Self::sign(self.player_to_move(node));
        (0..self.branching)
            .map(|a| s * self.minimax[self.child(node, a)])
            .collect()
    }

    /// Minimax-optimal action at an interior node, lowest index on ties.
    pub fn best_move(&self, node: usize) -> usize {
        argmax(&self.child_values_for_mover(node))
    }
}

/// Anchor policy `τ(s, ·)` at every interior node.
#[derive(Debug, Clone)]
pub struct SyntheticAnchor {
    pub concentration: f64,
    pub noise_seed: u64,
    policies: Vec<Policy>,
}

impl SyntheticAnchor {
    pub fn new(concentration: f64, noise_seed: u64, policies: Vec<Policy>) -> Self {
        Self {
            concentration,
            noise_seed,
            policies,
        }
    }

    pub fn policy(&self, node: usize) -> &Policy {
        &self.policies[node]
    }

    pub fn num_nodes(&self) -> usize {
        self.policies.len()
    }
}

/// Prior and value function handed to the search.
#[derive(Debug, Clone)]
pub struct TreeModel {
    pub anchor: SyntheticAnchor,
    /// Estimated value of every node for player 0; exact at leaves.
    values: Vec<f64>,
}

impl TreeModel {
    pub fn new(anchor: SyntheticAnchor, values: Vec<f64>) -> Self {
        Self { anchor, values }
    }

    pub fn prior(&self, node: usize) -> &Policy {
        self.anchor.policy(node)
    }

    /// Model value of `node` for player 0.
    pub fn value(&self, node: usize) -> f64 {
        self.values[node]
    }
}

fn interior_count(branching: usize, depth: usize) -> usize {
    (0..depth).map(|k| branching.pow(k as u32)).sum()
}

fn check_size(branching: usize, depth: usize) -> Result<usize> {
    if branching == 0 || depth == 0 {
        return Err(Error::InvalidArgument(
            "tree games need positive branching and depth".into(),
        ));
    }
    let leaves = (branching as u128).checked_pow(depth as u32).unwrap_or(u128::MAX);
    if leaves > TREE_LEAF_LIMIT {
        return Err(Error::TooLarge {
            joint: leaves,
            limit: TREE_LEAF_LIMIT,
        });
    }
    Ok(leaves as usize)
}

/// Seeded tree with uniform leaf rewards on `[−1, 1]`, a noisy softmax anchor
/// over the mover's child minimax values and a noisy clamped value model.
pub fn make_tree_game(
    branching: usize,
    depth: usize,
    seed: u64,
    params: TreeParams,
) -> Result<(TreeGame, TreeModel)> {
    let leaves = check_size(branching, depth)?;
    if !(params.concentration > 0.0) || params.anchor_noise < 0.0 || params.value_noise < 0.0 {
        return Err(Error::InvalidArgument("invalid tree-model parameters".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rewards = (0..leaves).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let game = TreeGame::build(branching, depth, rewards, seed)?;

    let noise_seed = seed ^ 0x9e37_79b9_7f4a_7c15;
    let mut anchor_rng = ChaCha8Rng::seed_from_u64(noise_seed);
    let policies = (0..game.first_leaf)
        .map(|n| {
            let logits: Vec<f64> = game
                .child_values_for_mover(n)
                .into_iter()
                .map(|v| {
                    let z: f64 = anchor_rng.sample(StandardNormal);
                    params.concentration * v + params.anchor_noise * z
                })
                .collect();
            // floor keeps full support when a logit gap underflows exp
            let probs: Vec<f64> = softmax(&logits).into_iter().map(|p| p.max(1e-12)).collect();
            Policy::from_weights(probs).expect("softmax weights are positive")
        })
        .collect();
    let anchor = SyntheticAnchor::new(params.concentration, noise_seed, policies);

    let mut value_rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x51_7cc1_b727_220a));
    let values = (0..game.num_nodes())
        .map(|n| {
            if game.is_terminal(n) {
                game.terminal_reward(n)
            } else {
                let eps = if params.value_noise > 0.0 {
                    value_rng.gen_range(-params.value_noise..=params.value_noise)
                } else {
                    0.0
                };
                (game.minimax_value(n) + eps).clamp(-1.0, 1.0)
            }
        })
        .collect();
    Ok((game, TreeModel::new(anchor, values)))
}
