#![allow(dead_code)]

use pikl::games::{make_tree_game, TreeGame, TreeModel, TreeParams};
use pikl::Policy;
use rand::Rng;

pub const GRID: usize = 1000;

/// `Σ π·Q − λ Σ π ln(π/τ)`, with `0 ln 0 = 0`.
pub fn forward_objective(pi: &[f64], q: &[f64], tau: &[f64], lambda: f64) -> f64 {
    let mut value = 0.0;
    for a in 0..pi.len() {
        value += pi[a] * q[a];
        if pi[a] > 0.0 {
            value -= lambda * pi[a] * (pi[a] / tau[a]).ln();
        }
    }
    value
}

/// `Σ π·Q − λ Σ τ ln(τ/π)`; `−∞` off the interior.
pub fn reverse_objective(pi: &[f64], q: &[f64], tau: &[f64], lambda: f64) -> f64 {
    let mut value = 0.0;
    for a in 0..pi.len() {
        if pi[a] <= 0.0 {
            return f64::NEG_INFINITY;
        }
        value += pi[a] * q[a] - lambda * tau[a] * (tau[a] / pi[a]).ln();
    }
    value
}

/// Exhaustive search over the 3-simplex grid with step `1/GRID`.
pub fn grid_argmax3(objective: impl Fn(&[f64]) -> f64) -> [f64; 3] {
    let h = 1.0 / GRID as f64;
    let mut best = [f64::NAN; 3];
    let mut best_value = f64::NEG_INFINITY;
    for i in 0..=GRID {
        for j in 0..=GRID - i {
            let p = [i as f64 * h, j as f64 * h, (GRID - i - j) as f64 * h];
            let v = objective(&p);
            if v > best_value {
                best_value = v;
                best = p;
            }
        }
    }
    best
}

pub fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Full-support random policy with entries bounded away from zero.
pub fn random_policy(rng: &mut impl Rng, n: usize, floor: f64) -> Policy {
    let w: Vec<f64> = (0..n).map(|_| floor + rng.gen::<f64>()).collect();
    Policy::from_weights(w).unwrap()
}

pub fn tree(branching: usize, depth: usize, seed: u64) -> (TreeGame, TreeModel) {
    make_tree_game(branching, depth, seed, TreeParams::default()).unwrap()
}

/// Smallest and largest mover-perspective values (model values of interior
/// nodes, exact rewards at leaves) in the subtree under `node`, seen by
/// `player`.
pub fn subtree_value_range(game: &TreeGame, model: &TreeModel, node: usize, player: usize) -> (f64, f64) {
    let sign = TreeGame::sign(player);
    let own = if game.is_terminal(node) {
        game.terminal_reward(node)
    } else {
        model.value(node)
    } * sign;
    let mut range = (own, own);
    if !game.is_terminal(node) {
        for a in 0..game.branching() {
            let (lo, hi) = subtree_value_range(game, model, game.child(node, a), player);
            range = (range.0.min(lo), range.1.max(hi));
        }
    }
    range
}

/// Exact expected score of the minimax player in seat `me` against a
/// uniformly random opponent, by full enumeration.
pub fn minimax_vs_uniform(game: &TreeGame, node: usize, me: usize) -> f64 {
    if game.is_terminal(node) {
        let r = TreeGame::sign(me) * game.terminal_reward(node);
        return if r > 0.0 {
            1.0
        } else if r < 0.0 {
            0.0
        } else {
            0.5
        };
    }
    if game.player_to_move(node) == me {
        return minimax_vs_uniform(game, game.child(node, game.best_move(node)), me);
    }
    let b = game.branching();
    (0..b).map(|a| minimax_vs_uniform(game, game.child(node, a), me)).sum::<f64>() / b as f64
}
