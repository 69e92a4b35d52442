use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{run_search, SearchConfig};
use crate::error::{Error, Result};
use crate::games::{TreeGame, TreeModel};
use crate::policy::Policy;

/// A move-selection rule for tree games.
#[derive(Debug, Clone, PartialEq)]
pub enum Agent {
    /// Searches from the current state and samples the visit policy.
    Mcts(SearchConfig),
    /// Samples the model prior.
    Prior,
    /// Plays the exact minimax move.
    Minimax,
    Uniform,
}

impl Agent {
    fn choose(
        &self,
        game: &TreeGame,
        model: &TreeModel,
        state: usize,
        temperature: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<usize> {
        Ok(match self {
            Agent::Mcts(config) => {
                let tree = run_search(game, model, state, config)?;
                sample(&tree.root().visits_to_policy(temperature), rng)
            }
            Agent::Prior => sample(&temper(model.prior(state), temperature), rng),
            Agent::Minimax => game.best_move(state),
            Agent::Uniform => rng.gen_range(0..game.branching()),
        })
    }
}

fn temper(p: &Policy, temperature: f64) -> Policy {
    if temperature == 1.0 {
        return p.clone();
    }
    if temperature == 0.0 {
        return Policy::pure(p.len(), p.argmax());
    }
    let logits: Vec<f64> = p
        .probs()
        .iter()
        .map(|&x| if x > 0.0 { x.ln() / temperature } else { f64::NEG_INFINITY })
        .collect();
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Policy::from_weights(logits.iter().map(|l| (l - max).exp()).collect())
        .expect("at least one positive entry")
}

fn sample(p: &Policy, rng: &mut ChaCha8Rng) -> usize {
    p.sample_with(rng.gen::<f64>())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    /// Per-game score of the first agent: 1 win, 0.5 draw, 0 loss.
    pub scores: Vec<f64>,
    pub mean: f64,
    /// Standard error of the mean.
    pub stderr: f64,
}

impl MatchResult {
    pub fn from_scores(scores: Vec<f64>) -> Self {
        let n = scores.len() as f64;
        let mean = if scores.is_empty() { 0.0 } else { scores.iter().sum::<f64>() / n };
        let stderr = if scores.len() < 2 {
            0.0
        } else {
            let var = scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        };
        Self { scores, mean, stderr }
    }
}

/// Plays one game with agent A in seat `a_seat` and returns A's score.
pub fn play_game(
    game: &TreeGame,
    model: &TreeModel,
    agent_a: &Agent,
    agent_b: &Agent,
    a_seat: usize,
    temperature: f64,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let mut state = game.root();
    while !game.is_terminal(state) {
        let agent = if game.player_to_move(state) == a_seat { agent_a } else { agent_b };
        let action = agent.choose(game, model, state, temperature, rng)?;
        state = game.child(state, action);
    }
    let r = TreeGame::sign(a_seat) * game.terminal_reward(state);
    Ok(if r > 0.0 {
        1.0
    } else if r < 0.0 {
        0.0
    } else {
        0.5
    })
}

/// Seeded generator for game `index` of a match.
pub fn game_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ index)
}

/// Plays `games` games of `agent_a` against `agent_b`, alternating who moves
/// first (agent A moves first in even-numbered games). Stochastic choices
/// use `temperature`.
pub fn play_match(
    game: &TreeGame,
    model: &TreeModel,
    agent_a: &Agent,
    agent_b: &Agent,
    games: usize,
    temperature: f64,
    seed: u64,
) -> Result<MatchResult> {
    if !(temperature >= 0.0) {
        return Err(Error::InvalidArgument(format!("invalid temperature {temperature}")));
    }
    let scores = (0..games)
        .map(|g| {
            let mut rng = game_rng(seed, g as u64);
            play_game(game, model, agent_a, agent_b, g % 2, temperature, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MatchResult::from_scores(scores))
}
