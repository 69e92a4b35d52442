use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fmt_float, ExperimentConfig, HarnessResult, Table};
use crate::error::Error;
use crate::games::{make_tree_game, TreeGame, TreeModel, TreeParams};
use crate::mcts::{game_rng, play_game, run_search, Agent, FpuMode, MatchResult, SearchConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MctsEvalRow {
    pub c_puct: f64,
    pub seed: u64,
    /// Share of trees where the smoothed root policy's argmax is the prior's argmax.
    pub top1_agreement_with_anchor_argmax: f64,
    /// Share of trees where the smoothed root policy's argmax is the minimax move.
    pub top1_agreement_with_minimax: f64,
    /// Mean score of search against prior sampling.
    pub winrate_vs_prior: f64,
    pub stderr: f64,
    /// Share of trees where the prior's argmax is the minimax move.
    pub prior_top1_agreement_with_minimax: f64,
}

fn search_config(config: &ExperimentConfig, c_puct: f64, seed: u64) -> SearchConfig {
    SearchConfig {
        iterations: config.simulations,
        c_puct,
        temperature: config.temperature,
        seed,
        fpu: FpuMode::SiblingMean,
    }
}

/// Root move predicted by search: argmax of the smoothed policy, or of the
/// prior when no child was visited.
pub fn predicted_move(
    game: &TreeGame,
    model: &TreeModel,
    state: usize,
    config: &SearchConfig,
) -> crate::Result<usize> {
    let tree = run_search(game, model, state, config)?;
    match tree.root().grill_policy(config.c_puct, 0.0) {
        Ok(p) => Ok(p.argmax()),
        Err(Error::NoVisitedActions) => Ok(model.prior(state).argmax()),
        Err(e) => Err(e),
    }
}

/// Prediction and head-to-head statistics of search across a c_puct grid on
/// synthetic trees with noisy priors.
pub fn mcts_eval(config: &ExperimentConfig) -> HarnessResult<Vec<MctsEvalRow>> {
    let params = TreeParams {
        concentration: config.concentration,
        anchor_noise: config.anchor_noise,
        value_noise: config.value_noise,
    };
    let trees = (0..config.trees as u64)
        .into_par_iter()
        .map(|i| make_tree_game(config.branching, config.depth, config.game_seed + i, params))
        .collect::<crate::Result<Vec<_>>>()?;
    let n = trees.len() as f64;
    let prior_agreement = trees
        .iter()
        .filter(|(g, m)| m.prior(g.root()).argmax() == g.best_move(g.root()))
        .count() as f64
        / n;

    let mut cells = Vec::new();
    for &c in &config.c_puct {
        for &seed in &config.seeds {
            cells.push((c, seed));
        }
    }
    cells.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    cells
        .into_iter()
        .map(|(c_puct, seed)| {
            let search = search_config(config, c_puct, seed);
            let predictions = trees
                .par_iter()
                .map(|(g, m)| predicted_move(g, m, g.root(), &search))
                .collect::<crate::Result<Vec<_>>>()?;
            let (mut with_anchor, mut with_minimax) = (0usize, 0usize);
            for ((g, m), pred) in trees.iter().zip(&predictions) {
                with_anchor += (*pred == m.prior(g.root()).argmax()) as usize;
                with_minimax += (*pred == g.best_move(g.root())) as usize;
            }

            let agent = Agent::Mcts(search);
            let scores = (0..config.match_games)
                .into_par_iter()
                .map(|j| {
                    let (g, m) = &trees[j * trees.len() / config.match_games.max(1)];
                    let mut rng = game_rng(seed, j as u64);
                    play_game(g, m, &agent, &Agent::Prior, j % 2, config.temperature, &mut rng)
                })
                .collect::<crate::Result<Vec<_>>>()?;
            let result = MatchResult::from_scores(scores);
            Ok(MctsEvalRow {
                c_puct,
                seed,
                top1_agreement_with_anchor_argmax: with_anchor as f64 / n,
                top1_agreement_with_minimax: with_minimax as f64 / n,
                winrate_vs_prior: result.mean,
                stderr: result.stderr,
                prior_top1_agreement_with_minimax: prior_agreement,
            })
        })
        .collect()
}

pub(crate) fn table(rows: &[MctsEvalRow], hash: &str) -> Table {
    Table {
        header: vec![
            "c_puct",
            "seed",
            "top1_agreement_with_anchor_argmax",
            "top1_agreement_with_minimax",
            "winrate_vs_prior",
            "stderr",
            "prior_top1_agreement_with_minimax",
            "config_hash",
        ],
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    fmt_float(r.c_puct),
                    r.seed.to_string(),
                    fmt_float(r.top1_agreement_with_anchor_argmax),
                    fmt_float(r.top1_agreement_with_minimax),
                    fmt_float(r.winrate_vs_prior),
                    fmt_float(r.stderr),
                    fmt_float(r.prior_top1_agreement_with_minimax),
                    hash.to_string(),
                ]
            })
            .collect(),
    }
}
