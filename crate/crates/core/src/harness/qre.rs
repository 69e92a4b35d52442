use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{anchors_for, fmt_float, ExperimentConfig, HarnessResult, Table};
use crate::anchored::{anchored_qre, QreOptions};
use crate::solvers::{run_selfplay, Mode, PlayerSpec, SelfplayOptions, SolverSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QreRow {
    pub game: String,
    pub lambda: f64,
    pub seed: u64,
    pub player: usize,
    #[serde(rename = "T")]
    pub t: u64,
    /// `‖π̄_i − π*_i‖_∞` between the self-play average and the fixed point.
    pub linf_gap: f64,
    pub qre_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QreReport {
    pub rows: Vec<QreRow>,
    /// Cells left out because the fixed-point solver did not converge.
    pub skipped: Vec<String>,
}

impl QreReport {
    pub fn max_gap(&self) -> f64 {
        self.rows.iter().map(|r| r.linf_gap).fold(0.0, f64::max)
    }

    pub(crate) fn table(&self, hash: &str) -> Table {
        Table {
            header: vec!["game", "lambda", "seed", "player", "T", "linf_gap", "qre_residual", "config_hash"],
            rows: self
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.game.clone(),
                        fmt_float(r.lambda),
                        r.seed.to_string(),
                        r.player.to_string(),
                        r.t.to_string(),
                        fmt_float(r.linf_gap),
                        fmt_float(r.qre_residual),
                        hash.to_string(),
                    ]
                })
                .collect(),
        }
    }
}

/// Compares exact piKL self-play averages against the anchored logit
/// equilibrium for every (game, λ, seed).
pub fn qre_check(config: &ExperimentConfig) -> HarnessResult<QreReport> {
    let mut games = Vec::new();
    for spec in config.game_specs("pennies") {
        games.extend(spec.build(config.num_games, config.game_seed)?);
    }
    let eta = config.eta_spec();
    let mut cells = Vec::new();
    for g in 0..games.len() {
        for &lambda in &config.lambdas {
            for &seed in &config.seeds {
                cells.push((g, lambda, seed));
            }
        }
    }
    let outcomes: Vec<Result<Vec<QreRow>, String>> = cells
        .into_par_iter()
        .map(|(g, lambda, seed)| {
            let (name, game) = &games[g];
            let anchors = anchors_for(game, config.anchor, config.anchors.as_deref(), config.game_seed + g as u64, seed)?;
            let fixed_point = anchored_qre(game, &anchors, lambda, QreOptions::default())?;
            if !fixed_point.converged {
                return Ok(Err(format!(
                    "{name} lambda={lambda} seed={seed}: fixed point not found (residual {:.3e})",
                    fixed_point.residual
                )));
            }
            let players: Vec<PlayerSpec> = anchors
                .iter()
                .map(|a| PlayerSpec {
                    solver: SolverSpec::Pikl { lambda, eta },
                    anchor: a.clone(),
                })
                .collect();
            let options = SelfplayOptions {
                iterations: config.iterations,
                mode: Mode::Exact,
                seed,
                record_iterates: false,
            };
            let result = run_selfplay(game, &players, options)?;
            Ok(Ok((0..game.num_players())
                .map(|p| QreRow {
                    game: name.clone(),
                    lambda,
                    seed,
                    player: p,
                    t: config.iterations,
                    linf_gap: result.average.get(p).linf_distance(fixed_point.profile.get(p)),
                    qre_residual: fixed_point.residual,
                })
                .collect()))
        })
        .collect::<HarnessResult<_>>()?;
    let mut report = QreReport {
        rows: Vec::new(),
        skipped: Vec::new(),
    };
    for outcome in outcomes {
        match outcome {
            Ok(rows) => report.rows.extend(rows),
            Err(note) => report.skipped.push(note),
        }
    }
    Ok(report)
}
