use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{anchors_for, fmt_float, ExperimentConfig, HarnessResult, Table};
use crate::solvers::{run_selfplay, theory_eta, Mode, PlayerSpec, SelfplayOptions, SolverSpec};

/// Additive tolerance on the anchor-distance bound.
pub const KL_TOLERANCE: f64 = 1e-9;

/// Finite-horizon allowance on the Nash-gap bound: `5·D/√T`.
pub fn gap_slack(range: f64, t: u64) -> f64 {
    5.0 * range / (t as f64).sqrt()
}

/// One player in one (game, λ, seed) run at the final horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub game: String,
    pub lambda: f64,
    pub seed: u64,
    pub player: usize,
    #[serde(rename = "T")]
    pub t: u64,
    /// Step size in use at the end of the run.
    pub eta: f64,
    /// Whether `η ≤ 1/(λβ + 2D)`.
    pub eta_within_theory: bool,
    /// `KL(π̄ ‖ τ)` at `T`.
    pub kl_avg: f64,
    /// `(R^T/T + D)/λ` at `T`.
    pub kl_bound: f64,
    /// The KL bound held at every checkpoint up to `T`.
    pub kl_pass: bool,
    /// Largest `KL − bound` over the checkpoints.
    pub kl_worst_excess: f64,
    /// Best-response gain for this player against `π̄`.
    pub gap: f64,
    /// `λβ` with `β = max_a log(1/τ(a))`.
    pub gap_bound: f64,
    pub gap_slack: f64,
    /// `None` where the gap bound does not apply (not two-player zero-sum).
    pub gap_pass: Option<bool>,
    pub regret: f64,
    pub raw_regret: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub rows: Vec<BoundRow>,
    pub cells: usize,
    pub kl_pass_cells: usize,
    pub gap_cells: usize,
    pub gap_pass_cells: usize,
}

impl BoundReport {
    fn from_rows(rows: Vec<BoundRow>) -> Self {
        let mut cells = 0;
        let (mut kl_pass_cells, mut gap_cells, mut gap_pass_cells) = (0, 0, 0);
        for cell in rows.chunk_by(|a, b| (&a.game, a.lambda.to_bits(), a.seed) == (&b.game, b.lambda.to_bits(), b.seed)) {
            cells += 1;
            kl_pass_cells += cell.iter().all(|r| r.kl_pass) as usize;
            if cell.iter().all(|r| r.gap_pass.is_some()) {
                gap_cells += 1;
                gap_pass_cells += cell.iter().all(|r| r.gap_pass == Some(true)) as usize;
            }
        }
        Self {
            rows,
            cells,
            kl_pass_cells,
            gap_cells,
            gap_pass_cells,
        }
    }

    pub fn all_kl_bounds_hold(&self) -> bool {
        self.kl_pass_cells == self.cells
    }

    /// Fraction of applicable cells whose Nash gaps are within bound + slack.
    pub fn gap_pass_fraction(&self) -> Option<f64> {
        (self.gap_cells > 0).then(|| self.gap_pass_cells as f64 / self.gap_cells as f64)
    }

    pub fn summary(&self) -> Vec<String> {
        let mut lines = vec![format!(
            "anchor-distance bound: {}/{} cells pass",
            self.kl_pass_cells, self.cells
        )];
        if self.gap_cells > 0 {
            lines.push(format!(
                "nash-gap bound: {}/{} cells pass",
                self.gap_pass_cells, self.gap_cells
            ));
        }
        lines
    }

    pub(crate) fn table(&self, hash: &str) -> Table {
        let flag = |b: bool| if b { "pass" } else { "fail" }.to_string();
        Table {
            header: vec![
                "game",
                "lambda",
                "seed",
                "player",
                "T",
                "eta",
                "eta_within_theory",
                "kl_avg",
                "kl_bound",
                "kl_pass",
                "kl_worst_excess",
                "gap",
                "gap_bound",
                "gap_slack",
                "gap_pass",
                "regret",
                "raw_regret",
                "config_hash",
            ],
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
                        fmt_float(r.eta),
                        r.eta_within_theory.to_string(),
                        fmt_float(r.kl_avg),
                        fmt_float(r.kl_bound),
                        flag(r.kl_pass),
                        fmt_float(r.kl_worst_excess),
                        fmt_float(r.gap),
                        fmt_float(r.gap_bound),
                        fmt_float(r.gap_slack),
                        r.gap_pass.map_or_else(|| "na".to_string(), flag),
                        fmt_float(r.regret),
                        fmt_float(r.raw_regret),
                        hash.to_string(),
                    ]
                })
                .collect(),
        }
    }
}

/// Runs piKL self-play in exact mode for every (game, λ, seed) cell and
/// checks the anchor-distance and Nash-gap bounds.
pub fn verify_bounds(config: &ExperimentConfig) -> HarnessResult<BoundReport> {
    let mut games = Vec::new();
    for spec in config.game_specs("random:10") {
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
    let per_cell: Vec<Vec<BoundRow>> = cells
        .into_par_iter()
        .map(|(g, lambda, seed)| {
            let (name, game) = &games[g];
            let game_seed = config.game_seed + g as u64;
            let anchors = anchors_for(game, config.anchor, config.anchors.as_deref(), game_seed, seed)?;
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
            let gaps = game.exploitability(&result.average)?.gaps;
            let nash_applies = game.num_players() == 2 && game.is_zero_sum();
            let rows = (0..game.num_players())
                .map(|p| {
                    let range = game.bounds(p).range();
                    let beta = anchors[p].max_log_inverse();
                    let excess = |t: u64, kl: f64, regret: f64| kl - (regret / t as f64 + range) / lambda;
                    let worst = result
                        .checkpoints
                        .iter()
                        .filter(|c| c.player == p)
                        .map(|c| excess(c.t, c.kl_avg, c.regret))
                        .fold(f64::NEG_INFINITY, f64::max);
                    let last = result
                        .checkpoints
                        .iter()
                        .rev()
                        .find(|c| c.player == p)
                        .expect("final checkpoint");
                    let eta = result.final_eta[p].unwrap_or(f64::NAN);
                    let gap_bound = lambda * beta;
                    let slack = gap_slack(range, config.iterations);
                    BoundRow {
                        game: name.clone(),
                        lambda,
                        seed,
                        player: p,
                        t: config.iterations,
                        eta,
                        eta_within_theory: eta <= theory_eta(lambda, beta, range) * (1.0 + 1e-12),
                        kl_avg: last.kl_avg,
                        kl_bound: (last.regret / config.iterations as f64 + range) / lambda,
                        kl_pass: worst <= KL_TOLERANCE,
                        kl_worst_excess: worst,
                        gap: gaps[p],
                        gap_bound,
                        gap_slack: slack,
                        gap_pass: nash_applies.then(|| gaps[p] <= gap_bound + slack),
                        regret: last.regret,
                        raw_regret: last.raw_regret,
                    }
                })
                .collect();
            Ok(rows)
        })
        .collect::<HarnessResult<_>>()?;
    Ok(BoundReport::from_rows(per_cell.into_iter().flatten().collect()))
}
