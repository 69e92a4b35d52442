use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{anchors_for, fmt_float, ExperimentConfig, HarnessResult, Table};
use crate::policy::kl_divergence;
use crate::solvers::{run_selfplay, PlayerSpec, SelfplayOptions, SolverSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// `pikl`, `hedge` or `rm`.
    pub solver: String,
    pub lambda: f64,
    pub seed: u64,
    #[serde(rename = "T")]
    pub t: u64,
    /// Mean over players of `KL(π̄_i ‖ τ_i)`.
    pub kl_to_anchor: f64,
    /// Sum over players of the best-response gain against `π̄`.
    pub exploitability: f64,
    /// Largest per-player regularized regret, divided by `T`.
    pub regret: f64,
}

fn solver_order(name: &str) -> u8 {
    match name {
        "pikl" => 0,
        "hedge" => 1,
        _ => 2,
    }
}

/// piKL across the λ grid (λ = 0 runs plain Hedge), plus Hedge and regret
/// matching baselines, for every seed.
pub fn blotto_sweep(config: &ExperimentConfig) -> HarnessResult<Vec<SweepRow>> {
    let spec = config.game_specs("blotto:10:3").remove(0);
    let (_, game) = spec.build(1, config.game_seed)?.remove(0);
    let eta = config.eta_spec();

    let mut cells: Vec<(&'static str, f64, u64)> = Vec::new();
    for &seed in &config.seeds {
        for &lambda in &config.lambdas {
            cells.push(if lambda > 0.0 { ("pikl", lambda, seed) } else { ("hedge", 0.0, seed) });
        }
        if config.baselines {
            cells.push(("hedge", 0.0, seed));
            cells.push(("rm", 0.0, seed));
        }
    }
    cells.sort_by(|a, b| {
        (solver_order(a.0), a.2)
            .cmp(&(solver_order(b.0), b.2))
            .then(a.1.total_cmp(&b.1))
    });
    cells.dedup();

    cells
        .into_par_iter()
        .map(|(solver, lambda, seed)| {
            let anchors = anchors_for(&game, config.anchor, config.anchors.as_deref(), config.game_seed, seed)?;
            let solver_spec = match solver {
                "pikl" => SolverSpec::Pikl { lambda, eta },
                "hedge" => SolverSpec::Hedge { eta },
                _ => SolverSpec::RegretMatching,
            };
            let players: Vec<PlayerSpec> = anchors
                .iter()
                .map(|a| PlayerSpec {
                    solver: solver_spec.clone(),
                    anchor: a.clone(),
                })
                .collect();
            let options = SelfplayOptions {
                iterations: config.iterations,
                mode: config.mode,
                seed,
                record_iterates: false,
            };
            let result = run_selfplay(&game, &players, options)?;
            let np = anchors.len() as f64;
            let mut kl = 0.0;
            for (avg, anchor) in result.average.policies().iter().zip(&anchors) {
                kl += kl_divergence(avg, anchor)? / np;
            }
            let exploitability = game.exploitability(&result.average)?.total;
            let regret = result.regret.iter().cloned().fold(f64::NEG_INFINITY, f64::max) / config.iterations as f64;
            Ok(SweepRow {
                solver: solver.to_string(),
                lambda,
                seed,
                t: config.iterations,
                kl_to_anchor: kl,
                exploitability,
                regret,
            })
        })
        .collect()
}

pub(crate) fn table(rows: &[SweepRow], hash: &str) -> Table {
    Table {
        header: vec!["solver", "lambda", "seed", "T", "kl_to_anchor", "exploitability", "regret", "config_hash"],
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    r.solver.clone(),
                    fmt_float(r.lambda),
                    r.seed.to_string(),
                    r.t.to_string(),
                    fmt_float(r.kl_to_anchor),
                    fmt_float(r.exploitability),
                    fmt_float(r.regret),
                    hash.to_string(),
                ]
            })
            .collect(),
    }
}
