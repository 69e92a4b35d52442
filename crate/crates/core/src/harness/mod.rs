//! Experiment drivers behind the `pikl` binary.
//!
//! Every command takes an [`ExperimentConfig`], runs its independent cells
//! on a rayon pool, and returns rows in a canonical sorted order so that
//! output is byte-identical across runs and thread counts.

mod blotto;
mod bounds;
mod config;
mod mcts_eval;
mod qre;

pub use blotto::{blotto_sweep, SweepRow};
pub use bounds::{verify_bounds, BoundReport, BoundRow};
pub use config::{parse_eta, AnchorKind, ExperimentConfig, ExperimentKind, GameSpec};
pub use mcts_eval::{mcts_eval, predicted_move, MctsEvalRow};
pub use qre::{qre_check, QreReport, QreRow};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] crate::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl HarnessError {
    /// Process exit code: 2 for configuration problems, 3 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            _ => 3,
        }
    }
}

pub type HarnessResult<T> = std::result::Result<T, HarnessError>;

/// Nine significant digits in scientific notation; `nan` for missing values.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.8e}")
    }
}

/// A header plus string rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn to_csv(&self) -> HarnessResult<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// What a finished command hands back to the CLI.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub table: Table,
    /// Structured report, for commands that have one.
    pub json: Option<serde_json::Value>,
    pub exit_code: i32,
    /// Human-readable summary lines.
    pub notes: Vec<String>,
}

/// Runs `f` on a pool of `jobs` threads (`0` = one per core).
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> HarnessResult<T> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    Ok(pool.install(f))
}

/// Per-player anchors for one cell. Explicit anchors win when their shape
/// matches the game; otherwise `kind` decides, with random anchors drawn from
/// `(game_seed, seed)`.
pub(crate) fn anchors_for(
    game: &crate::NormalFormGame,
    kind: AnchorKind,
    explicit: Option<&[Vec<f64>]>,
    game_seed: u64,
    seed: u64,
) -> HarnessResult<Vec<crate::Policy>> {
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    let np = game.num_players();
    if let Some(anchors) = explicit {
        let fits = anchors.len() == np && (0..np).all(|p| anchors[p].len() == game.num_actions(p));
        if fits {
            return anchors
                .iter()
                .map(|a| crate::Policy::new(a.clone()).map_err(|e| HarnessError::Config(e.to_string())))
                .collect();
        }
    }
    Ok(match kind {
        AnchorKind::Uniform => (0..np).map(|p| crate::Policy::uniform(game.num_actions(p))).collect(),
        AnchorKind::Random => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(
                game_seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ seed.rotate_left(32) ^ 0x5eed,
            );
            (0..np)
                .map(|p| {
                    let z: Vec<f64> = (0..game.num_actions(p)).map(|_| StandardNormal.sample(&mut rng)).collect();
                    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    crate::Policy::from_weights(z.iter().map(|v| (v - max).exp()).collect()).expect("positive weights")
                })
                .collect()
        }
    })
}

/// Runs the experiment named in `config`.
pub fn run_experiment(config: &ExperimentConfig, jobs: usize) -> HarnessResult<Outcome> {
    config.validate()?;
    let hash = config.hash();
    with_jobs(jobs, || match config.experiment {
        ExperimentKind::BlottoSweep => {
            let rows = blotto_sweep(config)?;
            Ok(Outcome {
                table: blotto::table(&rows, &hash),
                json: None,
                exit_code: 0,
                notes: vec![format!("{} rows", rows.len())],
            })
        }
        ExperimentKind::VerifyBounds => {
            let report = verify_bounds(config)?;
            let exit_code = if report.all_kl_bounds_hold() { 0 } else { 1 };
            Ok(Outcome {
                table: report.table(&hash),
                notes: report.summary(),
                json: Some(serde_json::to_value(&report)?),
                exit_code,
            })
        }
        ExperimentKind::MctsEval => {
            let rows = mcts_eval(config)?;
            Ok(Outcome {
                table: mcts_eval::table(&rows, &hash),
                json: None,
                exit_code: 0,
                notes: vec![format!("{} rows", rows.len())],
            })
        }
        ExperimentKind::QreCheck => {
            let report = qre_check(config)?;
            Ok(Outcome {
                table: report.table(&hash),
                notes: report.skipped.clone(),
                json: Some(serde_json::to_value(&report)?),
                exit_code: 0,
            })
        }
    })?
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_nine_significant_digits() {
        assert_eq!(fmt_float(0.123456789123), "1.23456789e-1");
        assert_eq!(fmt_float(-2.0), "-2.00000000e0");
        assert_eq!(fmt_float(f64::NAN), "nan");
    }

    #[test]
    fn config_errors_exit_with_two() {
        assert_eq!(HarnessError::Config("x".into()).exit_code(), 2);
    }
}
