//! Simultaneous self-play of independent learners with trajectory diagnostics.

use serde::{Deserialize, Serialize};

use super::eta::{theory_eta, EtaMode, ADAPTIVE_C};
use super::{HedgeState, Learner, PiklState, RegretTracker, RmState};
use crate::error::{Error, Result};
use crate::game::{NormalFormGame, EXACT_LIMIT};
use crate::policy::{kl_with_log, Policy, Profile};

/// How opponents' play enters each learner's update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Every player samples an action; utilities are against the sampled joint action.
    Sampled,
    /// Utilities are expectations against the opponents' iterates.
    Exact,
}

/// Step size request, resolved against the game and anchor at setup.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaSpec {
    /// `1 / (λβ + 2D)`.
    #[default]
    Theory,
    Constant(f64),
    Adaptive { c: f64 },
}

impl EtaSpec {
    pub fn adaptive() -> Self {
        EtaSpec::Adaptive { c: ADAPTIVE_C }
    }

    pub fn resolve(self, lambda: f64, anchor: &Policy, range: f64) -> EtaMode {
        match self {
            EtaSpec::Theory => EtaMode::Constant(theory_eta(lambda, anchor.max_log_inverse(), range)),
            EtaSpec::Constant(e) => EtaMode::Constant(e),
            EtaSpec::Adaptive { c } => EtaMode::Adaptive { c },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverSpec {
    Hedge { eta: EtaSpec },
    RegretMatching,
    Pikl { lambda: f64, eta: EtaSpec },
}

impl SolverSpec {
    /// Regularization strength used for regret measurement.
    pub fn lambda(&self) -> f64 {
        match self {
            SolverSpec::Pikl { lambda, .. } => *lambda,
            _ => 0.0,
        }
    }
}

/// A player's solver plus the anchor it is regularized toward (piKL) or
/// measured against (all solvers).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerSpec {
    pub solver: SolverSpec,
    pub anchor: Policy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelfplayOptions {
    pub iterations: u64,
    pub mode: Mode,
    pub seed: u64,
    /// Keep every iterate of every player in the result.
    pub record_iterates: bool,
}

/// Diagnostics for one player at one checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub t: u64,
    pub player: usize,
    pub kl_iterate: f64,
    pub kl_avg: f64,
    /// Regret under the regularized utilities (raw regret when `λ = 0`).
    pub regret: f64,
    pub raw_regret: f64,
    /// Total Nash gap of the average profile, when exactly computable.
    pub exploitability: Option<f64>,
    pub eta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfplayResult {
    pub average: Profile,
    pub checkpoints: Vec<Checkpoint>,
    /// Regularized regret per player after the last iteration.
    pub regret: Vec<f64>,
    pub raw_regret: Vec<f64>,
    /// Step size used on the last iteration, per player.
    pub final_eta: Vec<Option<f64>>,
    pub iterates: Option<Vec<Vec<Policy>>>,
}

/// `1, 2, 4, …` up to `iterations`, plus `iterations` itself.
pub fn checkpoint_times(iterations: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut t = 1u64;
    while t < iterations {
        out.push(t);
        t = t.saturating_mul(2);
    }
    if iterations >= 1 {
        out.push(iterations);
    }
    out
}

fn build_learner(
    game: &NormalFormGame,
    player: usize,
    spec: &PlayerSpec,
    seed: u64,
) -> Result<Box<dyn Learner + Send>> {
    let n = game.num_actions(player);
    if spec.anchor.len() != n {
        return Err(Error::InvalidArgument(format!(
            "anchor of player {player} has {} entries, game has {n} actions",
            spec.anchor.len()
        )));
    }
    if let Some(a) = spec.anchor.probs().iter().position(|p| *p <= 0.0) {
        return Err(Error::AnchorNotFullSupport { action: a });
    }
    let range = game.bounds(player).range();
    Ok(match &spec.solver {
        SolverSpec::Hedge { eta } => Box::new(HedgeState::new(n, eta.resolve(0.0, &spec.anchor, range), seed)),
        SolverSpec::RegretMatching => Box::new(RmState::new(n, seed)),
        SolverSpec::Pikl { lambda, eta } => Box::new(PiklState::new(
            spec.anchor.clone(),
            *lambda,
            eta.resolve(*lambda, &spec.anchor, range),
            seed,
        )?),
    })
}

/// Per-player RNG seed derived from the run seed.
pub(crate) fn player_seed(seed: u64, player: usize) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add((player as u64 + 1).wrapping_mul(0xd1b5_4a32_d192_ed03))
}

/// Runs all players' learners against each other for `iterations` rounds.
pub fn run_selfplay(
    game: &NormalFormGame,
    players: &[PlayerSpec],
    options: SelfplayOptions,
) -> Result<SelfplayResult> {
    let np = game.num_players();
    if players.len() != np {
        return Err(Error::InvalidArgument(format!(
            "{} player specs for a {np}-player game",
            players.len()
        )));
    }
    if options.iterations == 0 {
        return Err(Error::InvalidArgument("need at least one iteration".into()));
    }
    let exact_ok = game.num_joint_actions() <= EXACT_LIMIT;
    if options.mode == Mode::Exact && !exact_ok {
        return Err(Error::TooLarge {
            joint: game.num_joint_actions(),
            limit: EXACT_LIMIT,
        });
    }

    let mut learners = players
        .iter()
        .enumerate()
        .map(|(p, spec)| build_learner(game, p, spec, player_seed(options.seed, p)))
        .collect::<Result<Vec<_>>>()?;
    let mut trackers: Vec<RegretTracker> = players
        .iter()
        .map(|s| RegretTracker::new(&s.anchor, s.solver.lambda()))
        .collect();
    let log_anchors: Vec<Vec<f64>> = players
        .iter()
        .map(|s| s.anchor.probs().iter().map(|p| p.ln()).collect())
        .collect();

    let mut iterates: Vec<Policy> = (0..np).map(|p| Policy::uniform(game.num_actions(p))).collect();
    let mut values: Vec<Vec<f64>> = (0..np).map(|p| vec![0.0; game.num_actions(p)]).collect();
    let mut joint = vec![0usize; np];
    let mut history: Option<Vec<Vec<Policy>>> = options
        .record_iterates
        .then(|| vec![Vec::with_capacity(options.iterations.min(1 << 20) as usize); np]);

    let times = checkpoint_times(options.iterations);
    let mut next_cp = 0usize;
    let mut checkpoints = Vec::new();

    for t in 1..=options.iterations {
        for (p, l) in learners.iter_mut().enumerate() {
            iterates[p].copy_from(l.next_policy());
        }
        match options.mode {
            Mode::Exact => {
                for (p, v) in values.iter_mut().enumerate() {
                    game.action_values_into(&iterates, p, v);
                }
            }
            Mode::Sampled => {
                for (p, l) in learners.iter_mut().enumerate() {
                    joint[p] = l.sample_action();
                }
                for (p, v) in values.iter_mut().enumerate() {
                    game.action_values_vs_joint_into(&joint, p, v);
                }
            }
        }
        for p in 0..np {
            trackers[p].record(&iterates[p], &values[p]);
            learners[p].observe(&values[p]);
        }
        if let Some(h) = history.as_mut() {
            for p in 0..np {
                h[p].push(iterates[p].clone());
            }
        }

        if times.get(next_cp) == Some(&t) {
            next_cp += 1;
            let averages = Profile::new(learners.iter().map(|l| l.average_policy()).collect());
            let exploitability = if exact_ok {
                Some(game.exploitability(&averages)?.total)
            } else {
                None
            };
            for p in 0..np {
                checkpoints.push(Checkpoint {
                    t,
                    player: p,
                    kl_iterate: kl_with_log(iterates[p].probs(), &log_anchors[p]),
                    kl_avg: kl_with_log(averages.get(p).probs(), &log_anchors[p]),
                    regret: trackers[p].regularized_regret(),
                    raw_regret: trackers[p].raw_regret(),
                    exploitability,
                    eta: learners[p].current_eta(),
                });
            }
        }
    }

    Ok(SelfplayResult {
        average: Profile::new(learners.iter().map(|l| l.average_policy()).collect()),
        checkpoints,
        regret: trackers.iter().map(RegretTracker::regularized_regret).collect(),
        raw_regret: trackers.iter().map(RegretTracker::raw_regret).collect(),
        final_eta: learners.iter().map(|l| l.current_eta()).collect(),
        iterates: history,
    })
}
