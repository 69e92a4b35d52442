use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::HarnessError;
use crate::games::{make_blotto, make_matching_pennies, make_random_zero_sum, make_rps};
use crate::game::NormalFormGame;
use crate::solvers::{EtaSpec, Mode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    BlottoSweep,
    VerifyBounds,
    MctsEval,
    QreCheck,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::BlottoSweep => "blotto-sweep",
            ExperimentKind::VerifyBounds => "verify-bounds",
            ExperimentKind::MctsEval => "mcts-eval",
            ExperimentKind::QreCheck => "qre-check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorKind {
    #[default]
    Uniform,
    /// `softmax(z)` with standard normal `z`, drawn per (game, seed).
    Random,
}

/// Flat experiment configuration read from TOML. Keys that a given
/// experiment does not use are ignored by it; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Game specs: `blotto:<coins>:<fields>`, `rps`, `pennies`, `random:<n>`.
    #[serde(default)]
    pub games: Vec<String>,
    #[serde(default)]
    pub lambdas: Vec<f64>,
    #[serde(default = "default_iterations")]
    pub iterations: u64,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// `theory`, `adaptive`, `adaptive:<c>` or a positive number.
    #[serde(default = "default_eta")]
    pub eta: String,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default)]
    pub output: Option<PathBuf>,

    /// Include Hedge and regret-matching rows in a Blotto sweep.
    #[serde(default = "default_true")]
    pub baselines: bool,

    /// Number of games drawn for each `random:<n>` spec.
    #[serde(default = "default_num_games")]
    pub num_games: usize,
    /// Seed of the first drawn game; later games use consecutive seeds.
    #[serde(default)]
    pub game_seed: u64,
    #[serde(default)]
    pub anchor: AnchorKind,
    /// Explicit per-player anchors; overrides `anchor` for games of matching shape.
    #[serde(default)]
    pub anchors: Option<Vec<Vec<f64>>>,

    #[serde(default)]
    pub c_puct: Vec<f64>,
    #[serde(default = "default_trees")]
    pub trees: usize,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default = "default_branching")]
    pub branching: usize,
    #[serde(default = "default_simulations")]
    pub simulations: usize,
    /// Head-to-head games per c_puct value, spread evenly over the trees.
    #[serde(default = "default_match_games")]
    pub match_games: usize,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_concentration")]
    pub concentration: f64,
    #[serde(default = "default_anchor_noise")]
    pub anchor_noise: f64,
    #[serde(default = "default_value_noise")]
    pub value_noise: f64,
}

fn default_iterations() -> u64 {
    10_000
}
fn default_seeds() -> Vec<u64> {
    vec![0]
}
fn default_eta() -> String {
    "theory".into()
}
fn default_mode() -> Mode {
    Mode::Exact
}
fn default_true() -> bool {
    true
}
fn default_num_games() -> usize {
    20
}
fn default_trees() -> usize {
    200
}
fn default_depth() -> usize {
    4
}
fn default_branching() -> usize {
    3
}
fn default_simulations() -> usize {
    50
}
fn default_match_games() -> usize {
    1000
}
fn default_temperature() -> f64 {
    1.0
}
fn default_concentration() -> f64 {
    2.0
}
fn default_anchor_noise() -> f64 {
    1.0
}
fn default_value_noise() -> f64 {
    0.2
}

/// A parsed game spec.
#[derive(Debug, Clone, PartialEq)]
pub enum GameSpec {
    Blotto { coins: usize, fields: usize },
    Rps,
    Pennies,
    Random { n: usize },
}

impl GameSpec {
    pub fn parse(spec: &str) -> Result<Self, HarnessError> {
        let parts: Vec<&str> = spec.trim().split(':').collect();
        let num = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| HarnessError::Config(format!("bad number {s:?} in game spec {spec:?}")))
        };
        match parts.as_slice() {
            ["rps"] => Ok(GameSpec::Rps),
            ["pennies"] => Ok(GameSpec::Pennies),
            ["blotto", c, f] => Ok(GameSpec::Blotto {
                coins: num(c)?,
                fields: num(f)?,
            }),
            ["random", n] => Ok(GameSpec::Random { n: num(n)? }),
            _ => Err(HarnessError::Config(format!("unknown game spec {spec:?}"))),
        }
    }

    /// Instantiates the spec; `random:<n>` yields `count` games seeded from
    /// `first_seed`, everything else a single game.
    pub fn build(&self, count: usize, first_seed: u64) -> Result<Vec<(String, NormalFormGame)>, HarnessError> {
        Ok(match *self {
            GameSpec::Rps => vec![("rps".into(), make_rps())],
            GameSpec::Pennies => vec![("pennies".into(), make_matching_pennies())],
            GameSpec::Blotto { coins, fields } => {
                vec![(format!("blotto:{coins}:{fields}"), make_blotto(coins, fields)?)]
            }
            GameSpec::Random { n } => (0..count as u64)
                .map(|i| {
                    let seed = first_seed + i;
                    Ok((format!("random:{n}:{seed}"), make_random_zero_sum(n, seed)?))
                })
                .collect::<Result<_, HarnessError>>()?,
        })
    }
}

pub fn parse_eta(s: &str) -> Result<EtaSpec, HarnessError> {
    let bad = || HarnessError::Config(format!("invalid eta {s:?}"));
    match s.trim() {
        "theory" => Ok(EtaSpec::Theory),
        "adaptive" => Ok(EtaSpec::adaptive()),
        other => {
            if let Some(c) = other.strip_prefix("adaptive:") {
                let c: f64 = c.parse().map_err(|_| bad())?;
                return if c > 0.0 { Ok(EtaSpec::Adaptive { c }) } else { Err(bad()) };
            }
            let e: f64 = other.parse().map_err(|_| bad())?;
            if e > 0.0 && e.is_finite() {
                Ok(EtaSpec::Constant(e))
            } else {
                Err(bad())
            }
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let config: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |msg: String| Err(HarnessError::Config(msg));
        if self.seeds.is_empty() {
            return fail("seeds must not be empty".into());
        }
        if self.seeds.iter().collect::<BTreeSet<_>>().len() != self.seeds.len() {
            return fail("seeds must be distinct".into());
        }
        if self.iterations == 0 {
            return fail("iterations must be at least 1".into());
        }
        if let Some(l) = self.lambdas.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
            return fail(format!("lambda values must be finite and >= 0, got {l}"));
        }
        parse_eta(&self.eta)?;
        for g in &self.games {
            GameSpec::parse(g)?;
        }
        match self.experiment {
            ExperimentKind::BlottoSweep => {
                if self.lambdas.is_empty() {
                    return fail("lambdas must not be empty".into());
                }
            }
            ExperimentKind::VerifyBounds => {
                if self.lambdas.is_empty() || self.lambdas.iter().any(|l| *l <= 0.0) {
                    return fail("verify-bounds needs lambdas > 0".into());
                }
            }
            ExperimentKind::QreCheck => {
                if self.lambdas.is_empty() || self.lambdas.iter().any(|l| *l <= 0.0) {
                    return fail("qre-check needs lambdas > 0".into());
                }
                if self.games.is_empty() {
                    return fail("qre-check needs at least one game".into());
                }
            }
            ExperimentKind::MctsEval => {
                if self.c_puct.is_empty() || self.c_puct.iter().any(|c| !(*c >= 0.0 && c.is_finite())) {
                    return fail("mcts-eval needs a non-empty list of finite c_puct >= 0".into());
                }
                if self.trees == 0 || self.simulations == 0 || self.branching < 2 || self.depth == 0 {
                    return fail("mcts-eval needs trees, simulations, depth >= 1 and branching >= 2".into());
                }
                if !(self.temperature >= 0.0) {
                    return fail("temperature must be >= 0".into());
                }
            }
        }
        if matches!(self.experiment, ExperimentKind::VerifyBounds | ExperimentKind::QreCheck)
            && self.mode != Mode::Exact
        {
            return fail(format!("{} runs in exact mode only", self.experiment.name()));
        }
        Ok(())
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form, output
    /// path excluded so that the same experiment hashes the same wherever it
    /// writes.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output = None;
        let json = serde_json::to_string(&canonical).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn eta_spec(&self) -> EtaSpec {
        parse_eta(&self.eta).expect("validated")
    }

    pub fn game_specs(&self, default: &str) -> Vec<GameSpec> {
        if self.games.is_empty() {
            vec![GameSpec::parse(default).expect("built-in spec")]
        } else {
            self.games.iter().map(|g| GameSpec::parse(g).expect("validated")).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SWEEP: &str = r#"
experiment = "blotto-sweep"
games = ["blotto:10:3"]
lambdas = [0.01, 0.1, 1.0, 10.0]
iterations = 1000
seeds = [0, 1, 2]
mode = "sampled"
"#;

    #[test]
    fn parses_flat_config() {
        let c = ExperimentConfig::from_toml(SWEEP).unwrap();
        assert_eq!(c.experiment, ExperimentKind::BlottoSweep);
        assert_eq!(c.seeds, vec![0, 1, 2]);
        assert_eq!(c.mode, Mode::Sampled);
        assert_eq!(c.eta_spec(), EtaSpec::Theory);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{SWEEP}\nlamdbas = [1.0]\n");
        assert!(matches!(ExperimentConfig::from_toml(&text), Err(HarnessError::Config(_))));
    }

    #[test]
    fn duplicate_seeds_are_rejected() {
        let text = SWEEP.replace("[0, 1, 2]", "[0, 1, 1]");
        assert!(matches!(ExperimentConfig::from_toml(&text), Err(HarnessError::Config(_))));
    }

    #[test]
    fn hash_ignores_output_path() {
        let a = ExperimentConfig::from_toml(SWEEP).unwrap();
        let mut b = a.clone();
        b.output = Some("elsewhere.csv".into());
        assert_eq!(a.hash(), b.hash());
        let mut c = a.clone();
        c.iterations += 1;
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 16);
    }

    #[test]
    fn eta_strings() {
        assert_eq!(parse_eta("0.5").unwrap(), EtaSpec::Constant(0.5));
        assert_eq!(parse_eta("adaptive:2").unwrap(), EtaSpec::Adaptive { c: 2.0 });
        assert!(parse_eta("-1").is_err());
        assert!(parse_eta("fast").is_err());
    }

    #[test]
    fn game_specs() {
        assert_eq!(GameSpec::parse("blotto:10:3").unwrap(), GameSpec::Blotto { coins: 10, fields: 3 });
        assert!(GameSpec::parse("chess").is_err());
        let games = GameSpec::parse("random:4").unwrap().build(3, 10).unwrap();
        assert_eq!(games.iter().map(|g| g.0.as_str()).collect::<Vec<_>>(), ["random:4:10", "random:4:11", "random:4:12"]);
    }
}
