use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pikl::harness::{run_experiment, ExperimentConfig, ExperimentKind, GameSpec, HarnessError};

#[derive(Parser)]
#[command(name = "pikl", version, about = "Anchor-regularized regret minimization and search experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// piKL over a λ grid on Colonel Blotto, with Hedge and regret-matching baselines.
    BlottoSweep(RunArgs),
    /// Check the anchor-distance and Nash-gap bounds on exact self-play runs.
    VerifyBounds(RunArgs),
    /// Prediction accuracy and win rate of prior-guided search on synthetic trees.
    MctsEval(RunArgs),
    /// Compare piKL self-play averages with the anchored logit equilibrium.
    QreCheck(RunArgs),
    /// Print a game's payoff tables as JSON.
    DumpGame {
        /// `blotto:<coins>:<fields>`, `rps`, `pennies` or `random:<n>`.
        #[arg(long)]
        game: String,
        /// Seed for `random:<n>`.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// CSV destination; overrides `output` in the config, stdout if neither is set.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Also write the structured report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

fn write_to(path: Option<&Path>, text: &str) -> Result<(), HarnessError> {
    match path {
        Some(p) => fs::write(p, text).map_err(HarnessError::from),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(kind: ExperimentKind, args: &RunArgs) -> Result<i32, HarnessError> {
    let config = ExperimentConfig::load(&args.config)?;
    if config.experiment != kind {
        return Err(HarnessError::Config(format!(
            "config describes {}, not {}",
            config.experiment.name(),
            kind.name()
        )));
    }
    let outcome = run_experiment(&config, args.jobs)?;
    let out = args.out.as_deref().or(config.output.as_deref());
    write_to(out, &outcome.table.to_csv()?)?;
    if let Some(path) = &args.json {
        let json = outcome.json.unwrap_or(serde_json::Value::Null);
        fs::write(path, serde_json::to_string_pretty(&json)? + "\n")?;
    }
    for note in &outcome.notes {
        eprintln!("{note}");
    }
    Ok(outcome.exit_code)
}

fn dump_game(spec: &str, seed: u64, out: Option<&Path>) -> Result<i32, HarnessError> {
    let (_, game) = GameSpec::parse(spec)?.build(1, seed)?.remove(0);
    write_to(out, &(serde_json::to_string_pretty(&game.dump()?)? + "\n"))?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::BlottoSweep(a) => run(ExperimentKind::BlottoSweep, a),
        Command::VerifyBounds(a) => run(ExperimentKind::VerifyBounds, a),
        Command::MctsEval(a) => run(ExperimentKind::MctsEval, a),
        Command::QreCheck(a) => run(ExperimentKind::QreCheck, a),
        Command::DumpGame { game, seed, out } => dump_game(game, *seed, out.as_deref()),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
