use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use lippoly::check::{check_game, GameCheck};
use lippoly::harness::baseline::sample_baseline;
use lippoly::harness::generator::{generate, Family, GeneratorSpec};
use lippoly::harness::pipeline::{generated_sources, run_ensemble, InstanceSource, PipelineOptions, ReduceOptions};
use lippoly::harness::report::{to_jsonl, write_reports, AggregateReport};
use lippoly::io::{game_to_json, read_game, read_profile, CheckFile, ProfileFile};
use lippoly::population::{reduce_and_solve, ViewMode};
use lippoly::purify::{purify, PreconditionStatus, PurifyMode, TraceLevel};
use lippoly::solver::{solve_mixed, SolverConfig};
use lippoly::{Error, PolymatrixGame};

const EXIT_WITNESS: u8 = 10;
const EXIT_NOT_CONVERGED: u8 = 20;
const EXIT_BREACH: u8 = 30;

/// Lipschitz polymatrix games: check, solve, purify, reduce.
///
/// Game and profile files use 1-based player and action indices.
#[derive(Parser)]
#[command(name = "lippoly", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random valid game.
    Generate {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the payoff range and the declared Lipschitz parameter.
    Check {
        game: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Find a mixed approximate equilibrium.
    Solve {
        game: PathBuf,
        /// Target max regret; defaults to the purifier's input requirement.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Exhaustive scan over the 1/k grid instead of the dynamics.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Turn a mixed approximate equilibrium into a pure one.
    Purify {
        game: PathBuf,
        /// Mixed profile to purify; solved from scratch when absent.
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long, default_value = "auto")]
        mode: PurifyMode,
        #[arg(long, default_value = "potentials")]
        trace: TraceLevel,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve through the induced population game.
    Reduce {
        game: PathBuf,
        #[arg(long = "L")]
        replication: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value = "lazy")]
        mode: ViewMode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample pure profiles from a mixed one and report their regrets.
    Baseline {
        game: PathBuf,
        /// Mixed profile to sample; solved from scratch when absent.
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// check, solve, purify and report for game files or a generated ensemble.
    Pipeline(PipelineArgs),
}

#[derive(Args, Clone)]
struct SpecArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value = "uniform")]
    family: Family,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct PipelineArgs {
    /// Game files; when none are given an ensemble is generated.
    games: Vec<PathBuf>,
    #[arg(long, requires_all = ["m", "lambda"])]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value = "uniform")]
    family: Family,
    /// First generator seed, also the solver and sampling seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of generated instances.
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value = "auto")]
    mode: PurifyMode,
    #[arg(long, default_value = "off")]
    trace: TraceLevel,
    /// Baseline samples per instance (0 skips the baseline).
    #[arg(long, default_value_t = 0)]
    trials: usize,
    /// Also solve through the population game with this replication.
    #[arg(long = "L", requires = "eps")]
    replication: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value = "lazy")]
    view: ViewMode,
    /// Directory for instances.jsonl and aggregate.json; JSON lines go to
    /// stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write instances.csv (needs --out).
    #[arg(long, requires = "out")]
    csv: bool,
}

fn emit(value: &impl Serialize, out: Option<&Path>) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(value).expect("output serializes") + "\n";
    match out {
        Some(path) => fs::write(path, text).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Stops with the witness (exit 10) or range error (exit 1) for invalid games.
fn require_valid(game: &PolymatrixGame) -> Result<(), ExitCode> {
    match check_game(game) {
        GameCheck::Valid => Ok(()),
        c @ GameCheck::LipschitzViolation { .. } => {
            let _ = emit(&CheckFile::from(&c), None);
            Err(ExitCode::from(EXIT_WITNESS))
        }
        c => {
            let _ = emit(&CheckFile::from(&c), None);
            eprintln!("error: the game violates the payoff range");
            Err(ExitCode::from(1))
        }
    }
}

fn mixed_input(game: &PolymatrixGame, profile: Option<&Path>, seed: u64) -> Result<lippoly::MixedProfile, Error> {
    match profile {
        Some(p) => Ok(read_profile(p, game.m())?.into_mixed(game.m())),
        None => {
            let mut config = SolverConfig::for_game(game);
            config.seed = seed;
            let solved = solve_mixed(game, &config)?;
            if !solved.converged {
                eprintln!(
                    "warning: solver reached max regret {:.3e}, target {:.3e}",
                    solved.achieved_max_regret, config.target_epsilon
                );
            }
            Ok(solved.profile)
        }
    }
}

#[derive(Serialize)]
struct SolveOutput {
    #[serde(flatten)]
    profile: ProfileFile,
    achieved_max_regret: f64,
    target_epsilon: f64,
    converged: bool,
    iterations_used: usize,
}

#[derive(Serialize)]
struct PurifyOutput<'a> {
    mode: PurifyMode,
    #[serde(flatten)]
    profile: ProfileFile,
    final_max_regret: f64,
    bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<&'a lippoly::purify::PurifyTrace>,
}

#[derive(Serialize)]
struct ReduceOutput {
    #[serde(flatten)]
    profile: ProfileFile,
    report: lippoly::population::ReductionReport,
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Generate { spec, out } => {
            let game = generate(&GeneratorSpec::new(spec.n, spec.m, spec.lambda, spec.family, spec.seed))?;
            let text = game_to_json(&game) + "\n";
            match out {
                Some(path) => fs::write(&path, text).map_err(|source| Error::Io {
                    path: path.display().to_string(),
                    source,
                })?,
                None => print!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { game, out } => {
            let game = read_game(&game)?;
            let check = check_game(&game);
            emit(&CheckFile::from(&check), out.as_deref())?;
            Ok(match check {
                GameCheck::Valid => ExitCode::SUCCESS,
                GameCheck::LipschitzViolation { .. } => ExitCode::from(EXIT_WITNESS),
                GameCheck::RangeViolation { .. } => ExitCode::from(1),
            })
        }
        Command::Solve { game, eps, seed, grid, out } => {
            let game = read_game(&game)?;
            if let Err(code) = require_valid(&game) {
                return Ok(code);
            }
            let mut config = SolverConfig::for_game(&game);
            config.seed = seed;
            config.uniform_grid_k = grid;
            if let Some(eps) = eps {
                config.target_epsilon = eps;
            }
            let solved = solve_mixed(&game, &config)?;
            emit(
                &SolveOutput {
                    profile: ProfileFile::from_mixed(&solved.profile),
                    achieved_max_regret: solved.achieved_max_regret,
                    target_epsilon: config.target_epsilon,
                    converged: solved.converged,
                    iterations_used: solved.iterations_used,
                },
                out.as_deref(),
            )?;
            Ok(if solved.converged {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_NOT_CONVERGED)
            })
        }
        Command::Purify { game, profile, mode, trace, seed, out } => {
            let game = read_game(&game)?;
            if let Err(code) = require_valid(&game) {
                return Ok(code);
            }
            let p = mixed_input(&game, profile.as_deref(), seed)?;
            let purified = purify(&game, &p, mode, trace)?;
            let pre = purified.trace.precondition();
            if pre.status == PreconditionStatus::Relaxed {
                eprintln!(
                    "warning: input regret {:.3e} (player {}) exceeds the required {:.3e}; accepted within 2x",
                    pre.observed,
                    pre.worst_player + 1,
                    pre.required
                );
            }
            emit(
                &PurifyOutput {
                    mode: purified.mode,
                    profile: ProfileFile::from_pure(&purified.profile),
                    final_max_regret: purified.final_max_regret,
                    bound: purified.bound,
                    trace: (trace != TraceLevel::Off).then_some(&purified.trace),
                },
                out.as_deref(),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Reduce { game, replication, eps, mode, out } => {
            let game = read_game(&game)?;
            if let Err(code) = require_valid(&game) {
                return Ok(code);
            }
            let (p, report) = reduce_and_solve(&game, eps, replication, mode)?;
            if !report.meets_hardness_l {
                eprintln!(
                    "note: L = {replication} is below ceil(n^4 / eps^5) = {}",
                    report.hardness_l
                );
            }
            let converged = report.solver_converged;
            emit(
                &ReduceOutput {
                    profile: ProfileFile::from_mixed(&p),
                    report,
                },
                out.as_deref(),
            )?;
            Ok(if converged {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_NOT_CONVERGED)
            })
        }
        Command::Baseline { game, profile, trials, seed, out } => {
            let game = read_game(&game)?;
            if let Err(code) = require_valid(&game) {
                return Ok(code);
            }
            let p = mixed_input(&game, profile.as_deref(), seed)?;
            emit(&sample_baseline(&game, &p, trials, seed)?, out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Pipeline(args) => pipeline(args),
    }
}

fn pipeline(args: PipelineArgs) -> Result<ExitCode, Error> {
    let sources: Vec<InstanceSource> = match (args.games.is_empty(), args.n) {
        (false, None) => args.games.iter().cloned().map(InstanceSource::File).collect(),
        (true, Some(n)) => {
            let template = GeneratorSpec::new(
                n,
                args.m.expect("clap requires --m"),
                args.lambda.expect("clap requires --lambda"),
                args.family,
                args.seed,
            );
            generated_sources(&template, args.count)
        }
        _ => {
            return Err(Error::Usage(
                "give either game files or --n/--m/--lambda for a generated ensemble".into(),
            ))
        }
    };
    let options = PipelineOptions {
        mode: args.mode,
        trace: args.trace,
        seed: args.seed,
        baseline_trials: args.trials,
        reduce: args.replication.map(|replication| ReduceOptions {
            replication,
            epsilon: args.eps.expect("clap requires --eps"),
            view: args.view,
        }),
    };
    let records = run_ensemble(&sources, &options)?;
    let aggregate = AggregateReport::from_records(&records);
    match &args.out {
        Some(dir) => write_reports(dir, &records, &aggregate, args.csv)?,
        None => print!("{}", to_jsonl(&records)),
    }
    eprintln!(
        "{} instances: {} ok, {} witness, {} not converged, {} invalid, {} breach",
        aggregate.instances,
        aggregate.ok,
        aggregate.witnesses,
        aggregate.not_converged,
        aggregate.invalid,
        aggregate.breaches
    );
    Ok(ExitCode::from(aggregate.exit_code as u8))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Breach(_) => ExitCode::from(EXIT_BREACH),
                _ => ExitCode::from(1),
            }
        }
    }
}
