use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use fpinit::experiments::{
    format_table, k_sweep, run_experiment, solve_game, write_aggregates_csv, write_figure_csv,
    write_rows_csv, ExperimentConfig, ExperimentResult, SolveOptions, DEFAULT_K, DESK_POOL_SIZE,
    SWEEP_K_VALUES,
};
use fpinit::fp::{write_trajectory_csv, DEFAULT_ITERATIONS};
use fpinit::game::{read_game, write_game};
use fpinit::{random_game, FpRunConfig, InitAlgorithm, UpdateRule};

#[derive(Parser, Debug)]
#[command(name = "fpinit", version, about = "Fictitious play with multiple initializations")]
struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = "NASH_INIT_THREADS", value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Approximate an equilibrium of a game read from a JSON file.
    Solve(SolveArgs),
    /// Run every algorithm over a batch of random games.
    Experiment(ExperimentArgs),
    /// Mean epsilon as a function of the number of initializations.
    Sweep(SweepArgs),
    /// Write a seeded random game as JSON.
    GenGame(GenGameArgs),
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Game file: {"players": n, "actions": m, "payoffs": [...]}
    game: PathBuf,
    #[arg(long, default_value = "maximin-u")]
    algorithm: InitAlgorithm,
    /// Number of initializations K.
    #[arg(long, default_value_t = DEFAULT_K as u64, value_parser = clap::value_parser!(u64).range(1..))]
    inits: u64,
    #[arg(long, default_value_t = DEFAULT_ITERATIONS as u64, value_parser = clap::value_parser!(u64).range(1..))]
    iters: u64,
    /// Sampled pool size H for maximin-s, fp++ and k-means.
    #[arg(long, default_value_t = DESK_POOL_SIZE as u64, value_parser = clap::value_parser!(u64).range(1..))]
    pool: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the solution as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the averaged strategies of the winning run as CSV.
    #[arg(long)]
    trajectory: Option<PathBuf>,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    trajectory_stride: u64,
    #[arg(long)]
    sequential_updates: bool,
}

#[derive(Args, Debug)]
struct CommonArgs {
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(2..))]
    players: u64,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(2..))]
    actions: u64,
    /// Number of random games G.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    games: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_ITERATIONS as u64, value_parser = clap::value_parser!(u64).range(1..))]
    iters: u64,
    /// Sampled pool size H.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pool: Option<u64>,
    /// Comma-separated algorithm ids.
    #[arg(long, value_delimiter = ',')]
    algorithms: Option<Vec<InitAlgorithm>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for the CSV files.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Full-size game count and pool.
    #[arg(long)]
    full_scale: bool,
    #[arg(long)]
    sequential_updates: bool,
    /// Stop starting new games after this many seconds.
    #[arg(long)]
    time_budget: Option<f64>,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Number of initializations K.
    #[arg(long, default_value_t = DEFAULT_K as u64, value_parser = clap::value_parser!(u64).range(1..))]
    inits: u64,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated, strictly ascending K values.
    #[arg(long, value_delimiter = ',', default_values_t = SWEEP_K_VALUES.map(|k| k as u64))]
    inits: Vec<u64>,
}

#[derive(Args, Debug)]
struct GenGameArgs {
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    players: u64,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    actions: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Usage(String),
    Input(String),
    Output(String),
    Compute(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::Output(_) => 3,
            Failure::Compute(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Input(m) | Failure::Output(m) | Failure::Compute(m) => m,
        }
    }
}

type CliResult<T = ()> = std::result::Result<T, Failure>;

fn compute(e: fpinit::Error) -> Failure {
    match e {
        fpinit::Error::InvalidConfig(_)
        | fpinit::Error::PoolTooSmall { .. }
        | fpinit::Error::GameTooLarge { .. }
        | fpinit::Error::InvalidDimensions(..) => Failure::Usage(e.to_string()),
        other => Failure::Compute(other.to_string()),
    }
}

fn output_error(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Output(format!("cannot write {}: {e}", path.display()))
}

fn update_rule(sequential: bool) -> UpdateRule {
    if sequential {
        UpdateRule::Sequential
    } else {
        UpdateRule::Simultaneous
    }
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| output_error(path, e))
}

fn write_with<F>(path: &Path, f: F) -> CliResult
where
    F: FnOnce(&mut BufWriter<File>) -> fpinit::Result<()>,
{
    let mut out = create(path)?;
    f(&mut out).map_err(|e| output_error(path, e))?;
    out.flush().map_err(|e| output_error(path, e))
}

#[derive(Serialize)]
struct SolutionFile<'a> {
    algorithm: &'a str,
    #[serde(rename = "K")]
    k: usize,
    iterations: usize,
    seed: u64,
    epsilon: f64,
    per_player_gain: &'a [f64],
    init_index: usize,
    strategies: Vec<&'a [f64]>,
}

fn cmd_solve(args: SolveArgs) -> CliResult {
    let game = read_game(&args.game).map_err(|e| Failure::Input(e.to_string()))?;
    println!("seed: {}", args.seed);
    let options = SolveOptions {
        algorithm: args.algorithm,
        k: args.inits as usize,
        pool_size: args.pool as usize,
        fp: FpRunConfig {
            iterations: args.iters as usize,
            record_trajectory: args.trajectory.is_some(),
            update_rule: update_rule(args.sequential_updates),
        },
        seed: args.seed,
        ..SolveOptions::default()
    };
    let (batch, result) = solve_game(&game, &options).map_err(compute)?;
    for (i, strategy) in result.final_profile.strategies().enumerate() {
        let probs: Vec<String> = strategy.iter().map(|p| format!("{p:.6}")).collect();
        println!("player {i}: [{}]", probs.join(", "));
    }
    println!("epsilon: {:.8}", result.epsilon());
    if let Some(path) = &args.out {
        let solution = SolutionFile {
            algorithm: args.algorithm.id(),
            k: batch.len(),
            iterations: result.iterations_run,
            seed: args.seed,
            epsilon: result.epsilon(),
            per_player_gain: &result.epsilon_report.per_player_gain,
            init_index: result.init_index,
            strategies: result.final_profile.strategies().collect(),
        };
        write_with(path, |out| {
            serde_json::to_writer_pretty(&mut *out, &solution)?;
            Ok(out.write_all(b"\n")?)
        })?;
    }
    if let (Some(path), Some(brs)) = (&args.trajectory, &result.best_responses) {
        let init = &batch.profiles[result.init_index];
        write_with(path, |out| {
            write_trajectory_csv(out, init, brs, args.trajectory_stride as usize)
        })?;
    }
    Ok(())
}

fn build_config(common: &CommonArgs, base: ExperimentConfig, k_values: Vec<usize>) -> CliResult<ExperimentConfig> {
    let mut config = ExperimentConfig {
        k_values,
        iterations: common.iters as usize,
        master_seed: common.seed,
        update_rule: update_rule(common.sequential_updates),
        ..base
    };
    if common.full_scale {
        config = config.full_scale();
    }
    if let Some(g) = common.games {
        config.num_games = g as usize;
    }
    if let Some(h) = common.pool {
        config.pool_size = h as usize;
    }
    if let Some(algs) = &common.algorithms {
        config.algorithms = algs.clone();
    }
    if let Some(secs) = common.time_budget {
        let budget = Duration::try_from_secs_f64(secs)
            .map_err(|_| Failure::Usage(format!("invalid time budget {secs}")))?;
        config.time_budget = Some(budget);
    }
    config.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(config)
}

fn prepare_out_dir(dir: &Path) -> CliResult {
    fs::create_dir_all(dir).map_err(|e| output_error(dir, e))
}

fn report(config: &ExperimentConfig, result: &ExperimentResult) {
    print!("{}", format_table(&result.aggregates));
    if let Some(done) = result.truncated_after {
        println!("truncated: {done} of {} games completed", config.num_games);
    }
}

fn seed_line(config: &ExperimentConfig) {
    println!(
        "seed: {}  players: {}  actions: {}  games: {}  iters: {}  pool: {}",
        config.master_seed,
        config.num_players,
        config.num_actions,
        config.num_games,
        config.iterations,
        config.pool_size
    );
}

fn cmd_experiment(args: ExperimentArgs) -> CliResult {
    let base = ExperimentConfig::table(args.common.players as usize, args.common.actions as usize);
    let config = build_config(&args.common, base, vec![args.inits as usize])?;
    let dir = &args.common.out;
    prepare_out_dir(dir)?;
    seed_line(&config);
    let result = run_experiment(&config).map_err(compute)?;
    write_with(&dir.join("rows.csv"), |out| write_rows_csv(out, &result))?;
    write_with(&dir.join("aggregates.csv"), |out| write_aggregates_csv(out, &result))?;
    report(&config, &result);
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> CliResult {
    let base = ExperimentConfig::sweep(args.common.players as usize, args.common.actions as usize);
    let ks = args.inits.iter().map(|&k| k as usize).collect();
    let config = build_config(&args.common, base, ks)?;
    let dir = &args.common.out;
    prepare_out_dir(dir)?;
    seed_line(&config);
    let result = k_sweep(&config).map_err(compute)?;
    write_with(&dir.join("rows.csv"), |out| write_rows_csv(out, &result))?;
    write_with(&dir.join("aggregates.csv"), |out| write_aggregates_csv(out, &result))?;
    write_with(&dir.join("figure.csv"), |out| write_figure_csv(out, &result))?;
    report(&config, &result);
    Ok(())
}

fn cmd_gen_game(args: GenGameArgs) -> CliResult {
    let game = random_game(args.players as usize, args.actions as usize, args.seed).map_err(compute)?;
    println!("seed: {}", args.seed);
    write_game(&args.out, &game).map_err(|e| output_error(&args.out, e))
}

fn run(cli: Cli) -> CliResult {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        builder = builder.num_threads(n as usize);
    }
    let pool = builder.build().map_err(|e| Failure::Compute(e.to_string()))?;
    pool.install(|| match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Experiment(args) => cmd_experiment(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::GenGame(args) => cmd_gen_game(args),
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
