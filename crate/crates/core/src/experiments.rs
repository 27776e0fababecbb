//! Batches of seeded random games, every initialization algorithm per game,
//! and mean / 95% confidence summaries of the best epsilon found.
//!
//! For each game a single batch of `max(K)` initializations is built per
//! algorithm and the epsilon at each requested `K` is the minimum over the
//! first `K` runs, so per-game results are non-increasing in `K`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fp::{fp_multi, fp_run_all, FpResult, FpRunConfig, UpdateRule, DEFAULT_ITERATIONS};
use crate::game::{random_game, Game};
use crate::initializers::{build_batch, InitAlgorithm, InitBatch, InitSpec, ProfilePool};
use crate::maximin::SolverConfig;
use crate::seed::{derive_seed, stream, Purpose};

pub const DESK_TABLE_GAMES: usize = 1000;
pub const DESK_SWEEP_GAMES: usize = 500;
pub const DESK_POOL_SIZE: usize = 20_000;
pub const FULL_GAMES: usize = 10_000;
pub const FULL_POOL_SIZE: usize = 100_000;
pub const DEFAULT_K: usize = 5;
pub const SWEEP_K_VALUES: [usize; 5] = [2, 3, 5, 10, 20];

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.96;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub num_players: usize,
    pub num_actions: usize,
    pub num_games: usize,
    pub algorithms: Vec<InitAlgorithm>,
    pub k_values: Vec<usize>,
    pub iterations: usize,
    pub pool_size: usize,
    pub master_seed: u64,
    pub update_rule: UpdateRule,
    pub solver: SolverConfig,
    /// Stop starting new games once this much wall time has elapsed.
    pub time_budget: Option<Duration>,
}

impl ExperimentConfig {
    /// Every algorithm at `K = 5` on the desk-scale game count.
    pub fn table(num_players: usize, num_actions: usize) -> Self {
        Self {
            num_players,
            num_actions,
            num_games: DESK_TABLE_GAMES,
            algorithms: InitAlgorithm::ALL.to_vec(),
            k_values: vec![DEFAULT_K],
            iterations: DEFAULT_ITERATIONS,
            pool_size: DESK_POOL_SIZE,
            master_seed: 0,
            update_rule: UpdateRule::Simultaneous,
            solver: SolverConfig::default(),
            time_budget: None,
        }
    }

    /// `K` in {2, 3, 5, 10, 20} for the algorithms plotted against `K`.
    pub fn sweep(num_players: usize, num_actions: usize) -> Self {
        Self {
            num_games: DESK_SWEEP_GAMES,
            algorithms: vec![
                InitAlgorithm::Classic,
                InitAlgorithm::MacQueen2,
                InitAlgorithm::MaximinU,
                InitAlgorithm::FpPlusPlus,
            ],
            k_values: SWEEP_K_VALUES.to_vec(),
            ..Self::table(num_players, num_actions)
        }
    }

    pub fn full_scale(mut self) -> Self {
        self.num_games = FULL_GAMES;
        self.pool_size = FULL_POOL_SIZE;
        self
    }

    fn max_k(&self) -> usize {
        self.k_values.iter().copied().max().unwrap_or(0)
    }

    fn needs_pool(&self) -> bool {
        self.algorithms.iter().any(|a| a.uses_pool())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.num_players < 2 || self.num_actions < 2 {
            return bad(format!(
                "need at least 2 players and 2 actions, got {} x {}",
                self.num_players, self.num_actions
            ));
        }
        if self.num_games == 0 {
            return bad("need at least one game".into());
        }
        if self.algorithms.is_empty() {
            return bad("no algorithms selected".into());
        }
        if self.k_values.is_empty() || self.k_values.contains(&0) {
            return bad("K values must be nonempty and positive".into());
        }
        if self.k_values.windows(2).any(|w| w[0] >= w[1]) {
            return bad("K values must be strictly ascending".into());
        }
        if self.iterations == 0 {
            return bad("need at least one fictitious-play iteration".into());
        }
        if self.needs_pool() && self.pool_size < self.max_k() {
            return bad(format!(
                "pool size {} is smaller than the largest K {}",
                self.pool_size,
                self.max_k()
            ));
        }
        crate::game::payoff_entries(self.num_players, self.num_actions)
            .filter(|&e| e <= crate::game::DEFAULT_MAX_PAYOFF_ENTRIES)
            .ok_or_else(|| Error::InvalidConfig("game too large".into()))?;
        Ok(())
    }

    pub fn game_seed(&self, game_index: usize) -> u64 {
        derive_seed(self.master_seed, Purpose::Game, game_index as u64, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub game_index: usize,
    pub algorithm: InitAlgorithm,
    #[serde(rename = "K")]
    pub k: usize,
    pub epsilon_star: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub algorithm: InitAlgorithm,
    #[serde(rename = "K")]
    pub k: usize,
    pub mean: f64,
    pub std: f64,
    pub ci95: f64,
    #[serde(rename = "G")]
    pub games: usize,
}

/// One point of an epsilon-versus-K curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigurePoint {
    pub algorithm: InitAlgorithm,
    #[serde(rename = "K")]
    pub k: usize,
    pub mean: f64,
    pub ci95: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub rows: Vec<ResultRow>,
    pub aggregates: Vec<Aggregate>,
    /// Games completed when the time budget cut the run short.
    pub truncated_after: Option<usize>,
    pub num_games: usize,
}

impl ExperimentResult {
    pub fn aggregate_for(&self, algorithm: InitAlgorithm, k: usize) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.algorithm == algorithm && a.k == k)
    }

    pub fn figure_points(&self) -> Vec<FigurePoint> {
        self.aggregates
            .iter()
            .map(|a| FigurePoint {
                algorithm: a.algorithm,
                k: a.k,
                mean: a.mean,
                ci95: a.ci95,
            })
            .collect()
    }

    /// Per-game rows for one algorithm ordered by `K`.
    pub fn game_curve(&self, game_index: usize, algorithm: InitAlgorithm) -> Vec<(usize, f64)> {
        let mut curve: Vec<(usize, f64)> = self
            .rows
            .iter()
            .filter(|r| r.game_index == game_index && r.algorithm == algorithm)
            .map(|r| (r.k, r.epsilon_star))
            .collect();
        curve.sort_by_key(|c| c.0);
        curve
    }
}

/// Mean, sample standard deviation (divisor `G - 1`, zero for a single
/// value) and the 95% half-width `1.96 * std / sqrt(G)`.
pub fn summarize(values: &[f64]) -> Result<(f64, f64, f64)> {
    if values.is_empty() {
        return Err(Error::EmptyGroup);
    }
    let g = values.len() as f64;
    let mean = values.iter().sum::<f64>() / g;
    let std = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (g - 1.0)).sqrt()
    };
    Ok((mean, std, Z95 * std / g.sqrt()))
}

/// Groups rows by `(algorithm, K)` and summarizes each group.
pub fn aggregate(rows: &[ResultRow]) -> Result<Vec<Aggregate>> {
    if rows.is_empty() {
        return Err(Error::EmptyGroup);
    }
    let mut groups: BTreeMap<(InitAlgorithm, usize), Vec<f64>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.algorithm, r.k)).or_default().push(r.epsilon_star);
    }
    groups
        .into_iter()
        .map(|((algorithm, k), values)| {
            let (mean, std, ci95) = summarize(&values)?;
            Ok(Aggregate {
                algorithm,
                k,
                mean,
                std,
                ci95,
                games: values.len(),
            })
        })
        .collect()
}

fn init_seed(master_seed: u64, game_index: usize, algorithm: InitAlgorithm) -> u64 {
    // keyed by the algorithm's stable position so selections do not shift
    // when the algorithm list changes
    let tag = InitAlgorithm::ALL.iter().position(|&a| a == algorithm).unwrap() as u64;
    derive_seed(master_seed, Purpose::Init, game_index as u64, tag)
}

/// Settings for solving a single given game.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub algorithm: InitAlgorithm,
    pub k: usize,
    pub pool_size: usize,
    pub fp: FpRunConfig,
    pub solver: SolverConfig,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            algorithm: InitAlgorithm::MaximinU,
            k: DEFAULT_K,
            pool_size: DESK_POOL_SIZE,
            fp: FpRunConfig::default(),
            solver: SolverConfig::default(),
            seed: 0,
        }
    }
}

/// Builds the initialization batch for `game` and runs best-of-K fictitious
/// play. Seeds are derived exactly as for game 0 of an experiment with
/// master seed `options.seed`.
pub fn solve_game(game: &Game, options: &SolveOptions) -> Result<(InitBatch, FpResult)> {
    let (n, m) = (game.num_players(), game.num_actions());
    let spec = InitSpec::new(options.algorithm, options.k, options.pool_size)?;
    let pool = options.algorithm.uses_pool().then(|| {
        let mut rng = stream(options.seed, Purpose::Pool, 0, 0);
        ProfilePool::sample(n, m, options.pool_size, &mut rng)
    });
    let seed = init_seed(options.seed, 0, options.algorithm);
    let batch = build_batch(&spec, n, m, pool.as_ref(), &options.solver, seed)?;
    let result = fp_multi(game, &batch.profiles, &options.fp)?;
    Ok((batch, result))
}

/// All rows for one game.
pub fn run_game(config: &ExperimentConfig, game_index: usize) -> Result<Vec<ResultRow>> {
    let (n, m) = (config.num_players, config.num_actions);
    let seed = config.game_seed(game_index);
    let game = random_game(n, m, seed)?;
    let pool = config.needs_pool().then(|| {
        let mut rng = stream(config.master_seed, Purpose::Pool, game_index as u64, 0);
        ProfilePool::sample(n, m, config.pool_size, &mut rng)
    });
    let fp_config = FpRunConfig {
        iterations: config.iterations,
        record_trajectory: false,
        update_rule: config.update_rule,
    };
    let max_k = config.max_k();
    let mut rows = Vec::with_capacity(config.algorithms.len() * config.k_values.len());
    for &algorithm in &config.algorithms {
        let spec = InitSpec::new(algorithm, max_k, config.pool_size)?;
        let init_seed = init_seed(config.master_seed, game_index, algorithm);
        let batch = build_batch(&spec, n, m, pool.as_ref(), &config.solver, init_seed)?;
        let epsilons: Vec<f64> = fp_run_all(&game, &batch.profiles, &fp_config)?
            .iter()
            .map(|r| r.epsilon())
            .collect();
        for &k in &config.k_values {
            let used = algorithm.effective_k(k).min(epsilons.len());
            let epsilon_star = epsilons[..used].iter().copied().fold(f64::INFINITY, f64::min);
            rows.push(ResultRow {
                game_index,
                algorithm,
                k,
                epsilon_star,
                seed,
            });
        }
    }
    Ok(rows)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let started = Instant::now();
    let chunk = (rayon::current_num_threads() * 4).max(16);
    let mut rows = Vec::new();
    let mut completed = 0;
    let mut truncated_after = None;
    while completed < config.num_games {
        let end = (completed + chunk).min(config.num_games);
        let batch: Vec<Vec<ResultRow>> = (completed..end)
            .into_par_iter()
            .map(|g| run_game(config, g))
            .collect::<Result<_>>()?;
        rows.extend(batch.into_iter().flatten());
        completed = end;
        log::info!("{completed}/{} games done ({:.1?})", config.num_games, started.elapsed());
        if let Some(budget) = config.time_budget {
            if completed < config.num_games && started.elapsed() >= budget {
                log::warn!(
                    "time budget exhausted after {completed} of {} games",
                    config.num_games
                );
                truncated_after = Some(completed);
                break;
            }
        }
    }
    let aggregates = aggregate(&rows)?;
    Ok(ExperimentResult {
        rows,
        aggregates,
        truncated_after,
        num_games: config.num_games,
    })
}

/// Epsilon-versus-K sweep. Same protocol as [`run_experiment`]; requires
/// at least one `K`.
pub fn k_sweep(config: &ExperimentConfig) -> Result<ExperimentResult> {
    if config.k_values.is_empty() {
        return Err(Error::InvalidConfig("sweep needs at least one K value".into()));
    }
    run_experiment(config)
}

fn truncation_marker(result: &ExperimentResult) -> Option<String> {
    result
        .truncated_after
        .map(|done| format!("# truncated: {done} of {} games completed\n", result.num_games))
}

fn write_records<W: Write, T: Serialize>(mut out: W, records: &[T], marker: Option<String>) -> Result<()> {
    {
        let mut writer = csv::Writer::from_writer(&mut out);
        for r in records {
            writer.serialize(r)?;
        }
        writer.flush()?;
    }
    if let Some(marker) = marker {
        out.write_all(marker.as_bytes())?;
    }
    Ok(())
}

fn read_records<R: Read, T: for<'de> Deserialize<'de>>(input: R) -> Result<Vec<T>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    Ok(reader.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// `game_index,algorithm,K,epsilon_star,seed`
pub fn write_rows_csv<W: Write>(out: W, result: &ExperimentResult) -> Result<()> {
    write_records(out, &result.rows, truncation_marker(result))
}

pub fn read_rows_csv<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    read_records(input)
}

/// `algorithm,K,mean,std,ci95,G`
pub fn write_aggregates_csv<W: Write>(out: W, result: &ExperimentResult) -> Result<()> {
    write_records(out, &result.aggregates, truncation_marker(result))
}

pub fn read_aggregates_csv<R: Read>(input: R) -> Result<Vec<Aggregate>> {
    read_records(input)
}

/// `algorithm,K,mean,ci95`
pub fn write_figure_csv<W: Write>(out: W, result: &ExperimentResult) -> Result<()> {
    write_records(out, &result.figure_points(), None)
}

pub fn read_figure_csv<R: Read>(input: R) -> Result<Vec<FigurePoint>> {
    read_records(input)
}

/// Plain-text summary, one line per algorithm and `K`.
pub fn format_table(aggregates: &[Aggregate]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<12} {:>4} {:>24} {:>7}", "algorithm", "K", "average epsilon*", "games");
    for a in aggregates {
        let _ = writeln!(
            out,
            "{:<12} {:>4} {:>12.5} ± {:<9.3e} {:>7}",
            a.algorithm.id(),
            a.k,
            a.mean,
            a.ci95,
            a.games
        );
    }
    out
}
