//! Fictitious play from one initialization, and best-of-K over a batch.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{action_values_into, argmax, epsilon_unchecked, EpsilonReport, Game, StrategyProfile, ValueScratch};

pub const DEFAULT_ITERATIONS: usize = 10_000;

/// How players within one iteration see each other's updates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdateRule {
    /// Every player best-responds to the previous iteration's averages.
    #[default]
    Simultaneous,
    /// Players update in index order; later players see the new averages
    /// of earlier ones.
    Sequential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FpRunConfig {
    pub iterations: usize,
    pub record_trajectory: bool,
    pub update_rule: UpdateRule,
}

impl Default for FpRunConfig {
    fn default() -> Self {
        Self {
            iterations: DEFAULT_ITERATIONS,
            record_trajectory: false,
            update_rule: UpdateRule::Simultaneous,
        }
    }
}

impl FpRunConfig {
    pub fn with_iterations(iterations: usize) -> Self {
        Self {
            iterations,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("fictitious play needs at least one iteration".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FpResult {
    pub final_profile: StrategyProfile,
    pub epsilon_report: EpsilonReport,
    /// Position of the winning initialization within its batch.
    pub init_index: usize,
    pub iterations_run: usize,
    /// Pure best-response computations performed.
    pub best_response_evals: u64,
    /// Best-response actions, `n` per iteration, when recording is on.
    pub best_responses: Option<Vec<usize>>,
}

impl FpResult {
    pub fn epsilon(&self) -> f64 {
        self.epsilon_report.epsilon
    }
}

fn check_shape(game: &Game, profile: &StrategyProfile) -> Result<()> {
    if profile.num_players() != game.num_players() || profile.num_actions() != game.num_actions() {
        return Err(Error::ShapeMismatch(format!(
            "game is {}x{}, initialization is {}x{}",
            game.num_players(),
            game.num_actions(),
            profile.num_players(),
            profile.num_actions()
        )));
    }
    Ok(())
}

pub fn fp_run(game: &Game, init: &StrategyProfile, config: &FpRunConfig) -> Result<FpResult> {
    config.validate()?;
    check_shape(game, init)?;
    let n = game.num_players();
    let m = game.num_actions();
    let mut avg = init.as_slice().to_vec();
    let mut scratch = ValueScratch::default();
    let mut values = vec![0.0; m];
    let mut played = vec![0usize; n];
    let mut trace = config
        .record_trajectory
        .then(|| Vec::with_capacity(config.iterations * n));

    for t in 1..=config.iterations {
        let w = 1.0 / (t + 1) as f64;
        let keep = 1.0 - w;
        match config.update_rule {
            UpdateRule::Simultaneous => {
                for (i, a) in played.iter_mut().enumerate() {
                    action_values_into(game, &avg, i, &mut scratch, &mut values);
                    *a = argmax(&values).0;
                }
                for (i, &a) in played.iter().enumerate() {
                    blend(&mut avg[i * m..(i + 1) * m], a, keep, w);
                }
            }
            UpdateRule::Sequential => {
                for (i, a) in played.iter_mut().enumerate() {
                    action_values_into(game, &avg, i, &mut scratch, &mut values);
                    *a = argmax(&values).0;
                    blend(&mut avg[i * m..(i + 1) * m], *a, keep, w);
                }
            }
        }
        if let Some(trace) = trace.as_mut() {
            trace.extend_from_slice(&played);
        }
    }

    let epsilon_report = epsilon_unchecked(game, &avg, &mut scratch);
    Ok(FpResult {
        final_profile: StrategyProfile::from_flat_unchecked(m, avg),
        epsilon_report,
        init_index: 0,
        iterations_run: config.iterations,
        best_response_evals: (config.iterations * n) as u64,
        best_responses: trace,
    })
}

fn blend(block: &mut [f64], action: usize, keep: f64, w: f64) {
    block.iter_mut().for_each(|p| *p *= keep);
    block[action] += w;
}

/// Runs every initialization (in parallel) and returns all results in
/// batch order.
pub fn fp_run_all(game: &Game, inits: &[StrategyProfile], config: &FpRunConfig) -> Result<Vec<FpResult>> {
    inits
        .par_iter()
        .enumerate()
        .map(|(k, init)| {
            let mut r = fp_run(game, init, config)?;
            r.init_index = k;
            Ok(r)
        })
        .collect()
}

/// Index of the smallest epsilon, ties to the lowest index.
pub fn argmin_epsilon(results: &[FpResult]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (k, r) in results.iter().enumerate() {
        if best.is_none_or(|b| r.epsilon() < results[b].epsilon()) {
            best = Some(k);
        }
    }
    best
}

/// Best-of-K fictitious play: the run whose final profile has the smallest
/// epsilon.
pub fn fp_multi(game: &Game, inits: &[StrategyProfile], config: &FpRunConfig) -> Result<FpResult> {
    if inits.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut results = fp_run_all(game, inits, config)?;
    let best = argmin_epsilon(&results).expect("nonempty");
    Ok(results.swap_remove(best))
}

/// Writes `t,player,action,prob` rows for `t = 0, stride, 2*stride, ...`
/// (and the final iteration), replaying the averages from `init` and the
/// recorded best responses.
pub fn write_trajectory_csv<W: Write>(
    out: W,
    init: &StrategyProfile,
    best_responses: &[usize],
    stride: usize,
) -> Result<()> {
    let n = init.num_players();
    let m = init.num_actions();
    if stride == 0 || best_responses.len() % n != 0 {
        return Err(Error::InvalidConfig("trajectory stride must be positive and the record complete".into()));
    }
    let iterations = best_responses.len() / n;
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["t", "player", "action", "prob"])?;
    let mut avg = init.as_slice().to_vec();
    let emit = |t: usize, avg: &[f64], writer: &mut csv::Writer<W>| -> Result<()> {
        for (idx, p) in avg.iter().enumerate() {
            writer.serialize((t, idx / m, idx % m, p))?;
        }
        Ok(())
    };
    emit(0, &avg, &mut writer)?;
    for (t, played) in best_responses.chunks(n).enumerate().map(|(i, c)| (i + 1, c)) {
        let w = 1.0 / (t + 1) as f64;
        for (i, &a) in played.iter().enumerate() {
            blend(&mut avg[i * m..(i + 1) * m], a, 1.0 - w, w);
        }
        if t % stride == 0 || t == iterations {
            emit(t, &avg, &mut writer)?;
        }
    }
    writer.flush()?;
    Ok(())
}
