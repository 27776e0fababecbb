//! Strategic-form games, mixed strategies, and equilibrium measurement.
//!
//! Payoffs are stored densely, player-major: the block for player `i` holds
//! `m^n` utilities indexed by the joint pure profile in row-major order
//! (player 0's action is the most significant digit).

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sum-to-one tolerance for mixed strategies.
pub const PROB_TOLERANCE: f64 = 1e-9;

/// Regret below `-NEGATIVE_EPSILON_SLACK` indicates an arithmetic bug.
pub const NEGATIVE_EPSILON_SLACK: f64 = 1e-12;

/// Default cap on `n * m^n` payoff entries (1 GiB of `f64`).
pub const DEFAULT_MAX_PAYOFF_ENTRIES: usize = 1 << 27;

/// Number of payoff entries `n * m^n`, or `None` on overflow.
pub fn payoff_entries(num_players: usize, num_actions: usize) -> Option<usize> {
    let exp = u32::try_from(num_players).ok()?;
    num_actions.checked_pow(exp)?.checked_mul(num_players)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Game {
    num_players: usize,
    num_actions: usize,
    payoffs: Vec<f64>,
}

impl Game {
    pub fn new(num_players: usize, num_actions: usize, payoffs: Vec<f64>) -> Result<Self> {
        check_dimensions(num_players, num_actions)?;
        let expected = payoff_entries(num_players, num_actions).ok_or_else(|| {
            Error::InvalidDimensions(format!(
                "{num_players} players x {num_actions} actions overflows"
            ))
        })?;
        if payoffs.len() != expected {
            return Err(Error::InvalidDimensions(format!(
                "expected {expected} payoffs for {num_players} players x {num_actions} actions, got {}",
                payoffs.len()
            )));
        }
        if let Some(pos) = payoffs.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidDimensions(format!(
                "payoff at position {pos} is not finite"
            )));
        }
        Ok(Self {
            num_players,
            num_actions,
            payoffs,
        })
    }

    pub fn num_players(&self) -> usize {
        self.num_players
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    /// Number of joint pure profiles, `m^n`.
    pub fn num_profiles(&self) -> usize {
        self.payoffs.len() / self.num_players
    }

    pub fn payoffs(&self) -> &[f64] {
        &self.payoffs
    }

    pub fn player_payoffs(&self, player: usize) -> &[f64] {
        let len = self.num_profiles();
        &self.payoffs[player * len..(player + 1) * len]
    }

    /// Row-major index of a joint pure profile.
    pub fn profile_index(&self, actions: &[usize]) -> usize {
        debug_assert_eq!(actions.len(), self.num_players);
        actions
            .iter()
            .fold(0, |idx, &a| idx * self.num_actions + a)
    }

    pub fn payoff(&self, player: usize, actions: &[usize]) -> f64 {
        self.player_payoffs(player)[self.profile_index(actions)]
    }

    pub fn min_payoff(&self) -> f64 {
        self.payoffs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_payoff(&self) -> f64 {
        self.payoffs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    fn check_profile(&self, profile: &StrategyProfile) -> Result<()> {
        if profile.num_players() != self.num_players || profile.num_actions() != self.num_actions {
            return Err(Error::ShapeMismatch(format!(
                "game is {}x{}, profile is {}x{}",
                self.num_players,
                self.num_actions,
                profile.num_players(),
                profile.num_actions()
            )));
        }
        Ok(())
    }

    fn check_player(&self, player: usize) -> Result<()> {
        if player >= self.num_players {
            return Err(Error::ShapeMismatch(format!(
                "player {player} out of range for {} players",
                self.num_players
            )));
        }
        Ok(())
    }
}

fn check_dimensions(num_players: usize, num_actions: usize) -> Result<()> {
    if num_players < 2 || num_actions < 2 {
        return Err(Error::InvalidDimensions(format!(
            "need at least 2 players and 2 actions, got {num_players} x {num_actions}"
        )));
    }
    Ok(())
}

/// A probability vector over one player's pure strategies.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedStrategy(Vec<f64>);

impl MixedStrategy {
    /// Validates and renormalizes `probs`. Entries must be finite and
    /// nonnegative, and must sum to one within [`PROB_TOLERANCE`].
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidStrategy("no actions".into()));
        }
        for (j, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p < -NEGATIVE_EPSILON_SLACK || p > 1.0 + PROB_TOLERANCE {
                return Err(Error::InvalidStrategy(format!(
                    "probability {p} at action {j} outside [0, 1]"
                )));
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_TOLERANCE {
            return Err(Error::InvalidStrategy(format!(
                "probabilities sum to {sum}, not 1"
            )));
        }
        Ok(Self(probs.into_iter().map(|p| p.max(0.0) / sum).collect()))
    }

    pub fn uniform(num_actions: usize) -> Self {
        Self(vec![1.0 / num_actions as f64; num_actions])
    }

    pub fn pure(num_actions: usize, action: usize) -> Self {
        let mut probs = vec![0.0; num_actions];
        probs[action] = 1.0;
        Self(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// One mixed strategy per player, stored as a flat `n * m` vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyProfile {
    num_actions: usize,
    probs: Vec<f64>,
}

impl StrategyProfile {
    pub fn new(strategies: Vec<MixedStrategy>) -> Result<Self> {
        let num_actions = strategies
            .first()
            .map(MixedStrategy::len)
            .ok_or_else(|| Error::InvalidStrategy("profile has no players".into()))?;
        if strategies.iter().any(|s| s.len() != num_actions) {
            return Err(Error::ShapeMismatch(
                "players have different numbers of actions".into(),
            ));
        }
        let probs = strategies.into_iter().flat_map(MixedStrategy::into_inner).collect();
        Ok(Self { num_actions, probs })
    }

    /// Builds a profile from a flat player-major vector, validating and
    /// renormalizing each player's block.
    pub fn from_flat(num_actions: usize, probs: Vec<f64>) -> Result<Self> {
        if num_actions == 0 || probs.is_empty() || probs.len() % num_actions != 0 {
            return Err(Error::ShapeMismatch(format!(
                "{} probabilities do not split into blocks of {num_actions}",
                probs.len()
            )));
        }
        let strategies = probs
            .chunks(num_actions)
            .map(|c| MixedStrategy::new(c.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(strategies)
    }

    /// Normalizes each player's block of nonnegative weights to sum to one.
    /// Callers guarantee every block has a positive finite sum.
    pub(crate) fn from_weights(num_actions: usize, mut weights: Vec<f64>) -> Self {
        for block in weights.chunks_mut(num_actions) {
            let z: f64 = block.iter().sum();
            debug_assert!(z > 0.0 && z.is_finite());
            block.iter_mut().for_each(|w| *w /= z);
        }
        Self {
            num_actions,
            probs: weights,
        }
    }

    /// Wraps a flat vector that is already a valid profile.
    pub(crate) fn from_flat_unchecked(num_actions: usize, probs: Vec<f64>) -> Self {
        debug_assert!(probs.len() % num_actions == 0);
        Self { num_actions, probs }
    }

    pub fn uniform(num_players: usize, num_actions: usize) -> Self {
        Self {
            num_actions,
            probs: vec![1.0 / num_actions as f64; num_players * num_actions],
        }
    }

    pub fn pure(num_actions: usize, actions: &[usize]) -> Self {
        let mut probs = vec![0.0; actions.len() * num_actions];
        for (i, &a) in actions.iter().enumerate() {
            probs[i * num_actions + a] = 1.0;
        }
        Self { num_actions, probs }
    }

    pub fn num_players(&self) -> usize {
        self.probs.len() / self.num_actions
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn player(&self, player: usize) -> &[f64] {
        &self.probs[player * self.num_actions..(player + 1) * self.num_actions]
    }

    pub fn strategies(&self) -> impl Iterator<Item = &[f64]> {
        self.probs.chunks(self.num_actions)
    }

    pub fn mixed_strategy(&self, player: usize) -> MixedStrategy {
        MixedStrategy(self.player(player).to_vec())
    }

    /// Flat player-major coordinates.
    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.probs
    }

    /// True when every entry lies in `[0, 1]` and each block sums to one
    /// within `tol`.
    pub fn is_valid(&self, tol: f64) -> bool {
        self.strategies().all(|s| {
            s.iter().all(|&p| (-tol..=1.0 + tol).contains(&p))
                && (s.iter().sum::<f64>() - 1.0).abs() <= tol
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonReport {
    /// Best pure deviation value minus current value, per player.
    pub per_player_gain: Vec<f64>,
    pub epsilon: f64,
}

impl EpsilonReport {
    pub(crate) fn from_gains(per_player_gain: Vec<f64>) -> Self {
        let max = per_player_gain
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        debug_assert!(
            max >= -NEGATIVE_EPSILON_SLACK,
            "negative regret {max} beyond numerical slack"
        );
        Self {
            per_player_gain,
            epsilon: max.max(0.0),
        }
    }
}

/// Scratch buffers for tensor contraction, reused across calls.
#[derive(Debug, Default, Clone)]
pub(crate) struct ValueScratch {
    front: Vec<f64>,
    back: Vec<f64>,
}

/// Expected value of each of `player`'s pure actions against the other
/// players' strategies in `probs` (flat, player-major). Contracts every
/// opponent axis of the player's payoff tensor, last axis first, so the
/// total cost is `O(m^n)`.
pub(crate) fn action_values_into(
    game: &Game,
    probs: &[f64],
    player: usize,
    scratch: &mut ValueScratch,
    out: &mut [f64],
) {
    let n = game.num_players;
    let m = game.num_actions;
    debug_assert_eq!(out.len(), m);
    let mut src_is_payoffs = true;
    for axis in (0..n).rev() {
        if axis == player {
            continue;
        }
        let inner = if player > axis { m } else { 1 };
        let outer = m.pow(axis as u32);
        let sigma = &probs[axis * m..(axis + 1) * m];
        if src_is_payoffs {
            contract(game.player_payoffs(player), outer, m, inner, sigma, &mut scratch.front);
            src_is_payoffs = false;
        } else {
            contract(&scratch.front, outer, m, inner, sigma, &mut scratch.back);
            std::mem::swap(&mut scratch.front, &mut scratch.back);
        }
    }
    out.copy_from_slice(&scratch.front[..m]);
}

/// Sums out the middle axis of an `(outer, m, inner)` tensor weighted by `sigma`.
fn contract(src: &[f64], outer: usize, m: usize, inner: usize, sigma: &[f64], dst: &mut Vec<f64>) {
    dst.clear();
    dst.resize(outer * inner, 0.0);
    for (o, d) in dst.chunks_exact_mut(inner).enumerate() {
        let base = o * m * inner;
        for (a, &w) in sigma.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let row = &src[base + a * inner..base + (a + 1) * inner];
            for (dv, rv) in d.iter_mut().zip(row) {
                *dv += w * rv;
            }
        }
    }
}

/// Index and value of the maximum, ties to the lowest index.
pub(crate) fn argmax(values: &[f64]) -> (usize, f64) {
    let mut best = (0, values[0]);
    for (a, &v) in values.iter().enumerate().skip(1) {
        if v > best.1 {
            best = (a, v);
        }
    }
    best
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Expected value of each pure action of `player` against `profile`'s
/// opponents.
pub fn action_values(game: &Game, profile: &StrategyProfile, player: usize) -> Result<Vec<f64>> {
    game.check_profile(profile)?;
    game.check_player(player)?;
    let mut out = vec![0.0; game.num_actions];
    action_values_into(game, profile.as_slice(), player, &mut ValueScratch::default(), &mut out);
    Ok(out)
}

pub fn expected_utility(game: &Game, profile: &StrategyProfile, player: usize) -> Result<f64> {
    let values = action_values(game, profile, player)?;
    Ok(dot(&values, profile.player(player)))
}

/// Pure best response of `player` to the others' strategies, ties broken
/// toward the lowest action index.
pub fn best_response(game: &Game, profile: &StrategyProfile, player: usize) -> Result<(usize, f64)> {
    let values = action_values(game, profile, player)?;
    Ok(argmax(&values))
}

pub fn epsilon(game: &Game, profile: &StrategyProfile) -> Result<EpsilonReport> {
    game.check_profile(profile)?;
    Ok(epsilon_unchecked(game, profile.as_slice(), &mut ValueScratch::default()))
}

pub(crate) fn epsilon_unchecked(game: &Game, probs: &[f64], scratch: &mut ValueScratch) -> EpsilonReport {
    let m = game.num_actions;
    let mut values = vec![0.0; m];
    let gains = (0..game.num_players)
        .map(|i| {
            action_values_into(game, probs, i, scratch, &mut values);
            let (_, best) = argmax(&values);
            best - dot(&values, &probs[i * m..(i + 1) * m])
        })
        .collect();
    EpsilonReport::from_gains(gains)
}

/// Game with every payoff i.i.d. uniform on `[0, 1)`.
pub fn random_game(num_players: usize, num_actions: usize, seed: u64) -> Result<Game> {
    random_game_capped(num_players, num_actions, seed, DEFAULT_MAX_PAYOFF_ENTRIES)
}

pub fn random_game_capped(
    num_players: usize,
    num_actions: usize,
    seed: u64,
    max_entries: usize,
) -> Result<Game> {
    check_dimensions(num_players, num_actions)?;
    let too_large = |needed: String| Error::GameTooLarge {
        players: num_players,
        actions: num_actions,
        needed,
        cap: max_entries,
    };
    let entries = payoff_entries(num_players, num_actions)
        .ok_or_else(|| too_large("more than usize::MAX".into()))?;
    if entries > max_entries {
        return Err(too_large(entries.to_string()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let payoffs = (0..entries).map(|_| rng.random::<f64>()).collect();
    Game::new(num_players, num_actions, payoffs)
}

/// On-disk JSON layout of a game.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GameFile {
    pub players: usize,
    pub actions: usize,
    pub payoffs: Vec<f64>,
}

impl From<&Game> for GameFile {
    fn from(game: &Game) -> Self {
        Self {
            players: game.num_players,
            actions: game.num_actions,
            payoffs: game.payoffs.clone(),
        }
    }
}

impl TryFrom<GameFile> for Game {
    type Error = Error;

    fn try_from(file: GameFile) -> Result<Self> {
        Game::new(file.players, file.actions, file.payoffs)
    }
}

pub fn game_from_json(text: &str) -> Result<Game> {
    let file: GameFile = serde_json::from_str(text)?;
    Game::try_from(file)
}

pub fn game_to_json(game: &Game) -> Result<String> {
    Ok(serde_json::to_string(&GameFile::from(game))?)
}

pub fn read_game(path: &Path) -> Result<Game> {
    let text = fs::read_to_string(path)?;
    game_from_json(&text).map_err(|e| Error::MalformedGame {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

pub fn write_game(path: &Path, game: &Game) -> Result<()> {
    fs::write(path, game_to_json(game)?)?;
    Ok(())
}
