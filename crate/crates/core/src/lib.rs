//! Approximate Nash equilibria of n-player strategic-form games with
//! fictitious play started from several carefully chosen initial profiles.
//!
//! The pieces, bottom up:
//!
//! - [`game`]: payoff tensors, mixed strategies, best responses, epsilon.
//! - [`sampling`]: naive and uniform random profiles, the L2 profile metric.
//! - [`kmeans`]: k-means++ seeding and pruned Lloyd iterations.
//! - [`maximin`]: farthest-point search over the product of simplices.
//! - [`initializers`]: the seven initialization algorithms.
//! - [`fp`]: fictitious play and its best-of-K wrapper.
//! - [`experiments`]: seeded random-game batches and summary statistics.

pub mod error;
pub mod experiments;
pub mod fp;
pub mod game;
pub mod initializers;
pub mod kmeans;
pub mod maximin;
pub mod sampling;
pub mod seed;

pub use error::{Error, Result};
pub use fp::{fp_multi, fp_run, FpResult, FpRunConfig, UpdateRule};
pub use game::{best_response, epsilon, expected_utility, random_game, EpsilonReport, Game, MixedStrategy, StrategyProfile};
pub use initializers::{InitAlgorithm, InitBatch, InitSpec, ProfilePool};
