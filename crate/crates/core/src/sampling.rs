//! Random strategy profiles on the product of simplices, and the L2 profile
//! metric.

use rand::Rng;

use crate::error::{Error, Result};
use crate::game::StrategyProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Uniform weights normalized per player. Not uniform on the simplex.
    Naive,
    /// Exponential weights normalized per player. Uniform on the simplex.
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub scheme: Scheme,
    /// Exponential rate. Any positive value gives the same distribution.
    pub lambda: f64,
    pub seed: u64,
}

impl SamplerConfig {
    pub fn new(scheme: Scheme, seed: u64) -> Self {
        Self {
            scheme,
            lambda: 1.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "exponential rate must be positive, got {}",
                self.lambda
            )));
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, num_players: usize, num_actions: usize, rng: &mut R) -> StrategyProfile {
        match self.scheme {
            Scheme::Naive => sample_naive(num_players, num_actions, rng),
            Scheme::Exponential => sample_exponential(num_players, num_actions, self.lambda, rng),
        }
    }
}

/// Uniform draw from the open interval (0, 1).
pub fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 && u < 1.0 {
            return u;
        }
    }
}

pub fn sample_naive<R: Rng + ?Sized>(num_players: usize, num_actions: usize, rng: &mut R) -> StrategyProfile {
    let weights = (0..num_players * num_actions).map(|_| open_unit(rng)).collect();
    StrategyProfile::from_weights(num_actions, weights)
}

/// Uniform sample from each player's simplex via normalized exponentials.
pub fn sample_uniform<R: Rng + ?Sized>(num_players: usize, num_actions: usize, rng: &mut R) -> StrategyProfile {
    sample_exponential(num_players, num_actions, 1.0, rng)
}

fn sample_exponential<R: Rng + ?Sized>(
    num_players: usize,
    num_actions: usize,
    lambda: f64,
    rng: &mut R,
) -> StrategyProfile {
    let weights = (0..num_players * num_actions)
        .map(|_| -open_unit(rng).ln() / lambda)
        .collect();
    StrategyProfile::from_weights(num_actions, weights)
}

pub(crate) fn squared_distance_slices(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn squared_distance(a: &StrategyProfile, b: &StrategyProfile) -> Result<f64> {
    if a.num_players() != b.num_players() || a.num_actions() != b.num_actions() {
        return Err(Error::ShapeMismatch(format!(
            "cannot compare {}x{} profile with {}x{}",
            a.num_players(),
            a.num_actions(),
            b.num_players(),
            b.num_actions()
        )));
    }
    Ok(squared_distance_slices(a.as_slice(), b.as_slice()))
}

pub fn l2_distance(a: &StrategyProfile, b: &StrategyProfile) -> Result<f64> {
    squared_distance(a, b).map(f64::sqrt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_action_is_certain() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(sample_naive(2, 1, &mut rng).as_slice(), &[1.0, 1.0]);
        assert_eq!(sample_uniform(2, 1, &mut rng).as_slice(), &[1.0, 1.0]);
    }

    #[test]
    fn naive_tail_is_lighter_than_uniform_simplex() {
        // Dirichlet(1,1,1): P(x0 > 0.75) = 0.25^2 = 0.0625.
        // Normalized uniforms: P(U1 > 3(U2 + U3)) = 1/54.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 100_000;
        let hits = (0..draws)
            .filter(|_| sample_naive(1, 3, &mut rng).as_slice()[0] > 0.75)
            .count();
        let p = hits as f64 / draws as f64;
        let se = (0.0625 * (1.0 - 0.0625) / draws as f64).sqrt();
        assert!(p < 0.0625 - 10.0 * se, "naive tail {p}");
        assert!((p - 1.0 / 54.0).abs() < 0.002, "naive tail {p}");

        let hits = (0..draws)
            .filter(|_| sample_uniform(1, 3, &mut rng).as_slice()[0] > 0.75)
            .count();
        let p = hits as f64 / draws as f64;
        assert!((p - 0.0625).abs() < 4.0 * se, "uniform tail {p}");
    }

    #[test]
    fn uniform_coordinate_means() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let draws = 100_000;
        let mut sums = [0.0; 3];
        for _ in 0..draws {
            let p = sample_uniform(1, 3, &mut rng);
            for (s, x) in sums.iter_mut().zip(p.as_slice()) {
                *s += x;
            }
        }
        for s in sums {
            let mean = s / draws as f64;
            assert!((0.323..=0.343).contains(&mean), "mean {mean}");
        }
    }

    #[test]
    fn lambda_must_be_positive() {
        let mut cfg = SamplerConfig::new(Scheme::Exponential, 0);
        assert!(cfg.validate().is_ok());
        cfg.lambda = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn distance_examples() {
        let a = StrategyProfile::pure(2, &[0]);
        let b = StrategyProfile::pure(2, &[1]);
        assert_abs_diff_eq!(l2_distance(&a, &b).unwrap(), 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(l2_distance(&a, &a).unwrap(), 0.0);
        assert!(l2_distance(&a, &StrategyProfile::uniform(2, 2)).is_err());
    }

    #[test]
    fn distance_matches_reversed_resum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = sample_uniform(3, 5, &mut rng);
        let b = sample_uniform(3, 5, &mut rng);
        let mut acc = 0.0;
        for i in (0..3).rev() {
            for j in (0..5).rev() {
                let d = a.player(i)[j] - b.player(i)[j];
                acc += d * d;
            }
        }
        assert_abs_diff_eq!(l2_distance(&a, &b).unwrap(), acc.sqrt(), epsilon = 1e-14);
    }

    proptest! {
        #[test]
        fn samplers_emit_valid_profiles(seed in any::<u64>(), n in 1usize..5, m in 1usize..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for scheme in [Scheme::Naive, Scheme::Exponential] {
                let p = SamplerConfig::new(scheme, seed).sample(n, m, &mut rng);
                prop_assert!(p.is_valid(1e-9));
                prop_assert!(p.as_slice().iter().all(|&x| x > 0.0));
            }
        }

        #[test]
        fn sampling_is_deterministic(seed in any::<u64>()) {
            let a = sample_uniform(3, 4, &mut ChaCha8Rng::seed_from_u64(seed));
            let b = sample_uniform(3, 4, &mut ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(a, b);
        }

        #[test]
        fn l2_is_a_metric(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = sample_uniform(3, 4, &mut rng);
            let b = sample_uniform(3, 4, &mut rng);
            let c = sample_uniform(3, 4, &mut rng);
            let ab = l2_distance(&a, &b).unwrap();
            prop_assert!((ab - l2_distance(&b, &a).unwrap()).abs() < 1e-15);
            prop_assert!(l2_distance(&a, &a).unwrap() < 1e-12);
            prop_assert!(ab > 0.0);
            prop_assert!(l2_distance(&a, &c).unwrap() <= ab + l2_distance(&b, &c).unwrap() + 1e-12);
        }
    }
}
