//! Starting profiles for multi-initialization fictitious play.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::StrategyProfile;
use crate::kmeans::{self, PointSet};
use crate::maximin::{self, MaximinProblem, SolverConfig};
use crate::sampling::{sample_uniform, squared_distance_slices as sq_dist, SamplerConfig, Scheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum InitAlgorithm {
    Classic,
    MacQueen1,
    MacQueen2,
    MaximinU,
    MaximinS,
    FpPlusPlus,
    KMeans,
}

impl InitAlgorithm {
    pub const ALL: [InitAlgorithm; 7] = [
        InitAlgorithm::Classic,
        InitAlgorithm::MacQueen1,
        InitAlgorithm::MacQueen2,
        InitAlgorithm::MaximinU,
        InitAlgorithm::MaximinS,
        InitAlgorithm::FpPlusPlus,
        InitAlgorithm::KMeans,
    ];

    /// Stable identifier used on the command line and in CSV output.
    pub fn id(self) -> &'static str {
        match self {
            InitAlgorithm::Classic => "classic",
            InitAlgorithm::MacQueen1 => "macqueen-1",
            InitAlgorithm::MacQueen2 => "macqueen-2",
            InitAlgorithm::MaximinU => "maximin-u",
            InitAlgorithm::MaximinS => "maximin-s",
            InitAlgorithm::FpPlusPlus => "fp++",
            InitAlgorithm::KMeans => "k-means",
        }
    }

    /// Whether the algorithm selects from a sampled pool of profiles.
    pub fn uses_pool(self) -> bool {
        matches!(
            self,
            InitAlgorithm::MaximinS | InitAlgorithm::FpPlusPlus | InitAlgorithm::KMeans
        )
    }

    /// Number of initializations actually produced when `k` are requested.
    pub fn effective_k(self, k: usize) -> usize {
        if self == InitAlgorithm::Classic {
            1
        } else {
            k
        }
    }
}

impl fmt::Display for InitAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl From<InitAlgorithm> for String {
    fn from(a: InitAlgorithm) -> Self {
        a.id().to_string()
    }
}

impl TryFrom<String> for InitAlgorithm {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for InitAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        InitAlgorithm::ALL
            .into_iter()
            .find(|a| a.id() == s)
            .ok_or_else(|| Error::UnknownAlgorithm(s.to_string()))
    }
}

/// An algorithm together with its initialization count `k` and pool size `h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InitSpec {
    pub algorithm: InitAlgorithm,
    pub k: usize,
    pub h: usize,
}

impl InitSpec {
    pub fn new(algorithm: InitAlgorithm, k: usize, h: usize) -> Result<Self> {
        let spec = Self {
            algorithm,
            k: algorithm.effective_k(k),
            h,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidConfig("need at least one initialization".into()));
        }
        if self.algorithm == InitAlgorithm::Classic && self.k != 1 {
            return Err(Error::InvalidConfig("classic uses exactly one initialization".into()));
        }
        if self.algorithm.uses_pool() && self.h < self.k {
            return Err(Error::PoolTooSmall {
                pool: self.h,
                requested: self.k,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitBatch {
    pub algorithm: InitAlgorithm,
    pub profiles: Vec<StrategyProfile>,
    pub seed: u64,
}

impl InitBatch {
    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }
}

/// `h` uniformly sampled profiles stored contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfilePool {
    num_players: usize,
    num_actions: usize,
    data: Vec<f64>,
}

impl ProfilePool {
    pub fn sample<R: Rng + ?Sized>(num_players: usize, num_actions: usize, h: usize, rng: &mut R) -> Self {
        let mut data = Vec::with_capacity(h * num_players * num_actions);
        for _ in 0..h {
            data.extend_from_slice(sample_uniform(num_players, num_actions, rng).as_slice());
        }
        Self {
            num_players,
            num_actions,
            data,
        }
    }

    pub fn from_profiles(profiles: &[StrategyProfile]) -> Result<Self> {
        let first = profiles
            .first()
            .ok_or(Error::PoolTooSmall { pool: 0, requested: 1 })?;
        let (n, m) = (first.num_players(), first.num_actions());
        if profiles.iter().any(|p| p.num_players() != n || p.num_actions() != m) {
            return Err(Error::ShapeMismatch("pool profiles have different shapes".into()));
        }
        Ok(Self {
            num_players: n,
            num_actions: m,
            data: profiles.iter().flat_map(|p| p.as_slice().iter().copied()).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.num_players * self.num_actions
    }

    pub fn num_players(&self) -> usize {
        self.num_players
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn points(&self) -> PointSet<'_> {
        PointSet::new(&self.data, self.dim()).expect("pool dimensions are consistent")
    }

    pub fn profile(&self, i: usize) -> StrategyProfile {
        StrategyProfile::from_flat_unchecked(self.num_actions, self.points().point(i).to_vec())
    }

    fn check_k(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.len() {
            return Err(Error::PoolTooSmall {
                pool: self.len(),
                requested: k,
            });
        }
        Ok(())
    }
}

pub fn init_classic(num_players: usize, num_actions: usize) -> InitBatch {
    InitBatch {
        algorithm: InitAlgorithm::Classic,
        profiles: vec![StrategyProfile::uniform(num_players, num_actions)],
        seed: 0,
    }
}

/// `k` i.i.d. profiles from the naive (`macqueen-1`) or exponential
/// (`macqueen-2`) sampler.
pub fn init_macqueen(num_players: usize, num_actions: usize, k: usize, scheme: Scheme, seed: u64) -> InitBatch {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sampler = SamplerConfig::new(scheme, seed);
    InitBatch {
        algorithm: match scheme {
            Scheme::Naive => InitAlgorithm::MacQueen1,
            Scheme::Exponential => InitAlgorithm::MacQueen2,
        },
        profiles: (0..k).map(|_| sampler.sample(num_players, num_actions, &mut rng)).collect(),
        seed,
    }
}

/// Greedy farthest-point selection from the pool: the first pick is
/// uniform, each next pick maximizes the distance to its nearest chosen
/// point (ties to the lowest pool index).
pub fn maximin_indices<R: Rng + ?Sized>(pool: &ProfilePool, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    pool.check_k(k)?;
    let points = pool.points();
    let first = rng.random_range(0..pool.len());
    let mut chosen = vec![first];
    let mut taken = vec![false; pool.len()];
    taken[first] = true;
    let mut nearest: Vec<f64> = (0..pool.len())
        .map(|h| sq_dist(points.point(h), points.point(first)))
        .collect();
    while chosen.len() < k {
        let mut best: Option<usize> = None;
        for h in (0..pool.len()).filter(|&h| !taken[h]) {
            if best.is_none_or(|b| nearest[h] > nearest[b]) {
                best = Some(h);
            }
        }
        let next = best.expect("k <= pool size");
        chosen.push(next);
        taken[next] = true;
        for (h, d) in nearest.iter_mut().enumerate() {
            *d = d.min(sq_dist(points.point(h), points.point(next)));
        }
    }
    Ok(chosen)
}

fn batch_from_indices(algorithm: InitAlgorithm, pool: &ProfilePool, indices: &[usize], seed: u64) -> InitBatch {
    InitBatch {
        algorithm,
        profiles: indices.iter().map(|&i| pool.profile(i)).collect(),
        seed,
    }
}

pub fn init_maximin_sampled_from_pool(pool: &ProfilePool, k: usize, seed: u64) -> Result<InitBatch> {
    let idx = maximin_indices(pool, k, &mut ChaCha8Rng::seed_from_u64(seed))?;
    Ok(batch_from_indices(InitAlgorithm::MaximinS, pool, &idx, seed))
}

pub fn init_maximin_sampled(num_players: usize, num_actions: usize, k: usize, h: usize, seed: u64) -> Result<InitBatch> {
    let pool = sample_pool_checked(num_players, num_actions, k, h, seed)?;
    init_maximin_sampled_from_pool(&pool, k, seed)
}

/// k-means++-style selection from the pool: each next pick is drawn with
/// probability proportional to its squared distance to the nearest chosen
/// point, uniformly among the remaining points when all such weights vanish.
pub fn init_fppp_from_pool(pool: &ProfilePool, k: usize, seed: u64) -> Result<InitBatch> {
    pool.check_k(k)?;
    let idx = kmeans::kmeanspp_indices(&pool.points(), k, &mut ChaCha8Rng::seed_from_u64(seed))?;
    Ok(batch_from_indices(InitAlgorithm::FpPlusPlus, pool, &idx, seed))
}

pub fn init_fppp(num_players: usize, num_actions: usize, k: usize, h: usize, seed: u64) -> Result<InitBatch> {
    let pool = sample_pool_checked(num_players, num_actions, k, h, seed)?;
    init_fppp_from_pool(&pool, k, seed)
}

/// Cluster centers of the pool (best of five k-means++ restarts, up to 50
/// Lloyd iterations each), renormalized onto the product simplex.
pub fn init_kmeans_from_pool(pool: &ProfilePool, k: usize, seed: u64) -> Result<InitBatch> {
    pool.check_k(k)?;
    let clustering = kmeans::best_of_restarts(
        &pool.points(),
        k,
        kmeans::DEFAULT_RESTARTS,
        kmeans::DEFAULT_MAX_ITERS,
        &mut ChaCha8Rng::seed_from_u64(seed),
    )?;
    let profiles = clustering
        .centers
        .into_iter()
        .map(|c| {
            let w = c.into_iter().map(|x| x.max(0.0)).collect();
            StrategyProfile::from_weights(pool.num_actions(), w)
        })
        .collect();
    Ok(InitBatch {
        algorithm: InitAlgorithm::KMeans,
        profiles,
        seed,
    })
}

pub fn init_kmeans(num_players: usize, num_actions: usize, k: usize, h: usize, seed: u64) -> Result<InitBatch> {
    let pool = sample_pool_checked(num_players, num_actions, k, h, seed)?;
    init_kmeans_from_pool(&pool, k, seed)
}

/// First profile sampled uniformly, each next one the solver's maximizer of
/// the minimum squared distance to all profiles chosen so far.
pub fn init_maximin_unsampled(
    num_players: usize,
    num_actions: usize,
    k: usize,
    solver: &SolverConfig,
    seed: u64,
) -> Result<InitBatch> {
    if k == 0 {
        return Err(Error::InvalidConfig("need at least one initialization".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut profiles = vec![sample_uniform(num_players, num_actions, &mut rng)];
    while profiles.len() < k {
        let problem = MaximinProblem::new(profiles.clone())?;
        let solution = maximin::solve(&problem, solver, &mut rng)?;
        profiles.push(solution.point);
    }
    Ok(InitBatch {
        algorithm: InitAlgorithm::MaximinU,
        profiles,
        seed,
    })
}

fn sample_pool_checked(num_players: usize, num_actions: usize, k: usize, h: usize, seed: u64) -> Result<ProfilePool> {
    if h < k {
        return Err(Error::PoolTooSmall { pool: h, requested: k });
    }
    // pool stream is distinct from the selection stream
    let mut rng = ChaCha8Rng::seed_from_u64(crate::seed::derive_seed(seed, crate::seed::Purpose::Pool, 0, 0));
    Ok(ProfilePool::sample(num_players, num_actions, h, &mut rng))
}

/// Builds the batch for `spec`. Pool-based algorithms select from `pool`,
/// which must hold at least `spec.k` profiles of the right shape.
pub fn build_batch(
    spec: &InitSpec,
    num_players: usize,
    num_actions: usize,
    pool: Option<&ProfilePool>,
    solver: &SolverConfig,
    seed: u64,
) -> Result<InitBatch> {
    spec.validate()?;
    let need_pool = || -> Result<&ProfilePool> {
        let pool = pool.ok_or_else(|| {
            Error::InvalidConfig(format!("{} needs a sampled pool", spec.algorithm))
        })?;
        if pool.num_players() != num_players || pool.num_actions() != num_actions {
            return Err(Error::ShapeMismatch("pool shape differs from game".into()));
        }
        Ok(pool)
    };
    match spec.algorithm {
        InitAlgorithm::Classic => Ok(init_classic(num_players, num_actions)),
        InitAlgorithm::MacQueen1 => Ok(init_macqueen(num_players, num_actions, spec.k, Scheme::Naive, seed)),
        InitAlgorithm::MacQueen2 => Ok(init_macqueen(num_players, num_actions, spec.k, Scheme::Exponential, seed)),
        InitAlgorithm::MaximinU => init_maximin_unsampled(num_players, num_actions, spec.k, solver, seed),
        InitAlgorithm::MaximinS => init_maximin_sampled_from_pool(need_pool()?, spec.k, seed),
        InitAlgorithm::FpPlusPlus => init_fppp_from_pool(need_pool()?, spec.k, seed),
        InitAlgorithm::KMeans => init_kmeans_from_pool(need_pool()?, spec.k, seed),
    }
}
