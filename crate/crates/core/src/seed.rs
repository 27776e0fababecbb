//! Counter-based seed derivation.
//!
//! Every random stream is keyed by `(master_seed, purpose, game_index,
//! draw_index)`, so results do not depend on the order in which parallel
//! workers pick up games.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a derived stream is used for. Tags are part of the hash input and
/// must stay stable across releases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    Game,
    Pool,
    Init,
    Solver,
    Custom(u64),
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Game => 0x6761_6d65,
            Purpose::Pool => 0x706f_6f6c,
            Purpose::Init => 0x696e_6974,
            Purpose::Solver => 0x736f_6c76,
            Purpose::Custom(t) => t.rotate_left(32) ^ 0x6375_7374,
        }
    }
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(master_seed: u64, purpose: Purpose, game_index: u64, draw_index: u64) -> u64 {
    [purpose.tag(), game_index, draw_index]
        .into_iter()
        .fold(mix(master_seed), |h, x| mix(h ^ mix(x)))
}

pub fn stream(master_seed: u64, purpose: Purpose, game_index: u64, draw_index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master_seed, purpose, game_index, draw_index))
}
