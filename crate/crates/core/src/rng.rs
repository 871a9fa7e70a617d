//! Reproducible random streams keyed by `(seed, path, level)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Generator for one path: independent of every other `(seed, path_index)`.
pub fn path_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(path_index)))
}

/// Generator for one level of one path. Levels use separate ChaCha
/// streams of the same key, so a level's draws do not depend on how many
/// numbers earlier levels consumed.
pub fn level_rng(seed: u64, path_index: u64, level: usize) -> ChaCha8Rng {
    let mut rng = path_rng(seed, path_index);
    rng.set_stream(level as u64);
    rng
}
