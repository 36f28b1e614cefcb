//! Counter-style random streams: one independent ChaCha stream per `(seed, domain, key)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream domains, so different consumers of one seed never share draws.
pub mod domain {
    pub const COX: u64 = 1;
    pub const ADOPTION_NETWORK: u64 = 2;
    pub const ADOPTION_PERCEPTION: u64 = 3;
    pub const TORUS: u64 = 4;
    pub const SCENARIO: u64 = 5;
    pub const RELABEL: u64 = 6;
    pub const ADOPTION_GROUPS: u64 = 7;
    pub const SCENARIO_COVARIATE: u64 = 8;
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent stream for `key` inside `domain`; adding keys never perturbs others.
pub fn stream(seed: u64, domain: u64, key: u64) -> StreamRng {
    let mut bytes = [0u8; 32];
    let mut s = splitmix64(seed ^ splitmix64(domain));
    for chunk in bytes.chunks_mut(8) {
        s = splitmix64(s);
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(bytes);
    rng.set_stream(key);
    rng
}

/// Seed of the `rep`-th Monte-Carlo replication.
pub fn replication_seed(seed: u64, rep: u64) -> u64 {
    splitmix64(seed.wrapping_mul(0x2545_f491_4f6c_dd1d) ^ splitmix64(rep))
}
