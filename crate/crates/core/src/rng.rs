//! Named, independent random streams.
//!
//! Every stream is a ChaCha8 generator keyed by the two run seeds, with the
//! stream id derived from a label and an index. Drawing from one stream never
//! shifts another, so adding a consumer leaves existing trajectories intact.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn fnv1a(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Stream for `(label, index)` under the seed pair.
pub fn stream(group_seed: u64, sim_seed: u64, label: &str, index: u64) -> SimRng {
    let mut key = [0u8; 32];
    let mut s = splitmix64(group_seed) ^ splitmix64(sim_seed.wrapping_add(0x5851_f42d_4c95_7f2d));
    for chunk in key.chunks_exact_mut(8) {
        s = splitmix64(s);
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(splitmix64(fnv1a(label) ^ splitmix64(index)));
    rng
}

/// Stream that depends on the group seed only.
pub fn group_stream(group_seed: u64, label: &str, index: u64) -> SimRng {
    stream(group_seed, 0, label, index)
}
