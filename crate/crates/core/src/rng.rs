//! Seeded random streams.
//!
//! A run seed is split into independent named streams so that the lottery
//! and the will strategy never share draws. The stream seed is the first
//! eight bytes (little endian) of
//! `SHA-256("everwill-stream/v1" || 0x00 || role || 0x00 || seed_le)`, which
//! keeps derivation stable across platforms and releases.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha8Rng;

pub const LOTTERY_STREAM: &str = "lottery";
pub const WILL_STREAM: &str = "will";
pub const SETUP_STREAM: &str = "setup";

pub fn stream_seed(seed: u64, role: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(b"everwill-stream/v1");
    hasher.update([0u8]);
    hasher.update(role.as_bytes());
    hasher.update([0u8]);
    hasher.update(seed.to_le_bytes());
    let digest = hasher.finalize();
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(head)
}

pub fn stream(seed: u64, role: &str) -> StreamRng {
    StreamRng::seed_from_u64(stream_seed(seed, role))
}

/// The two streams a running history consumes, plus the index of the
/// latest state produced so strategies can see the step number.
#[derive(Debug, Clone)]
pub struct Streams {
    pub lottery: StreamRng,
    pub will: StreamRng,
    pub steps_taken: u64,
}

impl Streams {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            lottery: stream(seed, LOTTERY_STREAM),
            will: stream(seed, WILL_STREAM),
            steps_taken: 0,
        }
    }
}
