//! Deterministic seed derivation.
//!
//! Every stochastic step asks its parent seed for a child keyed by a text
//! label and an index, e.g. `seed.child("trial", 7).child("tree", 12)`. The
//! child is a pure function of `(parent, label, index)`, so a given stream is
//! reproduced no matter which thread or in which order it is consumed.
//!
//! Derivation: the label is hashed with 64-bit FNV-1a, xor-ed into the
//! parent, passed through the SplitMix64 finalizer, then the index is mixed
//! in and finalized a second time. Generators are ChaCha8 seeded from the
//! resulting 64-bit value.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn fnv1a(label: &str) -> u64 {
    label
        .bytes()
        .fold(FNV_OFFSET, |h, b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngSeed {
    pub fn new(master: u64) -> Self {
        RngSeed(master)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    /// Child seed for the `index`-th use of `label`.
    pub fn child(self, label: &str, index: u64) -> RngSeed {
        let h = splitmix64(self.0 ^ fnv1a(label));
        RngSeed(splitmix64(h ^ index.wrapping_mul(GOLDEN)))
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

impl From<u64> for RngSeed {
    fn from(v: u64) -> Self {
        RngSeed(v)
    }
}
