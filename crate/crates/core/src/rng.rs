//! Splittable, counter-based random streams.
//!
//! Every stochastic operation takes an explicit [`Stream`]. Streams form a
//! tree keyed by 64-bit labels: a child key is a pure function of its parent
//! key and the label, so any leaf can be reconstructed from the root seed
//! without touching its siblings. Leaves are materialised as ChaCha8
//! generators, whose output is a function of (key, block counter) only.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator type used throughout the crate.
pub type SmcRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Stream {
    key: u64,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Stream {
    pub fn root(seed: u64) -> Self {
        Stream {
            key: splitmix64(seed ^ 0x5453_4D43_0000_0001),
        }
    }

    /// Child stream for an integer label (replicate, step, particle index).
    #[inline]
    pub fn child(self, label: u64) -> Self {
        Stream {
            key: splitmix64(self.key ^ splitmix64(label.wrapping_add(0xA076_1D64_78BD_642F))),
        }
    }

    /// Child stream for a string label (FNV-1a folded into the key).
    pub fn named(self, label: &str) -> Self {
        let mut h: u64 = 0xCBF2_9CE4_8422_2325;
        for b in label.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01B3);
        }
        Stream {
            key: splitmix64(self.key.rotate_left(17) ^ h),
        }
    }

    pub fn key(self) -> u64 {
        self.key
    }

    pub fn rng(self) -> SmcRng {
        SmcRng::seed_from_u64(self.key)
    }
}
