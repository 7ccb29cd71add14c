//! Counter-based seed streams.
//!
//! A stream is a (master seed, stream id) pair. Child streams are derived by
//! hashing the parent id with a replicate index, so the random numbers drawn
//! for replicate `k` never depend on how replicates are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(label: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedStream {
    master: u64,
    id: u64,
}

impl SeedStream {
    pub fn new(master: u64) -> Self {
        SeedStream { master, id: 0 }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    /// Child stream for replicate `index`.
    pub fn substream(&self, index: u64) -> Self {
        let id = splitmix64(self.id ^ splitmix64(index.wrapping_add(0x5851_F42D_4C95_7F2D)));
        SeedStream { master: self.master, id }
    }

    /// Child stream for a named purpose.
    pub fn derive(&self, label: &str) -> Self {
        let id = splitmix64(self.id.rotate_left(17) ^ fnv1a(label));
        SeedStream { master: self.master, id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut seed = [0u8; 32];
        let mut s = self.master;
        for chunk in seed.chunks_mut(8) {
            s = splitmix64(s);
            chunk.copy_from_slice(&s.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(self.id);
        rng
    }
}
