//! Counter-based uniform draws keyed by `(seed, stream, index)`.
//!
//! Every draw is a pure function of its key, so trials can run in any order
//! or in parallel and still reproduce bit-for-bit.

/// Keyed generator; `stream` is typically the trial index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CounterRng {
    key: u64,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl CounterRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let key = mix(mix(seed.wrapping_add(GOLDEN)) ^ stream.wrapping_mul(GOLDEN).rotate_left(17));
        Self { key }
    }

    pub fn bits(&self, index: u64) -> u64 {
        mix(self.key ^ mix(index.wrapping_add(1).wrapping_mul(GOLDEN)))
    }

    /// Uniform on the open interval `(0, 1)`.
    pub fn uniform(&self, index: u64) -> f64 {
        ((self.bits(index) >> 11) as f64 + 0.5) / (1u64 << 53) as f64
    }

    pub fn uniform_in(&self, index: u64, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform(index)
    }
}
