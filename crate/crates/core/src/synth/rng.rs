//! Counter-based SplitMix64 streams.
//!
//! Every draw is a pure function of `(seed, stream, n)`:
//!
//! ```text
//! GAMMA   = 0x9E3779B97F4A7C15
//! mix(z)  = z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
//!           z ^= z >> 27; z *= 0x94D049BB133111EB;
//!           z ^ (z >> 31)                       (wrapping u64 arithmetic)
//! key     = mix(seed ^ mix(stream + GAMMA))
//! draw(n) = mix(key + (n + 1) * GAMMA)          for n = 0, 1, 2, ...
//! ```
//!
//! Integers below `bound` are `(draw * bound) >> 64` on the 128-bit
//! product; unit floats are `(draw >> 11) * 2^-53`. This mapping is fixed:
//! changing it changes every generated corpus.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream id for the ground truth of image `image`.
pub fn ground_truth_stream(image: usize) -> u64 {
    image as u64
}

/// Stream id for degrading image `image`. Every component shares it, so
/// components with identical profiles produce identical masks.
pub fn degrade_stream(image: usize) -> u64 {
    (1 << 40) | image as u64
}

#[derive(Clone, Debug)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self {
            key: mix(seed ^ mix(stream.wrapping_add(GAMMA))),
            counter: 0,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter += 1;
        mix(self.key.wrapping_add(self.counter.wrapping_mul(GAMMA)))
    }

    /// Uniform in `0..bound`; `bound` must be nonzero.
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        ((self.next_u64() as u128 * bound as u128) >> 64) as u64
    }

    /// Uniform in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
