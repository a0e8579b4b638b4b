//! Portable seeded random streams.
//!
//! Every random draw in the crate goes through [`Rng`], so that an
//! implementation in another language can reproduce the exact same streams:
//!
//! * generator: ChaCha20 (RFC 7539 block function, 64-bit block counter
//!   starting at 0, stream id 0), keyed by the 64-bit seed written little
//!   endian into the first 8 key bytes, remaining 24 key bytes zero;
//! * `next_u64`: two consecutive little-endian 32-bit output words, low word first;
//! * `uniform`: `(next_u64 >> 11) * 2^-53`, in `[0, 1)`;
//! * `below(n)`: `(next_u64 * n) >> 64` computed in 128-bit arithmetic;
//! * `gaussian`: Box-Muller on two fresh uniforms `u1, u2`,
//!   `sqrt(-2 ln(1 - u1)) * cos(2 pi u2)`; the sine branch is discarded;
//! * `sign`: `+1` if the top bit of `next_u64` is clear, else `-1`.
//!
//! Child seeds are derived with SplitMix64 (see [`derive_seed`]).

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

#[derive(Clone, Debug)]
pub struct Rng {
    inner: ChaCha20Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        Rng {
            inner: ChaCha20Rng::from_seed(key),
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform draw in `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Integer in `[0, n)`. `n` must be positive.
    #[inline]
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    pub fn gaussian(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    #[inline]
    pub fn sign(&mut self) -> f64 {
        if self.next_u64() >> 63 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from a master seed and a path of indices.
///
/// `h = master; for i in path { h = splitmix64(h ^ splitmix64(i)) }`.
/// The result depends only on the values, never on scheduling order.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(master, |h, &i| splitmix64(h ^ splitmix64(i)))
}
