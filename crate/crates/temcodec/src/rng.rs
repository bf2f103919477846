//! Deterministic pseudo-random generation.
//!
//! Signal synthesis, spike-time jitter and the sweep harness all need random
//! draws that are bit-stable across runs, platforms and dependency upgrades,
//! so the generator is pinned here instead of pulled from a crate: SplitMix64
//! with the standard finalizer constants.

use crate::scalar::{real, Real};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 generator. Cheap, seedable, full 64-bit state.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `[0, 1)` converted to the working scalar type.
    pub fn uniform_scalar<T: Real>(&mut self) -> T {
        real(self.uniform())
    }

    /// Uniform draw in `[a, b)`.
    pub fn uniform_in<T: Real>(&mut self, a: T, b: T) -> T {
        a + (b - a) * self.uniform_scalar::<T>()
    }

    /// Standard normal draw (Box-Muller, cosine branch).
    pub fn gaussian<T: Real>(&mut self) -> T {
        // u1 in (0, 1] so the logarithm is finite.
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        real(r * (2.0 * std::f64::consts::PI * u2).cos())
    }
}

/// Stable per-trial seed derivation: mixes the base seed with a cell index
/// and a trial index so records are independent of execution order.
pub fn derive_seed(base: u64, cell: u64, trial: u64) -> u64 {
    let mut s = base;
    s = s.wrapping_add(GOLDEN_GAMMA.wrapping_mul(cell.wrapping_add(1)));
    s = mix(s);
    s = s.wrapping_add(GOLDEN_GAMMA.wrapping_mul(trial.wrapping_add(1)));
    mix(s)
}

fn mix(v: u64) -> u64 {
    let mut z = v.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
