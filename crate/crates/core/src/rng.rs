//! The single random source used by every command.
//!
//! SplitMix64, bit for bit:
//!
//! ```text
//! state = state + 0x9E3779B97F4A7C15            (wrapping)
//! z = state
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9       (wrapping)
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB       (wrapping)
//! return z ^ (z >> 31)
//! ```
//!
//! Derived draws:
//! - `uniform()`: `(next() >> 11) * 2^-53`, in `[0, 1)`.
//! - `below(n)`: Lemire multiply-shift with rejection; `m = next() * n` as a
//!   128-bit product, redraw while `low64(m) < (2^64 - n) mod n`, return `m >> 64`.
//! - `normal()`: Box-Muller on two uniforms, `u1 = 1 - uniform()`,
//!   `u2 = uniform()`, returning `sqrt(-2 ln u1) * cos(2π u2)` (the sine branch
//!   is discarded so every normal costs exactly two words).

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `0..n`. Panics if `n == 0`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let threshold = n.wrapping_neg() % n;
        loop {
            let m = (self.next_u64() as u128) * (n as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Independent child stream, so that adding draws in one consumer does not
    /// shift the sequence seen by another.
    pub fn fork(&mut self) -> Self {
        Self::new(self.next_u64())
    }
}
