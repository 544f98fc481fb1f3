//! 16-bit Fibonacci LFSR used as the uniform random source of the encoder.
//!
//! The register implements the recurrence
//!
//! ```text
//! s[n + 16] = s[n] ^ s[n + 1] ^ s[n + 3] ^ s[n + 12]
//! ```
//!
//! which is the feedback polynomial `x^16 + x^15 + x^13 + x^4 + 1`
//! (taps 16, 15, 13, 4). Bit 0 of the register holds the oldest bit and is
//! shifted out first; the feedback bit enters at bit 15. The polynomial is
//! primitive, so the nonzero states form a single cycle of length 2^16 - 1.
//!
//! Each emitted word is the register after 16 single-bit steps, i.e. an
//! entirely fresh window of the bit sequence. Because 16 and 2^16 - 1 are
//! coprime, the emitted words also cycle through every nonzero state.

use crate::error::{Error, Result};

/// Width `p` of the generated words.
pub const WORD_BITS: u32 = 16;
/// Feedback taps, as exponents of the characteristic polynomial.
pub const TAPS: [u32; 4] = [16, 15, 13, 4];
/// Number of distinct words emitted before the sequence repeats.
pub const PERIOD: u32 = (1 << WORD_BITS) - 1;

/// Register contents plus an audit counter of emitted words.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LfsrState {
    register: u16,
    draws: u64,
}

impl LfsrState {
    pub fn seed(value: u16) -> Result<Self> {
        if value == 0 {
            return Err(Error::InvalidSeed(value));
        }
        Ok(Self { register: value, draws: 0 })
    }

    pub fn register(&self) -> u16 {
        self.register
    }

    /// Words emitted since seeding.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    /// Advance 16 steps and return the new register contents.
    pub fn next_word(&mut self) -> u16 {
        self.register = advance_word(self.register);
        self.draws += 1;
        self.register
    }

    /// Draw `count` words in order.
    pub fn take_words(&mut self, count: usize) -> Vec<u16> {
        (0..count).map(|_| self.next_word()).collect()
    }
}

impl Iterator for LfsrState {
    type Item = u16;

    fn next(&mut self) -> Option<u16> {
        Some(self.next_word())
    }
}

/// Word / 2^16, an exact dyadic fraction in [0, 1).
pub fn uniform_fraction(word: u16) -> f64 {
    word as f64 / (1u32 << WORD_BITS) as f64
}

/// Sixteen recurrence steps computed four bits at a time.
///
/// The sequence window `s[0..32]` lives in a `u32`. Feedback bits
/// `s[16 + k]` for `k` in a 4-bit chunk depend only on bits below `16 + k`,
/// all of which are available once the previous chunk is written.
fn advance_word(register: u16) -> u16 {
    let mut window = register as u32;
    for k in (0..16).step_by(4) {
        let fresh = ((window >> k) ^ (window >> (k + 1)) ^ (window >> (k + 3)) ^ (window >> (k + 12))) & 0xF;
        window |= fresh << (16 + k);
    }
    (window >> 16) as u16
}

/// Derive a nonzero, distinct `(x, delta)` seed pair for step `counter`.
///
/// The base seed and counter go through a splitmix64 finalizer, and the
/// result is whitened by one word advance. The mix must be nonlinear: the
/// LFSR is linear over GF(2), so seeds differing by a fixed XOR produce word
/// streams differing by a fixed XOR, which correlates the X and delta
/// thresholds identically in every trial.
pub fn derive_seed_pair(base: u16, counter: u64) -> (u16, u16) {
    let h = splitmix64(((base as u64) << 48) ^ counter);
    let period = PERIOD as u64;
    let pre_x = h % period;
    // Offset in 1..period keeps the two pre-seeds distinct.
    let offset = 1 + (h >> 32) % (period - 1);
    let pre_delta = (pre_x + offset) % period;
    // Nonzero in, nonzero out; advance_word is a bijection on nonzero states.
    (advance_word(pre_x as u16 + 1), advance_word(pre_delta as u16 + 1))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Bit-serial reference: one shift per step, feedback from the tap
    /// positions counted from the output end.
    fn oracle_step(reg: u16) -> u16 {
        let fb = (reg ^ (reg >> 1) ^ (reg >> 3) ^ (reg >> 12)) & 1;
        (reg >> 1) | (fb << 15)
    }

    fn oracle_word(mut reg: u16) -> u16 {
        for _ in 0..WORD_BITS {
            reg = oracle_step(reg);
        }
        reg
    }

    #[test]
    fn seeding() {
        let s = LfsrState::seed(0xACE1).unwrap();
        assert_eq!(s.register(), 0xACE1);
        assert_eq!(s.draws(), 0);
        assert_eq!(LfsrState::seed(0), Err(Error::InvalidSeed(0)));
        assert!(LfsrState::seed(1).is_ok());
    }

    #[test]
    fn first_word_golden() {
        let mut s = LfsrState::seed(0xACE1).unwrap();
        let w1 = s.next_word();
        assert_eq!(w1, oracle_word(0xACE1));
        // Frozen from the bit-serial oracle.
        assert_eq!(w1, 0x0877);
        assert_eq!(s.draws(), 1);
    }

    #[test]
    fn word_parallel_matches_bit_serial_everywhere() {
        for reg in 1..=u16::MAX {
            assert_eq!(advance_word(reg), oracle_word(reg), "{reg:#06x}");
        }
    }

    #[test]
    fn bit_serial_period_is_maximal() {
        let mut reg = 1u16;
        let mut steps = 0u32;
        loop {
            reg = oracle_step(reg);
            steps += 1;
            if reg == 1 {
                break;
            }
        }
        assert_eq!(steps, PERIOD);
    }

    #[test]
    fn full_period_visits_every_nonzero_word() {
        let mut s = LfsrState::seed(0x1234).unwrap();
        let mut seen = vec![false; 1 << 16];
        let mut sum = 0.0;
        for _ in 0..PERIOD {
            let w = s.next_word();
            assert!(!seen[w as usize]);
            seen[w as usize] = true;
            sum += uniform_fraction(w);
        }
        assert!(!seen[0]);
        assert_eq!(s.register(), 0x1234);
        assert_eq!(s.draws(), PERIOD as u64);
        let mean = sum / PERIOD as f64;
        assert!((mean - 0.5).abs() < 1e-4, "{mean}");
    }

    #[test]
    fn uniform_fraction_examples() {
        assert_eq!(uniform_fraction(0x0000), 0.0);
        assert_eq!(uniform_fraction(0x8000), 0.5);
        assert_eq!(uniform_fraction(0xFFFF), 65535.0 / 65536.0);
    }

    #[test]
    fn equal_seeds_equal_streams() {
        let a: Vec<u16> = LfsrState::seed(0xBEEF).unwrap().take(100).collect();
        let b: Vec<u16> = LfsrState::seed(0xBEEF).unwrap().take(100).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn derived_seeds_are_valid_and_distinct() {
        for base in [1u16, 0xACE1, 0xFFFF] {
            let mut all = std::collections::HashSet::new();
            for c in 0..1000 {
                let (x, d) = derive_seed_pair(base, c);
                assert_ne!(x, 0);
                assert_ne!(d, 0);
                assert_ne!(x, d);
                all.insert((x, d));
            }
            assert_eq!(all.len(), 1000);
        }
    }
}
