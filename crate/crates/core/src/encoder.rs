//! Sign-magnitude Bernoulli encoding of binary16 operands.
//!
//! A value `x` with `|x| <= 2^E` becomes a sign bit plus `M` event bits. Event
//! `k` compares `|x|` against the threshold `word_k * 2^(E - p)`: the raw RNG
//! word is the threshold's integer significand and `E - p` its exponent, so
//! normalizing by `2^E` costs no division and no multiplier. The comparison
//! itself is an integer compare after aligning binary exponents by shifts.
//!
//! The event fires when `|x|` is strictly greater than the threshold. Over a
//! uniform `p`-bit word this fires with probability exactly `|x| / 2^E`
//! whenever `|x| * 2^(p - E)` is an integer, and zero never fires.

use crate::error::{Error, Result};
use crate::lfsr::{LfsrState, WORD_BITS};
use crate::numeric::{exponent_ceil, pow2, Binary16Value};

/// `M` Bernoulli events packed LSB-first into 64-bit limbs, plus a sign bit.
/// Event `k` (1-based) lives at bit `k - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StochasticSequence {
    bits: Vec<u64>,
    sign: u8,
    seq_len: usize,
}

impl StochasticSequence {
    /// Build from packed limbs. Bits at or beyond `seq_len` must be zero.
    pub fn from_limbs(bits: Vec<u64>, sign: u8, seq_len: usize) -> Result<Self> {
        if seq_len == 0 {
            return Err(Error::Contract("sequence length must be at least 1".into()));
        }
        if bits.len() != limbs_for(seq_len) {
            return Err(Error::Contract(format!(
                "{} limbs cannot hold a {seq_len}-bit sequence",
                bits.len()
            )));
        }
        let tail = seq_len % 64;
        if tail != 0 && bits[bits.len() - 1] >> tail != 0 {
            return Err(Error::Contract("bits set beyond sequence length".into()));
        }
        Ok(Self { bits, sign: sign & 1, seq_len })
    }

    /// Convenience constructor for sequences of at most 64 events.
    pub fn from_word(bits: u64, sign: u8, seq_len: usize) -> Result<Self> {
        if seq_len > 64 {
            return Err(Error::Contract("from_word supports at most 64 events".into()));
        }
        Self::from_limbs(vec![bits], sign, seq_len)
    }

    pub fn limbs(&self) -> &[u64] {
        &self.bits
    }

    pub fn sign(&self) -> u8 {
        self.sign
    }

    pub fn seq_len(&self) -> usize {
        self.seq_len
    }

    pub fn popcount(&self) -> u32 {
        self.bits.iter().map(|w| w.count_ones()).sum()
    }

    /// Event `k` for `k` in `0..seq_len`.
    pub fn bit(&self, k: usize) -> bool {
        self.bits[k / 64] >> (k % 64) & 1 == 1
    }
}

/// Per-vector normalization exponent: `2^(e-1) < max|v_i| <= 2^e`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VectorExponent {
    pub exponent: i32,
    pub is_zero_vector: bool,
}

pub fn vector_exponent(v: &[Binary16Value]) -> Result<VectorExponent> {
    let mut max = 0.0f64;
    for x in v {
        if !x.is_finite() {
            return Err(Error::Domain(format!("non-finite vector entry {x}")));
        }
        max = max.max(x.to_f64().abs());
    }
    if max == 0.0 {
        return Ok(VectorExponent { exponent: 0, is_zero_vector: true });
    }
    Ok(VectorExponent { exponent: exponent_ceil(max)?, is_zero_vector: false })
}

/// Draw `seq_len` words from `rng` and encode `x` against them.
pub fn encode(x: Binary16Value, exponent: i32, rng: &mut LfsrState, seq_len: usize) -> Result<StochasticSequence> {
    if seq_len == 0 {
        return Err(Error::Contract("sequence length must be at least 1".into()));
    }
    check_operand(x, exponent)?;
    let words = rng.take_words(seq_len);
    Ok(encode_with_words(x, exponent, &words))
}

/// Encode against pre-drawn RNG words; the sequence length is `words.len()`.
/// Operand checks are the caller's responsibility.
pub fn encode_with_words(x: Binary16Value, exponent: i32, words: &[u16]) -> StochasticSequence {
    let mut bits = vec![0u64; limbs_for(words.len())];
    fill_events(x, exponent, words, &mut bits);
    StochasticSequence { bits, sign: x.sign_bit(), seq_len: words.len() }
}

/// Write the event bits for `x` into `out`, which must be zeroed and hold
/// `limbs_for(words.len())` limbs.
pub(crate) fn fill_events(x: Binary16Value, exponent: i32, words: &[u16], out: &mut [u64]) {
    if x.is_zero() {
        return;
    }
    let (sig, sig_exp) = x.significand_exponent();
    for (k, &w) in words.iter().enumerate() {
        if exceeds_threshold(sig, sig_exp, exponent, w as u32, WORD_BITS) {
            out[k / 64] |= 1 << (k % 64);
        }
    }
}

/// `sig * 2^sig_exp > word * 2^(exponent - word_bits)`, decided with shifts
/// and an integer compare.
pub fn exceeds_threshold(sig: u32, sig_exp: i32, exponent: i32, word: u32, word_bits: u32) -> bool {
    let offset = sig_exp as i64 - (exponent as i64 - word_bits as i64);
    let (lhs, rhs) = (sig as u128, word as u128);
    if offset >= 0 {
        if offset >= 64 {
            return sig != 0;
        }
        (lhs << offset) > rhs
    } else {
        let shift = -offset;
        if shift >= 64 {
            return word == 0 && sig != 0;
        }
        lhs > (rhs << shift)
    }
}

/// Exact Bernoulli parameter `|x| / 2^E` of an encoding.
pub fn probability_of(x: Binary16Value, exponent: i32) -> Result<f64> {
    check_operand(x, exponent)?;
    Ok(x.to_f64().abs() * pow2(-exponent))
}

fn check_operand(x: Binary16Value, exponent: i32) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("cannot encode non-finite value {x}")));
    }
    let mag = x.to_f64().abs();
    if mag > pow2(exponent) {
        return Err(Error::OutOfRange { value: x.to_f64(), exponent });
    }
    Ok(())
}

pub(crate) fn limbs_for(seq_len: usize) -> usize {
    seq_len.div_ceil(64)
}
