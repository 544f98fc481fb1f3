//! The stochastic multiplier unit cell.
//!
//! Two sign-magnitude stochastic sequences are ANDed event by event, a counter
//! accumulates the ones, a 1-bit XOR resolves the sign, and shift logic packs
//! `(-1)^sign * count * 2^e` into binary16 by placing the sign bit, normalizing
//! the count into the mantissa, and writing the scale into the exponent field.

use crate::encoder::StochasticSequence;
use crate::error::{Error, Result};
use crate::numeric::{floor_pow2, Binary16Value, PowerOfTwoScale};

/// Largest count the shift logic accepts (12-bit counter).
pub const MAX_COUNT: u32 = 2048;

/// Outcome flag of the shift logic.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShiftStatus {
    Exact,
    /// Result fell below the normal range and was rounded (gradual underflow).
    Underflow,
    /// Result exceeded the finite range and was clamped to the largest finite value.
    Saturated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UnitCellResult {
    pub count: u32,
    pub sign: u8,
    pub value: Binary16Value,
    pub status: ShiftStatus,
}

/// Power-of-two approximation of `2^(exp_x + exp_delta) / M`.
pub fn f_scale(exp_x: i32, exp_delta: i32, seq_len: usize) -> Result<PowerOfTwoScale> {
    if seq_len == 0 {
        return Err(Error::Contract("sequence length must be at least 1".into()));
    }
    let ceil_log2_m = seq_len.next_power_of_two().trailing_zeros() as i32;
    Ok(PowerOfTwoScale::new(exp_x + exp_delta - ceil_log2_m))
}

/// Power-of-two approximation of `lr * 2^(exp_x + exp_delta) / M`.
pub fn f_scale_with_lr(exp_x: i32, exp_delta: i32, seq_len: usize, lr: f64) -> Result<PowerOfTwoScale> {
    if seq_len == 0 {
        return Err(Error::Contract("sequence length must be at least 1".into()));
    }
    if !(lr.is_finite() && lr > 0.0) {
        return Err(Error::Domain(format!("learning rate must be positive and finite, got {lr}")));
    }
    // floor(log2(lr / M)), corrected against exact products 2^c * M.
    let m = seq_len as f64;
    let mut c = floor_pow2(lr / m)?.exponent;
    while PowerOfTwoScale::new(c).value() * m > lr {
        c -= 1;
    }
    while PowerOfTwoScale::new(c + 1).value() * m <= lr {
        c += 1;
    }
    Ok(PowerOfTwoScale::new(c + exp_x + exp_delta))
}

/// AND, count, XOR and shift-pack two sequences of equal length.
pub fn unit_cell_multiply(a: &StochasticSequence, b: &StochasticSequence, scale: PowerOfTwoScale) -> Result<UnitCellResult> {
    if a.seq_len() != b.seq_len() {
        return Err(Error::Contract(format!(
            "sequence lengths differ: {} vs {}",
            a.seq_len(),
            b.seq_len()
        )));
    }
    let count = and_popcount(a.limbs(), b.limbs());
    let sign = a.sign() ^ b.sign();
    let (value, status) = shift_pack(sign, count, scale)?;
    Ok(UnitCellResult { count, sign, value, status })
}

pub(crate) fn and_popcount(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum()
}

/// Pack `(-1)^sign * count * 2^scale` into binary16 by field manipulation.
///
/// A zero count yields `+0` regardless of sign.
pub fn shift_pack(sign: u8, count: u32, scale: PowerOfTwoScale) -> Result<(Binary16Value, ShiftStatus)> {
    if count > MAX_COUNT {
        return Err(Error::Contract(format!("count {count} exceeds counter range {MAX_COUNT}")));
    }
    if count == 0 {
        return Ok((Binary16Value::ZERO, ShiftStatus::Exact));
    }
    let sign = sign & 1;
    let msb = 31 - count.leading_zeros() as i32;
    let unbiased = msb as i64 + scale.exponent as i64;

    if unbiased > 15 {
        let max = Binary16Value::from_fields(sign, 30, 0x3FF);
        return Ok((max, ShiftStatus::Saturated));
    }
    if unbiased >= -14 {
        // Drop the leading one; the remaining bits are the mantissa.
        let mantissa = if msb <= 10 {
            (count << (10 - msb)) & 0x3FF
        } else {
            // msb == 11 only for count == 2048, whose low bits are zero.
            (count >> (msb - 10)) & 0x3FF
        };
        let v = Binary16Value::from_fields(sign, (unbiased + 15) as u8, mantissa as u16);
        return Ok((v, ShiftStatus::Exact));
    }

    // Subnormal target: express the count in units of 2^-24.
    let shift = -(scale.exponent as i64 + 24);
    let (units, exact) = if shift <= 0 {
        ((count as u64) << (-shift) as u32, true)
    } else if shift >= 13 {
        (0, false)
    } else {
        let q = (count >> shift) as u64;
        let rem = count & ((1 << shift) - 1);
        let half = 1 << (shift - 1);
        let up = rem > half || (rem == half && q & 1 == 1);
        (q + up as u64, rem == 0)
    };
    // A carry out of the subnormal range lands exactly on the smallest normal.
    let bits = ((sign as u16) << 15) | units as u16;
    let status = if exact { ShiftStatus::Exact } else { ShiftStatus::Underflow };
    let value = if units == 0 { Binary16Value::ZERO } else { Binary16Value::from_bits(bits) };
    Ok((value, status))
}

/// Width of the ones counter for sequences of length `seq_len`.
pub fn counter_width(seq_len: usize) -> u32 {
    usize::BITS - seq_len.leading_zeros()
}

/// Cycle-level model of the serial datapath: one AND and one counter update
/// per clock, `M` clocks per product.
#[derive(Clone, Debug)]
pub struct SerialUnitCell {
    seq_len: usize,
    counter: u32,
    cycles: usize,
}

impl SerialUnitCell {
    pub fn new(seq_len: usize) -> Self {
        Self { seq_len, counter: 0, cycles: 0 }
    }

    pub fn clock(&mut self, a: bool, b: bool) {
        debug_assert!(self.cycles < self.seq_len);
        self.counter += (a & b) as u32;
        self.cycles += 1;
    }

    pub fn counter(&self) -> u32 {
        self.counter
    }

    pub fn cycles(&self) -> usize {
        self.cycles
    }

    /// Clock both sequences through the cell and shift-pack the result.
    pub fn run(mut self, a: &StochasticSequence, b: &StochasticSequence, scale: PowerOfTwoScale) -> Result<UnitCellResult> {
        if a.seq_len() != self.seq_len || b.seq_len() != self.seq_len {
            return Err(Error::Contract("sequence length does not match cell configuration".into()));
        }
        for k in 0..self.seq_len {
            self.clock(a.bit(k), b.bit(k));
        }
        let sign = a.sign() ^ b.sign();
        let (value, status) = shift_pack(sign, self.counter, scale)?;
        Ok(UnitCellResult { count: self.counter, sign, value, status })
    }
}
