//! IEEE 754 binary16 value semantics and power-of-two utilities.
//!
//! All half-precision arithmetic is modeled in software: operands are decoded
//! exactly into `f64`, combined, and re-encoded with round-to-nearest-even.
//! Subnormals are supported on both sides (gradual underflow), and results
//! above the largest finite magnitude become signed infinity.
//!
//! Power-of-two scaling never goes through a multiplier. A value is split
//! into an integer significand and a binary exponent, the exponent is
//! adjusted, and the pair is packed back into the 16-bit layout.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

const SIGN_MASK: u16 = 0x8000;
const EXP_MASK: u16 = 0x7C00;
const MANT_MASK: u16 = 0x03FF;
const MANT_BITS: u32 = 10;
const EXP_BIAS: i32 = 15;
/// Exponent of the least significant bit of a subnormal (2^-24).
const SUBNORMAL_LSB_EXP: i32 = -24;

/// A binary16 word: 1 sign bit, 5 exponent bits, 10 mantissa bits.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Binary16Value(u16);

/// How a packed result relates to the exact value it was built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PackStatus {
    Exact,
    /// Rounded to nearest-even, including gradual underflow into subnormals.
    Rounded,
    /// Magnitude exceeded the finite range.
    Overflow,
}

impl Binary16Value {
    pub const ZERO: Self = Self(0x0000);
    pub const NEG_ZERO: Self = Self(0x8000);
    pub const ONE: Self = Self(0x3C00);
    pub const MAX: Self = Self(0x7BFF);
    pub const MIN_POSITIVE_SUBNORMAL: Self = Self(0x0001);
    pub const INFINITY: Self = Self(0x7C00);
    pub const NEG_INFINITY: Self = Self(0xFC00);
    pub const NAN: Self = Self(0x7E00);

    pub const fn from_bits(bits: u16) -> Self {
        Self(bits)
    }

    pub const fn to_bits(self) -> u16 {
        self.0
    }

    /// Sign bit (1 for negative, including -0).
    pub const fn sign_bit(self) -> u8 {
        (self.0 >> 15) as u8
    }

    /// Raw 5-bit biased exponent field.
    pub const fn exponent_field(self) -> u8 {
        ((self.0 & EXP_MASK) >> MANT_BITS) as u8
    }

    /// Raw 10-bit mantissa field.
    pub const fn mantissa_field(self) -> u16 {
        self.0 & MANT_MASK
    }

    /// Assemble a word from independently supplied fields. Fields are masked
    /// to their widths.
    pub const fn from_fields(sign: u8, exponent: u8, mantissa: u16) -> Self {
        Self(((sign as u16 & 1) << 15) | ((exponent as u16 & 0x1F) << MANT_BITS) | (mantissa & MANT_MASK))
    }

    pub const fn is_nan(self) -> bool {
        self.0 & EXP_MASK == EXP_MASK && self.0 & MANT_MASK != 0
    }

    pub const fn is_infinite(self) -> bool {
        self.0 & !SIGN_MASK == EXP_MASK
    }

    pub const fn is_finite(self) -> bool {
        self.0 & EXP_MASK != EXP_MASK
    }

    pub const fn is_zero(self) -> bool {
        self.0 & !SIGN_MASK == 0
    }

    pub const fn is_sign_negative(self) -> bool {
        self.0 & SIGN_MASK != 0
    }

    pub const fn abs(self) -> Self {
        Self(self.0 & !SIGN_MASK)
    }

    /// Round-to-nearest-even encoding of an arbitrary real.
    pub fn from_f64(value: f64) -> Self {
        quantize_to_binary16(value)
    }

    pub fn from_f32(value: f32) -> Self {
        quantize_to_binary16(value as f64)
    }

    /// Exact decoding; every binary16 value is representable in `f64`.
    pub fn to_f64(self) -> f64 {
        if self.is_nan() {
            return if self.is_sign_negative() { -f64::NAN } else { f64::NAN };
        }
        if self.is_infinite() {
            return if self.is_sign_negative() { f64::NEG_INFINITY } else { f64::INFINITY };
        }
        let (significand, exponent) = self.significand_exponent();
        let magnitude = significand as f64 * pow2(exponent);
        if self.is_sign_negative() {
            -magnitude
        } else {
            magnitude
        }
    }

    pub fn to_f32(self) -> f32 {
        self.to_f64() as f32
    }

    /// Magnitude as `significand * 2^exponent` with an integer significand of
    /// at most 11 bits. Only meaningful for finite values.
    pub fn significand_exponent(self) -> (u32, i32) {
        let exp_field = self.exponent_field() as i32;
        let mant = self.mantissa_field() as u32;
        if exp_field == 0 {
            (mant, SUBNORMAL_LSB_EXP)
        } else {
            (mant | (1 << MANT_BITS), exp_field - EXP_BIAS - MANT_BITS as i32)
        }
    }

    /// Sign-magnitude ordering on finite values; `None` if either is NaN.
    pub fn partial_cmp_value(self, other: Self) -> Option<Ordering> {
        self.to_f64().partial_cmp(&other.to_f64())
    }
}

impl fmt::Debug for Binary16Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Binary16Value({} = {:#06x})", self.to_f64(), self.0)
    }
}

impl fmt::Display for Binary16Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_f64(), f)
    }
}

impl From<Binary16Value> for f64 {
    fn from(v: Binary16Value) -> f64 {
        v.to_f64()
    }
}

impl Neg for Binary16Value {
    type Output = Self;
    fn neg(self) -> Self {
        Self(self.0 ^ SIGN_MASK)
    }
}

// Sums and products of two binary16 operands are exact in f64, so a single
// re-encode yields the correctly rounded half-precision result.
impl Add for Binary16Value {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        quantize_to_binary16(self.to_f64() + rhs.to_f64())
    }
}

impl Sub for Binary16Value {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        quantize_to_binary16(self.to_f64() - rhs.to_f64())
    }
}

impl Mul for Binary16Value {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        quantize_to_binary16(self.to_f64() * rhs.to_f64())
    }
}

/// The value `2^exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PowerOfTwoScale {
    pub exponent: i32,
}

impl PowerOfTwoScale {
    pub const fn new(exponent: i32) -> Self {
        Self { exponent }
    }

    pub fn value(self) -> f64 {
        pow2(self.exponent)
    }

    /// Scale a binary16 value by `2^exponent` through exponent arithmetic.
    /// Underflow is gradual; overflow yields signed infinity.
    pub fn multiply(self, v: Binary16Value) -> Binary16Value {
        if !v.is_finite() || v.is_zero() {
            return v;
        }
        let (significand, exponent) = v.significand_exponent();
        pack(v.sign_bit(), significand as u64, exponent.saturating_add(self.exponent)).0
    }

    /// Combine two scales (multiplication of the represented values).
    pub fn compose(self, other: Self) -> Self {
        Self::new(self.exponent + other.exponent)
    }
}

/// Smallest integer `e` with `v <= 2^e`.
pub fn exponent_ceil(v: f64) -> Result<i32> {
    let (floor, exact) = log2_floor_exact(v)?;
    Ok(if exact { floor } else { floor + 1 })
}

/// Largest power of two not exceeding `v`.
pub fn floor_pow2(v: f64) -> Result<PowerOfTwoScale> {
    let (floor, _) = log2_floor_exact(v)?;
    Ok(PowerOfTwoScale::new(floor))
}

/// Round-to-nearest-even binary16 encoding. NaN maps to a quiet NaN with the
/// input's sign; `-0.0` stays negative zero.
pub fn quantize_to_binary16(v: f64) -> Binary16Value {
    let bits = v.to_bits();
    let sign = (bits >> 63) as u8;
    if v.is_nan() {
        return Binary16Value(Binary16Value::NAN.0 | ((sign as u16) << 15));
    }
    if v.is_infinite() {
        return Binary16Value(EXP_MASK | ((sign as u16) << 15));
    }
    let exp_field = ((bits >> 52) & 0x7FF) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    let (mag, exp) = if exp_field == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp_field - 1075)
    };
    pack(sign, mag, exp).0
}

/// Pack `(-1)^sign * magnitude * 2^exponent` into binary16 with
/// round-to-nearest-even and gradual underflow. Overflow produces infinity.
pub fn pack(sign: u8, magnitude: u64, exponent: i32) -> (Binary16Value, PackStatus) {
    let sign_bits = ((sign as u16) & 1) << 15;
    if magnitude == 0 {
        return (Binary16Value(sign_bits), PackStatus::Exact);
    }
    let msb = 63 - magnitude.leading_zeros() as i32;
    let unbiased = msb.saturating_add(exponent);
    if unbiased > EXP_BIAS {
        return (Binary16Value(sign_bits | EXP_MASK), PackStatus::Overflow);
    }

    let (word, exact) = if unbiased >= 1 - EXP_BIAS {
        // Normal: keep 11 significant bits, implicit one at bit 10.
        let (sig, exact) = shift_right_rne(magnitude, msb - MANT_BITS as i32);
        let biased = (unbiased + EXP_BIAS) as u64;
        // A rounding carry to 2^11 propagates into the exponent field.
        (((biased - 1) << MANT_BITS) + sig, exact)
    } else {
        // Subnormal: count units of 2^-24.
        shift_right_rne(magnitude, SUBNORMAL_LSB_EXP - exponent)
    };

    if word >= EXP_MASK as u64 {
        return (Binary16Value(sign_bits | EXP_MASK), PackStatus::Overflow);
    }
    let status = if exact { PackStatus::Exact } else { PackStatus::Rounded };
    (Binary16Value(sign_bits | word as u16), status)
}

/// `value * 2^-shift` rounded to nearest-even. Negative shifts are exact
/// left shifts. Returns the rounded integer and whether it was exact.
fn shift_right_rne(value: u64, shift: i32) -> (u64, bool) {
    if shift <= 0 {
        return (value << (-shift) as u32, true);
    }
    if shift >= 66 {
        return (0, value == 0);
    }
    let wide = value as u128;
    let q = wide >> shift;
    let rem = wide & ((1u128 << shift) - 1);
    let half = 1u128 << (shift - 1);
    let rounded = if rem > half || (rem == half && q & 1 == 1) { q + 1 } else { q };
    (rounded as u64, rem == 0)
}

/// `2^e` constructed directly from its IEEE bit pattern.
pub(crate) fn pow2(e: i32) -> f64 {
    if e > 1023 {
        f64::INFINITY
    } else if e >= -1022 {
        f64::from_bits(((e + 1023) as u64) << 52)
    } else if e >= -1074 {
        f64::from_bits(1u64 << (e + 1074))
    } else {
        0.0
    }
}

/// `(floor(log2 v), v is an exact power of two)` for positive finite `v`.
fn log2_floor_exact(v: f64) -> Result<(i32, bool)> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::Domain(format!("expected a positive finite value, got {v}")));
    }
    let bits = v.to_bits();
    let exp_field = ((bits >> 52) & 0x7FF) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    if exp_field == 0 {
        let msb = 63 - frac.leading_zeros() as i32;
        Ok((msb - 1074, frac.is_power_of_two()))
    } else {
        Ok((exp_field - 1023, frac == 0))
    }
}
