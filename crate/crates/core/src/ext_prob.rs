//! Nonnegative reals with a 128-bit mantissa and a separate 64-bit binary
//! exponent.
//!
//! Boosted failure probabilities behave like `d0^(2^N)` and leave the range
//! of `f64` after a few dozen squarings. [`ExtProb`] keeps the value as
//! `mantissa * 2^exp2` with the mantissa normalized into `[0.5, 1)`, so a
//! squaring only doubles the exponent and rounds the mantissa once.
//!
//! The mantissa is stored as a `u128` with its top bit set, which gives 128
//! significant bits. Dyadic rationals such as `1 - k / 2^n` (n < 128) are
//! represented exactly, and each multiplication contributes at most
//! `2^-128` relative rounding error.
//!
//! The type is also used for bound terms, which may exceed 1 (for example a
//! vacuous `2^34`). Use [`ExtProb::is_probability`] where the `[0, 1]`
//! range matters.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

const TOP: u128 = 1 << 127;
const LN_2_HI: f64 = 6.931_471_803_691_238e-1;
const LN_2_LO: f64 = 1.908_214_929_270_587_7e-10;

/// `mantissa * 2^exp2` with `mantissa` in `[0.5, 1)`, or exactly zero.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "ExtProbRepr", try_from = "ExtProbRepr")]
pub struct ExtProb {
    // value = mant / 2^128 * 2^exp2; mant == 0 iff the value is zero
    mant: u128,
    exp2: i64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExtProbError {
    #[error("value {0} is negative or not finite")]
    NotRepresentable(f64),
    #[error("malformed mantissa bits {0:?}")]
    BadBits(String),
    #[error("mantissa bits {0:#x} are not normalized")]
    Unnormalized(u128),
}

impl ExtProb {
    pub const ZERO: ExtProb = ExtProb { mant: 0, exp2: 0 };
    pub const ONE: ExtProb = ExtProb { mant: TOP, exp2: 1 };

    fn normalized(mant: u128, exp2: i64) -> Self {
        if mant == 0 {
            return Self::ZERO;
        }
        let lz = mant.leading_zeros();
        ExtProb {
            mant: mant << lz,
            exp2: exp2 - i64::from(lz),
        }
    }

    /// Exact conversion of a finite nonnegative `f64`.
    pub fn from_f64(x: f64) -> Result<Self, ExtProbError> {
        if !x.is_finite() || x < 0.0 {
            return Err(ExtProbError::NotRepresentable(x));
        }
        if x == 0.0 {
            return Ok(Self::ZERO);
        }
        let bits = x.to_bits();
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (int_mant, e) = if biased == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        // x = int_mant * 2^e = (int_mant / 2^128) * 2^(e + 128)
        Ok(Self::normalized(u128::from(int_mant), e + 128))
    }

    /// Exact conversion of an integer.
    pub fn from_u128(x: u128) -> Self {
        Self::normalized(x, 128)
    }

    /// Exact `2^e`.
    pub fn pow2(e: i64) -> Self {
        ExtProb {
            mant: TOP,
            exp2: e + 1,
        }
    }

    /// `e^ln_value`, accurate to roughly `f64` precision in the mantissa.
    pub fn from_ln(ln_value: f64) -> Self {
        if ln_value == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let k = (ln_value / std::f64::consts::LN_2).floor();
        let r = (ln_value - k * LN_2_HI) - k * LN_2_LO;
        let m = r.exp();
        let base = Self::from_f64(m).expect("exp of a finite value is finite");
        base.scale_pow2(k as i64)
    }

    /// Multiply by `2^e` exactly.
    pub fn scale_pow2(self, e: i64) -> Self {
        if self.is_zero() {
            self
        } else {
            ExtProb {
                mant: self.mant,
                exp2: self.exp2 + e,
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mant == 0
    }

    /// True when the value lies in `[0, 1]`.
    pub fn is_probability(&self) -> bool {
        *self <= Self::ONE
    }

    /// Mantissa and exponent with `value = mantissa * 2^exp2`, the mantissa
    /// rounded to `f64` and kept inside `[0.5, 1)`.
    pub fn to_parts(&self) -> (f64, i64) {
        if self.is_zero() {
            return (0.0, 0);
        }
        let m = (self.mant >> 64) as u64 as f64 / 18_446_744_073_709_551_616.0;
        if m >= 1.0 {
            (0.5, self.exp2 + 1)
        } else {
            (m, self.exp2)
        }
    }

    pub fn mantissa_bits(&self) -> u128 {
        self.mant
    }

    pub fn exp2(&self) -> i64 {
        self.exp2
    }

    /// Rebuild from [`mantissa_bits`](Self::mantissa_bits) and
    /// [`exp2`](Self::exp2); lossless inverse of those accessors.
    pub fn from_bits(mant: u128, exp2: i64) -> Result<Self, ExtProbError> {
        if mant == 0 {
            Ok(Self::ZERO)
        } else if mant & TOP == 0 {
            Err(ExtProbError::Unnormalized(mant))
        } else {
            Ok(ExtProb { mant, exp2 })
        }
    }

    /// Nearest `f64`; underflows to 0 and overflows to infinity.
    pub fn to_f64(&self) -> f64 {
        let (m, e) = self.to_parts();
        ldexp(m, e)
    }

    pub fn log2(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        let (m, e) = self.to_parts();
        m.log2() + e as f64
    }

    pub fn ln(&self) -> f64 {
        self.log2() * std::f64::consts::LN_2
    }

    pub fn log10(&self) -> f64 {
        self.log2() * std::f64::consts::LOG10_2
    }

    pub fn mul(self, other: ExtProb) -> ExtProb {
        if self.is_zero() || other.is_zero() {
            return Self::ZERO;
        }
        let (hi, lo) = mul_wide(self.mant, other.mant);
        let mut exp2 = self.exp2 + other.exp2;
        // product of two values in [2^127, 2^128) is in [2^254, 2^256)
        let (mut mant, round) = if hi & TOP != 0 {
            (hi, lo & TOP != 0)
        } else {
            exp2 -= 1;
            ((hi << 1) | (lo >> 127), lo & (1 << 126) != 0)
        };
        if round {
            match mant.checked_add(1) {
                Some(m) => mant = m,
                None => {
                    mant = TOP;
                    exp2 += 1;
                }
            }
        }
        ExtProb { mant, exp2 }
    }

    pub fn square(self) -> ExtProb {
        self.mul(self)
    }

    /// `self^(2^k)` by `k` successive squarings.
    pub fn pow_two_pow(self, k: u32) -> ExtProb {
        (0..k).fold(self, |acc, _| acc.square())
    }

    pub fn add(self, other: ExtProb) -> ExtProb {
        let (big, small) = if self >= other {
            (self, other)
        } else {
            (other, self)
        };
        if small.is_zero() {
            return big;
        }
        let (bh, bl) = shr_wide(small.mant, big.exp2 - small.exp2);
        let (hi, overflow) = big.mant.overflowing_add(bh);
        if overflow {
            // carried into bit 256: shift everything right by one
            let lo = (bl >> 1) | ((hi & 1) << 127);
            round_wide((hi >> 1) | TOP, lo, big.exp2 + 1)
        } else {
            round_wide(hi, bl, big.exp2)
        }
    }

    /// `self - other`, or `None` when the difference would be negative.
    pub fn checked_sub(self, other: ExtProb) -> Option<ExtProb> {
        match self.cmp(&other) {
            Ordering::Less => None,
            Ordering::Equal => Some(Self::ZERO),
            Ordering::Greater if other.is_zero() => Some(self),
            Ordering::Greater => {
                let (bh, bl) = shr_wide(other.mant, self.exp2 - other.exp2);
                let (lo, borrow) = 0u128.overflowing_sub(bl);
                let hi = self.mant - bh - u128::from(borrow);
                let lz = if hi != 0 {
                    hi.leading_zeros()
                } else {
                    128 + lo.leading_zeros()
                };
                let (hi, lo) = shl_wide(hi, lo, lz);
                Some(round_wide(hi, lo, self.exp2 - i64::from(lz)))
            }
        }
    }

    /// `self - other` clamped below at zero.
    pub fn saturating_sub(self, other: ExtProb) -> ExtProb {
        self.checked_sub(other).unwrap_or(Self::ZERO)
    }

    /// `self + delta` clamped into `[0, 1]`.
    pub fn add_signed_clamped(self, delta: f64) -> ExtProb {
        let d = ExtProb::from_f64(delta.abs()).unwrap_or(Self::ZERO);
        let raw = if delta >= 0.0 {
            self.add(d)
        } else {
            self.saturating_sub(d)
        };
        raw.min(Self::ONE)
    }

    /// `1 - self`, clamped at zero.
    pub fn complement(self) -> ExtProb {
        Self::ONE.saturating_sub(self)
    }

    /// Scientific notation with `digits` significant digits.
    pub fn to_sci_string(&self, digits: usize) -> String {
        if self.is_zero() {
            return format!("{:.*}e0", digits.saturating_sub(1), 0.0);
        }
        let l10 = self.log10();
        let mut e10 = l10.floor();
        let mut m10 = 10f64.powf(l10 - e10);
        // guard against 9.999... rounding up to 10.0 in the printed digits
        let scale = 10f64.powi(digits.saturating_sub(1) as i32);
        if (m10 * scale).round() >= 10.0 * scale {
            m10 /= 10.0;
            e10 += 1.0;
        }
        format!("{:.*}e{}", digits.saturating_sub(1), m10, e10 as i64)
    }

    /// Relative distance `|self - other| / |other|`, evaluated in `f64`
    /// after removing the shared exponent.
    pub fn rel_diff(&self, other: &ExtProb) -> f64 {
        if other.is_zero() {
            return if self.is_zero() { 0.0 } else { f64::INFINITY };
        }
        let diff = match self.checked_sub(*other) {
            Some(d) => d,
            None => other.saturating_sub(*self),
        };
        if diff.is_zero() {
            return 0.0;
        }
        (diff.log2() - other.log2()).exp2()
    }
}

impl PartialOrd for ExtProb {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtProb {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            (false, false) => self
                .exp2
                .cmp(&other.exp2)
                .then(self.mant.cmp(&other.mant)),
        }
    }
}

impl fmt::Display for ExtProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sci_string(f.precision().unwrap_or(12)))
    }
}

impl fmt::Debug for ExtProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (m, e) = self.to_parts();
        write!(f, "ExtProb({} = {m}*2^{e})", self.to_sci_string(12))
    }
}

/// Wire form: rounded mantissa and exponent for readers, hex mantissa bits
/// for lossless reconstruction, and a decimal rendering.
#[derive(Serialize, Deserialize)]
struct ExtProbRepr {
    mantissa: f64,
    exp2: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bits: Option<String>,
    #[serde(default, skip_deserializing)]
    decimal: String,
}

impl From<ExtProb> for ExtProbRepr {
    fn from(p: ExtProb) -> Self {
        let (mantissa, exp2) = p.to_parts();
        ExtProbRepr {
            mantissa,
            exp2,
            bits: Some(format!("{:#034x}:{}", p.mant, p.exp2)),
            decimal: p.to_sci_string(12),
        }
    }
}

impl TryFrom<ExtProbRepr> for ExtProb {
    type Error = ExtProbError;

    fn try_from(r: ExtProbRepr) -> Result<Self, Self::Error> {
        match r.bits {
            Some(bits) => {
                let (m, e) = bits
                    .split_once(':')
                    .ok_or_else(|| ExtProbError::BadBits(bits.clone()))?;
                let m = u128::from_str_radix(m.trim_start_matches("0x"), 16)
                    .map_err(|_| ExtProbError::BadBits(bits.clone()))?;
                let e: i64 = e.parse().map_err(|_| ExtProbError::BadBits(bits.clone()))?;
                ExtProb::from_bits(m, e)
            }
            None => Ok(ExtProb::from_f64(r.mantissa)?.scale_pow2(r.exp2)),
        }
    }
}

/// `(m, 0) >> s` as a 256-bit (high, low) pair; bits beyond 256 are dropped.
fn shr_wide(m: u128, s: i64) -> (u128, u128) {
    match s {
        0 => (m, 0),
        1..=127 => (m >> s, m << (128 - s)),
        128..=255 => (0, m >> (s - 128)),
        _ => (0, 0),
    }
}

fn shl_wide(hi: u128, lo: u128, s: u32) -> (u128, u128) {
    match s {
        0 => (hi, lo),
        1..=127 => ((hi << s) | (lo >> (128 - s)), lo << s),
        128..=255 => (lo << (s - 128), 0),
        _ => (0, 0),
    }
}

/// Round a normalized 256-bit mantissa (top bit of `hi` set) to 128 bits.
fn round_wide(hi: u128, lo: u128, exp2: i64) -> ExtProb {
    if hi == 0 {
        return ExtProb::ZERO;
    }
    debug_assert!(hi & TOP != 0);
    if lo & TOP != 0 {
        match hi.checked_add(1) {
            Some(m) => ExtProb { mant: m, exp2 },
            None => ExtProb {
                mant: TOP,
                exp2: exp2 + 1,
            },
        }
    } else {
        ExtProb { mant: hi, exp2 }
    }
}

/// 128x128 -> 256-bit product as (high, low) halves.
fn mul_wide(a: u128, b: u128) -> (u128, u128) {
    let mask = u128::from(u64::MAX);
    let (a_hi, a_lo) = (a >> 64, a & mask);
    let (b_hi, b_lo) = (b >> 64, b & mask);
    let ll = a_lo * b_lo;
    let lh = a_lo * b_hi;
    let hl = a_hi * b_lo;
    let hh = a_hi * b_hi;
    let mid = (ll >> 64) + (lh & mask) + (hl & mask);
    let lo = (ll & mask) | (mid << 64);
    let hi = hh + (lh >> 64) + (hl >> 64) + (mid >> 64);
    (hi, lo)
}

/// `m * 2^e` without intermediate overflow or premature underflow.
fn ldexp(mut m: f64, mut e: i64) -> f64 {
    const STEP: i64 = 1000;
    while e > STEP {
        m *= 2f64.powi(STEP as i32);
        e -= STEP;
        if m.is_infinite() {
            return m;
        }
    }
    while e < -STEP {
        m *= 2f64.powi(-STEP as i32);
        e += STEP;
        if m == 0.0 {
            return m;
        }
    }
    m * 2f64.powi(e as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_round_trip() {
        for x in [1.0, 0.5, 0.375, 1e-300, 5e-324, 0.999_999_999, 3.0] {
            let p = ExtProb::from_f64(x).unwrap();
            assert_eq!(p.to_f64(), x, "{x}");
        }
        assert!(ExtProb::from_f64(-1.0).is_err());
        assert!(ExtProb::from_f64(f64::NAN).is_err());
    }

    #[test]
    fn parts_are_normalized() {
        let (m, e) = ExtProb::from_f64(0.375).unwrap().to_parts();
        assert_eq!((m, e), (0.75, -1));
        assert_eq!(ExtProb::ONE.to_parts(), (0.5, 1));
        assert_eq!(ExtProb::ZERO.to_parts(), (0.0, 0));
    }

    #[test]
    fn squaring_past_f64_range() {
        let half = ExtProb::from_f64(0.5).unwrap();
        let p = half.pow_two_pow(12);
        assert_eq!(p, ExtProb::pow2(-4096));
        assert_eq!(p.to_f64(), 0.0);
        assert_eq!(p.log2(), -4096.0);
    }

    #[test]
    fn subtraction_is_exact_for_dyadics() {
        let one = ExtProb::ONE;
        let eps = ExtProb::pow2(-100);
        let d = one.checked_sub(eps).unwrap();
        assert_eq!(d.add(eps), one);
        assert!(eps.checked_sub(one).is_none());
        let third = ExtProb::from_f64(1e-3).unwrap();
        let x = one.checked_sub(third).unwrap();
        assert_eq!(x.add(third), one);
    }

    #[test]
    fn ordering_is_by_value() {
        let a = ExtProb::pow2(-3000);
        let b = ExtProb::pow2(-2999);
        assert!(a < b);
        assert!(ExtProb::ZERO < a);
        assert!(ExtProb::pow2(34) > ExtProb::ONE);
        assert!(!ExtProb::pow2(34).is_probability());
    }

    #[test]
    fn from_ln_matches_exp() {
        let p = ExtProb::from_ln(-64.0);
        assert!((p.to_f64() / (-64f64).exp() - 1.0).abs() < 1e-14);
        let big = ExtProb::from_ln(-1e6);
        assert!((big.ln() + 1e6).abs() < 1e-6);
    }

    #[test]
    fn sci_string() {
        let p = ExtProb::from_f64(1.603_810_890_548_6e-28).unwrap();
        assert_eq!(p.to_sci_string(4), "1.604e-28");
        assert_eq!(ExtProb::ONE.to_sci_string(3), "1.00e0");
    }

    #[test]
    fn clamped_signed_add() {
        let x = ExtProb::from_f64(0.9).unwrap();
        assert_eq!(x.add_signed_clamped(0.5), ExtProb::ONE);
        assert_eq!(x.add_signed_clamped(-1.0), ExtProb::ZERO);
    }

    #[test]
    fn serde_is_lossless() {
        let p = ExtProb::from_f64(1.0 / 3.0).unwrap().pow_two_pow(20);
        let json = serde_json::to_string(&p).unwrap();
        let back: ExtProb = serde_json::from_str(&json).unwrap();
        assert_eq!(p, back);
        let legacy: ExtProb = serde_json::from_str(r#"{"mantissa":0.75,"exp2":-1}"#).unwrap();
        assert_eq!(legacy.to_f64(), 0.375);
    }
}
