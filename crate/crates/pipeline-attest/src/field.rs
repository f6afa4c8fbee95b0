//! Prime-field arithmetic and deterministic fixed-point encoding.
//!
//! Every committed computation in this crate runs over the prime field
//! F_p with p = 2^64 - 2^32 + 1. Real-valued quantities travel as
//! [`FixedPoint`] numbers: a field element read through its centered
//! lift `s` in `(-p/2, p/2]`, denoting the real number `s / 2^16`.
//!
//! Determinism is the point. Encoding rounds half-to-even once; every
//! rescale after that floors toward negative infinity on the centered
//! lift, so identical inputs produce bit-identical results on any
//! platform. Floats appear only at the encode/decode boundary.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// The field modulus, 2^64 - 2^32 + 1.
pub const MODULUS: u64 = 0xffff_ffff_0000_0001;

/// Fractional bits in the fixed-point encoding.
pub const SCALE_BITS: u32 = 16;

/// Fixed-point scale factor, 2^16.
pub const SCALE: i128 = 1 << SCALE_BITS;

/// Largest magnitude of a centered lift, (p - 1) / 2.
pub const MAX_CENTERED: i128 = ((MODULUS - 1) / 2) as i128;

/// Pipeline inputs must satisfy |s| <= 2^40, i.e. |x| <= 2^24.
const INPUT_GUARD: i128 = 1 << 40;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("value outside the representable fixed-point input range")]
    OutOfRange,
    #[error("fixed-point overflow")]
    Overflow,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid field element encoding")]
    InvalidEncoding,
}

/// An element of F_p, always held reduced to `[0, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FieldElement(u64);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    pub fn new(value: u64) -> Self {
        FieldElement(value % MODULUS)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn from_u128(value: u128) -> Self {
        FieldElement((value % MODULUS as u128) as u64)
    }

    /// Centered lift: the unique integer s in (-p/2, p/2] congruent to
    /// this element mod p.
    pub fn centered(self) -> i128 {
        if self.0 as i128 <= MAX_CENTERED {
            self.0 as i128
        } else {
            self.0 as i128 - MODULUS as i128
        }
    }

    /// Inverse of [`centered`](Self::centered); `s` must lie within
    /// `(-p/2, p/2]` but any i128 is reduced correctly.
    pub fn from_centered(s: i128) -> Self {
        FieldElement(s.rem_euclid(MODULUS as i128) as u64)
    }

    pub fn pow(self, mut exp: u64) -> Self {
        let mut base = self;
        let mut acc = FieldElement::ONE;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via Fermat's little theorem.
    pub fn inv(self) -> Result<Self, FieldError> {
        if self.0 == 0 {
            return Err(FieldError::ZeroInverse);
        }
        Ok(self.pow(MODULUS - 2))
    }

    pub fn to_le_bytes(self) -> [u8; 8] {
        self.0.to_le_bytes()
    }

    /// Parses 8 little-endian bytes; rejects non-canonical values >= p.
    pub fn from_le_bytes(bytes: [u8; 8]) -> Result<Self, FieldError> {
        let v = u64::from_le_bytes(bytes);
        if v >= MODULUS {
            return Err(FieldError::InvalidEncoding);
        }
        Ok(FieldElement(v))
    }
}

impl std::ops::Add for FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: FieldElement) -> FieldElement {
        FieldElement(((self.0 as u128 + rhs.0 as u128) % MODULUS as u128) as u64)
    }
}

impl std::ops::Sub for FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: FieldElement) -> FieldElement {
        if self.0 >= rhs.0 {
            FieldElement(self.0 - rhs.0)
        } else {
            FieldElement(MODULUS - (rhs.0 - self.0))
        }
    }
}

impl std::ops::Mul for FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: FieldElement) -> FieldElement {
        FieldElement(((self.0 as u128 * rhs.0 as u128) % MODULUS as u128) as u64)
    }
}

impl std::ops::Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement::ZERO - self
    }
}

impl std::ops::AddAssign for FieldElement {
    fn add_assign(&mut self, rhs: FieldElement) {
        *self = *self + rhs;
    }
}

impl std::fmt::Display for FieldElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A real number carried as a scaled field element: value = centered(raw) / 2^16.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct FixedPoint(FieldElement);

impl FixedPoint {
    pub const ZERO: FixedPoint = FixedPoint(FieldElement(0));

    pub fn one() -> Self {
        FixedPoint::from_scaled_unchecked(SCALE as i64)
    }

    /// Encodes a real number. Rounds half-to-even at scale 2^16; this is
    /// the only rounding mode besides floor used anywhere in the crate.
    /// Requires |x| < 2^24.
    pub fn encode(x: f64) -> Result<Self, FieldError> {
        if !(x.abs() < (1u64 << 24) as f64) {
            // catches NaN and infinities too
            return Err(FieldError::OutOfRange);
        }
        let s = (x * SCALE as f64).round_ties_even() as i128;
        Ok(FixedPoint(FieldElement::from_centered(s)))
    }

    pub fn decode(self) -> f64 {
        self.0.centered() as f64 / SCALE as f64
    }

    /// Constructs from a scaled integer (the centered lift). Enforces the
    /// pipeline input guard |s| <= 2^40.
    pub fn from_scaled(s: i64) -> Result<Self, FieldError> {
        if (s as i128).abs() > INPUT_GUARD {
            return Err(FieldError::OutOfRange);
        }
        Ok(FixedPoint(FieldElement::from_centered(s as i128)))
    }

    /// Unchecked scaled constructor for values produced by in-field
    /// arithmetic (already range-sound).
    pub(crate) fn from_scaled_unchecked(s: i64) -> Self {
        FixedPoint(FieldElement::from_centered(s as i128))
    }

    pub fn from_raw(raw: FieldElement) -> Self {
        FixedPoint(raw)
    }

    pub fn raw(self) -> FieldElement {
        self.0
    }

    /// The scaled integer representation (centered lift).
    pub fn scaled(self) -> i128 {
        self.0.centered()
    }

    pub fn add(self, rhs: FixedPoint) -> FixedPoint {
        FixedPoint(self.0 + rhs.0)
    }

    pub fn sub(self, rhs: FixedPoint) -> FixedPoint {
        FixedPoint(self.0 - rhs.0)
    }

    pub fn neg(self) -> FixedPoint {
        FixedPoint(-self.0)
    }

    /// Fixed-point product: floor((s_a * s_b) / 2^16) on centered lifts,
    /// flooring toward negative infinity.
    pub fn mul_rescale(self, rhs: FixedPoint) -> Result<FixedPoint, FieldError> {
        let prod = self.scaled() * rhs.scaled();
        rescale_wide(prod)
    }

    /// Clamps the centered lift to [-bound * 2^16, bound * 2^16].
    /// `bound` must be positive.
    pub fn saturate(self, bound: f64) -> FixedPoint {
        assert!(bound > 0.0, "saturation bound must be positive");
        let limit = (bound * SCALE as f64).round_ties_even() as i128;
        let s = self.scaled().clamp(-limit, limit);
        FixedPoint(FieldElement::from_centered(s))
    }
}

impl Serialize for FixedPoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let s = self.scaled();
        serializer.serialize_i64(s as i64)
    }
}

impl<'de> Deserialize<'de> for FixedPoint {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = i64::deserialize(deserializer)?;
        FixedPoint::from_scaled(s).map_err(serde::de::Error::custom)
    }
}

/// Rescales a scale-2^32 accumulator down to scale 2^16 (floor toward
/// negative infinity), checking the result stays within the centered range.
pub(crate) fn rescale_wide(acc: i128) -> Result<FixedPoint, FieldError> {
    let s = acc.div_euclid(SCALE);
    if s.unsigned_abs() > MAX_CENTERED as u128 {
        return Err(FieldError::Overflow);
    }
    Ok(FixedPoint(FieldElement::from_centered(s)))
}

/// Fixed-point dot product: raw products are accumulated exactly at scale
/// 2^32 and rescaled once at the end. The accumulation is therefore a plain
/// field inner product of the raw representations, which is what lets the
/// sum-check matrix verifier certify it.
pub fn dot(a: &[FixedPoint], b: &[FixedPoint]) -> Result<FixedPoint, FieldError> {
    if a.len() != b.len() {
        return Err(FieldError::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let mut acc: i128 = 0;
    for (x, y) in a.iter().zip(b.iter()) {
        let term = x.scaled() * y.scaled();
        acc = acc.checked_add(term).ok_or(FieldError::Overflow)?;
    }
    if acc.unsigned_abs() > MAX_CENTERED as u128 {
        return Err(FieldError::Overflow);
    }
    rescale_wide(acc)
}

/// Raw (scale 2^32) dot-product accumulator as a field element. Equals the
/// field inner product of the raw vectors whenever the exact integer sum
/// stays within the centered range; errors otherwise.
pub fn dot_raw(a: &[FixedPoint], b: &[FixedPoint]) -> Result<FieldElement, FieldError> {
    if a.len() != b.len() {
        return Err(FieldError::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let mut acc: i128 = 0;
    for (x, y) in a.iter().zip(b.iter()) {
        let term = x.scaled() * y.scaled();
        acc = acc.checked_add(term).ok_or(FieldError::Overflow)?;
    }
    if acc.unsigned_abs() > MAX_CENTERED as u128 {
        return Err(FieldError::Overflow);
    }
    Ok(FieldElement::from_centered(acc))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fe(v: u64) -> FieldElement {
        FieldElement::new(v)
    }

    #[test]
    fn add_basic_and_wraparound() {
        assert_eq!(fe(2) + fe(3), fe(5));
        assert_eq!(fe(MODULUS - 1) + fe(1), fe(0));
    }

    #[test]
    fn mul_identity_zero_and_wide() {
        let x = fe(0xdead_beef_cafe);
        assert_eq!(FieldElement::ONE * x, x);
        assert_eq!(FieldElement::ZERO * x, FieldElement::ZERO);
        // 2^32 * 2^32 = 2^64 = p + 2^32 - 1, so the product reduces to 2^32 - 1.
        let t = fe(1 << 32);
        assert_eq!(t * t, fe((1 << 32) - 1));
    }

    #[test]
    fn inv_forced_values() {
        assert_eq!(fe(1).inv().unwrap(), fe(1));
        // 2 * (p+1)/2 = p + 1 = 1 mod p.
        assert_eq!(fe(2).inv().unwrap(), fe((MODULUS + 1) / 2));
        assert_eq!(fe(0).inv(), Err(FieldError::ZeroInverse));
    }

    #[test]
    fn inv_random_verified_by_multiplication() {
        let mut v: u64 = 0x1234_5678_9abc_def0;
        for _ in 0..200 {
            v = v.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = fe(v);
            if a == FieldElement::ZERO {
                continue;
            }
            assert_eq!(a * a.inv().unwrap(), FieldElement::ONE);
        }
    }

    #[test]
    fn ops_match_wide_integer_oracle() {
        // Oracle: plain 128-bit integer arithmetic reduced mod p.
        let mut v: u64 = 42;
        let mut next = || {
            v = v.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            v % MODULUS
        };
        for _ in 0..5000 {
            let (a, b) = (next(), next());
            let sum = ((a as u128 + b as u128) % MODULUS as u128) as u64;
            let prod = ((a as u128 * b as u128) % MODULUS as u128) as u64;
            assert_eq!((fe(a) + fe(b)).value(), sum);
            assert_eq!((fe(a) * fe(b)).value(), prod);
            let diff = ((a as i128 - b as i128).rem_euclid(MODULUS as i128)) as u64;
            assert_eq!((fe(a) - fe(b)).value(), diff);
        }
    }

    #[test]
    fn encode_examples() {
        assert_eq!(FixedPoint::encode(1.5).unwrap().scaled(), 98304);
        let neg = FixedPoint::encode(-1.0).unwrap();
        assert_eq!(neg.scaled(), -65536);
        assert_eq!(neg.raw().value(), MODULUS - 65536);
        // round_half_even(6553.6) = 6554
        assert_eq!(FixedPoint::encode(0.1).unwrap().scaled(), 6554);
        assert!(FixedPoint::encode(2.0_f64.powi(24)).is_err());
        assert!(FixedPoint::encode(f64::NAN).is_err());
    }

    #[test]
    fn encode_decode_roundtrip() {
        for &x in &[0.0, 1.0, -1.0, 0.5, -0.25, 123.456, -9999.875] {
            let v = FixedPoint::encode(x).unwrap();
            let back = FixedPoint::encode(v.decode()).unwrap();
            assert_eq!(v, back);
        }
    }

    #[test]
    fn mul_rescale_examples() {
        let a = FixedPoint::encode(1.5).unwrap();
        let b = FixedPoint::encode(2.0).unwrap();
        assert_eq!(a.mul_rescale(b).unwrap(), FixedPoint::encode(3.0).unwrap());

        // floor(6554^2 / 65536) = 655
        let tenth = FixedPoint::encode(0.1).unwrap();
        assert_eq!(tenth.mul_rescale(tenth).unwrap().scaled(), 655);

        let x = FixedPoint::encode(-7.25).unwrap();
        assert_eq!(x.mul_rescale(FixedPoint::one()).unwrap(), x);
    }

    #[test]
    fn mul_rescale_floors_toward_negative_infinity() {
        // (-0.1) * 0.1: exact product s = -6554 * 6554 / 65536 = -655.44..,
        // floor gives -656 (not truncation's -655).
        let a = FixedPoint::encode(-0.1).unwrap();
        let b = FixedPoint::encode(0.1).unwrap();
        assert_eq!(a.mul_rescale(b).unwrap().scaled(), -656);
    }

    #[test]
    fn saturate_examples() {
        let clamp = |x: f64| FixedPoint::encode(x).unwrap().saturate(4.0).decode();
        assert_eq!(clamp(5.0), 4.0);
        assert_eq!(clamp(-7.25), -4.0);
        assert_eq!(clamp(3.0), 3.0);
    }

    #[test]
    fn dot_matches_single_rescale_semantics() {
        let w = [FixedPoint::encode(0.5).unwrap(), FixedPoint::encode(-0.25).unwrap()];
        let x = [FixedPoint::encode(2.0).unwrap(), FixedPoint::encode(4.0).unwrap()];
        // 0.5*2 - 0.25*4 = 0 exactly.
        assert_eq!(dot(&w, &x).unwrap(), FixedPoint::ZERO);
        assert!(dot(&w, &x[..1]).is_err());
    }

    #[test]
    fn le_bytes_roundtrip_and_canonical_check() {
        let x = fe(0x0102_0304_0506_0708);
        assert_eq!(FieldElement::from_le_bytes(x.to_le_bytes()).unwrap(), x);
        assert!(FieldElement::from_le_bytes(u64::MAX.to_le_bytes()).is_err());
    }
}
