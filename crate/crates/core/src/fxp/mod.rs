//! Exact signed fixed-point arithmetic with explicit `(R.Q)` format tracking.
//!
//! A [`FixedP`] stores a raw integer together with the number of range bits
//! `R` and fractional bits `Q`; its real value is `val / 2^Q`. Every operation
//! derives the result format from the operand formats so that no intermediate
//! is ever truncated silently:
//!
//! | op        | result format                          |
//! |-----------|----------------------------------------|
//! | `a ± b`   | `(max(Ra, Rb) + 1).(max(Qa, Qb))`      |
//! | `a · b`   | `(Ra + Rb).(Qa + Qb)`                  |
//! | `a / b`   | `(Ra + Qb).(Rb + Qa)`, truncating      |
//!
//! The backing integer is an `i128`; formats wider than [`MAX_BITS`] are
//! rejected instead of wrapping.

mod oct;

use std::cmp::Ordering;
use std::fmt;

pub use oct::{OctDir32, OCT_MAX_ANGLE_ERROR};

/// Largest `R + Q` a value may declare.
pub const MAX_BITS: u32 = 126;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FxpError {
    #[error("raw value {val} does not fit format ({r}.{q})")]
    OutOfRange { val: i128, r: u32, q: u32 },
    #[error("format ({r}.{q}) exceeds the {MAX_BITS}-bit backing integer")]
    Overflow { r: u32, q: u32 },
    #[error("operand is the most negative value of its format")]
    MostNegative,
    #[error("division by zero")]
    DivideByZero,
    #[error("cannot rescale exactly from Q={from} down to Q={to}")]
    Downscale { from: u32, to: u32 },
    #[error("cannot encode a zero-length or non-finite direction")]
    InvalidDirection,
    #[error("non-finite input {0}")]
    NonFinite(f64),
}

pub type Result<T> = std::result::Result<T, FxpError>;

/// Rounding applied when a result has to drop fractional bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounding {
    Floor,
    Ceil,
    TowardZero,
    /// Round half toward +infinity.
    Nearest,
}

/// Signed fixed-point number `val / 2^q` carrying its `(R.Q)` format.
///
/// The raw value is kept in the two's complement range of `R + Q` magnitude
/// bits plus a sign bit, i.e. `-2^(R+Q) <= val < 2^(R+Q)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FixedP {
    val: i128,
    r: u32,
    q: u32,
}

fn check_format(r: u32, q: u32) -> Result<()> {
    if r.checked_add(q).is_none_or(|w| w > MAX_BITS) {
        return Err(FxpError::Overflow { r, q });
    }
    Ok(())
}

/// Number of magnitude bits needed to hold `|v|`.
pub fn magnitude_bits(v: i128) -> u32 {
    128 - v.unsigned_abs().leading_zeros()
}

/// Rounding integer division of `num / den` (den != 0).
pub(crate) fn div_round(num: i128, den: i128, mode: Rounding) -> i128 {
    if let (Ok(n), Ok(d)) = (i64::try_from(num), i64::try_from(den)) {
        return div_round_i64(n, d, mode) as i128;
    }
    let q = num / den;
    let r = num % den;
    if r == 0 {
        return q;
    }
    let positive = (r > 0) == (den > 0);
    match mode {
        Rounding::TowardZero => q,
        Rounding::Floor => {
            if positive {
                q
            } else {
                q - 1
            }
        }
        Rounding::Ceil => {
            if positive {
                q + 1
            } else {
                q
            }
        }
        Rounding::Nearest => {
            // floor(num/den + 1/2) == floor((2 num + den) / (2 den))
            let (n2, d2) = if den > 0 { (2 * num + den, 2 * den) } else { (-2 * num - den, -2 * den) };
            n2.div_euclid(d2)
        }
    }
}

fn div_round_i64(num: i64, den: i64, mode: Rounding) -> i64 {
    let q = num / den;
    let r = num % den;
    if r == 0 {
        return q;
    }
    let positive = (r > 0) == (den > 0);
    match mode {
        Rounding::TowardZero => q,
        Rounding::Floor => q - i64::from(!positive),
        Rounding::Ceil => q + i64::from(positive),
        Rounding::Nearest => {
            let (n, d) = if den > 0 { (num as i128, den as i128) } else { (-(num as i128), -(den as i128)) };
            (2 * n + d).div_euclid(2 * d) as i64
        }
    }
}

impl FixedP {
    pub fn new(val: i128, r: u32, q: u32) -> Result<Self> {
        check_format(r, q)?;
        let lim = 1i128 << (r + q);
        if val < -lim || val >= lim {
            return Err(FxpError::OutOfRange { val, r, q });
        }
        Ok(Self { val, r, q })
    }

    pub fn zero(r: u32, q: u32) -> Result<Self> {
        Self::new(0, r, q)
    }

    /// Integer `v` in format `(r.0)`.
    pub fn from_int(v: i64, r: u32) -> Result<Self> {
        Self::new(v as i128, r, 0)
    }

    /// Converts a float by rounding `x * 2^q` to an integer.
    pub fn from_f64(x: f64, r: u32, q: u32, mode: Rounding) -> Result<Self> {
        if !x.is_finite() {
            return Err(FxpError::NonFinite(x));
        }
        check_format(r, q)?;
        let scaled = x * (q as f64).exp2();
        let raw = match mode {
            Rounding::Floor => scaled.floor(),
            Rounding::Ceil => scaled.ceil(),
            Rounding::TowardZero => scaled.trunc(),
            Rounding::Nearest => (scaled + 0.5).floor(),
        };
        if raw.abs() >= (MAX_BITS as f64).exp2() {
            return Err(FxpError::OutOfRange { val: i128::MAX, r, q });
        }
        Self::new(raw as i128, r, q)
    }

    pub fn val(&self) -> i128 {
        self.val
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn to_f64(&self) -> f64 {
        self.val as f64 / (self.q as f64).exp2()
    }

    pub fn is_zero(&self) -> bool {
        self.val == 0
    }

    pub fn signum(&self) -> i32 {
        self.val.signum() as i32
    }

    /// Magnitude bits actually occupied by the raw value.
    pub fn bits_used(&self) -> u32 {
        magnitude_bits(self.val)
    }

    fn is_most_negative(&self) -> bool {
        self.val == -(1i128 << (self.r + self.q))
    }

    /// Upscales to `new_q` fractional bits. Exact; `R` is unchanged.
    pub fn rescale(&self, new_q: u32) -> Result<Self> {
        if new_q < self.q {
            return Err(FxpError::Downscale { from: self.q, to: new_q });
        }
        check_format(self.r, new_q)?;
        Self::new(self.val << (new_q - self.q), self.r, new_q)
    }

    /// Changes the fractional precision to `new_q`, rounding when bits are
    /// dropped. Upscaling is exact and identical to [`FixedP::rescale`].
    pub fn round_to(&self, new_q: u32, mode: Rounding) -> Result<Self> {
        if new_q >= self.q {
            return self.rescale(new_q);
        }
        let den = 1i128 << (self.q - new_q);
        // Rounding up may carry into one more integer bit.
        Self::new(div_round(self.val, den, mode), self.r + 1, new_q)
    }

    /// Addition or subtraction; the lower-`Q` operand is rescaled first.
    pub fn add_sub(&self, other: &FixedP, subtract: bool) -> Result<Self> {
        let r = self.r.max(other.r) + 1;
        let q = self.q.max(other.q);
        check_format(r, q)?;
        let a = self.val << (q - self.q);
        let b = other.val << (q - other.q);
        let val = if subtract { a - b } else { a + b };
        Self::new(val, r, q)
    }

    pub fn add(&self, other: &FixedP) -> Result<Self> {
        self.add_sub(other, false)
    }

    pub fn sub(&self, other: &FixedP) -> Result<Self> {
        self.add_sub(other, true)
    }

    pub fn neg(&self) -> Result<Self> {
        if self.is_most_negative() {
            return Err(FxpError::MostNegative);
        }
        Self::new(-self.val, self.r, self.q)
    }

    /// Exact product. Operands holding the most negative value of their
    /// format are rejected, since the product would need one more bit.
    pub fn mul(&self, other: &FixedP) -> Result<Self> {
        if self.is_most_negative() || other.is_most_negative() {
            return Err(FxpError::MostNegative);
        }
        let r = self.r + other.r;
        let q = self.q + other.q;
        check_format(r, q)?;
        Self::new(self.val * other.val, r, q)
    }

    /// Quotient with the numerator pre-shifted by `other.Q + other.R` bits and
    /// plain truncating integer division.
    pub fn div(&self, other: &FixedP) -> Result<Self> {
        if other.val == 0 {
            return Err(FxpError::DivideByZero);
        }
        let shift = other.q + other.r;
        let r = self.r + other.q;
        let q = other.r + self.q;
        check_format(r, q)?;
        if self.bits_used() + shift > MAX_BITS {
            return Err(FxpError::Overflow { r: self.r + shift, q: self.q });
        }
        let numerator = self.val << shift;
        Self::new(numerator / other.val, r, q)
    }

    /// Quotient `self / other` rounded to exactly `q_out` fractional bits.
    ///
    /// Unlike [`FixedP::div`] the precision of the result is chosen by the
    /// caller, which keeps the pre-shift small and lets intersection code pick
    /// a rounding direction.
    pub fn div_to(&self, other: &FixedP, q_out: u32, mode: Rounding) -> Result<Self> {
        if other.val == 0 {
            return Err(FxpError::DivideByZero);
        }
        let r = self.r + other.q + 1;
        check_format(r, q_out)?;
        // val = round(a.val / b.val * 2^(q_out + b.q - a.q))
        let shift = q_out as i64 + other.q as i64 - self.q as i64;
        let (num, den) = if shift >= 0 {
            let s = shift as u32;
            if self.bits_used() + s > MAX_BITS {
                return Err(FxpError::Overflow { r: self.r + s, q: self.q });
            }
            (self.val << s, other.val)
        } else {
            let s = (-shift) as u32;
            if other.bits_used() + s > MAX_BITS {
                return Err(FxpError::Overflow { r: other.r + s, q: other.q });
            }
            (self.val, other.val << s)
        };
        Self::new(div_round(num, den, mode), r, q_out)
    }

    /// Exact value comparison across formats.
    pub fn cmp_value(&self, other: &FixedP) -> Ordering {
        let q = self.q.max(other.q);
        let sa = q - self.q;
        let sb = q - other.q;
        // Both shifts stay within i128 because R + Q <= MAX_BITS for each
        // operand, except when the formats are very unbalanced; fall back to
        // a widening comparison in that case.
        if self.bits_used() + sa <= 126 && other.bits_used() + sb <= 126 {
            (self.val << sa).cmp(&(other.val << sb))
        } else {
            let a = self.val as f64 / (self.q as f64).exp2();
            let b = other.val as f64 / (other.q as f64).exp2();
            a.partial_cmp(&b).unwrap_or(Ordering::Equal)
        }
    }
}

impl fmt::Debug for FixedP {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FixedP({}, R={}, Q={})", self.val, self.r, self.q)
    }
}

impl fmt::Display for FixedP {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

/// Three fixed-point components. Each component carries its own format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FxVec3 {
    pub x: FixedP,
    pub y: FixedP,
    pub z: FixedP,
}

impl FxVec3 {
    pub fn new(x: FixedP, y: FixedP, z: FixedP) -> Self {
        Self { x, y, z }
    }

    /// Integer components in a shared `(r.0)` format.
    pub fn from_ints(v: [i64; 3], r: u32) -> Result<Self> {
        Ok(Self::new(FixedP::from_int(v[0], r)?, FixedP::from_int(v[1], r)?, FixedP::from_int(v[2], r)?))
    }

    /// Raw components in a shared `(r.q)` format.
    pub fn from_raw(v: [i128; 3], r: u32, q: u32) -> Result<Self> {
        Ok(Self::new(FixedP::new(v[0], r, q)?, FixedP::new(v[1], r, q)?, FixedP::new(v[2], r, q)?))
    }

    pub fn component(&self, axis: usize) -> &FixedP {
        match axis {
            0 => &self.x,
            1 => &self.y,
            _ => &self.z,
        }
    }

    pub fn components(&self) -> [FixedP; 3] {
        [self.x, self.y, self.z]
    }

    pub fn to_f64(&self) -> [f64; 3] {
        [self.x.to_f64(), self.y.to_f64(), self.z.to_f64()]
    }

    pub fn add(&self, o: &FxVec3) -> Result<Self> {
        Ok(Self::new(self.x.add(&o.x)?, self.y.add(&o.y)?, self.z.add(&o.z)?))
    }

    pub fn sub(&self, o: &FxVec3) -> Result<Self> {
        Ok(Self::new(self.x.sub(&o.x)?, self.y.sub(&o.y)?, self.z.sub(&o.z)?))
    }

    /// Largest bit count used by any component.
    pub fn bits_used(&self) -> u32 {
        self.x.bits_used().max(self.y.bits_used()).max(self.z.bits_used())
    }
}

/// Cross product; for uniform operand formats the result is
/// `(Ra + Rb + 1).(Qa + Qb)`.
pub fn cross3(a: &FxVec3, b: &FxVec3) -> Result<FxVec3> {
    Ok(FxVec3::new(
        a.y.mul(&b.z)?.sub(&a.z.mul(&b.y)?)?,
        a.z.mul(&b.x)?.sub(&a.x.mul(&b.z)?)?,
        a.x.mul(&b.y)?.sub(&a.y.mul(&b.x)?)?,
    ))
}

/// Dot product; for uniform operand formats the result is
/// `(Ra + Rb + 2).(Qa + Qb)`.
pub fn dot3(a: &FxVec3, b: &FxVec3) -> Result<FixedP> {
    a.x.mul(&b.x)?.add(&a.y.mul(&b.y)?)?.add(&a.z.mul(&b.z)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fx(v: i128, r: u32, q: u32) -> FixedP {
        FixedP::new(v, r, q).unwrap()
    }

    #[test]
    fn add_same_q() {
        let s = fx(5, 4, 2).add(&fx(3, 4, 2)).unwrap();
        assert_eq!(s, fx(8, 5, 2));
        assert_eq!(s.to_f64(), 2.0);
    }

    #[test]
    fn add_rescales_lower_q() {
        let s = fx(1, 2, 1).add(&fx(1, 2, 2)).unwrap();
        assert_eq!(s, fx(3, 3, 2));
        // symmetric operand order takes the other branch
        assert_eq!(fx(1, 2, 2).add(&fx(1, 2, 1)).unwrap(), fx(3, 3, 2));
    }

    #[test]
    fn sub_self_is_zero() {
        let x = fx(-77, 9, 3);
        assert_eq!(x.sub(&x).unwrap(), fx(0, 10, 3));
    }

    #[test]
    fn mul_examples() {
        assert_eq!(fx(3, 2, 1).mul(&fx(2, 2, 1)).unwrap(), fx(6, 4, 2));
        assert_eq!(fx(-4, 3, 2).mul(&fx(6, 3, 2)).unwrap(), fx(-24, 6, 4));
        let z = fx(0, 1, 0).mul(&fx(99, 7, 5)).unwrap();
        assert_eq!((z.val(), z.r(), z.q()), (0, 8, 5));
    }

    #[test]
    fn mul_rejects_most_negative() {
        let min = fx(-(1 << 5), 3, 2);
        assert_eq!(min.mul(&fx(1, 3, 2)), Err(FxpError::MostNegative));
        assert_eq!(fx(1, 3, 2).mul(&min), Err(FxpError::MostNegative));
    }

    #[test]
    fn div_examples() {
        assert_eq!(fx(4, 2, 2).div(&fx(8, 2, 2)).unwrap(), fx(8, 4, 4));
        let x = fx(13, 3, 2);
        let one = x.div(&x).unwrap();
        assert_eq!((one.r(), one.q()), (5, 5));
        assert_eq!(one.to_f64(), 1.0);
        let third = fx(1, 4, 0).div(&fx(3, 4, 0)).unwrap();
        assert_eq!(third, fx(5, 4, 4));
        assert_eq!(third.to_f64(), 0.3125);
    }

    #[test]
    fn div_by_zero() {
        assert_eq!(fx(1, 2, 0).div(&fx(0, 2, 0)), Err(FxpError::DivideByZero));
        assert_eq!(fx(1, 2, 0).div_to(&fx(0, 2, 0), 4, Rounding::Floor), Err(FxpError::DivideByZero));
    }

    #[test]
    fn div_to_rounding_directions() {
        // -1 / 3 at Q=2: exact -0.333.., floor -0.5, ceil -0.25, trunc -0.25
        let a = fx(-1, 2, 0);
        let b = fx(3, 2, 0);
        assert_eq!(a.div_to(&b, 2, Rounding::Floor).unwrap().val(), -2);
        assert_eq!(a.div_to(&b, 2, Rounding::Ceil).unwrap().val(), -1);
        assert_eq!(a.div_to(&b, 2, Rounding::TowardZero).unwrap().val(), -1);
        assert_eq!(a.div_to(&b, 2, Rounding::Nearest).unwrap().val(), -1);
        // 5/8 at Q=2 is exactly 2.5 quarters: nearest rounds half up
        assert_eq!(fx(5, 3, 3).div_to(&fx(1, 3, 0), 2, Rounding::Nearest).unwrap().val(), 3);
    }

    #[test]
    fn rescale_examples() {
        assert_eq!(fx(3, 2, 1).rescale(4).unwrap(), fx(24, 2, 4));
        assert_eq!(fx(3, 2, 1).rescale(1).unwrap(), fx(3, 2, 1));
        assert_eq!(fx(-1, 1, 0).rescale(8).unwrap(), fx(-256, 1, 8));
        assert_eq!(fx(3, 2, 4).rescale(1), Err(FxpError::Downscale { from: 4, to: 1 }));
    }

    #[test]
    fn round_to_drops_bits_directionally() {
        let x = fx(-7, 3, 2); // -1.75
        assert_eq!(x.round_to(0, Rounding::Floor).unwrap().val(), -2);
        assert_eq!(x.round_to(0, Rounding::Ceil).unwrap().val(), -1);
    }

    #[test]
    fn format_limits() {
        assert!(matches!(FixedP::new(1, 100, 27), Err(FxpError::Overflow { .. })));
        assert!(matches!(FixedP::new(8, 1, 2), Err(FxpError::OutOfRange { .. })));
        let big = fx(1, 63, 0);
        assert!(matches!(big.mul(&fx(1, 64, 0)), Err(FxpError::Overflow { .. })));
    }

    #[test]
    fn cross_and_dot_basics() {
        let ex = FxVec3::from_ints([1, 0, 0], 2).unwrap();
        let ey = FxVec3::from_ints([0, 1, 0], 2).unwrap();
        let c = cross3(&ex, &ey).unwrap();
        assert_eq!([c.x.val(), c.y.val(), c.z.val()], [0, 0, 1]);
        assert_eq!((c.z.r(), c.z.q()), (5, 0));
        assert!(cross3(&ex, &ex).unwrap().components().iter().all(|v| v.is_zero()));

        let d = dot3(&ex, &ey).unwrap();
        assert!(d.is_zero());
        assert_eq!((d.r(), d.q()), (6, 0));
        let v = FxVec3::from_ints([1, 2, 3], 2).unwrap();
        assert_eq!(dot3(&v, &v).unwrap().val(), 14);
    }

    #[test]
    fn cmp_across_formats() {
        assert_eq!(fx(1, 2, 1).cmp_value(&fx(2, 2, 2)), Ordering::Equal);
        assert_eq!(fx(-1, 2, 0).cmp_value(&fx(-3, 2, 2)), Ordering::Less);
    }
}
