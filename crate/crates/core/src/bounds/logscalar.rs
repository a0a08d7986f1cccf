use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// A real number `mant · 2^exp` with an unbounded exponent.
///
/// Powers like `c^k` with large `c` and `k` overflow `f64` long before
/// their logarithms do, so constants are assembled in this form and only
/// converted back on request. The mantissa keeps full double precision,
/// so arithmetic on small integers stays exact.
#[derive(Clone, Copy, PartialEq)]
pub struct LogScalar {
    /// `1 ≤ |mant| < 2`, or `0` for the exact zero. Non-finite inputs are
    /// carried here unchanged.
    mant: f64,
    exp: i64,
}

/// `2^e` for `e` in the normal range.
fn exp2i(e: i64) -> f64 {
    debug_assert!((-1022..=1023).contains(&e));
    f64::from_bits(((e + 1023) as u64) << 52)
}

/// Exact binary exponent `⌊log₂|x|⌋` of a finite nonzero `x`.
fn ilogb(x: f64) -> i64 {
    let bits = x.abs().to_bits();
    let biased = (bits >> 52) as i64;
    if biased == 0 {
        // subnormal
        let lz = (bits << 12).leading_zeros() as i64;
        -1023 - lz
    } else {
        biased - 1023
    }
}

/// `x · 2^e` for any `e`, saturating to 0 or ±∞.
fn scale(x: f64, e: i64) -> f64 {
    let mut x = x;
    let mut e = e;
    while e > 1023 {
        x *= exp2i(1023);
        e -= 1023;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -1022 {
        x *= exp2i(-1022);
        e += 1022;
        if x == 0.0 {
            return x;
        }
    }
    x * exp2i(e)
}

impl LogScalar {
    pub const ZERO: Self = Self { mant: 0.0, exp: 0 };
    pub const ONE: Self = Self { mant: 1.0, exp: 0 };

    fn normalized(m: f64, e: i64) -> Self {
        if m == 0.0 {
            return Self::ZERO;
        }
        if !m.is_finite() {
            return Self { mant: m, exp: 0 };
        }
        let k = ilogb(m);
        Self {
            mant: scale(m, -k),
            exp: e + k,
        }
    }

    pub fn new(x: f64) -> Self {
        Self::normalized(x, 0)
    }

    /// Builds `exp(log)` directly.
    pub fn from_log(log: f64) -> Self {
        if log == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        Self::from_log2(log / std::f64::consts::LN_2)
    }

    fn from_log2(l2: f64) -> Self {
        if !l2.is_finite() {
            return Self {
                mant: if l2.is_nan() { f64::NAN } else { f64::INFINITY },
                exp: 0,
            };
        }
        let e = l2.floor();
        Self::normalized((l2 - e).exp2(), e as i64)
    }

    /// Natural logarithm of the magnitude.
    pub fn ln_abs(&self) -> f64 {
        if self.mant == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.mant.abs().ln() + self.exp as f64 * std::f64::consts::LN_2
        }
    }

    pub fn log10_abs(&self) -> f64 {
        self.ln_abs() / std::f64::consts::LN_10
    }

    pub fn signum(&self) -> i8 {
        if self.mant > 0.0 {
            1
        } else if self.mant < 0.0 {
            -1
        } else {
            0
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mant == 0.0
    }

    /// Value as `f64`; saturates to `±∞` outside the double range.
    pub fn to_f64(&self) -> f64 {
        scale(self.mant, self.exp)
    }

    /// Value as `f64`, or an overflow error naming `what`.
    pub fn checked(&self, what: &str) -> Result<f64> {
        if self.mant.is_nan() {
            return Err(Error::NonFinite(what.to_string()));
        }
        let v = self.to_f64();
        if v.is_infinite() {
            return Err(Error::Overflow(what.to_string()));
        }
        Ok(v)
    }

    /// `|x|^e` for a nonnegative base.
    pub fn powf(&self, e: f64) -> Self {
        debug_assert!(self.mant >= 0.0, "fractional power of a negative LogScalar");
        if self.mant == 0.0 {
            return if e > 0.0 { Self::ZERO } else { Self::ONE };
        }
        if !self.mant.is_finite() {
            return Self::new(self.mant.powf(e));
        }
        // x^e = m^e · 2^{exp·e}; split exp·e into integer and fraction
        let whole = self.exp as f64 * e;
        let mp = self.mant.powf(e);
        if !mp.is_normal() || !whole.is_finite() || whole.abs() > 9e15 {
            return Self::from_log2(e * (self.mant.log2() + self.exp as f64));
        }
        let wi = whole.floor();
        Self::normalized(mp * (whole - wi).exp2(), wi as i64)
    }

    pub fn sqrt(&self) -> Self {
        if self.mant >= 0.0 && self.exp % 2 == 0 {
            Self::normalized(self.mant.sqrt(), self.exp / 2)
        } else {
            self.powf(0.5)
        }
    }
}

impl fmt::Debug for LogScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LogScalar({}·2^{})", self.mant, self.exp)
    }
}

impl Mul for LogScalar {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::normalized(self.mant * rhs.mant, self.exp + rhs.exp)
    }
}

impl Div for LogScalar {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        assert!(rhs.mant != 0.0, "LogScalar division by zero");
        Self::normalized(self.mant / rhs.mant, self.exp - rhs.exp)
    }
}

impl Neg for LogScalar {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            mant: -self.mant,
            exp: self.exp,
        }
    }
}

impl Add for LogScalar {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        if self.mant == 0.0 {
            return rhs;
        }
        if rhs.mant == 0.0 {
            return self;
        }
        let (big, small) = if self.exp >= rhs.exp { (self, rhs) } else { (rhs, self) };
        let gap = big.exp - small.exp;
        if gap > 64 {
            return big;
        }
        Self::normalized(big.mant + scale(small.mant, -gap), big.exp)
    }
}

impl Sub for LogScalar {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl std::iter::Sum for LogScalar {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |a, b| a + b)
    }
}

impl PartialOrd for LogScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let (sa, sb) = (self.signum(), other.signum());
        if sa != sb {
            return Some(sa.cmp(&sb));
        }
        if sa == 0 {
            return Some(Ordering::Equal);
        }
        let mag = self.exp.cmp(&other.exp).then(
            self.mant.abs().partial_cmp(&other.mant.abs())?,
        );
        Some(if sa > 0 { mag } else { mag.reverse() })
    }
}

impl From<f64> for LogScalar {
    fn from(x: f64) -> Self {
        Self::new(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn arithmetic_round_trips() {
        let a = LogScalar::new(3.0);
        let b = LogScalar::new(-1.25);
        assert_relative_eq!((a + b).to_f64(), 1.75, max_relative = 1e-15);
        assert_relative_eq!((a - b).to_f64(), 4.25, max_relative = 1e-15);
        assert_relative_eq!((a * b).to_f64(), -3.75, max_relative = 1e-15);
        assert_relative_eq!((a / b).to_f64(), -2.4, max_relative = 1e-15);
        assert_eq!((a - a).to_f64(), 0.0);
        assert_relative_eq!(a.powf(2.5).to_f64(), 3f64.powf(2.5), max_relative = 1e-14);
        assert_eq!(LogScalar::ZERO.powf(2.0), LogScalar::ZERO);
        assert_eq!(LogScalar::ZERO.powf(0.0), LogScalar::ONE);
    }

    #[test]
    fn huge_values_survive() {
        let big = LogScalar::new(1e200).powf(10.0);
        assert!(big.to_f64().is_infinite());
        assert!(matches!(big.checked("c"), Err(Error::Overflow(_))));
        assert_relative_eq!(big.log10_abs(), 2000.0, max_relative = 1e-14);
        let back = (big / LogScalar::new(1e200).powf(9.0)).checked("x").unwrap();
        assert_relative_eq!(back, 1e200, max_relative = 1e-12);
    }

    #[test]
    fn small_integers_are_exact() {
        let one = LogScalar::ONE;
        assert_eq!((one + one + one).to_f64(), 3.0);
        assert_eq!(LogScalar::new(4.0).sqrt().to_f64(), 2.0);
        assert_eq!(LogScalar::new(2.0).powf(10.0).to_f64(), 1024.0);
        assert_eq!(LogScalar::new(9.0).powf(0.5).to_f64(), 3.0);
        assert_eq!((LogScalar::new(6.0) / LogScalar::new(3.0)).to_f64(), 2.0);
        assert_eq!(LogScalar::new(1e-310).to_f64(), 1e-310);
    }

    #[test]
    fn from_log_inverts_ln() {
        for x in [1e-300f64, 0.3, 1.0, 7.5, 1e250] {
            let v = LogScalar::from_log(x.ln()).to_f64();
            assert_relative_eq!(v, x, max_relative = 1e-13);
        }
        assert_relative_eq!(LogScalar::from_log(5000.0).ln_abs(), 5000.0, max_relative = 1e-15);
    }

    #[test]
    fn ordering() {
        let xs = [-5.0, -0.1, 0.0, 0.2, 7.0];
        for a in xs {
            for b in xs {
                assert_eq!(LogScalar::new(a).partial_cmp(&LogScalar::new(b)), a.partial_cmp(&b), "{a} {b}");
            }
        }
    }
}
