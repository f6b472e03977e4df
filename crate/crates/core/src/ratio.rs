//! Exact non-negative rationals.
//!
//! Edit costs, filter thresholds and pruning percentages arrive as short
//! decimal literals ("0.1", "0.75", "2"). Parsing them through `f64` would
//! smuggle rounding error into comparisons that are meant to be exact, so
//! configuration values are kept as reduced fractions and only converted to
//! floating point at the last moment (reported scores).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// A non-negative rational number kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ratio {
    num: u64,
    den: u64,
}

impl Ratio {
    /// Builds `num/den`, reducing by the gcd. Panics if `den == 0`.
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den != 0, "ratio denominator must be non-zero");
        if num == 0 {
            return Ratio::ZERO;
        }
        let g = gcd(num, den);
        Ratio {
            num: num / g,
            den: den / g,
        }
    }

    pub const ZERO: Ratio = Ratio { num: 0, den: 1 };
    pub const ONE: Ratio = Ratio { num: 1, den: 1 };

    pub fn from_int(n: u64) -> Self {
        Ratio { num: n, den: 1 }
    }

    pub fn numer(&self) -> u64 {
        self.num
    }

    pub fn denom(&self) -> u64 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Exact comparison `self > value` for an integer value.
    pub fn gt_int(&self, value: u64) -> bool {
        (self.num as u128) > (value as u128) * self.den as u128
    }
}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ratio {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let lhs = self.num as u128 * other.den as u128;
        let rhs = other.num as u128 * self.den as u128;
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Error produced when a decimal literal cannot be read exactly.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid decimal literal `{0}`")]
pub struct ParseRatioError(pub String);

impl FromStr for Ratio {
    type Err = ParseRatioError;

    /// Parses a non-negative decimal literal (`"3"`, `"0.4"`, `".25"`)
    /// into an exact fraction. Scientific notation is rejected: thresholds
    /// are human-entered knobs, not measured data.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseRatioError(s.to_string());
        let t = s.trim();
        if t.is_empty() || t.starts_with('+') || t.starts_with('-') {
            return Err(err());
        }
        let (int_part, frac_part) = match t.split_once('.') {
            Some((i, f)) => (i, f),
            None => (t, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(err());
        }
        let digits_ok = |d: &str| d.chars().all(|c| c.is_ascii_digit());
        if !digits_ok(int_part) || !digits_ok(frac_part) {
            return Err(err());
        }
        if frac_part.len() > 18 {
            return Err(err());
        }
        let mut num: u64 = if int_part.is_empty() {
            0
        } else {
            int_part.parse().map_err(|_| err())?
        };
        let mut den: u64 = 1;
        for c in frac_part.chars() {
            num = num
                .checked_mul(10)
                .and_then(|n| n.checked_add(c as u64 - '0' as u64))
                .ok_or_else(err)?;
            den = den.checked_mul(10).ok_or_else(err)?;
        }
        Ok(Ratio::new(num, den))
    }
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub(crate) fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return a.max(b).max(1);
    }
    a / gcd(a, b) * b
}
