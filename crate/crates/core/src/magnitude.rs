//! Two representations of the astronomically large counts that bounds deal
//! with: exact big integers and base-2 logarithms.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Serialize, Serializer};

/// An exact nonnegative count.
pub type BigCount = BigUint;

/// Base-2 logarithm of a positive real, or an exact zero.
///
/// Addition is log-sum-exp; multiplication adds logarithms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Log2Value {
    log2: f64,
    zero: bool,
}

impl Log2Value {
    pub const ZERO: Log2Value = Log2Value {
        log2: f64::NEG_INFINITY,
        zero: true,
    };
    pub const ONE: Log2Value = Log2Value {
        log2: 0.0,
        zero: false,
    };

    /// Wraps a log2 value. Panics on NaN or infinities.
    pub fn from_log2(log2: f64) -> Self {
        assert!(log2.is_finite(), "log2 magnitude must be finite, got {log2}");
        Log2Value { log2, zero: false }
    }

    pub fn from_ln(ln: f64) -> Self {
        Self::from_log2(ln / std::f64::consts::LN_2)
    }

    /// Magnitude of a nonnegative real.
    pub fn from_f64(value: f64) -> Self {
        assert!(value >= 0.0 && value.is_finite(), "magnitude must be finite and nonnegative");
        if value == 0.0 {
            Self::ZERO
        } else {
            Self::from_log2(value.log2())
        }
    }

    pub fn from_count(value: u64) -> Self {
        Self::from_f64(value as f64)
    }

    /// log2 of a big integer, accurate to double precision at any size.
    pub fn from_big(value: &BigUint) -> Self {
        if value.is_zero() {
            return Self::ZERO;
        }
        let bits = value.bits();
        if bits <= 1000 {
            return Self::from_log2(value.to_f64().expect("fits in f64").log2());
        }
        let shift = bits - 64;
        let top = (value >> shift).to_f64().expect("64-bit prefix fits in f64");
        Self::from_log2(top.log2() + shift as f64)
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    /// The base-2 logarithm; `-inf` for zero.
    pub fn log2(&self) -> f64 {
        self.log2
    }

    pub fn ln(&self) -> f64 {
        self.log2 * std::f64::consts::LN_2
    }

    /// log10 of the log2 value: the `x` of a `2^(10^x)` display.
    pub fn exp10(&self) -> f64 {
        self.log2.log10()
    }

    /// Plain value; overflows to `inf` beyond ~2^1024.
    pub fn value(&self) -> f64 {
        if self.zero {
            0.0
        } else {
            self.log2.exp2()
        }
    }

    /// Raise to a nonnegative real power.
    pub fn powf(self, exponent: f64) -> Self {
        if self.zero {
            if exponent == 0.0 {
                Self::ONE
            } else {
                Self::ZERO
            }
        } else {
            Self::from_log2(self.log2 * exponent)
        }
    }

    /// `self / other` for nonzero `other`.
    pub fn ratio(self, other: Log2Value) -> Self {
        assert!(!other.zero, "division by zero magnitude");
        if self.zero {
            Self::ZERO
        } else {
            Self::from_log2(self.log2 - other.log2)
        }
    }

    /// Sum of three magnitudes in one log-sum-exp step.
    pub fn sum3(a: Log2Value, b: Log2Value, c: Log2Value) -> Self {
        let m = a.log2.max(b.log2).max(c.log2);
        if m == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let s = (a.log2 - m).exp2() + (b.log2 - m).exp2() + (c.log2 - m).exp2();
        Self::from_log2(m + s.log2())
    }

    /// Compares with an absolute slack on the log2 scale.
    pub fn le_with_slack(&self, other: &Log2Value, slack: f64) -> bool {
        self.zero || (!other.zero && self.log2 <= other.log2 + slack)
    }
}

impl Add for Log2Value {
    type Output = Log2Value;

    fn add(self, rhs: Log2Value) -> Log2Value {
        if self.zero {
            return rhs;
        }
        if rhs.zero {
            return self;
        }
        let (hi, lo) = if self.log2 >= rhs.log2 {
            (self.log2, rhs.log2)
        } else {
            (rhs.log2, self.log2)
        };
        Log2Value::from_log2(hi + (lo - hi).exp2().ln_1p() / std::f64::consts::LN_2)
    }
}

impl Mul for Log2Value {
    type Output = Log2Value;

    fn mul(self, rhs: Log2Value) -> Log2Value {
        if self.zero || rhs.zero {
            Log2Value::ZERO
        } else {
            Log2Value::from_log2(self.log2 + rhs.log2)
        }
    }
}

impl PartialOrd for Log2Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.log2.partial_cmp(&other.log2)
    }
}

impl fmt::Display for Log2Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.zero {
            write!(f, "0")
        } else {
            write!(f, "2^{:.6}", self.log2)
        }
    }
}

/// Serialized as the log2 number, `null` for an exact zero.
impl Serialize for Log2Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.zero {
            serializer.serialize_none()
        } else {
            serializer.serialize_f64(self.log2)
        }
    }
}
