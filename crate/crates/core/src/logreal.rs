//! Nonnegative reals carried by their natural logarithm.
//!
//! Diagonal sequences such as `exp(-a e^{λn})` underflow `f64` after a handful
//! of terms, so every quantity in this crate (σ_n, τ_n, bound values) is stored
//! as `ln x`. Zero is represented exactly by `-∞`; `+∞` is never a valid value.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Div, Mul};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogReal {
    log_value: f64,
}

impl LogReal {
    pub const ZERO: LogReal = LogReal { log_value: f64::NEG_INFINITY };
    pub const ONE: LogReal = LogReal { log_value: 0.0 };

    /// Builds a value from its natural logarithm. `+∞` and NaN are rejected.
    pub fn from_ln(log_value: f64) -> Result<Self> {
        if log_value.is_nan() || log_value == f64::INFINITY {
            return Err(Error::InvalidParameter(format!(
                "log value {log_value} does not represent a finite nonnegative real"
            )));
        }
        Ok(LogReal { log_value })
    }

    /// Internal constructor for values already known to be valid.
    pub(crate) fn from_ln_unchecked(log_value: f64) -> Self {
        debug_assert!(!log_value.is_nan() && log_value != f64::INFINITY, "bad log {log_value}");
        LogReal { log_value }
    }

    pub fn from_value(value: f64) -> Result<Self> {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(Error::InvalidParameter(format!("{value} is not a finite nonnegative real")));
        }
        Ok(LogReal { log_value: value.ln() })
    }

    #[inline]
    pub fn ln(self) -> f64 {
        self.log_value
    }

    #[inline]
    pub fn log10(self) -> f64 {
        self.log_value * std::f64::consts::LOG10_E
    }

    /// Linear value; underflows to `0.0` or overflows to `inf` when not representable.
    #[inline]
    pub fn value(self) -> f64 {
        self.log_value.exp()
    }

    /// `Some(x)` when the linear value is a normal, finite `f64`.
    pub fn representable(self) -> Option<f64> {
        let v = self.value();
        (v.is_finite() && (v == 0.0 && self.is_zero() || v.is_normal())).then_some(v)
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.log_value == f64::NEG_INFINITY
    }

    /// `self^e` for a finite exponent; `0^e` is `0` for `e > 0`.
    pub fn powf(self, e: f64) -> Self {
        if self.is_zero() {
            return if e == 0.0 { LogReal::ONE } else { LogReal::ZERO };
        }
        LogReal::from_ln_unchecked(self.log_value * e)
    }

    /// `self + other` via the max-shift trick.
    pub fn add(self, other: Self) -> Self {
        LogReal::from_ln_unchecked(log_add_exp(self.log_value, other.log_value))
    }

    /// Relative distance `|a/b - 1|` computed in log-domain. Two zeros are at distance 0.
    pub fn rel_diff(self, other: Self) -> f64 {
        if self.is_zero() && other.is_zero() {
            return 0.0;
        }
        (self.log_value - other.log_value).exp_m1().abs()
    }
}

impl Mul for LogReal {
    type Output = LogReal;
    fn mul(self, rhs: LogReal) -> LogReal {
        LogReal::from_ln_unchecked(self.log_value + rhs.log_value)
    }
}

impl Div for LogReal {
    type Output = LogReal;
    /// Division by zero is a programming error; the result is not a valid `LogReal`.
    fn div(self, rhs: LogReal) -> LogReal {
        assert!(!rhs.is_zero(), "LogReal division by zero");
        LogReal::from_ln_unchecked(self.log_value - rhs.log_value)
    }
}

impl PartialOrd for LogReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.log_value.partial_cmp(&other.log_value)
    }
}

impl fmt::Debug for LogReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LogReal(ln = {})", self.log_value)
    }
}

impl fmt::Display for LogReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.representable() {
            Some(v) => write!(f, "{v}"),
            None => write!(f, "10^{}", self.log10()),
        }
    }
}

/// `ln(e^a + e^b)`, exact when either side is `-∞`.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln Σ e^{x_i}` with a single max shift and compensated summation.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let mut acc = CompensatedSum::default();
    for &x in xs {
        acc.add((x - max).exp());
    }
    max + acc.total().ln()
}

/// Neumaier summation. Long tails sum tens of millions of terms, where naive
/// accumulation error approaches the requested tolerance.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}
