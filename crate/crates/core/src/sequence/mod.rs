//! Diagonal sequences `σ = (σ_n)_{n≥1}` evaluated in log-domain.
//!
//! A [`SequenceSpec`] is either one of the closed-form families or an explicit
//! finite prefix with a declared tail model. Families return exact closed-form
//! logarithms; `exp` is never taken on the way, so `exp(-a e^{λn})` stays
//! meaningful long after it would underflow.

mod parse;
mod prefix;
mod tail;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logreal::LogReal;

pub use parse::{parse_sequence_spec, parse_sequence_values};
pub use prefix::{geometric_mean, partial_sum_inv, SigmaTable};
pub use tail::{ensure_summable, tail, tail_estimate, tail_prefix, TailEstimate, MAX_TAIL_TERMS};

/// Default relative tolerance for tail sums.
pub const DEFAULT_RTOL: f64 = 1e-9;

/// How an explicit prefix continues past its last stored value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailModel {
    /// Nothing is assumed; indices past the prefix and tail sums are errors.
    None,
    /// `σ_{L+j} = σ_L · ratio^j`.
    GeometricExtension { ratio: f64 },
    /// `σ_n = 0` past the prefix, i.e. a finite-rank operator.
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SequenceSpec {
    Explicit {
        values: Vec<f64>,
        tail: TailModel,
    },
    /// `σ_n = c·b^{-n}`
    Geometric {
        c: f64,
        b: f64,
    },
    /// `σ_n = a·n^{-α}`
    Polynomial {
        a: f64,
        alpha: f64,
    },
    /// `σ_n = a·n^{-α}·ln(n+1)^{-β}`
    PolyLog {
        a: f64,
        alpha: f64,
        beta: f64,
    },
    /// `σ_n = exp(-a·ln(n)^λ)`
    ExpLog {
        a: f64,
        lambda: f64,
    },
    /// `σ_n = exp(-a·n^λ)`
    ExpPoly {
        a: f64,
        lambda: f64,
    },
    /// `σ_n = exp(-a·e^{λn})`
    ExpExp {
        a: f64,
        lambda: f64,
    },
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {x} must be a positive finite real")))
    }
}

impl SequenceSpec {
    pub fn geometric(c: f64, b: f64) -> Result<Self> {
        Self::Geometric { c, b }.validated()
    }

    pub fn polynomial(a: f64, alpha: f64) -> Result<Self> {
        Self::Polynomial { a, alpha }.validated()
    }

    pub fn poly_log(a: f64, alpha: f64, beta: f64) -> Result<Self> {
        Self::PolyLog { a, alpha, beta }.validated()
    }

    pub fn exp_log(a: f64, lambda: f64) -> Result<Self> {
        Self::ExpLog { a, lambda }.validated()
    }

    pub fn exp_poly(a: f64, lambda: f64) -> Result<Self> {
        Self::ExpPoly { a, lambda }.validated()
    }

    pub fn exp_exp(a: f64, lambda: f64) -> Result<Self> {
        Self::ExpExp { a, lambda }.validated()
    }

    pub fn explicit(values: Vec<f64>, tail: TailModel) -> Result<Self> {
        Self::Explicit { values, tail }.validated()
    }

    /// Checks positivity and monotonicity: analytically for families, element-wise
    /// for explicit prefixes.
    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SequenceSpec::Explicit { ref values, tail } => {
                if values.is_empty() {
                    return Err(Error::InvalidParameter("explicit sequence is empty".into()));
                }
                for (i, &v) in values.iter().enumerate() {
                    positive(&format!("σ_{}", i + 1), v)?;
                    if i > 0 && v > values[i - 1] {
                        return Err(Error::InvalidParameter(format!(
                            "explicit sequence increases at index {}: {} > {}",
                            i + 1,
                            v,
                            values[i - 1]
                        )));
                    }
                }
                if let TailModel::GeometricExtension { ratio } = tail {
                    if !(ratio > 0.0 && ratio < 1.0) {
                        return Err(Error::InvalidParameter(format!(
                            "tail ratio {ratio} must lie strictly inside (0, 1)"
                        )));
                    }
                }
                Ok(())
            }
            SequenceSpec::Geometric { c, b } => {
                positive("c", c)?;
                if !(b > 1.0 && b.is_finite()) {
                    return Err(Error::InvalidParameter(format!("b = {b} must exceed 1")));
                }
                Ok(())
            }
            SequenceSpec::Polynomial { a, alpha } => {
                positive("a", a)?;
                positive("alpha", alpha)
            }
            SequenceSpec::PolyLog { a, alpha, beta } => {
                positive("a", a)?;
                if !(alpha >= 0.0 && alpha.is_finite()) || !beta.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "polylog needs alpha >= 0 and finite beta, got alpha = {alpha}, beta = {beta}"
                    )));
                }
                // d/dx ln σ(x) = -α/x - β/((x+1) ln(x+1)); (x+1)ln(x+1)/x is smallest at x = 1.
                if beta < 0.0 && alpha * 2.0 * std::f64::consts::LN_2 < -beta {
                    return Err(Error::InvalidParameter(format!(
                        "polylog with alpha = {alpha}, beta = {beta} is not nonincreasing"
                    )));
                }
                Ok(())
            }
            SequenceSpec::ExpLog { a, lambda }
            | SequenceSpec::ExpPoly { a, lambda }
            | SequenceSpec::ExpExp { a, lambda } => {
                positive("a", a)?;
                positive("lambda", lambda)
            }
        }
    }

    /// True for the closed-form families, whose regularity is known analytically.
    pub fn is_family(&self) -> bool {
        !matches!(self, SequenceSpec::Explicit { .. })
    }

    /// Largest index that can be evaluated, if bounded.
    pub fn max_index(&self) -> Option<u64> {
        match self {
            SequenceSpec::Explicit { values, tail: TailModel::None } => Some(values.len() as u64),
            _ => None,
        }
    }

    /// `ln σ_n`. Explicit zero tails give `-∞`.
    pub fn ln_sigma(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidParameter("sequence indices start at 1".into()));
        }
        let x = n as f64;
        Ok(match *self {
            SequenceSpec::Explicit { ref values, tail } => {
                let len = values.len();
                if (n as usize) <= len {
                    values[n as usize - 1].ln()
                } else {
                    match tail {
                        TailModel::None => return Err(Error::IndexOutOfRange { index: n, len }),
                        TailModel::Zero => f64::NEG_INFINITY,
                        TailModel::GeometricExtension { ratio } => {
                            values[len - 1].ln() + (n - len as u64) as f64 * ratio.ln()
                        }
                    }
                }
            }
            SequenceSpec::Geometric { c, b } => c.ln() - x * b.ln(),
            SequenceSpec::Polynomial { a, alpha } => a.ln() - alpha * x.ln(),
            SequenceSpec::PolyLog { a, alpha, beta } => a.ln() - alpha * x.ln() - beta * x.ln_1p().ln(),
            SequenceSpec::ExpLog { a, lambda } => -a * x.ln().powf(lambda),
            SequenceSpec::ExpPoly { a, lambda } => -a * x.powf(lambda),
            SequenceSpec::ExpExp { a, lambda } => -a * (lambda * x).exp(),
        })
    }

    /// `σ_n` in log-domain.
    pub fn eval_sigma(&self, n: u64) -> Result<LogReal> {
        self.ln_sigma(n).map(LogReal::from_ln_unchecked)
    }

    /// The sequence multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        positive("scale factor", factor)?;
        let s = match *self {
            SequenceSpec::Explicit { ref values, tail } => {
                SequenceSpec::Explicit { values: values.iter().map(|v| v * factor).collect(), tail }
            }
            SequenceSpec::Geometric { c, b } => SequenceSpec::Geometric { c: c * factor, b },
            SequenceSpec::Polynomial { a, alpha } => SequenceSpec::Polynomial { a: a * factor, alpha },
            SequenceSpec::PolyLog { a, alpha, beta } => SequenceSpec::PolyLog { a: a * factor, alpha, beta },
            _ => {
                return Err(Error::InvalidParameter(
                    "exponential families have no scale parameter; use an explicit prefix".into(),
                ))
            }
        };
        s.validated()
    }
}

impl fmt::Display for SequenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SequenceSpec::Explicit { values, tail } => {
                write!(f, "explicit[{}]", values.len())?;
                match tail {
                    TailModel::None => Ok(()),
                    TailModel::Zero => write!(f, "+zero"),
                    TailModel::GeometricExtension { ratio } => write!(f, "+geometric({ratio})"),
                }
            }
            SequenceSpec::Geometric { c, b } => write!(f, "geom:c={c},b={b}"),
            SequenceSpec::Polynomial { a, alpha } => write!(f, "poly:a={a},alpha={alpha}"),
            SequenceSpec::PolyLog { a, alpha, beta } => {
                write!(f, "polylog:a={a},alpha={alpha},beta={beta}")
            }
            SequenceSpec::ExpLog { a, lambda } => write!(f, "explog:a={a},lambda={lambda}"),
            SequenceSpec::ExpPoly { a, lambda } => write!(f, "exppoly:a={a},lambda={lambda}"),
            SequenceSpec::ExpExp { a, lambda } => write!(f, "expexp:a={a},lambda={lambda}"),
        }
    }
}
