use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which side of `p = q` an exponent pair lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `p < q`, with `1/s = 1/p - 1/q`.
    Embedding,
    Equal,
    /// `p > q`, with `1/r = 1/q - 1/p`.
    Contraction,
}

/// Source and target exponents `(p, q)` of `D_σ: ℓ_p → ℓ_q`, each in `(0, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentPair {
    p: f64,
    q: f64,
}

/// `1/p` with `1/∞ = 0` exactly.
#[inline]
pub fn inv(p: f64) -> f64 {
    if p == f64::INFINITY {
        0.0
    } else {
        1.0 / p
    }
}

/// Triangle-inequality constant of the `ℓ_p` quasi-norm, `max{1, 2^{1/p - 1}}`.
pub fn quasi_constant(p: f64) -> f64 {
    if p >= 1.0 {
        1.0
    } else {
        2f64.powf(1.0 / p - 1.0)
    }
}

fn check_exponent(name: &str, x: f64) -> Result<()> {
    if x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {x} must lie in (0, inf]")))
    }
}

impl ExponentPair {
    /// Any pair in `(0, ∞]²`, including `p = q` (used by the finite-dimensional oracle).
    pub fn new(p: f64, q: f64) -> Result<Self> {
        check_exponent("p", p)?;
        check_exponent("q", q)?;
        Ok(ExponentPair { p, q })
    }

    /// A pair with `p ≠ q`, as required by every infinite-dimensional bound.
    pub fn distinct(p: f64, q: f64) -> Result<Self> {
        let pair = Self::new(p, q)?;
        if pair.branch() == Branch::Equal {
            return Err(Error::WrongBranch { expected: "!=", p, q });
        }
        Ok(pair)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn branch(&self) -> Branch {
        let d = inv(self.p) - inv(self.q);
        if d > 0.0 {
            Branch::Embedding
        } else if d < 0.0 {
            Branch::Contraction
        } else {
            Branch::Equal
        }
    }

    /// `1/s = 1/p - 1/q`, only for `p < q`.
    pub fn inv_s(&self) -> Result<f64> {
        match self.branch() {
            Branch::Embedding => Ok(inv(self.p) - inv(self.q)),
            _ => Err(Error::WrongBranch { expected: "<", p: self.p, q: self.q }),
        }
    }

    pub fn s(&self) -> Result<f64> {
        self.inv_s().map(|x| 1.0 / x)
    }

    /// `1/r = 1/q - 1/p`, only for `p > q`.
    pub fn inv_r(&self) -> Result<f64> {
        match self.branch() {
            Branch::Contraction => Ok(inv(self.q) - inv(self.p)),
            _ => Err(Error::WrongBranch { expected: ">", p: self.p, q: self.q }),
        }
    }

    pub fn r(&self) -> Result<f64> {
        self.inv_r().map(|x| 1.0 / x)
    }

    pub fn c_p(&self) -> f64 {
        quasi_constant(self.p)
    }

    pub fn c_q(&self) -> f64 {
        quasi_constant(self.q)
    }

    /// `(1/p - 1/q)_+`: the exponent of `‖id: ℓ_q^k → ℓ_p^k‖ = k^{(1/p - 1/q)_+}`.
    pub fn id_qp_exponent(&self) -> f64 {
        (inv(self.p) - inv(self.q)).max(0.0)
    }
}

impl fmt::Display for ExponentPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(p = {}, q = {})", fmt_exponent(self.p), fmt_exponent(self.q))
    }
}

/// Spells `∞` as `inf`, the same literal the CLI accepts.
pub fn fmt_exponent(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".to_string()
    } else {
        format!("{x}")
    }
}
