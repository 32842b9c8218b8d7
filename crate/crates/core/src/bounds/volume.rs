//! Lebesgue volume of `ℓ_p` unit balls and the ratios used by the volume
//! lower bound.

use serde::{Deserialize, Serialize};

use crate::exponent::inv;
use crate::logreal::LogReal;
use crate::special::ln_gamma;

/// `ln λ^k(B_{ℓ_p^k})`: `k ln(2Γ(1+1/p)) - ln Γ(1+k/p)`, and `k ln 2` for `p = ∞`.
pub fn ln_volume_unit_ball(p: f64, k: u64) -> f64 {
    assert!(p > 0.0 && k >= 1, "volume needs p > 0 and k >= 1");
    let k = k as f64;
    let ip = inv(p);
    if ip == 0.0 {
        return k * std::f64::consts::LN_2;
    }
    k * (std::f64::consts::LN_2 + ln_gamma(1.0 + ip)) - ln_gamma(1.0 + k * ip)
}

pub fn volume_unit_ball(p: f64, k: u64) -> LogReal {
    LogReal::from_ln_unchecked(ln_volume_unit_ball(p, k))
}

/// `λ^k(B_{ℓ_p^k}) / λ^k(B_{ℓ_q^k})` in log-domain; the logarithm may be negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeRatio {
    pub p: f64,
    pub q: f64,
    pub k: u64,
    pub log_ratio: f64,
}

impl VolumeRatio {
    pub fn new(p: f64, q: f64, k: u64) -> Self {
        let log_ratio = if p == q { 0.0 } else { ln_volume_unit_ball(p, k) - ln_volume_unit_ball(q, k) };
        VolumeRatio { p, q, k, log_ratio }
    }

    /// `ln ratio^{1/k}`.
    pub fn ln_root(&self) -> f64 {
        self.log_ratio / self.k as f64
    }

    /// `ln ratio^{1/k} - (1/q - 1/p) ln k`, bounded in `k` by the Stirling asymptotics.
    pub fn slope_residual(&self) -> f64 {
        self.ln_root() - (inv(self.q) - inv(self.p)) * (self.k as f64).ln()
    }
}

/// Upper bound on `ln ratio_k^{1/k}` valid simultaneously for every `k ≥ k0`, for `p < q`.
///
/// From `√(2πx)(x/e)^x ≤ Γ(1+x) ≤ √(2πx)(x/e)^x e^{1/(12x)}`,
///
/// ```text
/// ln ratio_k^{1/k} ≤ ln A - (1/s) ln k + ρ(k0),
/// ln A = ln Γ(1+1/p) - ln Γ(1+1/q) + (ln p)/p - (ln q)/q + 1/s,
/// ```
///
/// with `ρ(k0) = q/(12 k0²)` for finite `q` and `max(0, ln(p/(2π k0)))/(2 k0)` for `q = ∞`.
pub(crate) fn ln_ratio_root_envelope(p: f64, q: f64, k0: u64) -> f64 {
    let (ip, iq) = (inv(p), inv(q));
    assert!(ip > iq, "envelope is for p < q");
    let inv_s = ip - iq;
    let k0 = k0 as f64;
    let mut ln_a = ln_gamma(1.0 + ip) + ip * p.ln() + inv_s;
    let rho = if iq == 0.0 {
        (p / (2.0 * std::f64::consts::PI * k0)).ln().max(0.0) / (2.0 * k0)
    } else {
        ln_a -= ln_gamma(1.0 + iq) + iq * q.ln();
        q / (12.0 * k0 * k0)
    };
    ln_a - inv_s * k0.ln() + rho
}
