//! Brute-force ground truth for `D_σ: ℓ_p^k → ℓ_q^k` with `k ≤ 3`.
//!
//! Covering numbers are bracketed from above by a lattice cover of the body
//! and from below by volume and packing arguments; bisection on the radius
//! turns those into a certified bracket on the entropy number `e_n`.

mod cover;
mod mc;
mod packing;

use serde::{Deserialize, Serialize};

pub use cover::covering_upper;
pub use mc::{mc_volume, McVolume, MIN_MC_SAMPLES};
pub use packing::packing_lower;

use crate::bounds::ln_volume_unit_ball;
use crate::error::{Error, Result};
use crate::exponent::{inv, quasi_constant, ExponentPair};
use crate::logreal::LogReal;
use crate::sequence::{SequenceSpec, TailModel};

/// Hard cap on the oracle dimension.
pub const MAX_DIM: usize = 3;

/// Tiles a single cover may enumerate.
pub const MAX_GRID_CELLS: u64 = 100_000_000;

/// `D_σ: ℓ_p^k → ℓ_q^k` with `1 ≤ k ≤ 3` and `σ` positive nonincreasing; `p = q` is allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteDiag {
    sigma: Vec<f64>,
    pair: ExponentPair,
}

impl FiniteDiag {
    pub fn new(sigma: Vec<f64>, p: f64, q: f64) -> Result<Self> {
        if sigma.is_empty() {
            return Err(Error::InvalidParameter("σ needs at least one entry".into()));
        }
        if sigma.len() > MAX_DIM {
            return Err(Error::DimensionTooLarge(sigma.len()));
        }
        if let Some(bad) = sigma.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidParameter(format!("σ entry {bad} must be positive and finite")));
        }
        if sigma.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidParameter("σ must be nonincreasing".into()));
        }
        Ok(FiniteDiag { sigma, pair: ExponentPair::new(p, q)? })
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn k(&self) -> usize {
        self.sigma.len()
    }

    pub fn p(&self) -> f64 {
        self.pair.p()
    }

    pub fn q(&self) -> f64 {
        self.pair.q()
    }

    pub fn pair(&self) -> ExponentPair {
        self.pair
    }

    /// `‖D_σ‖`: `σ_1` for `p ≤ q`, `‖σ‖_r` with `1/r = 1/q - 1/p` otherwise.
    pub fn operator_norm(&self) -> f64 {
        let inv_r = inv(self.q()) - inv(self.p());
        if inv_r <= 0.0 {
            self.sigma[0]
        } else {
            lp_norm(&self.sigma, 1.0 / inv_r)
        }
    }

    /// The same weights as an infinite sequence with zero tail.
    pub fn to_spec(&self) -> SequenceSpec {
        SequenceSpec::explicit(self.sigma.clone(), TailModel::Zero).expect("validated weights")
    }

    /// `Σ |y_i/σ_i|^p`, or `max |y_i/σ_i|` for `p = ∞`; the body is where this is `≤ 1`.
    fn gauge(&self, y: &[f64]) -> f64 {
        let scaled = y.iter().zip(&self.sigma).map(|(v, s)| (v / s).abs());
        if self.p() == f64::INFINITY {
            scaled.fold(0.0, f64::max)
        } else {
            let p = self.p();
            scaled.map(|v| v.powf(p)).sum()
        }
    }

    /// `y ∈ D_σ B_p`.
    pub(crate) fn contains(&self, y: &[f64]) -> bool {
        self.gauge(y) <= 1.0
    }
}

/// `‖x‖_p`, a quasi-norm for `p < 1`.
pub fn lp_norm(x: &[f64], p: f64) -> f64 {
    if p == f64::INFINITY {
        x.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else {
        x.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// `‖x - y‖_q`.
pub(crate) fn distance(x: &[f64], y: &[f64], q: f64) -> f64 {
    let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    lp_norm(&diff, q)
}

/// `⌈(Π σ_i) λ^k(B_p) / (eps^k λ^k(B_q))⌉`, a lower bound on the covering number at `eps`.
pub fn volume_lower_nd(diag: &FiniteDiag, eps: f64) -> Result<u64> {
    check_eps(eps)?;
    let k = diag.k() as u64;
    let ln_ratio =
        if diag.p() == diag.q() { 0.0 } else { ln_volume_unit_ball(diag.p(), k) - ln_volume_unit_ball(diag.q(), k) };
    let ln_count = diag.sigma.iter().map(|s| s.ln()).sum::<f64>() + ln_ratio - k as f64 * eps.ln();
    // shave a relative 1e-12 so that rounding never pushes an exact integer up by one
    let count = (ln_count.exp() * (1.0 - 1e-12)).ceil();
    Ok(if count >= u64::MAX as f64 { u64::MAX } else { (count as u64).max(1) })
}

/// The volumetric right-hand side `(2C_p)^k · λ^k(B_p)/λ^k(B_q) · Π(‖id: ℓ_q^k → ℓ_p^k‖ + C_q σ_i/eps)`,
/// which dominates the covering number at radius `2 eps`.
pub fn volumetric_cover_bound(diag: &FiniteDiag, eps: f64) -> Result<LogReal> {
    check_eps(eps)?;
    let k = diag.k() as u64;
    let (cp, cq) = (quasi_constant(diag.p()), quasi_constant(diag.q()));
    let id_norm = (k as f64).powf(diag.pair.id_qp_exponent());
    let ln_ratio =
        if diag.p() == diag.q() { 0.0 } else { ln_volume_unit_ball(diag.p(), k) - ln_volume_unit_ball(diag.q(), k) };
    let ln_factors: f64 = diag.sigma.iter().map(|s| (id_norm + cq * s / eps).ln()).sum();
    LogReal::from_ln(k as f64 * (2.0 * cp).ln() + ln_ratio + ln_factors)
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("radius eps = {eps} must be positive and finite")))
    }
}

/// Grid resolution used by the bracket: a fixed fraction of the radius.
pub const RESOLUTION_DIVISOR: f64 = 8.0;

/// Candidate points drawn by the packing search.
pub const DEFAULT_PACKING_CANDIDATES: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoveringEstimate {
    pub epsilon: f64,
    /// Lattice cover size, an upper bound on the covering number.
    pub n_upper: u64,
    /// Larger of the volume and packing lower bounds.
    pub n_lower: u64,
    pub grid_resolution: f64,
    pub seed: u64,
}

/// Both sides of the covering number at `eps`, with resolution `eps/8`.
pub fn covering_estimate(diag: &FiniteDiag, eps: f64, seed: u64) -> Result<CoveringEstimate> {
    let grid_resolution = eps / RESOLUTION_DIVISOR;
    let n_upper = covering_upper(diag, eps, grid_resolution)?;
    let volume = volume_lower_nd(diag, eps)?;
    // 2 C_q eps-separated points land in distinct eps-balls
    let packed = packing_lower(diag, quasi_constant(diag.q()) * eps, seed, DEFAULT_PACKING_CANDIDATES)?;
    Ok(CoveringEstimate { epsilon: eps, n_upper, n_lower: volume.max(packed), grid_resolution, seed })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BracketOptions {
    /// Bisection steps on each side of the bracket.
    pub steps: u32,
    /// Stop early once `hi - lo` falls below this fraction of `‖D_σ‖`.
    pub width: f64,
    pub seed: u64,
    pub packing_candidates: usize,
}

impl Default for BracketOptions {
    fn default() -> Self {
        BracketOptions { steps: 24, width: 1e-4, seed: 0, packing_candidates: DEFAULT_PACKING_CANDIDATES }
    }
}

/// `lo ≤ e_n(D_σ) ≤ hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyBracket {
    pub n: u64,
    pub lo: f64,
    pub hi: f64,
    /// The step budget ran out before the target width was reached.
    pub exhausted: bool,
}

impl EntropyBracket {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn intersects(&self, lo: f64, hi: f64) -> bool {
        self.lo <= hi && lo <= self.hi
    }
}

pub fn entropy_bracket(diag: &FiniteDiag, n: u64) -> Result<EntropyBracket> {
    entropy_bracket_with(diag, n, &BracketOptions::default())
}

/// Two independent bisections on `[0, ‖D_σ‖]`. `hi` only ever moves to radii where the
/// lattice cover needs at most `n` balls; `lo` only to radii where a volume or packing
/// witness needs more than `n`. Midpoints depend only on earlier verdicts, so a larger
/// budget refines the same sequence and brackets nest.
pub fn entropy_bracket_with(diag: &FiniteDiag, n: u64, opts: &BracketOptions) -> Result<EntropyBracket> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let norm = diag.operator_norm();
    let cq = quasi_constant(diag.q());
    let target = opts.width * norm;

    // one ball of radius ‖D_σ‖ around the origin always suffices
    let (mut hi_fail, mut hi) = (0.0, norm);
    let (mut lo, mut lo_fail) = (0.0, norm);
    let mut exhausted = true;
    for _ in 0..opts.steps {
        if hi - lo <= target {
            exhausted = false;
            break;
        }
        if hi - hi_fail > target {
            let mid = 0.5 * (hi_fail + hi);
            if covering_upper(diag, mid, mid / RESOLUTION_DIVISOR)? <= n {
                hi = mid;
            } else {
                hi_fail = mid;
            }
        }
        if lo_fail - lo > target {
            let mid = 0.5 * (lo + lo_fail);
            let witnessed = volume_lower_nd(diag, mid)? > n
                || packing_lower(diag, cq * mid, opts.seed, opts.packing_candidates)? > n;
            if witnessed {
                lo = mid;
            } else {
                lo_fail = mid;
            }
        }
    }
    if hi - lo <= target {
        exhausted = false;
    }
    Ok(EntropyBracket { n, lo, hi, exhausted })
}
