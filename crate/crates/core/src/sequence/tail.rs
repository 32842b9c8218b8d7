//! Tail sums `τ_k = (Σ_{n≥k} σ_n^r)^{1/r}` with a certified truncation error.
//!
//! A finite window `k..N` is summed exactly (compensated, shifted by the first
//! term) and the remainder `Σ_{n≥N} σ_n^r` is enclosed between integrals of the
//! continuous family `σ(x)^r`. With `f = σ^r` nonincreasing,
//!
//! ```text
//! ∫_N^∞ f ≤ Σ_{n≥N} f(n) ≤ f(N) + ∫_N^∞ f,
//! ```
//!
//! and when `f` is also convex on `[N - 1/2, ∞)` the trapezoid and midpoint
//! rules tighten this to `[f(N)/2 + ∫_N^∞ f, ∫_{N-1/2}^∞ f]`. The window doubles
//! until the bracket is narrow enough for the requested relative tolerance.

use super::{SequenceSpec, TailModel};
use crate::error::{Error, Result};
use crate::logreal::{log_add_exp, log_sum_exp, CompensatedSum, LogReal};
use crate::special::ln_upper_gamma;

/// Hard cap on the number of explicitly summed terms per tail evaluation.
pub const MAX_TAIL_TERMS: u64 = 1 << 26;

const INITIAL_WINDOW: u64 = 64;

/// Relative slack added around integrals that go through the incomplete gamma function.
const LN_EVAL_SLACK: f64 = 1e-13;

/// A tail value together with the certified bracket on `τ_k^r` it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEstimate {
    pub value: LogReal,
    pub ln_power_lo: f64,
    pub ln_power_hi: f64,
    /// Explicitly summed terms; zero for closed forms.
    pub terms: u64,
}

fn check_r(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("tail exponent r = {r} must be positive and finite")))
    }
}

/// `Ok` iff `σ ∈ ℓ_r`.
pub fn ensure_summable(spec: &SequenceSpec, r: f64) -> Result<()> {
    check_r(r)?;
    let summable = match *spec {
        SequenceSpec::Explicit { tail: TailModel::None, .. } => return Err(Error::UnusableTail),
        SequenceSpec::Explicit { .. } => true,
        SequenceSpec::Geometric { .. } | SequenceSpec::ExpPoly { .. } | SequenceSpec::ExpExp { .. } => true,
        SequenceSpec::Polynomial { alpha, .. } => alpha * r > 1.0,
        SequenceSpec::PolyLog { alpha, beta, .. } => {
            let c = alpha * r;
            c > 1.0 || (c == 1.0 && beta * r > 1.0)
        }
        SequenceSpec::ExpLog { a, lambda } => lambda > 1.0 || (lambda == 1.0 && a * r > 1.0),
    };
    if summable {
        Ok(())
    } else {
        Err(Error::Divergent { r })
    }
}

/// `τ_k` to relative error at most `rtol`.
pub fn tail(spec: &SequenceSpec, k: u64, r: f64, rtol: f64) -> Result<LogReal> {
    tail_estimate(spec, k, r, rtol).map(|t| t.value)
}

/// `τ_k` with the bracket on `τ_k^r` that certifies it.
pub fn tail_estimate(spec: &SequenceSpec, k: u64, r: f64, rtol: f64) -> Result<TailEstimate> {
    if k == 0 {
        return Err(Error::InvalidParameter("tail index starts at 1".into()));
    }
    if !(rtol > 0.0 && rtol < 1.0) {
        return Err(Error::InvalidParameter(format!("rtol = {rtol} must lie in (0, 1)")));
    }
    ensure_summable(spec, r)?;
    if let Some(ln_power) = closed_form(spec, k, r)? {
        return Ok(TailEstimate {
            value: LogReal::from_ln(ln_power / r)?,
            ln_power_lo: ln_power,
            ln_power_hi: ln_power,
            terms: 0,
        });
    }
    windowed(spec, k, r, rtol)
}

/// `τ_1..τ_{k_max}`: one certified evaluation at `k_max`, then the exact
/// backward recurrence `τ_k^r = τ_{k+1}^r + σ_k^r`.
pub fn tail_prefix(spec: &SequenceSpec, k_max: u64, r: f64, rtol: f64) -> Result<Vec<LogReal>> {
    if k_max == 0 {
        return Ok(Vec::new());
    }
    let last = tail_estimate(spec, k_max, r, rtol)?;
    let mut ln_powers = vec![0.0; k_max as usize];
    let mut running = last.value.ln() * r;
    ln_powers[k_max as usize - 1] = running;
    for k in (1..k_max).rev() {
        running = log_add_exp(running, r * spec.ln_sigma(k)?);
        ln_powers[k as usize - 1] = running;
    }
    ln_powers.into_iter().map(|l| LogReal::from_ln(l / r)).collect()
}

/// `ln Σ_{n≥k} σ_n^r` when it has a closed form.
fn closed_form(spec: &SequenceSpec, k: u64, r: f64) -> Result<Option<f64>> {
    Ok(match *spec {
        SequenceSpec::Geometric { b, .. } => Some(r * spec.ln_sigma(k)? - (-(-r * b.ln()).exp_m1()).ln()),
        SequenceSpec::Explicit { ref values, tail } => {
            let len = values.len() as u64;
            let head: Vec<f64> = (k..=len).map(|n| r * values[n as usize - 1].ln()).collect();
            let rest = match tail {
                TailModel::None => return Err(Error::UnusableTail),
                TailModel::Zero => f64::NEG_INFINITY,
                TailModel::GeometricExtension { ratio } => {
                    // Σ_{n≥m} σ_m^r ratio^{r(n-m)} with m = max(k, len + 1).
                    let m = k.max(len + 1);
                    r * spec.ln_sigma(m)? - (-(r * ratio.ln()).exp_m1()).ln()
                }
            };
            Some(log_add_exp(log_sum_exp(&head), rest))
        }
        _ => None,
    })
}

fn windowed(spec: &SequenceSpec, k: u64, r: f64, rtol: f64) -> Result<TailEstimate> {
    // |m/S - 1| stays inside [(1-rtol)^r, (1+rtol)^r] once hi/lo ≤ 1 + δ.
    let delta = (r * rtol.ln_1p()).exp_m1().min(-(r * (-rtol).ln_1p()).exp_m1());
    let ln_tol = delta.ln_1p();

    let shift = r * spec.ln_sigma(k)?;
    if shift == f64::NEG_INFINITY {
        // σ_k lies below the log-domain range; σ is nonincreasing, so the whole tail does too
        return Ok(TailEstimate {
            value: LogReal::from_ln(f64::NEG_INFINITY)?,
            ln_power_lo: f64::NEG_INFINITY,
            ln_power_hi: f64::NEG_INFINITY,
            terms: 0,
        });
    }
    let mut acc = CompensatedSum::default();
    let mut next = k;
    let mut end = k + INITIAL_WINDOW;
    loop {
        for n in next..end {
            acc.add((r * spec.ln_sigma(n)? - shift).exp());
        }
        next = end;
        let ln_window = shift + acc.total().ln();
        if let Some((rem_lo, rem_hi)) = remainder_bracket(spec, r, end)? {
            let lo = log_add_exp(ln_window, rem_lo);
            let hi = log_add_exp(ln_window, rem_hi);
            if hi - lo <= ln_tol {
                let mid = lo + ((hi - lo).exp() + 1.0).ln() - std::f64::consts::LN_2;
                return Ok(TailEstimate {
                    value: LogReal::from_ln(mid / r)?,
                    ln_power_lo: lo,
                    ln_power_hi: hi,
                    terms: end - k,
                });
            }
        }
        let width = end - k;
        if width >= MAX_TAIL_TERMS {
            return Err(Error::PrecisionNotReached { rtol, terms: width });
        }
        end = k + 2 * width;
    }
}

/// `ln` bracket on `Σ_{n≥N} σ_n^r`; `None` when the integral bound is not yet usable.
fn remainder_bracket(spec: &SequenceSpec, r: f64, n: u64) -> Result<Option<(f64, f64)>> {
    let x = n as f64;
    let ln_f = r * spec.ln_sigma(n)?;
    let Some((int_lo, int_hi)) = ln_integral(spec, r, x) else {
        return Ok(None);
    };
    if convex_from(spec, r, x - 0.5) {
        if let Some((_, mid_hi)) = ln_integral(spec, r, x - 0.5) {
            return Ok(Some((log_add_exp(int_lo, ln_f - std::f64::consts::LN_2), mid_hi)));
        }
    }
    Ok(Some((int_lo, log_add_exp(int_hi, ln_f))))
}

/// Whether `σ(t)^r` is convex for all `t ≥ x`.
fn convex_from(spec: &SequenceSpec, r: f64, x: f64) -> bool {
    match *spec {
        SequenceSpec::Polynomial { .. } => true,
        SequenceSpec::PolyLog { beta, .. } => beta >= 0.0,
        // f = exp(-A L^λ), L = ln t: f'' ≥ 0 iff L(1 + AλL^{λ-1}) ≥ λ - 1, monotone in t.
        SequenceSpec::ExpLog { a, lambda } => {
            let l = x.ln();
            let big_a = a * r;
            l > 0.0 && l * (1.0 + big_a * lambda * l.powf(lambda - 1.0)) >= lambda - 1.0
        }
        // f = exp(-A t^λ): f'' ≥ 0 iff Aλt^λ ≥ λ - 1.
        SequenceSpec::ExpPoly { a, lambda } => a * r * lambda * x.powf(lambda) >= lambda - 1.0,
        // f = exp(-A e^{λt}): f'' ≥ 0 iff A e^{λt} ≥ 1.
        SequenceSpec::ExpExp { a, lambda } => (a * r).ln() + lambda * x >= 0.0,
        SequenceSpec::Geometric { .. } | SequenceSpec::Explicit { .. } => false,
    }
}

/// `ln ∫_x^∞ σ(t)^r dt` as a bracket, for `x ≥ 1` and summable families.
fn ln_integral(spec: &SequenceSpec, r: f64, x: f64) -> Option<(f64, f64)> {
    let slack = |v: f64| (v - LN_EVAL_SLACK, v + LN_EVAL_SLACK);
    match *spec {
        SequenceSpec::Polynomial { a, alpha } => {
            let c = alpha * r;
            let v = r * a.ln() + (1.0 - c) * x.ln() - (c - 1.0).ln();
            Some((v, v))
        }
        SequenceSpec::ExpLog { a, lambda: 1.0 } => {
            let c = a * r;
            let v = (1.0 - c) * x.ln() - (c - 1.0).ln();
            Some((v, v))
        }
        SequenceSpec::PolyLog { a, alpha, beta } => {
            polylog_integral(alpha * r, beta * r, x).map(|(lo, hi)| (lo + r * a.ln(), hi + r * a.ln()))
        }
        SequenceSpec::ExpLog { a, lambda } => explog_integral(a * r, lambda, x),
        SequenceSpec::ExpPoly { a, lambda } => {
            let big_a = a * r;
            let z = big_a * x.powf(lambda);
            Some(slack(-lambda.ln() - big_a.ln() / lambda + ln_upper_gamma(1.0 / lambda, z)))
        }
        SequenceSpec::ExpExp { a, lambda } => {
            let z = ((a * r).ln() + lambda * x).exp();
            Some(slack(-lambda.ln() + ln_upper_gamma(0.0, z)))
        }
        SequenceSpec::Geometric { .. } | SequenceSpec::Explicit { .. } => None,
    }
}

/// `ln ∫_M^∞ y^{-γ} ln(y)^{-d} dy`; `None` if it diverges.
fn ln_log_power_integral(gamma: f64, d: f64, ln_m: f64) -> Option<f64> {
    if gamma == 1.0 {
        (d > 1.0).then(|| (1.0 - d) * ln_m.ln() - (d - 1.0).ln())
    } else if gamma > 1.0 {
        // u = ln y, v = (γ - 1)u: (γ-1)^{d-1} Γ(1 - d, (γ-1) ln M)
        Some((d - 1.0) * (gamma - 1.0).ln() + ln_upper_gamma(1.0 - d, (gamma - 1.0) * ln_m))
    } else {
        None
    }
}

/// Bracket on `ln ∫_x^∞ t^{-c} ln(t+1)^{-d} dt`.
///
/// With `y = t + 1`, `M = x + 1` and `u = 1/y ≤ 1/M`, the factor `(1-u)^{-c}`
/// lies in `[1 + cu, 1 + cu + K u²]`, `K = c(c+1)/2 · (1 - 1/M)^{-c-2}`, so the
/// integral lies between `J(c) + c J(c+1)` and that plus `K J(c+2)`, where
/// `J(γ) = ∫_M^∞ y^{-γ} ln(y)^{-d} dy`.
fn polylog_integral(c: f64, d: f64, x: f64) -> Option<(f64, f64)> {
    let c = if (c - 1.0).abs() < 1e-12 { 1.0 } else { c };
    let m = x + 1.0;
    let ln_m = m.ln();
    let j0 = ln_log_power_integral(c, d, ln_m)?;
    let j1 = ln_log_power_integral(c + 1.0, d, ln_m)?;
    let j2 = ln_log_power_integral(c + 2.0, d, ln_m)?;
    let lo = if c > 0.0 { log_add_exp(j0, c.ln() + j1) } else { j0 };
    let ln_k = (c * (c + 1.0) / 2.0).ln() - (c + 2.0) * (-1.0 / m).ln_1p();
    let hi = log_add_exp(lo, ln_k + j2);
    Some((lo - LN_EVAL_SLACK, hi + LN_EVAL_SLACK))
}

/// Bracket on `ln ∫_x^∞ exp(-A ln(t)^λ) dt` for `λ > 1`.
///
/// With `t = e^u` the integrand is `e^{-φ(u)}`, `φ(u) = A u^λ - u` convex. The
/// integral over `[ln x, U]` is taken by composite Gauss–Legendre on pieces over
/// which `φ` moves by at most 1/2; past `U` the tangent of `φ` bounds the rest.
fn explog_integral(big_a: f64, lambda: f64, x: f64) -> Option<(f64, f64)> {
    let phi = |u: f64| big_a * u.powf(lambda) - u;
    let dphi = |u: f64| big_a * lambda * u.powf(lambda - 1.0) - 1.0;
    let u0 = x.ln();
    // Convexity puts the minimum of φ on [u0, ∞) at u0 or at the root of φ'.
    let u_min = if dphi(u0) >= 0.0 { u0 } else { (big_a * lambda).powf(-1.0 / (lambda - 1.0)) };
    let shift = phi(u_min);

    const CUTOFF: f64 = 60.0;
    let mut acc = CompensatedSum::default();
    let mut u = u0;
    let mut pieces = 0u32;
    while !(u > u_min && phi(u) - shift > CUTOFF && dphi(u) > 0.0) {
        let h = 0.5 / dphi(u).abs().max(0.5);
        acc.add(gauss_legendre(|v| (shift - phi(v)).exp(), u, u + h));
        u += h;
        pieces += 1;
        if pieces > 2_000_000 {
            return None;
        }
    }
    let body = acc.total().ln() - shift;
    let rest = -phi(u) - dphi(u).ln();
    Some((body - LN_EVAL_SLACK, log_add_exp(body, rest) + LN_EVAL_SLACK))
}

/// 16-point Gauss–Legendre rule on `[a, b]`.
fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const NODES: [(f64, f64); 8] = [
        (0.095_012_509_837_637_45, 0.189_450_610_455_068_59),
        (0.281_603_550_779_258_9, 0.182_603_415_044_923_6),
        (0.458_016_777_657_227_37, 0.169_156_519_395_002_62),
        (0.617_876_244_402_643_8, 0.149_595_988_816_576_76),
        (0.755_404_408_355_003, 0.124_628_971_255_534_03),
        (0.865_631_202_387_831_8, 0.095_158_511_682_492_59),
        (0.944_575_023_073_232_6, 0.062_253_523_938_647_706),
        (0.989_400_934_991_649_9, 0.027_152_459_411_754_037),
    ];
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let sum: f64 = NODES.iter().map(|&(x, w)| w * (f(mid - half * x) + f(mid + half * x))).sum();
    sum * half
}
