//! Regularity conditions on diagonal sequences.
//!
//! Every check scans a finite window `1..=N` and reports the running extremum
//! of its defining ratio. A window alone cannot decide an asymptotic property,
//! so each report carries two verdicts: `window_verdict` from the plateau rule,
//! and `verdict`, which for the closed-form families is decided analytically
//! and otherwise equals the window verdict.
//!
//! Plateau rule on a running extremum `E_1..E_M`: it holds when `E` moved by a
//! relative factor below [`PLATEAU_TOL`] over `(M/2, M]`, fails when it still
//! moved that much over `(3M/4, M]`, and is inconclusive in between.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::{Branch, ExponentPair};
use crate::sequence::{ensure_summable, tail_prefix, SequenceSpec, SigmaTable, TailModel};

/// Relative movement of a running extremum below which it counts as settled.
pub const PLATEAU_TOL: f64 = 1e-3;

/// Default scan window.
pub const DEFAULT_WINDOW: u64 = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name")]
pub enum ConditionId {
    #[serde(rename = "EXP")]
    Exp { b: f64 },
    #[serde(rename = "EXP-shifted")]
    ExpShifted,
    #[serde(rename = "EXP-partial-sum")]
    ExpPartialSum { s: f64 },
    #[serde(rename = "EXP-tail")]
    ExpTail { r: f64 },
    #[serde(rename = "DOUBLING")]
    Doubling,
    #[serde(rename = "ALM-INCR")]
    AlmIncr { alpha: f64 },
    #[serde(rename = "GEO-MEAN")]
    GeoMean,
    #[serde(rename = "ALP")]
    Alp { r: f64 },
    #[serde(rename = "AMP")]
    Amp { r: f64 },
    /// Doubling of the tail sequence, `τ_n ≍ τ_{2n}`.
    #[serde(rename = "TAIL-DOUBLING")]
    TailDoubling { r: f64 },
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConditionId::Exp { b } => write!(f, "EXP(b={b})"),
            ConditionId::ExpShifted => write!(f, "EXP-shifted"),
            ConditionId::ExpPartialSum { s } => write!(f, "EXP-partial-sum(s={s})"),
            ConditionId::ExpTail { r } => write!(f, "EXP-tail(r={r})"),
            ConditionId::Doubling => write!(f, "DOUBLING"),
            ConditionId::AlmIncr { alpha } => write!(f, "ALM-INCR(alpha={alpha})"),
            ConditionId::GeoMean => write!(f, "GEO-MEAN"),
            ConditionId::Alp { r } => write!(f, "ALP(r={r})"),
            ConditionId::Amp { r } => write!(f, "AMP(r={r})"),
            ConditionId::TailDoubling { r } => write!(f, "TAIL-DOUBLING(r={r})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl Verdict {
    fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Holds
        } else {
            Verdict::Fails
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// The extremal ratio of a window and the indices attaining it. For the shifted
/// check `n - k` is the shift `n₀` and the ratio is the contraction factor `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub log_ratio: f64,
    pub n: u64,
    pub k: u64,
}

impl Witness {
    pub fn ratio(&self) -> f64 {
        self.log_ratio.exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: ConditionId,
    pub verdict: Verdict,
    pub window_verdict: Verdict,
    /// Decided from closed-form knowledge of the family; never inconclusive.
    pub analytic: bool,
    pub window: u64,
    /// Absent when the extremal ratio is not a finite positive real.
    pub witness: Option<Witness>,
    pub plateau_tol: f64,
    pub note: Option<String>,
}

impl ConditionReport {
    fn new(condition: ConditionId, window: u64, scan: Scan, analytic: Option<bool>) -> Self {
        let window_verdict = scan.verdict();
        let verdict = analytic.map(Verdict::from_bool).unwrap_or(window_verdict);
        ConditionReport {
            condition,
            verdict,
            window_verdict,
            analytic: analytic.is_some(),
            window,
            witness: scan.witness(),
            plateau_tol: PLATEAU_TOL,
            note: None,
        }
    }
}

/// Running extremum of a log-ratio over a window, with attaining indices.
#[derive(Debug, Clone)]
struct Scan {
    running: Vec<f64>,
    best: f64,
    at: (u64, u64),
    maximize: bool,
}

impl Scan {
    fn new(maximize: bool) -> Self {
        let best = if maximize { f64::NEG_INFINITY } else { f64::INFINITY };
        Scan { running: Vec::new(), best, at: (0, 0), maximize }
    }

    fn push(&mut self, log_ratio: f64, n: u64, k: u64) {
        let better = if self.maximize { log_ratio > self.best } else { log_ratio < self.best };
        if better || self.running.is_empty() {
            self.best = log_ratio;
            self.at = (n, k);
        }
        self.running.push(self.best);
    }

    fn verdict(&self) -> Verdict {
        plateau_verdict(&self.running)
    }

    fn witness(&self) -> Option<Witness> {
        self.best.is_finite().then_some(Witness { log_ratio: self.best, n: self.at.0, k: self.at.1 })
    }
}

fn rel_move(a: f64, b: f64) -> f64 {
    (a - b).exp_m1().abs()
}

fn plateau_verdict(running: &[f64]) -> Verdict {
    let m = running.len();
    if m == 0 {
        return Verdict::Inconclusive;
    }
    let end = running[m - 1];
    if !end.is_finite() {
        return Verdict::Fails;
    }
    let half = running[(m / 2).max(1) - 1];
    let three_q = running[(3 * m / 4).max(1) - 1];
    if rel_move(end, half) < PLATEAU_TOL {
        Verdict::Holds
    } else if rel_move(end, three_q) >= PLATEAU_TOL {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    }
}

fn check_window(n: u64, min: u64) -> Result<()> {
    if n < min {
        return Err(Error::InvalidParameter(format!("window N = {n} must be at least {min}")));
    }
    Ok(())
}

// Analytic knowledge of the families. `None` means "decide on the window".

/// `(EXP)` at a fixed base `b`.
fn analytic_exp_at(spec: &SequenceSpec, b: f64) -> Option<bool> {
    let ln_b = b.ln();
    match *spec {
        SequenceSpec::Geometric { b: base, .. } => Some(ln_b <= base.ln() * (1.0 + 1e-12)),
        SequenceSpec::ExpPoly { a, lambda } => Some(if lambda > 1.0 {
            true
        } else if lambda == 1.0 {
            ln_b <= a * (1.0 + 1e-12)
        } else {
            false
        }),
        SequenceSpec::ExpExp { .. } => Some(true),
        SequenceSpec::Polynomial { .. } | SequenceSpec::PolyLog { .. } | SequenceSpec::ExpLog { .. } => Some(false),
        SequenceSpec::Explicit { .. } => None,
    }
}

/// `(EXP)` for some `b > 1`; shared by all four characterizations.
fn analytic_exp_exists(spec: &SequenceSpec) -> Option<bool> {
    match *spec {
        SequenceSpec::ExpPoly { lambda, .. } => Some(lambda >= 1.0),
        SequenceSpec::Explicit { .. } => None,
        _ => analytic_exp_at(spec, 1.0 + 1e-9),
    }
}

/// `σ_n ≍ σ_{2n}`; shared by doubling, almost-increase (for some α) and geometric mean.
fn analytic_doubling(spec: &SequenceSpec) -> Option<bool> {
    match *spec {
        SequenceSpec::Polynomial { .. } | SequenceSpec::PolyLog { .. } => Some(true),
        SequenceSpec::ExpLog { lambda, .. } => Some(lambda <= 1.0),
        SequenceSpec::Geometric { .. } | SequenceSpec::ExpPoly { .. } | SequenceSpec::ExpExp { .. } => Some(false),
        SequenceSpec::Explicit { .. } => None,
    }
}

/// `inf_{k≤n} σ_n n^α / (σ_k k^α) > 0` at a given `α`.
fn analytic_alm_incr(spec: &SequenceSpec, alpha: f64) -> Option<bool> {
    let at_least = |x: f64, y: f64| x >= y * (1.0 - 1e-12);
    match *spec {
        SequenceSpec::Polynomial { alpha: a0, .. } => Some(at_least(alpha, a0)),
        SequenceSpec::PolyLog { alpha: a0, beta, .. } => {
            Some(alpha > a0 * (1.0 + 1e-12) || (at_least(alpha, a0) && beta <= 0.0))
        }
        SequenceSpec::ExpLog { a, lambda } => Some(if lambda < 1.0 {
            true
        } else if lambda == 1.0 {
            at_least(alpha, a)
        } else {
            false
        }),
        SequenceSpec::Geometric { .. } | SequenceSpec::ExpPoly { .. } | SequenceSpec::ExpExp { .. } => Some(false),
        SequenceSpec::Explicit { .. } => None,
    }
}

/// `(ALP, AMP)` for a family in `ℓ_r`.
fn analytic_alp_amp(spec: &SequenceSpec, r: f64) -> Option<(bool, bool)> {
    match *spec {
        SequenceSpec::Geometric { .. } | SequenceSpec::ExpPoly { .. } | SequenceSpec::ExpExp { .. } => {
            Some((true, false))
        }
        SequenceSpec::ExpLog { lambda, .. } => Some(if lambda > 1.0 { (true, false) } else { (true, true) }),
        SequenceSpec::Polynomial { .. } => Some((true, true)),
        SequenceSpec::PolyLog { alpha, .. } => {
            // αr = 1 forces βr > 1, and then τ_n^r ≈ ln(n)^{1-βr} ≫ n σ_n^r.
            Some(if alpha * r > 1.0 { (true, true) } else { (false, true) })
        }
        SequenceSpec::Explicit { .. } => None,
    }
}

/// `τ_n ≍ τ_{2n}`, from the asymptotics of `τ` itself: polynomial or logarithmic
/// tails double, tails that are `σ_n` times a power of `n` or `ln n` inherit the
/// failure from `σ`.
fn analytic_tail_doubling(spec: &SequenceSpec) -> Option<bool> {
    match *spec {
        SequenceSpec::Polynomial { .. } | SequenceSpec::PolyLog { .. } => Some(true),
        SequenceSpec::ExpLog { lambda, .. } => Some(lambda <= 1.0),
        SequenceSpec::Geometric { .. } | SequenceSpec::ExpPoly { .. } | SequenceSpec::ExpExp { .. } => Some(false),
        SequenceSpec::Explicit { .. } => None,
    }
}

/// `sup_{k≤n≤N} σ_n b^n / (σ_k b^k)` via a running minimum of the denominator.
pub fn check_exp(spec: &SequenceSpec, b: f64, window: u64) -> Result<ConditionReport> {
    if !(b > 1.0 && b.is_finite()) {
        return Err(Error::InvalidParameter(format!("EXP base b = {b} must exceed 1")));
    }
    check_window(window, 2)?;
    let table = SigmaTable::new(spec, window)?;
    let ln_b = b.ln();
    let mut scan = Scan::new(true);
    let mut floor = f64::INFINITY;
    let mut floor_at = 1;
    for n in 1..=window {
        let g = table.ln_sigma(n) + n as f64 * ln_b;
        if g < floor {
            floor = g;
            floor_at = n;
        }
        let ratio = if g == f64::NEG_INFINITY { f64::NEG_INFINITY } else { g - floor };
        scan.push(ratio, n, floor_at);
    }
    Ok(ConditionReport::new(ConditionId::Exp { b }, window, scan, analytic_exp_at(spec, b)))
}

/// The base grid `2^{j/8}`, `j = 1..64`, used to search for an `(EXP)` base.
pub fn exp_base_grid() -> impl Iterator<Item = f64> {
    (1..=64).map(|j| 2f64.powf(j as f64 / 8.0))
}

/// `(EXP)` at the largest grid base for which it holds, or at the smallest
/// grid base if it holds for none.
pub fn check_exp_auto(spec: &SequenceSpec, window: u64) -> Result<ConditionReport> {
    let mut best = None;
    for b in exp_base_grid() {
        let report = check_exp(spec, b, window)?;
        if report.verdict == Verdict::Holds {
            best = Some(report);
        } else if best.is_some() {
            break;
        }
    }
    match best {
        Some(r) => Ok(r),
        None => check_exp(spec, 2f64.powf(1.0 / 8.0), window),
    }
}

/// Smallest `n₀ ≤ N/2` whose contraction factor `max_k σ_{k+n₀}/σ_k` has settled below 1.
pub fn check_exp_shifted(spec: &SequenceSpec, window: u64) -> Result<ConditionReport> {
    check_window(window, 4)?;
    let table = SigmaTable::new(spec, window)?;
    let mut fallback = None;
    for n0 in 1..=window / 2 {
        let mut scan = Scan::new(true);
        for k in 1..=window - n0 {
            let lk = table.ln_sigma(k);
            let ln = table.ln_sigma(k + n0);
            let ratio = if ln == f64::NEG_INFINITY { f64::NEG_INFINITY } else { ln - lk };
            scan.push(ratio, k + n0, k);
        }
        let settled = scan.verdict() == Verdict::Holds && scan.best < 0.0;
        if settled {
            return Ok(ConditionReport::new(ConditionId::ExpShifted, window, scan, analytic_exp_exists(spec)));
        }
        if fallback.is_none() {
            fallback = Some(scan);
        }
    }
    let mut scan = fallback.expect("window ≥ 4 gives at least one shift");
    // No shift settled below 1: the window verdict is a failure unless still moving.
    if scan.verdict() == Verdict::Holds {
        scan.running.push(f64::INFINITY);
    }
    Ok(ConditionReport::new(ConditionId::ExpShifted, window, scan, analytic_exp_exists(spec)))
}

/// `max_{n≤N} σ_n v_n` with `v_n = (Σ_{k≤n} σ_k^{-s})^{1/s}`.
pub fn check_exp_partial_sum(spec: &SequenceSpec, s: f64, window: u64) -> Result<ConditionReport> {
    check_window(window, 2)?;
    let table = SigmaTable::new(spec, window)?;
    let v = table.ln_partial_sums_inv(s)?;
    let mut scan = Scan::new(true);
    for n in 1..=window {
        scan.push(table.ln_sigma(n) + v[n as usize - 1], n, n);
    }
    Ok(ConditionReport::new(ConditionId::ExpPartialSum { s }, window, scan, analytic_exp_exists(spec)))
}

/// `max_{n≤N} τ_n / σ_n`.
pub fn check_exp_tail(spec: &SequenceSpec, r: f64, rtol: f64, window: u64) -> Result<ConditionReport> {
    check_window(window, 2)?;
    let table = SigmaTable::new(spec, window)?;
    let tau = tail_prefix(spec, window, r, rtol)?;
    let mut scan = Scan::new(true);
    for n in 1..=window {
        let ls = table.ln_sigma(n);
        let ratio = if ls == f64::NEG_INFINITY { f64::NEG_INFINITY } else { tau[n as usize - 1].ln() - ls };
        scan.push(ratio, n, n);
    }
    Ok(ConditionReport::new(ConditionId::ExpTail { r }, window, scan, analytic_exp_exists(spec)))
}

/// `min_{n≤N/2} σ_{2n} / σ_n`.
pub fn check_doubling(spec: &SequenceSpec, window: u64) -> Result<ConditionReport> {
    check_window(window, 4)?;
    let table = SigmaTable::new(spec, window)?;
    let scan = doubling_scan(&table, window);
    Ok(ConditionReport::new(ConditionId::Doubling, window, scan, analytic_doubling(spec)))
}

fn doubling_scan(table: &SigmaTable, window: u64) -> Scan {
    let mut scan = Scan::new(false);
    for n in 1..=window / 2 {
        let ratio = table.ln_sigma(2 * n) - table.ln_sigma(n);
        scan.push(if ratio.is_nan() { f64::NEG_INFINITY } else { ratio }, 2 * n, n);
    }
    scan
}

/// `inf_{k≤n≤N} σ_n n^α / (σ_k k^α)` via a running maximum of the denominator.
pub fn check_alm_incr(spec: &SequenceSpec, alpha: f64, window: u64) -> Result<ConditionReport> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must be positive")));
    }
    check_window(window, 2)?;
    let table = SigmaTable::new(spec, window)?;
    let mut scan = Scan::new(false);
    let mut peak = f64::NEG_INFINITY;
    let mut peak_at = 1;
    for n in 1..=window {
        let h = table.ln_sigma(n) + alpha * (n as f64).ln();
        if h > peak {
            peak = h;
            peak_at = n;
        }
        let ratio = if h == f64::NEG_INFINITY { f64::NEG_INFINITY } else { h - peak };
        scan.push(ratio, n, peak_at);
    }
    Ok(ConditionReport::new(ConditionId::AlmIncr { alpha }, window, scan, analytic_alm_incr(spec, alpha)))
}

/// The exponent grid `2^{j/4}`, `j = -8..24`, used to search for an almost-increase exponent.
pub fn alpha_grid() -> impl Iterator<Item = f64> {
    (-8..=24).map(|j| 2f64.powf(j as f64 / 4.0))
}

/// Almost-increase at the smallest grid exponent for which it holds, or at the
/// largest grid exponent if it holds for none.
pub fn check_alm_incr_auto(spec: &SequenceSpec, window: u64) -> Result<ConditionReport> {
    let mut last = None;
    for alpha in alpha_grid() {
        let report = check_alm_incr(spec, alpha, window)?;
        if report.verdict == Verdict::Holds {
            return Ok(report);
        }
        last = Some(report);
    }
    Ok(last.expect("grid is nonempty"))
}

/// `max_{n≤N} GM_n / σ_n`.
pub fn check_geo_mean(spec: &SequenceSpec, window: u64) -> Result<ConditionReport> {
    check_window(window, 2)?;
    let table = SigmaTable::new(spec, window)?;
    let mut scan = Scan::new(true);
    for n in 1..=window {
        let ls = table.ln_sigma(n);
        let ratio = if ls == f64::NEG_INFINITY { f64::INFINITY } else { table.ln_gm(n) - ls };
        scan.push(ratio, n, n);
    }
    Ok(ConditionReport::new(ConditionId::GeoMean, window, scan, analytic_doubling(spec)))
}

fn alp_amp_scan(spec: &SequenceSpec, r: f64, rtol: f64, window: u64, maximize: bool) -> Result<Scan> {
    let table = SigmaTable::new(spec, window)?;
    let tau = tail_prefix(spec, window, r, rtol)?;
    let mut scan = Scan::new(maximize);
    for n in 1..=window {
        let denom = table.ln_sigma(n) + (n as f64).ln() / r;
        let t = tau[n as usize - 1].ln();
        let ratio = if denom == f64::NEG_INFINITY {
            if maximize {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            }
        } else {
            t - denom
        };
        scan.push(ratio, n, n);
    }
    Ok(scan)
}

fn unbounded_report(condition: ConditionId, window: u64) -> ConditionReport {
    ConditionReport {
        condition,
        verdict: Verdict::Fails,
        window_verdict: Verdict::Inconclusive,
        analytic: true,
        window,
        witness: None,
        plateau_tol: PLATEAU_TOL,
        note: Some("operator unbounded: sequence is not r-summable".into()),
    }
}

fn alp_amp(spec: &SequenceSpec, r: f64, rtol: f64, window: u64, alp: bool) -> Result<ConditionReport> {
    check_window(window, 2)?;
    let id = if alp { ConditionId::Alp { r } } else { ConditionId::Amp { r } };
    match ensure_summable(spec, r) {
        Err(Error::Divergent { .. }) => return Ok(unbounded_report(id, window)),
        other => other?,
    }
    let scan = alp_amp_scan(spec, r, rtol, window, alp)?;
    let analytic = analytic_alp_amp(spec, r).map(|(a, m)| if alp { a } else { m });
    Ok(ConditionReport::new(id, window, scan, analytic))
}

/// `max_{n≤N} τ_n / (σ_n n^{1/r})`.
pub fn check_alp(spec: &SequenceSpec, r: f64, rtol: f64, window: u64) -> Result<ConditionReport> {
    alp_amp(spec, r, rtol, window, true)
}

/// `min_{n≤N} τ_n / (σ_n n^{1/r})`.
pub fn check_amp(spec: &SequenceSpec, r: f64, rtol: f64, window: u64) -> Result<ConditionReport> {
    alp_amp(spec, r, rtol, window, false)
}

/// Doubling of `τ`, scanned on the explicit sequence `τ_1..τ_N`.
pub fn check_tail_doubling(spec: &SequenceSpec, r: f64, rtol: f64, window: u64) -> Result<ConditionReport> {
    check_window(window, 4)?;
    let tau = tail_prefix(spec, window, r, rtol)?;
    let values: Vec<f64> = tau.iter().map(|t| t.value()).collect();
    let scan = if values.iter().all(|v| *v > 0.0) {
        let tau_spec = SequenceSpec::explicit(values, TailModel::None)?;
        doubling_scan(&SigmaTable::new(&tau_spec, window)?, window)
    } else {
        // Underflowed or finite-rank tails: scan the log values directly.
        let mut scan = Scan::new(false);
        for n in 1..=window / 2 {
            let ratio = tau[2 * n as usize - 1].ln() - tau[n as usize - 1].ln();
            scan.push(if ratio.is_nan() { f64::NEG_INFINITY } else { ratio }, 2 * n, n);
        }
        scan
    };
    Ok(ConditionReport::new(ConditionId::TailDoubling { r }, window, scan, analytic_tail_doubling(spec)))
}

/// The branch-appropriate battery: `p < q` gives EXP and doubling, `p > q` adds ALP and AMP in front.
pub fn classify(spec: &SequenceSpec, pair: &ExponentPair, window: u64, rtol: f64) -> Result<Vec<ConditionReport>> {
    match pair.branch() {
        Branch::Equal => Err(Error::WrongBranch { expected: "!=", p: pair.p(), q: pair.q() }),
        Branch::Embedding => Ok(vec![check_exp_auto(spec, window)?, check_doubling(spec, window)?]),
        Branch::Contraction => {
            let r = pair.r()?;
            let (alp, amp) = rayon::join(|| check_alp(spec, r, rtol, window), || check_amp(spec, r, rtol, window));
            Ok(vec![alp?, amp?, check_exp_auto(spec, window)?, check_doubling(spec, window)?])
        }
    }
}
