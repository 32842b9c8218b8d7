//! Entropy-number bounds for `D_σ: ℓ_p → ℓ_q`.
//!
//! All forms except the tail form are suprema over `k ≥ 1`. For `p < q` the
//! scan stops once a proven envelope of every later term falls below the
//! running best; for `p > q` the scan range is log-proportional in `n` and the
//! result is flagged heuristic unless an envelope closes.

mod evaluator;
mod volume;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use evaluator::{BoundEvaluator, MAX_CERTIFIED_SCAN, MAX_HEURISTIC_SCAN};
pub use volume::{ln_volume_unit_ball, volume_unit_ball, VolumeRatio};

use crate::error::{Error, Result};
use crate::exponent::{Branch, ExponentPair};
use crate::logreal::LogReal;
use crate::sequence::SequenceSpec;

use evaluator::Attempt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BoundForm {
    /// `sup_k k^{-1/s} (Π_{i≤k}(σ_i + k^{1/s}σ_k)/n)^{1/k}`
    #[serde(rename = "UB-p<q")]
    UbLt,
    /// `sup_k (Π_{i≤k}(τ_k + k^{1/r}σ_i)/n)^{1/k}`
    #[serde(rename = "UB-p>q")]
    UbGt,
    /// `sup_k k^{-1/s} GM_k n^{-1/k}`
    #[serde(rename = "OPT-EXP")]
    OptExp,
    /// `sup_k k^{1/r} GM_k n^{-1/k}`
    #[serde(rename = "OPT-ALP")]
    OptAlp,
    /// `τ_{⌊log2 n⌋+1}`
    #[serde(rename = "OPT-AMP")]
    OptAmp,
    /// `sup_k (λ^k(B_p)/λ^k(B_q) · Π_{i≤k}σ_i / n)^{1/k}`, a rigorous lower bound.
    #[serde(rename = "LB-volume")]
    Lb,
    /// `4 C_p C_q sup_k (λ^k(B_p)/λ^k(B_q) · Π_{i≤k}(2C_qσ_i + k^{1/s}σ_k)/n)^{1/k}`
    #[serde(rename = "UB-const-p<q")]
    UbConstLt,
    /// `4 C_p C_q sup_k (Π_{i≤k}(τ_k + 2C_p k^{1/r}σ_i)/n)^{1/k}`
    #[serde(rename = "UB-const-p>q")]
    UbConstGt,
}

impl BoundForm {
    pub const ALL: [BoundForm; 8] = [
        BoundForm::UbLt,
        BoundForm::UbGt,
        BoundForm::OptExp,
        BoundForm::OptAlp,
        BoundForm::OptAmp,
        BoundForm::Lb,
        BoundForm::UbConstLt,
        BoundForm::UbConstGt,
    ];

    /// The branch a form belongs to; `None` for the lower bound, which covers both.
    pub fn branch(self) -> Option<Branch> {
        match self {
            BoundForm::UbLt | BoundForm::OptExp | BoundForm::UbConstLt => Some(Branch::Embedding),
            BoundForm::UbGt | BoundForm::OptAlp | BoundForm::OptAmp | BoundForm::UbConstGt => Some(Branch::Contraction),
            BoundForm::Lb => None,
        }
    }

    /// Every form that applies on `branch`, general bounds first.
    pub fn for_branch(branch: Branch) -> Vec<BoundForm> {
        BoundForm::ALL.into_iter().filter(|f| f.branch().is_none_or(|b| b == branch)).collect()
    }

    pub fn id(self) -> &'static str {
        match self {
            BoundForm::UbLt => "UB-p<q",
            BoundForm::UbGt => "UB-p>q",
            BoundForm::OptExp => "OPT-EXP",
            BoundForm::OptAlp => "OPT-ALP",
            BoundForm::OptAmp => "OPT-AMP",
            BoundForm::Lb => "LB-volume",
            BoundForm::UbConstLt => "UB-const-p<q",
            BoundForm::UbConstGt => "UB-const-p>q",
        }
    }
}

impl fmt::Display for BoundForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for BoundForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundForm::ALL
            .into_iter()
            .find(|f| f.id().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown bound form '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certificate {
    /// A proven envelope excludes every `k` outside the scanned range.
    Certified,
    Heuristic,
}

/// Inclusive range of scanned `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KRange {
    pub first: u64,
    pub last: u64,
}

impl KRange {
    pub fn contains(&self, k: u64) -> bool {
        self.first <= k && k <= self.last
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub form: BoundForm,
    pub n: u64,
    pub value: LogReal,
    /// Smallest maximising `k`; the tail index for the tail form.
    pub argmax_k: u64,
    pub k_scanned: KRange,
    pub certificate: Certificate,
}

fn single(spec: &SequenceSpec, pair: ExponentPair, n: u64, rtol: f64, form: BoundForm) -> Result<BoundResult> {
    BoundEvaluator::new(spec, pair, rtol)?.evaluate(form, n)
}

// The embedding-branch forms never touch tails; any valid tolerance will do.
const UNUSED_RTOL: f64 = 1e-9;

pub fn upper_bound_p_lt_q(spec: &SequenceSpec, pair: ExponentPair, n: u64) -> Result<BoundResult> {
    single(spec, pair, n, UNUSED_RTOL, BoundForm::UbLt)
}

pub fn upper_bound_p_gt_q(spec: &SequenceSpec, pair: ExponentPair, n: u64, rtol: f64) -> Result<BoundResult> {
    single(spec, pair, n, rtol, BoundForm::UbGt)
}

pub fn optimal_form_exp(spec: &SequenceSpec, pair: ExponentPair, n: u64) -> Result<BoundResult> {
    single(spec, pair, n, UNUSED_RTOL, BoundForm::OptExp)
}

pub fn optimal_form_alp(spec: &SequenceSpec, pair: ExponentPair, n: u64, rtol: f64) -> Result<BoundResult> {
    single(spec, pair, n, rtol, BoundForm::OptAlp)
}

pub fn optimal_form_amp(spec: &SequenceSpec, pair: ExponentPair, n: u64, rtol: f64) -> Result<BoundResult> {
    single(spec, pair, n, rtol, BoundForm::OptAmp)
}

pub fn lower_bound(spec: &SequenceSpec, pair: ExponentPair, n: u64, rtol: f64) -> Result<BoundResult> {
    single(spec, pair, n, rtol, BoundForm::Lb)
}

/// The constant-carrying upper bound of the pair's branch.
pub fn upper_bound_with_constants(spec: &SequenceSpec, pair: ExponentPair, n: u64, rtol: f64) -> Result<BoundResult> {
    let form = match pair.branch() {
        Branch::Contraction => BoundForm::UbConstGt,
        _ => BoundForm::UbConstLt,
    };
    single(spec, pair, n, rtol, form)
}

/// Evaluates `forms` at every `n`, ordered by `n` first, then by the order of `forms`.
/// Grid points run in parallel; tables grow between rounds, so output is deterministic.
pub fn bound_curve(
    spec: &SequenceSpec,
    pair: ExponentPair,
    n_list: &[u64],
    forms: &[BoundForm],
    rtol: f64,
) -> Result<Vec<BoundResult>> {
    let mut ev = BoundEvaluator::new(spec, pair, rtol)?;
    curve_with(&mut ev, n_list, forms)
}

/// [`bound_curve`] on an existing evaluator, reusing its tables.
pub fn curve_with(ev: &mut BoundEvaluator, n_list: &[u64], forms: &[BoundForm]) -> Result<Vec<BoundResult>> {
    let jobs: Vec<(u64, BoundForm)> = n_list.iter().flat_map(|&n| forms.iter().map(move |&f| (n, f))).collect();
    let mut out: Vec<Option<BoundResult>> = vec![None; jobs.len()];
    loop {
        let pending: Vec<usize> = (0..jobs.len()).filter(|&i| out[i].is_none()).collect();
        if pending.is_empty() {
            break;
        }
        let shared = &*ev;
        let attempts = pending
            .par_iter()
            .map(|&i| shared.attempt(jobs[i].1, jobs[i].0).map(|a| (i, a)))
            .collect::<Result<Vec<_>>>()?;
        let mut need = 0;
        for (i, attempt) in attempts {
            match attempt {
                Attempt::Done(result) => out[i] = Some(result),
                Attempt::Grow(k) => need = need.max(k),
            }
        }
        if need > 0 {
            ev.grow_to(need)?;
        }
    }
    Ok(out.into_iter().map(|r| r.expect("every job resolved")).collect())
}
