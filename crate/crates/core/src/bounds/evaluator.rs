//! Cached evaluation of the sup-over-k bound formulas.
//!
//! Every form is `ln T(k, n) = w(k) + (L(k) - ln n)/k` with `L(k)` independent
//! of `n`, so the O(k) products behind `L(k)` are computed once per `k` and a
//! whole grid of `n` costs O(K) per point. Tables grow in blocks
//! `(256·2^{j-1}, 256·2^j]`; each block derives its tails from one certified
//! evaluation at its top, so stored values never depend on growth history.

use rayon::prelude::*;

use super::volume::{ln_ratio_root_envelope, VolumeRatio};
use super::{BoundForm, BoundResult, Certificate, KRange};
use crate::error::{Error, Result};
use crate::exponent::{Branch, ExponentPair};
use crate::logreal::{log_add_exp, CompensatedSum, LogReal};
use crate::sequence::{ensure_summable, tail_estimate, SequenceSpec, SigmaTable};

const BLOCK: u64 = 256;

/// Largest `k` a certified scan visits before giving up and flagging the result heuristic.
pub const MAX_CERTIFIED_SCAN: u64 = 1 << 14;

/// Largest `k` a heuristic scan may double up to.
pub const MAX_HEURISTIC_SCAN: u64 = 1 << 13;

/// Envelope comparisons demand this much headroom in ln, absorbing rounding in both sides.
const LN_ENVELOPE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
enum Side {
    Lt { inv_s: f64 },
    Gt { inv_r: f64, r: f64 },
}

pub(crate) enum Attempt {
    Done(BoundResult),
    Grow(u64),
}

/// All bound forms for one `(σ, p, q)`, sharing sigma, tail and product tables.
#[derive(Debug, Clone)]
pub struct BoundEvaluator {
    spec: SequenceSpec,
    pair: ExponentPair,
    rtol: f64,
    side: Side,
    ln_const: f64,
    cap: u64,
    table: SigmaTable,
    /// `ln τ_k`, contraction branch only.
    ln_tau: Vec<f64>,
    /// `ln Σ_{i≤k} σ_i`, contraction branch only.
    ln_sigma_sum: Vec<f64>,
    /// `ln λ^k(B_p)/λ^k(B_q)`.
    ln_vol_ratio: Vec<f64>,
    /// `L(k)` of the constant-free general upper bound.
    ln_general: Vec<f64>,
    /// `L(k)` of the constant-carrying upper bound, without the `4 C_p C_q` prefactor.
    ln_explicit: Vec<f64>,
}

impl BoundEvaluator {
    /// Fails with `WrongBranch` for `p = q` and, for `p > q`, with `Divergent` unless `σ ∈ ℓ_r`.
    pub fn new(spec: &SequenceSpec, pair: ExponentPair, rtol: f64) -> Result<Self> {
        spec.validate()?;
        if !(rtol > 0.0 && rtol < 1.0) {
            return Err(Error::InvalidParameter(format!("rtol = {rtol} must lie in (0, 1)")));
        }
        let side = match pair.branch() {
            Branch::Equal => return Err(Error::WrongBranch { expected: "!=", p: pair.p(), q: pair.q() }),
            Branch::Embedding => Side::Lt { inv_s: pair.inv_s()? },
            Branch::Contraction => {
                let r = pair.r()?;
                ensure_summable(spec, r)?;
                Side::Gt { inv_r: pair.inv_r()?, r }
            }
        };
        let mut ev = BoundEvaluator {
            spec: spec.clone(),
            pair,
            rtol,
            side,
            ln_const: (4.0 * pair.c_p() * pair.c_q()).ln(),
            cap: 0,
            table: SigmaTable::new(spec, 0)?,
            ln_tau: Vec::new(),
            ln_sigma_sum: Vec::new(),
            ln_vol_ratio: Vec::new(),
            ln_general: Vec::new(),
            ln_explicit: Vec::new(),
        };
        ev.grow_to(BLOCK)?;
        Ok(ev)
    }

    pub fn pair(&self) -> ExponentPair {
        self.pair
    }

    pub fn spec(&self) -> &SequenceSpec {
        &self.spec
    }

    /// Number of indices currently tabulated.
    pub fn capacity(&self) -> u64 {
        self.cap
    }

    /// `ln τ_k` for `k ≤ capacity`, contraction branch only.
    pub fn ln_tail(&self, k: u64) -> Option<f64> {
        self.ln_tau.get((k as usize).checked_sub(1)?).copied()
    }

    /// Extends every table to cover at least `1..=k`.
    pub fn grow_to(&mut self, k: u64) -> Result<()> {
        while self.cap < k {
            let next = if self.cap == 0 { BLOCK } else { self.cap * 2 };
            self.extend_block(next)?;
        }
        Ok(())
    }

    fn extend_block(&mut self, top: u64) -> Result<()> {
        let bottom = self.cap;
        self.table.extend(&self.spec, top)?;
        let (p, q) = (self.pair.p(), self.pair.q());
        for k in bottom + 1..=top {
            self.ln_vol_ratio.push(VolumeRatio::new(p, q, k).log_ratio);
        }
        if let Side::Gt { r, .. } = self.side {
            let last = tail_estimate(&self.spec, top, r, self.rtol)?.value.ln();
            let mut block = vec![0.0; (top - bottom) as usize];
            let mut running = r * last;
            let top_slot = block.len() - 1;
            block[top_slot] = last;
            for k in (bottom + 1..top).rev() {
                running = log_add_exp(running, r * self.table.ln_sigma(k));
                block[(k - bottom - 1) as usize] = running / r;
            }
            self.ln_tau.extend(block);
            let mut sum = self.ln_sigma_sum.last().copied().unwrap_or(f64::NEG_INFINITY);
            for k in bottom + 1..=top {
                sum = log_add_exp(sum, self.table.ln_sigma(k));
                self.ln_sigma_sum.push(sum);
            }
        }
        let products: Vec<(f64, f64)> = (bottom + 1..=top).into_par_iter().map(|k| self.products_at(k)).collect();
        for (general, explicit) in products {
            self.ln_general.push(general);
            self.ln_explicit.push(explicit);
        }
        self.cap = top;
        Ok(())
    }

    /// `(L_general(k), L_explicit(k))`: the `k`-fold log-products of both upper bounds.
    fn products_at(&self, k: u64) -> (f64, f64) {
        let ln_k = (k as f64).ln();
        let sigmas = &self.table.ln_sigmas()[..k as usize];
        match self.side {
            Side::Lt { inv_s } => {
                // Π (σ_i + k^{1/s} σ_k) and Π (2 C_q σ_i + k^{1/s} σ_k)
                let shared = inv_s * ln_k + sigmas[k as usize - 1];
                let ln_2cq = (2.0 * self.pair.c_q()).ln();
                (
                    ln_product(sigmas.iter().map(|&l| log_add_exp(l, shared))),
                    ln_product(sigmas.iter().map(|&l| log_add_exp(ln_2cq + l, shared))),
                )
            }
            Side::Gt { inv_r, .. } => {
                // Π (τ_k + k^{1/r} σ_i) and Π (τ_k + 2 C_p k^{1/r} σ_i)
                let ln_tau = self.ln_tau[k as usize - 1];
                let weight = inv_r * ln_k;
                let ln_2cp = (2.0 * self.pair.c_p()).ln();
                (
                    ln_product(sigmas.iter().map(|&l| log_add_exp(ln_tau, weight + l))),
                    ln_product(sigmas.iter().map(|&l| log_add_exp(ln_tau, ln_2cp + weight + l))),
                )
            }
        }
    }

    fn check_form(&self, form: BoundForm) -> Result<()> {
        let ok = match self.side {
            Side::Lt { .. } => form.branch() != Some(Branch::Contraction),
            Side::Gt { .. } => form.branch() != Some(Branch::Embedding),
        };
        if ok {
            Ok(())
        } else {
            let expected = if form.branch() == Some(Branch::Embedding) { "<" } else { ">" };
            Err(Error::WrongBranch { expected, p: self.pair.p(), q: self.pair.q() })
        }
    }

    /// `ln T(k, n)` of a sup-over-k form; `k ≤ capacity`.
    pub fn ln_term(&self, form: BoundForm, k: u64, n: u64) -> f64 {
        let i = k as usize - 1;
        let (ln_k, ln_n, kf) = ((k as f64).ln(), (n as f64).ln(), k as f64);
        let gm = |num: f64| (num - ln_n) / kf;
        let prod = self.table.ln_product(k);
        match (form, self.side) {
            (BoundForm::UbLt, Side::Lt { inv_s }) => -inv_s * ln_k + gm(self.ln_general[i]),
            (BoundForm::OptExp, Side::Lt { inv_s }) => -inv_s * ln_k + gm(prod),
            (BoundForm::OptAlp, Side::Gt { inv_r, .. }) => inv_r * ln_k + gm(prod),
            (BoundForm::UbGt, Side::Gt { .. }) => gm(self.ln_general[i]),
            (BoundForm::Lb, _) => gm(self.ln_vol_ratio[i] + prod),
            (BoundForm::UbConstLt, Side::Lt { .. }) => self.ln_const + gm(self.ln_vol_ratio[i] + self.ln_explicit[i]),
            (BoundForm::UbConstGt, Side::Gt { .. }) => self.ln_const + gm(self.ln_explicit[i]),
            _ => panic!("{form:?} has no per-k term on this branch"),
        }
    }

    /// Upper bound on `ln T(k, n)` for every `k ≥ k0` and every `n ≥ 1`; `k0 ≤ capacity`.
    /// `None` when no envelope is available.
    pub fn ln_envelope(&self, form: BoundForm, k0: u64) -> Option<f64> {
        let ln_sigma = self.table.ln_sigma(k0);
        if ln_sigma == f64::NEG_INFINITY {
            // σ vanishes from k0 on, and with it every product through index k0
            return Some(f64::NEG_INFINITY);
        }
        let ln_gm = self.table.ln_gm(k0);
        let kf = k0 as f64;
        match self.side {
            Side::Lt { inv_s } => {
                // GM_k ≤ GM_{k0}, n^{-1/k} ≤ 1, and σ_i + c σ_k ≤ (1 + c) σ_i
                let shrink = -inv_s * kf.ln();
                let (p, q) = (self.pair.p(), self.pair.q());
                Some(match form {
                    BoundForm::UbLt => ln_gm + shrink.exp().ln_1p(),
                    BoundForm::OptExp => ln_gm + shrink,
                    // B_p ⊂ B_q caps the ratio at 1
                    BoundForm::Lb => ln_gm + ln_ratio_root_envelope(p, q, k0).min(0.0),
                    BoundForm::UbConstLt => {
                        let spread = (2.0 * self.pair.c_q() * shrink.exp()).ln_1p();
                        self.ln_const + ln_ratio_root_envelope(p, q, k0) + spread + ln_gm
                    }
                    _ => unreachable!(),
                })
            }
            Side::Gt { inv_r, r } => {
                // AM-GM plus Hölder on Σ_{k0≤i≤k} σ_i need 1/r - 1 ≤ 0
                if r < 1.0 {
                    return None;
                }
                let ln_tau = self.ln_tau[k0 as usize - 1] + (2.0 * self.rtol).ln_1p();
                let head = if k0 == 1 { f64::NEG_INFINITY } else { self.ln_sigma_sum[k0 as usize - 2] };
                let mean = (inv_r - 1.0) * kf.ln() + head;
                let ln_2cp = (2.0 * self.pair.c_p()).ln();
                Some(match form {
                    BoundForm::UbGt => log_add_exp(std::f64::consts::LN_2 + ln_tau, mean),
                    // ratio^{1/k} ≤ k^{1/r} because B_p ⊂ k^{1/r} B_q
                    BoundForm::OptAlp | BoundForm::Lb => log_add_exp(ln_tau, mean),
                    BoundForm::UbConstGt => {
                        self.ln_const + log_add_exp((1.0 + 2.0 * self.pair.c_p()).ln() + ln_tau, ln_2cp + mean)
                    }
                    _ => unreachable!(),
                })
            }
        }
    }

    /// Evaluates one form at one `n`, growing tables as needed.
    pub fn evaluate(&mut self, form: BoundForm, n: u64) -> Result<BoundResult> {
        loop {
            match self.attempt(form, n)? {
                Attempt::Done(result) => return Ok(result),
                Attempt::Grow(k) => self.grow_to(k)?,
            }
        }
    }

    pub(crate) fn attempt(&self, form: BoundForm, n: u64) -> Result<Attempt> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        self.check_form(form)?;
        match (form, self.side) {
            (BoundForm::OptAmp, _) => {
                let k = u64::from(63 - n.leading_zeros()) + 1;
                Ok(Attempt::Done(BoundResult {
                    form,
                    n,
                    value: LogReal::from_ln(self.ln_tau[k as usize - 1])?,
                    argmax_k: k,
                    k_scanned: KRange { first: k, last: k },
                    certificate: Certificate::Certified,
                }))
            }
            (_, Side::Lt { .. }) => self.certified_scan(form, n),
            (_, Side::Gt { .. }) => self.heuristic_scan(form, n),
        }
    }

    /// Scans `k = 1, 2, …` until the envelope of all later terms drops below the running best.
    fn certified_scan(&self, form: BoundForm, n: u64) -> Result<Attempt> {
        let mut best = Best::default();
        let mut k = 1;
        let certificate = loop {
            if k + 1 > self.cap {
                return Ok(Attempt::Grow(k + 1));
            }
            best.offer(k, self.ln_term(form, k, n));
            let envelope = self.ln_envelope(form, k + 1).expect("embedding envelopes always exist");
            if envelope + LN_ENVELOPE_SLACK <= best.ln {
                break Certificate::Certified;
            }
            if k >= MAX_CERTIFIED_SCAN {
                break Certificate::Heuristic;
            }
            k += 1;
        };
        best.finish(form, n, k, certificate)
    }

    /// Scans `k ≤ max(64, ⌈8 log2 n⌉)`, doubling the range while the maximiser sits in its
    /// last quarter. Certified only if the envelope closes or σ vanishes inside the range.
    fn heuristic_scan(&self, form: BoundForm, n: u64) -> Result<Attempt> {
        let mut hi = ((8.0 * (n as f64).log2()).ceil() as u64).max(64);
        let mut best = Best::default();
        let mut k = 1;
        loop {
            if hi + 1 > self.cap {
                return Ok(Attempt::Grow(hi + 1));
            }
            while k <= hi {
                if self.table.ln_sigma(k) == f64::NEG_INFINITY {
                    return best.finish(form, n, k, Certificate::Certified);
                }
                best.offer(k, self.ln_term(form, k, n));
                k += 1;
            }
            if best.argmax > hi - hi / 4 && hi < MAX_HEURISTIC_SCAN {
                hi = (2 * hi).min(MAX_HEURISTIC_SCAN);
            } else {
                break;
            }
        }
        let closed = self.ln_envelope(form, hi + 1).is_some_and(|envelope| envelope + LN_ENVELOPE_SLACK <= best.ln);
        let certificate = if closed { Certificate::Certified } else { Certificate::Heuristic };
        best.finish(form, n, hi, certificate)
    }
}

/// `Σ ln x_i` with compensation; a single zero factor makes the product zero.
fn ln_product(factors: impl Iterator<Item = f64>) -> f64 {
    let mut acc = CompensatedSum::default();
    for f in factors {
        if f == f64::NEG_INFINITY {
            return f;
        }
        acc.add(f);
    }
    acc.total()
}

/// Running maximum with ties resolved to the smallest `k`.
struct Best {
    ln: f64,
    argmax: u64,
}

impl Default for Best {
    fn default() -> Self {
        Best { ln: f64::NEG_INFINITY, argmax: 1 }
    }
}

impl Best {
    fn offer(&mut self, k: u64, ln: f64) {
        if ln > self.ln {
            self.ln = ln;
            self.argmax = k;
        }
    }

    fn finish(self, form: BoundForm, n: u64, last: u64, certificate: Certificate) -> Result<Attempt> {
        Ok(Attempt::Done(BoundResult {
            form,
            n,
            value: LogReal::from_ln(self.ln)?,
            argmax_k: self.argmax,
            k_scanned: KRange { first: 1, last: last.max(1) },
            certificate,
        }))
    }
}
