//! The invariant suite behind `verify`.
//!
//! Every check records its worst margin (nonnegative when it passes), the
//! number of cases it examined and the first counterexample it met.

use entrobound::bounds::{bound_curve, lower_bound, upper_bound_with_constants, BoundForm, VolumeRatio};
use entrobound::conditions::{
    check_alm_incr_auto, check_alp, check_amp, check_doubling, check_exp_auto, check_exp_partial_sum,
    check_exp_shifted, check_exp_tail, check_geo_mean, Verdict, DEFAULT_WINDOW,
};
use entrobound::exponent::fmt_exponent;
use entrobound::oracle::{
    covering_upper, entropy_bracket, mc_volume, volume_lower_nd, volumetric_cover_bound, FiniteDiag,
};
use entrobound::sequence::tail;
use entrobound::{Branch, ExponentPair, Result, SequenceSpec, TailModel};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::report::{Report, Row};

const RTOL: f64 = 1e-10;
const INF: f64 = f64::INFINITY;

pub fn matrix_specs() -> Vec<SequenceSpec> {
    vec![
        SequenceSpec::geometric(1.0, 2.0).expect("valid"),
        SequenceSpec::polynomial(1.0, 2.0).expect("valid"),
        SequenceSpec::poly_log(1.0, 1.0, 2.0).expect("valid"),
        SequenceSpec::exp_poly(1.0, 1.0).expect("valid"),
        SequenceSpec::exp_exp(1.0, 0.5).expect("valid"),
    ]
}

pub fn matrix_pairs() -> Vec<ExponentPair> {
    [(1.0, 2.0), (2.0, INF), (INF, 1.0), (2.0, 1.0)]
        .into_iter()
        .map(|(p, q)| ExponentPair::distinct(p, q).expect("valid"))
        .collect()
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub margin: f64,
    pub cases: u64,
    pub counterexample: Option<Value>,
}

impl Check {
    fn new(name: &'static str) -> Self {
        Check { name, margin: INF, cases: 0, counterexample: None }
    }

    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }

    /// Records one case; `margin < 0` marks a violation.
    fn case(&mut self, margin: f64, describe: impl FnOnce() -> Value) {
        self.cases += 1;
        self.margin = self.margin.min(margin);
        if !(margin >= 0.0) && self.counterexample.is_none() {
            self.counterexample = Some(describe());
        }
    }
}

fn pair_json(pair: ExponentPair) -> Value {
    json!({ "p": fmt_exponent(pair.p()), "q": fmt_exponent(pair.q()) })
}

fn summable_cases() -> Vec<(SequenceSpec, ExponentPair)> {
    let mut out = Vec::new();
    for spec in matrix_specs() {
        for pair in matrix_pairs() {
            if pair.branch() == Branch::Contraction
                && entrobound::sequence::ensure_summable(&spec, pair.r().expect("p > q")).is_err()
            {
                continue;
            }
            out.push((spec.clone(), pair));
        }
    }
    out
}

fn constant_form(pair: ExponentPair) -> BoundForm {
    if pair.branch() == Branch::Contraction {
        BoundForm::UbConstGt
    } else {
        BoundForm::UbConstLt
    }
}

fn sandwich(ns: &[u64]) -> Result<Check> {
    let mut check = Check::new("sandwich");
    for (spec, pair) in summable_cases() {
        let rows = bound_curve(&spec, pair, ns, &[BoundForm::Lb, constant_form(pair)], RTOL)?;
        for row in rows.chunks(2) {
            let (lb, ub) = (row[0].value.ln(), row[1].value.ln());
            check.case(ub - lb, || json!({ "sigma": spec.to_string(), "pair": pair_json(pair), "n": row[0].n, "ln_lb": lb, "ln_ub": ub }));
        }
    }
    Ok(check)
}

fn monotone(ns: &[u64]) -> Result<Check> {
    let mut check = Check::new("nonincreasing-in-n");
    for (spec, pair) in summable_cases() {
        let forms = BoundForm::for_branch(pair.branch());
        let rows = bound_curve(&spec, pair, ns, &forms, RTOL)?;
        for (f, form) in forms.iter().enumerate() {
            let values: Vec<(u64, f64)> =
                rows.iter().skip(f).step_by(forms.len()).map(|r| (r.n, r.value.ln())).collect();
            for w in values.windows(2) {
                check.case(w[0].1 - w[1].1 + 1e-12, || {
                    json!({ "sigma": spec.to_string(), "pair": pair_json(pair), "form": form.id(), "n": [w[0].0, w[1].0], "ln_values": [w[0].1, w[1].1] })
                });
            }
        }
    }
    Ok(check)
}

/// Exponential families carry no scale parameter; they are tested through their
/// finite-rank truncation to the values above `1e-250`.
fn scalable(spec: SequenceSpec) -> Result<SequenceSpec> {
    if spec.scaled(1.0).is_ok() {
        return Ok(spec);
    }
    let mut values = Vec::new();
    for n in 1u64.. {
        let v = spec.ln_sigma(n)?.exp();
        if v < 1e-250 || n > 4096 {
            break;
        }
        values.push(v);
    }
    SequenceSpec::explicit(values, TailModel::Zero)
}

fn homogeneity(ns: &[u64]) -> Result<Check> {
    const FACTOR: f64 = 3.7;
    let mut check = Check::new("one-homogeneity");
    for (spec, pair) in summable_cases() {
        let forms = BoundForm::for_branch(pair.branch());
        let spec = scalable(spec)?;
        let base = bound_curve(&spec, pair, ns, &forms, RTOL)?;
        let scaled = bound_curve(&spec.scaled(FACTOR)?, pair, ns, &forms, RTOL)?;
        for (a, b) in base.iter().zip(&scaled) {
            // past the rank both vanish, and 0 = 3.7 · 0 exactly
            let rel = if a.value.is_zero() && b.value.is_zero() {
                0.0
            } else {
                (b.value.ln() - a.value.ln() - FACTOR.ln()).exp_m1().abs()
            };
            check.case(1e-12 - rel, || json!({ "sigma": spec.to_string(), "pair": pair_json(pair), "form": a.form.id(), "n": a.n, "relative_error": rel }));
        }
    }
    Ok(check)
}

fn tail_recurrence(k_max: u64) -> Result<Check> {
    let mut check = Check::new("tail-recurrence");
    for spec in matrix_specs() {
        for r in [1.0, 2.0] {
            if entrobound::sequence::ensure_summable(&spec, r).is_err() {
                continue;
            }
            let taus: Vec<f64> = (1..=k_max + 1)
                .into_par_iter()
                .map(|k| tail(&spec, k, r, 1e-12).map(|t| t.ln()))
                .collect::<Result<_>>()?;
            for k in 1..=k_max {
                let lhs = r * taus[k as usize - 1];
                let rhs = entrobound::logreal::log_add_exp(r * taus[k as usize], r * spec.ln_sigma(k)?);
                let rel = (lhs - rhs).exp_m1().abs();
                check.case(1e-8 - rel, || json!({ "sigma": spec.to_string(), "r": r, "k": k, "relative_error": rel }));
            }
        }
    }
    Ok(check)
}

fn verdicts_agree(
    name: &'static str,
    reports: impl Fn(&SequenceSpec) -> Result<Vec<(String, Verdict)>>,
) -> Result<Check> {
    let mut check = Check::new(name);
    for spec in matrix_specs() {
        let verdicts = reports(&spec)?;
        let agree = verdicts.iter().all(|(_, v)| *v == verdicts[0].1);
        check.case(if agree { 0.0 } else { -1.0 }, || {
            json!({ "sigma": spec.to_string(), "verdicts": verdicts.iter().map(|(c, v)| json!({ "condition": c, "verdict": v.to_string() })).collect::<Vec<_>>() })
        });
    }
    Ok(check)
}

fn exp_equivalence(window: u64) -> Result<Check> {
    verdicts_agree("exp-characterizations-agree", |spec| {
        Ok([
            check_exp_auto(spec, window)?,
            check_exp_shifted(spec, window)?,
            check_exp_partial_sum(spec, 1.0, window)?,
            check_exp_tail(spec, 1.0, RTOL, window)?,
        ]
        .into_iter()
        .map(|r| (r.condition.to_string(), r.verdict))
        .collect())
    })
}

fn doubling_equivalence(window: u64) -> Result<Check> {
    verdicts_agree("doubling-characterizations-agree", |spec| {
        Ok([check_doubling(spec, window)?, check_alm_incr_auto(spec, window)?, check_geo_mean(spec, window)?]
            .into_iter()
            .map(|r| (r.condition.to_string(), r.verdict))
            .collect())
    })
}

fn exp_against_alp_amp(window: u64) -> Result<(Check, Check)> {
    let mut implies = Check::new("exp-implies-alp");
    let mut excludes = Check::new("exp-excludes-amp");
    for spec in matrix_specs() {
        let exp = check_exp_auto(&spec, window)?.verdict;
        for pair in matrix_pairs().into_iter().filter(|p| p.branch() == Branch::Contraction) {
            let r = pair.r()?;
            let alp = check_alp(&spec, r, RTOL, window)?.verdict;
            let amp = check_amp(&spec, r, RTOL, window)?.verdict;
            let describe = || json!({ "sigma": spec.to_string(), "r": r, "exp": exp.to_string(), "alp": alp.to_string(), "amp": amp.to_string() });
            let holds = |v: Verdict| v == Verdict::Holds;
            implies.case(if holds(exp) && !holds(alp) { -1.0 } else { 0.0 }, describe);
            excludes.case(if holds(exp) && holds(amp) { -1.0 } else { 0.0 }, describe);
        }
    }
    Ok((implies, excludes))
}

fn table1(window: u64) -> Result<Check> {
    let mut check = Check::new("table1-matrix");
    let (report, _) = crate::table1::run(window, RTOL)?;
    for row in &report.rows {
        let disagrees = matches!(row.get("agrees"), Some(crate::report::Cell::Bool(false)));
        check.case(if disagrees { -1.0 } else { 0.0 }, || serde_json::to_value(row).expect("row serializes"));
    }
    Ok(check)
}

fn volumes(samples: u64) -> Result<Check> {
    let mut check = Check::new("volume-monte-carlo");
    for p in [1.0, 2.0, INF] {
        for k in [2usize, 3] {
            let mc = mc_volume(p, k, samples, 7 + k as u64)?;
            let exact = entrobound::bounds::volume_unit_ball(p, k as u64).value();
            let diff = (mc.estimate - exact).abs();
            // a zero standard error means every sample hit; allow float rounding of the exact value
            let margin = (3.0 * mc.std_error + 1e-12 * exact - diff).min(0.02 * exact - diff);
            check.case(margin, || json!({ "p": fmt_exponent(p), "k": k, "exact": exact, "estimate": mc.estimate, "std_error": mc.std_error }));
        }
    }
    Ok(check)
}

fn volume_slope() -> Result<Check> {
    // spread of ln ratio^{1/k} - (1/q - 1/p) ln k over k ≤ 1024, and its drift over the last doubling
    let mut check = Check::new("volume-ratio-slope");
    for pair in matrix_pairs() {
        let res: Vec<f64> = (1..=1024).map(|k| VolumeRatio::new(pair.p(), pair.q(), k).slope_residual()).collect();
        let spread = res.iter().copied().fold(f64::NEG_INFINITY, f64::max) - res.iter().copied().fold(INF, f64::min);
        let drift = (res[1023] - res[511]).abs();
        check.case(
            (3.0 - spread).min(1e-2 - drift),
            || json!({ "pair": pair_json(pair), "spread": spread, "drift": drift }),
        );
    }
    Ok(check)
}

fn oracle_examples() -> Result<Check> {
    let mut check = Check::new("oracle-examples");
    let unit = FiniteDiag::new(vec![1.0], INF, INF)?;
    let b = entropy_bracket(&unit, 2)?;
    let margin = (0.5 - b.lo).min(b.hi - 0.5).min(0.02 - (b.hi - b.lo));
    check.case(margin, || json!({ "case": "interval e_2", "lo": b.lo, "hi": b.hi }));
    let disc = FiniteDiag::new(vec![1.0, 1.0], 2.0, 2.0)?;
    let vol = volume_lower_nd(&disc, 0.5)?;
    let cover = covering_upper(&disc, 0.5, 0.5 / 8.0)?;
    check.case(
        if vol == 4 && cover >= 4 { 0.0 } else { -1.0 },
        || json!({ "case": "disc", "volume": vol, "cover": cover }),
    );
    Ok(check)
}

fn oracle_diags(max_k: usize) -> Result<Vec<FiniteDiag>> {
    let exps = [0.5, 1.0, 2.0, INF];
    let sigmas = [vec![1.0], vec![1.0, 1.0], vec![1.0, 0.5], vec![1.0, 0.7, 0.4]];
    let mut out = Vec::new();
    for sigma in sigmas.iter().filter(|s| s.len() <= max_k) {
        for p in exps {
            for q in exps {
                out.push(FiniteDiag::new(sigma.clone(), p, q)?);
            }
        }
    }
    Ok(out)
}

fn covering_rhs(depth: i32) -> Result<Check> {
    let mut check = Check::new("volumetric-rhs-dominates-cover");
    for d in oracle_diags(2)? {
        for j in 1..=depth {
            let eps = 0.5f64.powi(j);
            let measured = covering_upper(&d, 2.0 * eps, eps / 4.0)? as f64;
            let rhs = volumetric_cover_bound(&d, eps)?.value();
            check.case(rhs.ln() - measured.ln(), || json!({ "sigma": d.sigma(), "pair": pair_json(d.pair()), "eps": eps, "cover_at_2eps": measured, "rhs": rhs }));
        }
    }
    Ok(check)
}

fn brackets_vs_bounds(ns: &[u64]) -> Result<Check> {
    let mut check = Check::new("bracket-meets-bounds");
    for d in oracle_diags(3)?.into_iter().filter(|d| d.p() != d.q()) {
        let spec = d.to_spec();
        for &n in ns {
            let b = entropy_bracket(&d, n)?;
            let lb = lower_bound(&spec, d.pair(), n, RTOL)?.value.value() * (1.0 - 1e-12);
            let ub = upper_bound_with_constants(&spec, d.pair(), n, RTOL)?.value.value() * (1.0 + 1e-12);
            // positive when the intervals overlap
            let margin = ub.min(b.hi) - lb.max(b.lo);
            check.case(margin, || json!({ "sigma": d.sigma(), "pair": pair_json(d.pair()), "n": n, "bracket": [b.lo, b.hi], "bounds": [lb, ub] }));
        }
    }
    Ok(check)
}

pub fn run(quick: bool) -> Result<Vec<Check>> {
    let top = if quick { 12 } else { 20 };
    let ns: Vec<u64> = (0..=top).map(|j| 1u64 << j).collect();
    let window = if quick { 256 } else { DEFAULT_WINDOW };
    let (implies, excludes) = exp_against_alp_amp(window)?;
    Ok(vec![
        sandwich(&ns)?,
        monotone(&ns)?,
        homogeneity(&ns)?,
        tail_recurrence(if quick { 30 } else { 100 })?,
        exp_equivalence(window)?,
        doubling_equivalence(window)?,
        implies,
        excludes,
        table1(DEFAULT_WINDOW)?,
        volumes(if quick { 200_000 } else { 1_000_000 })?,
        volume_slope()?,
        oracle_examples()?,
        covering_rhs(if quick { 5 } else { 7 })?,
        brackets_vs_bounds(if quick { &[1, 2, 4] } else { &[1, 2, 3, 4, 8, 16] })?,
    ])
}

pub const HEADER: &[&str] = &["check", "passed", "margin", "cases", "counterexample"];

pub fn report(quick: bool) -> Result<(Report, Option<Value>)> {
    let checks = run(quick)?;
    let mut report = Report::new("verify", Row::new().with("quick", quick), HEADER);
    let first_failure =
        checks.iter().find_map(|c| c.counterexample.clone().map(|x| json!({ "check": c.name, "counterexample": x })));
    for c in checks {
        report.push(
            Row::new()
                .with("check", c.name)
                .with("passed", c.passed())
                .with("margin", c.margin)
                .with("cases", c.cases)
                .with("counterexample", c.counterexample),
        );
    }
    Ok((report, first_failure))
}
