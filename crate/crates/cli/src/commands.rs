//! One function per subcommand; each returns a finished [`Report`].

use entrobound::bounds::{bound_curve, BoundForm};
use entrobound::conditions::{classify, ConditionReport};
use entrobound::exponent::fmt_exponent;
use entrobound::oracle::{
    covering_estimate, entropy_bracket_with, BracketOptions, CoveringEstimate, EntropyBracket, FiniteDiag, MAX_DIM,
};
use entrobound::sequence::{parse_sequence_spec, tail_estimate, SequenceSpec};
use entrobound::{Error, ExponentPair, Result};
use rayon::prelude::*;

use crate::report::{Cell, Report, Row};

pub const BOUND_HEADER: &[&str] =
    &["n", "form", "log10_value", "value", "argmax_k", "k_first", "k_last", "certificate"];

pub struct BoundArgs<'a> {
    pub sigma: &'a str,
    pub p: f64,
    pub q: f64,
    pub n_grid: &'a [u64],
    /// Raw form list; `None` selects every form of the branch.
    pub forms: Option<&'a str>,
    pub rtol: f64,
}

pub fn bound(args: &BoundArgs) -> Result<Report> {
    let spec = parse_sequence_spec(args.sigma)?;
    let pair = ExponentPair::distinct(args.p, args.q)?;
    let forms = match args.forms {
        Some(src) => crate::grammar::parse_forms(src, pair.branch())?,
        None => BoundForm::for_branch(pair.branch()),
    };
    if let Some(f) = forms.iter().find(|f| f.branch().is_some_and(|b| b != pair.branch())) {
        return Err(Error::Parse(format!("form {f} does not apply to p = {}, q = {}", args.p, args.q)));
    }
    let config = Row::new()
        .with("sigma", spec.to_string())
        .with("p", fmt_exponent(args.p))
        .with("q", fmt_exponent(args.q))
        .with("n_grid", Cell::Json(args.n_grid.into()))
        .with("forms", Cell::Json(forms.iter().map(|f| f.id()).collect::<Vec<_>>().into()))
        .with("rtol", args.rtol);
    let mut report = Report::new("bound", config, BOUND_HEADER);
    for r in bound_curve(&spec, pair, args.n_grid, &forms, args.rtol)? {
        report.push(
            Row::new()
                .with("n", r.n)
                .with("form", r.form.id())
                .with("log10_value", r.value.log10())
                .with("value", r.value.representable())
                .with("argmax_k", r.argmax_k)
                .with("k_first", r.k_scanned.first)
                .with("k_last", r.k_scanned.last)
                .with("certificate", certificate_id(r.certificate)),
        );
    }
    Ok(report)
}

fn certificate_id(c: entrobound::bounds::Certificate) -> &'static str {
    match c {
        entrobound::bounds::Certificate::Certified => "certified",
        entrobound::bounds::Certificate::Heuristic => "heuristic",
    }
}

pub const CLASSIFY_HEADER: &[&str] =
    &["condition", "verdict", "window_verdict", "analytic", "window", "ratio", "log_ratio", "n", "k", "note"];

pub fn condition_row(r: &ConditionReport) -> Row {
    Row::new()
        .with("condition", r.condition.to_string())
        .with("verdict", r.verdict.to_string())
        .with("window_verdict", r.window_verdict.to_string())
        .with("analytic", r.analytic)
        .with("window", r.window)
        .with("ratio", r.witness.map(|w| w.ratio()).filter(|v| *v > 0.0 && v.is_finite()))
        .with("log_ratio", r.witness.map(|w| w.log_ratio))
        .with("n", r.witness.map(|w| w.n))
        .with("k", r.witness.map(|w| w.k))
        .with("note", r.note.clone())
}

pub fn classify_cmd(sigma: &str, p: f64, q: f64, window: u64, rtol: f64) -> Result<Report> {
    let spec = parse_sequence_spec(sigma)?;
    let pair = ExponentPair::distinct(p, q)?;
    let config = Row::new()
        .with("sigma", spec.to_string())
        .with("p", fmt_exponent(p))
        .with("q", fmt_exponent(q))
        .with("window", window)
        .with("rtol", rtol);
    let mut report = Report::new("classify", config, CLASSIFY_HEADER);
    for r in classify(&spec, &pair, window, rtol)? {
        report.push(condition_row(&r));
    }
    Ok(report)
}

pub const TAIL_HEADER: &[&str] = &["k", "log10_tau", "tau", "ln_power_lo", "ln_power_hi", "terms"];

/// `τ_k` for every `k` of the grid.
pub fn tail_cmd(sigma: &str, r: f64, ks: &[u64], rtol: f64) -> Result<Report> {
    let spec = parse_sequence_spec(sigma)?;
    let config = Row::new()
        .with("sigma", spec.to_string())
        .with("r", fmt_exponent(r))
        .with("k_grid", Cell::Json(ks.into()))
        .with("rtol", rtol);
    let estimates: Vec<_> = ks.par_iter().map(|&k| tail_estimate(&spec, k, r, rtol)).collect::<Result<_>>()?;
    let mut report = Report::new("tail", config, TAIL_HEADER);
    for (&k, t) in ks.iter().zip(estimates) {
        report.push(
            Row::new()
                .with("k", k)
                .with("log10_tau", t.value.log10())
                .with("tau", t.value.representable())
                .with("ln_power_lo", t.ln_power_lo)
                .with("ln_power_hi", t.ln_power_hi)
                .with("terms", t.terms),
        );
    }
    Ok(report)
}

pub const ORACLE_HEADER: &[&str] =
    &["n", "epsilon", "lo", "hi", "exhausted", "n_lower", "n_upper", "grid_resolution", "seed"];

pub struct OracleArgs<'a> {
    pub sigma: &'a str,
    pub p: f64,
    pub q: f64,
    /// Leading terms kept; defaults to the whole explicit prefix.
    pub k: Option<usize>,
    pub n_grid: &'a [u64],
    pub eps: &'a [f64],
    pub seed: u64,
    pub steps: u32,
}

/// The first `k` weights of a spec as a finite diagonal.
pub fn finite_diag(spec: &SequenceSpec, k: Option<usize>, p: f64, q: f64) -> Result<FiniteDiag> {
    let k = match (k, spec.max_index()) {
        (Some(k), _) => k,
        (None, Some(len)) => len as usize,
        (None, None) => return Err(Error::Parse("--k is required for an infinite sequence".into())),
    };
    if k == 0 {
        return Err(Error::Parse("--k must be at least 1".into()));
    }
    if k > MAX_DIM {
        return Err(Error::DimensionTooLarge(k));
    }
    let sigma = (1..=k as u64).map(|i| spec.eval_sigma(i).map(|v| v.value())).collect::<Result<Vec<f64>>>()?;
    FiniteDiag::new(sigma, p, q)
}

pub fn oracle_cmd(args: &OracleArgs) -> Result<Report> {
    if args.n_grid.is_empty() && args.eps.is_empty() {
        return Err(Error::Parse("oracle needs --n and/or --eps".into()));
    }
    let spec = parse_sequence_spec(args.sigma)?;
    let diag = finite_diag(&spec, args.k, args.p, args.q)?;
    let opts = BracketOptions { steps: args.steps, seed: args.seed, ..BracketOptions::default() };
    let config = Row::new()
        .with("sigma", Cell::Floats(diag.sigma().to_vec()))
        .with("p", fmt_exponent(args.p))
        .with("q", fmt_exponent(args.q))
        .with("k", diag.k() as u64)
        .with("n_grid", Cell::Json(args.n_grid.into()))
        .with("eps", Cell::Floats(args.eps.to_vec()))
        .with("seed", args.seed)
        .with("steps", args.steps as u64);
    let brackets: Vec<_> = args
        .n_grid
        .par_iter()
        .map(|&n| {
            let b = entropy_bracket_with(&diag, n, &opts)?;
            Ok((b, covering_estimate(&diag, b.hi, args.seed)?))
        })
        .collect::<Result<_>>()?;
    let covers: Vec<_> = args.eps.par_iter().map(|&e| covering_estimate(&diag, e, args.seed)).collect::<Result<_>>()?;

    let mut report = Report::new("oracle", config, ORACLE_HEADER);
    for (b, e) in &brackets {
        report.push(oracle_row(Some(b), e));
    }
    for e in &covers {
        report.push(oracle_row(None, e));
    }
    Ok(report)
}

fn oracle_row(bracket: Option<&EntropyBracket>, e: &CoveringEstimate) -> Row {
    Row::new()
        .with("n", bracket.map(|b| b.n))
        .with("epsilon", e.epsilon)
        .with("lo", bracket.map(|b| b.lo))
        .with("hi", bracket.map(|b| b.hi))
        .with("exhausted", bracket.map(|b| b.exhausted))
        .with("n_lower", e.n_lower)
        .with("n_upper", e.n_upper)
        .with("grid_resolution", e.grid_resolution)
        .with("seed", e.seed)
}

pub fn parse_eps_list(src: &str) -> Result<Vec<f64>> {
    src.split(',').map(|t| crate::grammar::parse_positive(t, "eps")).collect()
}
