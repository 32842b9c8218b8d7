//! The condition matrix of the three exponential-type families.

use entrobound::conditions::{classify, ConditionId, ConditionReport, Verdict};
use entrobound::exponent::fmt_exponent;
use entrobound::{ExponentPair, Result, SequenceSpec};

use crate::report::{Report, Row};

pub const LAMBDAS: [f64; 3] = [0.5, 1.0, 2.0];

/// ALP and AMP need `p > q`; EXP does not depend on the pair.
pub const TABLE_P: f64 = 2.0;
pub const TABLE_Q: f64 = 1.0;

pub const HEADER: &[&str] = &["family", "lambda", "condition", "expected", "verdict", "analytic", "agrees", "note"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    ExpLog,
    ExpPoly,
    ExpExp,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::ExpLog, Family::ExpPoly, Family::ExpExp];

    pub fn spec(self, lambda: f64) -> Result<SequenceSpec> {
        match self {
            Family::ExpLog => SequenceSpec::exp_log(1.0, lambda),
            Family::ExpPoly => SequenceSpec::exp_poly(1.0, lambda),
            Family::ExpExp => SequenceSpec::exp_exp(1.0, lambda),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Family::ExpLog => "exp(-a log^lambda n)",
            Family::ExpPoly => "exp(-a n^lambda)",
            Family::ExpExp => "exp(-a e^(lambda n))",
        }
    }

    /// Published `(AMP, ALP, EXP)` for `a > 0`; `None` where the family degenerates.
    pub fn expected(self, lambda: f64) -> Option<[bool; 3]> {
        match self {
            Family::ExpLog if lambda == 1.0 => None,
            Family::ExpLog => Some([false, lambda > 1.0, false]),
            Family::ExpPoly => Some([false, true, lambda >= 1.0]),
            Family::ExpExp => Some([false, true, true]),
        }
    }

    fn note(self, lambda: f64) -> Option<&'static str> {
        match self {
            Family::ExpLog if lambda == 1.0 => Some("reduces to polynomial decay n^-a; not compared"),
            Family::ExpLog if lambda < 1.0 => Some("sigma is not r-summable; D_sigma is unbounded for p > q"),
            _ => None,
        }
    }
}

pub const CONDITIONS: [&str; 3] = ["AMP", "ALP", "EXP"];

fn pick<'a>(reports: &'a [ConditionReport], name: &str) -> &'a ConditionReport {
    reports
        .iter()
        .find(|r| match r.condition {
            ConditionId::Amp { .. } => name == "AMP",
            ConditionId::Alp { .. } => name == "ALP",
            ConditionId::Exp { .. } => name == "EXP",
            _ => false,
        })
        .expect("the p > q battery runs AMP, ALP and EXP")
}

/// The matrix and whether every compared cell agrees.
pub fn run(window: u64, rtol: f64) -> Result<(Report, bool)> {
    let pair = ExponentPair::distinct(TABLE_P, TABLE_Q)?;
    let config = Row::new()
        .with("a", 1.0)
        .with("lambdas", crate::report::Cell::Floats(LAMBDAS.to_vec()))
        .with("p", fmt_exponent(TABLE_P))
        .with("q", fmt_exponent(TABLE_Q))
        .with("window", window)
        .with("rtol", rtol);
    let mut report = Report::new("table1", config, HEADER);
    let mut all_agree = true;
    for family in Family::ALL {
        for lambda in LAMBDAS {
            let reports = classify(&family.spec(lambda)?, &pair, window, rtol)?;
            let expected = family.expected(lambda);
            for (i, name) in CONDITIONS.iter().enumerate() {
                let r = pick(&reports, name);
                let want = expected.map(|e| e[i]);
                let agrees = want.map(|w| r.verdict == if w { Verdict::Holds } else { Verdict::Fails });
                all_agree &= agrees.unwrap_or(true);
                report.push(
                    Row::new()
                        .with("family", family.label())
                        .with("lambda", lambda)
                        .with("condition", *name)
                        .with("expected", want.map(|w| if w { "yes" } else { "no" }))
                        .with("verdict", r.verdict.to_string())
                        .with("analytic", r.analytic)
                        .with("agrees", agrees)
                        .with("note", family.note(lambda)),
                );
            }
        }
    }
    Ok((report, all_agree))
}
