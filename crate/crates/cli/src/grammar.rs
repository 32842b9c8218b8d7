//! Argument grammar shared by every command.

use entrobound::bounds::BoundForm;
use entrobound::{Branch, Error, Result};

/// `1,16,256` or `2^a..2^b`, strictly increasing positive integers.
pub fn parse_n_grid(src: &str) -> Result<Vec<u64>> {
    let bad = |why: &str| Error::Parse(format!("n-grid '{src}': {why}"));
    let grid = if let Some((lo, hi)) = src.split_once("..") {
        let exponent = |s: &str| -> Result<u32> {
            let e = s.trim().strip_prefix("2^").ok_or_else(|| bad("range ends must be written 2^<int>"))?;
            let e: u32 = e.parse().map_err(|_| bad("range exponent is not a non-negative integer"))?;
            if e > 63 {
                return Err(bad("exponent above 63"));
            }
            Ok(e)
        };
        let (a, b) = (exponent(lo)?, exponent(hi)?);
        if a > b {
            return Err(bad("empty dyadic range"));
        }
        (a..=b).map(|j| 1u64 << j).collect()
    } else {
        src.split(',')
            .map(|t| {
                let t = t.trim();
                if !t.bytes().all(|c| c.is_ascii_digit()) || t.is_empty() {
                    return Err(bad("entries must be positive integers"));
                }
                t.parse::<u64>().map_err(|_| bad("entry out of range"))
            })
            .collect::<Result<Vec<u64>>>()?
    };
    if grid.first() == Some(&0) {
        return Err(bad("entries must be positive"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(bad("entries must be strictly increasing"));
    }
    Ok(grid)
}

/// A positive decimal or the literal `inf`.
pub fn parse_exponent(src: &str) -> Result<f64> {
    let t = src.trim();
    if t == "inf" {
        return Ok(f64::INFINITY);
    }
    let plain = !t.is_empty() && t.bytes().all(|c| c.is_ascii_digit() || matches!(c, b'.' | b'e' | b'E' | b'-' | b'+'));
    match t.parse::<f64>() {
        Ok(x) if plain && x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(Error::Parse(format!("exponent '{src}' must be a positive decimal or 'inf'"))),
    }
}

pub fn parse_positive(src: &str, what: &str) -> Result<f64> {
    match src.trim().parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(Error::Parse(format!("{what} '{src}' must be a positive decimal"))),
    }
}

/// Form ids; `ub` and `ub-const` follow the branch of the exponent pair.
pub fn parse_forms(src: &str, branch: Branch) -> Result<Vec<BoundForm>> {
    let mut forms = Vec::new();
    for token in src.split(',').map(str::trim) {
        let form = match (token.to_ascii_lowercase().as_str(), branch) {
            ("ub", Branch::Contraction) => BoundForm::UbGt,
            ("ub", _) => BoundForm::UbLt,
            ("ub-const", Branch::Contraction) => BoundForm::UbConstGt,
            ("ub-const", _) => BoundForm::UbConstLt,
            ("lb", _) => BoundForm::Lb,
            _ => token.parse::<BoundForm>().map_err(|_| Error::Parse(format!("unknown bound form '{token}'")))?,
        };
        if !forms.contains(&form) {
            forms.push(form);
        }
    }
    Ok(forms)
}
