//! The sequence mini-language shared by the CLI and config files:
//!
//! ```text
//! geom:c=<f>,b=<f>          poly:a=<f>,alpha=<f>        polylog:a=<f>,alpha=<f>,beta=<f>
//! explog:a=<f>,lambda=<f>   exppoly:a=<f>,lambda=<f>    expexp:a=<f>,lambda=<f>
//! file:<path>
//! ```
//!
//! Files hold one positive decimal per line, nonincreasing, with an optional
//! first line `#tail geometric <ratio>`.

use std::path::Path;

use super::{SequenceSpec, TailModel};
use crate::error::{Error, Result};

/// Decimal literal with `.` as separator. `f64::from_str` is locale independent;
/// we additionally refuse the special spellings it accepts (`inf`, `nan`).
fn parse_decimal(s: &str) -> Result<f64> {
    let t = s.trim();
    let ok = !t.is_empty()
        && t.chars().all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'))
        && t.chars().any(|c| c.is_ascii_digit());
    if !ok {
        return Err(Error::Parse(format!("'{s}' is not a decimal literal")));
    }
    t.parse::<f64>().map_err(|_| Error::Parse(format!("'{s}' is not a decimal literal")))
}

fn parse_params(body: &str, keys: &[&str]) -> Result<Vec<f64>> {
    let parts: Vec<&str> = body.split(',').collect();
    if parts.len() != keys.len() {
        return Err(Error::Parse(format!(
            "expected parameters {} but got '{body}'",
            keys.iter().map(|k| format!("{k}=<f>")).collect::<Vec<_>>().join(",")
        )));
    }
    parts
        .iter()
        .zip(keys)
        .map(|(part, key)| {
            let (k, v) =
                part.split_once('=').ok_or_else(|| Error::Parse(format!("'{part}' is not of the form {key}=<f>")))?;
            if k != *key {
                return Err(Error::Parse(format!("expected key '{key}', found '{k}'")));
            }
            parse_decimal(v)
        })
        .collect()
}

/// Parses a sequence spec string; `file:` paths are read relative to the working directory.
pub fn parse_sequence_spec(src: &str) -> Result<SequenceSpec> {
    let (kind, body) =
        src.split_once(':').ok_or_else(|| Error::Parse(format!("'{src}' lacks a '<family>:' prefix")))?;
    let spec = match kind {
        "geom" => {
            let v = parse_params(body, &["c", "b"])?;
            SequenceSpec::Geometric { c: v[0], b: v[1] }
        }
        "poly" => {
            let v = parse_params(body, &["a", "alpha"])?;
            SequenceSpec::Polynomial { a: v[0], alpha: v[1] }
        }
        "polylog" => {
            let v = parse_params(body, &["a", "alpha", "beta"])?;
            SequenceSpec::PolyLog { a: v[0], alpha: v[1], beta: v[2] }
        }
        "explog" => {
            let v = parse_params(body, &["a", "lambda"])?;
            SequenceSpec::ExpLog { a: v[0], lambda: v[1] }
        }
        "exppoly" => {
            let v = parse_params(body, &["a", "lambda"])?;
            SequenceSpec::ExpPoly { a: v[0], lambda: v[1] }
        }
        "expexp" => {
            let v = parse_params(body, &["a", "lambda"])?;
            SequenceSpec::ExpExp { a: v[0], lambda: v[1] }
        }
        "file" => {
            let text = std::fs::read_to_string(Path::new(body)).map_err(|e| Error::Io(format!("{body}: {e}")))?;
            return parse_sequence_values(&text);
        }
        other => return Err(Error::Parse(format!("unknown sequence family '{other}'"))),
    };
    spec.validated().map_err(|e| Error::Parse(e.to_string()))
}

/// Parses the contents of a `file:` sequence.
pub fn parse_sequence_values(text: &str) -> Result<SequenceSpec> {
    let mut tail = TailModel::None;
    let mut values = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(directive) = line.strip_prefix("#tail") {
            if lineno != 0 {
                return Err(Error::Parse("'#tail' must be the first line".into()));
            }
            let words: Vec<&str> = directive.split_whitespace().collect();
            match words.as_slice() {
                ["geometric", ratio] => tail = TailModel::GeometricExtension { ratio: parse_decimal(ratio)? },
                _ => return Err(Error::Parse(format!("unsupported tail directive '{line}'"))),
            }
            continue;
        }
        values.push(parse_decimal(line).map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?);
    }
    SequenceSpec::explicit(values, tail).map_err(|e| Error::Parse(e.to_string()))
}
