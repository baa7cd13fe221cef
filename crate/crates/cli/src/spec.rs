//! Parser for textual sequence specs:
//!
//! ```text
//! power:a=<float>,p=<float>
//! geom:a=<float>,r=<float>
//! const:c=<float>
//! file:<path>        one decimal literal per line, `#` comment lines ignored
//! ```

use std::fs;

use cauchy_kakutani::kakutani::SequenceSpec;
use thiserror::Error;

/// A rejected spec, positioned by 1-based line and column (in characters).
/// Inline specs are a single line; file specs report the line in the file.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{source_name}:{line}:{column}: {message}")]
pub struct SpecError {
    pub source_name: String,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl SpecError {
    fn inline(column: usize, message: impl Into<String>) -> Self {
        Self {
            source_name: "spec".into(),
            line: 1,
            column,
            message: message.into(),
        }
    }
}

pub fn parse_spec(s: &str) -> Result<SequenceSpec, SpecError> {
    let lead = s.chars().take_while(|c| c.is_whitespace()).count();
    let body = s.trim();
    let Some((form, rest)) = body.split_once(':') else {
        return Err(SpecError::inline(
            lead + 1,
            "expected `<form>:<parameters>` with form power, geom, const or file",
        ));
    };
    let rest_col = lead + form.chars().count() + 2;
    match form {
        "power" => {
            let [a, p] = parameters(rest, rest_col, ["a", "p"])?;
            checked(
                SequenceSpec::PowerLaw {
                    amplitude: a.0,
                    exponent: p.0,
                },
                p.1,
            )
        }
        "geom" => {
            let [a, r] = parameters(rest, rest_col, ["a", "r"])?;
            checked(
                SequenceSpec::Geometric {
                    amplitude: a.0,
                    ratio: r.0,
                },
                r.1,
            )
        }
        "const" => {
            let [c] = parameters(rest, rest_col, ["c"])?;
            checked(SequenceSpec::Constant { value: c.0 }, c.1)
        }
        "file" => {
            if rest.is_empty() {
                return Err(SpecError::inline(rest_col, "missing file path"));
            }
            let text = fs::read_to_string(rest)
                .map_err(|e| SpecError::inline(rest_col, format!("cannot read `{rest}`: {e}")))?;
            parse_values(&text, rest)
        }
        other => Err(SpecError::inline(
            lead + 1,
            format!("unknown form `{other}`; expected power, geom, const or file"),
        )),
    }
}

fn checked(spec: SequenceSpec, column: usize) -> Result<SequenceSpec, SpecError> {
    spec.validate().map_err(|e| SpecError::inline(column, e.to_string()))?;
    Ok(spec)
}

/// Parses `k1=v1,k2=v2,…` into values ordered like `names`, each paired with
/// the column of its value.
fn parameters<const K: usize>(s: &str, start_col: usize, names: [&str; K]) -> Result<[(f64, usize); K], SpecError> {
    let mut found: [Option<(f64, usize)>; K] = [None; K];
    let mut col = start_col;
    if !s.is_empty() {
        for item in s.split(',') {
            let Some((key, value)) = item.split_once('=') else {
                return Err(SpecError::inline(col, format!("expected `key=value`, found `{item}`")));
            };
            let value_col = col + key.chars().count() + 1;
            let Some(slot) = names.iter().position(|n| *n == key) else {
                return Err(SpecError::inline(
                    col,
                    format!("unknown parameter `{key}`; expected {}", names.join(", ")),
                ));
            };
            if found[slot].is_some() {
                return Err(SpecError::inline(col, format!("duplicate parameter `{key}`")));
            }
            found[slot] = Some((
                literal(value)
                    .ok_or_else(|| SpecError::inline(value_col, format!("`{value}` is not a finite decimal number")))?,
                value_col,
            ));
            col += item.chars().count() + 1;
        }
    }
    let end_col = start_col + s.chars().count();
    let mut out = [(0.0, 0); K];
    for (i, slot) in found.iter().enumerate() {
        out[i] = slot.ok_or_else(|| SpecError::inline(end_col, format!("missing parameter `{}`", names[i])))?;
    }
    Ok(out)
}

fn literal(s: &str) -> Option<f64> {
    // Rust's parser also takes `inf` and `NaN`; only plain decimals are allowed
    let plain = !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '+' | '-' | '.' | 'e' | 'E'));
    s.parse::<f64>().ok().filter(|v| plain && v.is_finite())
}

/// Parses the contents of a value file.
pub fn parse_values(text: &str, source_name: &str) -> Result<SequenceSpec, SpecError> {
    let mut values = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let token = raw.trim();
        if token.is_empty() || token.starts_with('#') {
            continue;
        }
        let column = raw.chars().take_while(|c| c.is_whitespace()).count() + 1;
        let v = literal(token).ok_or_else(|| SpecError {
            source_name: source_name.to_string(),
            line: i + 1,
            column,
            message: format!("`{token}` is not a finite decimal number"),
        })?;
        values.push(v);
    }
    Ok(SequenceSpec::Explicit { values })
}
