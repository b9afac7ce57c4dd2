//! Small helpers shared by the line-oriented text formats.

use crate::error::{Error, Result};

/// Parses a comma-separated list of decimal reals.
pub fn parse_reals(s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Config("empty list of reals".into()));
    }
    s.split(',')
        .map(|tok| {
            let tok = tok.trim();
            tok.parse::<f64>()
                .map_err(|_| Error::Config(format!("`{tok}` is not a real number")))
        })
        .collect()
}

pub fn format_reals(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Formats a real with 12 significant digits, `%.12g` style.
pub fn sig12(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -5 || exp >= DIGITS {
        format!("{}e{}", trim_zeros(mantissa), exp)
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Splits a `key=value` line, ignoring blank lines and `#` comments.
pub(crate) fn key_value(line: &str) -> Result<Option<(&str, &str)>> {
    let line = line.split('#').next().unwrap_or("").trim();
    if line.is_empty() {
        return Ok(None);
    }
    match line.split_once('=') {
        Some((k, v)) => Ok(Some((k.trim(), v.trim()))),
        None => Err(Error::Config(format!("expected key=value, found `{line}`"))),
    }
}
