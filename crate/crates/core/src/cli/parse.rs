//! Text parsers for command-line values and config files.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Result, TqError};

fn parse_real(s: &str, whole: &str) -> Result<f64> {
    // f64::from_str also takes "inf" and "nan"; only plain decimals are wanted
    let ok = !s.is_empty()
        && s.chars().all(|c| c.is_ascii_digit() || matches!(c, '+' | '-' | '.' | 'e' | 'E'))
        && s.chars().any(|c| c.is_ascii_digit());
    let v: f64 = if ok { s.parse().ok() } else { None }
        .ok_or_else(|| TqError::Parse(format!("invalid complex number {whole:?}")))?;
    if !v.is_finite() {
        return Err(TqError::Parse(format!("complex number {whole:?} is not finite")));
    }
    Ok(v)
}

fn parse_imag_coeff(s: &str, whole: &str) -> Result<f64> {
    match s {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => parse_real(s, whole),
    }
}

/// Parses `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i` and friends, with optional
/// exponents in either part.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(body) = s.strip_suffix('i') else {
        return Ok(Complex64::new(parse_real(&s, text)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => Ok(Complex64::new(
            parse_real(&body[..k], text)?,
            parse_imag_coeff(&body[k..], text)?,
        )),
        None => Ok(Complex64::new(0.0, parse_imag_coeff(body, text)?)),
    }
}

/// Shortest exact form; `parse_complex(&format_complex(z)) == z`.
pub fn format_complex(z: Complex64) -> String {
    format!("{}{:+}i", z.re, z.im)
}

/// Fixed-precision `a±bi`, as printed in text tables.
pub fn format_complex_fixed(z: Complex64, decimals: usize) -> String {
    let im = if z.im.abs() < 0.5 * 10f64.powi(-(decimals as i32)) { 0.0 } else { z.im };
    let sign = if im.is_sign_negative() { '-' } else { '+' };
    format!("{:.*}{}{:.*}i", decimals, z.re, sign, decimals, im.abs())
}

#[derive(Clone, Debug, PartialEq)]
pub enum ThetaSpec {
    Homogeneous,
    /// Drawn uniformly from the unit disk with the run seed.
    Random,
    List(Vec<Complex64>),
}

pub fn parse_theta(text: &str) -> Result<ThetaSpec> {
    let t = text.trim();
    match t.to_ascii_lowercase().as_str() {
        "homogeneous" | "0" => return Ok(ThetaSpec::Homogeneous),
        "random" => return Ok(ThetaSpec::Random),
        "" => return Err(TqError::Parse("empty theta list".into())),
        _ => {}
    }
    t.split(',').map(parse_complex).collect::<Result<Vec<_>>>().map(ThetaSpec::List)
}

/// `key = value` per line; `#` starts a comment, blank lines are skipped,
/// keys are case-insensitive with `_` and `-` interchangeable. A repeated key
/// is an error.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| TqError::Parse(format!("config line {}: expected key=value", lineno + 1)))?;
        let key = k.trim().to_ascii_lowercase().replace('_', "-");
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '-') {
            return Err(TqError::Parse(format!("config line {}: bad key {:?}", lineno + 1, k.trim())));
        }
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(TqError::Parse(format!("config line {}: duplicate key {key}", lineno + 1)));
        }
    }
    Ok(out)
}
