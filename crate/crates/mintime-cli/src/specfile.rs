//! System-specification file parsing (JSON).
//!
//! Scalar entries may be integers, decimal strings, or "a/b" rational
//! strings (all exact), or bare non-integer numbers (inexact). The default
//! mode is exact when every scalar is exact; an explicit "mode" key wins,
//! and forcing exact mode converts bare floats to their dyadic rationals.

use mintime_core::model::{Poly, Scalar, SystemSpec};
use mintime_core::Rational;
use num_bigint::BigInt;
use serde_json::Value;

#[derive(Debug)]
pub struct ParseError(pub String);

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ParseError {}

type PResult<T> = Result<T, ParseError>;

fn err<T>(msg: impl Into<String>) -> PResult<T> {
    Err(ParseError(msg.into()))
}

/// One scalar token, remembering whether it was given exactly.
#[derive(Debug, Clone)]
struct Tok {
    value: Rational,
    exact: bool,
}

fn parse_decimal(text: &str) -> Option<Rational> {
    let (sign, digits) = match text.strip_prefix('-') {
        Some(rest) => (-1i64, rest),
        None => (1, text),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((a, b)) => (a, b),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let joined = format!("{int_part}{frac_part}");
    let numer: BigInt = joined.parse().ok()?;
    let denom = BigInt::from(10u32).pow(frac_part.len() as u32);
    Some(Rational::new(BigInt::from(sign) * numer, denom))
}

fn parse_scalar(v: &Value, ctx: &str) -> PResult<Tok> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Tok {
                    value: Rational::from_int(i),
                    exact: true,
                })
            } else if let Some(f) = n.as_f64() {
                Ok(Tok {
                    value: Rational::from_f64(f),
                    exact: false,
                })
            } else {
                err(format!("{ctx}: number out of range"))
            }
        }
        Value::String(s) => {
            let s = s.trim();
            if let Some((num, den)) = s.split_once('/') {
                let num: BigInt = num
                    .trim()
                    .parse()
                    .map_err(|_| ParseError(format!("{ctx}: bad rational numerator in {s:?}")))?;
                let den: BigInt = den
                    .trim()
                    .parse()
                    .map_err(|_| ParseError(format!("{ctx}: bad rational denominator in {s:?}")))?;
                if den == BigInt::from(0) {
                    return err(format!("{ctx}: zero denominator in {s:?}"));
                }
                Ok(Tok {
                    value: Rational::new(num, den),
                    exact: true,
                })
            } else if let Some(value) = parse_decimal(s) {
                Ok(Tok { value, exact: true })
            } else {
                err(format!(
                    "{ctx}: expected an integer, decimal string, or \"a/b\" string, got {s:?}"
                ))
            }
        }
        other => err(format!("{ctx}: expected a scalar, got {other}")),
    }
}

fn parse_poly(v: &Value, ctx: &str) -> PResult<Vec<Tok>> {
    let arr = v
        .as_array()
        .ok_or_else(|| ParseError(format!("{ctx}: expected a coefficient array")))?;
    arr.iter()
        .enumerate()
        .map(|(i, c)| parse_scalar(c, &format!("{ctx}[{i}]")))
        .collect()
}

/// Scan/grid options for the oracle and the float tolerance.
#[derive(Debug, Clone)]
pub struct Options {
    pub tolerance: f64,
    pub oracle_grid: (usize, usize),
    pub scan_range: Option<(f64, f64)>,
    pub bracket_delta: f64,
    pub scan_csv: Option<String>,
    pub seed: u64,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            tolerance: 1e-9,
            oracle_grid: (200, 200),
            scan_range: None,
            bracket_delta: 0.4,
            scan_csv: None,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Float,
}

/// Parsed specification file in both backends (the float view is always
/// available; the exact view is the primary one in exact mode).
#[derive(Debug)]
pub struct SpecFile {
    pub mode: Mode,
    pub exact: SystemSpec<Rational>,
    pub options: Options,
}

fn get_usize(obj: &serde_json::Map<String, Value>, key: &str) -> PResult<usize> {
    obj.get(key)
        .and_then(Value::as_u64)
        .map(|v| v as usize)
        .ok_or_else(|| ParseError(format!("missing or invalid \"{key}\"")))
}

pub fn parse_spec_file(text: &str) -> PResult<SpecFile> {
    let root: Value = serde_json::from_str(text)
        .map_err(|e| ParseError(format!("JSON syntax error at line {} column {}: {e}", e.line(), e.column())))?;
    let obj = match root.as_object() {
        Some(o) => o,
        None => return err("top level must be a JSON object"),
    };
    let m = get_usize(obj, "m")?;
    let p = get_usize(obj, "p")?;
    let n = m + p;

    let mut all_exact = true;
    let mut max_degree = 0usize;

    let lambda_val = obj
        .get("lambda")
        .and_then(Value::as_array)
        .ok_or_else(|| ParseError("missing \"lambda\" array".into()))?;
    if lambda_val.len() != n {
        return err(format!(
            "\"lambda\" must list {n} polynomials, got {}",
            lambda_val.len()
        ));
    }
    let mut lambda_toks = Vec::with_capacity(n);
    for (i, v) in lambda_val.iter().enumerate() {
        let toks = parse_poly(v, &format!("lambda[{i}]"))?;
        all_exact &= toks.iter().all(|t| t.exact);
        max_degree = max_degree.max(toks.len().saturating_sub(1));
        lambda_toks.push(toks);
    }

    let coupling_val = obj
        .get("M")
        .and_then(Value::as_array)
        .ok_or_else(|| ParseError("missing \"M\" matrix".into()))?;
    if coupling_val.len() != n {
        return err(format!("\"M\" must have {n} rows, got {}", coupling_val.len()));
    }
    let mut coupling_toks = Vec::with_capacity(n);
    for (i, row) in coupling_val.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| ParseError(format!("M[{i}] must be an array")))?;
        if row.len() != n {
            return err(format!("M[{i}] must have {n} entries, got {}", row.len()));
        }
        let mut out_row = Vec::with_capacity(n);
        for (j, v) in row.iter().enumerate() {
            let toks = parse_poly(v, &format!("M[{i}][{j}]"))?;
            all_exact &= toks.iter().all(|t| t.exact);
            max_degree = max_degree.max(toks.len().saturating_sub(1));
            out_row.push(toks);
        }
        coupling_toks.push(out_row);
    }

    let boundary_val = obj
        .get("Q")
        .and_then(Value::as_array)
        .ok_or_else(|| ParseError("missing \"Q\" matrix".into()))?;
    if boundary_val.len() != p {
        return err(format!("\"Q\" must have {p} rows, got {}", boundary_val.len()));
    }
    let mut boundary_toks = Vec::with_capacity(p);
    for (i, row) in boundary_val.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| ParseError(format!("Q[{i}] must be an array")))?;
        if row.len() != m {
            return err(format!("Q[{i}] must have {m} entries, got {}", row.len()));
        }
        let mut out_row = Vec::with_capacity(m);
        for (j, v) in row.iter().enumerate() {
            let tok = parse_scalar(v, &format!("Q[{i}][{j}]"))?;
            all_exact &= tok.exact;
            out_row.push(tok);
        }
        boundary_toks.push(out_row);
    }

    let mode = match obj.get("mode").and_then(Value::as_str) {
        Some("exact") => Mode::Exact,
        Some("float") => Mode::Float,
        Some(other) => return err(format!("unknown mode {other:?}")),
        None => {
            if all_exact {
                Mode::Exact
            } else {
                Mode::Float
            }
        }
    };

    let regularity = match obj.get("r") {
        Some(v) => v
            .as_u64()
            .map(|v| v as usize)
            .ok_or_else(|| ParseError("\"r\" must be a nonnegative integer".into()))?,
        None => max_degree + 4,
    };

    let mut options = Options::default();
    if let Some(opt) = obj.get("options") {
        let opt = opt
            .as_object()
            .ok_or_else(|| ParseError("\"options\" must be an object".into()))?;
        if let Some(v) = opt.get("tolerance") {
            options.tolerance = v
                .as_f64()
                .ok_or_else(|| ParseError("options.tolerance must be a number".into()))?;
        }
        if let Some(v) = opt.get("oracle_grid") {
            let arr = v
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| ParseError("options.oracle_grid must be [nt, nx]".into()))?;
            options.oracle_grid = (
                arr[0].as_u64().unwrap_or(0) as usize,
                arr[1].as_u64().unwrap_or(0) as usize,
            );
        }
        if let Some(v) = opt.get("scan_range") {
            let arr = v
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| ParseError("options.scan_range must be [lo, hi]".into()))?;
            options.scan_range = Some((
                arr[0].as_f64().unwrap_or(0.0),
                arr[1].as_f64().unwrap_or(0.0),
            ));
        }
        if let Some(v) = opt.get("bracket_delta") {
            options.bracket_delta = v
                .as_f64()
                .ok_or_else(|| ParseError("options.bracket_delta must be a number".into()))?;
        }
        if let Some(v) = opt.get("scan_csv") {
            options.scan_csv = Some(
                v.as_str()
                    .ok_or_else(|| ParseError("options.scan_csv must be a path".into()))?
                    .to_string(),
            );
        }
        if let Some(v) = opt.get("seed") {
            options.seed = v
                .as_u64()
                .ok_or_else(|| ParseError("options.seed must be a nonnegative integer".into()))?;
        }
    }

    let exact = SystemSpec {
        m,
        p,
        lambda: lambda_toks
            .into_iter()
            .map(|toks| Poly::new(toks.into_iter().map(|t| t.value).collect()))
            .collect(),
        coupling: coupling_toks
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|toks| Poly::new(toks.into_iter().map(|t| t.value).collect()))
                    .collect()
            })
            .collect(),
        boundary: boundary_toks
            .into_iter()
            .map(|row| row.into_iter().map(|t| t.value).collect())
            .collect(),
        regularity,
    };

    Ok(SpecFile { mode, exact, options })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rational_strings_exactly() {
        let text = r#"{
            "m": 1, "p": 1,
            "lambda": [[-1], ["1/2", "0.25"]],
            "M": [[[0], [0]], [[0], [0]]],
            "Q": [["19/3"]]
        }"#;
        let spec = parse_spec_file(text).unwrap();
        assert_eq!(spec.mode, Mode::Exact);
        assert_eq!(spec.exact.boundary[0][0], Rational::from_ratio(19, 3));
        assert_eq!(
            spec.exact.lambda[1].coeff(1),
            Rational::from_ratio(1, 4)
        );
        // default regularity: max degree 1 plus 4
        assert_eq!(spec.exact.regularity, 5);
    }

    #[test]
    fn bare_floats_default_to_float_mode() {
        let text = r#"{
            "m": 1, "p": 1,
            "lambda": [[-1.5], [1]],
            "M": [[[0], [0]], [[0], [0]]],
            "Q": [[0]]
        }"#;
        let spec = parse_spec_file(text).unwrap();
        assert_eq!(spec.mode, Mode::Float);
    }

    #[test]
    fn syntax_errors_carry_position() {
        let e = parse_spec_file("{ \"m\": 1,, }").unwrap_err();
        assert!(e.0.contains("line 1"), "{e}");
        assert!(e.0.contains("column"), "{e}");
    }

    #[test]
    fn dimension_mismatch_reported() {
        let text = r#"{
            "m": 2, "p": 1,
            "lambda": [[-1], [1]],
            "M": [[[0], [0]], [[0], [0]]],
            "Q": [[0, 0]]
        }"#;
        let e = parse_spec_file(text).unwrap_err();
        assert!(e.0.contains("lambda"), "{e}");
    }
}
