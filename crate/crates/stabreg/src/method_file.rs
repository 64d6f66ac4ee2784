//! JSON method files.
//!
//! Two shapes are accepted. The general form lists the coefficient matrix:
//!
//! ```json
//! { "name": "bdf2", "k": 2, "s": 1, "a": [["1", "-4", "3"], ["0", "0", "-2"]] }
//! ```
//!
//! The multistep form gives `alpha` and `beta` (and optionally `gamma` for
//! second-derivative methods); they expand to `a[0] = alpha`, `a[1] = -beta`,
//! `a[2] = -gamma`. A method without any μ-dependence must say so with
//! `"allow_mu_free": true`.
//!
//! Coefficients are integer or `p/q` strings (plain JSON integers are also
//! accepted). Decimals and irrational expressions are rejected.

use std::path::Path;

use serde_json::{Map, Value};
use stabreg_core::rational::{format_rational, parse_rational, ParseRationalError};
use stabreg_core::{BigRational, MultistepScheme, SchemeError};

#[derive(Debug, thiserror::Error)]
pub enum MethodFileError {
    #[error("invalid JSON at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("a method file must be a JSON object")]
    NotAnObject,
    #[error("missing field `{0}`")]
    MissingField(&'static str),
    #[error("field `{field}` must be {expected}")]
    WrongType { field: String, expected: &'static str },
    #[error("field `{field}`: {source}")]
    Rational { field: String, source: ParseRationalError },
    #[error("field `{field}` has {found} entries, expected {expected}")]
    Dimension { field: String, found: usize, expected: usize },
    #[error("field `{field}` is {found} but the coefficients give {expected}")]
    Declared { field: &'static str, found: u64, expected: usize },
    #[error("use either `a` or `alpha`/`beta`/`gamma`, not both")]
    MixedForms,
    #[error("no `beta` or `gamma` given; set \"allow_mu_free\": true to accept a method without mu-dependence")]
    NoMuDependence,
    #[error("`gamma` requires `beta`")]
    GammaWithoutBeta,
    #[error("field `{field}`: {source}")]
    Scheme { field: String, source: SchemeError },
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn rational_entry(value: &Value, field: String) -> Result<BigRational, MethodFileError> {
    let text = match value {
        Value::String(s) => s.clone(),
        Value::Number(n) if n.is_i64() || n.is_u64() => n.to_string(),
        Value::Number(n) => {
            let source = ParseRationalError::NotRational(n.to_string());
            return Err(MethodFileError::Rational { field, source });
        }
        _ => return Err(MethodFileError::WrongType { field, expected: "a rational string" }),
    };
    parse_rational(&text).map_err(|source| MethodFileError::Rational { field, source })
}

fn rational_row(value: &Value, field: &str) -> Result<Vec<BigRational>, MethodFileError> {
    let Value::Array(items) = value else {
        return Err(MethodFileError::WrongType { field: field.to_string(), expected: "an array" });
    };
    items
        .iter()
        .enumerate()
        .map(|(i, v)| rational_entry(v, format!("{field}[{i}]")))
        .collect()
}

fn declared(obj: &Map<String, Value>, field: &'static str) -> Result<Option<u64>, MethodFileError> {
    match obj.get(field) {
        None => Ok(None),
        Some(v) => v
            .as_u64()
            .map(Some)
            .ok_or(MethodFileError::WrongType { field: field.to_string(), expected: "a non-negative integer" }),
    }
}

/// Parses a method document.
pub fn parse_scheme(document: &str) -> Result<MultistepScheme, MethodFileError> {
    let value: Value = serde_json::from_str(document).map_err(|e| MethodFileError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let Value::Object(obj) = value else {
        return Err(MethodFileError::NotAnObject);
    };
    let name = match obj.get("name") {
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(MethodFileError::WrongType { field: "name".into(), expected: "a string" }),
        None => return Err(MethodFileError::MissingField("name")),
    };
    let has_lmm = ["alpha", "beta", "gamma"].iter().any(|f| obj.contains_key(*f));

    let (rows, prefixes): (Vec<Vec<BigRational>>, Vec<String>) = match (obj.get("a"), has_lmm) {
        (Some(_), true) => return Err(MethodFileError::MixedForms),
        (Some(Value::Array(a)), false) => {
            let rows = a
                .iter()
                .enumerate()
                .map(|(j, row)| rational_row(row, &format!("a[{j}]")))
                .collect::<Result<Vec<_>, _>>()?;
            let prefixes = (0..rows.len()).map(|j| format!("a[{j}]")).collect();
            (rows, prefixes)
        }
        (Some(_), false) => return Err(MethodFileError::WrongType { field: "a".into(), expected: "an array of arrays" }),
        (None, false) => return Err(MethodFileError::MissingField("a")),
        (None, true) => {
            let alpha = rational_row(obj.get("alpha").ok_or(MethodFileError::MissingField("alpha"))?, "alpha")?;
            let allow_free = match obj.get("allow_mu_free") {
                None => false,
                Some(Value::Bool(b)) => *b,
                Some(_) => return Err(MethodFileError::WrongType { field: "allow_mu_free".into(), expected: "a boolean" }),
            };
            let beta = obj.get("beta").map(|v| rational_row(v, "beta")).transpose()?;
            let gamma = obj.get("gamma").map(|v| rational_row(v, "gamma")).transpose()?;
            let mut rows = vec![alpha];
            let mut prefixes = vec!["alpha".to_string()];
            match (beta, gamma) {
                (None, None) if allow_free => {
                    rows.push(vec![BigRational::from_integer(0.into()); rows[0].len()]);
                    prefixes.push("beta".into());
                }
                (None, None) => return Err(MethodFileError::NoMuDependence),
                (None, Some(_)) => return Err(MethodFileError::GammaWithoutBeta),
                (Some(beta), gamma) => {
                    rows.push(beta.into_iter().map(|b| -b).collect());
                    prefixes.push("beta".into());
                    if let Some(gamma) = gamma {
                        rows.push(gamma.into_iter().map(|g| -g).collect());
                        prefixes.push("gamma".into());
                    }
                }
            }
            (rows, prefixes)
        }
    };

    let width = rows.first().map_or(0, Vec::len);
    for (row, prefix) in rows.iter().zip(&prefixes) {
        if row.len() != width {
            return Err(MethodFileError::Dimension { field: prefix.clone(), found: row.len(), expected: width });
        }
    }
    if let Some(k) = declared(&obj, "k")? {
        if width == 0 || k as usize != width - 1 {
            return Err(MethodFileError::Declared { field: "k", found: k, expected: width.saturating_sub(1) });
        }
    }
    if let Some(s) = declared(&obj, "s")? {
        if rows.is_empty() || s as usize != rows.len() - 1 {
            return Err(MethodFileError::Declared { field: "s", found: s, expected: rows.len().saturating_sub(1) });
        }
    }
    MultistepScheme::new(name, rows).map_err(|source| {
        let field = match &source {
            SchemeError::LeadingAlphaVanishes => format!("{}[{}]", prefixes[0], width - 1),
            SchemeError::RowLength { row, .. } => prefixes.get(*row).cloned().unwrap_or_else(|| "a".into()),
            SchemeError::NoSteps => "k".into(),
            _ => "a".into(),
        };
        MethodFileError::Scheme { field, source }
    })
}

/// Reads and parses a method file.
pub fn load(path: &Path) -> Result<MultistepScheme, MethodFileError> {
    let text = std::fs::read_to_string(path).map_err(|source| MethodFileError::Io { path: path.display().to_string(), source })?;
    parse_scheme(&text)
}

/// The general-form JSON value for a scheme.
pub fn to_value(scheme: &MultistepScheme) -> Value {
    let a: Vec<Value> = scheme
        .coefficients()
        .iter()
        .map(|row| Value::Array(row.iter().map(|c| Value::String(format_rational(c))).collect()))
        .collect();
    serde_json::json!({
        "name": scheme.name(),
        "k": scheme.k(),
        "s": scheme.s(),
        "a": a,
    })
}

/// Serializes a scheme in the general form.
pub fn to_document(scheme: &MultistepScheme) -> String {
    let mut text = serde_json::to_string_pretty(&to_value(scheme)).expect("JSON values always serialize");
    text.push('\n');
    text
}
