//! Text formats shared by the library types and the CLI.

use crate::error::{Error, Result};

/// Shortest decimal that parses back to the same `f64` (at most 17
/// significant digits), in exponent form outside `[1e-5, 1e16)`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else if x != 0.0 && !(1e-5..1e16).contains(&x.abs()) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub(crate) fn parse_f64(field: &str, line: usize) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::invalid(format!("line {line}: cannot parse {field:?} as a number")))
}

/// Data rows of a CSV document with the expected header, split on commas.
pub(crate) fn csv_rows<'a>(text: &'a str, header: &str) -> Result<Vec<(usize, Vec<&'a str>)>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == header => {}
        Some((_, h)) => {
            return Err(Error::invalid(format!("expected CSV header {header:?}, found {h:?}")));
        }
        None => return Err(Error::invalid("empty CSV document")),
    }
    let width = header.split(',').count();
    lines
        .map(|(i, l)| {
            let fields: Vec<&str> = l.split(',').collect();
            if fields.len() != width {
                return Err(Error::invalid(format!(
                    "line {}: expected {width} fields, found {}",
                    i + 1,
                    fields.len()
                )));
            }
            Ok((i + 1, fields))
        })
        .collect()
}
