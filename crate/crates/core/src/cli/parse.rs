//! Mini-languages accepted on the command line: power-law sequences
//! `c*k^p` and additive signal specifications.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::entire::ZeroSequence;
use crate::error::{Error, Result};
use crate::format::{csv_rows, parse_f64};
use crate::stft::{Component, Signal};

fn number(s: &str, what: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::invalid(format!("cannot parse {what} `{s}` as a number")))?;
    if !v.is_finite() {
        return Err(Error::invalid(format!("{what} must be finite, got `{s}`")));
    }
    Ok(v)
}

/// `c*k^p`, `c*sqrt(k)`, `c*k`, `k^p`, `sqrt(k)` or `k`, with `c, p > 0`.
pub fn parse_sequence(expr: &str) -> Result<ZeroSequence> {
    let compact: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
    let (scale, power) = match compact.split_once('*') {
        Some((c, rest)) => (number(c, "sequence scale")?, rest),
        None => (1.0, compact.as_str()),
    };
    let exponent = match power {
        "k" => 1.0,
        "sqrt(k)" => 0.5,
        p => match p.strip_prefix("k^") {
            Some(e) => {
                let e = e.strip_prefix('(').and_then(|e| e.strip_suffix(')')).unwrap_or(e);
                match e.split_once('/') {
                    Some((num, den)) => number(num, "sequence exponent")? / number(den, "sequence exponent")?,
                    None => number(e, "sequence exponent")?,
                }
            }
            None => {
                return Err(Error::invalid(format!(
                    "sequence `{expr}` is not of the form c*k^p, c*sqrt(k) or c*k"
                )))
            }
        },
    };
    let seq = ZeroSequence::PowerLaw { scale, exponent };
    seq.validate()?;
    Ok(seq)
}

/// Splits on `sep` outside parentheses.
fn split_top(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(&s[start..i]);
                start = i + ch.len_utf8();
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

struct Args<'a> {
    name: &'a str,
    pairs: Vec<(&'a str, &'a str)>,
}

impl<'a> Args<'a> {
    fn parse(term: &'a str) -> Result<Self> {
        let term = term.trim();
        let (name, rest) = term
            .split_once('(')
            .ok_or_else(|| Error::invalid(format!("signal term `{term}` needs an argument list")))?;
        let body = rest
            .strip_suffix(')')
            .ok_or_else(|| Error::invalid(format!("signal term `{term}` is missing `)`")))?;
        let mut pairs = Vec::new();
        for item in body.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("argument `{item}` must be key=value")))?;
            pairs.push((k.trim(), v.trim()));
        }
        Ok(Self { name: name.trim(), pairs })
    }

    fn check(&self, allowed: &[&str]) -> Result<()> {
        for (k, _) in &self.pairs {
            if !allowed.contains(k) {
                return Err(Error::invalid(format!(
                    "unknown argument `{k}` for {}; allowed: {}",
                    self.name,
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }

    fn get(&self, key: &str, default: f64) -> Result<f64> {
        match self.pairs.iter().rev().find(|(k, _)| *k == key) {
            Some((_, v)) => number(v, key),
            None => Ok(default),
        }
    }

    fn raw(&self, key: &str) -> Option<&'a str> {
        self.pairs.iter().rev().find(|(k, _)| *k == key).map(|(_, v)| *v)
    }
}

fn amplitude(args: &Args) -> Result<Complex64> {
    let phase = args.raw("phase").map(parse_angle).transpose()?.unwrap_or(0.0);
    Ok(Complex64::from_polar(args.get("amp", 1.0)?, phase))
}

/// Samples from a CSV file with header `t,re,im` on a uniform grid.
pub fn read_samples(path: &str) -> Result<Signal> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("cannot read samples `{path}`: {e}")))?;
    let rows = csv_rows(&text, "t,re,im")?;
    let mut t = Vec::with_capacity(rows.len());
    let mut values = Vec::with_capacity(rows.len());
    for (line, fields) in &rows {
        t.push(parse_f64(fields[0], *line)?);
        values.push(Complex64::new(parse_f64(fields[1], *line)?, parse_f64(fields[2], *line)?));
    }
    if t.len() < 2 {
        return Err(Error::invalid(format!("`{path}` needs at least two samples")));
    }
    let dt = t[1] - t[0];
    for (j, tj) in t.iter().enumerate() {
        if (tj - (t[0] + j as f64 * dt)).abs() > 1e-9 * dt.abs().max(1.0) {
            return Err(Error::invalid(format!("`{path}` is not uniformly sampled near t = {tj}")));
        }
    }
    Signal::grid_samples(values, t[0], dt)
}

/// A sum of terms `gauss(...)`, `hermite(...)`, `chirp(...)`, or a single
/// `samples(path=FILE)`. Every term except `hermite` (unit norm) accepts
/// `amp` and `phase`; phases may be written `pi/3`.
pub fn parse_signal(spec: &str) -> Result<Signal> {
    let mut components = Vec::new();
    for term in split_top(spec, '+') {
        let args = Args::parse(term)?;
        match args.name {
            "gauss" | "gaussian" => {
                args.check(&["center", "width", "freq", "amp", "phase"])?;
                components.push(Component::Gaussian {
                    amp: amplitude(&args)?,
                    center: args.get("center", 0.0)?,
                    width: args.get("width", 1.0)?,
                    frequency: args.get("freq", 0.0)?,
                });
            }
            "chirp" => {
                args.check(&["center", "width", "freq", "rate", "amp", "phase"])?;
                components.push(Component::LinearChirp {
                    amp: amplitude(&args)?,
                    center: args.get("center", 0.0)?,
                    width: args.get("width", 1.0)?,
                    frequency: args.get("freq", 0.0)?,
                    rate: args.get("rate", 0.0)?,
                });
            }
            "hermite" => {
                args.check(&["order", "center", "scale"])?;
                let order = args.get("order", 0.0)?;
                if order < 0.0 || order.fract() != 0.0 || order > 200.0 {
                    return Err(Error::invalid(format!("hermite order must be an integer in [0, 200], got {order}")));
                }
                components.push(Component::Hermite {
                    order: order as u32,
                    center: args.get("center", 0.0)?,
                    scale: args.get("scale", 1.0)?,
                });
            }
            "samples" => {
                args.check(&["path"])?;
                if split_top(spec, '+').len() != 1 {
                    return Err(Error::invalid("samples(...) cannot be combined with other terms"));
                }
                let path = args.raw("path").ok_or_else(|| Error::invalid("samples(...) needs path=FILE"))?;
                return read_samples(path);
            }
            other => {
                return Err(Error::invalid(format!(
                    "unknown signal term `{other}`; use gauss, chirp, hermite or samples"
                )))
            }
        }
    }
    Signal::closed_form(components)
}

/// Accepts a plain number or `pi`, `pi/2`, `2*pi`.
pub fn parse_angle(s: &str) -> Result<f64> {
    let t = s.trim();
    if let Some(rest) = t.strip_prefix("pi") {
        return match rest.strip_prefix('/') {
            Some(d) => Ok(PI / number(d, "angle")?),
            None if rest.is_empty() => Ok(PI),
            None => Err(Error::invalid(format!("cannot parse angle `{s}`"))),
        };
    }
    if let Some(c) = t.strip_suffix("*pi") {
        return Ok(number(c, "angle")? * PI);
    }
    number(t, "angle")
}
