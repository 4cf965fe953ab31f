//! Sampling sets `Λ = {(±τ₁ n^{(m-1)/m}, ±τ₂ n^{1/m})}` and the density
//! thresholds separating uniqueness from non-uniqueness.

use std::f64::consts::{E, PI};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::least_squares;
use crate::format::{csv_rows, fmt_f64, parse_f64};

fn check_m_a(m: f64, a: f64) -> Result<()> {
    if !(m > 1.0 && m.is_finite()) {
        return Err(Error::invalid(format!("m must exceed 1, got {m}")));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::invalid(format!("a must be positive, got {a}")));
    }
    Ok(())
}

fn check_rho_b(rho: f64, b: f64) -> Result<()> {
    if !(rho > 1.0 && rho.is_finite()) {
        return Err(Error::invalid(format!("ρ must exceed 1, got {rho}")));
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::invalid(format!("b must be positive, got {b}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauBounds {
    pub tau1_max: f64,
    pub tau2_max: f64,
}

/// Upper limits on `τ₁`, `τ₂` for a window with `|ĝ(ξ)| <= C e^{-a|ξ|^m}`.
pub fn max_tau_bounds(m: f64, a: f64) -> Result<TauBounds> {
    check_m_a(m, a)?;
    let rho = m / (m - 1.0);
    let denom = (2.0 * PI).powf(rho) * (m * a).powf(-1.0 / (m - 1.0)) * E;
    Ok(TauBounds {
        tau1_max: (2.0 / denom).powf((m - 1.0) / m),
        tau2_max: (2.0 / (a * m * E)).powf(1.0 / m),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingPoint {
    pub n: u64,
    pub sign_x: i8,
    pub sign_omega: i8,
    pub x: f64,
    pub omega: f64,
}

/// Quadrant order within each index.
pub const QUADRANTS: [(i8, i8); 4] = [(1, 1), (-1, 1), (-1, -1), (1, -1)];

pub const SAMPLING_CSV_HEADER: &str = "n,sign_x,sign_omega,x,omega";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingSet {
    pub points: Vec<SamplingPoint>,
    pub tau1: f64,
    pub tau2: f64,
    pub m: f64,
    pub n_max: u64,
    pub includes_origin: bool,
    pub warnings: Vec<String>,
}

impl SamplingSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn coordinates(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.x, p.omega)).collect()
    }

    pub fn to_csv(&self) -> String {
        points_to_csv(&self.points)
    }
}

pub fn points_to_csv(points: &[SamplingPoint]) -> String {
    let mut out = String::from(SAMPLING_CSV_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            p.n,
            p.sign_x,
            p.sign_omega,
            fmt_f64(p.x),
            fmt_f64(p.omega)
        );
    }
    out
}

/// Parse the CSV written by [`SamplingSet::to_csv`].
pub fn points_from_csv(text: &str) -> Result<Vec<SamplingPoint>> {
    csv_rows(text, SAMPLING_CSV_HEADER)?
        .into_iter()
        .map(|(line, f)| {
            let n = f[0]
                .trim()
                .parse::<u64>()
                .map_err(|_| Error::invalid(format!("line {line}: bad index {:?}", f[0])))?;
            let sign = |s: &str| match s.trim() {
                "1" => Ok(1i8),
                "-1" => Ok(-1i8),
                other => Err(Error::invalid(format!("line {line}: bad sign {other:?}"))),
            };
            Ok(SamplingPoint {
                n,
                sign_x: sign(f[1])?,
                sign_omega: sign(f[2])?,
                x: parse_f64(f[3], line)?,
                omega: parse_f64(f[4], line)?,
            })
        })
        .collect()
}

/// The `4N` points `(±τ₁ n^{(m-1)/m}, ±τ₂ n^{1/m})`, `n = 1..=N`, ordered by
/// `n` then quadrant, optionally preceded by the origin. When `validate_a`
/// is given the `τ` are checked against [`max_tau_bounds`].
pub fn generate_sampling_set(
    m: f64,
    tau1: f64,
    tau2: f64,
    n_max: u64,
    include_origin: bool,
    validate_a: Option<f64>,
) -> Result<SamplingSet> {
    if !(m > 1.0 && m.is_finite()) {
        return Err(Error::invalid(format!("m must exceed 1, got {m}")));
    }
    if !(tau1 > 0.0 && tau1.is_finite() && tau2 > 0.0 && tau2.is_finite()) {
        return Err(Error::invalid(format!("τ₁ and τ₂ must be positive, got {tau1}, {tau2}")));
    }
    if n_max < 1 {
        return Err(Error::invalid("the sampling set needs N >= 1"));
    }
    let mut warnings = Vec::new();
    match validate_a {
        Some(a) => {
            let b = max_tau_bounds(m, a)?;
            if !(tau1 < b.tau1_max) || !(tau2 < b.tau2_max) {
                return Err(Error::invalid(format!(
                    "τ₁ = {tau1}, τ₂ = {tau2} violate the bounds τ₁ < {}, τ₂ < {} for a = {a}",
                    b.tau1_max, b.tau2_max
                )));
            }
        }
        None => warnings.push("no decay rate a supplied; τ bounds not checked".to_string()),
    }
    let ex = (m - 1.0) / m;
    let eo = 1.0 / m;
    let mut points = Vec::with_capacity(4 * n_max as usize + usize::from(include_origin));
    if include_origin {
        points.push(SamplingPoint {
            n: 0,
            sign_x: 1,
            sign_omega: 1,
            x: 0.0,
            omega: 0.0,
        });
    }
    for n in 1..=n_max {
        let nf = n as f64;
        let x = tau1 * nf.powf(ex);
        let omega = tau2 * nf.powf(eo);
        for (sx, so) in QUADRANTS {
            points.push(SamplingPoint {
                n,
                sign_x: sx,
                sign_omega: so,
                x: sx as f64 * x,
                omega: so as f64 * omega,
            });
        }
    }
    Ok(SamplingSet {
        points,
        tau1,
        tau2,
        m,
        n_max,
        includes_origin: include_origin,
        warnings,
    })
}

/// `(2/(bρe))^{1/ρ}`: sequences with smaller density index are uniqueness
/// sets for the class of order `ρ` and type `b`.
pub fn uniqueness_threshold(rho: f64, b: f64) -> Result<f64> {
    check_rho_b(rho, b)?;
    Ok((2.0 / (b * rho * E)).powf(1.0 / rho))
}

/// `C_ρ = (π/(b|sin(πρ/2)|))^{1/ρ}`, or `(π/b)^{1/ρ}` when `ρ/2` is an
/// integer: sequences with larger density index are not uniqueness sets.
pub fn nonuniqueness_threshold(rho: f64, b: f64) -> Result<f64> {
    check_rho_b(rho, b)?;
    let half = rho / 2.0;
    if half.fract() == 0.0 {
        return Ok((PI / b).powf(1.0 / rho));
    }
    let s = (PI * half).sin().abs();
    Ok((PI / (b * s)).powf(1.0 / rho))
}

/// Minimum number of terms for a density estimate.
pub const MIN_DENSITY_TERMS: usize = 16;
/// Log-log slope of `λ_k/k^{1/ρ}` above which the ratio is flagged as
/// diverging.
pub const DIVERGENCE_SLOPE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    /// Minimum of `λ_k/k^{1/ρ}` over the tail half.
    pub value: f64,
    /// Slope of `ln(λ_k/k^{1/ρ})` against `ln k` on the tail half.
    pub slope: f64,
    pub divergent: bool,
}

fn check_sequence(lambdas: &[f64]) -> Result<()> {
    if lambdas.len() < MIN_DENSITY_TERMS {
        return Err(Error::InsufficientData(format!(
            "{} terms given, need at least {MIN_DENSITY_TERMS}",
            lambdas.len()
        )));
    }
    if lambdas.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
        return Err(Error::invalid("sequence terms must be positive and finite"));
    }
    if lambdas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("sequence must be strictly increasing"));
    }
    Ok(())
}

/// `liminf λ_k / k^{1/ρ}` estimated by the minimum over `k ∈ [K/2, K]`.
pub fn density_index(lambdas: &[f64], rho: f64) -> Result<DensityEstimate> {
    check_sequence(lambdas)?;
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::invalid(format!("ρ must be positive, got {rho}")));
    }
    let k_max = lambdas.len();
    let from = k_max.div_ceil(2);
    let tail: Vec<(f64, f64)> = (from..=k_max)
        .map(|k| {
            let kf = k as f64;
            (kf.ln(), lambdas[k - 1] / kf.powf(1.0 / rho))
        })
        .collect();
    let value = tail.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
    let rows: Vec<Vec<f64>> = tail.iter().map(|t| vec![t.0, 1.0]).collect();
    let y: Vec<f64> = tail.iter().map(|t| t.1.ln()).collect();
    let slope = least_squares(&rows, &y)?[0];
    Ok(DensityEstimate {
        value,
        slope,
        divergent: slope > DIVERGENCE_SLOPE,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Unique,
    NotUnique,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub rho: f64,
    pub b: f64,
    pub uniq_threshold: f64,
    pub nonuniq_threshold: f64,
    pub density: f64,
    pub verdict: Verdict,
    #[serde(skip)]
    pub warnings: Vec<String>,
}

/// Compare the density index of `λ` with both thresholds. The gap between
/// them is reported as `Indeterminate`.
pub fn classify_sequence(lambdas: &[f64], rho: f64, b: f64) -> Result<ThresholdReport> {
    let uniq = uniqueness_threshold(rho, b)?;
    let nonuniq = nonuniqueness_threshold(rho, b)?;
    let d = density_index(lambdas, rho)?;
    let verdict = if d.value < uniq {
        Verdict::Unique
    } else if d.value > nonuniq {
        Verdict::NotUnique
    } else {
        Verdict::Indeterminate
    };
    let mut warnings = Vec::new();
    if d.divergent {
        warnings.push(format!(
            "λ_k/k^(1/ρ) is still growing on the tail (log-log slope {:.3}); the density index is the tail minimum",
            d.slope
        ));
    }
    Ok(ThresholdReport {
        rho,
        b,
        uniq_threshold: uniq,
        nonuniq_threshold: nonuniq,
        density: d.value,
        verdict,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn power(c: f64, p: f64, k: usize) -> Vec<f64> {
        (1..=k).map(|k| c * (k as f64).powf(p)).collect()
    }

    #[test]
    fn tau_bounds() {
        let b = max_tau_bounds(2.0, PI).unwrap();
        assert!((b.tau1_max - 0.342198280312216533).abs() < 1e-15);
        assert!((b.tau2_max - 0.342198280312216533).abs() < 1e-15);
        let b = max_tau_bounds(2.0, 1.0).unwrap();
        assert!((b.tau1_max - 0.193064705260107815).abs() < 1e-15);
        assert!((b.tau2_max - 0.606530659712633424).abs() < 1e-15);
        let b = max_tau_bounds(1.5, 1.0).unwrap();
        assert!((b.tau1_max - 0.188275066180707661).abs() < 1e-15);
        assert!((b.tau2_max - 0.621960546471115225).abs() < 1e-15);
        assert!(max_tau_bounds(1.0, 1.0).is_err());
    }

    #[test]
    fn set_entries() {
        let s = generate_sampling_set(1.5, 0.1, 0.5, 8, false, None).unwrap();
        assert_eq!(s.len(), 32);
        let p = s.points[28];
        assert_eq!((p.n, p.sign_x, p.sign_omega), (8, 1, 1));
        assert!((p.x - 0.2).abs() < 1e-15 && (p.omega - 2.0).abs() < 1e-15);
        assert_eq!(s.warnings.len(), 1);
        let s = generate_sampling_set(2.0, 0.3, 0.3, 4, true, Some(PI)).unwrap();
        assert_eq!(s.len(), 17);
        assert_eq!(s.points[0].x, 0.0);
        let last = s.points[16];
        assert_eq!((last.sign_x, last.sign_omega), (1, -1));
        assert!((last.x - 0.6).abs() < 1e-15 && (last.omega + 0.6).abs() < 1e-15);
        assert!(s.warnings.is_empty());
        assert!(generate_sampling_set(2.0, 0.3, 0.3, 0, false, None).is_err());
        assert!(generate_sampling_set(2.0, 0.4, 0.3, 4, false, Some(PI)).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let s = generate_sampling_set(1.5, 0.1, 0.37, 20, true, None).unwrap();
        let back = points_from_csv(&s.to_csv()).unwrap();
        assert_eq!(back, s.points);
    }

    #[test]
    fn thresholds() {
        assert!((uniqueness_threshold(2.0, PI).unwrap() - 0.342198280312216533).abs() < 1e-15);
        assert!((uniqueness_threshold(2.0, 2.0 / E).unwrap() - 0.707106781186547524).abs() < 1e-15);
        assert!((uniqueness_threshold(3.0, 1.0).unwrap() - 0.625947755289160130).abs() < 1e-15);
        assert_eq!(nonuniqueness_threshold(2.0, PI).unwrap(), 1.0);
        assert!((nonuniqueness_threshold(3.0, PI).unwrap() - 1.0).abs() < 1e-15);
        assert!((nonuniqueness_threshold(4.0, 1.0).unwrap() - 1.33133536380038971).abs() < 1e-15);
    }

    #[test]
    fn density_examples() {
        let d = density_index(&power(0.3, 0.5, 200), 2.0).unwrap();
        assert!((d.value - 0.3).abs() < 1e-15 && !d.divergent);
        let perturbed: Vec<f64> = (1..=200)
            .map(|k| 0.3 * (k as f64).sqrt() * (1.0 + 1.0 / k as f64))
            .collect();
        let d = density_index(&perturbed, 2.0).unwrap();
        assert!((d.value / 0.3 - 1.0).abs() < 0.01);
        let d = density_index(&power(1.0, 1.0, 200), 2.0).unwrap();
        assert!(d.divergent);
        assert!(matches!(density_index(&power(1.0, 1.0, 10), 2.0), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn verdicts() {
        let v = |c: f64| classify_sequence(&power(c, 0.5, 200), 2.0, PI).unwrap().verdict;
        assert_eq!(v(0.3), Verdict::Unique);
        assert_eq!(v(1.5), Verdict::NotUnique);
        assert_eq!(v(0.6), Verdict::Indeterminate);
    }

    #[test]
    fn report_json_keys() {
        let r = classify_sequence(&power(0.3, 0.5, 64), 2.0, PI).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        keys.sort();
        assert_eq!(keys, ["b", "density", "nonuniq_threshold", "rho", "uniq_threshold", "verdict"]);
        assert_eq!(v["verdict"], "Unique");
    }
}
