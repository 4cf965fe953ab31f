use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this `|f(0)|` the Jensen average is not attempted.
pub const ORIGIN_ZERO_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JensenMean {
    /// `(1/2π) ∫ ln|f(re^{iθ})| dθ`.
    pub value: f64,
    /// `ln|f(0)|`.
    pub log_origin: f64,
    /// Angles at which `|f|` fell below [`LOG_SINGULAR`]; those samples are
    /// left out of the average.
    pub singular_samples: Vec<f64>,
}

/// Samples with `|f|` below this are treated as hitting a zero.
pub const LOG_SINGULAR: f64 = 1e-300;

/// Circle average `(1/2π) ∫_0^{2π} ln|f(re^{iθ})| dθ` by the periodic
/// trapezoid rule on `n_theta` angles. Minus `ln|f(0)|` it equals
/// `Σ ln(r/|z_k|)` over the zeros inside the disc.
pub fn jensen_integral<F>(f: F, r: f64, n_theta: usize) -> Result<JensenMean>
where
    F: Fn(Complex64) -> Complex64,
{
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid(format!("radius must be positive, got {r}")));
    }
    if n_theta < 64 {
        return Err(Error::invalid(format!("n_theta must be at least 64, got {n_theta}")));
    }
    let f0 = f(Complex64::new(0.0, 0.0)).norm();
    if !(f0 > ORIGIN_ZERO_TOL) {
        return Err(Error::ZeroAtOrigin(f0));
    }
    let mut sum = 0.0;
    let mut used = 0usize;
    let mut singular = Vec::new();
    for k in 0..n_theta {
        let th = 2.0 * PI * k as f64 / n_theta as f64;
        let v = f(Complex64::from_polar(r, th)).norm();
        if !v.is_finite() {
            return Err(Error::Overflow(format!("f is not finite at r = {r}, θ = {th}")));
        }
        if v < LOG_SINGULAR {
            singular.push(th);
            continue;
        }
        sum += v.ln();
        used += 1;
    }
    if used == 0 {
        return Err(Error::InsufficientData("f vanishes at every sample on the circle".into()));
    }
    Ok(JensenMean {
        value: sum / used as f64,
        log_origin: f0.ln(),
        singular_samples: singular,
    })
}

/// Upper bound on the number of zeros in `|z| <= r` for `f(0) = 1` and
/// `|f(z)| <= C e^{b|z|^ρ}`: `n(r) ln s <= ln C + b (sr)^ρ` for any `s > 1`.
pub fn zero_count_bound(r: f64, s: f64, c_bound: f64, b: f64, rho: f64) -> Result<u64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid(format!("radius must be positive, got {r}")));
    }
    if !(s > 1.0 && s.is_finite()) {
        return Err(Error::invalid(format!("s must exceed 1, got {s}")));
    }
    if !(c_bound > 0.0 && c_bound.is_finite()) {
        return Err(Error::invalid(format!("C must be positive, got {c_bound}")));
    }
    if !(b >= 0.0 && b.is_finite() && rho > 0.0 && rho.is_finite()) {
        return Err(Error::invalid("b must be nonnegative and ρ positive"));
    }
    let bound = ((c_bound.ln() + b * (s * r).powf(rho)) / s.ln()).max(0.0);
    if !bound.is_finite() || bound >= u64::MAX as f64 {
        return Err(Error::Overflow(format!("zero-count bound {bound:e} is out of range")));
    }
    Ok(bound.floor() as u64)
}
