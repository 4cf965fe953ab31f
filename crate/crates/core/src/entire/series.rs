use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::fit::least_squares;
use crate::quadrature::{concave_support, integrate_checked, QuadratureConfig, TRUNCATION_DROP};
use crate::windows::FourierSide;

/// `ln ∫ |ξ|^n e^{-a|ξ|^m} dξ = ln(2 / (m a^{(n+1)/m})) + ln Γ((n+1)/m)`.
pub fn ln_moment_integral(n: u32, a: f64, m: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::invalid(format!("moment needs a > 0, got {a}")));
    }
    if !(m >= 1.0 && m.is_finite()) {
        return Err(Error::invalid(format!("moment needs m >= 1, got {m}")));
    }
    let s = (n as f64 + 1.0) / m;
    Ok(2f64.ln() - m.ln() - s * a.ln() + ln_gamma(s))
}

/// `∫ |ξ|^n e^{-a|ξ|^m} dξ` in closed form.
pub fn moment_integral(n: u32, a: f64, m: f64) -> Result<f64> {
    let ln = ln_moment_integral(n, a, m)?;
    if ln > f64::MAX.ln() {
        return Err(Error::Overflow(format!(
            "moment of order {n} is e^{ln:.1}, beyond double range"
        )));
    }
    Ok(ln.exp())
}

/// Taylor coefficients `c_0..=c_N` about the origin.
///
/// `log_magnitudes` carries `ln |c_n|` (`-inf` for exact zeros) and is the
/// authoritative magnitude: `coefficients` may underflow for large `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaylorSeries {
    pub coefficients: Vec<Complex64>,
    pub log_magnitudes: Vec<f64>,
    pub source: String,
}

impl TaylorSeries {
    pub fn from_coefficients(coefficients: Vec<Complex64>, source: impl Into<String>) -> Result<Self> {
        if coefficients.len() < 3 {
            return Err(Error::invalid("a Taylor series needs truncation N >= 2"));
        }
        if coefficients.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::invalid("Taylor coefficients must be finite"));
        }
        let log_magnitudes = coefficients.iter().map(|c| c.norm().ln()).collect();
        Ok(Self {
            coefficients,
            log_magnitudes,
            source: source.into(),
        })
    }

    /// Build from `ln |c_n|` and unit phases; useful when `|c_n|` underflows.
    pub fn from_log_parts(log_magnitudes: Vec<f64>, phases: Vec<Complex64>, source: impl Into<String>) -> Result<Self> {
        if log_magnitudes.len() < 3 || phases.len() != log_magnitudes.len() {
            return Err(Error::invalid("log parts need equal lengths and N >= 2"));
        }
        if log_magnitudes.iter().any(|l| l.is_nan() || *l == f64::INFINITY) {
            return Err(Error::invalid("log magnitudes must be finite or -inf"));
        }
        let coefficients = log_magnitudes
            .iter()
            .zip(&phases)
            .map(|(l, p)| if *l == f64::NEG_INFINITY { Complex64::new(0.0, 0.0) } else { p * l.exp() })
            .collect();
        Ok(Self {
            coefficients,
            log_magnitudes,
            source: source.into(),
        })
    }

    pub fn truncation(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coefficients
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    fn nonzero_indices(&self, from: usize) -> Vec<usize> {
        (from..self.coefficients.len())
            .filter(|&n| self.log_magnitudes[n].is_finite())
            .collect()
    }
}

/// Taylor coefficients of the entire extension `f(z) = ∫ ĝ(ξ) e^{2πiξz} dξ`:
/// `c_n = (2πi)^n / n! ∫ ξ^n ĝ(ξ) dξ`, each moment by quadrature.
///
/// Each moment integrand is rescaled by its own peak so that `ξ^n` does not
/// overflow; magnitudes are assembled in the log domain. When `ĝ` is real
/// and even the odd coefficients are exactly zero.
pub fn taylor_coefficients<W>(ghat: &W, n_max: usize, quad: &QuadratureConfig) -> Result<TaylorSeries>
where
    W: FourierSide + ?Sized,
{
    quad.validate()?;
    if n_max < 2 {
        return Err(Error::invalid("Taylor truncation N must be at least 2"));
    }
    let env = ghat.envelope();
    if env.is_none() && quad.radius.is_none() {
        return Err(Error::invalid(
            "evaluator has no decay envelope; set an explicit quadrature radius",
        ));
    }
    let probe_radius = match (quad.radius, env) {
        (Some(r), _) => r,
        (None, Some(e)) => e.center.abs() + (TRUNCATION_DROP / e.a).powf(1.0 / e.m),
        (None, None) => unreachable!(),
    };
    let symmetry = probe_symmetry(ghat, probe_radius);
    let mut singular = ghat.singular_points();
    singular.push(0.0);

    let mut logs = Vec::with_capacity(n_max + 1);
    let mut phases = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if symmetry == Symmetry::Zero || (symmetry == Symmetry::EvenReal && n % 2 == 1) {
            logs.push(f64::NEG_INFINITY);
            phases.push(Complex64::new(1.0, 0.0));
            continue;
        }
        let nf = n as f64;
        let (lo, hi, shift) = match (quad.radius, env) {
            (Some(r), _) => (-r, r, nf * r.ln()),
            (None, Some(e)) => {
                let reach = e.center.abs() + (nf.max(1.0) / (e.a * e.m)).powf(1.0 / e.m)
                    + (TRUNCATION_DROP / e.a).powf(1.0 / e.m)
                    + 1.0;
                if n == 0 {
                    let s = concave_support(|x| e.log_bound(x), -reach, reach, TRUNCATION_DROP);
                    (s.lo, s.hi, 0.0)
                } else {
                    let log_phi = |x: f64| nf * x.abs().ln() + e.log_bound(x);
                    let pos = concave_support(log_phi, 0.0, reach, TRUNCATION_DROP);
                    let neg = concave_support(log_phi, -reach, 0.0, TRUNCATION_DROP);
                    (neg.lo, pos.hi, pos.peak.max(neg.peak) - e.c.ln())
                }
            }
            (None, None) => unreachable!(),
        };
        let integrand = |x: f64| {
            if n == 0 {
                return ghat.fourier(x);
            }
            if x == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let w = (nf * x.abs().ln() - shift).exp();
            let sign = if x < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
            ghat.fourier(x) * (sign * w)
        };
        let moment = integrate_checked(
            &integrand,
            lo,
            hi,
            &singular,
            quad.panels(),
            quad.tol,
            &format!("moment of order {n}"),
        )?;
        let mut moment = moment;
        if symmetry == Symmetry::EvenReal {
            moment.im = 0.0;
        }
        let mag = moment.norm();
        if mag == 0.0 {
            logs.push(f64::NEG_INFINITY);
            phases.push(Complex64::new(1.0, 0.0));
            continue;
        }
        logs.push(nf * (2.0 * PI).ln() - ln_gamma(nf + 1.0) + shift + mag.ln());
        phases.push(i_pow(n) * (moment / mag));
    }
    let mut series = TaylorSeries::from_log_parts(logs, phases, "inverse Fourier moments")?;
    if symmetry == Symmetry::EvenReal {
        for c in series.coefficients.iter_mut() {
            c.im = 0.0;
        }
    }
    Ok(series)
}

fn i_pow(n: usize) -> Complex64 {
    match n % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    Zero,
    EvenReal,
    General,
}

fn probe_symmetry<W: FourierSide + ?Sized>(ghat: &W, radius: f64) -> Symmetry {
    const PROBES: usize = 64;
    let mut scale: f64 = ghat.fourier(0.0).norm();
    let mut asym: f64 = ghat.fourier(0.0).im.abs();
    for k in 1..=PROBES {
        let x = radius * k as f64 / PROBES as f64;
        let p = ghat.fourier(x);
        let q = ghat.fourier(-x);
        scale = scale.max(p.norm()).max(q.norm());
        asym = asym.max((p - q).norm()).max(p.im.abs()).max(q.im.abs());
    }
    if scale == 0.0 {
        Symmetry::Zero
    } else if asym <= 1e-14 * scale {
        Symmetry::EvenReal
    } else {
        Symmetry::General
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GrowthMethod {
    /// Closed-form bound from the decay parameters.
    Predicted,
    /// Regression of `ln(1/|c_n|)` on the tail of the Taylor series.
    TailRegression,
    /// All coefficients beyond `c_0` vanish.
    Polynomial,
}

/// Order `ρ` and type `τ` of an entire function, predicted or estimated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthEstimate {
    pub order: f64,
    #[serde(rename = "type")]
    pub type_: f64,
    pub method: GrowthMethod,
    /// `(r, M_f(r))` pairs, when sampled.
    pub max_modulus_samples: Option<Vec<(f64, f64)>>,
    /// Index range of the coefficients entering the estimate; `None` when
    /// predicted analytically.
    pub n_used: Option<(usize, usize)>,
    /// The plain tail-window maximum of the limsup expression, for reference.
    pub tail_max: Option<f64>,
    /// RMS residual of the regression.
    pub fit_residual: Option<f64>,
}

const MIN_NONZERO: usize = 10;
const MIN_TAIL: usize = 5;

fn tail_indices(series: &TaylorSeries) -> Result<Option<Vec<usize>>> {
    let nonzero = series.nonzero_indices(1);
    if nonzero.is_empty() {
        return Ok(None);
    }
    if nonzero.len() < MIN_NONZERO {
        return Err(Error::InsufficientData(format!(
            "{} nonzero coefficients beyond c_0, need at least {MIN_NONZERO}",
            nonzero.len()
        )));
    }
    let n_max = series.truncation();
    let lo = n_max.div_ceil(2).max(2);
    let tail: Vec<usize> = nonzero.into_iter().filter(|&n| n >= lo).collect();
    if tail.len() < MIN_TAIL {
        return Err(Error::InsufficientData(format!(
            "{} nonzero coefficients in the tail window [{lo}, {n_max}], need at least {MIN_TAIL}",
            tail.len()
        )));
    }
    Ok(Some(tail))
}

fn polynomial_estimate(series: &TaylorSeries) -> GrowthEstimate {
    GrowthEstimate {
        order: 0.0,
        type_: 0.0,
        method: GrowthMethod::Polynomial,
        max_modulus_samples: None,
        n_used: Some((0, series.truncation())),
        tail_max: None,
        fit_residual: None,
    }
}

fn rms(residuals: impl Iterator<Item = f64>) -> f64 {
    let (s, k) = residuals.fold((0.0, 0usize), |(s, k), r| (s + r * r, k + 1));
    (s / k.max(1) as f64).sqrt()
}

/// Estimate the order `ρ = limsup n ln n / ln(1/|c_n|)`.
///
/// The limsup is approached far too slowly for a finite tail maximum to be
/// useful (for `e^z` at `N = 60` it is still 1.3), so the tail window
/// `[N/2, N]` is instead fitted to the Stirling-type asymptotics
/// `ln(1/|c_n|) = (n ln n)/ρ + βn + γ ln n + δ`, which also yields the type
/// through `ln(eρτ) = -βρ`.
pub fn estimate_order(series: &TaylorSeries) -> Result<GrowthEstimate> {
    let Some(tail) = tail_indices(series)? else {
        return Ok(polynomial_estimate(series));
    };
    let rows: Vec<Vec<f64>> = tail
        .iter()
        .map(|&n| {
            let n = n as f64;
            vec![n * n.ln(), n, n.ln(), 1.0]
        })
        .collect();
    let y: Vec<f64> = tail.iter().map(|&n| -series.log_magnitudes[n]).collect();
    let x = least_squares(&rows, &y)?;
    if !(x[0] > 0.0) {
        return Err(Error::FitDegenerate(
            "coefficients do not decay factorially; order not estimable from this series".into(),
        ));
    }
    let order = 1.0 / x[0];
    let type_ = (-x[1] * order - 1.0).exp() / order;
    let residual = rms(rows.iter().zip(&y).map(|(r, yy)| {
        yy - r.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>()
    }));
    let tail_max = tail
        .iter()
        .filter(|&&n| -series.log_magnitudes[n] > 0.0)
        .map(|&n| {
            let nf = n as f64;
            nf * nf.ln() / -series.log_magnitudes[n]
        })
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
    Ok(GrowthEstimate {
        order,
        type_,
        method: GrowthMethod::TailRegression,
        max_modulus_samples: None,
        n_used: Some((tail[0], *tail.last().unwrap())),
        tail_max,
        fit_residual: Some(residual),
    })
}

/// Estimate the type `τ = (1/(eρ)) limsup n |c_n|^{ρ/n}` for a given order.
///
/// Uses the same tail regression as [`estimate_order`] with the `n ln n`
/// slope pinned to `1/ρ`.
pub fn estimate_type(series: &TaylorSeries, rho: f64) -> Result<GrowthEstimate> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::invalid(format!("type needs a positive order, got {rho}")));
    }
    let Some(tail) = tail_indices(series)? else {
        let mut est = polynomial_estimate(series);
        est.order = rho;
        return Ok(est);
    };
    let rows: Vec<Vec<f64>> = tail
        .iter()
        .map(|&n| {
            let n = n as f64;
            vec![n, n.ln(), 1.0]
        })
        .collect();
    let y: Vec<f64> = tail
        .iter()
        .map(|&n| {
            let nf = n as f64;
            -series.log_magnitudes[n] - nf * nf.ln() / rho
        })
        .collect();
    let x = least_squares(&rows, &y)?;
    let type_ = (-x[0] * rho - 1.0).exp() / rho;
    let residual = rms(rows.iter().zip(&y).map(|(r, yy)| {
        yy - r.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>()
    }));
    let tail_max = tail
        .iter()
        .map(|&n| {
            let nf = n as f64;
            nf * (rho * series.log_magnitudes[n] / nf).exp() / (std::f64::consts::E * rho)
        })
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
    Ok(GrowthEstimate {
        order: rho,
        type_,
        method: GrowthMethod::TailRegression,
        max_modulus_samples: None,
        n_used: Some((tail[0], *tail.last().unwrap())),
        tail_max,
        fit_residual: Some(residual),
    })
}

/// Order `m/(m-1)` and type `((m-1)/m) (2π)^{m/(m-1)} (am)^{-1/(m-1)}` of the
/// entire extension of a window with `|ĝ(ξ)| <= C e^{-a|ξ|^m}`.
pub fn predicted_growth(m: f64, a: f64) -> Result<GrowthEstimate> {
    if !(m > 1.0 && m.is_finite()) {
        return Err(Error::invalid(format!("m must exceed 1, got {m}")));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::invalid(format!("a must be positive, got {a}")));
    }
    let order = m / (m - 1.0);
    let type_ = (m - 1.0) / m * (2.0 * PI).powf(order) * (a * m).powf(-1.0 / (m - 1.0));
    Ok(GrowthEstimate {
        order,
        type_,
        method: GrowthMethod::Predicted,
        max_modulus_samples: None,
        n_used: None,
        tail_max: None,
        fit_residual: None,
    })
}

/// `M_f(r) = max_θ |f(re^{iθ})|` of the truncated series, sampled at
/// `n_theta` angles.
pub fn max_modulus_samples(series: &TaylorSeries, radii: &[f64], n_theta: usize) -> Vec<(f64, f64)> {
    radii
        .iter()
        .map(|&r| {
            let m = (0..n_theta.max(1))
                .map(|k| {
                    let th = 2.0 * PI * k as f64 / n_theta.max(1) as f64;
                    series.eval(Complex64::from_polar(r, th)).norm()
                })
                .fold(0.0, f64::max);
            (r, m)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::windows::WindowModel;

    fn inv_factorial_series(n_max: usize) -> TaylorSeries {
        let logs = (0..=n_max).map(|n| -ln_gamma(n as f64 + 1.0)).collect();
        TaylorSeries::from_log_parts(logs, vec![Complex64::new(1.0, 0.0); n_max + 1], "1/n!").unwrap()
    }

    #[test]
    fn moment_closed_forms() {
        let sqrt_pi = PI.sqrt();
        assert!((moment_integral(0, 1.0, 2.0).unwrap() - sqrt_pi).abs() < 1e-14);
        assert!((moment_integral(1, 1.0, 2.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((moment_integral(2, 1.0, 2.0).unwrap() - sqrt_pi / 2.0).abs() < 1e-14);
        assert!(moment_integral(0, 0.0, 2.0).is_err());
        assert!(moment_integral(0, 1.0, 0.5).is_err());
        assert!(matches!(moment_integral(400, 1e-3, 1.0), Err(Error::Overflow(_))));
    }

    #[test]
    fn gaussian_taylor_coefficients() {
        let g = WindowModel::generalized_gaussian(1.0, 2.0, 1.0).unwrap();
        let s = taylor_coefficients(&g, 2, &QuadratureConfig::default()).unwrap();
        assert!((s.coefficients[0].re - PI.sqrt()).abs() < 1e-13);
        assert_eq!(s.coefficients[1], Complex64::new(0.0, 0.0));
        assert!((s.coefficients[2].re - (-17.493418327624862)).abs() < 1e-11);
        assert_eq!(s.coefficients[2].im, 0.0);
    }

    #[test]
    fn generalized_gaussian_growth_matches_prediction() {
        let q = QuadratureConfig::default();
        for (m, a) in [(2.0, PI), (2.0, 1.0), (1.5, 1.0), (3.0, 0.5), (1.5, 2.0)] {
            let g = WindowModel::generalized_gaussian(a, m, 1.0).unwrap();
            let s = taylor_coefficients(&g, 80, &q).unwrap();
            let pred = predicted_growth(m, a).unwrap();
            let est = estimate_order(&s).unwrap();
            assert!((est.order / pred.order - 1.0).abs() < 0.03, "m={m} a={a}: {est:?}");
            let t = estimate_type(&s, pred.order).unwrap();
            assert!(t.type_ <= pred.type_ * 1.05, "m={m} a={a}: {t:?} vs {pred:?}");
            assert!((t.type_ / pred.type_ - 1.0).abs() < 0.05, "m={m} a={a}: {t:?} vs {pred:?}");
        }
    }

    #[test]
    fn zero_function_has_zero_series() {
        let zero = |_: f64| Complex64::new(0.0, 0.0);
        let q = QuadratureConfig::default().with_radius(5.0);
        let s = taylor_coefficients(&zero, 5, &q).unwrap();
        assert!(s.coefficients.iter().all(|c| *c == Complex64::new(0.0, 0.0)));
        let est = estimate_type(&s, 2.0).unwrap();
        assert_eq!(est.type_, 0.0);
    }

    #[test]
    fn order_and_type_of_exponential() {
        let s = inv_factorial_series(60);
        let est = estimate_order(&s).unwrap();
        assert!((est.order - 1.0).abs() < 0.03, "{est:?}");
        let t = estimate_type(&s, 1.0).unwrap();
        assert!((t.type_ - 1.0).abs() < 0.05, "{t:?}");
        // the naive tail maximum is far off at this truncation
        assert!(est.tail_max.unwrap() > 1.3);
    }

    #[test]
    fn order_of_exp_z_squared() {
        let logs = (0..=60)
            .map(|n| if n % 2 == 0 { -ln_gamma((n / 2) as f64 + 1.0) } else { f64::NEG_INFINITY })
            .collect();
        let s = TaylorSeries::from_log_parts(logs, vec![Complex64::new(1.0, 0.0); 61], "e^{z^2}").unwrap();
        let est = estimate_order(&s).unwrap();
        assert!((est.order - 2.0).abs() < 0.05, "{est:?}");
        assert!((est.type_ - 1.0).abs() < 0.05, "{est:?}");
    }

    #[test]
    fn too_few_coefficients() {
        let mut c = vec![Complex64::new(0.0, 0.0); 40];
        for n in 0..5 {
            c[n] = Complex64::new(1.0, 0.0);
        }
        let s = TaylorSeries::from_coefficients(c, "short").unwrap();
        assert!(matches!(estimate_order(&s), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn predicted_values() {
        let p = predicted_growth(2.0, PI).unwrap();
        assert_eq!(p.order, 2.0);
        assert!((p.type_ - PI).abs() < 1e-14);
        assert!(p.n_used.is_none());
        let p = predicted_growth(2.0, 1.0).unwrap();
        assert!((p.type_ - PI * PI).abs() < 1e-13);
        let p = predicted_growth(1.5, 1.0).unwrap();
        assert!((p.order - 3.0).abs() < 1e-15);
        assert!((p.type_ - 36.748179769244231).abs() < 1e-11);
        assert!(predicted_growth(1.0, 1.0).is_err());
    }

    #[test]
    fn series_evaluation_matches_function() {
        let s = inv_factorial_series(40);
        let z = Complex64::new(0.3, -1.2);
        assert!((s.eval(z) - z.exp()).norm() < 1e-14);
        let mm = max_modulus_samples(&s, &[1.0], 360);
        assert!((mm[0].1 - 1f64.exp()).abs() < 1e-12);
    }
}
