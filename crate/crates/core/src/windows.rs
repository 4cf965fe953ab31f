//! Window functions whose Fourier transform obeys `|ĝ(ξ)| <= C e^{-a|ξ|^m}`
//! with `m > 1`, their time-domain (and complex-time) evaluation, and the
//! Fourier transform of the reflected window product that must not vanish
//! on a set of positive measure.

use std::f64::consts::PI;

use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{concave_support, integrate_checked, QuadratureConfig, TRUNCATION_DROP};

/// Bound `|ĝ(ξ)| <= c * exp(-a |ξ - center|^m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayEnvelope {
    pub c: f64,
    pub a: f64,
    pub m: f64,
    pub center: f64,
}

impl DecayEnvelope {
    pub fn log_bound(&self, xi: f64) -> f64 {
        self.c.ln() - self.a * (xi - self.center).abs().powf(self.m)
    }
}

/// Anything that can be evaluated on the Fourier side.
///
/// Closures `Fn(f64) -> Complex64` implement this with no envelope; wrap
/// them in [`Enveloped`] to let integrators pick truncation ranges
/// automatically.
pub trait FourierSide {
    fn fourier(&self, xi: f64) -> Complex64;

    fn envelope(&self) -> Option<DecayEnvelope> {
        None
    }

    /// Points where the evaluator may fail to be smooth.
    fn singular_points(&self) -> Vec<f64> {
        vec![0.0]
    }
}

impl<F: Fn(f64) -> Complex64> FourierSide for F {
    fn fourier(&self, xi: f64) -> Complex64 {
        self(xi)
    }
}

/// A Fourier-side evaluator together with its decay envelope.
pub struct Enveloped<F> {
    pub f: F,
    pub envelope: DecayEnvelope,
}

impl<F: Fn(f64) -> Complex64> FourierSide for Enveloped<F> {
    fn fourier(&self, xi: f64) -> Complex64 {
        (self.f)(xi)
    }

    fn envelope(&self) -> Option<DecayEnvelope> {
        Some(self.envelope)
    }

    fn singular_points(&self) -> Vec<f64> {
        vec![self.envelope.center]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WindowFamily {
    /// `ĝ(ξ) = C e^{-a|ξ|^m}`.
    GeneralizedGaussianFourier,
    /// `ĝ(ξ) = C e^{-a|ξ-ξ0|^m}`, i.e. the window times `e^{2πiξ0 t}`.
    ModulatedGeneralizedGaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowModel {
    pub family: WindowFamily,
    pub a: f64,
    pub m: f64,
    pub c: f64,
    pub modulation: Option<f64>,
}

impl WindowModel {
    pub fn generalized_gaussian(a: f64, m: f64, c: f64) -> Result<Self> {
        check_decay_params(a, m, c)?;
        Ok(Self {
            family: WindowFamily::GeneralizedGaussianFourier,
            a,
            m,
            c,
            modulation: None,
        })
    }

    pub fn modulated(a: f64, m: f64, c: f64, xi0: f64) -> Result<Self> {
        check_decay_params(a, m, c)?;
        if !xi0.is_finite() {
            return Err(Error::invalid("modulation frequency must be finite"));
        }
        Ok(Self {
            family: WindowFamily::ModulatedGeneralizedGaussian,
            a,
            m,
            c,
            modulation: Some(xi0),
        })
    }

    /// Non-fatal remarks about the parameters.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.a <= 1.0 {
            w.push(format!(
                "decay rate a = {} is not in (1, inf); the sampling theorem is stated for a > 1, the growth bounds hold for any a > 0",
                self.a
            ));
        }
        w
    }

    fn center(&self) -> f64 {
        self.modulation.unwrap_or(0.0)
    }

    /// The Fourier-side evaluator `ĝ(ξ)`.
    pub fn fourier(&self, xi: f64) -> Complex64 {
        let d = (xi - self.center()).abs();
        Complex64::new(self.c * (-self.a * d.powf(self.m)).exp(), 0.0)
    }

    pub fn envelope(&self) -> DecayEnvelope {
        DecayEnvelope {
            c: self.c,
            a: self.a,
            m: self.m,
            center: self.center(),
        }
    }

    /// `ĝ` is entire (and the contour of the inverse transform may be moved)
    /// only for the Gaussian exponent.
    pub fn is_gaussian(&self) -> bool {
        self.m == 2.0
    }

    /// Interval outside which `|g(t)| <= eps` on the real line, when known
    /// in closed form. Only the Gaussian exponent has a Gaussian tail;
    /// other exponents decay algebraically.
    pub fn time_support(&self, eps: f64) -> Option<(f64, f64)> {
        if !self.is_gaussian() {
            return None;
        }
        let peak = self.c * (PI / self.a).sqrt();
        if peak <= eps {
            return Some((0.0, 0.0));
        }
        let r = (self.a * (peak / eps).ln()).sqrt() / PI;
        Some((-r, r))
    }

    /// `g(t) = ∫ ĝ(ξ) e^{2πiξt} dξ`, truncated to the envelope's effective
    /// support. For complex `t` this is the entire extension of the window.
    pub fn time(&self, t: Complex64, quad: &QuadratureConfig) -> Result<Complex64> {
        quad.validate()?;
        let (a, m) = (self.a, self.m);
        let ln_c = self.c.ln();
        let two_pi_i_t = Complex64::new(0.0, 2.0 * PI) * t;
        let integral = if self.is_gaussian() {
            // Move the line of integration through the saddle point
            // iπt/a; the integrand is then a real Gaussian times a constant
            // and no cancellation is left.
            let shift = Complex64::new(0.0, PI) * t / a;
            let f = |u: f64| {
                let xi = shift + u;
                (ln_c - a * xi * xi + two_pi_i_t * xi).exp()
            };
            let r = quad.radius.unwrap_or_else(|| (TRUNCATION_DROP / a).sqrt() + 1.0);
            integrate_checked(&f, -r, r, &[], quad.panels(), quad.tol, "window inverse transform")?
        } else {
            let tilt = -2.0 * PI * t.im;
            let log_mod = |u: f64| ln_c - a * u.abs().powf(m) + tilt * u;
            let (lo, hi) = match quad.radius {
                Some(r) => (-r, r),
                None => {
                    let peak = tilt.signum() * (tilt.abs() / (a * m)).powf(1.0 / (m - 1.0));
                    let reach = peak.abs() + (TRUNCATION_DROP / a).powf(1.0 / m) + 1.0;
                    let s = concave_support(log_mod, -reach, reach, TRUNCATION_DROP);
                    (s.lo, s.hi)
                }
            };
            let f = |u: f64| (ln_c - a * u.abs().powf(m) + two_pi_i_t * u).exp();
            let span = hi - lo;
            let panels = quad.panels().max((span * (t.re.abs() + 0.25)).ceil() as usize);
            integrate_checked(&f, lo, hi, &[0.0], panels, quad.tol, "window inverse transform")?
        };
        let phase = match self.modulation {
            Some(xi0) => (two_pi_i_t * xi0).exp(),
            None => Complex64::new(1.0, 0.0),
        };
        Ok(phase * integral)
    }

    pub fn time_real(&self, t: f64, quad: &QuadratureConfig) -> Result<Complex64> {
        self.time(Complex64::new(t, 0.0), quad)
    }

    /// `g(t) = C √(π/a) e^{-π²t²/a}` (times the modulation phase), available
    /// for the Gaussian exponent only.
    pub fn time_closed_form(&self, t: Complex64) -> Option<Complex64> {
        if !self.is_gaussian() {
            return None;
        }
        let mut v = (-PI * PI * t * t / self.a).exp() * (self.c * (PI / self.a).sqrt());
        if let Some(xi0) = self.modulation {
            v *= (Complex64::new(0.0, 2.0 * PI * xi0) * t).exp();
        }
        Some(v)
    }

    /// `‖g‖₂ = ‖ĝ‖₂ = C (2Γ(1/m) / (m (2a)^{1/m}))^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        let m = self.m;
        let ln = 2f64.ln() + ln_gamma(1.0 / m) - m.ln() - (2.0 * self.a).ln() / m;
        self.c * (0.5 * ln).exp()
    }
}

impl FourierSide for WindowModel {
    fn fourier(&self, xi: f64) -> Complex64 {
        WindowModel::fourier(self, xi)
    }

    fn envelope(&self) -> Option<DecayEnvelope> {
        Some(WindowModel::envelope(self))
    }

    fn singular_points(&self) -> Vec<f64> {
        vec![self.center()]
    }
}

fn check_decay_params(a: f64, m: f64, c: f64) -> Result<()> {
    if !(m > 1.0 && m.is_finite()) {
        return Err(Error::invalid(format!("decay exponent m must satisfy m > 1, got {m}")));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::invalid(format!("decay rate a must be positive, got {a}")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::invalid(format!("amplitude C must be positive, got {c}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub passes: bool,
    /// `max |ĝ(ξ)| e^{a|ξ|^m} / C` over the grid.
    pub worst_ratio: f64,
    pub worst_location: f64,
}

/// Check `|ĝ(ξ)| <= C e^{-a|ξ|^m} (1 + tol)` on `grid`.
pub fn verify_decay<F>(ghat: F, a: f64, m: f64, c: f64, grid: &[f64], tol: f64) -> Result<DecayReport>
where
    F: Fn(f64) -> Complex64,
{
    if grid.is_empty() {
        return Err(Error::invalid("decay check needs a nonempty grid"));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("decay check grid contains non-finite values"));
    }
    let mut worst_ratio = f64::NEG_INFINITY;
    let mut worst_location = grid[0];
    for &xi in grid {
        let mag = ghat(xi).norm();
        let ratio = if mag == 0.0 {
            0.0
        } else {
            (mag.ln() + a * xi.abs().powf(m) - c.ln()).exp()
        };
        if ratio > worst_ratio {
            worst_ratio = ratio;
            worst_location = xi;
        }
    }
    Ok(DecayReport {
        passes: worst_ratio <= 1.0 + tol,
        worst_ratio,
        worst_location,
    })
}

/// The default scan grid: 1001 uniform points on [-5, 5].
pub fn default_scan_grid() -> Vec<f64> {
    uniform_grid(-5.0, 5.0, 1001)
}

pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Relative magnitude below which a scan value counts as a zero.
pub const NEAR_ZERO_RELATIVE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityScanReport {
    pub omega: f64,
    pub grid: Vec<f64>,
    pub magnitudes: Vec<f64>,
    pub min_magnitude: f64,
    pub near_zero_fraction: f64,
}

/// Evaluate `ξ ↦ |∫ e^{2πiωη} ĝ(-η) conj(ĝ(ξ-η)) dη|` on `xi_grid`.
///
/// This is the Fourier transform of the reflected product
/// `t ↦ g(-t-ω) conj(g(-t))`; a window is admissible when it vanishes only
/// on a null set for every `ω`.
pub fn window_ambiguity_scan<W>(
    w: &W,
    omega: f64,
    xi_grid: &[f64],
    quad: &QuadratureConfig,
) -> Result<AmbiguityScanReport>
where
    W: FourierSide + ?Sized,
{
    quad.validate()?;
    if xi_grid.is_empty() {
        return Err(Error::invalid("ambiguity scan needs a nonempty grid"));
    }
    let envelope = w.envelope();
    if envelope.is_none() && quad.radius.is_none() {
        return Err(Error::invalid(
            "evaluator has no decay envelope; set an explicit quadrature radius",
        ));
    }
    let singular = w.singular_points();
    let mut magnitudes = Vec::with_capacity(xi_grid.len());
    for &xi in xi_grid {
        let f = |eta: f64| {
            let phase = Complex64::from_polar(1.0, 2.0 * PI * omega * eta);
            phase * w.fourier(-eta) * w.fourier(xi - eta).conj()
        };
        let (lo, hi) = match (quad.radius, envelope) {
            (Some(r), _) => (-r, r),
            (None, Some(env)) => {
                let log_b = |eta: f64| env.log_bound(-eta) + env.log_bound(xi - eta);
                let p1 = -env.center;
                let p2 = xi - env.center;
                let s = concave_support(log_b, p1.min(p2) - 1.0, p1.max(p2) + 1.0, TRUNCATION_DROP);
                (s.lo, s.hi)
            }
            (None, None) => unreachable!(),
        };
        let mut kinks: Vec<f64> = singular.iter().map(|s| -s).collect();
        kinks.extend(singular.iter().map(|s| xi - s));
        let panels = quad.panels().max(((hi - lo) * (omega.abs() + 0.25)).ceil() as usize);
        let v = integrate_checked(&f, lo, hi, &kinks, panels, quad.tol, "window ambiguity")?;
        magnitudes.push(v.norm());
    }
    let max = magnitudes.iter().cloned().fold(0.0, f64::max);
    let min_magnitude = magnitudes.iter().cloned().fold(f64::INFINITY, f64::min);
    let near = magnitudes
        .iter()
        .filter(|v| **v <= NEAR_ZERO_RELATIVE * max)
        .count();
    Ok(AmbiguityScanReport {
        omega,
        grid: xi_grid.to_vec(),
        near_zero_fraction: near as f64 / magnitudes.len() as f64,
        magnitudes,
        min_magnitude,
    })
}
