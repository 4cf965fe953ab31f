use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{nested_trapezoid, TimeGrid};

/// Relative amplitude below which a closed-form signal counts as negligible
/// when its support is computed.
pub const SUPPORT_EPS: f64 = 1e-18;

/// One closed-form component. Modulations are taken relative to the center,
/// so a time shift only moves `center`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Component {
    /// `amp · e^{-π((t-c)/w)²} · e^{2πiν(t-c)}`.
    Gaussian {
        amp: Complex64,
        center: f64,
        width: f64,
        frequency: f64,
    },
    /// `h_k((t-c)/s)/√s` with the unit-norm Hermite function
    /// `h_k(t) = (2π)^{1/4} ψ_k(√(2π) t)`; `h_0 = 2^{1/4} e^{-πt²}`.
    Hermite { order: u32, center: f64, scale: f64 },
    /// `amp · e^{-π((t-c)/w)²} · e^{2πi(ν(t-c) + κ(t-c)²/2)}`.
    LinearChirp {
        amp: Complex64,
        center: f64,
        width: f64,
        frequency: f64,
        rate: f64,
    },
}

impl Component {
    pub fn gaussian(center: f64, width: f64) -> Self {
        Component::Gaussian {
            amp: Complex64::new(1.0, 0.0),
            center,
            width,
            frequency: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match *self {
            Component::Gaussian { amp, center, width, frequency } => {
                if !(width > 0.0) || !finite(&[amp.re, amp.im, center, width, frequency]) {
                    return Err(Error::invalid("Gaussian component needs width > 0 and finite parameters"));
                }
            }
            Component::Hermite { center, scale, .. } => {
                if !(scale > 0.0) || !finite(&[center, scale]) {
                    return Err(Error::invalid("Hermite component needs scale > 0 and finite center"));
                }
            }
            Component::LinearChirp { amp, center, width, frequency, rate } => {
                if !(width > 0.0) || !finite(&[amp.re, amp.im, center, width, frequency, rate]) {
                    return Err(Error::invalid("chirp component needs width > 0 and finite parameters"));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        match *self {
            Component::Gaussian { amp, center, width, frequency } => {
                let u = (t - center) / width;
                amp * Complex64::from_polar((-PI * u * u).exp(), 2.0 * PI * frequency * (t - center))
            }
            Component::Hermite { order, center, scale } => {
                let u = (2.0 * PI).sqrt() * (t - center) / scale;
                Complex64::new(hermite_function(order, u) / scale.sqrt(), 0.0)
            }
            Component::LinearChirp { amp, center, width, frequency, rate } => {
                let d = t - center;
                let u = d / width;
                amp * Complex64::from_polar((-PI * u * u).exp(), 2.0 * PI * (frequency * d + 0.5 * rate * d * d))
            }
        }
    }

    fn shifted(&self, mu: f64) -> Self {
        let mut c = self.clone();
        match &mut c {
            Component::Gaussian { center, .. }
            | Component::Hermite { center, .. }
            | Component::LinearChirp { center, .. } => *center += mu,
        }
        c
    }

    /// Interval outside which `|component| <= eps`.
    fn support(&self, eps: f64) -> (f64, f64) {
        match *self {
            Component::Gaussian { amp, center, width, .. } | Component::LinearChirp { amp, center, width, .. } => {
                if amp.norm() <= eps {
                    return (center, center);
                }
                let r = width * ((amp.norm() / eps).ln() / PI).sqrt();
                (center - r, center + r)
            }
            Component::Hermite { order, center, scale } => {
                // beyond the turning point |h_k| decreases monotonically
                let mut u = (2.0 * order as f64 + 1.0).sqrt();
                let bound = eps * scale.sqrt();
                while hermite_function(order, u).abs() > bound {
                    u += 0.25;
                }
                let r = u * scale / (2.0 * PI).sqrt();
                (center - r, center + r)
            }
        }
    }

    /// Largest local frequency, used to pick quadrature steps.
    fn bandwidth(&self) -> f64 {
        match *self {
            Component::Gaussian { width, frequency, .. } => frequency.abs() + 3.0 / width,
            Component::Hermite { order, scale, .. } => (2.0 * order as f64 + 1.0).sqrt() / ((2.0 * PI).sqrt() * scale) + 3.0 / scale,
            Component::LinearChirp { width, frequency, rate, .. } => {
                let reach = width * 4.0;
                frequency.abs() + rate.abs() * reach + 3.0 / width
            }
        }
    }

    fn peak_bound(&self) -> f64 {
        match *self {
            Component::Gaussian { amp, .. } | Component::LinearChirp { amp, .. } => amp.norm(),
            Component::Hermite { scale, .. } => 2f64.powf(0.25) / scale.sqrt(),
        }
    }
}

/// Orthonormal Hermite function `ψ_k(u) = (2^k k! √π)^{-1/2} H_k(u) e^{-u²/2}`
/// rescaled by `(2π)^{1/4}` so that `ψ_k(√(2π) t)` is unit-norm in `t`.
pub fn hermite_function(k: u32, u: f64) -> f64 {
    let scale = (2.0f64).powf(0.25);
    let mut prev = 0.0;
    let mut cur = scale * (-0.5 * u * u).exp();
    for j in 0..k {
        let jf = j as f64;
        let next = (2.0 / (jf + 1.0)).sqrt() * u * cur - (jf / (jf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Representation {
    /// Sum of closed-form components.
    ClosedForm(Vec<Component>),
    /// Samples `f(t0 + j dt)`, band-limited interpolation in between.
    GridSamples { values: Vec<Complex64>, t0: f64, dt: f64 },
}

/// A signal `f ∈ L²(ℝ)`: a representation times a complex gain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    pub repr: Representation,
    pub gain: Complex64,
    pub norm_hint: Option<f64>,
}

impl Signal {
    pub fn closed_form(components: Vec<Component>) -> Result<Self> {
        for c in &components {
            c.validate()?;
        }
        Ok(Self {
            repr: Representation::ClosedForm(components),
            gain: Complex64::new(1.0, 0.0),
            norm_hint: None,
        })
    }

    pub fn gaussian(center: f64, width: f64) -> Result<Self> {
        Self::closed_form(vec![Component::gaussian(center, width)])
    }

    pub fn hermite(order: u32, center: f64, scale: f64) -> Result<Self> {
        Self::closed_form(vec![Component::Hermite { order, center, scale }])
    }

    pub fn grid_samples(values: Vec<Complex64>, t0: f64, dt: f64) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::invalid("grid signal needs at least two samples"));
        }
        if !(dt > 0.0 && dt.is_finite()) || !t0.is_finite() {
            return Err(Error::invalid("grid signal needs finite t0 and dt > 0"));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::invalid("grid signal values must be finite"));
        }
        Ok(Self {
            repr: Representation::GridSamples { values, t0, dt },
            gain: Complex64::new(1.0, 0.0),
            norm_hint: None,
        })
    }

    pub fn zero() -> Self {
        Self {
            repr: Representation::ClosedForm(Vec::new()),
            gain: Complex64::new(0.0, 0.0),
            norm_hint: Some(0.0),
        }
    }

    /// `e^{iα} f`.
    pub fn with_phase(&self, alpha: f64) -> Self {
        let mut s = self.clone();
        s.gain *= Complex64::from_polar(1.0, alpha);
        s
    }

    /// `c f`.
    pub fn scaled(&self, c: Complex64) -> Self {
        let mut s = self.clone();
        s.gain *= c;
        s.norm_hint = s.norm_hint.map(|n| n * c.norm());
        s
    }

    /// `T_μ f(t) = f(t - μ)`.
    pub fn shifted(&self, mu: f64) -> Self {
        let mut s = self.clone();
        match &mut s.repr {
            Representation::ClosedForm(cs) => {
                for c in cs.iter_mut() {
                    *c = c.shifted(mu);
                }
            }
            Representation::GridSamples { t0, .. } => *t0 += mu,
        }
        s
    }

    pub fn is_zero(&self) -> bool {
        if self.gain == Complex64::new(0.0, 0.0) {
            return true;
        }
        match &self.repr {
            Representation::ClosedForm(cs) => cs.iter().all(|c| c.peak_bound() == 0.0),
            Representation::GridSamples { values, .. } => values.iter().all(|v| *v == Complex64::new(0.0, 0.0)),
        }
    }

    pub fn grid(&self) -> Option<TimeGrid> {
        match &self.repr {
            Representation::GridSamples { values, t0, dt } => Some(TimeGrid {
                start: *t0,
                step: *dt,
                len: values.len(),
            }),
            Representation::ClosedForm(_) => None,
        }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        let v = match &self.repr {
            Representation::ClosedForm(cs) => cs.iter().map(|c| c.eval(t)).sum(),
            Representation::GridSamples { values, t0, dt } => sinc_interpolate(values, *t0, *dt, t),
        };
        self.gain * v
    }

    /// Interval outside which the signal is negligible: for closed forms
    /// `|f| <= SUPPORT_EPS · Σ peak`, for samples the grid itself.
    pub fn support(&self) -> (f64, f64) {
        match &self.repr {
            Representation::ClosedForm(cs) => {
                let total: f64 = cs.iter().map(|c| c.peak_bound()).sum();
                if cs.is_empty() || total == 0.0 {
                    return (0.0, 0.0);
                }
                let eps = SUPPORT_EPS * total / cs.len() as f64;
                cs.iter()
                    .map(|c| c.support(eps))
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (a, b)| (lo.min(a), hi.max(b)))
            }
            Representation::GridSamples { values, t0, dt } => (*t0, t0 + dt * (values.len() - 1) as f64),
        }
    }

    /// Largest frequency content, roughly; sets trapezoid steps.
    pub fn bandwidth(&self) -> f64 {
        match &self.repr {
            Representation::ClosedForm(cs) => cs.iter().map(|c| c.bandwidth()).fold(0.0, f64::max),
            Representation::GridSamples { dt, .. } => 0.5 / dt,
        }
    }

    /// `‖f‖₂`. Closed forms by trapezoid refinement to full precision, grid
    /// samples by their Riemann sum.
    pub fn norm(&self) -> f64 {
        if let Some(n) = self.norm_hint {
            return n;
        }
        if self.is_zero() {
            return 0.0;
        }
        match &self.repr {
            Representation::GridSamples { values, dt, .. } => {
                self.gain.norm() * (values.iter().map(|v| v.norm_sqr()).sum::<f64>() * dt).sqrt()
            }
            Representation::ClosedForm(_) => {
                let (lo, hi) = self.support();
                let mut coarse = ((hi - lo) * self.bandwidth() * 2.0).ceil().max(32.0) as usize;
                loop {
                    let grid = TimeGrid::nested(lo, hi, coarse);
                    let vals = grid.points().map(|t| Complex64::new(self.eval(t).norm_sqr(), 0.0));
                    let (fine, coarse_sum, _) = nested_trapezoid(vals, grid.len, grid.step);
                    if (fine.re - coarse_sum.re).abs() <= 1e-14 * fine.re || coarse > 1 << 22 {
                        return fine.re.sqrt();
                    }
                    coarse *= 2;
                }
            }
        }
    }
}

impl Signal {
    /// Samples on `grid` as a [`Representation::GridSamples`] signal.
    pub fn sampled(&self, grid: &TimeGrid) -> Result<Signal> {
        Signal::grid_samples(grid.points().map(|t| self.eval(t)).collect(), grid.start, grid.step)
    }

    pub fn is_sampled(&self) -> bool {
        matches!(self.repr, Representation::GridSamples { .. })
    }
}

/// `Σ_j v_j sinc((t - t_j)/dt)`.
pub(crate) fn sinc_interpolate(values: &[Complex64], t0: f64, dt: f64, t: f64) -> Complex64 {
    let u = (t - t0) / dt;
    let nearest = u.round();
    if (u - nearest).abs() < 1e-12 && nearest >= 0.0 && (nearest as usize) < values.len() {
        return values[nearest as usize];
    }
    let s = (PI * u).sin();
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, v) in values.iter().enumerate() {
        let d = u - j as f64;
        // sin(π(u - j)) = (-1)^j sin(πu)
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc += v * (sign * s / (PI * d));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_functions_are_orthonormal() {
        let h = 1e-3;
        for (j, k) in [(0, 0), (1, 1), (5, 5), (0, 1), (2, 4), (3, 5)] {
            let ip: f64 = (-8000..=8000)
                .map(|i| {
                    let t = i as f64 * h;
                    let u = (2.0 * PI).sqrt() * t;
                    hermite_function(j, u) * hermite_function(k, u) * h
                })
                .sum();
            let want = if j == k { 1.0 } else { 0.0 };
            assert!((ip - want).abs() < 1e-12, "{j},{k}: {ip}");
        }
        assert!((hermite_function(0, 0.0) - 2f64.powf(0.25)).abs() < 1e-15);
    }

    #[test]
    fn norms() {
        let g = Signal::gaussian(0.3, 1.0).unwrap();
        assert!((g.norm() - 0.5f64.sqrt().sqrt()).abs() < 1e-14);
        let h = Signal::hermite(3, -0.5, 1.7).unwrap();
        assert!((h.norm() - 1.0).abs() < 1e-13);
        let c = Signal::closed_form(vec![Component::LinearChirp {
            amp: Complex64::new(0.0, 2.0),
            center: 0.0,
            width: 0.8,
            frequency: 1.0,
            rate: 0.7,
        }])
        .unwrap();
        assert!((c.norm() - 2.0 * (0.8 / 2f64.sqrt()).sqrt()).abs() < 1e-13);
        assert_eq!(Signal::zero().norm(), 0.0);
    }

    #[test]
    fn shift_and_phase() {
        let f = Signal::closed_form(vec![Component::Gaussian {
            amp: Complex64::new(0.5, 0.5),
            center: 0.2,
            width: 1.2,
            frequency: 0.7,
        }])
        .unwrap();
        let g = f.shifted(1.0).with_phase(0.4);
        let t = 0.9;
        let want = f.eval(t - 1.0) * Complex64::from_polar(1.0, 0.4);
        assert!((g.eval(t) - want).norm() < 1e-15);
    }

    #[test]
    fn sinc_interpolation_of_band_limited_samples() {
        let f = Signal::gaussian(0.0, 1.0).unwrap();
        let dt = 1.0 / 16.0;
        let values: Vec<Complex64> = (0..256).map(|j| f.eval(-8.0 + j as f64 * dt)).collect();
        let s = Signal::grid_samples(values, -8.0, dt).unwrap();
        for t in [0.0, 0.013, -0.77, 1.51] {
            assert!((s.eval(t) - f.eval(t)).norm() < 1e-12, "{t}");
        }
        assert!((s.norm() - f.norm()).abs() < 1e-12);
        assert!(Signal::grid_samples(vec![Complex64::new(1.0, 0.0)], 0.0, 1.0).is_err());
    }
}
