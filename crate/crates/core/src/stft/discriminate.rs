use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{QuadratureConfig, TimeGrid};
use crate::stft::signal::Signal;
use crate::stft::transform::{spectrogram_on_set, SpectrogramSamples, StftContext};
use crate::windows::WindowModel;

/// `α = arg⟨f, h⟩` with `⟨f, h⟩ = ∫ f conj(h)`, and the relative distance
/// `‖f - e^{iα} h‖ / ‖f‖` after alignment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseAlignment {
    pub alpha: f64,
    pub residual: f64,
}

fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    if r >= 2.0 * PI {
        0.0
    } else {
        r
    }
}

/// Sums over a common grid: `(⟨f,h⟩, ‖f‖², ‖h‖²)` and the samples.
struct Common {
    f: Vec<Complex64>,
    h: Vec<Complex64>,
    weights: Vec<f64>,
}

impl Common {
    fn on_grid(f: &Signal, h: &Signal, grid: &TimeGrid, trapezoid: bool) -> Self {
        let n = grid.len;
        let weights = (0..n)
            .map(|j| {
                if trapezoid && (j == 0 || j + 1 == n) {
                    0.5 * grid.step
                } else {
                    grid.step
                }
            })
            .collect();
        Self {
            f: grid.points().map(|t| f.eval(t)).collect(),
            h: grid.points().map(|t| h.eval(t)).collect(),
            weights,
        }
    }

    fn sums(&self) -> (Complex64, f64, f64) {
        let mut ip = Complex64::new(0.0, 0.0);
        let mut nf = 0.0;
        let mut nh = 0.0;
        for ((a, b), w) in self.f.iter().zip(&self.h).zip(&self.weights) {
            ip += a * b.conj() * w;
            nf += a.norm_sqr() * w;
            nh += b.norm_sqr() * w;
        }
        (ip, nf, nh)
    }

    fn aligned_distance(&self, alpha: f64) -> f64 {
        let rot = Complex64::from_polar(1.0, alpha);
        self.f
            .iter()
            .zip(&self.h)
            .zip(&self.weights)
            .map(|((a, b), w)| (a - rot * b).norm_sqr() * w)
            .sum::<f64>()
            .sqrt()
    }
}

fn common_grid(f: &Signal, h: &Signal) -> Common {
    match (f.grid(), h.grid()) {
        (Some(a), Some(b)) if a.same_as(&b) => Common::on_grid(f, h, &a, false),
        (Some(a), Some(b)) => {
            let step = a.step.min(b.step);
            let lo = a.start.min(b.start);
            let hi = a.end().max(b.end());
            let len = ((hi - lo) / step).round() as usize + 1;
            Common::on_grid(f, h, &TimeGrid { start: lo, step, len }, false)
        }
        (Some(a), None) | (None, Some(a)) => Common::on_grid(f, h, &a, false),
        (None, None) => {
            let (a0, a1) = f.support();
            let (b0, b1) = h.support();
            let (lo, hi) = (a0.min(b0), a1.max(b1));
            let band = f.bandwidth().max(h.bandwidth()) + 1.0;
            let mut coarse = ((hi - lo) * band * 2.0).ceil().max(32.0) as usize;
            let mut prev: Option<(Complex64, f64, f64)> = None;
            loop {
                let c = Common::on_grid(f, h, &TimeGrid::nested(lo, hi, coarse), true);
                let s = c.sums();
                if let Some(p) = prev {
                    let scale = (s.1 * s.2).sqrt().max(s.1).max(s.2);
                    let d = (s.0 - p.0).norm() + (s.1 - p.1).abs() + (s.2 - p.2).abs();
                    if d <= 1e-13 * scale || coarse > 1 << 20 {
                        return c;
                    }
                }
                prev = Some(s);
                coarse *= 2;
            }
        }
    }
}

/// Global-phase alignment of `h` to `f` on a common grid: the sample grid
/// when either signal is sampled, otherwise a trapezoid grid refined until
/// the inner products settle.
pub fn global_phase_residual(f: &Signal, h: &Signal) -> Result<PhaseAlignment> {
    if f.is_zero() {
        return Err(Error::ZeroNorm("reference signal f has zero norm".into()));
    }
    if h.is_zero() {
        return Err(Error::ZeroNorm("signal h has zero norm".into()));
    }
    let c = common_grid(f, h);
    let (ip, nf, nh) = c.sums();
    if nf == 0.0 {
        return Err(Error::ZeroNorm("reference signal f vanishes on the common grid".into()));
    }
    if nh == 0.0 {
        return Err(Error::ZeroNorm("signal h vanishes on the common grid".into()));
    }
    let alpha = if ip == Complex64::new(0.0, 0.0) {
        0.0
    } else {
        normalize_angle(ip.arg())
    };
    Ok(PhaseAlignment {
        alpha,
        residual: c.aligned_distance(alpha) / nf.sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiscriminationVerdict {
    EquivalentUpToPhase,
    Distinct,
    /// Spectrogram comparison and phase alignment disagree.
    Inconsistent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscriminationReport {
    #[serde(rename = "max_dev")]
    pub max_spectrogram_deviation: f64,
    #[serde(rename = "match")]
    pub spectrograms_match: bool,
    #[serde(rename = "alpha")]
    pub alignment_phase: f64,
    #[serde(rename = "residual")]
    pub aligned_residual: f64,
    pub verdict: DiscriminationVerdict,
}

pub const DEFAULT_MATCH_TOL: f64 = 1e-6;

/// Compares sampled spectrograms of pairs of signals on a fixed point set.
#[derive(Debug, Clone)]
pub struct Discriminator<'a> {
    pub window: &'a WindowModel,
    pub points: &'a [(f64, f64)],
    pub quad: QuadratureConfig,
    /// Spectrograms match when the largest deviation is at most
    /// `tol · max magnitude`.
    pub tol: f64,
    /// Signals count as equal up to phase when the aligned residual is below
    /// this.
    pub residual_tol: f64,
}

impl<'a> Discriminator<'a> {
    pub fn new(window: &'a WindowModel, points: &'a [(f64, f64)], tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
        }
        if points.is_empty() {
            return Err(Error::invalid("discrimination needs at least one sampling point"));
        }
        Ok(Self {
            window,
            points,
            quad: QuadratureConfig::default(),
            tol,
            residual_tol: tol,
        })
    }

    pub fn with_quadrature(mut self, quad: QuadratureConfig) -> Self {
        self.quad = quad;
        self
    }

    pub fn with_residual_tol(mut self, residual_tol: f64) -> Self {
        self.residual_tol = residual_tol;
        self
    }

    pub fn spectrogram(&self, f: &Signal) -> Result<SpectrogramSamples> {
        spectrogram_on_set(f, self.window, self.points, &self.quad)
    }

    /// Verdicts: both tests agree on equivalence gives `EquivalentUpToPhase`,
    /// both agree on difference gives `Distinct`, anything else is
    /// `Inconsistent`.
    pub fn run(&self, f: &Signal, h: &Signal) -> Result<DiscriminationReport> {
        let sf = self.spectrogram(f)?;
        let sh = self.spectrogram(h)?;
        self.compare(f, h, &sf, &sh)
    }

    pub fn compare(&self, f: &Signal, h: &Signal, sf: &SpectrogramSamples, sh: &SpectrogramSamples) -> Result<DiscriminationReport> {
        if sf.magnitudes.len() != sh.magnitudes.len() {
            return Err(Error::invalid("spectrograms are sampled at different point counts"));
        }
        let max_dev = sf
            .magnitudes
            .iter()
            .zip(&sh.magnitudes)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let scale = sf.max_magnitude().max(sh.max_magnitude());
        let matched = max_dev <= self.tol * scale;
        let align = global_phase_residual(f, h)?;
        let equivalent = align.residual < self.residual_tol;
        let verdict = match (matched, equivalent) {
            (true, true) => DiscriminationVerdict::EquivalentUpToPhase,
            (false, false) => DiscriminationVerdict::Distinct,
            _ => DiscriminationVerdict::Inconsistent,
        };
        Ok(DiscriminationReport {
            max_spectrogram_deviation: max_dev,
            spectrograms_match: matched,
            alignment_phase: align.alpha,
            aligned_residual: align.residual,
            verdict,
        })
    }
}

/// One-shot [`Discriminator::run`] with default quadrature.
pub fn discriminate(
    f: &Signal,
    h: &Signal,
    g: &WindowModel,
    points: &[(f64, f64)],
    tol: f64,
) -> Result<DiscriminationReport> {
    Discriminator::new(g, points, tol)?.run(f, h)
}

/// Uniform axis `lo, lo + step, ..., hi` (both ends included).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(hi > lo) || !(step > 0.0) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::invalid(format!("bad axis [{lo}, {hi}] step {step}")));
        }
        Ok(Self { lo, hi, step })
    }

    pub fn len(&self) -> usize {
        ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn at(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.step
    }
}

/// Relative error of the energy identity `∬|V_g f|² = ‖f‖²‖g‖²`, the left
/// side by a Riemann sum over the grid. Zero for the zero signal.
pub fn moyal_energy_check(f: &Signal, g: &WindowModel, x: Axis, omega: Axis, quad: &QuadratureConfig) -> Result<f64> {
    if f.is_zero() {
        return Ok(0.0);
    }
    let ctx = StftContext::new(f, g, quad)?;
    let mut sum = 0.0;
    for i in 0..x.len() {
        for k in 0..omega.len() {
            sum += ctx.eval(x.at(i), omega.at(k))?.norm_sqr();
        }
    }
    sum *= x.step * omega.step;
    let target = (f.norm() * g.l2_norm()).powi(2);
    Ok((sum - target).abs() / target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{generate_sampling_set, max_tau_bounds};
    use crate::stft::signal::Component;

    fn gauss_window() -> WindowModel {
        WindowModel::generalized_gaussian(PI, 2.0, 1.0).unwrap()
    }

    fn lambda(n: u64) -> Vec<(f64, f64)> {
        let b = max_tau_bounds(2.0, PI).unwrap();
        generate_sampling_set(2.0, 0.9 * b.tau1_max, 0.9 * b.tau2_max, n, false, Some(PI))
            .unwrap()
            .coordinates()
    }

    fn mixture() -> Signal {
        Signal::closed_form(vec![
            Component::Gaussian {
                amp: Complex64::new(1.0, 0.2),
                center: -0.4,
                width: 0.9,
                frequency: 0.3,
            },
            Component::Gaussian {
                amp: Complex64::new(-0.3, 0.6),
                center: 0.8,
                width: 1.2,
                frequency: -0.5,
            },
        ])
        .unwrap()
    }

    #[test]
    fn phase_alignment_examples() {
        let f = mixture();
        let p = global_phase_residual(&f, &f).unwrap();
        assert!(p.alpha.abs() < 1e-15 && p.residual < 1e-15, "{p:?}");
        let p = global_phase_residual(&f, &f.with_phase(-PI / 3.0)).unwrap();
        assert!((p.alpha - PI / 3.0).abs() < 1e-14 && p.residual < 1e-14, "{p:?}");
        let p = global_phase_residual(&f, &f.scaled(Complex64::new(-1.0, 0.0))).unwrap();
        assert!((p.alpha - PI).abs() < 1e-14 && p.residual < 1e-14, "{p:?}");
    }

    #[test]
    fn orthogonal_signals_are_a_root_two_apart() {
        let g = Signal::hermite(0, 0.0, 1.0).unwrap();
        let h = Signal::hermite(1, 0.0, 1.0).unwrap();
        let p = global_phase_residual(&g, &h).unwrap();
        assert!((p.residual - 2f64.sqrt()).abs() < 1e-12, "{p:?}");
    }

    #[test]
    fn zero_norm_is_rejected() {
        let f = mixture();
        assert!(matches!(global_phase_residual(&f, &Signal::zero()), Err(Error::ZeroNorm(_))));
        assert!(matches!(global_phase_residual(&Signal::zero(), &f), Err(Error::ZeroNorm(_))));
    }

    #[test]
    fn discrimination_examples() {
        let g = gauss_window();
        let pts = lambda(32);
        let f = mixture();
        let r = discriminate(&f, &f.with_phase(1.1), &g, &pts, DEFAULT_MATCH_TOL).unwrap();
        assert_eq!(r.verdict, DiscriminationVerdict::EquivalentUpToPhase, "{r:?}");
        assert!((r.alignment_phase - (2.0 * PI - 1.1)).abs() < 1e-12);
        let r = discriminate(&f, &f.scaled(Complex64::new(-1.0, 0.0)), &g, &pts, DEFAULT_MATCH_TOL).unwrap();
        assert_eq!(r.verdict, DiscriminationVerdict::EquivalentUpToPhase);
        assert!((r.alignment_phase - PI).abs() < 1e-12);
        let a = Signal::hermite(0, 0.0, 1.0).unwrap();
        let b = Signal::hermite(1, 0.0, 1.0).unwrap();
        let r = discriminate(&a, &b, &g, &pts, DEFAULT_MATCH_TOL).unwrap();
        assert_eq!(r.verdict, DiscriminationVerdict::Distinct, "{r:?}");
        assert!(r.max_spectrogram_deviation > 0.1, "{r:?}");
    }

    #[test]
    fn report_json_keys() {
        let g = gauss_window();
        let pts = lambda(4);
        let f = mixture();
        let r = discriminate(&f, &f, &g, &pts, DEFAULT_MATCH_TOL).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        keys.sort();
        assert_eq!(keys, ["alpha", "match", "max_dev", "residual", "verdict"]);
    }

    #[test]
    fn moyal_identity() {
        let f = Signal::gaussian(0.0, 1.0).unwrap();
        let g = gauss_window();
        let q = QuadratureConfig::default();
        let ax = |h: f64| Axis::new(-4.0, 4.0, h).unwrap();
        let errs: Vec<f64> = [1.0, 0.5, 0.25, 0.125, 0.0625]
            .iter()
            .map(|&h| moyal_energy_check(&f, &g, ax(h), ax(h), &q).unwrap())
            .collect();
        assert!(errs[4] < 1e-6, "{errs:?}");
        assert!(errs[1] < errs[0], "{errs:?}");
        assert_eq!(moyal_energy_check(&Signal::zero(), &g, ax(1.0), ax(1.0), &q).unwrap(), 0.0);
    }
}
