use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::{csv_rows, fmt_f64, parse_f64};
use crate::quadrature::{QuadratureConfig, TimeGrid};
use crate::stft::signal::{Representation, Signal};
use crate::windows::WindowModel;

/// Window values below this fraction of the peak are treated as outside the
/// window's support.
const WINDOW_EPS: f64 = 1e-18;
const MAX_TRAPEZOID_POINTS: usize = 1 << 21;

/// `g(t)` on the real line, closed form when available.
pub(crate) fn window_at(g: &WindowModel, t: Complex64, quad: &QuadratureConfig) -> Result<Complex64> {
    match g.time_closed_form(t) {
        Some(v) => Ok(v),
        None => g.time(t, quad),
    }
}

fn intersect(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0.max(b.0), a.1.min(b.1))
}

/// Trapezoid integral of `h` over `[lo, hi]`, doubling the point count
/// until two successive sums differ by at most `allowed`.
fn refine_trapezoid<H>(h: H, lo: f64, hi: f64, start_coarse: usize, allowed: f64, what: &str) -> Result<Complex64>
where
    H: Fn(f64) -> Result<Complex64>,
{
    if !(hi > lo) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut grid = TimeGrid::nested(lo, hi, start_coarse.max(16));
    let mut values: Vec<Complex64> = grid.points().map(&h).collect::<Result<_>>()?;
    loop {
        let wf = |j: usize| if j == 0 || j + 1 == values.len() { 0.5 } else { 1.0 };
        let mut fine = Complex64::new(0.0, 0.0);
        let mut coarse = Complex64::new(0.0, 0.0);
        for (j, v) in values.iter().enumerate() {
            fine += v * wf(j);
            if j % 2 == 0 {
                coarse += v * wf(j);
            }
        }
        fine *= grid.step;
        coarse *= 2.0 * grid.step;
        if !fine.re.is_finite() || !fine.im.is_finite() {
            return Err(Error::Overflow(format!("{what}: non-finite integrand")));
        }
        let difference = (fine - coarse).norm();
        if difference <= allowed || difference <= f64::MIN_POSITIVE {
            return Ok(fine);
        }
        if values.len() > MAX_TRAPEZOID_POINTS {
            return Err(Error::NonConvergence {
                what: what.to_string(),
                difference,
                allowed,
            });
        }
        let half = grid.step / 2.0;
        let mut next = Vec::with_capacity(2 * values.len() - 1);
        for (j, v) in values.iter().enumerate() {
            next.push(*v);
            if j + 1 < values.len() {
                next.push(h(grid.at(j) + half)?);
            }
        }
        grid = TimeGrid {
            start: grid.start,
            step: half,
            len: next.len(),
        };
        values = next;
    }
}

/// Evaluation context for `V_g f` with a fixed signal and window: caches
/// `‖f‖‖g‖` and the signal support.
pub(crate) struct StftContext<'a> {
    f: &'a Signal,
    g: &'a WindowModel,
    quad: &'a QuadratureConfig,
    scale: f64,
    support: (f64, f64),
    window_reach: Option<f64>,
}

impl<'a> StftContext<'a> {
    pub(crate) fn new(f: &'a Signal, g: &'a WindowModel, quad: &'a QuadratureConfig) -> Result<Self> {
        quad.validate()?;
        let scale = f.norm() * g.l2_norm();
        let window_reach = g
            .time_support(WINDOW_EPS * g.c * (PI / g.a).sqrt())
            .map(|(_, hi)| hi);
        Ok(Self {
            f,
            g,
            quad,
            scale,
            support: f.support(),
            window_reach,
        })
    }

    /// `∫ f(t) conj(g(t - x)) e^{-2πiωt} dt`.
    pub(crate) fn eval(&self, x: f64, omega: f64) -> Result<Complex64> {
        if self.f.is_zero() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let allowed = self.quad.tol * self.scale;
        let conj_window = |t: f64| -> Result<Complex64> {
            Ok(window_at(self.g, Complex64::new(t - x, 0.0), self.quad)?.conj())
        };
        if let Representation::GridSamples { values, t0, dt } = &self.f.repr {
            // the samples define the signal: plain trapezoid on their grid
            let mut acc = Complex64::new(0.0, 0.0);
            let n = values.len();
            for (j, v) in values.iter().enumerate() {
                let t = t0 + j as f64 * dt;
                if let Some(r) = self.window_reach {
                    if (t - x).abs() > r {
                        continue;
                    }
                }
                let w = if j == 0 || j + 1 == n { 0.5 } else { 1.0 };
                acc += v * conj_window(t)? * Complex64::from_polar(w, -2.0 * PI * omega * t);
            }
            return Ok(self.f.gain * acc * *dt);
        }
        let (lo, hi) = match self.window_reach {
            Some(r) => intersect(self.support, (x - r, x + r)),
            None => self.support,
        };
        let band = self.f.bandwidth() + omega.abs() + self.g.modulation.unwrap_or(0.0).abs() + 2.0;
        let coarse = ((hi - lo) * band).ceil().max(32.0) as usize;
        let integrand = |t: f64| -> Result<Complex64> {
            Ok(self.f.eval(t) * conj_window(t)? * Complex64::from_polar(1.0, -2.0 * PI * omega * t))
        };
        refine_trapezoid(integrand, lo, hi, coarse, allowed, &format!("STFT at ({x}, {omega})"))
    }
}

/// `V_g f(x, ω) = ∫ f(t) conj(g(t - x)) e^{-2πiωt} dt`.
pub fn stft_eval(f: &Signal, g: &WindowModel, x: f64, omega: f64, quad: &QuadratureConfig) -> Result<Complex64> {
    StftContext::new(f, g, quad)?.eval(x, omega)
}

pub const SPECTROGRAM_CSV_HEADER: &str = "x,omega,magnitude";

/// `|V_g f|` at a list of time-frequency points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrogramSamples {
    pub points: Vec<(f64, f64)>,
    pub magnitudes: Vec<f64>,
    pub quad_config_id: String,
}

impl SpectrogramSamples {
    pub fn max_magnitude(&self) -> f64 {
        self.magnitudes.iter().cloned().fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(SPECTROGRAM_CSV_HEADER);
        out.push('\n');
        for ((x, w), m) in self.points.iter().zip(&self.magnitudes) {
            let _ = writeln!(out, "{},{},{}", fmt_f64(*x), fmt_f64(*w), fmt_f64(*m));
        }
        out
    }

    pub fn from_csv(text: &str, quad_config_id: impl Into<String>) -> Result<Self> {
        let mut points = Vec::new();
        let mut magnitudes = Vec::new();
        for (line, f) in csv_rows(text, SPECTROGRAM_CSV_HEADER)? {
            points.push((parse_f64(f[0], line)?, parse_f64(f[1], line)?));
            let m = parse_f64(f[2], line)?;
            if !(m >= 0.0) {
                return Err(Error::invalid(format!("line {line}: magnitude must be nonnegative")));
            }
            magnitudes.push(m);
        }
        Ok(Self {
            points,
            magnitudes,
            quad_config_id: quad_config_id.into(),
        })
    }
}

/// Short description of a quadrature configuration, stored with samples.
pub fn quad_config_id(quad: &QuadratureConfig) -> String {
    let radius = quad.radius.map_or("auto".to_string(), fmt_f64);
    format!("nodes={};tol={};radius={}", quad.nodes, fmt_f64(quad.tol), radius)
}

/// `|V_g f|` at each point, in order. Errors name the offending point.
pub fn spectrogram_on_set(
    f: &Signal,
    g: &WindowModel,
    points: &[(f64, f64)],
    quad: &QuadratureConfig,
) -> Result<SpectrogramSamples> {
    let ctx = StftContext::new(f, g, quad)?;
    let mut magnitudes = Vec::with_capacity(points.len());
    for (i, &(x, w)) in points.iter().enumerate() {
        let v = ctx.eval(x, w).map_err(|e| at_point(e, i, x, w))?;
        magnitudes.push(v.norm());
    }
    Ok(SpectrogramSamples {
        points: points.to_vec(),
        magnitudes,
        quad_config_id: quad_config_id(quad),
    })
}

fn at_point(e: Error, i: usize, x: f64, w: f64) -> Error {
    let tag = format!("point {i} ({x}, {w})");
    match e {
        Error::NonConvergence { what, difference, allowed } => Error::NonConvergence {
            what: format!("{tag}: {what}"),
            difference,
            allowed,
        },
        Error::Overflow(m) => Error::Overflow(format!("{tag}: {m}")),
        other => other,
    }
}

/// `∫ conj(g(t - z̄)) e^{2πi z′ t} f(t) dt` for complex `z`, `z′`. On the
/// real plane this is `V_g f(x, -ω)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendedStft {
    pub value: Complex64,
    /// Integration range actually used.
    pub range: (f64, f64),
    pub warnings: Vec<String>,
}

const MAX_EXTENSIONS: usize = 12;

/// The entire extension of the STFT integral. The integration range starts
/// at the signal support and is widened while the integrand is still large
/// at either end; a warning is recorded if that does not settle.
pub fn extend_stft(
    f: &Signal,
    g: &WindowModel,
    z: Complex64,
    zprime: Complex64,
    quad: &QuadratureConfig,
) -> Result<ExtendedStft> {
    quad.validate()?;
    if f.is_zero() {
        return Ok(ExtendedStft {
            value: Complex64::new(0.0, 0.0),
            range: (0.0, 0.0),
            warnings: Vec::new(),
        });
    }
    let zbar = z.conj();
    let integrand = |t: f64| -> Result<Complex64> {
        let w = window_at(g, Complex64::new(t, 0.0) - zbar, quad)?.conj();
        Ok(w * (Complex64::new(0.0, 2.0 * PI) * zprime * t).exp() * f.eval(t))
    };
    let (mut lo, mut hi) = f.support();
    let mut warnings = Vec::new();
    // widen until both ends are negligible against the largest sample seen
    let probe = |lo: f64, hi: f64| -> Result<(f64, f64, f64)> {
        let n = 256;
        let mut peak: f64 = 0.0;
        for k in 0..=n {
            peak = peak.max(integrand(lo + (hi - lo) * k as f64 / n as f64)?.norm());
        }
        Ok((integrand(lo)?.norm(), integrand(hi)?.norm(), peak))
    };
    let mut settled = false;
    for _ in 0..MAX_EXTENSIONS {
        let (a, b, peak) = probe(lo, hi)?;
        let small = WINDOW_EPS * peak;
        if a <= small && b <= small {
            settled = true;
            break;
        }
        let width = hi - lo;
        if a > small {
            lo -= 0.5 * width;
        }
        if b > small {
            hi += 0.5 * width;
        }
    }
    if !settled {
        warnings.push(format!(
            "integrand not negligible at the ends of [{lo}, {hi}]; the imaginary parts may be beyond the range where the extension converges numerically"
        ));
    }
    let band = f.bandwidth() + zprime.re.abs() + z.im.abs() * PI + 2.0;
    let coarse = ((hi - lo) * band).ceil().max(32.0) as usize;
    // magnitude scale for the convergence test
    let (_, _, peak) = probe(lo, hi)?;
    let allowed = quad.tol * peak * (hi - lo);
    let value = refine_trapezoid(integrand, lo, hi, coarse, allowed, "extended STFT")?;
    let accuracy = f64::EPSILON * peak * (hi - lo) / value.norm();
    if accuracy > quad.tol {
        warnings.push(format!(
            "cancellation in the integral: relative accuracy only about {accuracy:.1e}"
        ));
    }
    Ok(ExtendedStft {
        value,
        range: (lo, hi),
        warnings,
    })
}
