use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{QuadratureConfig, TimeGrid};
use crate::stft::signal::Signal;
use crate::stft::transform::{quad_config_id, window_at, SpectrogramSamples};
use crate::windows::WindowModel;

/// Discrete STFT layout: signal samples `t_n = t0 + n dt`, `n < len`;
/// frames at `x_i = x0 + i hop`, `i < frames`; all `len` DFT frequencies
/// `ω_k = k/(len dt)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StftGrid {
    pub t0: f64,
    pub dt: f64,
    pub len: usize,
    pub x0: f64,
    pub hop: f64,
    pub frames: usize,
}

impl StftGrid {
    pub fn new(t0: f64, dt: f64, len: usize, x0: f64, hop: f64, frames: usize) -> Result<Self> {
        if !(dt > 0.0 && hop > 0.0) || !t0.is_finite() || !x0.is_finite() || !dt.is_finite() || !hop.is_finite() {
            return Err(Error::invalid("STFT grid needs finite origins and positive steps"));
        }
        if len < 2 || frames < 1 {
            return Err(Error::invalid("STFT grid needs at least two samples and one frame"));
        }
        Ok(Self { t0, dt, len, x0, hop, frames })
    }

    /// `[-half, half)` sampled at `dt`, frames every `hop` over the same span.
    pub fn symmetric(half: f64, dt: f64, hop: f64) -> Result<Self> {
        let len = (2.0 * half / dt).round() as usize;
        let frames = (2.0 * half / hop).round() as usize;
        Self::new(-half, dt, len, -half, hop, frames)
    }

    pub fn time_grid(&self) -> TimeGrid {
        TimeGrid {
            start: self.t0,
            step: self.dt,
            len: self.len,
        }
    }

    pub fn frame(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.hop
    }

    /// Frequency of DFT bin `k`, folded to `[-1/(2dt), 1/(2dt))`.
    pub fn frequency(&self, k: usize) -> f64 {
        let l = self.len as i64;
        let kk = k as i64;
        let signed = if kk >= (l + 1) / 2 { kk - l } else { kk };
        signed as f64 / (self.len as f64 * self.dt)
    }
}

/// `|V_g f|` on every point of an [`StftGrid`], frame-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMagnitudes {
    pub grid: StftGrid,
    pub values: Vec<f64>,
}

impl GridMagnitudes {
    pub fn new(grid: StftGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.frames * grid.len {
            return Err(Error::invalid(format!(
                "expected {} magnitudes for the grid, got {}",
                grid.frames * grid.len,
                values.len()
            )));
        }
        if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::invalid("magnitudes must be finite and nonnegative"));
        }
        Ok(Self { grid, values })
    }

    pub fn to_samples(&self, quad: &QuadratureConfig) -> SpectrogramSamples {
        let g = &self.grid;
        let mut points = Vec::with_capacity(self.values.len());
        for i in 0..g.frames {
            for k in 0..g.len {
                points.push((g.frame(i), g.frequency(k)));
            }
        }
        SpectrogramSamples {
            points,
            magnitudes: self.values.clone(),
            quad_config_id: quad_config_id(quad),
        }
    }
}

/// The discrete STFT `S` on an [`StftGrid`] and its least-squares inverse.
struct Operator {
    grid: StftGrid,
    windows: Vec<Vec<Complex64>>,
    inverse_weight: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    backward: Arc<dyn Fft<f64>>,
}

impl Operator {
    fn new(g: &WindowModel, grid: StftGrid, quad: &QuadratureConfig) -> Result<Self> {
        let mut windows = Vec::with_capacity(grid.frames);
        for i in 0..grid.frames {
            let x = grid.frame(i);
            let w: Vec<Complex64> = (0..grid.len)
                .map(|n| window_at(g, Complex64::new(grid.t0 + n as f64 * grid.dt - x, 0.0), quad))
                .collect::<Result<_>>()?;
            windows.push(w);
        }
        let mut energy = vec![0.0; grid.len];
        for w in &windows {
            for (e, v) in energy.iter_mut().zip(w) {
                *e += v.norm_sqr();
            }
        }
        let peak = energy.iter().cloned().fold(0.0, f64::max);
        if energy.iter().any(|e| *e <= 1e-12 * peak) {
            return Err(Error::invalid("frames do not cover the signal grid"));
        }
        let l = grid.len as f64;
        let inverse_weight = energy.iter().map(|e| 1.0 / (grid.dt * l * e)).collect();
        let mut planner = FftPlanner::new();
        Ok(Self {
            forward: planner.plan_fft_forward(grid.len),
            backward: planner.plan_fft_inverse(grid.len),
            grid,
            windows,
            inverse_weight,
        })
    }

    /// `S x`, frame-major.
    fn analysis(&self, x: &[Complex64]) -> Vec<Complex64> {
        let l = self.grid.len;
        let mut out = vec![Complex64::new(0.0, 0.0); self.grid.frames * l];
        for (i, w) in self.windows.iter().enumerate() {
            let buf = &mut out[i * l..(i + 1) * l];
            for ((b, xv), wv) in buf.iter_mut().zip(x).zip(w) {
                *b = xv * wv.conj() * self.grid.dt;
            }
            self.forward.process(buf);
        }
        out
    }

    /// `S⁺ c = (S^H S)^{-1} S^H c`; `S^H S` is diagonal.
    fn synthesis(&self, c: &[Complex64]) -> Vec<Complex64> {
        let l = self.grid.len;
        let mut x = vec![Complex64::new(0.0, 0.0); l];
        let mut buf = vec![Complex64::new(0.0, 0.0); l];
        for (i, w) in self.windows.iter().enumerate() {
            buf.copy_from_slice(&c[i * l..(i + 1) * l]);
            self.backward.process(&mut buf);
            for ((xv, b), wv) in x.iter_mut().zip(&buf).zip(w) {
                *xv += wv * b;
            }
        }
        for (xv, s) in x.iter_mut().zip(&self.inverse_weight) {
            *xv *= *s;
        }
        x
    }
}

/// `|V_g f|` on the full grid, computed as the discrete STFT of the samples
/// of `f`.
pub fn full_grid_spectrogram(f: &Signal, g: &WindowModel, grid: StftGrid, quad: &QuadratureConfig) -> Result<GridMagnitudes> {
    let op = Operator::new(g, grid, quad)?;
    let samples: Vec<Complex64> = grid.time_grid().points().map(|t| f.eval(t)).collect();
    let values = op.analysis(&samples).iter().map(|c| c.norm()).collect();
    GridMagnitudes::new(grid, values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub signal: Signal,
    /// `‖ |S x| - M ‖ / ‖M‖` for the returned estimate.
    pub consistency: f64,
    pub iterations: usize,
    /// Iterations at which momentum was dropped because the error rose.
    pub restarts: usize,
}

/// Momentum of the accelerated iteration.
pub const MOMENTUM: f64 = 0.99;

fn project_magnitudes(c: &[Complex64], m: &[f64]) -> Vec<Complex64> {
    c.iter()
        .zip(m)
        .map(|(v, mag)| {
            let n = v.norm();
            if n > 0.0 {
                v * (mag / n)
            } else {
                Complex64::new(*mag, 0.0)
            }
        })
        .collect()
}

fn magnitude_error(c: &[Complex64], m: &[f64]) -> f64 {
    c.iter().zip(m).map(|(v, mag)| (v.norm() - mag).powi(2)).sum::<f64>().sqrt()
}

/// Alternating projections between the measured magnitudes and the range of
/// the discrete STFT, with momentum that is dropped whenever the
/// consistency error increases. Starts from the phases of the STFT of a
/// seeded Gaussian random signal.
pub fn gs_reconstruct(
    mags: &GridMagnitudes,
    g: &WindowModel,
    iters: usize,
    seed: u64,
    quad: &QuadratureConfig,
) -> Result<Reconstruction> {
    if iters == 0 {
        return Err(Error::invalid("reconstruction needs at least one iteration"));
    }
    let grid = mags.grid;
    let op = Operator::new(g, grid, quad)?;
    let m = &mags.values;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start: Vec<Complex64> = (0..grid.len)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let mut c = project_magnitudes(&op.analysis(&start), m);
    let mut t_prev = c.clone();
    let mut err_prev = f64::INFINITY;
    let mut restarts = 0;
    for _ in 0..iters {
        let y = op.analysis(&op.synthesis(&c));
        let err = magnitude_error(&y, m);
        let t = project_magnitudes(&y, m);
        if err > err_prev {
            restarts += 1;
            c = t.clone();
        } else {
            c = t.iter().zip(&t_prev).map(|(a, b)| a + (a - b) * MOMENTUM).collect();
        }
        t_prev = t;
        err_prev = err;
    }
    let x = op.synthesis(&t_prev);
    let norm_m = m.iter().map(|v| v * v).sum::<f64>().sqrt();
    let consistency = if norm_m == 0.0 {
        0.0
    } else {
        magnitude_error(&op.analysis(&x), m) / norm_m
    };
    Ok(Reconstruction {
        signal: Signal::grid_samples(x, grid.t0, grid.dt)?,
        consistency,
        iterations: iters,
        restarts,
    })
}

/// Default demonstrator grid: `[-8, 8)` at `dt = 1/16`, frames every `1/4`.
pub fn default_reconstruction_grid() -> StftGrid {
    StftGrid::symmetric(8.0, 1.0 / 16.0, 0.25).expect("valid constants")
}
