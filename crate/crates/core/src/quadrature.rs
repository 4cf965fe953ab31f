//! Quadrature primitives shared by every module.
//!
//! Two rules are used. Integrals over the Fourier variable go through
//! composite Gauss-Legendre panels, graded geometrically towards the points
//! where `|xi|^m` is not smooth. Integrals over time go through the
//! trapezoid rule on a uniform grid, which converges spectrally for the
//! smooth, rapidly decaying integrands that appear there and nests under
//! step halving, so the node-doubling convergence check costs nothing extra.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Log-magnitude drop below the integrand peak at which the integration
/// range is truncated (`e^-40 ~ 4e-18`).
pub const TRUNCATION_DROP: f64 = 40.0;

const PANEL_ORDER: usize = 16;
const GRADING_RATIO: f64 = 0.15;
const GRADING_LEVELS: usize = 10;

/// Truncation radius, node budget and convergence tolerance for a quadrature.
///
/// `radius = None` derives the truncation range from the integrand's decay
/// envelope. `nodes` is the coarse node count; every checked integral is
/// also evaluated with twice as many nodes and rejected when the two differ
/// by more than `tol` relative to the integrand's L1 mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub radius: Option<f64>,
    pub nodes: usize,
    pub tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            radius: None,
            nodes: 512,
            tol: 1e-10,
        }
    }
}

impl QuadratureConfig {
    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = Some(radius);
        self
    }

    pub fn with_nodes(mut self, nodes: usize) -> Self {
        self.nodes = nodes;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes < 64 {
            return Err(Error::invalid(format!(
                "quadrature needs at least 64 nodes, got {}",
                self.nodes
            )));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::invalid(format!("quadrature tol must be positive, got {}", self.tol)));
        }
        if let Some(r) = self.radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::invalid(format!("quadrature radius must be positive, got {r}")));
            }
        }
        Ok(())
    }

    pub(crate) fn panels(&self) -> usize {
        (self.nodes / PANEL_ORDER).max(4)
    }
}

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let half = n.div_ceil(2);
        for i in 0..half {
            // Chebyshev-like initial guess, then Newton on P_n.
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, z);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub(crate) fn panel_rule() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(PANEL_ORDER))
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let pn = if n == 0 { 1.0 } else { p1 };
    let pn1 = if n == 0 { 0.0 } else { p0 };
    let d = n as f64 * (x * pn - pn1) / (x * x - 1.0);
    (pn, d)
}

/// Panel boundaries covering `[lo, hi]`: roughly `panels` uniform panels,
/// split at every singular point inside the interval, with geometric
/// refinement towards each singular point.
pub(crate) fn panel_breaks(lo: f64, hi: f64, singular: &[f64], panels: usize) -> Vec<(f64, f64)> {
    let mut cuts: Vec<f64> = singular
        .iter()
        .copied()
        .filter(|s| *s > lo && *s < hi)
        .collect();
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(lo);
    edges.extend(cuts);
    edges.push(hi);

    let is_singular = |x: f64| singular.iter().any(|s| *s == x);
    let total = hi - lo;
    let mut out = Vec::new();
    for w in edges.windows(2) {
        let (u, v) = (w[0], w[1]);
        let len = v - u;
        if len <= 0.0 {
            continue;
        }
        let k = ((panels as f64) * len / total).ceil().max(1.0) as usize;
        let h = len / k as f64;
        for j in 0..k {
            let a = u + j as f64 * h;
            let b = if j + 1 == k { v } else { u + (j + 1) as f64 * h };
            let grade_left = j == 0 && is_singular(u);
            let grade_right = j + 1 == k && is_singular(v);
            push_graded(&mut out, a, b, grade_left, grade_right);
        }
    }
    out
}

fn push_graded(out: &mut Vec<(f64, f64)>, a: f64, b: f64, left: bool, right: bool) {
    match (left, right) {
        (false, false) => out.push((a, b)),
        (true, true) => {
            let mid = 0.5 * (a + b);
            push_graded(out, a, mid, true, false);
            push_graded(out, mid, b, false, true);
        }
        (true, false) => {
            let len = b - a;
            let mut pts: Vec<f64> = (0..=GRADING_LEVELS)
                .map(|i| a + len * GRADING_RATIO.powi(i as i32))
                .collect();
            pts.push(a);
            pts.reverse();
            for w in pts.windows(2) {
                out.push((w[0], w[1]));
            }
        }
        (false, true) => {
            let len = b - a;
            let mut pts: Vec<f64> = (0..=GRADING_LEVELS)
                .map(|i| b - len * GRADING_RATIO.powi(i as i32))
                .collect();
            pts.push(b);
            for w in pts.windows(2) {
                out.push((w[0], w[1]));
            }
        }
    }
}

/// Composite Gauss-Legendre integral of `f` over the given panels.
/// Returns the integral together with the integral of `|f|`.
pub(crate) fn integrate_panels<F>(f: &F, panels: &[(f64, f64)]) -> (Complex64, f64)
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    let rule = GaussLegendre::panel_rule();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut mass = 0.0;
    for &(a, b) in panels {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let v = f(mid + half * x);
            sum += v * (w * half);
            mass += v.norm() * w * half;
        }
    }
    (sum, mass)
}

/// Integral over `[lo, hi]` with the node-doubling convergence check.
pub(crate) fn integrate_checked<F>(
    f: &F,
    lo: f64,
    hi: f64,
    singular: &[f64],
    panels: usize,
    tol: f64,
    what: &str,
) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    if hi <= lo {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (coarse, _) = integrate_panels(f, &panel_breaks(lo, hi, singular, panels));
    let (fine, mass) = integrate_panels(f, &panel_breaks(lo, hi, singular, 2 * panels));
    let difference = (fine - coarse).norm();
    let allowed = tol * mass;
    if !fine.re.is_finite() || !fine.im.is_finite() {
        return Err(Error::Overflow(format!("{what}: non-finite quadrature value")));
    }
    if difference > allowed && difference > f64::MIN_POSITIVE {
        return Err(Error::NonConvergence {
            what: what.to_string(),
            difference,
            allowed,
        });
    }
    Ok(fine)
}

/// Range over which a function with concave logarithm stays within
/// [`TRUNCATION_DROP`] of its maximum.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Support {
    #[cfg_attr(not(test), allow(dead_code))]
    pub peak_at: f64,
    pub peak: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Locate the maximum of a concave `log_phi` inside `[a, b]` by golden
/// section, then walk outwards until it has dropped by `drop`.
pub(crate) fn concave_support<F: Fn(f64) -> f64>(log_phi: F, a: f64, b: f64, drop: f64) -> Support {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = log_phi(x1);
    let mut f2 = log_phi(x2);
    for _ in 0..200 {
        if (hi - lo).abs() <= 1e-12 * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = log_phi(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = log_phi(x1);
        }
    }
    let peak_at = 0.5 * (lo + hi);
    let peak = log_phi(peak_at).max(f1).max(f2);
    let target = peak - drop;
    let right = walk_out(&log_phi, peak_at, 1.0, target);
    let left = walk_out(&log_phi, peak_at, -1.0, target);
    Support {
        peak_at,
        peak,
        lo: left,
        hi: right,
    }
}

fn walk_out<F: Fn(f64) -> f64>(log_phi: &F, from: f64, dir: f64, target: f64) -> f64 {
    let mut step = 0.5;
    let mut inside = from;
    let mut outside = from + dir * step;
    let mut guard = 0;
    while log_phi(outside) > target {
        inside = outside;
        step *= 2.0;
        outside = from + dir * step;
        guard += 1;
        if guard > 60 {
            return outside;
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (inside + outside);
        if log_phi(mid) > target {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    outside
}

/// Uniform time grid `t_j = start + j * step`, `j = 0..len`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl TimeGrid {
    /// Fine grid with `2 * coarse + 1` points on `[lo, hi]`, so the coarse
    /// grid of the doubling check is every other point.
    pub fn nested(lo: f64, hi: f64, coarse: usize) -> Self {
        let len = 2 * coarse + 1;
        Self {
            start: lo,
            step: (hi - lo) / (len - 1) as f64,
            len,
        }
    }

    pub fn at(&self, j: usize) -> f64 {
        self.start + j as f64 * self.step
    }

    pub fn end(&self) -> f64 {
        self.at(self.len - 1)
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |j| self.at(j))
    }

    pub fn same_as(&self, other: &TimeGrid) -> bool {
        self.len == other.len
            && (self.start - other.start).abs() <= 1e-12 * self.step
            && (self.step - other.step).abs() <= 1e-12 * self.step
    }
}

/// Trapezoid sums of `values` on the fine grid and on its even-index
/// subgrid, plus the fine-grid L1 mass.
pub(crate) fn nested_trapezoid(values: impl Iterator<Item = Complex64>, len: usize, step: f64) -> (Complex64, Complex64, f64) {
    let mut fine = Complex64::new(0.0, 0.0);
    let mut coarse = Complex64::new(0.0, 0.0);
    let mut mass = 0.0;
    for (j, v) in values.enumerate() {
        let end = j == 0 || j + 1 == len;
        let wf = if end { 0.5 } else { 1.0 };
        fine += v * wf;
        mass += v.norm() * wf;
        if j % 2 == 0 {
            coarse += v * wf;
        }
    }
    (fine * step, coarse * (2.0 * step), mass * step)
}
