#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        if depth == 0 || diff.abs() <= 15.0 * tol {
            return left + right + diff / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// `∫ |ξ|^n e^{-a|ξ|^m} dξ` by adaptive quadrature over `[0, R]`, split at
/// the peak of the integrand.
pub fn moment_by_quadrature(n: u32, a: f64, m: f64) -> f64 {
    let nf = n as f64;
    let log_f = |x: f64| if x == 0.0 { if n == 0 { 0.0 } else { f64::NEG_INFINITY } } else { nf * x.ln() - a * x.powf(m) };
    let peak = if n == 0 { 0.0 } else { (nf / (a * m)).powf(1.0 / m) };
    let top = log_f(peak.max(1e-300));
    let mut r = peak + 1.0;
    while log_f(r) > top - 80.0 {
        r *= 1.5;
    }
    let f = |x: f64| (log_f(x) - top).exp();
    let scale = top.exp();
    let tol = 1e-14;
    let mut total = 0.0;
    let cuts = [0.0, 0.5 * peak, peak, 0.5 * (peak + r), r];
    for w in cuts.windows(2) {
        if w[1] > w[0] {
            total += adaptive_simpson(&f, w[0], w[1], tol);
        }
    }
    2.0 * total * scale
}

/// `|V_g f(x, ω)|` for `f(t) = e^{-π((t-c)/w)²} e^{2πiν(t-c)}` and the window
/// `g(t) = e^{-πt²}`, by completing the square.
pub fn gaussian_stft_magnitude(center: f64, width: f64, freq: f64, x: f64, omega: f64) -> f64 {
    let a = PI * (1.0 / (width * width) + 1.0);
    let b = Complex64::new(2.0 * PI * (center / (width * width) + x), 2.0 * PI * (freq - omega));
    let c = PI * (center * center / (width * width) + x * x);
    (PI / a).sqrt() * ((b * b).re / (4.0 * a) - c).exp()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
