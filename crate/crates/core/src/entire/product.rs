use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::least_squares;

/// `G(u; p) = (1 - u) exp(u + u²/2 + ... + u^p/p)`.
pub fn weierstrass_factor(u: Complex64, p: u32) -> Complex64 {
    match log_weierstrass_factor(u, p) {
        Some(l) => l.exp(),
        None => Complex64::new(0.0, 0.0),
    }
}

/// `ln G(u; p)`, or `None` at the zero `u = 1`. For small `|u|` the
/// remainder series `-Σ_{j>p} u^j/j` is summed instead, avoiding the
/// cancellation between `ln(1-u)` and the exponent.
pub fn log_weierstrass_factor(u: Complex64, p: u32) -> Option<Complex64> {
    if u == Complex64::new(1.0, 0.0) {
        return None;
    }
    if u.norm() < 0.5 {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut pw = u.powu(p + 1);
        let mut j = p + 1;
        while j < p + 200 {
            let term = pw / j as f64;
            acc -= term;
            if term.norm() <= 1e-17 * acc.norm() {
                break;
            }
            pw *= u;
            j += 1;
        }
        return Some(acc);
    }
    let mut acc = (Complex64::new(1.0, 0.0) - u).ln();
    let mut pw = Complex64::new(1.0, 0.0);
    for j in 1..=p {
        pw *= u;
        acc += pw / j as f64;
    }
    Some(acc)
}

/// Positive, strictly increasing zeros `ω_1 < ω_2 < ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ZeroSequence {
    Explicit(Vec<f64>),
    /// `ω_k = scale · k^exponent`.
    PowerLaw { scale: f64, exponent: f64 },
}

impl ZeroSequence {
    pub fn validate(&self) -> Result<()> {
        match self {
            ZeroSequence::Explicit(z) => {
                if z.is_empty() {
                    return Err(Error::invalid("zero sequence is empty"));
                }
                if !(z[0] > 0.0) || z.iter().any(|v| !v.is_finite()) {
                    return Err(Error::invalid("zeros must be positive and finite"));
                }
                if z.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::invalid("zeros must be strictly increasing"));
                }
            }
            ZeroSequence::PowerLaw { scale, exponent } => {
                if !(*scale > 0.0 && scale.is_finite()) || !(*exponent > 0.0 && exponent.is_finite()) {
                    return Err(Error::invalid("power-law zeros need positive scale and exponent"));
                }
            }
        }
        Ok(())
    }

    /// `k`-th term, `k >= 1`.
    pub fn term(&self, k: usize) -> Option<f64> {
        match self {
            ZeroSequence::Explicit(z) => z.get(k.checked_sub(1)?).copied(),
            ZeroSequence::PowerLaw { scale, exponent } => Some(scale * (k as f64).powf(*exponent)),
        }
    }

    /// Number of available terms, `None` when unbounded.
    pub fn len(&self) -> Option<usize> {
        match self {
            ZeroSequence::Explicit(z) => Some(z.len()),
            ZeroSequence::PowerLaw { .. } => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    /// The first `n` terms (fewer if the sequence is shorter).
    pub fn take(&self, n: usize) -> Vec<f64> {
        (1..=n).map_while(|k| self.term(k)).collect()
    }

    /// Index `k <= k_max` with `term(k) == x` exactly.
    pub fn position(&self, x: f64, k_max: usize) -> Option<usize> {
        if !(x > 0.0) {
            return None;
        }
        match self {
            ZeroSequence::Explicit(z) => {
                let k = z[..k_max.min(z.len())].binary_search_by(|v| v.total_cmp(&x)).ok()?;
                Some(k + 1)
            }
            ZeroSequence::PowerLaw { scale, exponent } => {
                let guess = (x / scale).powf(1.0 / exponent).round() as usize;
                (guess.saturating_sub(1).max(1)..=guess + 1)
                    .find(|&k| k <= k_max && self.term(k) == Some(x))
            }
        }
    }

    /// Power-law terms squared: `ω_k = λ_k²`.
    pub fn squared(&self) -> ZeroSequence {
        match self {
            ZeroSequence::Explicit(z) => ZeroSequence::Explicit(z.iter().map(|v| v * v).collect()),
            ZeroSequence::PowerLaw { scale, exponent } => ZeroSequence::PowerLaw {
                scale: scale * scale,
                exponent: 2.0 * exponent,
            },
        }
    }
}

/// Smallest number of leading factors kept by a power-law product.
pub const MIN_HEAD_FACTORS: usize = 64;
const TRUNCATION_TAIL_TOL: f64 = 1e-8;
const MAX_EXPLICIT_CHECK: usize = 1 << 24;

/// `V(w) = w^{m₀} Π_{k} G(w/ω_k; p)`.
///
/// Explicit zero lists are truncated after `K` factors. Power-law zeros keep
/// `K` factors exactly and add the remainder through
/// `ln Π_{k>K} G(w/ω_k; p) = -Σ_{j>p} (w^j/j) Σ_{k>K} ω_k^{-j}`,
/// valid while `|w| <= ω_{K+1}/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalProduct {
    pub zeros: ZeroSequence,
    pub genus: u32,
    pub truncation: usize,
    pub origin_multiplicity: u32,
    /// `lim n(t)/t^{1/exponent}` for power-law zeros.
    pub density: Option<f64>,
}

impl CanonicalProduct {
    pub fn new(zeros: ZeroSequence, genus: u32, truncation: usize, origin_multiplicity: u32) -> Result<Self> {
        zeros.validate()?;
        if truncation < 1 {
            return Err(Error::invalid("truncation K must be at least 1"));
        }
        if let Some(n) = zeros.len() {
            if truncation > n {
                return Err(Error::invalid(format!("truncation K = {truncation} exceeds the {n} zeros given")));
            }
        }
        if let ZeroSequence::PowerLaw { exponent, .. } = zeros {
            if exponent * (genus as f64 + 1.0) <= 1.0 {
                return Err(Error::invalid(format!(
                    "genus {genus} is too small for zeros growing like k^{exponent}"
                )));
            }
        }
        let density = match zeros {
            ZeroSequence::PowerLaw { scale, exponent } => Some(scale.powf(-1.0 / exponent)),
            ZeroSequence::Explicit(_) => None,
        };
        Ok(Self {
            zeros,
            genus,
            truncation,
            origin_multiplicity,
            density,
        })
    }

    /// Product for target order `ρ` in the variable `z`, where `w = z²`:
    /// genus `floor(ρ/2)`, with `K` from [`default_truncation`].
    pub fn for_order(zeros: ZeroSequence, rho: f64, max_abs_w: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::invalid(format!("order must be positive, got {rho}")));
        }
        let genus = (rho / 2.0).floor() as u32;
        zeros.validate()?;
        let k = default_truncation(&zeros, genus, max_abs_w)?;
        Self::new(zeros, genus, k, 0)
    }

    /// Largest `|w|` at which the tail correction is valid; infinite for
    /// explicit lists.
    pub fn validity_radius(&self) -> f64 {
        match self.zeros {
            ZeroSequence::Explicit(_) => f64::INFINITY,
            ZeroSequence::PowerLaw { .. } => 0.5 * self.zeros.term(self.truncation + 1).unwrap(),
        }
    }

    /// `ln V(w)` (imaginary part modulo 2π), `None` when `w` is a retained zero.
    pub fn log_eval(&self, w: Complex64) -> Result<Option<Complex64>> {
        if !w.re.is_finite() || !w.im.is_finite() {
            return Err(Error::invalid("evaluation point must be finite"));
        }
        if w == Complex64::new(0.0, 0.0) {
            return Ok((self.origin_multiplicity == 0).then(|| Complex64::new(0.0, 0.0)));
        }
        if w.im == 0.0 && self.zeros.position(w.re, self.truncation).is_some() {
            return Ok(None);
        }
        if w.norm() > self.validity_radius() {
            return Err(Error::invalid(format!(
                "|w| = {} exceeds the validity radius {} of this truncation",
                w.norm(),
                self.validity_radius()
            )));
        }
        let mut acc = w.ln() * self.origin_multiplicity as f64;
        for k in 1..=self.truncation {
            let omega = self.zeros.term(k).unwrap();
            match log_weierstrass_factor(w / omega, self.genus) {
                Some(l) => acc += l,
                None => return Ok(None),
            }
        }
        if let ZeroSequence::PowerLaw { exponent, .. } = self.zeros {
            acc += self.power_law_tail(w, exponent);
        }
        Ok(Some(acc))
    }

    fn power_law_tail(&self, w: Complex64, exponent: f64) -> Complex64 {
        let q = self.truncation + 1;
        let ratio = w / self.zeros.term(q).unwrap();
        let mut acc = Complex64::new(0.0, 0.0);
        let p = self.genus as i32;
        let mut pw = ratio.powi(p + 1);
        for j in (p + 1)..(p + 200) {
            let term = pw * scaled_zeta_tail(j as f64 * exponent, q) / j as f64;
            acc -= term;
            if term.norm() <= 1e-17 * acc.norm().max(1e-300) {
                break;
            }
            pw *= ratio;
        }
        acc
    }

    pub fn eval(&self, w: Complex64) -> Result<Complex64> {
        match self.log_eval(w)? {
            None => Ok(Complex64::new(0.0, 0.0)),
            Some(l) if l.re > f64::MAX.ln() => Err(Error::Overflow(format!(
                "|V(w)| = e^{:.1} at w = {w}",
                l.re
            ))),
            Some(l) => Ok(l.exp()),
        }
    }
}

/// `Σ_{k>=q} (q/k)^σ`, for `σ > 1`: a few terms directly, then
/// Euler-Maclaurin.
pub(crate) fn scaled_zeta_tail(sigma: f64, q: usize) -> f64 {
    const BERNOULLI: [f64; 5] = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0];
    let qf = q as f64;
    let direct = (2.0 * sigma).ceil().max(8.0) as usize;
    let mut sum = 0.0;
    for k in q..q + direct {
        sum += (sigma * (qf / k as f64).ln()).exp();
    }
    let big_q = (q + direct) as f64;
    let f_q = (sigma * (qf / big_q).ln()).exp();
    sum += big_q * f_q / (sigma - 1.0) + 0.5 * f_q;
    // f^{(r)}(Q) = (-1)^r (σ)_r Q^{-r} f(Q); only odd r enter
    for (i, b) in BERNOULLI.iter().enumerate() {
        let r = 2 * i + 1;
        let rising: f64 = (0..r).map(|t| (sigma + t as f64) / big_q).product();
        let fact: f64 = (1..=r + 1).map(|t| t as f64).product();
        sum += b / fact * rising * f_q;
    }
    sum
}

/// Default `K`.
///
/// Explicit lists: smallest `K` with `Σ_{k>K} (r/ω_k)^{p+1} < 1e-8` at
/// `r = max_abs_w`, or all zeros if the list never gets there. Power laws:
/// the smallest `K >= 64` with `ω_{K+1} >= 2 max_abs_w`, the remainder being
/// handled by the tail correction.
pub fn default_truncation(zeros: &ZeroSequence, genus: u32, max_abs_w: f64) -> Result<usize> {
    if !(max_abs_w >= 0.0 && max_abs_w.is_finite()) {
        return Err(Error::invalid("radius for truncation must be finite and nonnegative"));
    }
    match zeros {
        ZeroSequence::Explicit(z) => {
            let q = genus as i32 + 1;
            let mut tail: f64 = z.iter().map(|w| (max_abs_w / w).powi(q)).sum();
            for (k, w) in z.iter().enumerate() {
                if tail < TRUNCATION_TAIL_TOL {
                    return Ok(k.max(1));
                }
                tail -= (max_abs_w / w).powi(q);
            }
            Ok(z.len())
        }
        ZeroSequence::PowerLaw { scale, exponent } => {
            let need = ((2.0 * max_abs_w / scale).powf(1.0 / exponent)).ceil();
            if need > MAX_EXPLICIT_CHECK as f64 {
                return Err(Error::Overflow(format!(
                    "radius {max_abs_w} needs more than {MAX_EXPLICIT_CHECK} explicit factors"
                )));
            }
            Ok((need as usize).max(MIN_HEAD_FACTORS))
        }
    }
}

/// `F(z) = V(z²)` with `ω_k = λ_k²`, genus `floor(ρ/2)` and `K` factors
/// (default from [`default_truncation`] at `|z|²`). Exactly zero at `±λ_k`, `k <= K`.
pub fn counterexample_eval(lambdas: &ZeroSequence, rho: f64, z: Complex64, truncation: Option<usize>) -> Result<Complex64> {
    let cp = counterexample_product(lambdas, rho, z.norm_sqr(), truncation)?;
    if z.im == 0.0 && lambdas.position(z.re.abs(), cp.truncation).is_some() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    cp.eval(z * z)
}

/// The product `V` behind [`counterexample_eval`], valid up to `|w| = max_abs_w`.
pub fn counterexample_product(lambdas: &ZeroSequence, rho: f64, max_abs_w: f64, truncation: Option<usize>) -> Result<CanonicalProduct> {
    if !(rho > 1.0 && rho.is_finite()) {
        return Err(Error::invalid(format!("ρ must exceed 1, got {rho}")));
    }
    lambdas.validate()?;
    let omegas = lambdas.squared();
    let genus = (rho / 2.0).floor() as u32;
    let k = match truncation {
        Some(k) => k,
        None => default_truncation(&omegas, genus, max_abs_w)?,
    };
    CanonicalProduct::new(omegas, genus, k, 0)
}

/// Growth of `log max_θ |F(re^{iθ})|` against `r^ρ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductGrowthFit {
    pub rho: f64,
    pub radii: Vec<f64>,
    pub log_max_modulus: Vec<f64>,
    pub maximizing_angles: Vec<f64>,
    /// Least-squares slope of `log M(r)` on `r^ρ`.
    pub coefficient: f64,
    pub intercept: f64,
    /// `πΔ/|sin(πρ/2)|`, the indicator maximum for power-law zeros with
    /// non-integer `ρ/2`.
    pub predicted_coefficient: Option<f64>,
    pub truncation: usize,
    /// Largest change of `log M(r)` when `K` is doubled.
    pub truncation_change: f64,
}

fn log_abs(cp: &CanonicalProduct, z: Complex64) -> Result<f64> {
    Ok(cp.log_eval(z * z)?.map_or(f64::NEG_INFINITY, |l| l.re))
}

/// Maximum of `ln|F(re^{iθ})|` over `θ ∈ [0, π/2]` (enough for a real even
/// `F`): grid scan, then golden-section refinement around the best sample.
fn log_max_on_circle(cp: &CanonicalProduct, r: f64) -> Result<(f64, f64)> {
    const SCAN: usize = 96;
    let h = 0.5 * PI / SCAN as f64;
    let mut best = (f64::NEG_INFINITY, 0.0);
    for i in 0..=SCAN {
        let th = i as f64 * h;
        let v = log_abs(cp, Complex64::from_polar(r, th))?;
        if v > best.0 {
            best = (v, th);
        }
    }
    let (mut lo, mut hi) = ((best.1 - h).max(0.0), (best.1 + h).min(0.5 * PI));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let f = |th: f64| log_abs(cp, Complex64::from_polar(r, th));
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..60 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1)?;
        }
    }
    for (v, th) in [(f1, x1), (f2, x2)] {
        if v > best.0 {
            best = (v, th);
        }
    }
    Ok(best)
}

/// Fit the growth coefficient of the counterexample `F` on circles of the
/// given radii, together with a doubling check on the truncation.
pub fn counterexample_growth_fit(
    lambdas: &ZeroSequence,
    rho: f64,
    radii: &[f64],
    truncation: Option<usize>,
) -> Result<ProductGrowthFit> {
    if radii.len() < 2 || radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::invalid("growth fit needs at least two positive radii"));
    }
    let r_max = radii.iter().cloned().fold(0.0, f64::max);
    let cp = counterexample_product(lambdas, rho, r_max * r_max, truncation)?;
    let doubled_k = match cp.zeros.len() {
        Some(n) => (2 * cp.truncation).min(n),
        None => 2 * cp.truncation,
    };
    let doubled = CanonicalProduct::new(cp.zeros.clone(), cp.genus, doubled_k, 0)?;
    let mut logs = Vec::with_capacity(radii.len());
    let mut angles = Vec::with_capacity(radii.len());
    let mut change: f64 = 0.0;
    for &r in radii {
        let (v, th) = log_max_on_circle(&cp, r)?;
        let v2 = log_abs(&doubled, Complex64::from_polar(r, th))?;
        change = change.max((v2 - v).abs());
        logs.push(v);
        angles.push(th);
    }
    let rows: Vec<Vec<f64>> = radii.iter().map(|r| vec![r.powf(rho), 1.0]).collect();
    let x = least_squares(&rows, &logs)?;
    let sigma = rho / 2.0;
    let predicted_coefficient = match (cp.density, sigma.fract() != 0.0) {
        (Some(d), true) => Some(PI * d / (PI * sigma).sin().abs()),
        _ => None,
    };
    Ok(ProductGrowthFit {
        rho,
        radii: radii.to_vec(),
        log_max_modulus: logs,
        maximizing_angles: angles,
        coefficient: x[0],
        intercept: x[1],
        predicted_coefficient,
        truncation: cp.truncation,
        truncation_change: change,
    })
}
