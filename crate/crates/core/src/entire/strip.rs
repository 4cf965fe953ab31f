use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::least_squares;

/// Bound `|f(x+iy)| <= C e^{-a|x|^ρ + b|y|^ρ}` fitted on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripGrowthFit {
    pub a_fit: f64,
    pub b_fit: f64,
    pub c_fit: f64,
    pub rho: f64,
    /// Largest amount by which the plain least-squares surface undershot
    /// `ln|f|`; `C` has been raised by this so the bound holds on the grid.
    pub residual: f64,
}

impl StripGrowthFit {
    pub fn log_bound(&self, z: Complex64) -> f64 {
        self.c_fit.ln() - self.a_fit * z.re.abs().powf(self.rho) + self.b_fit * z.im.abs().powf(self.rho)
    }
}

/// Least-squares fit of `ln|f(x+iy)| ≈ ln C - a|x|^ρ + b|y|^ρ` over the grid,
/// with `C` then raised until the bound holds at every grid point.
pub fn strip_growth_fit<F>(f: F, rho: f64, x_grid: &[f64], y_grid: &[f64]) -> Result<StripGrowthFit>
where
    F: Fn(Complex64) -> Complex64,
{
    if x_grid.is_empty() || y_grid.is_empty() {
        return Err(Error::invalid("strip fit needs nonempty grids"));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::invalid(format!("ρ must be positive, got {rho}")));
    }
    let total = x_grid.len() * y_grid.len();
    let mut rows = Vec::with_capacity(total);
    let mut y = Vec::with_capacity(total);
    for &xv in x_grid {
        for &yv in y_grid {
            let v = f(Complex64::new(xv, yv)).norm();
            if !v.is_finite() {
                return Err(Error::Overflow(format!("f is not finite at {xv}+{yv}i")));
            }
            if v == 0.0 {
                continue;
            }
            rows.push(vec![1.0, -xv.abs().powf(rho), yv.abs().powf(rho)]);
            y.push(v.ln());
        }
    }
    if 2 * rows.len() < total {
        return Err(Error::FitDegenerate(format!(
            "f vanishes at {} of {total} grid points",
            total - rows.len()
        )));
    }
    // drop regressors that are identically zero on this grid
    let active: Vec<usize> = (0..3)
        .filter(|&j| j == 0 || rows.iter().any(|r| r[j] != 0.0))
        .collect();
    let reduced: Vec<Vec<f64>> = rows.iter().map(|r| active.iter().map(|&j| r[j]).collect()).collect();
    let sol = least_squares(&reduced, &y)?;
    let mut coef = [0.0; 3];
    for (&j, v) in active.iter().zip(&sol) {
        coef[j] = *v;
    }
    let mut residual: f64 = 0.0;
    for (r, yy) in rows.iter().zip(&y) {
        let model: f64 = r.iter().zip(&coef).map(|(a, b)| a * b).sum();
        residual = residual.max(yy - model);
    }
    Ok(StripGrowthFit {
        a_fit: coef[1],
        b_fit: coef[2],
        c_fit: (coef[0] + residual).exp(),
        rho,
        residual,
    })
}
