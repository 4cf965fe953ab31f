//! Entire functions of finite order: Taylor series from Fourier moments,
//! order and type, Jensen averages and canonical products.

mod jensen;
mod product;
mod series;
mod strip;

pub use jensen::{jensen_integral, zero_count_bound, JensenMean, LOG_SINGULAR, ORIGIN_ZERO_TOL};
pub use product::{
    counterexample_eval, counterexample_growth_fit, counterexample_product, default_truncation,
    log_weierstrass_factor, weierstrass_factor, CanonicalProduct, ProductGrowthFit, ZeroSequence,
    MIN_HEAD_FACTORS,
};
pub use series::{
    estimate_order, estimate_type, ln_moment_integral, max_modulus_samples, moment_integral,
    predicted_growth, taylor_coefficients, GrowthEstimate, GrowthMethod, TaylorSeries,
};
pub use strip::{strip_growth_fit, StripGrowthFit};
