//! Numerical companion to the theory of STFT phase retrieval with windows
//! whose Fourier transform decays super-exponentially.
//!
//! * [`windows`] – window families `ĝ(ξ) = C e^{-a|ξ|^m}` and their
//!   entire extensions.
//! * [`entire`] – Gamma moments, Taylor coefficients, order and type
//!   estimation, Jensen averages and canonical products.
//! * [`sampling`] – the non-uniform sampling sets and the uniqueness /
//!   non-uniqueness density thresholds.
//! * [`stft`] – spectrogram evaluation, global-phase discrimination and an
//!   alternating-projection reconstruction demonstrator.
//! * [`cli`] – the `phaseless` command-line front end.

pub mod cli;
pub mod entire;
pub mod error;
mod fit;
pub mod format;
pub mod quadrature;
pub mod sampling;
pub mod stft;
pub mod windows;

pub use error::{Error, Result};
pub use quadrature::{QuadratureConfig, TimeGrid};
pub use windows::{FourierSide, WindowModel};
