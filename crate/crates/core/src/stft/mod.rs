//! Short-time Fourier transforms, sampled spectrograms, phase alignment and
//! magnitude-only reconstruction.

mod battery;
mod discriminate;
mod reconstruct;
mod signal;
mod transform;

pub use battery::{random_mixture, test_battery, MixtureRanges, PairKind, TestPair};
pub use discriminate::{
    discriminate, global_phase_residual, moyal_energy_check, Axis, DiscriminationReport, DiscriminationVerdict,
    Discriminator, PhaseAlignment, DEFAULT_MATCH_TOL,
};
pub use reconstruct::{
    default_reconstruction_grid, full_grid_spectrogram, gs_reconstruct, GridMagnitudes, Reconstruction, StftGrid,
    MOMENTUM,
};
pub use signal::{hermite_function, Component, Representation, Signal, SUPPORT_EPS};
pub use transform::{
    extend_stft, quad_config_id, spectrogram_on_set, stft_eval, ExtendedStft, SpectrogramSamples,
    SPECTROGRAM_CSV_HEADER,
};
