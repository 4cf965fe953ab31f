use std::f64::consts::PI;
use std::ops::RangeInclusive;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stft::signal::{Component, Signal};

/// Parameter ranges for random Gaussian mixtures. Every draw is uniform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureRanges {
    pub components: RangeInclusive<usize>,
    /// Modulus of each amplitude; the phase is uniform on `[0, 2π)`.
    pub amplitude: RangeInclusive<f64>,
    pub center: RangeInclusive<f64>,
    pub frequency: RangeInclusive<f64>,
    pub width: RangeInclusive<f64>,
}

impl Default for MixtureRanges {
    fn default() -> Self {
        Self {
            components: 1..=3,
            amplitude: 0.5..=1.5,
            center: -1.5..=1.5,
            frequency: -1.5..=1.5,
            width: 0.6..=1.5,
        }
    }
}

impl MixtureRanges {
    fn validate(&self) -> Result<()> {
        let ok = |r: &RangeInclusive<f64>| r.start().is_finite() && r.end().is_finite() && r.start() <= r.end();
        if *self.components.start() < 1 || self.components.start() > self.components.end() {
            return Err(Error::invalid("mixtures need at least one component"));
        }
        if !(ok(&self.amplitude) && ok(&self.center) && ok(&self.frequency) && ok(&self.width)) {
            return Err(Error::invalid("mixture ranges must be finite and ordered"));
        }
        if *self.amplitude.start() <= 0.0 || *self.width.start() <= 0.0 {
            return Err(Error::invalid("amplitudes and widths must be positive"));
        }
        Ok(())
    }
}

fn draw_component<R: Rng>(rng: &mut R, ranges: &MixtureRanges) -> Component {
    let modulus = rng.random_range(ranges.amplitude.clone());
    let phase = rng.random_range(0.0..2.0 * PI);
    Component::Gaussian {
        amp: Complex64::from_polar(modulus, phase),
        center: rng.random_range(ranges.center.clone()),
        width: rng.random_range(ranges.width.clone()),
        frequency: rng.random_range(ranges.frequency.clone()),
    }
}

pub fn random_mixture<R: Rng>(rng: &mut R, ranges: &MixtureRanges) -> Result<Signal> {
    ranges.validate()?;
    let count = rng.random_range(ranges.components.clone());
    let components = (0..count).map(|_| draw_component(rng, ranges)).collect();
    Signal::closed_form(components)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairKind {
    /// `h = e^{iα} f`.
    PhaseShift,
    /// `h` drawn independently of `f`.
    Independent,
    /// `h` is `f` with one component moved in time and frequency.
    Perturbed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestPair {
    pub kind: PairKind,
    pub f: Signal,
    pub h: Signal,
}

fn perturb<R: Rng>(rng: &mut R, f: &Signal) -> Result<Signal> {
    let crate::stft::signal::Representation::ClosedForm(components) = &f.repr else {
        return Err(Error::invalid("only closed-form mixtures can be perturbed"));
    };
    let mut components = components.clone();
    let idx = rng.random_range(0..components.len());
    let sign = |rng: &mut R| if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let dc = sign(rng) * rng.random_range(0.3..0.6);
    let dn = sign(rng) * rng.random_range(0.3..0.6);
    if let Component::Gaussian { center, frequency, .. } = &mut components[idx] {
        *center += dc;
        *frequency += dn;
    }
    Ok(Signal::closed_form(components)?.scaled(f.gain))
}

/// `count` pairs cycling through phase shifts, independent draws and
/// perturbations. The same seed always yields the same battery.
pub fn test_battery(seed: u64, count: usize, ranges: &MixtureRanges) -> Result<Vec<TestPair>> {
    ranges.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(count);
    for i in 0..count {
        let f = random_mixture(&mut rng, ranges)?;
        let (kind, h) = match i % 3 {
            0 => {
                let alpha = rng.random_range(0.0..2.0 * PI);
                (PairKind::PhaseShift, f.with_phase(alpha))
            }
            1 => (PairKind::Independent, random_mixture(&mut rng, ranges)?),
            _ => (PairKind::Perturbed, perturb(&mut rng, &f)?),
        };
        pairs.push(TestPair { kind, f, h });
    }
    Ok(pairs)
}
