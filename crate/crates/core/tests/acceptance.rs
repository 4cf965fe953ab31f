//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fail.

mod common;

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use common::{moment_by_quadrature, rel_err};
use num_complex::Complex64;
use phaseless::entire::{
    counterexample_eval, counterexample_growth_fit, estimate_order, moment_integral, predicted_growth,
    taylor_coefficients, ZeroSequence,
};
use phaseless::quadrature::QuadratureConfig;
use phaseless::sampling::{
    classify_sequence, generate_sampling_set, max_tau_bounds, nonuniqueness_threshold, points_from_csv,
    uniqueness_threshold, Verdict,
};
use phaseless::stft::{
    default_reconstruction_grid, moyal_energy_check, random_mixture, spectrogram_on_set, stft_eval, test_battery, Axis,
    Component, DiscriminationVerdict, Discriminator, MixtureRanges, PairKind, Signal, DEFAULT_MATCH_TOL,
};
use phaseless::windows::WindowModel;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn gauss_window() -> WindowModel {
    WindowModel::generalized_gaussian(PI, 2.0, 1.0).unwrap()
}

fn lambda(m: f64, a: f64, n: u64) -> Vec<(f64, f64)> {
    let b = max_tau_bounds(m, a).unwrap();
    generate_sampling_set(m, 0.9 * b.tau1_max, 0.9 * b.tau2_max, n, false, Some(a))
        .unwrap()
        .coordinates()
}

fn gamma_moments() -> Outcome {
    let mut worst: f64 = 0.0;
    for m in [1.5, 2.0, 3.0] {
        for a in [0.5, 1.0, 2.0] {
            for n in 0..=20 {
                worst = worst.max(rel_err(moment_integral(n, a, m).unwrap(), moment_by_quadrature(n, a, m)));
            }
        }
    }
    Outcome {
        pass: worst < 1e-8,
        detail: format!("max rel err {worst:.2e} (< 1e-8) over 189 cases"),
    }
}

fn gaussian_growth() -> Outcome {
    let w = gauss_window();
    let s = taylor_coefficients(&w, 80, &QuadratureConfig::default()).unwrap();
    let est = estimate_order(&s).unwrap();
    let predicted = predicted_growth(2.0, PI).unwrap().type_;
    let mut series_err: f64 = 0.0;
    for z in [Complex64::new(0.7, 0.0), Complex64::new(1.0, 1.0), Complex64::new(-0.4, 1.3)] {
        let exact = (-PI * z * z).exp();
        series_err = series_err.max((s.eval(z) - exact).norm() / exact.norm());
    }
    let order_ok = (1.94..=2.06).contains(&est.order);
    let type_ok = (0.95 * PI..=1.05 * PI).contains(&est.type_);
    Outcome {
        pass: order_ok && type_ok && series_err < 1e-10 && (predicted - PI).abs() < 1e-12,
        detail: format!(
            "order {:.5} in [1.94, 2.06], type {:.5} in [{:.5}, {:.5}], formula type {:.15}, series vs e^(-pi z^2) rel err {series_err:.1e}",
            est.order,
            est.type_,
            0.95 * PI,
            1.05 * PI,
            predicted
        ),
    }
}

fn threshold_consistency() -> Outcome {
    let mut worst: f64 = 0.0;
    for m in [1.2, 1.5, 2.0, 3.0] {
        for a in [0.5, 1.0, PI, 5.0] {
            let b = max_tau_bounds(m, a).unwrap();
            let g = predicted_growth(m, a).unwrap();
            let u1 = uniqueness_threshold(g.order, g.type_).unwrap();
            let u2 = uniqueness_threshold(m, a).unwrap();
            worst = worst.max(rel_err(b.tau1_max, u1)).max(rel_err(b.tau2_max, u2));
        }
    }
    Outcome {
        pass: worst < 1e-12,
        detail: format!("max rel err {worst:.2e} (< 1e-12) on 16 (m, a) points"),
    }
}

fn gap_and_verdicts() -> Outcome {
    let mut gap_ok = true;
    let mut tested = 0;
    for rho in [1.1, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 7.5, 10.0] {
        for b in [0.1, 0.5, 1.0, PI, 5.0, 20.0] {
            tested += 1;
            gap_ok &= uniqueness_threshold(rho, b).unwrap() < nonuniqueness_threshold(rho, b).unwrap();
        }
    }
    let verdicts: Vec<Verdict> = [0.3, 0.6, 1.5]
        .iter()
        .map(|c| {
            let l: Vec<f64> = (1..=200).map(|k| c * (k as f64).sqrt()).collect();
            classify_sequence(&l, 2.0, PI).unwrap().verdict
        })
        .collect();
    let expected = [Verdict::Unique, Verdict::Indeterminate, Verdict::NotUnique];
    Outcome {
        pass: gap_ok && verdicts == expected,
        detail: format!("gap nonempty for all {tested} (rho, b): {gap_ok}; verdicts for c = 0.3, 0.6, 1.5: {verdicts:?}"),
    }
}

fn counterexample() -> Outcome {
    let seq = ZeroSequence::PowerLaw { scale: 1.5, exponent: 0.5 };
    let fit = counterexample_growth_fit(&seq, 2.0, &[4.0, 8.0, 16.0], None).unwrap();
    let k = fit.truncation;
    let mut exact = true;
    for l in seq.take(k) {
        for z in [l, -l] {
            exact &= counterexample_eval(&seq, 2.0, Complex64::new(z, 0.0), Some(k)).unwrap() == Complex64::new(0.0, 0.0);
        }
    }
    // independent witness: F changes sign across each zero it can evaluate near
    let mut sign_changes = 0;
    let mut sign_checked = 0;
    for l in seq.take(k).into_iter().filter(|l| (l * 1.001).powi(2) <= 2.0 * fit.radii[2] * fit.radii[2]) {
        let d = 1e-6 * l;
        let (Ok(lo), Ok(hi)) = (
            counterexample_eval(&seq, 2.0, Complex64::new(l - d, 0.0), Some(k)),
            counterexample_eval(&seq, 2.0, Complex64::new(l + d, 0.0), Some(k)),
        ) else {
            continue;
        };
        sign_checked += 1;
        if lo.re * hi.re < 0.0 {
            sign_changes += 1;
        }
    }
    Outcome {
        pass: exact && sign_checked > 0 && sign_changes == sign_checked && fit.coefficient < PI && fit.truncation_change < 1e-6,
        detail: format!(
            "exact zeros at all {} retained +-lambda_k: {exact}; sign change across {sign_changes}/{sign_checked} zeros; r^2 coefficient {:.6} (< pi); truncation doubling change {:.2e} (< 1e-6)",
            2 * k,
            fit.coefficient,
            fit.truncation_change
        ),
    }
}

fn discrimination_battery() -> Outcome {
    let g = gauss_window();
    let pts = lambda(2.0, PI, 64);
    let d = Discriminator::new(&g, &pts, DEFAULT_MATCH_TOL).unwrap();
    let pairs = test_battery(20_240_617, 50, &MixtureRanges::default()).unwrap();
    let (mut inconsistent, mut phase_pairs, mut phase_ok, mut far, mut far_ok) = (0, 0, 0, 0, 0);
    let mut min_far_dev = f64::INFINITY;
    for p in &pairs {
        let r = d.run(&p.f, &p.h).unwrap();
        if r.verdict == DiscriminationVerdict::Inconsistent {
            inconsistent += 1;
        }
        if p.kind == PairKind::PhaseShift {
            phase_pairs += 1;
            if r.verdict == DiscriminationVerdict::EquivalentUpToPhase {
                phase_ok += 1;
            }
        }
        if r.aligned_residual > 0.1 {
            far += 1;
            if !r.spectrograms_match {
                far_ok += 1;
            }
            min_far_dev = min_far_dev.min(r.max_spectrogram_deviation);
        }
    }
    Outcome {
        pass: inconsistent == 0 && phase_ok == phase_pairs && far_ok == far && far > 0,
        detail: format!(
            "{} pairs on {} points: {inconsistent} Inconsistent; {phase_ok}/{phase_pairs} phase-shifted pairs EquivalentUpToPhase; {far_ok}/{far} pairs with residual > 0.1 exceed tol (smallest max_dev {min_far_dev:.3e})",
            pairs.len(),
            pts.len()
        ),
    }
}

fn invariances() -> Outcome {
    let g = gauss_window();
    let q = QuadratureConfig::default();
    let pts = lambda(2.0, PI, 16);
    let signals = vec![
        Signal::gaussian(0.0, 1.0).unwrap(),
        Signal::hermite(1, -0.3, 1.0).unwrap(),
        Signal::closed_form(vec![Component::LinearChirp {
            amp: Complex64::new(0.8, -0.3),
            center: 0.2,
            width: 1.2,
            frequency: 0.4,
            rate: 0.5,
        }])
        .unwrap(),
        random_mixture(&mut ChaCha8Rng::seed_from_u64(5), &MixtureRanges::default()).unwrap(),
        Signal::gaussian(0.3, 0.9).unwrap().sampled(&default_reconstruction_grid().time_grid()).unwrap(),
    ];
    let mut phase_dev: f64 = 0.0;
    for f in &signals {
        let base = spectrogram_on_set(f, &g, &pts, &q).unwrap();
        for alpha in [PI / 7.0, PI / 3.0, PI] {
            let rot = spectrogram_on_set(&f.with_phase(alpha), &g, &pts, &q).unwrap();
            for (a, b) in base.magnitudes.iter().zip(&rot.magnitudes) {
                phase_dev = phase_dev.max((a - b).abs());
            }
        }
    }
    let mut shift_dev: f64 = 0.0;
    let f = Signal::gaussian(0.2, 1.0).unwrap();
    for mu in [0.25, 1.0] {
        let shifted = f.shifted(mu);
        for &(x, omega) in &pts {
            let a = stft_eval(&shifted, &g, x, omega, &q).unwrap().norm();
            let b = stft_eval(&f, &g, x - mu, omega, &q).unwrap().norm();
            shift_dev = shift_dev.max((a - b).abs());
        }
    }
    Outcome {
        pass: phase_dev <= 1e-12 && shift_dev <= 1e-8,
        detail: format!("global phase max dev {phase_dev:.2e} (<= 1e-12); shift covariance max dev {shift_dev:.2e} (<= 1e-8)"),
    }
}

fn sample_set_cli() -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_phaseless"))
        .args(["sample-set", "--m", "1.5", "--a", "1", "--tau1", "0.1", "--tau2", "0.5", "--n", "200"])
        .output()
        .expect("binary runs");
    if !out.status.success() {
        return Outcome {
            pass: false,
            detail: format!("exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)),
        };
    }
    let pts = points_from_csv(&String::from_utf8_lossy(&out.stdout)).unwrap();
    let mut worst: f64 = 0.0;
    for p in &pts {
        let n = p.n as f64;
        worst = worst
            .max(rel_err(p.x.abs() / n.powf(1.0 / 3.0), 0.1))
            .max(rel_err(p.omega.abs() / n.powf(2.0 / 3.0), 0.5));
    }
    Outcome {
        pass: pts.len() == 800 && worst < 1e-14,
        detail: format!("{} rows; max rel deviation of reconstructed tau {worst:.2e} (< 1e-14)", pts.len()),
    }
}

const ROUNDOFF_FLOOR: f64 = 1e-14;

fn energy_identity() -> Outcome {
    let g = gauss_window();
    let q = QuadratureConfig::default();
    let f = Signal::gaussian(0.0, 1.0).unwrap();
    let ladder = [1.0, 0.5, 0.25, 0.125, 0.0625];
    let errs: Vec<f64> = ladder
        .iter()
        .map(|&h| {
            let ax = Axis::new(-4.0, 4.0, h).unwrap();
            moyal_energy_check(&f, &g, ax, ax, &q).unwrap()
        })
        .collect();
    // below ROUNDOFF_FLOOR the relative error is double-precision noise and
    // successive values are not ordered
    let monotone = errs.windows(2).all(|w| w[1] < w[0] || w.iter().all(|e| *e <= ROUNDOFF_FLOOR));
    let at_floor = errs.iter().filter(|e| **e <= ROUNDOFF_FLOOR).count();
    Outcome {
        pass: errs[4] < 1e-6 && monotone,
        detail: format!(
            "relative errors on steps {ladder:?}: [{}]; finest < 1e-6; decreasing until the {ROUNDOFF_FLOOR:e} round-off floor: {monotone} ({at_floor} at the floor)",
            errs.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(", ")
        ),
    }
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 9] = [
        ("gamma-moment identity", Duration::from_secs(10), gamma_moments),
        ("Gaussian window growth", Duration::from_secs(30), gaussian_growth),
        ("threshold consistency identity", Duration::from_secs(1), threshold_consistency),
        ("threshold gap and classifier verdicts", Duration::from_secs(1), gap_and_verdicts),
        ("counterexample construction", Duration::from_secs(60), counterexample),
        ("discrimination battery", Duration::from_secs(300), discrimination_battery),
        ("spectrogram invariances", Duration::from_secs(30), invariances),
        ("sampling-set CSV formulas", Duration::from_secs(1), sample_set_cli),
        ("energy identity", Duration::from_secs(60), energy_identity),
    ];
    let mut failures = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let in_time = elapsed < *limit;
        let pass = outcome.pass && in_time;
        if !pass {
            failures += 1;
        }
        println!(
            "{} [{}] {name}: {}; {:.2} s (< {} s)",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            outcome.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
