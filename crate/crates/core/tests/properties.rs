use std::f64::consts::PI;

use num_complex::Complex64;
use phaseless::entire::{log_weierstrass_factor, weierstrass_factor, zero_count_bound};
use phaseless::quadrature::QuadratureConfig;
use phaseless::sampling::{
    classify_sequence, density_index, generate_sampling_set, max_tau_bounds, nonuniqueness_threshold, points_from_csv,
    uniqueness_threshold, Verdict,
};
use phaseless::stft::{global_phase_residual, spectrogram_on_set, Component, Signal, SpectrogramSamples};
use phaseless::windows::WindowModel;
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn component() -> impl Strategy<Value = Component> {
    (0.5..1.5f64, 0.0..2.0 * PI, -1.5..1.5f64, 0.6..1.5f64, -1.5..1.5f64).prop_map(|(r, phi, center, width, frequency)| {
        Component::Gaussian {
            amp: Complex64::from_polar(r, phi),
            center,
            width,
            frequency,
        }
    })
}

fn mixture() -> impl Strategy<Value = Signal> {
    prop::collection::vec(component(), 1..=3).prop_map(|cs| Signal::closed_form(cs).unwrap())
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn sampling_points_follow_their_formulas(
        m in 1.05..5.0f64,
        tau1 in 0.01..2.0f64,
        tau2 in 0.01..2.0f64,
        n in 1u64..60,
        origin in any::<bool>(),
    ) {
        let set = generate_sampling_set(m, tau1, tau2, n, origin, None).unwrap();
        prop_assert_eq!(set.len(), 4 * n as usize + usize::from(origin));
        let pts = if origin {
            prop_assert_eq!((set.points[0].x, set.points[0].omega), (0.0, 0.0));
            &set.points[1..]
        } else {
            &set.points[..]
        };
        for chunk in pts.chunks(4) {
            let k = chunk[0].n as f64;
            let t1 = chunk[0].x / k.powf((m - 1.0) / m);
            let t2 = chunk[0].omega / k.powf(1.0 / m);
            prop_assert!((t1 - tau1).abs() <= 1e-14 * tau1);
            prop_assert!((t2 - tau2).abs() <= 1e-14 * tau2);
            // the four quadrants are mirror images
            for p in chunk {
                prop_assert_eq!(p.n, chunk[0].n);
                prop_assert_eq!(p.x, p.sign_x as f64 * chunk[0].x);
                prop_assert_eq!(p.omega, p.sign_omega as f64 * chunk[0].omega);
            }
        }
        let back = points_from_csv(&set.to_csv()).unwrap();
        prop_assert_eq!(back, set.points);
    }

    #[test]
    fn tau_bounds_are_uniqueness_thresholds(m in 1.05..6.0f64, a in 0.05..20.0f64) {
        let b = max_tau_bounds(m, a).unwrap();
        let rho = m / (m - 1.0);
        let tau = (m - 1.0) / m * (2.0 * PI).powf(rho) * (a * m).powf(-1.0 / (m - 1.0));
        let u1 = uniqueness_threshold(rho, tau).unwrap();
        let u2 = uniqueness_threshold(m, a).unwrap();
        prop_assert!((b.tau1_max - u1).abs() <= 1e-12 * u1);
        prop_assert!((b.tau2_max - u2).abs() <= 1e-12 * u2);
    }

    #[test]
    fn threshold_gap_is_nonempty(rho in 1.001..12.0f64, b in 0.01..100.0f64) {
        let u = uniqueness_threshold(rho, b).unwrap();
        let c = nonuniqueness_threshold(rho, b).unwrap();
        prop_assert!(u < c, "rho={} b={}: {} >= {}", rho, b, u, c);
    }

    #[test]
    fn classifier_is_scale_consistent(rho in 1.05..4.0f64, b in 0.2..10.0f64, c in 0.05..5.0f64) {
        let base: Vec<f64> = (1..=200).map(|k| (k as f64).powf(1.0 / rho)).collect();
        let scaled: Vec<f64> = base.iter().map(|x| c * x).collect();
        let d0 = density_index(&base, rho).unwrap().value;
        let d1 = density_index(&scaled, rho).unwrap().value;
        prop_assert!((d1 - c * d0).abs() <= 1e-12 * d1);
        let u = uniqueness_threshold(rho, b).unwrap();
        let cr = nonuniqueness_threshold(rho, b).unwrap();
        prop_assume!((d1 - u).abs() > 1e-9 * u && (d1 - cr).abs() > 1e-9 * cr);
        let r = classify_sequence(&scaled, rho, b).unwrap();
        let expect = if d1 < u {
            Verdict::Unique
        } else if d1 > cr {
            Verdict::NotUnique
        } else {
            Verdict::Indeterminate
        };
        prop_assert_eq!(r.verdict, expect);
    }

    #[test]
    fn weierstrass_factor_properties(re in -0.5..0.5f64, im in -0.5..0.5f64, p in 0u32..6) {
        let u = Complex64::new(re, im);
        prop_assume!(u.norm() <= 0.5 && u.norm() > 0.0);
        let g = weierstrass_factor(u, p);
        let l = log_weierstrass_factor(u, p).unwrap();
        prop_assert!((l.exp() - g).norm() <= 1e-14 * g.norm());
        // |log E_p(u)| <= 2|u|^{p+1} on the disc of radius 1/2
        prop_assert!(l.norm() <= 2.0 * u.norm().powi(p as i32 + 1) * (1.0 + 1e-12));
        prop_assert_eq!(weierstrass_factor(Complex64::new(1.0, 0.0), p), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn zero_bound_grows_with_radius(r in 0.5..20.0f64, s in 1.5..4.0f64, b in 0.0..3.0f64, rho in 0.5..3.0f64) {
        let a = zero_count_bound(r, s, 1.0, b, rho).unwrap();
        let bigger = zero_count_bound(2.0 * r, s, 1.0, b, rho).unwrap();
        prop_assert!(bigger >= a);
    }
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn spectrogram_is_blind_to_global_phase(f in mixture(), alpha in 0.0..2.0 * PI) {
        let g = WindowModel::generalized_gaussian(PI, 2.0, 1.0).unwrap();
        let b = max_tau_bounds(2.0, PI).unwrap();
        let pts = generate_sampling_set(2.0, 0.9 * b.tau1_max, 0.9 * b.tau2_max, 6, true, Some(PI))
            .unwrap()
            .coordinates();
        let q = QuadratureConfig::default();
        let s0 = spectrogram_on_set(&f, &g, &pts, &q).unwrap();
        let s1 = spectrogram_on_set(&f.with_phase(alpha), &g, &pts, &q).unwrap();
        for (a, b) in s0.magnitudes.iter().zip(&s1.magnitudes) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        let back = SpectrogramSamples::from_csv(&s0.to_csv(), s0.quad_config_id.clone()).unwrap();
        prop_assert_eq!(back, s0);
    }

    #[test]
    fn phase_alignment_undoes_a_rotation(f in mixture(), beta in 0.0..2.0 * PI) {
        let a = global_phase_residual(&f, &f.with_phase(beta)).unwrap();
        prop_assert!(a.residual < 1e-12);
        let d = (a.alpha + beta).rem_euclid(2.0 * PI);
        prop_assert!(d.min(2.0 * PI - d) < 1e-12, "alpha={} beta={}", a.alpha, beta);
    }
}
