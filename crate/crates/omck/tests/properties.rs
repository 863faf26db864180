//! Property-based invariants across random parameters.

use proptest::prelude::*;

use omck::linearized::{build_drift, build_noise};
use omck::params::{drive_amplitude, thermal_occupation, ModeParams, SystemParams};
use omck::steady::{build_polynomial, reconstruct_state, root_residual_ok, solve_roots};

fn base_system(power: f64, gck: f64) -> SystemParams {
    let w = std::f64::consts::TAU * 6.3e6;
    SystemParams {
        detuning: w,
        cavity_decay: std::f64::consts::TAU * 0.1e6,
        laser_frequency: std::f64::consts::TAU * 1.3e9,
        input_power: power,
        modes: [gck, 0.0]
            .iter()
            .map(|&g| ModeParams {
                frequency: w,
                damping: 40.0,
                coupling: 250.0,
                ck_coupling: g,
                bath_occupation: 100.0,
            })
            .collect(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn drive_amplitude_sqrt_law(p in 1e-13f64..1e-6) {
        let mut s = base_system(p, 0.25);
        let e1 = drive_amplitude(&s).0;
        s.input_power = 4.0 * p;
        let e2 = drive_amplitude(&s).0;
        prop_assert!((e2 / e1 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn thermal_occupation_monotone_in_t(
        w in 1e5f64..1e9,
        t1 in 1e-6f64..1.0,
        factor in 1.01f64..100.0,
    ) {
        let w = std::f64::consts::TAU * w;
        let n1 = thermal_occupation(w, t1);
        let n2 = thermal_occupation(w, t1 * factor);
        prop_assert!(n2 >= n1);
        // lower frequency at fixed temperature is hotter
        prop_assert!(thermal_occupation(0.5 * w, t1) >= n1);
    }

    #[test]
    fn roots_bounded_and_residual_clean(
        p in 1e-13f64..1e-6,
        gck in -0.3f64..0.3,
    ) {
        let s = base_system(p, gck);
        let eps = drive_amplitude(&s);
        let poly = build_polynomial(&s, &eps);
        let roots = solve_roots(&poly).unwrap();
        prop_assert!(!roots.is_empty());
        prop_assert!(roots.len() <= poly.degree());
        let bound = eps.0 * eps.0 / (s.cavity_decay * s.cavity_decay);
        for &x in &roots {
            prop_assert!(x >= 0.0);
            // every real root satisfies x kappa^2 <= eps^2
            prop_assert!(x <= bound * (1.0 + 1e-9));
            prop_assert!(root_residual_ok(&poly, x), "residual at {}", x);
        }
    }

    #[test]
    fn monotone_recovery_in_single_root_regime(
        p in 1e-13f64..1e-10,
        factor in 1.01f64..5.0,
    ) {
        // without CK the polynomial is cubic and single-rooted below the
        // bistable knee near 2e-9 W
        let s1 = base_system(p, 0.0);
        let s2 = base_system(p * factor, 0.0);
        let r1 = solve_roots(&build_polynomial(&s1, &drive_amplitude(&s1))).unwrap();
        let r2 = solve_roots(&build_polynomial(&s2, &drive_amplitude(&s2))).unwrap();
        prop_assert_eq!(r1.len(), 1);
        prop_assert_eq!(r2.len(), 1);
        prop_assert!(r2[0] > r1[0]);
    }

    #[test]
    fn drift_block_conjugacy(
        p in 1e-13f64..1e-8,
        gck in -0.3f64..0.3,
        g in 10.0f64..1000.0,
    ) {
        let mut s = base_system(p, gck);
        s.modes[0].coupling = g;
        let eps = drive_amplitude(&s);
        let roots = solve_roots(&build_polynomial(&s, &eps)).unwrap();
        let state = reconstruct_state(&s, &eps, roots[0]).unwrap();
        let a = build_drift(&s, &state);
        let dim = s.n_modes() + 1;
        for r in 0..dim {
            for c in 0..dim {
                prop_assert_eq!(a[(r + dim, c + dim)], a[(r, c)].conj());
                prop_assert_eq!(a[(r + dim, c)], a[(r, c + dim)].conj());
            }
        }
    }

    #[test]
    fn noise_matrix_properties(
        nth1 in 0.0f64..1e4,
        nth2 in 0.0f64..1e4,
        gamma in 1.0f64..1e4,
    ) {
        let mut s = base_system(1e-9, 0.25);
        s.modes[0].bath_occupation = nth1;
        s.modes[1].bath_occupation = nth2;
        s.modes[0].damping = gamma;
        let q = build_noise(&s);
        prop_assert_eq!(q.clone(), q.transpose());
        prop_assert!(q.iter().all(|&v| v >= 0.0));
        prop_assert_eq!(q[(1, 4)], gamma * (2.0 * nth1 + 1.0));
        prop_assert_eq!(q.iter().filter(|&&v| v != 0.0).count(), 6);
    }

    #[test]
    fn round_trip_preserves_values(
        p in 1e-13f64..1e-6,
        gck in -0.3f64..0.3,
        nth in 0.0f64..1e4,
    ) {
        let mut s = base_system(p, gck);
        s.modes[1].bath_occupation = nth;
        let text = toml::to_string(&s.to_raw_config()).unwrap();
        let s2 = SystemParams::parse(&text).unwrap();
        prop_assert_eq!(s, s2);
    }
}
