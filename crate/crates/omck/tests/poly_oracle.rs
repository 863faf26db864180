//! Exact-arithmetic oracle for the steady-state polynomial.
//!
//! Re-expands x [kappa^2 D^2 + B^2] - eps^2 D^2 with arbitrary-precision
//! rationals starting from the exact f64 parameter values, then compares
//! against the f64 coefficient convolution used by the solver.

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};

use omck::params::{drive_amplitude, DriveAmplitude, ModeParams, SystemParams};
use omck::steady::build_polynomial;

type Q = Ratio<BigInt>;

fn q(v: f64) -> Q {
    let r = Ratio::<BigInt>::from_float(v).expect("finite parameter");
    r
}

fn mul(a: &[Q], b: &[Q]) -> Vec<Q> {
    let mut out = vec![Q::zero(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

fn add(a: &[Q], b: &[Q]) -> Vec<Q> {
    let mut out = vec![Q::zero(); a.len().max(b.len())];
    for (i, ai) in a.iter().enumerate() {
        out[i] += ai;
    }
    for (i, bi) in b.iter().enumerate() {
        out[i] += bi;
    }
    out
}

fn scale(a: &[Q], s: &Q) -> Vec<Q> {
    a.iter().map(|c| c * s).collect()
}

/// Exact expansion of the steady polynomial, ascending degree, trimmed.
fn exact_poly(params: &SystemParams, eps: &DriveAmplitude) -> Vec<Q> {
    let one = vec![q(1.0)];
    let x = vec![Q::zero(), q(1.0)];

    // Omega_j = omega_j - g_ck,j x and d_j = Omega_j^2 + gamma_j^2
    let omegas: Vec<Vec<Q>> = params
        .modes
        .iter()
        .map(|m| {
            if m.ck_coupling == 0.0 {
                vec![q(m.frequency)]
            } else {
                vec![q(m.frequency), -q(m.ck_coupling)]
            }
        })
        .collect();
    let dens: Vec<Vec<Q>> = params
        .modes
        .iter()
        .zip(&omegas)
        .map(|(m, om)| {
            let g2 = q(m.damping) * q(m.damping);
            add(&mul(om, om), &[g2])
        })
        .collect();

    let mut big_d = one.clone();
    for d in &dens {
        big_d = mul(&big_d, d);
    }

    let mut b = scale(&big_d, &q(params.detuning));
    for (j, m) in params.modes.iter().enumerate() {
        let mut cof = one.clone();
        for (k, d) in dens.iter().enumerate() {
            if k != j {
                cof = mul(&cof, d);
            }
        }
        let g2 = q(m.coupling) * q(m.coupling);
        let mut term = mul(&scale(&x, &(q(2.0) * &g2)), &omegas[j]);
        if m.ck_coupling != 0.0 {
            let x2 = mul(&x, &x);
            term = add(&term, &scale(&x2, &(q(m.ck_coupling) * &g2)));
        }
        b = add(&b, &scale(&mul(&term, &cof), &-q(1.0)));
    }

    let d_sq = mul(&big_d, &big_d);
    let kappa_sq = q(params.cavity_decay) * q(params.cavity_decay);
    let eps_sq = q(eps.0) * q(eps.0);
    let mut poly = mul(&x, &scale(&d_sq, &kappa_sq));
    poly = add(&poly, &mul(&x, &mul(&b, &b)));
    poly = add(&poly, &scale(&d_sq, &-eps_sq));

    while poly.len() > 1 && poly.last().unwrap().is_zero() {
        poly.pop();
    }
    poly
}

fn mode(freq: f64, gck: f64) -> ModeParams {
    ModeParams {
        frequency: freq,
        damping: 40.0,
        coupling: 250.0,
        ck_coupling: gck,
        bath_occupation: 100.0,
    }
}

fn system(gcks: &[f64], power: f64) -> SystemParams {
    let w = std::f64::consts::TAU * 6.3e6;
    SystemParams {
        detuning: w,
        cavity_decay: std::f64::consts::TAU * 0.1e6,
        laser_frequency: std::f64::consts::TAU * 1.3e9,
        input_power: power,
        modes: gcks.iter().map(|&g| mode(w, g)).collect(),
    }
}

fn compare(params: &SystemParams, tol: f64) {
    let eps = drive_amplitude(params);
    let poly = build_polynomial(params, &eps);
    let exact = exact_poly(params, &eps);
    assert_eq!(
        poly.coeffs.len(),
        exact.len(),
        "trimmed degree disagrees with the exact expansion"
    );
    let scale = exact
        .iter()
        .map(|c| c.abs().to_f64().unwrap())
        .fold(0.0_f64, f64::max);
    for (k, (c, e)) in poly.coeffs.iter().zip(&exact).enumerate() {
        let e = e.to_f64().unwrap();
        let denom = e.abs().max(1e-30 * scale);
        assert!(
            (c - e).abs() / denom <= tol,
            "coefficient {k}: got {c:.17e}, exact {e:.17e}"
        );
    }
}

#[test]
fn two_mode_single_ck_coefficients() {
    compare(&system(&[0.25, 0.0], 1e-9), 5e-12);
}

#[test]
fn two_mode_no_ck_coefficients() {
    let p = system(&[0.0, 0.0], 1e-9);
    let eps = drive_amplitude(&p);
    assert_eq!(build_polynomial(&p, &eps).degree(), 3);
    compare(&p, 5e-12);
}

#[test]
fn three_mode_mixed_ck_coefficients() {
    compare(&system(&[0.25, 0.1, 0.0], 4e-9), 5e-12);
}

#[test]
fn negative_ck_coefficients() {
    compare(&system(&[-0.17, 0.0], 1e-9), 5e-12);
}

#[test]
fn nondegenerate_frequencies_coefficients() {
    let mut p = system(&[0.25, 0.0], 1e-9);
    p.modes[1].frequency *= 1.01;
    p.modes[1].damping = 55.0;
    p.modes[0].coupling = 310.0;
    compare(&p, 5e-12);
}

#[test]
fn degree_rule_matches_exact_expansion() {
    // trimmed degree is 4c + 3 with c CK-coupled modes and at least one
    // plain mode; the exact expansion is the authority in every case
    for (gcks, expect) in [
        (vec![0.0, 0.0], 3usize),
        (vec![0.25, 0.0], 7),
        (vec![0.25, 0.1, 0.0], 11),
        (vec![0.25, 0.1, 0.05, 0.0], 15),
    ] {
        let p = system(&gcks, 1e-9);
        let eps = drive_amplitude(&p);
        let poly = build_polynomial(&p, &eps);
        assert_eq!(poly.degree(), expect, "gcks = {gcks:?}");
        assert_eq!(exact_poly(&p, &eps).len() - 1, expect);
    }
    // all modes CK-coupled: still must agree with the exact expansion
    let p = system(&[0.25, 0.1], 1e-9);
    let eps = drive_amplitude(&p);
    assert_eq!(
        build_polynomial(&p, &eps).degree(),
        exact_poly(&p, &eps).len() - 1
    );
}
