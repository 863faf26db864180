//! Slow, independent brute-force verifiers. These share nothing with the
//! main solvers beyond the parameter types: the steady-state function is
//! evaluated directly (no polynomial expansion) and the covariance is
//! obtained by time integration instead of a linear solve.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::params::{DriveAmplitude, SystemParams};

type C64 = Complex<f64>;

/// Comparison of one quantity between the main solver and an oracle.
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub quantity: String,
    pub main_value: f64,
    pub oracle_value: f64,
    pub relative_deviation: f64,
    pub pass: bool,
}

impl OracleReport {
    pub fn new(quantity: &str, main: f64, oracle: f64, tol: f64) -> Self {
        let denom = main.abs().max(oracle.abs()).max(f64::MIN_POSITIVE);
        let dev = (main - oracle).abs() / denom;
        OracleReport {
            quantity: quantity.to_string(),
            main_value: main,
            oracle_value: oracle,
            relative_deviation: dev,
            pass: dev <= tol,
        }
    }
}

/// Left-hand side minus eps^2 of the steady photon-number condition,
/// evaluated directly from the rates.
pub fn steady_function(params: &SystemParams, eps: f64, x: f64) -> f64 {
    let mut detuning = params.detuning;
    for m in &params.modes {
        let om = m.frequency - m.ck_coupling * x;
        let den = om * om + m.damping * m.damping;
        detuning -= (2.0 * m.coupling * m.coupling * x * om
            + m.ck_coupling * m.coupling * m.coupling * x * x)
            / den;
    }
    x * (params.cavity_decay * params.cavity_decay + detuning * detuning) - eps * eps
}

/// Roots of the steady-state condition on [0, x_max] found by a dense
/// sign-change scan, each refined by bisection to 1e-12 relative.
///
/// Errors with `ScanRange` when the function is still negative at x_max,
/// which indicates roots beyond the scanned interval.
pub fn dense_scan_roots(
    params: &SystemParams,
    eps: &DriveAmplitude,
    x_max: f64,
    n_points: usize,
) -> Result<Vec<f64>> {
    assert!(n_points >= 2, "need at least two scan points");
    let f = |x: f64| steady_function(params, eps.0, x);
    if f(x_max) < 0.0 {
        return Err(Error::ScanRange { x_max });
    }

    let mut roots = Vec::new();
    if f(0.0) == 0.0 {
        roots.push(0.0);
    }
    let dx = x_max / n_points as f64;
    let mut x_prev = 0.0;
    let mut f_prev = f(0.0);
    for i in 1..=n_points {
        let x = dx * i as f64;
        let fx = f(x);
        if f_prev == 0.0 && x_prev > 0.0 {
            roots.push(x_prev);
        } else if f_prev * fx < 0.0 {
            // bisect to 1e-12 relative
            let (mut lo, mut hi) = (x_prev, x);
            let (mut flo, _) = (f_prev, fx);
            while hi - lo > 1e-12 * hi.abs().max(f64::MIN_POSITIVE) {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                } else if flo * fm < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        x_prev = x;
        f_prev = fx;
    }
    Ok(roots)
}

/// Integrate dV/dt = A V + V A^T + Q from V(0) = 0 with fixed-step
/// classical fourth-order Runge-Kutta, symmetrizing every step.
///
/// The caller picks t_end (at least 20 / |max Re eigenvalue| for a
/// converged steady value) and a dt resolving the fastest frequency in A.
pub fn integrate_covariance(
    a: &DMatrix<C64>,
    q: &DMatrix<f64>,
    t_end: f64,
    dt: f64,
) -> Result<DMatrix<C64>> {
    let d = a.nrows();
    let qc = q.map(|x| C64::new(x, 0.0));
    let deriv = |v: &DMatrix<C64>| a * v + v * a.transpose() + &qc;

    let qn = q.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let bound = 1e12 * qn * t_end.max(1.0);

    let n_steps = (t_end / dt).ceil() as usize;
    let mut v = DMatrix::<C64>::zeros(d, d);
    let half = C64::new(0.5 * dt, 0.0);
    let sixth = C64::new(dt / 6.0, 0.0);
    for _ in 0..n_steps {
        let k1 = deriv(&v);
        let k2 = deriv(&(&v + &k1 * half));
        let k3 = deriv(&(&v + &k2 * half));
        let k4 = deriv(&(&v + &k3 * C64::new(dt, 0.0)));
        v += (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * sixth;
        v = (&v + v.transpose()) * C64::new(0.5, 0.0);
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm > bound {
            return Err(Error::StepInstability { dt });
        }
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::drive_amplitude;
    use crate::testutil::paper_params;
    use approx::assert_relative_eq;

    #[test]
    fn scan_linear_cavity_limit() {
        let mut p = paper_params(0.0, 1e-9, 2);
        for m in &mut p.modes {
            m.coupling = 0.0;
        }
        let eps = drive_amplitude(&p);
        let expect = eps.0 * eps.0 / (p.cavity_decay.powi(2) + p.detuning.powi(2));
        let x_max = 1.05 * eps.0 * eps.0 / p.cavity_decay.powi(2);
        let roots = dense_scan_roots(&p, &eps, x_max, 1_000_000).unwrap();
        assert_eq!(roots.len(), 1);
        assert_relative_eq!(roots[0], expect, max_relative = 1e-10);
    }

    #[test]
    fn scan_undriven_has_root_at_zero() {
        let p = paper_params(0.25, 0.0, 2);
        let eps = drive_amplitude(&p);
        let roots = dense_scan_roots(&p, &eps, 1.0, 1000).unwrap();
        assert_eq!(roots, vec![0.0]);
    }

    #[test]
    fn scan_range_warning() {
        let p = paper_params(0.0, 1e-9, 2);
        let eps = drive_amplitude(&p);
        // all roots sit below eps^2/kappa^2; a tiny x_max leaves f negative
        assert!(matches!(
            dense_scan_roots(&p, &eps, 1e-3, 1000),
            Err(Error::ScanRange { .. })
        ));
    }

    #[test]
    fn integrate_scalar_analytic() {
        // A = -c I: V(t) = Q (1 - exp(-2 c t)) / (2 c)
        let c = 2.0;
        let d = 3;
        let a = DMatrix::<C64>::from_diagonal_element(d, d, C64::new(-c, 0.0));
        let mut q = DMatrix::<f64>::zeros(d, d);
        q[(0, 1)] = 1.0;
        q[(1, 0)] = 1.0;
        q[(2, 2)] = 0.5;
        let t_end = 20.0 / c;
        let v = integrate_covariance(&a, &q, t_end, 1e-3).unwrap();
        for r in 0..d {
            for col in 0..d {
                let expect = q[(r, col)] / (2.0 * c) * (1.0 - (-2.0 * c * t_end).exp());
                assert_relative_eq!(v[(r, col)].re, expect, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn integrate_detects_bad_step() {
        // RK4 with omega dt >> 1 on an oscillatory system blows up
        let a = DMatrix::<C64>::from_diagonal_element(2, 2, C64::new(-1e-3, 100.0));
        let q = DMatrix::<f64>::identity(2, 2);
        assert!(matches!(
            integrate_covariance(&a, &q, 1e4, 1.0),
            Err(Error::StepInstability { .. })
        ));
    }

    #[test]
    fn integrate_thermal_decoupled() {
        use crate::linearized::{build_drift, build_noise};
        use crate::steady::reconstruct_state;
        // decoupled thermal mode with order-one rates for a cheap integration
        let mut p = paper_params(0.0, 0.0, 1);
        p.modes[0].coupling = 0.0;
        p.modes[0].frequency = 5.0;
        p.modes[0].damping = 0.5;
        p.modes[0].bath_occupation = 3.0;
        p.cavity_decay = 1.0;
        p.detuning = 5.0;
        let eps = drive_amplitude(&p);
        let s = reconstruct_state(&p, &eps, 0.0).unwrap();
        let a = build_drift(&p, &s);
        let q = build_noise(&p);
        let v = integrate_covariance(&a, &q, 20.0 / 0.5, 1e-3).unwrap();
        // diagonal-block occupancy converges to n_th + 1/2
        assert_relative_eq!(v[(3, 1)].re, 3.5, max_relative = 1e-7);
        assert_relative_eq!(v[(2, 0)].re, 0.5, max_relative = 1e-7);
    }
}
