//! Steady-state photon-number polynomial, its real roots, and full
//! steady-state reconstruction.
//!
//! The steady photon number x = |alpha|^2 satisfies
//! x [kappa^2 + Delta_eff(x)^2] = eps^2 with
//! Delta_eff(x) = Delta - sum_j (2 g_j^2 x Omega_j(x) + g_ck,j g_j^2 x^2) / d_j(x),
//! Omega_j(x) = omega_j - g_ck,j x, d_j(x) = Omega_j(x)^2 + gamma_j^2.
//! Multiplying through by D(x)^2 = prod_j d_j(x)^2 gives a polynomial
//! x [kappa^2 D^2 + B^2] - eps^2 D^2 with B = Delta D - sum_j (...) D/d_j.
//!
//! Coefficients span many decades in physical units, so root finding runs
//! on a nondimensionalized copy: rates scaled by the largest mechanical
//! frequency and x by the photon scale eps^2/kappa^2 (every real root
//! satisfies x kappa^2 <= eps^2, so scaled roots lie in [0, 1]).

use nalgebra::Complex;

use crate::consts::{TOL_POLY, TOL_ROOT_ABS, TOL_STATE};
use crate::error::{Error, Result};
use crate::params::{DriveAmplitude, SystemParams};

type C64 = Complex<f64>;

// -- dense polynomial helpers, ascending-degree coefficient arrays --

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

fn poly_add_into(acc: &mut Vec<f64>, b: &[f64], sign: f64) {
    if acc.len() < b.len() {
        acc.resize(b.len(), 0.0);
    }
    for (i, &bi) in b.iter().enumerate() {
        acc[i] += sign * bi;
    }
}

fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck)
}

fn poly_derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, &ck)| k as f64 * ck).collect()
}

/// Scale of the largest term at x, for relative residual checks.
fn poly_term_scale(c: &[f64], x: f64) -> f64 {
    let mut xp = 1.0;
    let mut scale = 0.0_f64;
    for &ck in c {
        scale = scale.max((ck * xp).abs());
        xp *= x;
    }
    scale
}

#[derive(Debug, Clone, Copy)]
struct ModeRates {
    frequency: f64,
    damping: f64,
    coupling: f64,
    ck_coupling: f64,
}

/// Expand x [kappa^2 D^2 + B^2] - eps^2 D^2 by coefficient convolution.
/// `ck_coupling` here already absorbs any x-rescaling.
fn assemble(detuning: f64, cavity_decay: f64, eps: f64, modes: &[ModeRates]) -> Vec<f64> {
    // per-mode Omega_j(x) and d_j(x); kept at exact length so that the
    // trimmed degree drops exactly when g_ck vanishes
    let omegas: Vec<Vec<f64>> = modes
        .iter()
        .map(|m| {
            if m.ck_coupling == 0.0 {
                vec![m.frequency]
            } else {
                vec![m.frequency, -m.ck_coupling]
            }
        })
        .collect();
    let dens: Vec<Vec<f64>> = modes
        .iter()
        .zip(&omegas)
        .map(|(m, om)| {
            let mut d = poly_mul(om, om);
            d[0] += m.damping * m.damping;
            d
        })
        .collect();

    let mut big_d = vec![1.0];
    for d in &dens {
        big_d = poly_mul(&big_d, d);
    }

    // B = Delta D - sum_j (2 g_j^2 x Omega_j + g_ck,j g_j^2 x^2) * D/d_j
    let mut b = big_d.iter().map(|&c| detuning * c).collect::<Vec<_>>();
    for (j, m) in modes.iter().enumerate() {
        let mut cofactor = vec![1.0];
        for (k, d) in dens.iter().enumerate() {
            if k != j {
                cofactor = poly_mul(&cofactor, d);
            }
        }
        let mut term = poly_mul(&[0.0, 2.0 * m.coupling * m.coupling], &omegas[j]);
        if m.ck_coupling != 0.0 {
            poly_add_into(&mut term, &[0.0, 0.0, m.ck_coupling * m.coupling * m.coupling], 1.0);
        }
        poly_add_into(&mut b, &poly_mul(&term, &cofactor), -1.0);
    }

    let d_sq = poly_mul(&big_d, &big_d);
    let kappa_sq = cavity_decay * cavity_decay;
    let mut poly = poly_mul(&[0.0, kappa_sq], &d_sq);
    poly_add_into(&mut poly, &poly_mul(&[0.0, 1.0], &poly_mul(&b, &b)), 1.0);
    poly_add_into(&mut poly, &d_sq.iter().map(|&c| eps * eps * c).collect::<Vec<_>>(), -1.0);

    while poly.len() > 1 && *poly.last().unwrap() == 0.0 {
        poly.pop();
    }
    poly
}

/// Steady photon-number polynomial in x = |alpha|^2, plus a scaled copy
/// used for root finding.
#[derive(Debug, Clone)]
pub struct SteadyPolynomial {
    /// Physical-unit coefficients, ascending degree.
    pub coeffs: Vec<f64>,
    /// Nondimensionalized coefficients in y = x / x_scale, ascending degree.
    pub scaled_coeffs: Vec<f64>,
    /// Photon scale: x = x_scale * y.
    pub x_scale: f64,
    /// Rate scale used for nondimensionalization, rad/s.
    pub rate_scale: f64,
}

impl SteadyPolynomial {
    /// Trimmed degree.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        poly_eval(&self.coeffs, x)
    }

    /// |p(y)| relative to the largest term, in scaled units.
    pub fn relative_residual(&self, x: f64) -> f64 {
        let y = x / self.x_scale;
        let scale = poly_term_scale(&self.scaled_coeffs, y);
        if scale == 0.0 {
            0.0
        } else {
            poly_eval(&self.scaled_coeffs, y).abs() / scale
        }
    }

    /// Mean-field slope criterion: a simple root is stable on the
    /// steady-state curve iff the polynomial is increasing through it.
    pub fn slope_stable(&self, x: f64) -> bool {
        let y = x / self.x_scale;
        poly_eval(&poly_derivative(&self.scaled_coeffs), y) > 0.0
    }
}

/// Build the steady polynomial for arbitrary N and any pattern of CK couplings.
pub fn build_polynomial(params: &SystemParams, eps: &DriveAmplitude) -> SteadyPolynomial {
    let rates: Vec<ModeRates> = params
        .modes
        .iter()
        .map(|m| ModeRates {
            frequency: m.frequency,
            damping: m.damping,
            coupling: m.coupling,
            ck_coupling: m.ck_coupling,
        })
        .collect();
    let coeffs = assemble(params.detuning, params.cavity_decay, eps.0, &rates);

    let s = params.modes.iter().map(|m| m.frequency).fold(f64::MIN, f64::max);
    let x_scale = if eps.0 > 0.0 { (eps.0 / params.cavity_decay).powi(2) } else { 1.0 };
    // the coupling terms enter multiplied by the photon number, so they
    // absorb sqrt(x_scale) (g^2 x terms) and x_scale (g_ck x terms)
    let scaled: Vec<ModeRates> = rates
        .iter()
        .map(|m| ModeRates {
            frequency: m.frequency / s,
            damping: m.damping / s,
            coupling: m.coupling * x_scale.sqrt() / s,
            ck_coupling: m.ck_coupling * x_scale / s,
        })
        .collect();
    let scaled_coeffs = assemble(
        params.detuning / s,
        params.cavity_decay / s,
        eps.0 / (s * x_scale.sqrt()),
        &scaled,
    );

    SteadyPolynomial { coeffs, scaled_coeffs, x_scale, rate_scale: s }
}

fn newton_polish(c: &[f64], dc: &[f64], mut y: f64) -> f64 {
    for _ in 0..8 {
        let f = poly_eval(c, y);
        let df = poly_eval(dc, y);
        if df == 0.0 {
            break;
        }
        let step = f / df;
        y -= step;
        if step.abs() <= 1e-15 * y.abs().max(1.0) {
            break;
        }
    }
    y
}

/// Bisect one sign change of a polynomial inside (a, b) to full precision.
fn bisect_poly(c: &[f64], mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = poly_eval(c, mid);
        if fm == 0.0 {
            return mid;
        }
        if (fa > 0.0) != (fm > 0.0) {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// All real roots of the polynomial `c` inside [lo, hi], ascending.
///
/// Isolation by the derivative chain: the roots of each derivative
/// partition the window into intervals on which the polynomial is strictly
/// monotone, so one bisection per sign change finds every root, including
/// the near-degenerate pairs that cluster around mechanical resonances
/// (which defeat eigenvalue-based solvers).
fn isolate_real_roots(c: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    // derivative chain down to a linear polynomial
    let mut chain = vec![c.to_vec()];
    while chain.last().unwrap().len() > 2 {
        chain.push(poly_derivative(chain.last().unwrap()));
    }

    // critical points of the previous level, starting from the linear tail
    let mut crit: Vec<f64> = Vec::new();
    {
        let lin = chain.last().unwrap();
        if lin.len() == 2 && lin[1] != 0.0 {
            let r = -lin[0] / lin[1];
            if r > lo && r < hi {
                crit.push(r);
            }
        }
    }

    for level in (0..chain.len() - 1).rev() {
        let pk = &chain[level];
        let dk = poly_derivative(pk);
        let mut pts = Vec::with_capacity(crit.len() + 2);
        pts.push(lo);
        pts.extend(crit.iter().copied());
        pts.push(hi);

        let mut roots = Vec::new();
        let mut fa = poly_eval(pk, pts[0]);
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let fb = poly_eval(pk, b);
            if fa == 0.0 {
                if roots.last().map_or(true, |&r: &f64| r < a) {
                    roots.push(a);
                }
            } else if fb != 0.0 && (fa > 0.0) != (fb > 0.0) {
                let r = bisect_poly(pk, a, b, fa);
                let r = newton_polish(pk, &dk, r).clamp(a, b);
                roots.push(r);
            }
            fa = fb;
        }
        if fa == 0.0 {
            roots.push(hi);
        }
        crit = roots;
    }
    crit
}

/// All real nonnegative roots, ascending, in physical units.
///
/// Roots are isolated on the scaled polynomial over [0, 1] (every physical
/// root satisfies x kappa^2 <= eps^2, so scaled roots cannot exceed 1) and
/// Newton-polished.
pub fn solve_roots(poly: &SteadyPolynomial) -> Result<Vec<f64>> {
    let c = &poly.scaled_coeffs;
    if c.iter().all(|&ck| ck == 0.0) {
        return Err(Error::DegeneratePolynomial);
    }
    let n = c.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }

    let lo = -1e-6;
    let hi = 1.0 + 1e-6;
    let mut roots: Vec<f64> = Vec::new();
    for y in isolate_real_roots(c, lo, hi) {
        if y < -TOL_ROOT_ABS {
            continue;
        }
        let y = if y.abs() < TOL_ROOT_ABS { 0.0 } else { y };
        if roots.iter().any(|&r| (r - y).abs() <= 1e-13 * y.abs().max(1.0)) {
            continue;
        }
        roots.push(y);
    }
    Ok(roots.into_iter().map(|y| y * poly.x_scale).collect())
}

/// Sensitivity of the scaled polynomial's real-root configuration to
/// coefficient rounding, dimensionless. The larger of
///
/// * the classical root condition number max_k |c_k y^k| / (|p'(y)| |y|)
///   over the supplied roots (times machine epsilon this bounds the
///   relative root error induced by coefficient expansion), and
/// * the sign sensitivity max_k |c_k y^k| / |p(y)| at the critical points
///   of p inside the root window (when this approaches 1/epsilon the sign
///   of p between two roots is lost in rounding, so a whole root pair can
///   vanish from the expanded coefficients without any trace at the
///   reported roots).
///
/// A steady polynomial with sensitivity near or beyond ~1e9 cannot be
/// trusted to 1e-6 relative accuracy in f64 coefficient form.
pub fn root_sensitivity(poly: &SteadyPolynomial, roots: &[f64]) -> f64 {
    let c = &poly.scaled_coeffs;
    if c.len() < 3 {
        return 0.0;
    }
    let dc = poly_derivative(c);
    let mut worst = 0.0_f64;
    for &x in roots {
        let y = x / poly.x_scale;
        if y == 0.0 {
            continue; // an exact root of the constant-free polynomial
        }
        let denom = poly_eval(&dc, y).abs() * y.abs();
        let scale = poly_term_scale(c, y);
        worst = worst.max(if denom == 0.0 { f64::INFINITY } else { scale / denom });
    }
    for y in isolate_real_roots(&dc, 0.0, 1.0 + 1e-6) {
        let p = poly_eval(c, y).abs();
        let scale = poly_term_scale(c, y);
        worst = worst.max(if p == 0.0 { f64::INFINITY } else { scale / p });
    }
    worst
}

/// One root of the steady-state system with its reconstructed amplitudes.
#[derive(Debug, Clone)]
pub struct SteadyState {
    /// x = |alpha|^2.
    pub photon_number: f64,
    pub alpha: C64,
    pub betas: Vec<C64>,
    /// Routh-Hurwitz stability of the drift matrix; filled by the
    /// covariance solver, false until then.
    pub stable: bool,
    /// True when max Re(eigenvalue) sits inside the +-tol_stab band around 0.
    pub marginal: bool,
    /// Mean-field stability from the slope of the steady-state curve.
    pub slope_stable: bool,
    /// 1, 2, ... for stable states sorted by photon number; 0 otherwise.
    pub branch_index: usize,
}

/// Effective detuning Delta' at photon number x:
/// Delta - sum_j 2 g_j Re(beta_j) - sum_CK g_ck,j |beta_j|^2.
pub fn effective_detuning_at(params: &SystemParams, x: f64) -> f64 {
    let mut d = params.detuning;
    for m in &params.modes {
        let om = m.frequency - m.ck_coupling * x;
        let den = om * om + m.damping * m.damping;
        // Re(beta_j) = g_j x Omega_j / d_j, |beta_j|^2 = g_j^2 x^2 / d_j
        d -= 2.0 * m.coupling * m.coupling * x * om / den;
        d -= m.ck_coupling * m.coupling * m.coupling * x * x / den;
    }
    d
}

/// Reconstruct alpha and beta_j from a verified root x >= 0.
pub fn reconstruct_state(
    params: &SystemParams,
    eps: &DriveAmplitude,
    x: f64,
) -> Result<SteadyState> {
    let betas: Vec<C64> = params
        .modes
        .iter()
        .map(|m| {
            let om = m.frequency - m.ck_coupling * x;
            C64::new(0.0, m.coupling * x) / C64::new(m.damping, om)
        })
        .collect();
    let delta_eff = effective_detuning_at(params, x);
    let alpha = C64::new(eps.0, 0.0) / C64::new(params.cavity_decay, delta_eff);

    let resid = (alpha.norm_sqr() - x).abs() / x.abs().max(1.0);
    if resid > TOL_STATE {
        return Err(Error::Consistency {
            context: format!("steady-state reconstruction at x = {x:.6e}"),
            residual: resid,
        });
    }

    Ok(SteadyState {
        photon_number: x,
        alpha,
        betas,
        stable: false,
        marginal: false,
        slope_stable: false,
        branch_index: 0,
    })
}

/// Residuals of the three steady-state equations, each relative to its own
/// right-hand-side scale. Used by verification tests.
pub fn state_residuals(params: &SystemParams, eps: &DriveAmplitude, state: &SteadyState) -> Vec<f64> {
    let x = state.photon_number;
    let delta_eff = params.detuning
        - state
            .betas
            .iter()
            .zip(&params.modes)
            .map(|(b, m)| 2.0 * m.coupling * b.re + m.ck_coupling * b.norm_sqr())
            .sum::<f64>();
    let cav = (C64::new(params.cavity_decay, delta_eff) * state.alpha - eps.0).norm();
    let mut out = vec![if eps.0 > 0.0 { cav / eps.0 } else { cav }];
    for (b, m) in state.betas.iter().zip(&params.modes) {
        let om = m.frequency - m.ck_coupling * x;
        let rhs = C64::new(0.0, m.coupling * x);
        let r = (C64::new(m.damping, om) * b - rhs).norm();
        out.push(if rhs.norm() > 0.0 { r / rhs.norm() } else { r });
    }
    out
}

/// Assign branch indices: stable states sorted ascending by photon number
/// get 1, 2, ...; unstable states get 0. Returns the number of stable
/// states (0 means no stable steady state, signaled without an error).
pub fn classify_branches(states: &mut [SteadyState]) -> usize {
    let mut stable_idx: Vec<usize> = (0..states.len()).filter(|&i| states[i].stable).collect();
    stable_idx.sort_by(|&a, &b| {
        states[a].photon_number.partial_cmp(&states[b].photon_number).unwrap()
    });
    for s in states.iter_mut() {
        s.branch_index = 0;
    }
    for (rank, &i) in stable_idx.iter().enumerate() {
        states[i].branch_index = rank + 1;
    }
    stable_idx.len()
}

/// Residual bound used by root-acceptance checks and tests.
pub fn root_residual_ok(poly: &SteadyPolynomial, x: f64) -> bool {
    poly.relative_residual(x) <= TOL_POLY
}
