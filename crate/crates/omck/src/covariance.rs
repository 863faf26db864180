//! Stability certification, steady-state Lyapunov solve, phonon-number
//! extraction, and bright/dark-basis diagnostics.

use nalgebra::{Complex, DMatrix};

use crate::consts::{TOL_LYAP, TOL_PHONON_IMAG, TOL_STAB_FRAC};
use crate::error::{Error, Result};
use crate::params::SystemParams;

type C64 = Complex<f64>;

/// Stability classification of a drift matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
    /// max Re(eigenvalue) within the tolerance band around zero; the
    /// Lyapunov solution is not trusted either way.
    Marginal,
}

/// Largest real part over the eigenvalues of a complex matrix.
///
/// Computed from the real 2d x 2d embedding [[X, -Y], [Y, X]] of A = X + iY,
/// whose spectrum is eig(A) together with its conjugates; real parts are
/// unchanged.
pub fn max_re_eigenvalue(a: &DMatrix<C64>) -> f64 {
    let d = a.nrows();
    let mut e = DMatrix::<f64>::zeros(2 * d, 2 * d);
    for r in 0..d {
        for c in 0..d {
            let z = a[(r, c)];
            e[(r, c)] = z.re;
            e[(r, c + d)] = -z.im;
            e[(r + d, c)] = z.im;
            e[(r + d, c + d)] = z.re;
        }
    }
    e.complex_eigenvalues().iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max)
}

/// Routh-Hurwitz classification with margin tol_stab = 1e-6 kappa.
pub fn classify_stability(a: &DMatrix<C64>, cavity_decay: f64) -> (Stability, f64) {
    let max_re = max_re_eigenvalue(a);
    let tol = TOL_STAB_FRAC * cavity_decay;
    let s = if max_re < -tol {
        Stability::Stable
    } else if max_re > tol {
        Stability::Unstable
    } else {
        Stability::Marginal
    };
    (s, max_re)
}

/// True iff all eigenvalues of A have real part below -1e-6 kappa.
pub fn check_stability(a: &DMatrix<C64>, cavity_decay: f64) -> bool {
    classify_stability(a, cavity_decay).0 == Stability::Stable
}

/// Steady covariance matrix with its solve diagnostics.
#[derive(Debug, Clone)]
pub struct CovarianceResult {
    pub v: DMatrix<C64>,
    /// ||A V + V A^T + Q||_F / ||Q||_F.
    pub lyapunov_residual: f64,
    /// Final phonon number per mechanical mode.
    pub phonons: Vec<f64>,
}

/// Solve A V + V A^T = -Q by Kronecker vectorization,
/// (I (x) A + A (x) I) vec(V) = -vec(Q), refusing unstable drift matrices.
///
/// The equation is homogeneous in an overall rate scale, so A and Q are
/// scaled by 1/rate_scale first; V is unchanged by this.
pub fn solve_lyapunov(a: &DMatrix<C64>, q: &DMatrix<f64>, cavity_decay: f64) -> Result<DMatrix<C64>> {
    let d = a.nrows();
    assert_eq!(q.nrows(), d, "A/Q dimension mismatch");
    let (stab, max_re) = classify_stability(a, cavity_decay);
    if stab != Stability::Stable {
        return Err(Error::Unstable { max_re });
    }

    let scale = a.iter().map(|z| z.norm()).fold(0.0_f64, f64::max).max(1.0);
    let an = a.map(|z| z / scale);

    // K = I (x) A + A (x) I, column-major vec convention
    let mut k = DMatrix::<C64>::zeros(d * d, d * d);
    for col in 0..d {
        for row in 0..d {
            let ri = col * d + row;
            for m in 0..d {
                // (I (x) A): block diagonal copies of A
                k[(ri, col * d + m)] += an[(row, m)];
                // (A (x) I): A entries on identity sub-blocks
                k[(ri, m * d + row)] += an[(col, m)];
            }
        }
    }
    let rhs =
        DMatrix::<C64>::from_fn(d * d, 1, |i, _| C64::new(-q[(i % d, i / d)] / scale, 0.0));

    let norm_estimate = k.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let lu = k.lu();
    let sol = lu.solve(&rhs).ok_or(Error::SingularLyapunov { norm_estimate })?;

    let mut v = DMatrix::<C64>::from_fn(d, d, |r, c| sol[(c * d + r, 0)]);
    // symmetrize; the exact solution is symmetric
    v = (&v + v.transpose()) * C64::new(0.5, 0.0);
    // when A carries the conjugation symmetry J A* J = A (J swaps the
    // annihilation and creation sectors, as every drift matrix built here
    // does by construction), the exact V satisfies J V* J = V too; project
    // onto it to kill spurious imaginary parts in the occupation entries
    let h = d / 2;
    let swap = |i: usize| if i < h { i + h } else { i - h };
    let sym_err = (0..d)
        .flat_map(|r| (0..d).map(move |c| (r, c)))
        .map(|(r, c)| (a[(swap(r), swap(c))].conj() - a[(r, c)]).norm())
        .fold(0.0_f64, f64::max);
    let q_sym = (0..d)
        .flat_map(|r| (0..d).map(move |c| (r, c)))
        .all(|(r, c)| q[(swap(r), swap(c))] == q[(r, c)]);
    if sym_err <= 1e-13 * scale && q_sym {
        let vc = DMatrix::<C64>::from_fn(d, d, |r, c| v[(swap(r), swap(c))].conj());
        v = (&v + vc) * C64::new(0.5, 0.0);
    }

    let residual = lyapunov_residual(a, q, &v);
    if residual > TOL_LYAP {
        return Err(Error::Consistency {
            context: "Lyapunov solve".into(),
            residual,
        });
    }
    Ok(v)
}

/// ||A V + V A^T + Q||_F / ||Q||_F.
pub fn lyapunov_residual(a: &DMatrix<C64>, q: &DMatrix<f64>, v: &DMatrix<C64>) -> f64 {
    let qc = q.map(|x| C64::new(x, 0.0));
    let r = a * v + v * a.transpose() + qc;
    let rn = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let qn = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    if qn == 0.0 {
        rn
    } else {
        rn / qn
    }
}

/// Final phonon numbers n_jf = V[b_j+ row, b_j column] - 1/2.
pub fn phonon_numbers(v: &DMatrix<C64>, n_modes: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n_modes);
    for j in 0..n_modes {
        let entry = v[(n_modes + 2 + j, j + 1)];
        if entry.im.abs() > TOL_PHONON_IMAG {
            return Err(Error::Consistency {
                context: format!("phonon number of mode {}", j + 1),
                residual: entry.im.abs(),
            });
        }
        out.push(entry.re - 0.5);
    }
    Ok(out)
}

/// Occupations of the bright and dark mechanical combinations
/// B_+- = (g_1 b_1 +- g_2 b_2) / sqrt(g_1^2 + g_2^2), two-mode case only.
pub fn dark_mode_occupation(v: &DMatrix<C64>, params: &SystemParams) -> Result<(f64, f64)> {
    assert_eq!(params.n_modes(), 2, "bright/dark basis is defined for N = 2");
    let g1 = params.modes[0].coupling;
    let g2 = params.modes[1].coupling;
    let norm = g1 * g1 + g2 * g2;
    if norm == 0.0 {
        return Err(Error::Validation(
            "bright/dark basis undefined: g_1 = g_2 = 0".into(),
        ));
    }
    // indices: b_1 = 1, b_2 = 2, b_1+ = 4, b_2+ = 5
    let occ = |sign: f64| -> f64 {
        let e = g1 * g1 * v[(4, 1)]
            + g2 * g2 * v[(5, 2)]
            + sign * g1 * g2 * (v[(4, 2)] + v[(5, 1)]);
        e.re / norm - 0.5
    };
    Ok((occ(1.0), occ(-1.0)))
}
