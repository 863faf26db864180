//! Linearized fluctuation dynamics around a steady state: effective
//! parameters, the complex drift matrix A, and the symmetrized noise
//! matrix Q, for arbitrary N.
//!
//! Operator ordering is u = [da, db_1..db_N, da+, db_1+..db_N+], so all
//! matrices have dimension 2(N+1). The lower blocks of A are the
//! elementwise conjugates of the upper blocks and are constructed as such,
//! never recomputed.

use nalgebra::{Complex, DMatrix};

use crate::params::SystemParams;
use crate::steady::SteadyState;

type C64 = Complex<f64>;

/// Effective detuning and effective mechanical frequencies at a steady state.
#[derive(Debug, Clone)]
pub struct EffectiveParams {
    /// Delta' = Delta - sum_j 2 g_j Re(beta_j) - sum_CK g_ck,j |beta_j|^2.
    pub detuning: f64,
    /// Omega_j = omega_j - g_ck,j |alpha|^2.
    pub frequencies: Vec<f64>,
}

pub fn effective_params(params: &SystemParams, state: &SteadyState) -> EffectiveParams {
    let x = state.photon_number;
    let detuning = params.detuning
        - state
            .betas
            .iter()
            .zip(&params.modes)
            .map(|(b, m)| 2.0 * m.coupling * b.re + m.ck_coupling * b.norm_sqr())
            .sum::<f64>();
    let frequencies =
        params.modes.iter().map(|m| m.frequency - m.ck_coupling * x).collect();
    EffectiveParams { detuning, frequencies }
}

/// Drift matrix A of the fluctuation equations du/dt = A u + N(t).
pub fn build_drift(params: &SystemParams, state: &SteadyState) -> DMatrix<C64> {
    let n = params.n_modes();
    assert_eq!(state.betas.len(), n, "state/mode dimension mismatch");
    let dim = n + 1;
    let eff = effective_params(params, state);
    let alpha = state.alpha;
    let i = C64::i();

    // upper-left block M (annihilation sector) and upper-right block P
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    let mut p = DMatrix::<C64>::zeros(dim, dim);
    m[(0, 0)] = C64::new(-params.cavity_decay, -eff.detuning);
    for (j, mode) in params.modes.iter().enumerate() {
        let beta = state.betas[j];
        let g = mode.coupling;
        let gck = mode.ck_coupling;
        m[(0, j + 1)] = i * (g * alpha + gck * alpha * beta.conj());
        m[(j + 1, 0)] = i * (g * alpha.conj() + gck * alpha.conj() * beta);
        m[(j + 1, j + 1)] = C64::new(-mode.damping, -eff.frequencies[j]);
        let cross = i * (g * alpha + gck * alpha * beta);
        p[(0, j + 1)] = cross;
        p[(j + 1, 0)] = cross;
    }

    let mut a = DMatrix::<C64>::zeros(2 * dim, 2 * dim);
    for r in 0..dim {
        for c in 0..dim {
            a[(r, c)] = m[(r, c)];
            a[(r, c + dim)] = p[(r, c)];
            a[(r + dim, c)] = p[(r, c)].conj();
            a[(r + dim, c + dim)] = m[(r, c)].conj();
        }
    }
    a
}

/// Symmetrized noise matrix Q = (C + C^T)/2 with vacuum optical input and
/// thermal mechanical inputs: Q[a, a+] = kappa,
/// Q[b_j, b_j+] = gamma_j (2 n_th,j + 1).
pub fn build_noise(params: &SystemParams) -> DMatrix<f64> {
    let n = params.n_modes();
    let dim = 2 * (n + 1);
    let mut q = DMatrix::<f64>::zeros(dim, dim);
    q[(0, n + 1)] = params.cavity_decay;
    q[(n + 1, 0)] = params.cavity_decay;
    for (j, m) in params.modes.iter().enumerate() {
        let v = m.damping * (2.0 * m.bath_occupation + 1.0);
        q[(j + 1, j + n + 2)] = v;
        q[(j + n + 2, j + 1)] = v;
    }
    q
}
