//! Physical constants (CODATA 2018) and the numerical tolerances used by
//! the solvers. Tolerances are centralized so that no solver carries ad-hoc
//! magic numbers.

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;

/// Relative residual bound for a reported polynomial root:
/// |p(x)| <= TOL_POLY * max_k |c_k x^k|.
pub const TOL_POLY: f64 = 1e-9;

/// Absolute threshold (scaled units) below which a slightly negative root
/// is clamped to zero.
pub const TOL_ROOT_ABS: f64 = 1e-9;

/// Relative residual accepted when substituting a root back into the
/// steady-state equations.
pub const TOL_STATE: f64 = 1e-6;

/// Stability margin as a fraction of the cavity decay: a drift matrix is
/// stable iff max Re(lambda) < -TOL_STAB_FRAC * kappa, unstable iff
/// max Re(lambda) > +TOL_STAB_FRAC * kappa, marginal in between.
pub const TOL_STAB_FRAC: f64 = 1e-6;

/// Relative Frobenius residual bound on every accepted Lyapunov solve:
/// ||A V + V A^T + Q||_F <= TOL_LYAP * ||Q||_F.
pub const TOL_LYAP: f64 = 1e-8;

/// Absolute bound on the imaginary residue of an extracted phonon-number
/// entry of V.
pub const TOL_PHONON_IMAG: f64 = 1e-9;

/// Relative tolerance on the swept variable for bisection threshold finders.
pub const TOL_BISECT: f64 = 1e-4;

/// Relative tolerance on the swept variable for golden-section minimization.
pub const TOL_GOLDEN: f64 = 1e-3;
