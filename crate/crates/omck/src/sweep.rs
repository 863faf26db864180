//! Parameter sweeps, critical/optimal-point finders, and CSV emission.
//!
//! Grid points are evaluated independently (optionally in parallel) and
//! always emitted in grid order. A point whose chain fails is recorded
//! with a status flag, never aborting the sweep.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::consts::{TOL_BISECT, TOL_GOLDEN};
use crate::covariance::{
    classify_stability, dark_mode_occupation, lyapunov_residual, phonon_numbers, solve_lyapunov,
    Stability,
};
use crate::error::{Error, Result};
use crate::linearized::{build_drift, build_noise, effective_params};
use crate::params::{drive_amplitude, SystemParams};
use crate::steady::{build_polynomial, classify_branches, reconstruct_state, solve_roots};

/// Which parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    /// Input power, watts.
    Power,
    /// Cavity detuning, rad/s.
    Detuning,
    /// CK coupling of mode j (0-based), rad/s.
    CkStrength(usize),
}

impl SweepParameter {
    /// Parse `power`, `detuning`, or `ck_strength_<j>` (1-based j).
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "power" => Ok(SweepParameter::Power),
            "detuning" => Ok(SweepParameter::Detuning),
            _ => {
                if let Some(j) = s.strip_prefix("ck_strength_") {
                    let j: usize = j.parse().map_err(|_| {
                        Error::Validation(format!("bad sweep parameter {s:?}"))
                    })?;
                    if j == 0 {
                        return Err(Error::Validation("ck_strength mode index is 1-based".into()));
                    }
                    Ok(SweepParameter::CkStrength(j - 1))
                } else {
                    Err(Error::Validation(format!(
                        "unknown sweep parameter {s:?} (expected power, detuning, or ck_strength_<j>)"
                    )))
                }
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            SweepParameter::Power => "power_watts".into(),
            SweepParameter::Detuning => "detuning_rad_s".into(),
            SweepParameter::CkStrength(j) => format!("ck_strength_{}_rad_s", j + 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

/// `[sweep]` section of a config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawSweep {
    pub parameter: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

/// A validated sweep over one parameter.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
    pub base: SystemParams,
    /// k-th smallest stable root feeds the cooling chain; default 1.
    pub branch: usize,
}

impl SweepSpec {
    pub fn from_raw(raw: &RawSweep, base: SystemParams, branch: usize) -> Result<Self> {
        let parameter = SweepParameter::parse(&raw.parameter)?;
        if raw.count < 2 {
            return Err(Error::Validation("sweep.count must be >= 2".into()));
        }
        if !(raw.min < raw.max) {
            return Err(Error::Validation("sweep requires min < max".into()));
        }
        if raw.spacing == Spacing::Log && raw.min <= 0.0 {
            return Err(Error::Validation("log spacing requires min > 0".into()));
        }
        if branch == 0 {
            return Err(Error::Validation("branch index is 1-based".into()));
        }
        if let SweepParameter::CkStrength(j) = parameter {
            if j >= base.n_modes() {
                return Err(Error::Validation(format!(
                    "ck_strength mode index {} exceeds N = {}",
                    j + 1,
                    base.n_modes()
                )));
            }
        }
        Ok(SweepSpec {
            parameter,
            min: raw.min,
            max: raw.max,
            count: raw.count,
            spacing: raw.spacing,
            base,
            branch,
        })
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                match self.spacing {
                    Spacing::Linear => self.min + (self.max - self.min) * t,
                    Spacing::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * t).exp(),
                }
            })
            .collect()
    }
}

/// Apply a swept value to a copy of the base parameters.
pub fn apply_parameter(base: &SystemParams, param: SweepParameter, value: f64) -> SystemParams {
    let mut p = base.clone();
    match param {
        SweepParameter::Power => p.input_power = value,
        SweepParameter::Detuning => p.detuning = value,
        SweepParameter::CkStrength(j) => p.modes[j].ck_coupling = value,
    }
    p
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointStatus {
    Ok,
    NoStableState,
    Marginal,
}

impl PointStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            PointStatus::Ok => "ok",
            PointStatus::NoStableState => "no-stable-state",
            PointStatus::Marginal => "marginal",
        }
    }
}

/// One root of a sweep point, with both stability verdicts.
#[derive(Debug, Clone, Copy)]
pub struct RootRecord {
    pub x: f64,
    pub slope_stable: bool,
    pub dynamically_stable: bool,
}

/// Everything derived at one grid point.
#[derive(Debug, Clone)]
pub struct SweepRecord {
    pub swept_value: f64,
    pub status: PointStatus,
    pub roots: Vec<RootRecord>,
    /// Photon number of the selected branch.
    pub branch_x: Option<f64>,
    pub effective_detuning: Option<f64>,
    pub effective_frequencies: Vec<f64>,
    pub phonons: Vec<f64>,
    pub lyapunov_residual: Option<f64>,
    /// Bright/dark occupations, two-mode sweeps only.
    pub bright_dark: Option<(f64, f64)>,
}

/// Evaluate the full chain at one parameter point.
///
/// With `with_cooling` false the chain stops after stability
/// classification (photon-number sweeps do not need the Lyapunov solve).
pub fn evaluate_point(
    params: &SystemParams,
    branch: usize,
    with_cooling: bool,
    swept_value: f64,
) -> SweepRecord {
    let mut rec = SweepRecord {
        swept_value,
        status: PointStatus::NoStableState,
        roots: Vec::new(),
        branch_x: None,
        effective_detuning: None,
        effective_frequencies: Vec::new(),
        phonons: Vec::new(),
        lyapunov_residual: None,
        bright_dark: None,
    };

    let eps = drive_amplitude(params);
    let poly = build_polynomial(params, &eps);
    let roots = match solve_roots(&poly) {
        Ok(r) => r,
        Err(_) => return rec,
    };

    let mut states = Vec::with_capacity(roots.len());
    let mut any_marginal = false;
    for &x in &roots {
        let mut state = match reconstruct_state(params, &eps, x) {
            Ok(s) => s,
            Err(_) => continue,
        };
        state.slope_stable = poly.slope_stable(x);
        let a = build_drift(params, &state);
        let (stab, _) = classify_stability(&a, params.cavity_decay);
        state.stable = stab == Stability::Stable;
        state.marginal = stab == Stability::Marginal;
        any_marginal |= state.marginal;
        states.push(state);
    }
    let n_stable = classify_branches(&mut states);
    rec.roots = states
        .iter()
        .map(|s| RootRecord {
            x: s.photon_number,
            slope_stable: s.slope_stable,
            dynamically_stable: s.stable,
        })
        .collect();

    let Some(selected) = states.iter().find(|s| s.branch_index == branch) else {
        rec.status =
            if n_stable == 0 && any_marginal { PointStatus::Marginal } else { PointStatus::NoStableState };
        return rec;
    };

    let eff = effective_params(params, selected);
    rec.branch_x = Some(selected.photon_number);
    rec.effective_detuning = Some(eff.detuning);
    rec.effective_frequencies = eff.frequencies;

    if with_cooling {
        let a = build_drift(params, selected);
        let q = build_noise(params);
        match solve_lyapunov(&a, &q, params.cavity_decay) {
            Ok(v) => {
                rec.lyapunov_residual = Some(lyapunov_residual(&a, &q, &v));
                match phonon_numbers(&v, params.n_modes()) {
                    Ok(nf) => {
                        rec.phonons = nf;
                        rec.status = PointStatus::Ok;
                    }
                    Err(_) => {
                        rec.status = PointStatus::NoStableState;
                        return rec;
                    }
                }
                if params.n_modes() == 2 {
                    rec.bright_dark = dark_mode_occupation(&v, params).ok();
                }
            }
            Err(_) => {
                rec.status = PointStatus::NoStableState;
                return rec;
            }
        }
    } else {
        rec.status = PointStatus::Ok;
    }
    rec
}

/// Run a sweep; records come back in grid order regardless of scheduling.
pub fn run_sweep(spec: &SweepSpec, with_cooling: bool) -> Vec<SweepRecord> {
    spec.grid()
        .par_iter()
        .map(|&value| {
            let p = apply_parameter(&spec.base, spec.parameter, value);
            evaluate_point(&p, spec.branch, with_cooling, value)
        })
        .collect()
}

/// Phonon number of one mode on the selected branch at one parameter value;
/// None when the chain fails there.
pub fn phonon_at(
    base: &SystemParams,
    param: SweepParameter,
    value: f64,
    mode_index: usize,
    branch: usize,
) -> Option<f64> {
    let p = apply_parameter(base, param, value);
    let rec = evaluate_point(&p, branch, true, value);
    if rec.status == PointStatus::Ok {
        rec.phonons.get(mode_index).copied()
    } else {
        None
    }
}

/// Result of a threshold (n_f = 1) search.
#[derive(Debug, Clone, Copy)]
pub struct Crossing {
    pub value: f64,
    pub phonons: f64,
}

/// Bisect for the smallest crossing of n_f = 1 from above inside the
/// bracket. Requires n_f(lo) > 1 > n_f(hi) on the selected branch.
pub fn find_crossing(
    base: &SystemParams,
    param: SweepParameter,
    mode_index: usize,
    bracket: (f64, f64),
    branch: usize,
) -> Result<Crossing> {
    let (mut lo, mut hi) = bracket;
    let target = format!("n_f = 1 for mode {}", mode_index + 1);
    let f = |v: f64| phonon_at(base, param, v, mode_index, branch);
    let f_lo = f(lo).ok_or_else(|| Error::Bracket { target: target.clone(), lo, hi })?;
    let f_hi = f(hi).ok_or_else(|| Error::Bracket { target: target.clone(), lo, hi })?;
    if !(f_lo > 1.0 && f_hi < 1.0) {
        return Err(Error::Bracket { target, lo, hi });
    }
    while (hi - lo).abs() > TOL_BISECT * hi.abs().max(lo.abs()) {
        let mid = 0.5 * (lo + hi);
        match f(mid) {
            Some(n) if n > 1.0 => lo = mid,
            Some(_) => hi = mid,
            // a failed point inside the bracket: treat as above threshold so
            // the search keeps moving toward the cooled side
            None => lo = mid,
        }
    }
    let value = 0.5 * (lo + hi);
    let phonons = f(value).unwrap_or(1.0);
    Ok(Crossing { value, phonons })
}

/// Smallest power with n_f <= 1 for the given mode (0-based).
pub fn find_critical_power(
    base: &SystemParams,
    mode_index: usize,
    bracket: (f64, f64),
    branch: usize,
) -> Result<Crossing> {
    find_crossing(base, SweepParameter::Power, mode_index, bracket, branch)
}

/// CK strength of mode `ck_index` where n_f of `mode_index` crosses 1.
pub fn find_critical_ck(
    base: &SystemParams,
    ck_index: usize,
    mode_index: usize,
    bracket: (f64, f64),
    branch: usize,
) -> Result<Crossing> {
    find_crossing(base, SweepParameter::CkStrength(ck_index), mode_index, bracket, branch)
}

/// Result of a minimum search.
#[derive(Debug, Clone, Copy)]
pub struct Optimum {
    pub value: f64,
    pub phonons: f64,
    /// True when the coarse minimum sat on a range boundary; the value is
    /// still returned.
    pub at_boundary: bool,
}

/// Coarse-grid minimum of n_f over the range, refined by golden-section
/// search to 1e-3 relative in the swept variable.
pub fn find_minimum(
    base: &SystemParams,
    param: SweepParameter,
    mode_index: usize,
    range: (f64, f64),
    branch: usize,
) -> Result<Optimum> {
    const COARSE: usize = 64;
    let (lo, hi) = range;
    if !(lo < hi) {
        return Err(Error::Validation("minimum search requires lo < hi".into()));
    }
    let f = |v: f64| phonon_at(base, param, v, mode_index, branch).unwrap_or(f64::INFINITY);

    let grid: Vec<f64> = (0..=COARSE)
        .map(|i| lo + (hi - lo) * i as f64 / COARSE as f64)
        .collect();
    let values: Vec<f64> = grid.iter().map(|&v| f(v)).collect();
    let (best, _) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    if !values[best].is_finite() {
        return Err(Error::Bracket {
            target: format!("finite n_f for mode {}", mode_index + 1),
            lo,
            hi,
        });
    }
    let at_boundary = best == 0 || best == COARSE;
    let (mut a, mut b) = if at_boundary {
        (grid[best.saturating_sub(1)], grid[(best + 1).min(COARSE)])
    } else {
        (grid[best - 1], grid[best + 1])
    };

    // golden-section refinement
    let inv_phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > TOL_GOLDEN * b.abs().max(a.abs()).max(f64::MIN_POSITIVE) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let value = 0.5 * (a + b);
    Ok(Optimum { value, phonons: f(value), at_boundary })
}

pub fn find_optimal_power(
    base: &SystemParams,
    mode_index: usize,
    range: (f64, f64),
    branch: usize,
) -> Result<Optimum> {
    find_minimum(base, SweepParameter::Power, mode_index, range, branch)
}

fn fmt(v: f64) -> String {
    // 17 significant digits; deterministic for identical inputs
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

/// Write records as CSV. Column count is fixed by the mode count and the
/// maximum possible root count; byte output is deterministic.
pub fn emit_csv<W: Write>(
    records: &[SweepRecord],
    n_modes: usize,
    max_roots: usize,
    swept_label: &str,
    out: &mut W,
) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Validation("no records to emit".into()));
    }
    let mut header = vec![swept_label.to_string(), "status".into(), "n_roots".into(), "n_stable".into()];
    header.push("branch_photon_number".into());
    header.push("effective_detuning_rad_s".into());
    for j in 1..=n_modes {
        header.push(format!("effective_frequency_{j}_rad_s"));
    }
    for j in 1..=n_modes {
        header.push(format!("phonon_number_{j}"));
    }
    header.push("lyapunov_residual".into());
    header.push("n_bright".into());
    header.push("n_dark".into());
    for k in 1..=max_roots {
        header.push(format!("root_{k}_photon_number"));
        header.push(format!("root_{k}_slope_stable"));
        header.push(format!("root_{k}_dynamically_stable"));
    }
    writeln!(out, "{}", header.join(","))?;

    for r in records {
        let mut row = vec![
            fmt(r.swept_value),
            r.status.as_str().to_string(),
            r.roots.len().to_string(),
            r.roots.iter().filter(|x| x.dynamically_stable).count().to_string(),
        ];
        row.push(fmt_opt(r.branch_x));
        row.push(fmt_opt(r.effective_detuning));
        for j in 0..n_modes {
            row.push(fmt_opt(r.effective_frequencies.get(j).copied()));
        }
        for j in 0..n_modes {
            row.push(fmt_opt(r.phonons.get(j).copied()));
        }
        row.push(fmt_opt(r.lyapunov_residual));
        row.push(fmt_opt(r.bright_dark.map(|bd| bd.0)));
        row.push(fmt_opt(r.bright_dark.map(|bd| bd.1)));
        for k in 0..max_roots {
            match r.roots.get(k) {
                Some(root) => {
                    row.push(fmt(root.x));
                    row.push((root.slope_stable as u8).to_string());
                    row.push((root.dynamically_stable as u8).to_string());
                }
                None => {
                    row.push(String::new());
                    row.push(String::new());
                    row.push(String::new());
                }
            }
        }
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Maximum possible trimmed polynomial degree for these parameters, which
/// bounds the root count of every point of a sweep.
pub fn max_root_count(base: &SystemParams, param: SweepParameter) -> usize {
    let mut ck_modes = base
        .modes
        .iter()
        .enumerate()
        .filter(|(_, m)| m.ck_coupling != 0.0)
        .map(|(j, _)| j)
        .collect::<Vec<_>>();
    if let SweepParameter::CkStrength(j) = param {
        if !ck_modes.contains(&j) {
            ck_modes.push(j);
        }
    }
    let c = ck_modes.len();
    if c == 0 {
        3
    } else {
        4 * c + 3
    }
}
