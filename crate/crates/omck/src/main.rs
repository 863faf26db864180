use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use omck::covariance::{lyapunov_residual, solve_lyapunov};
use omck::linearized::{build_drift, build_noise};
use omck::oracle::{dense_scan_roots, integrate_covariance, OracleReport};
use omck::params::drive_amplitude;
use omck::steady::{build_polynomial, reconstruct_state, solve_roots};
use omck::sweep::{
    emit_csv, evaluate_point, find_crossing, find_minimum, max_root_count, run_sweep,
    SweepParameter, SweepSpec,
};
use omck::{Error, Result, SystemParams};

#[derive(Parser)]
#[command(
    name = "omck",
    about = "Steady states, multistability, and sideband-cooling phonon numbers \
             for an optomechanical cavity with cross-Kerr couplings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// TOML configuration file with cavity, drive, modes, and sweep sections.
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Branch index fed into the cooling chain (k-th smallest stable root).
    #[arg(long, default_value_t = 1)]
    branch: usize,
    /// Worker threads for grid evaluation; 0 lets the runtime decide.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Photon-number sweep: all steady-state roots and their stability.
    Steady(CommonArgs),
    /// Cooling sweep: the full chain through Lyapunov and phonon numbers.
    Cool(CommonArgs),
    /// Find where n_f crosses 1 from above for one mode.
    Critical {
        #[command(flatten)]
        common: CommonArgs,
        /// Mechanical mode whose phonon number is monitored (1-based).
        #[arg(long)]
        mode: usize,
        /// Swept variable: power, detuning, or ck_strength_<j>.
        #[arg(long, default_value = "power")]
        variable: String,
        /// Bracket with n_f > 1 at --lo and n_f < 1 at --hi.
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
    },
    /// Find the swept value minimizing n_f for one mode.
    Optimal {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        mode: usize,
        #[arg(long, default_value = "power")]
        variable: String,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
    },
    /// Brute-force verification of one parameter point (dense root scan and
    /// covariance time integration against the fast solvers).
    #[command(hide = true)]
    Oracle {
        #[command(flatten)]
        common: CommonArgs,
        /// Points for the dense sign-change scan.
        #[arg(long, default_value_t = 1_000_000)]
        scan_points: usize,
    },
}

fn writer(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn init_threads(threads: usize) {
    if threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
}

fn run_sweep_command(args: &CommonArgs, with_cooling: bool) -> Result<()> {
    init_threads(args.threads);
    let (params, raw_sweep) = SystemParams::load(&args.config)?;
    let raw_sweep = raw_sweep
        .ok_or_else(|| Error::Validation("config has no [sweep] section".into()))?;
    let spec = SweepSpec::from_raw(&raw_sweep, params, args.branch)?;
    let records = run_sweep(&spec, with_cooling);
    let max_roots = max_root_count(&spec.base, spec.parameter);
    let mut w = writer(&args.out)?;
    emit_csv(&records, spec.base.n_modes(), max_roots, &spec.parameter.label(), &mut w)?;
    Ok(())
}

fn checked_mode(params: &SystemParams, mode: usize) -> Result<usize> {
    if mode == 0 || mode > params.n_modes() {
        return Err(Error::Validation(format!(
            "--mode must be between 1 and {}",
            params.n_modes()
        )));
    }
    Ok(mode - 1)
}

fn run_oracle(args: &CommonArgs, scan_points: usize) -> Result<()> {
    init_threads(args.threads);
    let (params, _) = SystemParams::load(&args.config)?;
    let eps = drive_amplitude(&params);
    let poly = build_polynomial(&params, &eps);
    let roots = solve_roots(&poly)?;

    let mut reports: Vec<OracleReport> = Vec::new();
    let x_max = if eps.0 > 0.0 { 1.05 * (eps.0 / params.cavity_decay).powi(2) } else { 1.0 };
    let scan = dense_scan_roots(&params, &eps, x_max, scan_points)?;
    reports.push(OracleReport::new(
        "root_count",
        roots.len() as f64,
        scan.len() as f64,
        0.0,
    ));
    for (i, (&a, &b)) in roots.iter().zip(scan.iter()).enumerate() {
        reports.push(OracleReport::new(&format!("root_{}", i + 1), a, b, 1e-6));
    }

    // covariance check on the selected branch when it is stable
    let rec = evaluate_point(&params, args.branch, true, params.input_power);
    if let Some(x) = rec.branch_x {
        let state = reconstruct_state(&params, &eps, x)?;
        let a = build_drift(&params, &state);
        let q = build_noise(&params);
        let v = solve_lyapunov(&a, &q, params.cavity_decay)?;
        reports.push(OracleReport::new(
            "lyapunov_residual",
            lyapunov_residual(&a, &q, &v),
            0.0,
            f64::INFINITY,
        ));
        let max_re = omck::covariance::max_re_eigenvalue(&a);
        let t_end = 20.0 / max_re.abs();
        let a_norm = a.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
        let dt = 0.5 / a_norm;
        let vt = integrate_covariance(&a, &q, t_end, dt)?;
        let n = params.n_modes();
        for j in 0..n {
            reports.push(OracleReport::new(
                &format!("phonon_{}", j + 1),
                v[(n + 2 + j, j + 1)].re - 0.5,
                vt[(n + 2 + j, j + 1)].re - 0.5,
                1e-5,
            ));
        }
    }

    let mut w = writer(&args.out)?;
    writeln!(w, "quantity,main_value,oracle_value,relative_deviation,pass")?;
    for r in &reports {
        writeln!(
            w,
            "{},{:.16e},{:.16e},{:.3e},{}",
            r.quantity, r.main_value, r.oracle_value, r.relative_deviation, r.pass
        )?;
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Steady(args) => run_sweep_command(&args, false),
        Command::Cool(args) => run_sweep_command(&args, true),
        Command::Critical { common, mode, variable, lo, hi } => {
            init_threads(common.threads);
            let (params, _) = SystemParams::load(&common.config)?;
            let mode = checked_mode(&params, mode)?;
            let param = SweepParameter::parse(&variable)?;
            let crossing = find_crossing(&params, param, mode, (lo, hi), common.branch)?;
            let mut w = writer(&common.out)?;
            writeln!(w, "{},phonon_number", param.label())?;
            writeln!(w, "{:.16e},{:.16e}", crossing.value, crossing.phonons)?;
            Ok(())
        }
        Command::Optimal { common, mode, variable, lo, hi } => {
            init_threads(common.threads);
            let (params, _) = SystemParams::load(&common.config)?;
            let mode = checked_mode(&params, mode)?;
            let param = SweepParameter::parse(&variable)?;
            let opt = find_minimum(&params, param, mode, (lo, hi), common.branch)?;
            let mut w = writer(&common.out)?;
            writeln!(w, "{},phonon_number,at_boundary", param.label())?;
            writeln!(w, "{:.16e},{:.16e},{}", opt.value, opt.phonons, opt.at_boundary)?;
            Ok(())
        }
        Command::Oracle { common, scan_points } => run_oracle(&common, scan_points),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
