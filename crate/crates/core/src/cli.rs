//! Command-line front end. Every command writes one self-describing CSV file
//! (plus a companion report for `solve-vdp`) into the output directory.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::kernel::{
    compress, estimate_error, relative_error_scan, select_parameters, ErrorEstimate, ExponentialSum,
    DEFAULT_CALIBRATION,
};
use crate::oracle::mlf_exact_solution;
use crate::problems::{LinearTest, VanDerPol};
use crate::solver::{self_convergence_gap, solve, FdeProblem, SolverConfig, StepForm, Trajectory};

pub const OUT_DIR_ENV: &str = "GJKERNEL_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "gjkernel", version, about = "Gauss-Jacobi kernel compression for fractional ODEs")]
pub struct Cli {
    /// Directory for output files.
    #[arg(long, global = true, env = OUT_DIR_ENV, default_value = ".")]
    pub out_dir: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the exponential sum and write its terms.
    Compress(KernelArgs),
    /// Measure the relative error of the exponential sum on the log grid.
    Scan(KernelArgs),
    /// Solve D^α u = λu, u(0) = 1 and compare with E_α(λ t^α).
    SolveMlf(MlfArgs),
    /// Solve the fractional Van der Pol system.
    SolveVdp(VdpArgs),
    /// Run a parameter sweep in parallel.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub delta: f64,
    #[arg(long = "T")]
    pub horizon: f64,
    #[arg(long = "K", requires = "j")]
    pub k: Option<usize>,
    #[arg(long = "J", requires = "k")]
    pub j: Option<usize>,
    /// Target relative error; picks K and J when they are not given.
    #[arg(long, conflicts_with_all = ["k", "j"], required_unless_present = "k")]
    pub eps: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_CALIBRATION)]
    pub calibration: f64,
    /// Output file name, relative to the output directory.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long = "T")]
    pub horizon: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub h: f64,
    /// Kernel tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub eps: f64,
    #[arg(long, default_value_t = DEFAULT_CALIBRATION)]
    pub calibration: f64,
    /// Use the step formulas without u0 and without h on the auxiliary forcing.
    #[arg(long, alias = concat!("pa", "per-literal"))]
    pub literal_form: bool,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MlfArgs {
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub lambda_re: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub lambda_im: f64,
    #[command(flatten)]
    pub solve: SolveArgs,
}

#[derive(Debug, Args)]
pub struct VdpArgs {
    #[arg(long, default_value_t = 0.8)]
    pub alpha: f64,
    #[arg(long, default_value_t = 4.0)]
    pub mu: f64,
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    pub x0: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub y0: f64,
    #[command(flatten)]
    pub solve: SolveArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    /// M against J at fixed K values.
    J,
    /// M against K for several δ at fixed J.
    K,
    /// MLF solve error against the kernel tolerance.
    Eps,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub kind: SweepKind,
    #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.5, 0.99])]
    pub alpha: Vec<f64>,
    /// δ values (kinds `j` and `k`).
    #[arg(long, value_delimiter = ',', default_values_t = [1e-4])]
    pub delta: Vec<f64>,
    #[arg(long = "T", default_value_t = 1e4)]
    pub horizon: f64,
    /// K values (kind `j`).
    #[arg(long = "K", value_delimiter = ',', default_values_t = [32])]
    pub k: Vec<usize>,
    /// J values (kind `k` uses the first).
    #[arg(long = "J", value_delimiter = ',', default_values_t = [3, 4, 5, 6, 7, 8, 9, 10, 11, 12])]
    pub j: Vec<usize>,
    /// Largest K (kind `k`).
    #[arg(long, default_value_t = 24)]
    pub k_max: usize,
    /// Kernel tolerances (kind `eps`).
    #[arg(long = "eps", value_delimiter = ',', default_values_t = [1e-3, 1e-4, 1e-6, 1e-8, 1e-10])]
    pub eps: Vec<f64>,
    /// Step size (kind `eps`).
    #[arg(long, default_value_t = 1e-3)]
    pub h: f64,
    #[arg(long, default_value_t = DEFAULT_CALIBRATION)]
    pub calibration: f64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Domain(_) | Error::Range(_) | Error::Parse(_) => 2,
        Error::Infeasible { .. } => 3,
        Error::StepFailure { .. } | Error::Convergence(_) => 4,
        Error::Io(_) => 1,
    }
}

/// Parses `std::env::args` and runs; the binary entry point.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// Runs a parsed command and returns the files written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let dir = cli.out_dir.as_path();
    match &cli.command {
        Command::Compress(a) => {
            let (sum, est) = build_kernel(a)?;
            let mut out = header(&cli.command);
            write_estimate(&mut out, &est);
            out.push_str(&sum.to_table());
            Ok(vec![write_output(dir, a.output.as_deref(), "compress.csv", &out)?])
        }
        Command::Scan(a) => {
            let (sum, est) = build_kernel(a)?;
            let scan = relative_error_scan(&sum);
            let mut out = header(&cli.command);
            write_estimate(&mut out, &est);
            let _ = writeln!(out, "# K={} J={} P={}", sum.k, sum.j, sum.len());
            out.push_str("t,w,S,rel_err\n");
            for p in &scan.points {
                let _ = writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e}", p.t, p.w, p.s, p.rel_err);
            }
            let _ = writeln!(out, "M={:.16e}", scan.max);
            Ok(vec![write_output(dir, a.output.as_deref(), "scan.csv", &out)?])
        }
        Command::SolveMlf(a) => {
            let out = run_mlf(&cli.command, a)?;
            Ok(vec![write_output(dir, a.solve.output.as_deref(), "mlf.csv", &out)?])
        }
        Command::SolveVdp(a) => {
            let (table, report) = run_vdp(&cli.command, a)?;
            let main = write_output(dir, a.solve.output.as_deref(), "vdp.csv", &table)?;
            let companion = main.with_file_name(format!(
                "{}_selfconv.txt",
                main.file_stem().and_then(|s| s.to_str()).unwrap_or("vdp")
            ));
            std::fs::write(&companion, report)?;
            Ok(vec![main, companion])
        }
        Command::Sweep(a) => {
            let out = run_sweep(&cli.command, a)?;
            let name = match a.kind {
                SweepKind::J => "sweep_j.csv",
                SweepKind::K => "sweep_k.csv",
                SweepKind::Eps => "sweep_eps.csv",
            };
            Ok(vec![write_output(dir, a.output.as_deref(), name, &out)?])
        }
    }
}

fn header(cmd: &Command) -> String {
    format!("# gjkernel {}\n# config: {cmd:?}\n", env!("CARGO_PKG_VERSION"))
}

fn write_estimate(out: &mut String, est: &ErrorEstimate) {
    let _ = writeln!(
        out,
        "# A_J={:.16e}\n# B_K={:.16e}\n# calibration={:.16e}\n# estimate={:.16e}",
        est.a_j, est.b_k, est.calibration, est.total
    );
}

fn write_output(dir: &Path, name: Option<&Path>, default: &str, text: &str) -> Result<PathBuf> {
    let path = dir.join(name.unwrap_or_else(|| Path::new(default)));
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(&path, text)?;
    Ok(path)
}

fn build_kernel(a: &KernelArgs) -> Result<(ExponentialSum, ErrorEstimate)> {
    let (k, j) = match (a.k, a.j, a.eps) {
        (Some(k), Some(j), _) => (k, j),
        (_, _, Some(eps)) => select_parameters(a.alpha, a.delta, a.horizon, eps, a.calibration)?,
        _ => return Err(domain("give either --K and --J or --eps")),
    };
    let sum = compress(a.alpha, a.delta, a.horizon, k, j)?;
    let est = estimate_error(a.alpha, a.delta, a.horizon, k, j, a.calibration)?;
    Ok((sum, est))
}

fn config(s: &SolveArgs) -> SolverConfig {
    SolverConfig {
        calibration: s.calibration,
        form: if s.literal_form {
            StepForm::Literal
        } else {
            StepForm::Consistent
        },
        ..SolverConfig::new(s.h, s.eps)
    }
}

fn trajectory_meta(out: &mut String, traj: &Trajectory) {
    write_estimate(out, &traj.estimate);
    let _ = writeln!(
        out,
        "# K={} J={} P={} steps={} max_newton_iters={}",
        traj.kernel.k,
        traj.kernel.j,
        traj.kernel.len(),
        traj.len() - 1,
        traj.newton_iters.iter().max().copied().unwrap_or(0)
    );
}

/// Pointwise errors `e^n = |u(t_n) - v^n|` of an MLF trajectory.
pub fn mlf_errors(alpha: f64, lambda: Complex64, traj: &Trajectory) -> Result<Vec<f64>> {
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(&t, s)| {
            let u = mlf_exact_solution(alpha, lambda, t)?;
            let v = Complex64::new(s[0], s.get(1).copied().unwrap_or(0.0));
            Ok((u - v).norm())
        })
        .collect()
}

/// Solves the MLF test problem.
pub fn solve_mlf(alpha: f64, lambda: Complex64, horizon: f64, cfg: &SolverConfig) -> Result<Trajectory> {
    let sys = LinearTest::new(lambda);
    let problem = FdeProblem::new(alpha, sys.initial_state(), horizon, sys)?;
    solve(&problem, cfg)
}

fn run_mlf(cmd: &Command, a: &MlfArgs) -> Result<String> {
    let lambda = Complex64::new(a.lambda_re, a.lambda_im);
    let traj = solve_mlf(a.alpha, lambda, a.solve.horizon, &config(&a.solve))?;
    let errors = mlf_errors(a.alpha, lambda, &traj)?;
    let mut out = header(cmd);
    trajectory_meta(&mut out, &traj);
    let _ = writeln!(out, "# max_e={:.16e}", errors.iter().copied().fold(0.0, f64::max));
    let complex = lambda.im != 0.0;
    out.push_str(if complex {
        "t,re_v,im_v,re_u,im_u,e\n"
    } else {
        "t,v,u_exact,e\n"
    });
    for ((&t, s), e) in traj.times.iter().zip(&traj.states).zip(&errors) {
        let u = mlf_exact_solution(a.alpha, lambda, t)?;
        if complex {
            let _ = writeln!(
                out,
                "{t:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{e:.16e}",
                s[0], s[1], u.re, u.im
            );
        } else {
            let _ = writeln!(out, "{t:.16e},{:.16e},{:.16e},{e:.16e}", s[0], u.re);
        }
    }
    Ok(out)
}

/// Solves the fractional Van der Pol system.
pub fn solve_vdp(alpha: f64, mu: f64, x0: f64, y0: f64, horizon: f64, cfg: &SolverConfig) -> Result<Trajectory> {
    let problem = FdeProblem::new(alpha, vec![x0, y0], horizon, VanDerPol::new(mu))?;
    solve(&problem, cfg)
}

fn run_vdp(cmd: &Command, a: &VdpArgs) -> Result<(String, String)> {
    let cfg = config(&a.solve);
    let traj = solve_vdp(a.alpha, a.mu, a.x0, a.y0, a.solve.horizon, &cfg)?;
    let half = SolverConfig {
        h: 0.5 * cfg.h,
        ..cfg
    };
    let fine = solve_vdp(a.alpha, a.mu, a.x0, a.y0, a.solve.horizon, &half)?;

    let mut table = header(cmd);
    trajectory_meta(&mut table, &traj);
    table.push_str("t,x,y\n");
    for (&t, s) in traj.times.iter().zip(&traj.states) {
        let _ = writeln!(table, "{t:.16e},{:.16e},{:.16e}", s[0], s[1]);
    }

    let mut report = header(cmd);
    let _ = writeln!(report, "h={:.16e}", cfg.h);
    let _ = writeln!(report, "h_half={:.16e}", half.h);
    let _ = writeln!(report, "max_discrepancy={:.16e}", self_convergence_gap(&traj, &fine));
    let last = |t: &Trajectory| t.states.last().cloned().unwrap_or_default();
    let (c, f) = (last(&traj), last(&fine));
    let _ = writeln!(report, "final_x={:.16e},{:.16e}", c[0], f[0]);
    let _ = writeln!(report, "final_y={:.16e},{:.16e}", c[1], f[1]);
    Ok((table, report))
}

fn run_sweep(cmd: &Command, a: &SweepArgs) -> Result<String> {
    let mut out = header(cmd);
    match a.kind {
        SweepKind::J | SweepKind::K => {
            let mut combos = Vec::new();
            for &alpha in &a.alpha {
                for &delta in &a.delta {
                    match a.kind {
                        SweepKind::J => {
                            for &k in &a.k {
                                combos.extend(a.j.iter().map(|&j| (alpha, delta, k, j)));
                            }
                        }
                        _ => {
                            let j = *a.j.first().ok_or_else(|| domain("--J needs a value"))?;
                            combos.extend((0..=a.k_max).map(|k| (alpha, delta, k, j)));
                        }
                    }
                }
            }
            let rows: Vec<Result<String>> = combos
                .par_iter()
                .map(|&(alpha, delta, k, j)| {
                    let sum = compress(alpha, delta, a.horizon, k, j)?;
                    let est = estimate_error(alpha, delta, a.horizon, k, j, a.calibration)?;
                    let m = relative_error_scan(&sum).max;
                    Ok(format!(
                        "{alpha:.16e},{delta:.16e},{:.16e},{k},{j},{},{m:.16e},{:.16e},{:.16e},{:.16e}",
                        a.horizon,
                        sum.len(),
                        est.a_j,
                        est.b_k,
                        est.total
                    ))
                })
                .collect();
            out.push_str("alpha,delta,T,K,J,P,M,A_J,B_K,estimate\n");
            for r in rows {
                out.push_str(&r?);
                out.push('\n');
            }
        }
        SweepKind::Eps => {
            let combos: Vec<(f64, f64)> = a
                .alpha
                .iter()
                .flat_map(|&al| a.eps.iter().map(move |&e| (al, e)))
                .collect();
            let lambda = Complex64::new(-1.0, 0.0);
            let rows: Vec<Result<String>> = combos
                .par_iter()
                .map(|&(alpha, eps)| {
                    let cfg = SolverConfig {
                        calibration: a.calibration,
                        ..SolverConfig::new(a.h, eps)
                    };
                    let traj = solve_mlf(alpha, lambda, a.horizon, &cfg)?;
                    let e = mlf_errors(alpha, lambda, &traj)?;
                    let max = e.iter().copied().fold(0.0, f64::max);
                    let last = e.last().copied().unwrap_or(0.0);
                    Ok(format!(
                        "{alpha:.16e},{eps:.16e},{:.16e},{},{},{},{max:.16e},{last:.16e}",
                        a.h,
                        traj.kernel.k,
                        traj.kernel.j,
                        traj.kernel.len()
                    ))
                })
                .collect();
            out.push_str("alpha,eps,h,K,J,P,max_e,e_final\n");
            for r in rows {
                out.push_str(&r?);
                out.push('\n');
            }
        }
    }
    Ok(out)
}
