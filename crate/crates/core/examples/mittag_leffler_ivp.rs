//! D^α u = λu, u(0) = 1, against the exact solution E_α(λ t^α).

use gjkernel::cli::{mlf_errors, solve_mlf};
use gjkernel::solver::SolverConfig;
use num_complex::Complex64;

fn main() -> gjkernel::Result<()> {
    let horizon = 10.0;
    let cfg = SolverConfig::new(1e-3, 1e-8);
    for (alpha, lambda) in [
        (0.2, Complex64::new(-1.0, 0.0)),
        (0.5, Complex64::new(-1.0, 0.0)),
        (0.8, Complex64::new(-1.0, 0.0)),
        (0.8, Complex64::new(0.0, 1.0)),
    ] {
        let traj = solve_mlf(alpha, lambda, horizon, &cfg)?;
        let e = mlf_errors(alpha, lambda, &traj)?;
        let max = e.iter().copied().fold(0.0, f64::max);
        println!(
            "alpha {alpha}, lambda {lambda}: P = {}, steps = {}, max e = {max:.3e}, e(T) = {:.3e}",
            traj.kernel.len(),
            traj.len() - 1,
            e.last().copied().unwrap_or(0.0)
        );
    }
    Ok(())
}
