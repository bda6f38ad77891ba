//! Fractional Van der Pol oscillator with a step-halving check.

use gjkernel::cli::solve_vdp;
use gjkernel::solver::{self_convergence_gap, SolverConfig};

fn main() -> gjkernel::Result<()> {
    let (alpha, mu, horizon) = (0.8, 4.0, 25.0);
    let coarse = solve_vdp(alpha, mu, 2.0, 0.0, horizon, &SolverConfig::new(1e-3, 1e-10))?;
    let fine = solve_vdp(alpha, mu, 2.0, 0.0, horizon, &SolverConfig::new(5e-4, 1e-10))?;

    for (t, s) in coarse.times.iter().zip(&coarse.states).step_by(2500) {
        println!("t = {t:>5.2}  x = {:>9.5}  y = {:>9.5}", s[0], s[1]);
    }
    println!("P = {} auxiliary variables", coarse.kernel.len());
    println!("max |v_h - v_h/2| = {:.3e}", self_convergence_gap(&coarse, &fine));
    Ok(())
}
