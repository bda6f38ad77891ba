//! Gauss-Jacobi rules for the weights used by the kernel compression.

use gjkernel::quadrature::{gauss_jacobi_rule, monomial_moments, optimal_ell};

fn main() -> gjkernel::Result<()> {
    let alpha = 0.5;
    let rule = gauss_jacobi_rule(6, 0.0, -alpha)?;
    println!("6-point rule for (1+x)^(-{alpha}):");
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        println!("  x = {x:>22.16e}  w = {w:.16e}");
    }

    let moments = monomial_moments(0.0, -alpha, 11);
    for (k, m) in moments.iter().enumerate() {
        let q = rule.integrate(|x| x.powi(k as i32));
        println!("  degree {k:>2}: rule {q:>22.16e}  exact {m:>22.16e}");
    }

    for j in [4, 8, 12] {
        let (ell, r) = optimal_ell(j)?;
        println!("J = {j:>2}: optimal ell = {ell:.6}, R_J = {r:.3e}");
    }
    Ok(())
}
