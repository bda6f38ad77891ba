//! Compress t^(α-1)/Γ(α) on [δ, T] into a sum of exponentials and measure
//! the relative error against the certified estimate.

use gjkernel::kernel::{compress, estimate_error, relative_error_scan, select_parameters, DEFAULT_CALIBRATION};

fn main() -> gjkernel::Result<()> {
    let (alpha, delta, horizon) = (0.5, 1e-4, 1e2);
    for eps in [1e-4, 1e-8, 1e-12] {
        let (k, j) = select_parameters(alpha, delta, horizon, eps, DEFAULT_CALIBRATION)?;
        let sum = compress(alpha, delta, horizon, k, j)?;
        let est = estimate_error(alpha, delta, horizon, k, j, DEFAULT_CALIBRATION)?;
        let scan = relative_error_scan(&sum);
        println!(
            "eps {eps:.0e}: K = {k:>2}, J = {j:>2}, P = {:>3}, estimate {:.2e}, measured M {:.2e}",
            sum.len(),
            est.total,
            scan.max
        );
    }

    let sum = compress(alpha, delta, horizon, 3, 2)?;
    print!("{}", sum.to_table());
    Ok(())
}
