//! Brute-force check of W_2(a, t) <= Q(1-α, a) w(t) with the quadrature oracles.

use gjkernel::oracle::{kernel_direct, tail_w2, TailQuery};
use gjkernel::specialfn::regularized_upper_gamma;

fn main() -> gjkernel::Result<()> {
    println!("{:>5} {:>6} {:>5} {:>14} {:>14} {:>8}", "alpha", "a", "t", "W2", "bound", "ratio");
    for alpha in [0.1, 0.5, 0.9] {
        for a in [0.1, 1.0, 5.0, 20.0] {
            for t in [1.0, 2.0, 10.0] {
                let w2 = tail_w2(TailQuery::new(alpha, a, t))?;
                let bound = regularized_upper_gamma(1.0 - alpha, a)? * kernel_direct(alpha, t)?;
                println!("{alpha:>5} {a:>6} {t:>5} {w2:>14.6e} {bound:>14.6e} {:>8.5}", w2 / bound);
            }
        }
    }
    Ok(())
}
