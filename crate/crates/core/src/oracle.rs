//! Brute-force references for tests and acceptance runs.
//!
//! Everything here goes through adaptive Gauss-Kronrod quadrature or closed
//! forms and shares no code with the Gauss-Jacobi construction.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::integrate::{adaptive, Tolerance};
use crate::kernel::ExponentialSum;
use crate::specialfn::{log_gamma, mittag_leffler};

/// Integrand ratio at which the infinite tail is cut.
const TAIL_RATIO: f64 = 1e-18;

const ORACLE_TOL: f64 = 1e-13;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// `sin(πα)/π`.
pub fn representation_constant(alpha: f64) -> f64 {
    (PI * alpha.min(1.0 - alpha)).sin() / PI
}

/// `w(t) = t^(α-1)/Γ(α)` through `log_gamma`.
pub fn kernel_direct(alpha: f64, t: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(t > 0.0) {
        return Err(domain(format!("t must be positive, got {t}")));
    }
    Ok(((alpha - 1.0) * t.ln() - log_gamma(alpha)?).exp())
}

/// `∫_lo^hi s^(-β) e^(-ts) ds`, with `s = σ^(1/(1-β))` when `lo = 0`.
fn power_exp_integral(beta: f64, t: f64, lo: f64, hi: f64) -> Result<f64> {
    if hi <= lo {
        return Ok(0.0);
    }
    let tol = Tolerance::relative(ORACLE_TOL);
    if lo == 0.0 {
        let p = 1.0 / (1.0 - beta);
        let top = hi.powf(1.0 - beta);
        let est = adaptive(|sig: f64| p * (-t * sig.powf(p)).exp(), 0.0, top, tol)?;
        Ok(est.value)
    } else {
        let est = adaptive(|s: f64| s.powf(-beta) * (-t * s).exp(), lo, hi, tol)?;
        Ok(est.value)
    }
}

fn tail_span(t: f64) -> f64 {
    -TAIL_RATIO.ln() / t
}

/// `W_1(t) = C(α) ∫_0^(2^K / T) s^(-α) e^(-ts) ds` for the `δ = 1` scaling.
pub fn truncated_integral_w1(alpha: f64, horizon_scaled: f64, k: usize, t: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(horizon_scaled >= 1.0) {
        return Err(domain(format!("scaled horizon must be at least 1, got {horizon_scaled}")));
    }
    if !(t >= 1.0 && t <= horizon_scaled) {
        return Err(domain(format!("t must lie in [1, {horizon_scaled}], got {t}")));
    }
    let upper = (k as f64).exp2() / horizon_scaled;
    let hi = upper.min(tail_span(t));
    Ok(representation_constant(alpha) * power_exp_integral(alpha, t, 0.0, hi)?)
}

/// Exponent of `s` in the tail integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TailExponent {
    /// `s^(-α)`, the exponent of the integral representation of `w`.
    #[default]
    Representation,
    /// `s^(-1+α)`, kept for comparison.
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailQuery {
    pub alpha: f64,
    pub a: f64,
    pub t: f64,
    pub exponent: TailExponent,
}

impl TailQuery {
    pub fn new(alpha: f64, a: f64, t: f64) -> Self {
        Self {
            alpha,
            a,
            t,
            exponent: TailExponent::Representation,
        }
    }
}

/// `W_2(a, t) = C(α) ∫_a^∞ s^(-α) e^(-ts) ds`, truncated where the
/// integrand has fallen by [`TAIL_RATIO`] relative to `s = a`.
pub fn tail_w2(q: TailQuery) -> Result<f64> {
    check_alpha(q.alpha)?;
    if !(q.a >= 0.0 && q.a.is_finite()) {
        return Err(domain(format!("a must be finite and non-negative, got {}", q.a)));
    }
    if !(q.t > 0.0 && q.t.is_finite()) {
        return Err(domain(format!("t must be positive, got {}", q.t)));
    }
    let beta = match q.exponent {
        TailExponent::Representation => q.alpha,
        TailExponent::Printed => 1.0 - q.alpha,
    };
    // s^(-β) only decreases, so the exponential alone sets the cut.
    let hi = q.a + tail_span(q.t);
    Ok(representation_constant(q.alpha) * power_exp_integral(beta, q.t, q.a, hi)?)
}

/// `(S * 1)(t) = Σ_p b_p (1 - e^(-a_p t)) / a_p`.
pub fn conv_const_exact(sum: &ExponentialSum, t: f64) -> f64 {
    sum.rates
        .iter()
        .zip(&sum.coeffs)
        .map(|(&a, &b)| if a == 0.0 { b * t } else { -b * (-a * t).exp_m1() / a })
        .sum()
}

/// `u(t) = E_α(λ t^α)`, the solution of `D^α u = λu`, `u(0) = 1`.
pub fn mlf_exact_solution(alpha: f64, lambda: Complex64, t: f64) -> Result<Complex64> {
    check_alpha(alpha)?;
    if !(t >= 0.0) {
        return Err(domain(format!("t must be non-negative, got {t}")));
    }
    if t == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    mittag_leffler(alpha, lambda * t.powf(alpha))
}
