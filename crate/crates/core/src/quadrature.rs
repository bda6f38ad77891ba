//! Gauss-Jacobi quadrature for the weight `(1 - x)^a (1 + x)^b` on `[-1, 1]`,
//! plus the error-kernel diagnostics used to reason about its convergence.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::dd::{self, Dd};
use crate::error::{domain, Error, Result};
use crate::integrate::{adaptive, Tolerance};
use crate::specialfn::gamma;

/// Largest supported node count.
pub const MAX_NODES: usize = 64;

/// Largest supported Jacobi exponent.
pub const MAX_EXPONENT: f64 = 10.0;

/// An `n`-point Gauss-Jacobi rule.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub a: f64,
    pub b: f64,
    /// Strictly increasing nodes in `(-1, 1)`.
    pub nodes: Vec<f64>,
    /// Positive weights, summing to the zeroth moment of the weight.
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ ω_j f(ξ_j)`, approximating `∫ f(x) (1-x)^a (1+x)^b dx`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

fn check_exponents(a: f64, b: f64) -> Result<()> {
    if !(a > -1.0 && a <= MAX_EXPONENT) || !(b > -1.0 && b <= MAX_EXPONENT) {
        return Err(domain(format!(
            "Jacobi exponents must lie in (-1, {MAX_EXPONENT}], got a={a}, b={b}"
        )));
    }
    Ok(())
}

/// `∫_{-1}^{1} (1-x)^a (1+x)^b dx = 2^{a+b+1} Γ(a+1) Γ(b+1) / Γ(a+b+2)`.
pub fn jacobi_zeroth_moment(a: f64, b: f64) -> f64 {
    let g = |x: f64| gamma(x).expect("exponents validated by caller");
    2f64.powf(a + b + 1.0) * (g(a + 1.0) * g(b + 1.0) / g(a + b + 2.0))
}

/// Monomial moments `m_k = ∫ x^k (1-x)^a (1+x)^b dx` for `k = 0..=max_degree`.
///
/// Integrating `d/dx [x^k (1-x)^{a+1} (1+x)^{b+1}]` over `[-1, 1]` gives
/// `(k + a + b + 2) m_{k+1} = k m_{k-1} + (b - a) m_k`.
pub fn monomial_moments(a: f64, b: f64, max_degree: usize) -> Vec<f64> {
    let mut m = Vec::with_capacity(max_degree + 1);
    m.push(jacobi_zeroth_moment(a, b));
    for k in 0..max_degree {
        let kf = k as f64;
        let prev = if k == 0 { 0.0 } else { kf * m[k - 1] };
        let next = (prev + (b - a) * m[k]) / (kf + a + b + 2.0);
        m.push(next);
    }
    m
}

/// Jacobi polynomials `P_{n-1}(x)` and `P_n(x)` (normalised by
/// `P_n(1) = binom(n + a, n)`) from the three-term recurrence.
fn jacobi_pair(n: usize, a: f64, b: f64, x: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let mut p_prev = 1.0;
    let mut p = 0.5 * (a - b + (a + b + 2.0) * x);
    for k in 2..=n {
        let k = k as f64;
        let s = 2.0 * k + a + b;
        let c1 = 2.0 * k * (k + a + b) * (s - 2.0);
        let c2 = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b);
        let c3 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * s;
        let next = (c2 * p - c3 * p_prev) / c1;
        p_prev = p;
        p = next;
    }
    (p_prev, p)
}

/// Jacobi polynomial `P_n^{(a,b)}(x)`.
pub fn jacobi_polynomial(n: usize, a: f64, b: f64, x: f64) -> f64 {
    jacobi_pair(n, a, b, x).1
}

/// Symmetric tridiagonal Jacobi matrix of the orthonormal Jacobi polynomials.
fn jacobi_matrix(n: usize, a: f64, b: f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        m[(k, k)] = if k == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        };
        if k + 1 < n {
            let j = kf + 1.0;
            let sj = 2.0 * j + a + b;
            let beta2 = if j == 1.0 {
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b).powi(2) * (3.0 + a + b))
            } else {
                4.0 * j * (j + a) * (j + b) * (j + a + b)
                    / (sj * sj * (sj + 1.0) * (sj - 1.0))
            };
            let off = beta2.sqrt();
            m[(k, k + 1)] = off;
            m[(k + 1, k)] = off;
        }
    }
    m
}

// P_{n-1} and P_n in double-double; coefficients are formed in
// double-double too since they involve non-integer exponents.
fn jacobi_pair_dd(n: usize, a: f64, b: f64, x: Dd) -> (Dd, Dd) {
    let (ad, bd) = (Dd::from(a), Dd::from(b));
    let ab = ad + bd;
    let mut p_prev = Dd::ONE;
    let mut p = ((ab + 2.0) * x + (ad - bd)) * 0.5;
    for k in 2..=n {
        let k = k as f64;
        let s = ab + 2.0 * k;
        let c1 = (ab + k) * (s - 2.0) * (2.0 * k);
        let c2 = (s - 1.0) * (s * (s - 2.0) * x + (ad - bd) * (ad + bd));
        let c3 = (ad + (k - 1.0)) * (bd + (k - 1.0)) * s * 2.0;
        let next = (c2 * p - c3 * p_prev) / c1;
        p_prev = p;
        p = next;
    }
    (p_prev, p)
}

// Newton's method on P_n in double-double, using
// (2n+a+b)(1-x²) P_n' = n[(a-b) - (2n+a+b)x] P_n + 2(n+a)(n+b) P_{n-1}.
fn polish_node(n: usize, a: f64, b: f64, x0: f64) -> (Dd, Dd) {
    let nf = n as f64;
    let s = Dd::from(a) + b + 2.0 * nf;
    let tail = (Dd::from(a) + nf) * (Dd::from(b) + nf) * 2.0;
    let mut x = Dd::from(x0);
    for _ in 0..8 {
        let (pm1, p) = jacobi_pair_dd(n, a, b, x);
        let one_minus_sq = (Dd::ONE - x) * (Dd::ONE + x);
        let dp = ((Dd::from(a) - b - s * x) * p * nf + tail * pm1) / (s * one_minus_sq);
        let step = p / dp;
        x = x - step;
        if step.abs().hi <= 1e-31 {
            break;
        }
    }
    (x, jacobi_pair_dd(n, a, b, x).0)
}

/// Exact zeroth moment in double-double.
fn zeroth_moment_dd(a: f64, b: f64) -> Dd {
    let (ad, bd) = (Dd::from(a), Dd::from(b));
    dd::exp2(ad + bd + 1.0) * dd::gamma(ad + 1.0) * dd::gamma(bd + 1.0) / dd::gamma(ad + bd + 2.0)
}

/// Nodes and weights in double-double precision.
///
/// Nodes start as eigenvalues of the Jacobi matrix (Golub-Welsch) and are
/// polished by Newton's method. At a node `P_n' ∝ P_{n-1} / (1 - x²)`, so the
/// weights are proportional to `(1 - x²) / P_{n-1}(x)²`; they are scaled to
/// the closed-form zeroth moment.
pub(crate) fn gauss_jacobi_dd(n: usize, a: f64, b: f64) -> Result<(Vec<Dd>, Vec<Dd>)> {
    if n == 0 || n > MAX_NODES {
        return Err(domain(format!("node count must lie in 1..={MAX_NODES}, got {n}")));
    }
    check_exponents(a, b)?;

    let eig = SymmetricEigen::new(jacobi_matrix(n, a, b));
    let mut initial: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    initial.sort_by(f64::total_cmp);

    let mut nodes = Vec::with_capacity(n);
    let mut raw = Vec::with_capacity(n);
    for &x0 in &initial {
        let (x, pm1) = polish_node(n, a, b, x0);
        nodes.push(x);
        raw.push((Dd::ONE - x) * (Dd::ONE + x) / (pm1 * pm1));
    }
    let total = raw.iter().fold(Dd::ZERO, |acc, &w| acc + w);
    let scale = zeroth_moment_dd(a, b) / total;
    let weights = raw.into_iter().map(|w| w * scale).collect();
    Ok((nodes, weights))
}

/// Builds the `n`-point Gauss-Jacobi rule for `(1-x)^a (1+x)^b`.
///
/// Computed in double-double arithmetic (see the crate docs) and rounded, so
/// nodes and weights are accurate to about one ulp.
pub fn gauss_jacobi_rule(n: usize, a: f64, b: f64) -> Result<QuadratureRule> {
    let (nodes, weights) = gauss_jacobi_dd(n, a, b)?;
    let rule = QuadratureRule {
        a,
        b,
        nodes: nodes.iter().map(|x| x.to_f64()).collect(),
        weights: weights.iter().map(|w| w.to_f64()).collect(),
    };
    validate(&rule)?;
    Ok(rule)
}

fn validate(rule: &QuadratureRule) -> Result<()> {
    let nodes_ok = rule.nodes.iter().all(|&x| x > -1.0 && x < 1.0)
        && rule.nodes.windows(2).all(|w| w[0] < w[1]);
    let weights_ok = rule.weights.iter().all(|&w| w > 0.0 && w.is_finite());
    if nodes_ok && weights_ok {
        Ok(())
    } else {
        Err(Error::Convergence(format!(
            "Gauss-Jacobi node solver failed for n={}, a={}, b={}",
            rule.len(),
            rule.a,
            rule.b
        )))
    }
}

/// Query for the Gauss-Jacobi error kernel `K_n^{(a,b)}(ℓ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorKernelQuery {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub ell: f64,
}

/// Leading term of the large-`n` asymptotics of `K_n^{(a,b)}(ℓ)`:
/// `2π (ℓ-1)^a (ℓ+1)^b ρ^{-(a+b)} ρ^{-(2n+1)}` with `ρ = ℓ + sqrt(ℓ² - 1)`.
pub fn error_kernel_estimate(q: ErrorKernelQuery) -> Result<f64> {
    if !(q.ell > 1.0) {
        return Err(domain(format!("error kernel requires ell > 1, got {}", q.ell)));
    }
    if !(q.a > -1.0 && q.b > -1.0) {
        return Err(domain("Jacobi exponents must exceed -1"));
    }
    let rho = q.ell + (q.ell * q.ell - 1.0).sqrt();
    let log_value = (2.0 * std::f64::consts::PI).ln() + q.a * (q.ell - 1.0).ln()
        + q.b * (q.ell + 1.0).ln()
        - (q.a + q.b + 2.0 * q.n as f64 + 1.0) * rho.ln();
    Ok(log_value.exp())
}

/// Largest `n` accepted by [`true_error_kernel`].
pub const TRUE_KERNEL_MAX_N: usize = 8;

/// `K_n^{(a,b)}(ℓ) = Π_n(ℓ) / P_n(ℓ)` with `Π_n` computed by adaptive quadrature
/// of `2^{-n} ∫ (1-x)^{n+a} (1+x)^{n+b} / (ℓ - x)^{n+1} dx`.
///
/// Test support only: slow, and restricted to small `n`.
pub fn true_error_kernel(n: usize, a: f64, b: f64, ell: f64) -> Result<f64> {
    if n > TRUE_KERNEL_MAX_N {
        return Err(domain(format!(
            "true_error_kernel supports n <= {TRUE_KERNEL_MAX_N}, got {n}"
        )));
    }
    if !(a > -1.0 && b > -1.0) || !(ell > 1.0) {
        return Err(domain(format!(
            "true_error_kernel requires a, b > -1 and ell > 1 (got a={a}, b={b}, ell={ell})"
        )));
    }
    let nf = n as f64;
    let pa = nf + a;
    let pb = nf + b;
    // Remove endpoint singularities: x = 1 - u^{1/(pa+1)} on [0, 1],
    // x = -1 + v^{1/(pb+1)} on [-1, 0].
    let upper = {
        let ea = 1.0 / (pa + 1.0);
        adaptive(
            |u: f64| {
                if u == 0.0 {
                    return 0.0;
                }
                let one_minus = u.powf(ea);
                let x = 1.0 - one_minus;
                ea * (1.0 + x).powf(pb) / (ell - x).powf(nf + 1.0)
            },
            0.0,
            1.0,
            Tolerance::relative(1e-12),
        )?
        .value
    };
    let lower = {
        let eb = 1.0 / (pb + 1.0);
        adaptive(
            |v: f64| {
                if v == 0.0 {
                    return 0.0;
                }
                let one_plus = v.powf(eb);
                let x = -1.0 + one_plus;
                eb * (1.0 - x).powf(pa) / (ell - x).powf(nf + 1.0)
            },
            0.0,
            1.0,
            Tolerance::relative(1e-12),
        )?
        .value
    };
    let pi_n = 2f64.powi(-(n as i32)) * (upper + lower);
    Ok(pi_n / jacobi_polynomial(n, a, b, ell))
}

/// `R_J(ℓ) = (3 - ℓ)^{-1} (ℓ + sqrt(ℓ² - 1))^{-2J}` for `ℓ ∈ (1, 3)`.
pub fn r_function(j: usize, ell: f64) -> f64 {
    let rho = ell + (ell * ell - 1.0).sqrt();
    (-(2.0 * j as f64) * rho.ln() - (3.0 - ell).ln()).exp()
}

/// Closed-form minimiser `ℓ_J` of [`r_function`] on `(1, 3)` and `R_J(ℓ_J)`.
pub fn optimal_ell(j: usize) -> Result<(f64, f64)> {
    if j == 0 {
        return Err(domain("optimal_ell requires J >= 1"));
    }
    let mu = 1.0 / (2.0 * j as f64);
    let ell = (3.0 - mu * (8.0 + mu * mu).sqrt()) / (1.0 - mu * mu);
    Ok((ell, r_function(j, ell)))
}
