//! Exponential-sum compression of the fractional-integral kernel.
//!
//! The kernel `w(t) = t^(α-1) / Γ(α)` has the representation
//! `w(t) = C(α) ∫_0^∞ s^(-α) e^(-ts) ds` with `C(α) = sin(πα)/π`. Truncating
//! at `2^K / T`, splitting `(0, 2^K/T)` into dyadic intervals and applying a
//! `J`-point Gauss-Jacobi rule on each yields
//! `S(t) = Σ b_p e^(-a_p t) ≈ w(t + δ)` for `t ∈ [0, T - δ]`.

use std::fmt::Write as _;

use crate::dd::{self, Dd};
use crate::error::{domain, Error, Result};
use crate::quadrature::{gauss_jacobi_dd, MAX_NODES};
use crate::specialfn::{gamma, regularized_upper_gamma};

/// Largest interval index accepted by [`build_partition`].
pub const MAX_K: usize = 200;

/// Largest per-interval node count accepted by [`compress`].
pub const MAX_J: usize = MAX_NODES;

/// Default value of the constant multiplying `A_J` in the error estimate.
pub const DEFAULT_CALIBRATION: f64 = 1.0;

// (3 + √8)^2 = 17 + 12√2
const CONVERGENCE_BASE: f64 = 17.0 + 12.0 * std::f64::consts::SQRT_2;

/// Dyadic partition of `(0, 2^K / T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalPartition {
    pub horizon: f64,
    pub k: usize,
    pub centers: Vec<f64>,
    pub radii: Vec<f64>,
}

impl IntervalPartition {
    /// Right end of the last interval, `2^K / T`.
    pub fn upper_limit(&self) -> f64 {
        self.centers[self.k] + self.radii[self.k]
    }
}

/// Builds the partition with `c_0 = r_0 = 1/(2T)` and, for `k ≥ 1`,
/// `r_k = 2^(k-1) r_0`, `c_k = 3 r_k`.
pub fn build_partition(k: usize, horizon: f64) -> Result<IntervalPartition> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(domain(format!("horizon must be positive and finite, got {horizon}")));
    }
    if k > MAX_K {
        return Err(domain(format!("K must not exceed {MAX_K}, got {k}")));
    }
    let r0 = 0.5 / horizon;
    let mut centers = Vec::with_capacity(k + 1);
    let mut radii = Vec::with_capacity(k + 1);
    centers.push(r0);
    radii.push(r0);
    for i in 1..=k {
        // Powers of two keep these exact.
        let r = r0 * 2f64.powi(i as i32 - 1);
        radii.push(r);
        centers.push(3.0 * r);
    }
    Ok(IntervalPartition {
        horizon,
        k,
        centers,
        radii,
    })
}

/// `S(t) = Σ_p b_p e^(-a_p t)`, stored row-major by interval then node.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialSum {
    pub alpha: f64,
    pub delta: f64,
    pub horizon: f64,
    pub k: usize,
    pub j: usize,
    pub rates: Vec<f64>,
    pub coeffs: Vec<f64>,
}

/// One term of an [`ExponentialSum`] with its interval and node indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub interval: usize,
    pub node: usize,
    pub rate: f64,
    pub coeff: f64,
}

fn check_kernel_args(alpha: f64, delta: f64, horizon: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(domain(format!("delta must be positive, got {delta}")));
    }
    if !(horizon > delta && horizon.is_finite()) {
        return Err(domain(format!("horizon {horizon} must exceed delta {delta}")));
    }
    Ok(())
}

/// `w(t) = t^(α-1) / Γ(α)`.
pub fn power_kernel(alpha: f64, t: f64) -> f64 {
    // t^α / t avoids rounding the exponent α - 1.
    t.powf(alpha) / t / gamma(alpha).expect("alpha validated by caller")
}

/// Builds the composite Gauss-Jacobi exponential sum.
///
/// Interval 0 uses the rule for weight `(1+x)^(-α)`, which absorbs the
/// `s^(-α)` singularity; later intervals use the Legendre rule. Rates and
/// coefficients are formed in double-double arithmetic and rounded once.
pub fn compress(alpha: f64, delta: f64, horizon: f64, k: usize, j: usize) -> Result<ExponentialSum> {
    check_kernel_args(alpha, delta, horizon)?;
    if j == 0 || j > MAX_J {
        return Err(domain(format!("J must lie in 1..={MAX_J}, got {j}")));
    }
    let partition = build_partition(k, horizon)?;
    let c_alpha = dd::representation_constant(alpha);
    let neg_alpha = Dd::from(-alpha);

    let (first_nodes, first_weights) = gauss_jacobi_dd(j, 0.0, -alpha)?;
    let (nodes, weights) = gauss_jacobi_dd(j, 0.0, 0.0)?;

    let p = (k + 1) * j;
    let mut rates = Vec::with_capacity(p);
    let mut coeffs = Vec::with_capacity(p);

    // a = r (1 + ξ) on interval 0; r^(1-α) = r · r^(-α).
    let r0 = partition.radii[0];
    let scale0 = c_alpha * dd::powf(Dd::from(r0), neg_alpha) * r0;
    for (&xi, &w) in first_nodes.iter().zip(&first_weights) {
        let a = (xi + 1.0) * r0;
        rates.push(a.to_f64());
        coeffs.push((scale0 * (a * -delta).exp() * w).to_f64());
    }
    for i in 1..=k {
        let (c, r) = (partition.centers[i], partition.radii[i]);
        for (&xi, &w) in nodes.iter().zip(&weights) {
            let a = xi * r + c;
            rates.push(a.to_f64());
            let b = c_alpha * (a * -delta).exp() * dd::powf(a, neg_alpha) * r * w;
            coeffs.push(b.to_f64());
        }
    }

    Ok(ExponentialSum {
        alpha,
        delta,
        horizon,
        k,
        j,
        rates,
        coeffs,
    })
}

impl ExponentialSum {
    /// Number of terms `P = (K + 1) J`.
    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = Term> + '_ {
        let j = self.j;
        self.rates
            .iter()
            .zip(&self.coeffs)
            .enumerate()
            .map(move |(p, (&rate, &coeff))| Term {
                interval: p / j,
                node: p % j,
                rate,
                coeff,
            })
    }

    /// Evaluates `S(t)` with Neumaier-compensated summation in term order.
    pub fn eval(&self, t: f64) -> f64 {
        let mut sum = 0.0f64;
        let mut carry = 0.0f64;
        for (&a, &b) in self.rates.iter().zip(&self.coeffs) {
            let term = b * (-a * t).exp();
            let next = sum + term;
            if sum.abs() >= term.abs() {
                carry += (sum - next) + term;
            } else {
                carry += (term - next) + sum;
            }
            sum = next;
        }
        sum + carry
    }

    /// Serializes the sum as `#` metadata lines followed by `k,j,a,b` rows.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# alpha={:.16e}", self.alpha);
        let _ = writeln!(out, "# delta={:.16e}", self.delta);
        let _ = writeln!(out, "# T={:.16e}", self.horizon);
        let _ = writeln!(out, "# K={}", self.k);
        let _ = writeln!(out, "# J={}", self.j);
        let _ = writeln!(out, "# P={}", self.len());
        out.push_str("k,j,a,b\n");
        for term in self.terms() {
            let _ = writeln!(
                out,
                "{},{},{:.16e},{:.16e}",
                term.interval, term.node, term.rate, term.coeff
            );
        }
        out
    }

    /// Parses the format written by [`ExponentialSum::to_table`].
    pub fn from_table(text: &str) -> Result<Self> {
        let mut alpha = None;
        let mut delta = None;
        let mut horizon = None;
        let mut k = None;
        let mut j = None;
        let mut rates = Vec::new();
        let mut coeffs = Vec::new();
        let mut seen_header = false;

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                if let Some((key, value)) = meta.trim().split_once('=') {
                    let value = value.trim();
                    match key.trim() {
                        "alpha" => alpha = Some(parse_f64(value, lineno)?),
                        "delta" => delta = Some(parse_f64(value, lineno)?),
                        "T" => horizon = Some(parse_f64(value, lineno)?),
                        "K" => k = Some(parse_usize(value, lineno)?),
                        "J" => j = Some(parse_usize(value, lineno)?),
                        _ => {}
                    }
                }
                continue;
            }
            if !seen_header {
                if line != "k,j,a,b" {
                    return Err(Error::Parse(format!("line {}: expected header `k,j,a,b`", lineno + 1)));
                }
                seen_header = true;
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(Error::Parse(format!("line {}: expected 4 fields", lineno + 1)));
            }
            let (kk, jj) = (parse_usize(fields[0], lineno)?, parse_usize(fields[1], lineno)?);
            let jn = j.ok_or_else(|| Error::Parse("missing `# J=` line".into()))?;
            if kk * jn + jj != rates.len() || jj >= jn {
                return Err(Error::Parse(format!("line {}: term ({kk},{jj}) out of order", lineno + 1)));
            }
            rates.push(parse_f64(fields[2], lineno)?);
            coeffs.push(parse_f64(fields[3], lineno)?);
        }

        let missing = |name: &str| Error::Parse(format!("missing `# {name}=` line"));
        let sum = ExponentialSum {
            alpha: alpha.ok_or_else(|| missing("alpha"))?,
            delta: delta.ok_or_else(|| missing("delta"))?,
            horizon: horizon.ok_or_else(|| missing("T"))?,
            k: k.ok_or_else(|| missing("K"))?,
            j: j.ok_or_else(|| missing("J"))?,
            rates,
            coeffs,
        };
        if sum.len() != (sum.k + 1) * sum.j {
            return Err(Error::Parse(format!(
                "expected {} terms, found {}",
                (sum.k + 1) * sum.j,
                sum.len()
            )));
        }
        Ok(sum)
    }
}

fn parse_f64(s: &str, lineno: usize) -> Result<f64> {
    s.parse()
        .map_err(|e| Error::Parse(format!("line {}: `{s}`: {e}", lineno + 1)))
}

fn parse_usize(s: &str, lineno: usize) -> Result<usize> {
    s.parse()
        .map_err(|e| Error::Parse(format!("line {}: `{s}`: {e}", lineno + 1)))
}

/// Components of the relative-error estimate `calibration·A_J + B_K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorEstimate {
    pub a_j: f64,
    pub b_k: f64,
    pub eta: f64,
    pub calibration: f64,
    pub total: f64,
}

/// `A_J = J (3 + √8)^(-2J)`.
pub fn quadrature_term(j: usize) -> f64 {
    j as f64 * CONVERGENCE_BASE.powi(-(j as i32))
}

/// `B_K = Γ(1 - α, η 2^K) / Γ(1 - α)` with `η = δ / T`.
pub fn truncation_term(alpha: f64, eta: f64, k: usize) -> Result<f64> {
    regularized_upper_gamma(1.0 - alpha, eta * 2f64.powi(k as i32))
}

pub fn estimate_error(
    alpha: f64,
    delta: f64,
    horizon: f64,
    k: usize,
    j: usize,
    calibration: f64,
) -> Result<ErrorEstimate> {
    check_kernel_args(alpha, delta, horizon)?;
    if j == 0 || j > MAX_J || k > MAX_K {
        return Err(domain(format!("need 1 <= J <= {MAX_J} and K <= {MAX_K}, got K={k}, J={j}")));
    }
    if !(calibration >= 0.0 && calibration.is_finite()) {
        return Err(domain(format!("calibration must be nonnegative, got {calibration}")));
    }
    let eta = delta / horizon;
    let a_j = quadrature_term(j);
    let b_k = truncation_term(alpha, eta, k)?;
    Ok(ErrorEstimate {
        a_j,
        b_k,
        eta,
        calibration,
        total: calibration * a_j + b_k,
    })
}

/// Smallest tolerance [`select_parameters`] accepts.
pub const MIN_EPS: f64 = 1e-14;

/// Smallest `(K, J)` with `calibration·A_J ≤ ε/2` and `B_K ≤ ε/2`.
pub fn select_parameters(
    alpha: f64,
    delta: f64,
    horizon: f64,
    eps: f64,
    calibration: f64,
) -> Result<(usize, usize)> {
    check_kernel_args(alpha, delta, horizon)?;
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(domain(format!("eps must lie in (0, 0.5], got {eps:e}")));
    }
    if eps < MIN_EPS {
        return Err(Error::Infeasible {
            eps,
            reason: format!("below the double-precision floor {MIN_EPS:e}"),
        });
    }
    let half = 0.5 * eps;
    let j = (1..=MAX_J)
        .find(|&j| calibration * quadrature_term(j) <= half)
        .ok_or_else(|| Error::Infeasible {
            eps,
            reason: format!("no J <= {MAX_J} brings A_J below eps/2"),
        })?;
    let eta = delta / horizon;
    for k in 0..=MAX_K {
        if truncation_term(alpha, eta, k)? <= half {
            return Ok((k, j));
        }
    }
    Err(Error::Infeasible {
        eps,
        reason: format!("no K <= {MAX_K} brings B_K below eps/2"),
    })
}

/// One sample of a relative-error scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub t: f64,
    pub w: f64,
    pub s: f64,
    pub rel_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorScan {
    pub points: Vec<ScanPoint>,
    pub max: f64,
}

/// Points per decade of the scan grid.
pub const SCAN_POINTS_PER_DECADE: usize = 100;

/// Log-spaced grid on `[δ, T]` with 100 points per decade; both ends included.
pub fn scan_grid(delta: f64, horizon: f64) -> Vec<f64> {
    let per = SCAN_POINTS_PER_DECADE as f64;
    let span = (horizon / delta).log10();
    let steps = (span * per + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=steps)
        .map(|m| (delta * 10f64.powf(m as f64 / per)).min(horizon))
        .collect();
    if let Some(&last) = grid.last() {
        if last < horizon * (1.0 - 1e-12) {
            grid.push(horizon);
        } else {
            *grid.last_mut().unwrap() = horizon;
        }
    }
    grid.dedup();
    grid
}

/// Measures `Δ(t) = |w(t) - S(t - δ)| / w(t)` on [`scan_grid`].
///
/// `w` and `S` are formed in double-double arithmetic from the stored `f64`
/// rates and coefficients, so `Δ` is resolved well below machine epsilon.
/// The reported `w` and `s` columns are rounded to `f64`.
pub fn relative_error_scan(sum: &ExponentialSum) -> ErrorScan {
    let inv_gamma = Dd::ONE / dd::gamma_unit(sum.alpha.into());
    let exponent = Dd::from(sum.alpha) - 1.0;
    let points: Vec<ScanPoint> = scan_grid(sum.delta, sum.horizon)
        .into_iter()
        .map(|t| {
            let w = (Dd::from(t).ln() * exponent).exp() * inv_gamma;
            let tau = Dd::from(t) - sum.delta;
            let mut s = Dd::ZERO;
            for (&a, &b) in sum.rates.iter().zip(&sum.coeffs) {
                s = s + (tau * -a).exp() * b;
            }
            ScanPoint {
                t,
                w: w.to_f64(),
                s: s.to_f64(),
                rel_err: ((w - s) / w).abs().to_f64(),
            }
        })
        .collect();
    let max = points.iter().map(|p| p.rel_err).fold(0.0, f64::max);
    ErrorScan { points, max }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_examples() {
        let p = build_partition(0, 10.0).unwrap();
        assert_eq!(p.centers, vec![0.05]);
        assert_eq!(p.radii, vec![0.05]);

        let p = build_partition(2, 10.0).unwrap();
        let expect_c = [0.05, 0.15, 0.3];
        let expect_r = [0.05, 0.05, 0.1];
        for i in 0..3 {
            assert!((p.centers[i] - expect_c[i]).abs() <= 1e-16);
            assert!((p.radii[i] - expect_r[i]).abs() <= 1e-16);
        }
        assert!((p.upper_limit() - 0.4).abs() <= 1e-16);
    }

    #[test]
    fn partition_is_contiguous_and_telescopes() {
        for &horizon in &[1e-3, 1.0, 1e2, 7.3e5] {
            let p = build_partition(60, horizon).unwrap();
            for i in 1..=60 {
                let left = p.centers[i] - p.radii[i];
                let right = p.centers[i - 1] + p.radii[i - 1];
                assert!((left - right).abs() <= f64::EPSILON * right);
            }
            let total: f64 = p.radii.iter().map(|r| 2.0 * r).sum();
            let expect = 2f64.powi(60) / horizon;
            assert!((total - expect).abs() <= expect * f64::EPSILON);
            assert!((p.upper_limit() - expect).abs() <= expect * f64::EPSILON);
        }
    }

    #[test]
    fn partition_rejects_bad_input() {
        assert!(build_partition(3, 0.0).is_err());
        assert!(build_partition(3, -1.0).is_err());
        assert!(build_partition(MAX_K + 1, 1.0).is_err());
    }

    #[test]
    fn single_term_sum() {
        let s = compress(0.5, 1.0, 10.0, 0, 1).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s.rates[0] - 1.0 / 30.0).abs() < 1e-16);
        assert!((s.coeffs[0] - 0.194_716_897_088_134_88).abs() < 1e-15);
    }

    #[test]
    fn rates_stay_in_their_intervals() {
        let s = compress(0.3, 1e-3, 50.0, 12, 7).unwrap();
        let part = build_partition(12, 50.0).unwrap();
        assert_eq!(s.len(), 13 * 7);
        for term in s.terms() {
            let (c, r) = (part.centers[term.interval], part.radii[term.interval]);
            assert!(term.rate > c - r && term.rate < c + r);
            assert!(term.coeff > 0.0);
        }
    }

    #[test]
    fn compress_rejects_bad_input() {
        assert!(compress(0.0, 1e-3, 1.0, 2, 2).is_err());
        assert!(compress(1.0, 1e-3, 1.0, 2, 2).is_err());
        assert!(compress(0.5, 1.0, 1.0, 2, 2).is_err());
        assert!(compress(0.5, 1e-3, 1.0, 2, 0).is_err());
        assert!(compress(0.5, 1e-3, 1.0, 2, MAX_J + 1).is_err());
    }

    #[test]
    fn eval_is_positive_and_decreasing() {
        let s = compress(0.5, 1e-4, 1e2, 20, 6).unwrap();
        let total: f64 = s.coeffs.iter().sum();
        assert!((s.eval(0.0) - total).abs() <= 1e-14 * total);
        let mut prev = f64::INFINITY;
        for i in 0..200 {
            let v = s.eval(i as f64 * 0.5);
            assert!(v > 0.0 && v < prev);
            prev = v;
        }
        assert!(s.eval(1e6) < 1e-12);
    }

    #[test]
    fn estimator_values() {
        assert!((quadrature_term(1) - 0.029_437_251_522_859_414).abs() < 1e-17);
        assert!((quadrature_term(9) - 1.493_887_307_116_333_7e-13).abs() < 1e-26);
        let e = estimate_error(0.5, 1e-4, 1e2, 24, 3, 1.0).unwrap();
        assert!((e.b_k - 6.929_729_440_048_163e-9).abs() < 1e-20);
        assert!((e.eta - 1e-6).abs() < 1e-21);
        assert_eq!(e.total, e.a_j + e.b_k);
        let e = estimate_error(0.5, 1e-4, 1e2, 24, 3, 5.0).unwrap();
        assert_eq!(e.total, 5.0 * e.a_j + e.b_k);
    }

    #[test]
    fn certificate_holds_at_zero() {
        let (k, j) = select_parameters(0.5, 1e-4, 1e2, 1e-8, 1.0).unwrap();
        let s = compress(0.5, 1e-4, 1e2, k, j).unwrap();
        let est = estimate_error(0.5, 1e-4, 1e2, k, j, 1.0).unwrap();
        assert!(est.total <= 1e-8);
        let w = power_kernel(0.5, 1e-4);
        assert!((s.eval(0.0) - w).abs() / w <= est.total);
        assert!(s.eval(0.0) <= w * (1.0 + est.total));
    }

    #[test]
    fn selection_is_minimal_and_monotone() {
        let (k, j) = select_parameters(0.5, 1e-4, 1e2, 0.5, 1.0).unwrap();
        assert!(j <= 2);
        let eta = 1e-6;
        assert!(truncation_term(0.5, eta, k).unwrap() <= 0.25);
        if k > 0 {
            assert!(truncation_term(0.5, eta, k - 1).unwrap() > 0.25);
        }
        let mut prev = (0, 0);
        for &eps in &[0.5, 1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12, 1e-14] {
            let (k, j) = select_parameters(0.7, 1e-3, 10.0, eps, 1.0).unwrap();
            assert!(k >= prev.0 && j >= prev.1);
            prev = (k, j);
            let est = estimate_error(0.7, 1e-3, 10.0, k, j, 1.0).unwrap();
            assert!(est.total <= eps);
        }
    }

    #[test]
    fn selection_reports_infeasible_caps() {
        let r = select_parameters(0.5, 1e-70, 1.0, 1e-6, 1.0);
        assert!(matches!(r, Err(Error::Infeasible { .. })));
        assert!(matches!(select_parameters(0.5, 1e-4, 1e2, 1e-15, 1.0), Err(Error::Infeasible { .. })));
        assert!(matches!(select_parameters(0.5, 1e-4, 1e2, 0.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn scan_grid_shape() {
        let g = scan_grid(1e-4, 1e2);
        assert_eq!(g.len(), 601);
        assert_eq!(g[0], 1e-4);
        assert_eq!(*g.last().unwrap(), 1e2);
        assert!(g.windows(2).all(|w| w[0] < w[1]));

        let g = scan_grid(1e-2, 3.0);
        assert_eq!(*g.last().unwrap(), 3.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn scan_max_matches_curve() {
        let s = compress(0.5, 1e-4, 1e2, 20, 5).unwrap();
        let scan = relative_error_scan(&s);
        let m = scan.points.iter().map(|p| p.rel_err).fold(0.0, f64::max);
        assert_eq!(m, scan.max);
        assert!(scan.max > 0.0);
    }

    #[test]
    fn table_round_trip() {
        let s = compress(0.37, 2e-3, 40.0, 9, 4).unwrap();
        let text = s.to_table();
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + s.len());
        let back = ExponentialSum::from_table(&text).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn table_parse_errors() {
        assert!(ExponentialSum::from_table("k,j,a,b\n").is_err());
        let s = compress(0.5, 1e-2, 1.0, 1, 2).unwrap();
        let text = s.to_table();
        let truncated: String = text.lines().take(text.lines().count() - 1).collect::<Vec<_>>().join("\n");
        assert!(matches!(ExponentialSum::from_table(&truncated), Err(Error::Parse(_))));
        let garbled = text.replace("k,j,a,b", "x,y");
        assert!(ExponentialSum::from_table(&garbled).is_err());
    }
}
