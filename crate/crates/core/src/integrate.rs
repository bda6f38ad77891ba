//! Globally adaptive Gauss-Kronrod (7/15) quadrature.
//!
//! Used by the brute-force oracles and by the integral representation of the
//! Mittag-Leffler function. It deliberately shares nothing with the
//! Gauss-Jacobi machinery in [`crate::quadrature`].

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for XGK[1], XGK[3], XGK[5] and the center.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Values that can be integrated: reals and complex numbers.
pub trait Integrand:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Integrand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Tolerances and limits for [`adaptive`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 0.0,
            rel: 1e-13,
            max_intervals: 4000,
        }
    }
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Self {
            rel,
            ..Self::default()
        }
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub intervals: usize,
}

struct Piece<T> {
    lo: f64,
    hi: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Piece<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Piece<T> {}
impl<T> PartialOrd for Piece<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Piece<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<T: Integrand, F: FnMut(f64) -> T>(f: &mut F, lo: f64, hi: f64) -> (T, f64, f64) {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = fc.magnitude() * WGK[7];
    for (i, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let f1 = f(center - half * x);
        let f2 = f(center + half * x);
        let pair = f1 + f2;
        kron = kron + pair * w;
        abs_sum += (f1.magnitude() + f2.magnitude()) * w;
        if i % 2 == 1 {
            gauss = gauss + pair * WG[i / 2];
        }
    }
    let kron = kron * half;
    let gauss = gauss * half;
    let err = (kron - gauss).magnitude();
    (kron, err, abs_sum * half.abs())
}

/// Integrates `f` over the finite interval `[lo, hi]`.
///
/// Bisects the piece with the largest error estimate until the total error
/// meets `max(tol.abs, tol.rel * |I|)`, or the estimate reaches the
/// rounding floor of the sum.
pub fn adaptive<T, F>(mut f: F, lo: f64, hi: f64, tol: Tolerance) -> Result<Estimate<T>>
where
    T: Integrand,
    F: FnMut(f64) -> T,
{
    if lo == hi {
        return Ok(Estimate {
            value: T::zero(),
            error: 0.0,
            intervals: 0,
        });
    }
    let (value, error, abs_sum) = kronrod(&mut f, lo, hi);
    let mut heap = BinaryHeap::new();
    heap.push(Piece {
        lo,
        hi,
        value,
        error,
    });
    let mut total = value;
    let mut total_err = error;
    let mut total_abs = abs_sum;
    let span = (hi - lo).abs();

    loop {
        let target = tol.abs.max(tol.rel * total.magnitude());
        let floor = 64.0 * f64::EPSILON * total_abs;
        if total_err <= target || total_err <= floor {
            break;
        }
        if heap.len() >= tol.max_intervals {
            return Err(Error::Convergence(format!(
                "adaptive quadrature on [{lo}, {hi}] reached {} intervals with error {total_err:e} (target {target:e})",
                heap.len()
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if (worst.hi - worst.lo).abs() <= 1e-15 * span {
            // Cannot bisect further; accept what we have.
            heap.push(worst);
            break;
        }
        let (v1, e1, a1) = kronrod(&mut f, worst.lo, mid);
        let (v2, e2, a2) = kronrod(&mut f, mid, worst.hi);
        total = total - worst.value + v1 + v2;
        total_err += e1 + e2 - worst.error;
        total_abs += a1 + a2;
        heap.push(Piece {
            lo: worst.lo,
            hi: mid,
            value: v1,
            error: e1,
        });
        heap.push(Piece {
            lo: mid,
            hi: worst.hi,
            value: v2,
            error: e2,
        });
    }

    // Resum to shed the drift of the running updates.
    let mut value = T::zero();
    let mut error = 0.0;
    let mut pieces: Vec<_> = heap.into_vec();
    pieces.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    for p in &pieces {
        value = value + p.value;
        error += p.error;
    }
    Ok(Estimate {
        value,
        error,
        intervals: pieces.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_and_exponentials() {
        let r = adaptive(|x: f64| x * x, 0.0, 3.0, Tolerance::default()).unwrap();
        assert!((r.value - 9.0).abs() < 1e-13);
        let r = adaptive(|x: f64| (-x).exp(), 0.0, 40.0, Tolerance::default()).unwrap();
        assert!((r.value - (1.0 - (-40.0f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn resolves_sharp_peaks() {
        let eps: f64 = 1e-4;
        let f = |x: f64| eps / (x * x + eps * eps);
        let r = adaptive(f, -1.0, 1.0, Tolerance::relative(1e-12)).unwrap();
        let exact = 2.0 * (1.0 / eps).atan();
        assert!((r.value - exact).abs() / exact < 1e-12);
    }

    #[test]
    fn complex_integrand() {
        let f = |x: f64| Complex64::new(0.0, x).exp();
        let r = adaptive(f, 0.0, std::f64::consts::PI, Tolerance::default()).unwrap();
        assert!((r.value - Complex64::new(0.0, 2.0)).norm() < 1e-13);
    }

    #[test]
    fn reports_failure_when_budget_is_exhausted() {
        let tol = Tolerance {
            abs: 0.0,
            rel: 1e-15,
            max_intervals: 3,
        };
        let r = adaptive(|x: f64| (1.0 / x).sin(), 1e-3, 1.0, tol);
        assert!(matches!(r, Err(Error::Convergence(_))));
    }
}
