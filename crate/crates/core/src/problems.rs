//! Model problems: the linear Mittag-Leffler test equation and the
//! fractional Van der Pol oscillator.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::solver::FdeSystem;

/// `D^α u = λu`. Real `λ` gives a scalar system; complex `λ` is embedded as
/// the 2-dimensional real system on `(Re u, Im u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearTest {
    pub lambda: Complex64,
}

impl LinearTest {
    pub fn new(lambda: Complex64) -> Self {
        Self { lambda }
    }

    pub fn is_complex(&self) -> bool {
        self.lambda.im != 0.0
    }

    /// `u(0) = 1` in the matching dimension.
    pub fn initial_state(&self) -> Vec<f64> {
        if self.is_complex() {
            vec![1.0, 0.0]
        } else {
            vec![1.0]
        }
    }
}

impl FdeSystem for LinearTest {
    fn dim(&self) -> usize {
        if self.is_complex() {
            2
        } else {
            1
        }
    }

    fn rhs(&self, _t: f64, u: &[f64], out: &mut [f64]) {
        let (lr, li) = (self.lambda.re, self.lambda.im);
        if self.is_complex() {
            out[0] = lr * u[0] - li * u[1];
            out[1] = li * u[0] + lr * u[1];
        } else {
            out[0] = lr * u[0];
        }
    }

    fn jacobian(&self, _t: f64, _u: &[f64]) -> Option<DMatrix<f64>> {
        let (lr, li) = (self.lambda.re, self.lambda.im);
        Some(if self.is_complex() {
            DMatrix::from_row_slice(2, 2, &[lr, -li, li, lr])
        } else {
            DMatrix::from_element(1, 1, lr)
        })
    }
}

/// `D^α x = y`, `D^α y = μ(1 - x²)y - x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VanDerPol {
    pub mu: f64,
}

impl VanDerPol {
    pub fn new(mu: f64) -> Self {
        Self { mu }
    }
}

impl FdeSystem for VanDerPol {
    fn dim(&self) -> usize {
        2
    }

    fn rhs(&self, _t: f64, u: &[f64], out: &mut [f64]) {
        let (x, y) = (u[0], u[1]);
        out[0] = y;
        out[1] = self.mu * (1.0 - x * x) * y - x;
    }

    fn jacobian(&self, _t: f64, u: &[f64]) -> Option<DMatrix<f64>> {
        let (x, y) = (u[0], u[1]);
        Some(DMatrix::from_row_slice(
            2,
            2,
            &[0.0, 1.0, -2.0 * self.mu * x * y - 1.0, self.mu * (1.0 - x * x)],
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_jacobian<S: FdeSystem>(s: &S, u: &[f64]) -> DMatrix<f64> {
        let d = s.dim();
        let mut f0 = vec![0.0; d];
        let mut f1 = vec![0.0; d];
        s.rhs(0.0, u, &mut f0);
        let mut j = DMatrix::zeros(d, d);
        for c in 0..d {
            let mut v = u.to_vec();
            let h = 1e-7;
            v[c] += h;
            s.rhs(0.0, &v, &mut f1);
            for r in 0..d {
                j[(r, c)] = (f1[r] - f0[r]) / h;
            }
        }
        j
    }

    #[test]
    fn jacobians_match_differences() {
        let vdp = VanDerPol::new(4.0);
        let u = [1.3, -0.7];
        let diff = vdp.jacobian(0.0, &u).unwrap() - fd_jacobian(&vdp, &u);
        assert!(diff.amax() < 1e-5);

        let lin = LinearTest::new(Complex64::new(-0.5, 2.0));
        let u = [0.2, 0.9];
        let diff = lin.jacobian(0.0, &u).unwrap() - fd_jacobian(&lin, &u);
        assert!(diff.amax() < 1e-6);
    }

    #[test]
    fn complex_embedding_multiplies() {
        let lam = Complex64::new(0.3, -1.2);
        let sys = LinearTest::new(lam);
        assert_eq!(sys.dim(), 2);
        let u = Complex64::new(0.7, 0.4);
        let mut out = [0.0; 2];
        sys.rhs(0.0, &[u.re, u.im], &mut out);
        let p = lam * u;
        assert!((out[0] - p.re).abs() < 1e-15 && (out[1] - p.im).abs() < 1e-15);
        assert_eq!(LinearTest::new(Complex64::new(-1.0, 0.0)).initial_state(), vec![1.0]);
    }
}
