//! Trapezoidal (TR) time stepping for Caputo problems `D^α u = f(t, u)`,
//! `u(0) = u0`, with the history term carried by the auxiliary variables of
//! an exponential-sum kernel.
//!
//! With `δ = h`, the solution at `t_{n+1}` splits into a local integral over
//! the last step, approximated by linear interpolation of `f`, and a history
//! integral `Σ_p b_p ψ_p(t_n)` where each `ψ_p' = -a_p ψ_p + f`, `ψ_p(0) = 0`.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{domain, Error, Result};
use crate::kernel::{compress, estimate_error, select_parameters, ErrorEstimate, ExponentialSum};
use crate::specialfn::gamma;

/// Right-hand side of `D^α u = f(t, u)`.
pub trait FdeSystem {
    fn dim(&self) -> usize;

    /// Writes `f(t, u)` into `out`.
    fn rhs(&self, t: f64, u: &[f64], out: &mut [f64]);

    /// Analytic Jacobian `∂f/∂u`, if available. The default reports none and
    /// the solver falls back to forward differences.
    fn jacobian(&self, _t: f64, _u: &[f64]) -> Option<DMatrix<f64>> {
        None
    }
}

/// A system given by closures.
pub struct FnSystem<F, J = fn(f64, &[f64]) -> DMatrix<f64>> {
    dim: usize,
    rhs: F,
    jacobian: Option<J>,
}

impl<F> FnSystem<F>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    pub fn new(dim: usize, rhs: F) -> Self {
        Self {
            dim,
            rhs,
            jacobian: None,
        }
    }
}

impl<F, J> FnSystem<F, J>
where
    F: Fn(f64, &[f64], &mut [f64]),
    J: Fn(f64, &[f64]) -> DMatrix<f64>,
{
    pub fn with_jacobian(dim: usize, rhs: F, jacobian: J) -> Self {
        Self {
            dim,
            rhs,
            jacobian: Some(jacobian),
        }
    }
}

impl<F, J> FdeSystem for FnSystem<F, J>
where
    F: Fn(f64, &[f64], &mut [f64]),
    J: Fn(f64, &[f64]) -> DMatrix<f64>,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn rhs(&self, t: f64, u: &[f64], out: &mut [f64]) {
        (self.rhs)(t, u, out)
    }
    fn jacobian(&self, t: f64, u: &[f64]) -> Option<DMatrix<f64>> {
        self.jacobian.as_ref().map(|j| j(t, u))
    }
}

/// `D^α u = f(t, u)` on `[0, T]` with `u(0) = u0`.
pub struct FdeProblem<S> {
    pub alpha: f64,
    pub u0: Vec<f64>,
    pub horizon: f64,
    pub system: S,
}

impl<S: FdeSystem> FdeProblem<S> {
    pub fn new(alpha: f64, u0: Vec<f64>, horizon: f64, system: S) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(domain(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        if system.dim() == 0 {
            return Err(domain("state dimension must be at least 1"));
        }
        if u0.len() != system.dim() {
            return Err(domain(format!(
                "initial state has {} components, system has {}",
                u0.len(),
                system.dim()
            )));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(domain(format!("horizon must be positive, got {horizon}")));
        }
        Ok(Self {
            alpha,
            u0,
            horizon,
            system,
        })
    }

    pub fn dim(&self) -> usize {
        self.u0.len()
    }
}

/// Which form of the step equations to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepForm {
    /// `u0` enters the step equation and the auxiliary forcing carries `h/2`.
    #[default]
    Consistent,
    /// Drops `u0` from the step equation and the factor `h` from the
    /// auxiliary forcing, for comparison with the unamended formulas.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub h: f64,
    pub eps_kernel: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub calibration: f64,
    pub form: StepForm,
}

impl SolverConfig {
    pub fn new(h: f64, eps_kernel: f64) -> Self {
        Self {
            h,
            eps_kernel,
            ..Self::default()
        }
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            h: 1e-3,
            eps_kernel: 1e-10,
            newton_tol: 1e-12,
            newton_max_iter: 25,
            calibration: crate::kernel::DEFAULT_CALIBRATION,
            form: StepForm::Consistent,
        }
    }
}

/// Auxiliary variables `Φ` (`d × P`), one column per exponential term.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryState {
    pub phi: DMatrix<f64>,
    pub rates: Vec<f64>,
    pub coeffs: Vec<f64>,
}

impl AuxiliaryState {
    pub fn dim(&self) -> usize {
        self.phi.nrows()
    }

    pub fn terms(&self) -> usize {
        self.phi.ncols()
    }
}

/// Zero auxiliary state for a `dim`-dimensional problem.
pub fn init_state(sum: &ExponentialSum, dim: usize) -> Result<AuxiliaryState> {
    if dim == 0 {
        return Err(domain("state dimension must be at least 1"));
    }
    Ok(AuxiliaryState {
        phi: DMatrix::zeros(dim, sum.len()),
        rates: sum.rates.clone(),
        coeffs: sum.coeffs.clone(),
    })
}

/// `Φ b`, the compressed history.
pub fn history_eval(state: &AuxiliaryState) -> Vec<f64> {
    let mut out = vec![0.0; state.dim()];
    for (col, &b) in state.phi.column_iter().zip(&state.coeffs) {
        for (o, &v) in out.iter_mut().zip(col.iter()) {
            *o += b * v;
        }
    }
    out
}

/// Advances every auxiliary variable by one trapezoidal step:
/// `ψ ← [ψ (1 - h a/2) + (h/2)(f^n + f^{n+1})] / (1 + h a/2)`.
pub fn phi_step(state: &mut AuxiliaryState, f_n: &[f64], f_np1: &[f64], h: f64, form: StepForm) {
    let forcing_scale = match form {
        StepForm::Consistent => 0.5 * h,
        StepForm::Literal => 0.5,
    };
    let forcing: Vec<f64> = f_n
        .iter()
        .zip(f_np1)
        .map(|(a, b)| forcing_scale * (a + b))
        .collect();
    for (mut col, &a) in state.phi.column_iter_mut().zip(&state.rates) {
        let half = 0.5 * h * a;
        let keep = 1.0 - half;
        let inv = 1.0 / (1.0 + half);
        for (v, &g) in col.iter_mut().zip(&forcing) {
            *v = (*v * keep + g) * inv;
        }
    }
}

/// Local trapezoidal weights `h^α W_0` and `h^α W_1`, with
/// `W_0 = 1/Γ(2+α)` and `W_1 = α/Γ(2+α)`.
pub fn local_weights(alpha: f64, h: f64) -> (f64, f64) {
    let scale = h.powf(alpha) / gamma(2.0 + alpha).expect("alpha in (0, 1)");
    (scale, alpha * scale)
}

/// Result of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub v: Vec<f64>,
    pub f: Vec<f64>,
    pub iterations: usize,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn jacobian_at<S: FdeSystem>(system: &S, t: f64, v: &[f64], fv: &[f64]) -> DMatrix<f64> {
    if let Some(j) = system.jacobian(t, v) {
        return j;
    }
    let d = v.len();
    let mut jac = DMatrix::zeros(d, d);
    let mut shifted = v.to_vec();
    let mut fs = vec![0.0; d];
    let root_eps = f64::EPSILON.sqrt();
    for i in 0..d {
        let step = root_eps * (1.0 + v[i].abs());
        shifted[i] = v[i] + step;
        system.rhs(t, &shifted, &mut fs);
        for r in 0..d {
            jac[(r, i)] = (fs[r] - fv[r]) / step;
        }
        shifted[i] = v[i];
    }
    jac
}

/// One TR step from `t_n`: solves
/// `v - h^α W_0 f(t_{n+1}, v) = u0 + h^α W_1 f^n + Φ^n b`
/// by Newton's method and then advances `Φ`.
#[allow(clippy::too_many_arguments)]
pub fn tr_step<S: FdeSystem>(
    problem: &FdeProblem<S>,
    config: &SolverConfig,
    state: &mut AuxiliaryState,
    step_index: usize,
    t_n: f64,
    v_n: &[f64],
    f_n: &[f64],
) -> Result<StepOutcome> {
    let d = problem.dim();
    let h = config.h;
    let t_np1 = t_n + h;
    let (w0, w1) = local_weights(problem.alpha, h);

    let history = history_eval(state);
    let mut known: Vec<f64> = (0..d).map(|i| w1 * f_n[i] + history[i]).collect();
    if config.form == StepForm::Consistent {
        for (k, &u) in known.iter_mut().zip(&problem.u0) {
            *k += u;
        }
    }

    let mut v = v_n.to_vec();
    let mut fv = vec![0.0; d];
    let mut residual = vec![0.0; d];
    let mut trace = Vec::new();
    let mut iterations = 0;
    loop {
        problem.system.rhs(t_np1, &v, &mut fv);
        for i in 0..d {
            residual[i] = v[i] - w0 * fv[i] - known[i];
        }
        let norm = inf_norm(&residual);
        trace.push(norm);
        if norm <= config.newton_tol {
            break;
        }
        if iterations == config.newton_max_iter || !norm.is_finite() {
            return Err(Error::StepFailure {
                step: step_index,
                iterations,
                trace,
            });
        }
        let jf = jacobian_at(&problem.system, t_np1, &v, &fv);
        let jg = DMatrix::identity(d, d) - jf * w0;
        let rhs = DVector::from_column_slice(&residual);
        let delta = jg.lu().solve(&rhs).ok_or_else(|| Error::StepFailure {
            step: step_index,
            iterations,
            trace: trace.clone(),
        })?;
        for i in 0..d {
            v[i] -= delta[i];
        }
        iterations += 1;
    }

    phi_step(state, f_n, &fv, h, config.form);
    Ok(StepOutcome {
        v,
        f: fv,
        iterations,
    })
}

/// Number of steps `N` with `N h ≤ T < (N + 1) h`, tolerant of `T/h` landing
/// a rounding error below an integer.
pub fn step_count(horizon: f64, h: f64) -> usize {
    let q = horizon / h;
    let nearest = q.round();
    if (q - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest as usize
    } else {
        q.floor() as usize
    }
}

/// Output of [`solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `states[n]` is `v^n`.
    pub states: Vec<Vec<f64>>,
    /// Newton iterations spent on step `n` (0 for the initial state).
    pub newton_iters: Vec<usize>,
    /// The exponential sum used for the history, built with `δ = h`.
    pub kernel: ExponentialSum,
    pub estimate: ErrorEstimate,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Component `i` of every state.
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[i]).collect()
    }

    /// CSV with columns `t`, the given component names and `newton_iters`,
    /// numbers written with 17 significant digits.
    pub fn to_table(&self, names: &[&str]) -> String {
        let mut out = String::new();
        out.push('t');
        for n in names {
            out.push(',');
            out.push_str(n);
        }
        out.push_str(",newton_iters\n");
        for ((t, s), it) in self.times.iter().zip(&self.states).zip(&self.newton_iters) {
            let _ = write!(out, "{t:.16e}");
            for v in s {
                let _ = write!(out, ",{v:.16e}");
            }
            let _ = writeln!(out, ",{it}");
        }
        out
    }
}

/// Builds the kernel for `δ = h` and marches from `t_0 = 0` to `t_N`.
pub fn solve<S: FdeSystem>(problem: &FdeProblem<S>, config: &SolverConfig) -> Result<Trajectory> {
    let h = config.h;
    if !(h > 0.0 && h < problem.horizon) {
        return Err(domain(format!("step {h} must lie in (0, T = {})", problem.horizon)));
    }
    if !(config.newton_tol > 0.0) || config.newton_max_iter == 0 {
        return Err(domain("Newton tolerance must be positive and the iteration cap at least 1"));
    }
    let (k, j) = select_parameters(problem.alpha, h, problem.horizon, config.eps_kernel, config.calibration)?;
    let kernel = compress(problem.alpha, h, problem.horizon, k, j)?;
    let estimate = estimate_error(problem.alpha, h, problem.horizon, k, j, config.calibration)?;
    let steps = step_count(problem.horizon, h);
    let d = problem.dim();

    let mut state = init_state(&kernel, d)?;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut newton_iters = Vec::with_capacity(steps + 1);

    let mut v = problem.u0.clone();
    let mut f = vec![0.0; d];
    problem.system.rhs(0.0, &v, &mut f);
    times.push(0.0);
    states.push(v.clone());
    newton_iters.push(0);

    for n in 0..steps {
        let t_n = n as f64 * h;
        let out = tr_step(problem, config, &mut state, n + 1, t_n, &v, &f)?;
        v = out.v;
        f = out.f;
        times.push((n + 1) as f64 * h);
        states.push(v.clone());
        newton_iters.push(out.iterations);
    }

    Ok(Trajectory {
        times,
        states,
        newton_iters,
        kernel,
        estimate,
    })
}

/// Largest component-wise difference between a run with step `h` and one
/// with step `h/2`, compared at the coarse times.
pub fn self_convergence_gap(coarse: &Trajectory, fine: &Trajectory) -> f64 {
    coarse
        .states
        .iter()
        .zip(fine.states.iter().step_by(2))
        .map(|(a, b)| a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())))
        .fold(0.0, f64::max)
}
