//! Implicit midpoint time stepping with Newton's method.
//!
//! A step from `x^{n-1}` solves `R(mid, rate) = 0` for `x^n`, where
//! `mid = (x^n + x^{n-1}) / 2` and `rate = (x^n - x^{n-1}) / dt`; sources are
//! evaluated at `t^{n-1/2}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{BlockCondensedLu, Factorization, SparseLu, SparseOperator};
use crate::model::{Discretization, State};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinearSolver {
    /// Sparse LU of the full Jacobian.
    Direct,
    /// Eliminates the cell-local velocity blocks first and factorizes the
    /// enthalpy Schur complement; same solution, much cheaper in 2D.
    #[default]
    Condensed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepConfig {
    pub dt: f64,
    /// Tolerance on the Euclidean residual norm. With `scale_tol_by_state`
    /// it is multiplied by `1 + ||M x^{n-1}|| / dt`, the size the rate term
    /// `M (x - x^{n-1}) / dt` of the residual would have for a change of the
    /// order of the state itself; the update is then resolved to about
    /// `newton_tol` relative to the state, independently of `dt` and the mesh.
    pub newton_tol: f64,
    pub scale_tol_by_state: bool,
    pub newton_max_iters: usize,
    /// Backtracking halvings allowed when a full step increases the residual.
    pub max_halvings: usize,
    pub reuse_factorization: bool,
    pub linear_solver: LinearSolver,
}

impl Default for StepConfig {
    fn default() -> Self {
        StepConfig {
            dt: 1e-7,
            newton_tol: 1e-10,
            scale_tol_by_state: true,
            newton_max_iters: 20,
            max_halvings: 8,
            reuse_factorization: false,
            linear_solver: LinearSolver::Condensed,
        }
    }
}

impl StepConfig {
    pub fn with_dt(dt: f64) -> Self {
        StepConfig { dt, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {}", self.dt)));
        }
        if !(self.newton_tol > 0.0) {
            return Err(Error::InvalidArgument(format!("newton tolerance must be positive, got {}", self.newton_tol)));
        }
        if self.newton_max_iters == 0 {
            return Err(Error::InvalidArgument("newton_max_iters must be at least 1".into()));
        }
        Ok(())
    }

    fn tolerance(&self, disc: &Discretization, prev: &State) -> f64 {
        if self.scale_tol_by_state {
            let ops = disc.operators();
            let mv = ops.mass_v.mul_vec(&prev.v);
            let mh = ops.mass_h.mul_vec(&prev.h);
            let scale = mv.iter().chain(&mh).map(|x| x * x).sum::<f64>().sqrt() / self.dt;
            self.newton_tol * (1.0 + scale)
        } else {
            self.newton_tol
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepReport {
    pub newton_iters: usize,
    pub final_residual_norm: f64,
    pub tolerance: f64,
    pub converged: bool,
    /// Residual norm before each Newton update and after the last one.
    pub residual_history: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iters: usize,
    pub max_halvings: usize,
    pub reuse_factorization: bool,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { tol: 1e-10, max_iters: 20, max_halvings: 8, reuse_factorization: false }
    }
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub x: Vec<f64>,
    pub iters: usize,
    pub residual_norm: f64,
    pub history: Vec<f64>,
}

fn norm(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Newton's method with full steps, backtracking only when the residual grows.
pub fn newton_solve<R, J>(residual: R, jacobian: J, x0: Vec<f64>, opts: &NewtonOptions) -> Result<NewtonOutcome>
where
    R: FnMut(&[f64]) -> Result<Vec<f64>>,
    J: FnMut(&[f64]) -> Result<SparseOperator>,
{
    newton_solve_with(residual, jacobian, x0, opts, &mut SparseLu::new())
}

/// As [`newton_solve`] with a caller-owned solver, so that symbolic analysis
/// survives across calls.
pub fn newton_solve_with<R, J, F>(
    mut residual: R,
    mut jacobian: J,
    x0: Vec<f64>,
    opts: &NewtonOptions,
    lu: &mut F,
) -> Result<NewtonOutcome>
where
    R: FnMut(&[f64]) -> Result<Vec<f64>>,
    J: FnMut(&[f64]) -> Result<SparseOperator>,
    F: Factorization + ?Sized,
{
    let mut x = x0;
    let mut r = residual(&x)?;
    let mut rnorm = norm(&r);
    let mut history = vec![rnorm];
    let mut factored = false;
    for it in 0..opts.max_iters {
        if rnorm <= opts.tol {
            return Ok(NewtonOutcome { x, iters: it, residual_norm: rnorm, history });
        }
        if !(factored && opts.reuse_factorization) {
            lu.factor(&jacobian(&x)?)?;
            factored = true;
        }
        let mut delta: Vec<f64> = r.iter().map(|v| -v).collect();
        lu.solve_in_place(&mut delta)?;

        let mut lambda = 1.0;
        let mut halvings = 0;
        loop {
            let trial: Vec<f64> = x.iter().zip(&delta).map(|(a, b)| a + lambda * b).collect();
            let attempt = residual(&trial);
            let accept = match &attempt {
                Ok(rt) => norm(rt) <= rnorm || halvings >= opts.max_halvings,
                Err(Error::DegenerateCoefficient { .. }) if halvings < opts.max_halvings => false,
                Err(_) => true,
            };
            if accept {
                r = attempt?;
                rnorm = norm(&r);
                x = trial;
                break;
            }
            lambda *= 0.5;
            halvings += 1;
        }
        history.push(rnorm);
    }
    if rnorm <= opts.tol {
        return Ok(NewtonOutcome { x, iters: opts.max_iters, residual_norm: rnorm, history });
    }
    Err(Error::NewtonDiverged { iters: opts.max_iters, residual: rnorm, tol: opts.tol })
}

/// Advances one discretization with a fixed step size, keeping the sparse
/// symbolic analysis between steps.
pub struct Stepper<'a> {
    disc: &'a Discretization,
    cfg: StepConfig,
    lu: Box<dyn Factorization + Send>,
}

impl<'a> Stepper<'a> {
    pub fn new(disc: &'a Discretization, cfg: StepConfig) -> Result<Self> {
        cfg.validate()?;
        let lu: Box<dyn Factorization + Send> = match cfg.linear_solver {
            LinearSolver::Direct => Box::new(SparseLu::new()),
            LinearSolver::Condensed => {
                let space = disc.space();
                Box::new(BlockCondensedLu::new(space.n_v_dofs(), space.v_dofs_per_cell())?)
            }
        };
        Ok(Stepper { disc, cfg, lu })
    }

    pub fn config(&self) -> &StepConfig {
        &self.cfg
    }

    pub fn step(&mut self, prev: &State) -> Result<(State, StepReport)> {
        let disc = self.disc;
        let dt = self.cfg.dt;
        let nv = disc.space().n_v_dofs();
        let x_prev = prev.to_vec();
        let t_mid = prev.t + 0.5 * dt;
        let split = |x: &[f64]| {
            let mid: Vec<f64> = x.iter().zip(&x_prev).map(|(a, b)| 0.5 * (a + b)).collect();
            let rate: Vec<f64> = x.iter().zip(&x_prev).map(|(a, b)| (a - b) / dt).collect();
            (State::from_vec(&mid, nv, t_mid), State::from_vec(&rate, nv, t_mid))
        };
        let tol = self.cfg.tolerance(disc, prev);
        let opts = NewtonOptions {
            tol,
            max_iters: self.cfg.newton_max_iters,
            max_halvings: self.cfg.max_halvings,
            reuse_factorization: self.cfg.reuse_factorization,
        };
        let out = newton_solve_with(
            |x| {
                let (mid, rate) = split(x);
                disc.residual(&mid, &rate)
            },
            |x| {
                let (mid, rate) = split(x);
                disc.jacobian_raw(&mid, &rate, 0.5, 1.0 / dt)
            },
            x_prev.clone(),
            &opts,
            self.lu.as_mut(),
        )?;
        let mut next = State::from_vec(&out.x, nv, prev.t + dt);
        for &d in disc.space().dirichlet_dofs() {
            next.h[d] = 0.0;
        }
        let report = StepReport {
            newton_iters: out.iters,
            final_residual_norm: out.residual_norm,
            tolerance: tol,
            converged: true,
            residual_history: out.history,
        };
        Ok((next, report))
    }
}

/// One implicit midpoint step from `prev`.
pub fn midpoint_step(disc: &Discretization, prev: &State, cfg: &StepConfig) -> Result<(State, StepReport)> {
    Stepper::new(disc, cfg.clone())?.step(prev)
}

/// What observers see: the initial state (`step == 0`, no report) and every
/// accepted step afterwards.
pub struct StepEvent<'a> {
    pub step: usize,
    pub state: &'a State,
    pub previous: Option<&'a State>,
    pub report: Option<&'a StepReport>,
    pub disc: &'a Discretization,
    pub dt: f64,
}

pub trait Observer {
    fn observe(&mut self, event: &StepEvent<'_>) -> Result<()>;
}

impl<F> Observer for F
where
    F: FnMut(&StepEvent<'_>) -> Result<()>,
{
    fn observe(&mut self, event: &StepEvent<'_>) -> Result<()> {
        self(event)
    }
}

/// Number of steps of size `dt` from `t0` to `t_end`; the interval must be an
/// integer multiple of `dt` to 1e-9 relative.
pub fn step_count(t0: f64, t_end: f64, dt: f64) -> Result<usize> {
    let span = t_end - t0;
    if span < 0.0 {
        return Err(Error::InvalidArgument(format!("t_end = {t_end:e} precedes t0 = {t0:e}")));
    }
    if span == 0.0 {
        return Ok(0);
    }
    let n = (span / dt).round();
    if n < 1.0 || (n * dt - span).abs() > 1e-9 * span {
        return Err(Error::InvalidArgument(format!(
            "time span {span:e} is not an integer multiple of dt = {dt:e}"
        )));
    }
    Ok(n as usize)
}

/// Integrates from `initial` to `t_end`, calling every observer on the initial
/// state and after each step.
pub fn run(
    disc: &Discretization,
    initial: State,
    t_end: f64,
    cfg: &StepConfig,
    observers: &mut [&mut dyn Observer],
) -> Result<State> {
    cfg.validate()?;
    initial.check(disc.space())?;
    let n_steps = step_count(initial.t, t_end, cfg.dt)?;
    let t0 = initial.t;
    for obs in observers.iter_mut() {
        obs.observe(&StepEvent { step: 0, state: &initial, previous: None, report: None, disc, dt: cfg.dt })?;
    }
    let mut stepper = Stepper::new(disc, cfg.clone())?;
    let mut current = initial;
    for n in 1..=n_steps {
        let (mut next, report) = stepper.step(&current).map_err(|e| Error::StepFailed {
            step: n,
            t: current.t,
            source: Box::new(e),
        })?;
        next.t = t0 + n as f64 * cfg.dt;
        for obs in observers.iter_mut() {
            obs.observe(&StepEvent {
                step: n,
                state: &next,
                previous: Some(&current),
                report: Some(&report),
                disc,
                dt: cfg.dt,
            })?;
        }
        current = next;
    }
    Ok(current)
}
