use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::modal::{modal_reference, ModalOracle};
use super::reference::SemiDiscreteReference;
use crate::error::{Error, Result};
use crate::fem::MixedSpace;
use crate::mesh::Mesh;
use crate::model::{Discretization, ModelKind, ModelParams, State};
use crate::timestepper::{run, StepConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConvergenceKind {
    /// Time step refinement on a fixed mesh against the exact semi-discrete solution.
    Temporal,
    /// Mesh refinement of a linear standing mode against the continuous solution.
    Spatial,
    /// Mesh refinement with a manufactured solution of a nonlinear model.
    Mms,
}

impl fmt::Display for ConvergenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConvergenceKind::Temporal => "temporal",
            ConvergenceKind::Spatial => "spatial",
            ConvergenceKind::Mms => "mms",
        })
    }
}

impl FromStr for ConvergenceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "temporal" => Ok(ConvergenceKind::Temporal),
            "spatial" => Ok(ConvergenceKind::Spatial),
            "mms" => Ok(ConvergenceKind::Mms),
            other => Err(Error::InvalidArgument(format!("unknown convergence kind '{other}'"))),
        }
    }
}

/// Parameters of a refinement study. `n` and `dt` describe the coarsest level;
/// each further level halves `dt` (temporal) or the mesh size (otherwise).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceSetup {
    pub kind: ConvergenceKind,
    pub model: ModelKind,
    pub gamma: f64,
    pub c0: f64,
    pub b: f64,
    pub length: f64,
    pub k: usize,
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub levels: usize,
    /// Enthalpy amplitude of the initial mode or manufactured solution.
    pub amplitude: f64,
    /// Decay time of the manufactured solution.
    pub decay_time: f64,
}

impl ConvergenceSetup {
    pub fn default_for(kind: ConvergenceKind) -> Self {
        let base = ConvergenceSetup {
            kind,
            model: ModelKind::Linear,
            gamma: 6.0,
            c0: 1500.0,
            b: 6e-9,
            length: 0.4,
            k: 1,
            n: 16,
            dt: 4e-7,
            t_end: 2e-5,
            levels: 3,
            amplitude: 1e5,
            decay_time: 1e-4,
        };
        match kind {
            ConvergenceKind::Temporal => base,
            ConvergenceKind::Spatial => ConvergenceSetup { n: 8, dt: 1e-8, ..base },
            // a * amplitude = 0.31 keeps 1 - a h >= 0.69
            ConvergenceKind::Mms => ConvergenceSetup { model: ModelKind::Westervelt, n: 8, dt: 1e-8, ..base },
        }
    }

    fn validate(&self) -> Result<()> {
        if self.levels < 3 {
            return Err(Error::InvalidArgument(format!("a study needs at least 3 levels, got {}", self.levels)));
        }
        if self.n == 0 || !(self.dt > 0.0) || !(self.t_end > 0.0) || !(self.length > 0.0) {
            return Err(Error::InvalidArgument("n, dt, t_end and length must be positive".into()));
        }
        Ok(())
    }

    fn params(&self) -> Result<ModelParams> {
        ModelParams::preset(self.model, self.gamma, self.c0, self.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    /// `dt` for temporal studies, the cell size otherwise.
    pub resolution: f64,
    pub error: f64,
    /// Order against the previous (coarser) row.
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub kind: ConvergenceKind,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    fn from_errors(kind: ConvergenceKind, data: Vec<(f64, f64)>) -> Self {
        let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(data.len());
        for (i, &(resolution, error)) in data.iter().enumerate() {
            let order = (i > 0).then(|| {
                let (r0, e0) = data[i - 1];
                (e0 / error).ln() / (r0 / resolution).ln()
            });
            rows.push(ConvergenceRow { resolution, error, order });
        }
        ConvergenceTable { kind, rows }
    }

    pub fn orders(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.order).collect()
    }
}

/// `||h - exact||_{L^2}` with the space's quadrature.
pub fn l2_error_h<F>(space: &MixedSpace, h: &[f64], exact: F) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    let q = space.quadrature();
    let tab = space.tabulation();
    let nh = space.h_local();
    let dim = space.dim();
    let mut acc = 0.0;
    for c in 0..space.mesh().n_cells() {
        let geo = space.geometry(c);
        let dofs = space.h_dofs(c);
        for (iq, (p, w)) in q.points.iter().zip(&q.weights).enumerate() {
            let x = geo.map(&p[..dim]);
            let hv: f64 = dofs.iter().zip(&tab.h_phi[iq * nh..(iq + 1) * nh]).map(|(&d, phi)| h[d] * phi).sum();
            let e = hv - exact(&x[..dim]);
            acc += w * geo.det.abs() * e * e;
        }
    }
    acc.sqrt()
}

/// `h* = A e^{-t/tau} sin(pi x / L)`, `v* = (A / c0) e^{-t/tau} cos(pi x / L)`
/// on `(0, L)`, with the sources that make it an exact solution of the
/// general model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedSolution {
    pub amplitude: f64,
    pub length: f64,
    pub c0: f64,
    pub decay_time: f64,
}

impl ManufacturedSolution {
    fn kappa(&self) -> f64 {
        PI / self.length
    }

    fn envelope(&self, t: f64) -> f64 {
        self.amplitude * (-t / self.decay_time).exp()
    }

    pub fn h(&self, x: f64, t: f64) -> f64 {
        self.envelope(t) * (self.kappa() * x).sin()
    }

    pub fn v(&self, x: f64, t: f64) -> f64 {
        self.envelope(t) / self.c0 * (self.kappa() * x).cos()
    }

    /// Returns `params` with the enthalpy forcing and velocity source attached.
    pub fn attach_sources(&self, params: ModelParams) -> ModelParams {
        let ms = *self;
        let (a, b, c, d, c0) = (params.a, params.b, params.c, params.d, params.c0);
        let forcing = move |x: &[f64], t: f64| {
            let k = ms.kappa();
            let (s, co) = (k * x[0]).sin_cos();
            let e = ms.envelope(t);
            let h = e * s;
            let h_t = -h / ms.decay_time;
            let h_x = e * k * co;
            let h_xx = -k * k * h;
            let v = e / ms.c0 * co;
            let v_x = -e / ms.c0 * k * s;
            (1.0 - a * h) * h_t + c0 * c0 * v_x - b * h_xx + c * v * h_x + d * h * v_x
        };
        let source = move |x: &[f64], t: f64, out: &mut [f64]| {
            let k = ms.kappa();
            let e = ms.envelope(t);
            let v_t = -e / ms.c0 * (k * x[0]).cos() / ms.decay_time;
            let h_x = e * k * (k * x[0]).cos();
            out[0] = v_t + h_x;
        };
        params.with_forcing(Arc::new(forcing)).with_velocity_source(Arc::new(source))
    }
}

fn space_1d(length: f64, n: usize, k: usize) -> Result<Arc<MixedSpace>> {
    Ok(Arc::new(MixedSpace::new(Arc::new(Mesh::interval(length, n)?), k)?))
}

fn temporal_level(setup: &ConvergenceSetup, disc: &Discretization, reference: &SemiDiscreteReference, dt: f64) -> Result<(f64, f64)> {
    let (mode, _) = reference.fundamental_mode(disc.space().n_h_dofs())?;
    let init = State { h: mode.h.iter().map(|x| x * setup.amplitude).collect(), ..mode };
    let exact = reference.evolve(&init, setup.t_end);
    let out = run(disc, init, setup.t_end, &StepConfig::with_dt(dt), &mut [])?;
    let e: Vec<f64> = out.h.iter().zip(&exact.h).map(|(a, b)| a - b).collect();
    Ok((dt, disc.operators().mass_h.bilinear(&e, &e).sqrt()))
}

fn spatial_level(setup: &ConvergenceSetup, n: usize) -> Result<(f64, f64)> {
    let space = space_1d(setup.length, n, setup.k)?;
    let disc = Discretization::new(setup.params()?, space.clone());
    let oracle = ModalOracle::new(1, setup.length, setup.b, setup.c0)?;
    let kappa = oracle.kappa();
    let amp = setup.amplitude;
    let init = State::interpolate(&space, |x| amp * (kappa * x[0]).sin(), |_, v| v[0] = 0.0, 0.0);
    let out = run(&disc, init, setup.t_end, &StepConfig::with_dt(setup.dt), &mut [])?;
    let (alpha, _) = modal_reference(&oracle, amp, 0.0, setup.t_end);
    Ok((setup.length / n as f64, l2_error_h(&space, &out.h, |x| alpha * (kappa * x[0]).sin())))
}

fn mms_level(setup: &ConvergenceSetup, n: usize) -> Result<(f64, f64)> {
    let space = space_1d(setup.length, n, setup.k)?;
    let ms = ManufacturedSolution {
        amplitude: setup.amplitude,
        length: setup.length,
        c0: setup.c0,
        decay_time: setup.decay_time,
    };
    let params = ms.attach_sources(setup.params()?);
    let disc = Discretization::new(params, space.clone());
    let mut init = State::interpolate(&space, |x| ms.h(x[0], 0.0), |_, v| v[0] = 0.0, 0.0);
    init.v = space.project_vector(|x, v| v[0] = ms.v(x[0], 0.0));
    let out = run(&disc, init, setup.t_end, &StepConfig::with_dt(setup.dt), &mut [])?;
    Ok((setup.length / n as f64, l2_error_h(&space, &out.h, |x| ms.h(x[0], setup.t_end))))
}

/// Runs every level (concurrently) and reports L2 errors of `h` at `t_end`
/// with observed orders between consecutive levels.
pub fn convergence_study(setup: &ConvergenceSetup) -> Result<ConvergenceTable> {
    setup.validate()?;
    let levels: Vec<usize> = (0..setup.levels).collect();
    let data: Result<Vec<(f64, f64)>> = match setup.kind {
        ConvergenceKind::Temporal => {
            if setup.model != ModelKind::Linear {
                return Err(Error::InvalidArgument("temporal study uses the linear model".into()));
            }
            let disc = Discretization::new(setup.params()?, space_1d(setup.length, setup.n, setup.k)?);
            let reference = SemiDiscreteReference::new(&disc)?;
            levels
                .par_iter()
                .map(|&l| temporal_level(setup, &disc, &reference, setup.dt / (1u64 << l) as f64))
                .collect()
        }
        ConvergenceKind::Spatial => {
            if setup.model != ModelKind::Linear {
                return Err(Error::InvalidArgument("spatial study uses the linear model".into()));
            }
            levels.par_iter().map(|&l| spatial_level(setup, setup.n << l)).collect()
        }
        ConvergenceKind::Mms => levels.par_iter().map(|&l| mms_level(setup, setup.n << l)).collect(),
    };
    Ok(ConvergenceTable::from_errors(setup.kind, data?))
}
