use serde::Serialize;

use crate::error::Result;
use crate::model::{Discretization, State};
use crate::timestepper::{Observer, StepEvent};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyRecord {
    pub t: f64,
    pub hamiltonian: f64,
    pub dissipation: f64,
    pub skew_term: f64,
}

pub fn record_energy(disc: &Discretization, state: &State) -> Result<EnergyRecord> {
    let pb = disc.power_balance(state)?;
    Ok(EnergyRecord {
        t: state.t,
        hamiltonian: disc.hamiltonian(state)?,
        dissipation: pb.dissipation,
        skew_term: pb.skew_term,
    })
}

/// Allowed energy increase for one midpoint step of a `c = 2d` model.
///
/// The fully discrete balance is
/// `H^n - H^{n-1} = -dt D + dt <R, (c0^2 v, h)> - a/12 int (h^n - h^{n-1})^3`
/// with `D >= 0` evaluated at the midpoint and `R` the Newton residual. The
/// band is the residual term bounded by the tolerance plus ten times the
/// magnitude of the cubic defect, which is `dt^3 a/12 ||h_t||^3_{L^3}`.
pub fn energy_step_band(disc: &Discretization, prev: &State, next: &State, dt: f64, newton_tol: f64) -> f64 {
    let c0sq = disc.params.c0 * disc.params.c0;
    let dual: f64 = prev
        .v
        .iter()
        .zip(&next.v)
        .map(|(a, b)| (0.5 * c0sq * (a + b)).powi(2))
        .chain(prev.h.iter().zip(&next.h).map(|(a, b)| (0.5 * (a + b)).powi(2)))
        .sum::<f64>()
        .sqrt();
    let jump = State {
        v: vec![0.0; next.v.len()],
        h: next.h.iter().zip(&prev.h).map(|(a, b)| a - b).collect(),
        t: next.t,
    };
    let cubic = disc.params.a.abs() / 12.0 * disc.integrate_scalar(&jump, |h, _, _| h.abs().powi(3));
    dt * newton_tol * dual + 10.0 * cubic
}

/// Step-to-step energy bookkeeping for a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EnergyAudit {
    pub increasing_steps: usize,
    /// Steps whose increase exceeds [`energy_step_band`].
    pub out_of_band_steps: usize,
    /// Largest `(H^n - H^{n-1}) / band` seen; below 1 means within the band.
    pub worst_band_ratio: f64,
    pub max_hamiltonian: f64,
    pub initial_hamiltonian: f64,
}

/// Observer collecting one [`EnergyRecord`] per state, the initial one included.
#[derive(Debug, Default)]
pub struct EnergyRecorder {
    pub records: Vec<EnergyRecord>,
    pub audit: EnergyAudit,
}

impl EnergyRecorder {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Observer for EnergyRecorder {
    fn observe(&mut self, e: &StepEvent<'_>) -> Result<()> {
        let rec = record_energy(e.disc, e.state)?;
        if let (Some(prev_state), Some(prev), Some(report)) = (e.previous, self.records.last(), e.report) {
            let inc = rec.hamiltonian - prev.hamiltonian;
            if inc > 0.0 {
                self.audit.increasing_steps += 1;
                let band = energy_step_band(e.disc, prev_state, e.state, e.dt, report.tolerance);
                let ratio = inc / band;
                self.audit.worst_band_ratio = self.audit.worst_band_ratio.max(ratio);
                if ratio > 1.0 {
                    self.audit.out_of_band_steps += 1;
                }
            }
        } else {
            self.audit.initial_hamiltonian = rec.hamiltonian;
            self.audit.max_hamiltonian = rec.hamiltonian;
        }
        self.audit.max_hamiltonian = self.audit.max_hamiltonian.max(rec.hamiltonian);
        self.records.push(rec);
        Ok(())
    }
}

/// Newton iteration statistics over a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct NewtonStats {
    pub steps: usize,
    pub total_iters: usize,
    pub max_iters: usize,
    pub max_final_residual: f64,
}

impl NewtonStats {
    pub fn mean_iters(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.total_iters as f64 / self.steps as f64
        }
    }
}

impl Observer for NewtonStats {
    fn observe(&mut self, e: &StepEvent<'_>) -> Result<()> {
        if let Some(r) = e.report {
            self.steps += 1;
            self.total_iters += r.newton_iters;
            self.max_iters = self.max_iters.max(r.newton_iters);
            self.max_final_residual = self.max_final_residual.max(r.final_residual_norm);
        }
        Ok(())
    }
}
