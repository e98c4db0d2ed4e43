use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;

use super::config::{InitialKind, SimConfig};
use super::csv_out::{field_samples, profile_samples, write_energy_csv, write_field_csv, write_profile_csv};
use crate::diagnostics::{default_window, fit_decay, DecayFit, EnergyAudit, EnergyRecorder, NewtonStats};
use crate::error::Result;
use crate::fem::MixedSpace;
use crate::mesh::Mesh;
use crate::model::{Discretization, State};
use crate::timestepper::{run, step_count, StepEvent};

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub name: String,
    pub model: String,
    pub steps: usize,
    pub t_end: f64,
    pub initial_hamiltonian: f64,
    pub final_hamiltonian: f64,
    pub max_hamiltonian: f64,
    /// `max_t H(t) > H(0)`.
    pub energy_increased: bool,
    pub energy_audit: EnergyAudit,
    pub decay_fit: Option<DecayFit>,
    pub decay_fit_error: Option<String>,
    pub newton_mean_iters: f64,
    pub newton_max_iters: usize,
    pub newton_max_final_residual: f64,
    pub snapshots: Vec<PathBuf>,
}

/// Discretization and initial state described by a configuration.
pub fn build(cfg: &SimConfig) -> Result<(Discretization, State)> {
    let d = &cfg.domain;
    let mesh = if d.dim == 1 { Mesh::interval(d.length, d.n)? } else { Mesh::square(d.length, d.n)? };
    let space = Arc::new(MixedSpace::new(Arc::new(mesh), d.k)?);
    let disc = Discretization::new(cfg.model_params()?, space.clone());
    let init = &cfg.initial;
    let (amp, width, length) = (init.amplitude, init.width, d.length);
    let center = init.center.clone();
    let h0 = move |x: &[f64]| match init.kind {
        InitialKind::Gaussian => {
            let r2: f64 = x.iter().zip(&center).map(|(a, b)| (a - b) * (a - b)).sum();
            amp * (-r2 / (2.0 * width * width)).exp()
        }
        InitialKind::Sine => amp * x.iter().map(|xi| (std::f64::consts::PI * xi / length).sin()).product::<f64>(),
        InitialKind::Zero => 0.0,
    };
    let state = State::interpolate(&space, h0, |_, v| v.fill(0.0), 0.0);
    Ok((disc, state))
}

/// File name of the snapshot at configured time `t`, e.g. `profile_2e-5.csv`.
pub fn snapshot_name(dim: usize, t: f64) -> String {
    let stem = if dim == 1 { "profile" } else { "field" };
    format!("{stem}_{t:e}.csv")
}

fn write_snapshot(cfg: &SimConfig, dir: &Path, t: f64, e: &StepEvent<'_>) -> Result<PathBuf> {
    let path = dir.join(snapshot_name(cfg.domain.dim, t));
    if cfg.domain.dim == 1 {
        write_profile_csv(&profile_samples(e.disc.space(), e.state, cfg.output.profile_samples_per_cell)?, &path)?;
    } else {
        write_field_csv(&field_samples(e.disc.space(), e.state, cfg.output.field_lattice)?, &path)?;
    }
    Ok(path)
}

/// Runs a configured simulation and writes `config.toml`, `energy.csv`,
/// the snapshots and `report.json` into the output directory.
pub fn run_experiment(cfg: &SimConfig) -> Result<RunReport> {
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.toml"), cfg.to_toml())?;

    let (disc, init) = build(cfg)?;
    let step_cfg = cfg.step_config();
    let n_steps = step_count(0.0, cfg.time.t_end, cfg.time.dt)?;
    let mut snaps: Vec<(usize, f64)> = cfg
        .time
        .snapshots
        .iter()
        .map(|&t| Ok((step_count(0.0, t, cfg.time.dt)?, t)))
        .collect::<Result<_>>()?;
    snaps.sort_by_key(|s| s.0);

    let mut energy = EnergyRecorder::new();
    let mut newton = NewtonStats::default();
    let mut written = Vec::new();
    let mut snapshot_writer = |e: &StepEvent<'_>| -> Result<()> {
        for &(_, t) in snaps.iter().filter(|s| s.0 == e.step) {
            written.push(write_snapshot(cfg, dir, t, e)?);
        }
        Ok(())
    };
    let outcome = run(&disc, init, cfg.time.t_end, &step_cfg, &mut [&mut energy, &mut newton, &mut snapshot_writer]);
    // whatever was recorded before a failure is still useful
    write_energy_csv(&energy.records, &dir.join("energy.csv"))?;
    let final_state = outcome?;

    let (decay_fit, decay_fit_error) = match default_window(&energy.records).map(|w| fit_decay(&energy.records, w)) {
        Some(Ok(f)) => (Some(f), None),
        Some(Err(e)) => (None, Some(e.to_string())),
        None => (None, Some("no records".into())),
    };
    let audit = energy.audit.clone();
    let report = RunReport {
        name: cfg.name.clone(),
        model: format!("{:?}", cfg.model.kind).to_lowercase(),
        steps: n_steps,
        t_end: final_state.t,
        initial_hamiltonian: audit.initial_hamiltonian,
        final_hamiltonian: energy.records.last().map_or(0.0, |r| r.hamiltonian),
        max_hamiltonian: audit.max_hamiltonian,
        energy_increased: audit.max_hamiltonian > audit.initial_hamiltonian,
        energy_audit: audit,
        decay_fit,
        decay_fit_error,
        newton_mean_iters: newton.mean_iters(),
        newton_max_iters: newton.max_iters,
        newton_max_final_residual: newton.max_final_residual,
        snapshots: written,
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    fs::write(dir.join("report.json"), json + "\n")?;
    Ok(report)
}
