use serde::Serialize;

use super::energy::EnergyRecord;
use crate::error::{Error, Result};

/// Least-squares fit `H(t) ~ c0_fit * exp(-c1_fit * t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub c0_fit: f64,
    pub c1_fit: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub n_records: usize,
}

pub const MIN_FIT_RECORDS: usize = 10;

/// Window starting at 20% of the recorded span, skipping early transients.
pub fn default_window(records: &[EnergyRecord]) -> Option<(f64, f64)> {
    let (first, last) = (records.first()?.t, records.last()?.t);
    Some((first + 0.2 * (last - first), last))
}

/// Fits `log H = log C0 - C1 t` over the records with `t` in the closed window.
pub fn fit_decay(records: &[EnergyRecord], window: (f64, f64)) -> Result<DecayFit> {
    let (t0, t1) = window;
    if !(t0 <= t1) {
        return Err(Error::Fit(format!("empty window [{t0:e}, {t1:e}]")));
    }
    // absorb the rounding of t = n dt at the window ends
    let slack = 1e-9 * t0.abs().max(t1.abs());
    let pts: Vec<&EnergyRecord> = records.iter().filter(|r| r.t >= t0 - slack && r.t <= t1 + slack).collect();
    if pts.len() < MIN_FIT_RECORDS {
        return Err(Error::Fit(format!(
            "{} records in window, at least {MIN_FIT_RECORDS} required",
            pts.len()
        )));
    }
    if let Some(r) = pts.iter().find(|r| !(r.hamiltonian > 0.0)) {
        return Err(Error::Fit(format!("non-positive energy {:e} at t = {:e}", r.hamiltonian, r.t)));
    }
    let n = pts.len() as f64;
    let tm = pts.iter().map(|r| r.t).sum::<f64>() / n;
    let ym = pts.iter().map(|r| r.hamiltonian.ln()).sum::<f64>() / n;
    let (mut stt, mut sty, mut syy) = (0.0, 0.0, 0.0);
    for r in &pts {
        let (dt, dy) = (r.t - tm, r.hamiltonian.ln() - ym);
        stt += dt * dt;
        sty += dt * dy;
        syy += dy * dy;
    }
    if stt == 0.0 {
        return Err(Error::Fit("all records share one time".into()));
    }
    let slope = sty / stt;
    let intercept = ym - slope * tm;
    let ss_res = syy - slope * sty;
    let r_squared = if syy == 0.0 { 1.0 } else { (1.0 - ss_res / syy).clamp(0.0, 1.0) };
    Ok(DecayFit {
        c0_fit: intercept.exp(),
        c1_fit: -slope,
        r_squared,
        window,
        n_records: pts.len(),
    })
}
