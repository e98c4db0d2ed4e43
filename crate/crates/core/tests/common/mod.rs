#![allow(dead_code)]

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nlacoustics::fem::MixedSpace;
use nlacoustics::mesh::Mesh;
use nlacoustics::model::{Discretization, ModelKind, ModelParams, State};

pub const GAMMA: f64 = 6.0;
pub const C0: f64 = 1500.0;
pub const B: f64 = 6e-9;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn space_1d(n: usize) -> Arc<MixedSpace> {
    Arc::new(MixedSpace::new(Arc::new(Mesh::interval(0.4, n).unwrap()), 1).unwrap())
}

pub fn space_2d(n: usize) -> Arc<MixedSpace> {
    Arc::new(MixedSpace::new(Arc::new(Mesh::square(0.4, n).unwrap()), 1).unwrap())
}

pub fn preset(kind: ModelKind) -> ModelParams {
    ModelParams::preset(kind, GAMMA, C0, B).unwrap()
}

/// Every preset plus a model with all four coefficients nonzero and `c != 2d`.
pub fn all_models() -> Vec<(String, ModelParams)> {
    let mut out: Vec<(String, ModelParams)> = ModelKind::ALL.iter().map(|&k| (k.to_string(), preset(k))).collect();
    out.push(("custom".into(), ModelParams::new(0.3, 0.01, 0.7, 0.2, 2.0).unwrap()));
    out
}

/// Random state with `|v| <= v_scale`, `|h| <= h_scale` and zero boundary enthalpy.
pub fn random_state(space: &MixedSpace, rng: &mut impl Rng, v_scale: f64, h_scale: f64) -> State {
    let mut s = State::zeros(space, 0.0);
    s.v.iter_mut().for_each(|x| *x = v_scale * rng.random_range(-1.0..1.0));
    s.h.iter_mut().for_each(|x| *x = h_scale * rng.random_range(-1.0..1.0));
    for &d in space.dirichlet_dofs() {
        s.h[d] = 0.0;
    }
    s
}

/// State scaled to the model: `a |h| <= 0.4` and `c0 |v| ~ |h|`.
pub fn physical_state(disc: &Discretization, rng: &mut impl Rng) -> State {
    let p = &disc.params;
    let h_scale = if p.a != 0.0 { 0.4 / p.a.abs() } else { 1e5 };
    random_state(disc.space(), rng, h_scale / p.c0, h_scale)
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Errors of the analytic Jacobian of the midpoint map
/// `x -> R((x + prev)/2, (x - prev)/dt)` along one direction.
pub struct JacobianCheck {
    pub eps: Vec<f64>,
    /// `||F(x + e d) - F(x) - e J d||`
    pub taylor: Vec<f64>,
    /// `||(F(x + e d) - F(x - e d)) / 2e - J d||`
    pub central: Vec<f64>,
    /// `||J d||`
    pub jd_norm: f64,
}

impl JacobianCheck {
    /// Observed orders of the Taylor remainder between consecutive step sizes.
    pub fn taylor_orders(&self) -> Vec<f64> {
        self.taylor
            .windows(2)
            .zip(self.eps.windows(2))
            .map(|(e, h)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
            .collect()
    }

    pub fn worst_central(&self) -> f64 {
        self.central.iter().fold(0.0f64, |m, &e| m.max(e)) / self.jd_norm
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn check_jacobian(disc: &Discretization, prev: &State, x: &State, dir: &State, dt: f64, eps: &[f64]) -> JacobianCheck {
    let map = |s: &State| {
        let mid = State {
            v: s.v.iter().zip(&prev.v).map(|(a, b)| 0.5 * (a + b)).collect(),
            h: s.h.iter().zip(&prev.h).map(|(a, b)| 0.5 * (a + b)).collect(),
            t: prev.t + 0.5 * dt,
        };
        let rate = State {
            v: s.v.iter().zip(&prev.v).map(|(a, b)| (a - b) / dt).collect(),
            h: s.h.iter().zip(&prev.h).map(|(a, b)| (a - b) / dt).collect(),
            t: mid.t,
        };
        (disc.residual(&mid, &rate).unwrap(), mid, rate)
    };
    let (f0, mid, rate) = map(x);
    let jac = disc.jacobian(&mid, &rate, 0.5, 1.0 / dt).unwrap();
    let mut jd = jac.mul_vec(&dir.to_vec());
    // boundary rows are identity in the Jacobian and zero in the residual
    let nv = disc.space().n_v_dofs();
    for &d in disc.space().dirichlet_dofs() {
        jd[nv + d] = 0.0;
    }
    let shifted = |e: f64| State {
        v: x.v.iter().zip(&dir.v).map(|(a, b)| a + e * b).collect(),
        h: x.h.iter().zip(&dir.h).map(|(a, b)| a + e * b).collect(),
        t: x.t,
    };
    let mut out = JacobianCheck { eps: eps.to_vec(), taylor: Vec::new(), central: Vec::new(), jd_norm: norm(&jd) };
    for &e in eps {
        let fp = map(&shifted(e)).0;
        let fm = map(&shifted(-e)).0;
        let taylor: Vec<f64> = fp.iter().zip(&f0).zip(&jd).map(|((p, z), j)| p - z - e * j).collect();
        let central: Vec<f64> = fp.iter().zip(&fm).zip(&jd).map(|((p, m), j)| (p - m) / (2.0 * e) - j).collect();
        out.taylor.push(norm(&taylor));
        out.central.push(norm(&central));
    }
    out
}

/// Defect of the semi-discrete power balance `dH/dt = -D + S` at `s`.
///
/// The identity is a cancellation between the kinetic and potential exchange
/// terms, which are many orders of magnitude larger than `D` in physical
/// units, so the defect is measured relative to their size.
pub fn power_balance_defect(disc: &Discretization, s: &State) -> f64 {
    let rates = disc.semi_discrete_rates(s).unwrap();
    let only_v = State { v: rates.v.clone(), h: vec![0.0; rates.h.len()], t: s.t };
    let only_h = State { v: vec![0.0; rates.v.len()], h: rates.h.clone(), t: s.t };
    let kinetic = disc.hamiltonian_derivative(s, &only_v).unwrap();
    let potential = disc.hamiltonian_derivative(s, &only_h).unwrap();
    let pb = disc.power_balance(s).unwrap();
    let expected = -pb.dissipation + pb.skew_term;
    let scale = kinetic.abs() + potential.abs() + pb.dissipation + pb.skew_term.abs();
    (kinetic + potential - expected).abs() / scale
}
