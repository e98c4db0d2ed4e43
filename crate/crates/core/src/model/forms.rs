//! Weak-form terms of the semi-discrete system, its Jacobian and the energy.
//!
//! The unknown is the stacked vector `x = [v; h]`. For a midpoint state
//! `(v, h)` and rates `(v', h')` the residual rows are
//!
//! ```text
//! R_v(w) = (v', w) + (grad h, w) - (g, w)
//! R_h(q) = ((1 - a h) h', q) - c0^2 (v, grad q) + b (grad h, grad q)
//!          + (c - d) (v.grad h, q) - d (h, v.grad q) - (f, q)
//! ```
//!
//! Rows belonging to boundary enthalpy dofs are zero in the residual and
//! identity rows in the Jacobian.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::{MixedSpace, Operators, SparseLu, SparseOperator};
use crate::model::params::{DegeneracyPolicy, ModelParams};
use crate::model::state::State;

const CELL_CHUNK: usize = 128;

/// Model coefficients bound to a mixed space and its constant operators.
pub struct Discretization {
    pub params: ModelParams,
    space: Arc<MixedSpace>,
    ops: Operators,
    pattern: SparseOperator,
}

/// Energy balance terms at one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBalance {
    /// `b ||grad h||^2`
    pub dissipation: f64,
    /// `(2d - c) (v.grad h, h)`
    pub skew_term: f64,
}

struct Workspace {
    res: Vec<f64>,
    jac: Vec<f64>,
    phi_v: Vec<f64>,
    phi_h: Vec<f64>,
    grad_h: Vec<[f64; 2]>,
}

impl Discretization {
    pub fn new(params: ModelParams, space: Arc<MixedSpace>) -> Self {
        let ops = Operators::assemble(&space);
        Self::with_operators(params, space, ops)
    }

    pub fn with_operators(params: ModelParams, space: Arc<MixedSpace>, ops: Operators) -> Self {
        let pattern = jacobian_pattern(&space);
        Discretization { params, space, ops, pattern }
    }

    pub fn space(&self) -> &MixedSpace {
        &self.space
    }

    pub fn space_arc(&self) -> Arc<MixedSpace> {
        self.space.clone()
    }

    pub fn operators(&self) -> &Operators {
        &self.ops
    }

    pub fn n_dofs(&self) -> usize {
        self.space.n_v_dofs() + self.space.n_h_dofs()
    }

    fn local_size(&self) -> usize {
        self.space.v_dofs_per_cell() + self.space.h_local()
    }

    fn local_to_global(&self, cell: usize, out: &mut [usize]) {
        let nvc = self.space.v_dofs_per_cell();
        for (o, g) in out.iter_mut().zip(self.space.v_dofs(cell)) {
            *o = g;
        }
        let nv = self.space.n_v_dofs();
        for (o, &g) in out[nvc..].iter_mut().zip(self.space.h_dofs(cell)) {
            *o = nv + g;
        }
    }

    fn check_dims(&self, s: &State) -> Result<()> {
        if s.v.len() != self.space.n_v_dofs() {
            return Err(Error::DimensionMismatch { expected: self.space.n_v_dofs(), got: s.v.len() });
        }
        if s.h.len() != self.space.n_h_dofs() {
            return Err(Error::DimensionMismatch { expected: self.space.n_h_dofs(), got: s.h.len() });
        }
        Ok(())
    }

    fn is_dirichlet_global(&self, g: usize) -> bool {
        let nv = self.space.n_v_dofs();
        g >= nv && self.space.is_dirichlet(g - nv)
    }

    /// Galerkin residual at the midpoint state `mid` (its `t` is used for the
    /// sources) and rates `rate`.
    pub fn residual(&self, mid: &State, rate: &State) -> Result<Vec<f64>> {
        self.check_dims(mid)?;
        self.check_dims(rate)?;
        let nl = self.local_size();
        let locals = self.cell_loop(mid, rate, None)?;
        let mut r = vec![0.0; self.n_dofs()];
        let mut l2g = vec![0; nl];
        for (c, local) in locals.chunks(nl).enumerate() {
            self.local_to_global(c, &mut l2g);
            for (a, &g) in l2g.iter().enumerate() {
                r[g] += local[a];
            }
        }
        for &d in self.space.dirichlet_dofs() {
            r[self.space.n_v_dofs() + d] = 0.0;
        }
        Ok(r)
    }

    /// `dstate_weight * dR/d(mid) + drate_weight * dR/d(rate)`, with identity
    /// rows and columns for boundary enthalpy dofs. Explicit zeros are kept so
    /// the pattern is the same for every call.
    pub fn jacobian_raw(&self, mid: &State, rate: &State, dstate_weight: f64, drate_weight: f64) -> Result<SparseOperator> {
        self.check_dims(mid)?;
        self.check_dims(rate)?;
        let nl = self.local_size();
        let locals = self.cell_loop(mid, rate, Some((dstate_weight, drate_weight)))?;
        let mut jac = self.pattern.clone();
        let row_ptr = jac.row_ptr().to_vec();
        let col_idx = jac.col_idx().to_vec();
        let values = jac.values_mut();
        let mut l2g = vec![0; nl];
        let stride = nl + nl * nl;
        for (c, block) in locals.chunks(stride).enumerate() {
            self.local_to_global(c, &mut l2g);
            let local = &block[nl..];
            for (a, &ga) in l2g.iter().enumerate() {
                if self.is_dirichlet_global(ga) {
                    continue;
                }
                let cols = &col_idx[row_ptr[ga]..row_ptr[ga + 1]];
                for (b, &gb) in l2g.iter().enumerate() {
                    if self.is_dirichlet_global(gb) {
                        continue;
                    }
                    let pos = row_ptr[ga] + cols.binary_search(&gb).expect("entry in pattern");
                    values[pos] += local[a * nl + b];
                }
            }
        }
        let nv = self.space.n_v_dofs();
        for &d in self.space.dirichlet_dofs() {
            let g = nv + d;
            let cols = &col_idx[row_ptr[g]..row_ptr[g + 1]];
            values[row_ptr[g] + cols.binary_search(&g).expect("diagonal in pattern")] = 1.0;
        }
        Ok(jac)
    }

    /// Jacobian without stored zeros.
    pub fn jacobian(&self, mid: &State, rate: &State, dstate_weight: f64, drate_weight: f64) -> Result<SparseOperator> {
        Ok(self.jacobian_raw(mid, rate, dstate_weight, drate_weight)?.pruned())
    }

    /// Per-cell residuals (and Jacobians) in cell order.
    fn cell_loop(&self, mid: &State, rate: &State, jac_weights: Option<(f64, f64)>) -> Result<Vec<f64>> {
        let nl = self.local_size();
        let stride = if jac_weights.is_some() { nl + nl * nl } else { nl };
        let n_cells = self.space.mesh().n_cells();
        let chunks: Vec<Result<Vec<f64>>> = (0..n_cells.div_ceil(CELL_CHUNK))
            .into_par_iter()
            .map(|b| {
                let range = b * CELL_CHUNK..((b + 1) * CELL_CHUNK).min(n_cells);
                let mut out = vec![0.0; range.len() * stride];
                let mut ws = self.workspace();
                for (i, c) in range.enumerate() {
                    self.cell_terms(c, mid, rate, jac_weights, &mut ws)?;
                    let dst = &mut out[i * stride..(i + 1) * stride];
                    dst[..nl].copy_from_slice(&ws.res);
                    if jac_weights.is_some() {
                        dst[nl..].copy_from_slice(&ws.jac);
                    }
                }
                Ok(out)
            })
            .collect();
        let mut all = Vec::with_capacity(n_cells * stride);
        for chunk in chunks {
            all.extend(chunk?);
        }
        Ok(all)
    }

    fn workspace(&self) -> Workspace {
        let nl = self.local_size();
        Workspace {
            res: vec![0.0; nl],
            jac: vec![0.0; nl * nl],
            phi_v: vec![0.0; self.space.v_local()],
            phi_h: vec![0.0; self.space.h_local()],
            grad_h: vec![[0.0; 2]; self.space.h_local()],
        }
    }

    fn cell_terms(
        &self,
        cell: usize,
        mid: &State,
        rate: &State,
        jac_weights: Option<(f64, f64)>,
        ws: &mut Workspace,
    ) -> Result<()> {
        let p = &self.params;
        let space = &*self.space;
        let dim = space.dim();
        let (nv, nh) = (space.v_local(), space.h_local());
        let nvc = dim * nv;
        let nl = nvc + nh;
        let q = space.quadrature();
        let tab = space.tabulation();
        let geo = space.geometry(cell);
        let scale = geo.det.abs();
        let hdofs = space.h_dofs(cell);
        let v0 = space.v_dof(cell, 0, 0);
        let c0sq = p.c0 * p.c0;
        let cmd = p.c - p.d;

        ws.res.iter_mut().for_each(|x| *x = 0.0);
        if jac_weights.is_some() {
            ws.jac.iter_mut().for_each(|x| *x = 0.0);
        }

        for iq in 0..q.len() {
            let w = q.weights[iq] * scale;
            ws.phi_v.copy_from_slice(&tab.v_phi[iq * nv..(iq + 1) * nv]);
            ws.phi_h.copy_from_slice(&tab.h_phi[iq * nh..(iq + 1) * nh]);
            for i in 0..nh {
                ws.grad_h[i] = geo.physical_gradient(&tab.h_grad[iq * nh + i]);
            }

            let mut hm = 0.0;
            let mut hdot = 0.0;
            let mut gh = [0.0; 2];
            for i in 0..nh {
                let (hv, hd) = (mid.h[hdofs[i]], rate.h[hdofs[i]]);
                hm += hv * ws.phi_h[i];
                hdot += hd * ws.phi_h[i];
                gh[0] += hv * ws.grad_h[i][0];
                gh[1] += hv * ws.grad_h[i][1];
            }
            let mut vm = [0.0; 2];
            let mut vdot = [0.0; 2];
            for comp in 0..dim {
                for j in 0..nv {
                    vm[comp] += mid.v[v0 + comp * nv + j] * ws.phi_v[j];
                    vdot[comp] += rate.v[v0 + comp * nv + j] * ws.phi_v[j];
                }
            }
            let coef = 1.0 - p.a * hm;
            if coef <= 0.0 && p.degeneracy == DegeneracyPolicy::Error {
                let x = geo.map(&q.points[iq]);
                return Err(Error::DegenerateCoefficient { value: coef, point: x[..dim].to_vec() });
            }
            let needs_x = p.forcing.is_some() || p.velocity_source.is_some();
            let x = if needs_x { geo.map(&q.points[iq]) } else { [0.0; 2] };
            let f = p.forcing.as_ref().map_or(0.0, |f| f(&x[..dim], mid.t));
            let mut g = [0.0; 2];
            if let Some(src) = &p.velocity_source {
                src(&x[..dim], mid.t, &mut g[..dim]);
            }
            let v_dot_gh: f64 = (0..dim).map(|d| vm[d] * gh[d]).sum();

            // velocity rows
            for comp in 0..dim {
                let val = vdot[comp] + gh[comp] - g[comp];
                for i in 0..nv {
                    ws.res[comp * nv + i] += w * ws.phi_v[i] * val;
                }
            }
            // enthalpy rows
            let base = coef * hdot + cmd * v_dot_gh - f;
            for i in 0..nh {
                let gi = ws.grad_h[i];
                let v_dot_gi: f64 = (0..dim).map(|d| vm[d] * gi[d]).sum();
                let gh_dot_gi: f64 = (0..dim).map(|d| gh[d] * gi[d]).sum();
                ws.res[nvc + i] += w * (base * ws.phi_h[i] - c0sq * v_dot_gi + p.b * gh_dot_gi - p.d * hm * v_dot_gi);
            }

            let Some((alpha, beta)) = jac_weights else { continue };
            let jac = &mut ws.jac;
            // d R_v / d v (rate) and d R_v / d h (state)
            for comp in 0..dim {
                for i in 0..nv {
                    let row = comp * nv + i;
                    let wi = w * ws.phi_v[i];
                    for j in 0..nv {
                        jac[row * nl + comp * nv + j] += beta * wi * ws.phi_v[j];
                    }
                    for j in 0..nh {
                        jac[row * nl + nvc + j] += alpha * wi * ws.grad_h[j][comp];
                    }
                }
            }
            for i in 0..nh {
                let row = nvc + i;
                let phi_i = ws.phi_h[i];
                let gi = ws.grad_h[i];
                let v_dot_gi: f64 = (0..dim).map(|d| vm[d] * gi[d]).sum();
                // d R_h / d h
                for j in 0..nh {
                    let phi_j = ws.phi_h[j];
                    let gj = ws.grad_h[j];
                    let v_dot_gj: f64 = (0..dim).map(|d| vm[d] * gj[d]).sum();
                    let gi_gj: f64 = (0..dim).map(|d| gi[d] * gj[d]).sum();
                    let state_part =
                        -p.a * phi_j * hdot * phi_i + p.b * gi_gj + cmd * v_dot_gj * phi_i - p.d * phi_j * v_dot_gi;
                    jac[row * nl + nvc + j] += w * (beta * coef * phi_j * phi_i + alpha * state_part);
                }
                // d R_h / d v
                for comp in 0..dim {
                    let coupling = -c0sq * gi[comp] + cmd * gh[comp] * phi_i - p.d * hm * gi[comp];
                    for j in 0..nv {
                        jac[row * nl + comp * nv + j] += alpha * w * ws.phi_v[j] * coupling;
                    }
                }
            }
        }
        Ok(())
    }

    /// `H = int c0^2/2 |v|^2 + h^2/2 - a/3 h^3`.
    pub fn hamiltonian(&self, s: &State) -> Result<f64> {
        self.check_dims(s)?;
        let c0sq = self.params.c0 * self.params.c0;
        let kinetic = 0.5 * c0sq * self.ops.mass_v.bilinear(&s.v, &s.v);
        let a = self.params.a;
        let potential = self.integrate_scalar(s, |hm, _, _| 0.5 * hm * hm - a / 3.0 * hm * hm * hm);
        Ok(kinetic + potential)
    }

    /// Directional derivative of the Hamiltonian: `c0^2 (v, dv) + ((1 - a h) h, dh)`.
    pub fn hamiltonian_derivative(&self, s: &State, dir: &State) -> Result<f64> {
        self.check_dims(s)?;
        self.check_dims(dir)?;
        let c0sq = self.params.c0 * self.params.c0;
        let kinetic = c0sq * self.ops.mass_v.bilinear(&s.v, &dir.v);
        let a = self.params.a;
        let space = &*self.space;
        let nh = space.h_local();
        let q = space.quadrature();
        let tab = space.tabulation();
        let mut potential = 0.0;
        for c in 0..space.mesh().n_cells() {
            let scale = space.geometry(c).det.abs();
            let dofs = space.h_dofs(c);
            for iq in 0..q.len() {
                let phi = &tab.h_phi[iq * nh..(iq + 1) * nh];
                let hm: f64 = dofs.iter().zip(phi).map(|(&d, p)| s.h[d] * p).sum();
                let dh: f64 = dofs.iter().zip(phi).map(|(&d, p)| dir.h[d] * p).sum();
                potential += q.weights[iq] * scale * (1.0 - a * hm) * hm * dh;
            }
        }
        Ok(kinetic + potential)
    }

    pub fn power_balance(&self, s: &State) -> Result<PowerBalance> {
        self.check_dims(s)?;
        let p = &self.params;
        let dissipation = p.b * self.ops.stiffness_h.bilinear(&s.h, &s.h);
        let factor = 2.0 * p.d - p.c;
        let skew_term = if factor == 0.0 {
            0.0
        } else {
            factor * self.integrate_scalar(s, |hm, gh, vm| hm * (vm[0] * gh[0] + vm[1] * gh[1]))
        };
        Ok(PowerBalance { dissipation, skew_term })
    }

    /// Semi-discrete time derivatives at `s`: solves the mass systems with the
    /// stationary part of the residual moved to the right-hand side.
    pub fn semi_discrete_rates(&self, s: &State) -> Result<State> {
        let zero = State::zeros(&self.space, s.t);
        let r0 = self.residual(s, &zero)?;
        let mass = self.jacobian_raw(s, &zero, 0.0, 1.0)?;
        let mut lu = SparseLu::new();
        lu.factor(&mass)?;
        let mut rhs: Vec<f64> = r0.iter().map(|x| -x).collect();
        lu.solve_in_place(&mut rhs)?;
        Ok(State::from_vec(&rhs, self.space.n_v_dofs(), s.t))
    }

    /// Integrates `f(h, grad h, v)` over the domain with the assembly quadrature.
    pub fn integrate_scalar<F>(&self, s: &State, f: F) -> f64
    where
        F: Fn(f64, [f64; 2], [f64; 2]) -> f64 + Sync,
    {
        let space = &*self.space;
        let dim = space.dim();
        let (nv, nh) = (space.v_local(), space.h_local());
        let q = space.quadrature();
        let tab = space.tabulation();
        let n_cells = space.mesh().n_cells();
        let parts: Vec<f64> = (0..n_cells.div_ceil(CELL_CHUNK))
            .into_par_iter()
            .map(|b| {
                let mut acc = 0.0;
                for c in b * CELL_CHUNK..((b + 1) * CELL_CHUNK).min(n_cells) {
                    let geo = space.geometry(c);
                    let scale = geo.det.abs();
                    let dofs = space.h_dofs(c);
                    let v0 = space.v_dof(c, 0, 0);
                    for iq in 0..q.len() {
                        let mut hm = 0.0;
                        let mut gh = [0.0; 2];
                        for i in 0..nh {
                            let hv = s.h[dofs[i]];
                            hm += hv * tab.h_phi[iq * nh + i];
                            let g = geo.physical_gradient(&tab.h_grad[iq * nh + i]);
                            gh[0] += hv * g[0];
                            gh[1] += hv * g[1];
                        }
                        let mut vm = [0.0; 2];
                        for (comp, vc) in vm.iter_mut().enumerate().take(dim) {
                            for j in 0..nv {
                                *vc += s.v[v0 + comp * nv + j] * tab.v_phi[iq * nv + j];
                            }
                        }
                        acc += q.weights[iq] * scale * f(hm, gh, vm);
                    }
                }
                acc
            })
            .collect();
        parts.iter().sum()
    }
}

/// Sparsity of the cell-coupled system with boundary enthalpy rows and
/// columns reduced to the diagonal.
fn jacobian_pattern(space: &MixedSpace) -> SparseOperator {
    let nv = space.n_v_dofs();
    let n = nv + space.n_h_dofs();
    let is_dir = |g: usize| g >= nv && space.is_dirichlet(g - nv);
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut l2g = Vec::new();
    for c in 0..space.mesh().n_cells() {
        l2g.clear();
        l2g.extend(space.v_dofs(c));
        l2g.extend(space.h_dofs(c).iter().map(|&d| nv + d));
        for &a in &l2g {
            if is_dir(a) {
                continue;
            }
            rows[a].extend(l2g.iter().copied().filter(|&b| !is_dir(b)));
        }
    }
    for &d in space.dirichlet_dofs() {
        rows[nv + d].push(nv + d);
    }
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::new();
    row_ptr.push(0);
    for mut r in rows {
        r.sort_unstable();
        r.dedup();
        col_idx.extend(r);
        row_ptr.push(col_idx.len());
    }
    SparseOperator::from_pattern(n, n, row_ptr, col_idx)
}
