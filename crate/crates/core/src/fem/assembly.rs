//! State-independent operators of the mixed discretization.

use rayon::prelude::*;

use crate::fem::space::MixedSpace;
use crate::fem::sparse::SparseOperator;

/// Constant matrices shared by the residual, Jacobian and energy routines.
#[derive(Debug, Clone)]
pub struct Operators {
    /// `(v, w)` on the velocity space; block diagonal.
    pub mass_v: SparseOperator,
    /// `(h, q)` on the full scalar space.
    pub mass_h: SparseOperator,
    /// `(grad h, grad q)`.
    pub stiffness_h: SparseOperator,
    /// `B[q, w] = (w, grad q)`, shape `n_h x n_v`.
    pub div_coupling: SparseOperator,
}

impl Operators {
    pub fn assemble(space: &MixedSpace) -> Self {
        Operators {
            mass_v: assemble_mass_v(space),
            mass_h: assemble_mass_h(space),
            stiffness_h: assemble_stiffness_h(space),
            div_coupling: assemble_div_coupling(space),
        }
    }
}

/// Runs `local` on every cell in parallel and concatenates the triplets in
/// cell order, so the result does not depend on the thread count.
fn assemble_cells<F>(space: &MixedSpace, local: F) -> Vec<(usize, usize, f64)>
where
    F: Fn(usize, &mut Vec<(usize, usize, f64)>) + Sync,
{
    let n_cells = space.mesh().n_cells();
    let chunk = 256;
    let parts: Vec<Vec<(usize, usize, f64)>> = (0..n_cells.div_ceil(chunk))
        .into_par_iter()
        .map(|b| {
            let mut out = Vec::new();
            for c in b * chunk..((b + 1) * chunk).min(n_cells) {
                local(c, &mut out);
            }
            out
        })
        .collect();
    parts.concat()
}

/// Dense `n x n` block filled from the upper triangle, bitwise symmetric.
fn symmetric_local(n: usize, entry: impl Fn(usize, usize) -> f64) -> Vec<f64> {
    let mut local = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = entry(i, j);
            local[i * n + j] = v;
            local[j * n + i] = v;
        }
    }
    local
}

pub fn assemble_mass_v(space: &MixedSpace) -> SparseOperator {
    let q = space.quadrature();
    let tab = space.tabulation();
    let nv = space.v_local();
    let dim = space.dim();
    let triplets = assemble_cells(space, |c, out| {
        let geo = space.geometry(c);
        let scale = geo.det.abs();
        let local = symmetric_local(nv, |i, j| {
            (0..q.len())
                .map(|iq| q.weights[iq] * tab.v_phi[iq * nv + i] * tab.v_phi[iq * nv + j])
                .sum::<f64>()
                * scale
        });
        for i in 0..nv {
            for j in 0..nv {
                for comp in 0..dim {
                    out.push((space.v_dof(c, comp, i), space.v_dof(c, comp, j), local[i * nv + j]));
                }
            }
        }
    });
    let n = space.n_v_dofs();
    SparseOperator::from_triplets(n, n, &triplets)
}

pub fn assemble_mass_h(space: &MixedSpace) -> SparseOperator {
    let q = space.quadrature();
    let tab = space.tabulation();
    let nh = space.h_local();
    let triplets = assemble_cells(space, |c, out| {
        let scale = space.geometry(c).det.abs();
        let dofs = space.h_dofs(c);
        let local = symmetric_local(nh, |i, j| {
            (0..q.len())
                .map(|iq| q.weights[iq] * tab.h_phi[iq * nh + i] * tab.h_phi[iq * nh + j])
                .sum::<f64>()
                * scale
        });
        for i in 0..nh {
            for j in 0..nh {
                out.push((dofs[i], dofs[j], local[i * nh + j]));
            }
        }
    });
    let n = space.n_h_dofs();
    SparseOperator::from_triplets(n, n, &triplets)
}

pub fn assemble_stiffness_h(space: &MixedSpace) -> SparseOperator {
    let q = space.quadrature();
    let tab = space.tabulation();
    let nh = space.h_local();
    let dim = space.dim();
    let triplets = assemble_cells(space, |c, out| {
        let geo = space.geometry(c);
        let scale = geo.det.abs();
        let dofs = space.h_dofs(c);
        let mut local = vec![0.0; nh * nh];
        for iq in 0..q.len() {
            let grads: Vec<[f64; 2]> = (0..nh).map(|i| geo.physical_gradient(&tab.h_grad[iq * nh + i])).collect();
            let w = q.weights[iq] * scale;
            for i in 0..nh {
                for j in i..nh {
                    let dot: f64 = (0..dim).map(|d| grads[i][d] * grads[j][d]).sum();
                    local[i * nh + j] += w * dot;
                }
            }
        }
        for i in 0..nh {
            for j in 0..i {
                local[i * nh + j] = local[j * nh + i];
            }
        }
        for i in 0..nh {
            for j in 0..nh {
                out.push((dofs[i], dofs[j], local[i * nh + j]));
            }
        }
    });
    let n = space.n_h_dofs();
    SparseOperator::from_triplets(n, n, &triplets)
}

pub fn assemble_div_coupling(space: &MixedSpace) -> SparseOperator {
    let q = space.quadrature();
    let tab = space.tabulation();
    let (nv, nh) = (space.v_local(), space.h_local());
    let dim = space.dim();
    let triplets = assemble_cells(space, |c, out| {
        let geo = space.geometry(c);
        let scale = geo.det.abs();
        let dofs = space.h_dofs(c);
        let mut local = vec![0.0; nh * dim * nv];
        for iq in 0..q.len() {
            let w = q.weights[iq] * scale;
            for i in 0..nh {
                let g = geo.physical_gradient(&tab.h_grad[iq * nh + i]);
                for comp in 0..dim {
                    for j in 0..nv {
                        local[(i * dim + comp) * nv + j] += w * g[comp] * tab.v_phi[iq * nv + j];
                    }
                }
            }
        }
        for i in 0..nh {
            for comp in 0..dim {
                for j in 0..nv {
                    out.push((dofs[i], space.v_dof(c, comp, j), local[(i * dim + comp) * nv + j]));
                }
            }
        }
    });
    SparseOperator::from_triplets(space.n_h_dofs(), space.n_v_dofs(), &triplets)
}
