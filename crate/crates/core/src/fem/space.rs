use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::element::{LagrangeElement, MAX_ORDER};
use crate::fem::quadrature::Quadrature;
use crate::mesh::{CellGeometry, Mesh};

/// Mixed pair of a discontinuous `P_k` vector space for the velocity and a
/// continuous `P_{k+1}` scalar space for the enthalpy with `h = 0` on the
/// boundary.
///
/// Velocity dofs are numbered cell by cell, component-major inside a cell:
/// `cell * dim * n_loc + comp * n_loc + node`.
#[derive(Debug, Clone)]
pub struct MixedSpace {
    mesh: Arc<Mesh>,
    k: usize,
    v_element: LagrangeElement,
    h_element: LagrangeElement,
    h_dofmap: Vec<usize>,
    h_nodes: Vec<[f64; 2]>,
    dirichlet: Vec<bool>,
    dirichlet_dofs: Vec<usize>,
    quadrature: Quadrature,
    tab: Tabulation,
}

/// Reference basis values at the quadrature points.
#[derive(Debug, Clone)]
pub struct Tabulation {
    /// `v_phi[q * nv + i]`
    pub v_phi: Vec<f64>,
    /// `h_phi[q * nh + i]`
    pub h_phi: Vec<f64>,
    /// `h_grad[q * nh + i]`, reference gradients
    pub h_grad: Vec<[f64; 2]>,
}

/// Which quantity `evaluate_field` returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Velocity,
    Scalar,
    ScalarGradient,
}

/// Quadrature exactness used for all assembly: `2 (k + 1) + 2`.
pub fn default_quadrature_degree(k: usize) -> usize {
    2 * (k + 1) + 2
}

impl MixedSpace {
    pub fn new(mesh: Arc<Mesh>, k: usize) -> Result<Self> {
        Self::with_quadrature_degree(mesh, k, default_quadrature_degree(k))
    }

    pub fn with_quadrature_degree(mesh: Arc<Mesh>, k: usize, degree: usize) -> Result<Self> {
        if k + 1 > MAX_ORDER {
            return Err(Error::UnsupportedOrder(k));
        }
        let dim = mesh.dim();
        let v_element = LagrangeElement::new(dim, k)?;
        let h_element = LagrangeElement::new(dim, k + 1)?;
        let quadrature = Quadrature::for_degree(dim, degree)?;

        // continuous dofs keyed by the weighted set of cell vertices they sit on
        let nh = h_element.n_nodes();
        let mut keys: HashMap<Vec<(usize, usize)>, usize> = HashMap::new();
        let mut h_dofmap = Vec::with_capacity(mesh.n_cells() * nh);
        let mut h_nodes: Vec<[f64; 2]> = Vec::new();
        for c in 0..mesh.n_cells() {
            let verts = mesh.cell(c);
            let geo = mesh.geometry_unchecked(c);
            for (node, lat) in h_element.nodes().iter().zip(h_element.lattice()) {
                let mut key: Vec<(usize, usize)> = (0..=dim)
                    .filter(|&i| lat[i] > 0)
                    .map(|i| (verts[i], lat[i]))
                    .collect();
                key.sort_unstable();
                let next = h_nodes.len();
                let dof = *keys.entry(key).or_insert_with(|| {
                    h_nodes.push(geo.map(node));
                    next
                });
                h_dofmap.push(dof);
            }
        }
        let dirichlet: Vec<bool> = h_nodes.iter().map(|x| mesh.on_boundary(x)).collect();
        let dirichlet_dofs = (0..h_nodes.len()).filter(|&i| dirichlet[i]).collect();

        let tab = tabulate(&v_element, &h_element, &quadrature);
        Ok(MixedSpace {
            mesh,
            k,
            v_element,
            h_element,
            h_dofmap,
            h_nodes,
            dirichlet,
            dirichlet_dofs,
            quadrature,
            tab,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> Arc<Mesh> {
        self.mesh.clone()
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn v_element(&self) -> &LagrangeElement {
        &self.v_element
    }

    pub fn h_element(&self) -> &LagrangeElement {
        &self.h_element
    }

    pub fn quadrature(&self) -> &Quadrature {
        &self.quadrature
    }

    pub fn tabulation(&self) -> &Tabulation {
        &self.tab
    }

    /// Scalar velocity basis functions per cell.
    pub fn v_local(&self) -> usize {
        self.v_element.n_nodes()
    }

    /// Velocity dofs per cell (all components).
    pub fn v_dofs_per_cell(&self) -> usize {
        self.dim() * self.v_local()
    }

    pub fn h_local(&self) -> usize {
        self.h_element.n_nodes()
    }

    pub fn n_v_dofs(&self) -> usize {
        self.mesh.n_cells() * self.v_dofs_per_cell()
    }

    pub fn n_h_dofs(&self) -> usize {
        self.h_nodes.len()
    }

    pub fn v_dof(&self, cell: usize, comp: usize, node: usize) -> usize {
        cell * self.v_dofs_per_cell() + comp * self.v_local() + node
    }

    pub fn v_dofs(&self, cell: usize) -> std::ops::Range<usize> {
        let n = self.v_dofs_per_cell();
        cell * n..(cell + 1) * n
    }

    pub fn h_dofs(&self, cell: usize) -> &[usize] {
        let n = self.h_local();
        &self.h_dofmap[cell * n..(cell + 1) * n]
    }

    pub fn h_node(&self, dof: usize) -> &[f64] {
        &self.h_nodes[dof][..self.dim()]
    }

    pub fn is_dirichlet(&self, dof: usize) -> bool {
        self.dirichlet[dof]
    }

    pub fn dirichlet_dofs(&self) -> &[usize] {
        &self.dirichlet_dofs
    }

    pub fn n_interior_h_dofs(&self) -> usize {
        self.n_h_dofs() - self.dirichlet_dofs.len()
    }

    pub fn geometry(&self, cell: usize) -> CellGeometry {
        self.mesh.geometry_unchecked(cell)
    }

    /// Nodal interpolant of `f` in the scalar space; Dirichlet values are taken
    /// from `f` unchanged (callers zero them when needed).
    pub fn interpolate_scalar<F: Fn(&[f64]) -> f64>(&self, f: F) -> Vec<f64> {
        self.h_nodes.iter().map(|x| f(&x[..self.dim()])).collect()
    }

    /// Nodal interpolant of the vector field `f` in the velocity space.
    pub fn interpolate_vector<F: Fn(&[f64], &mut [f64])>(&self, f: F) -> Vec<f64> {
        let dim = self.dim();
        let mut out = vec![0.0; self.n_v_dofs()];
        let mut val = [0.0; 2];
        for c in 0..self.mesh.n_cells() {
            let geo = self.geometry(c);
            for (i, node) in self.v_element.nodes().iter().enumerate() {
                let x = geo.map(node);
                f(&x[..dim], &mut val[..dim]);
                for comp in 0..dim {
                    out[self.v_dof(c, comp, i)] = val[comp];
                }
            }
        }
        out
    }

    /// `L^2` projection of the vector field `f` onto the velocity space,
    /// computed cell by cell since the space is discontinuous.
    pub fn project_vector<F: Fn(&[f64], &mut [f64])>(&self, f: F) -> Vec<f64> {
        let dim = self.dim();
        let nv = self.v_local();
        let q = &self.quadrature;
        let mut out = vec![0.0; self.n_v_dofs()];
        let mut val = [0.0; 2];
        let mut mass = nalgebra::DMatrix::<f64>::zeros(nv, nv);
        let mut rhs = nalgebra::DMatrix::<f64>::zeros(nv, dim);
        for c in 0..self.mesh.n_cells() {
            let geo = self.geometry(c);
            mass.fill(0.0);
            rhs.fill(0.0);
            for (iq, (p, w)) in q.points.iter().zip(&q.weights).enumerate() {
                let wq = w * geo.det.abs();
                let phi = &self.tab.v_phi[iq * nv..(iq + 1) * nv];
                let x = geo.map(&p[..dim]);
                f(&x[..dim], &mut val[..dim]);
                for i in 0..nv {
                    for j in 0..nv {
                        mass[(i, j)] += wq * phi[i] * phi[j];
                    }
                    for comp in 0..dim {
                        rhs[(i, comp)] += wq * phi[i] * val[comp];
                    }
                }
            }
            let sol = mass.clone().cholesky().expect("local mass matrix is positive definite").solve(&rhs);
            for comp in 0..dim {
                for i in 0..nv {
                    out[self.v_dof(c, comp, i)] = sol[(i, comp)];
                }
            }
        }
        out
    }

    /// Evaluates a finite element field at physical points.
    ///
    /// Velocity values at cell interfaces are taken from the cell `locate`
    /// returns; use [`MixedSpace::evaluate_in_cell`] to pick the cell.
    /// Scalar results have one entry per point, velocity and gradient results
    /// `dim` entries per point.
    pub fn evaluate_field(&self, coeffs: &[f64], points: &[Vec<f64>], which: FieldKind) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(points.len() * self.dim());
        for p in points {
            let (cell, xi) = self.mesh.locate(p)?;
            out.extend(self.evaluate_in_cell(coeffs, cell, &xi, which)?);
        }
        Ok(out)
    }

    pub fn evaluate_in_cell(&self, coeffs: &[f64], cell: usize, xi: &[f64], which: FieldKind) -> Result<Vec<f64>> {
        let expected = match which {
            FieldKind::Velocity => self.n_v_dofs(),
            _ => self.n_h_dofs(),
        };
        if coeffs.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: coeffs.len() });
        }
        if cell >= self.mesh.n_cells() {
            return Err(Error::IndexOutOfRange { index: cell, len: self.mesh.n_cells() });
        }
        let dim = self.dim();
        match which {
            FieldKind::Velocity => {
                let mut phi = vec![0.0; self.v_local()];
                self.v_element.eval(xi, &mut phi);
                Ok((0..dim)
                    .map(|comp| (0..self.v_local()).map(|i| coeffs[self.v_dof(cell, comp, i)] * phi[i]).sum())
                    .collect())
            }
            FieldKind::Scalar => {
                let mut phi = vec![0.0; self.h_local()];
                self.h_element.eval(xi, &mut phi);
                Ok(vec![self.h_dofs(cell).iter().zip(&phi).map(|(&d, p)| coeffs[d] * p).sum()])
            }
            FieldKind::ScalarGradient => {
                let mut grad = vec![[0.0; 2]; self.h_local()];
                self.h_element.eval_grad(xi, &mut grad);
                let geo = self.geometry(cell);
                let mut g = [0.0; 2];
                for (&d, rg) in self.h_dofs(cell).iter().zip(&grad) {
                    let pg = geo.physical_gradient(rg);
                    g[0] += coeffs[d] * pg[0];
                    g[1] += coeffs[d] * pg[1];
                }
                Ok(g[..dim].to_vec())
            }
        }
    }
}

fn tabulate(v: &LagrangeElement, h: &LagrangeElement, q: &Quadrature) -> Tabulation {
    let (nv, nh) = (v.n_nodes(), h.n_nodes());
    let mut v_phi = vec![0.0; q.len() * nv];
    let mut h_phi = vec![0.0; q.len() * nh];
    let mut h_grad = vec![[0.0; 2]; q.len() * nh];
    for (iq, p) in q.points.iter().enumerate() {
        v.eval(p, &mut v_phi[iq * nv..(iq + 1) * nv]);
        h.eval(p, &mut h_phi[iq * nh..(iq + 1) * nh]);
        h.eval_grad(p, &mut h_grad[iq * nh..(iq + 1) * nh]);
    }
    Tabulation { v_phi, h_phi, h_grad }
}
