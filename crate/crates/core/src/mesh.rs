//! Uniform simplicial meshes of the interval `(0, L)` and the square `(0, L)^2`.
//!
//! Square meshes split every grid square along its lower-left to upper-right
//! diagonal, so that cell `2 * (j * n + i)` is the lower triangle and
//! `2 * (j * n + i) + 1` the upper triangle of square `(i, j)`. Both are
//! stored counter-clockwise.

use crate::error::{Error, Result};

/// Relative tolerance (times the domain length) of the boundary predicate.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Mesh {
    dim: usize,
    length: f64,
    n_per_side: usize,
    coords: Vec<f64>,
    cells: Vec<usize>,
    boundary: Vec<bool>,
    boundary_vertices: Vec<usize>,
}

/// Affine map `x = origin + J * xi` from the reference simplex onto a cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellGeometry {
    pub dim: usize,
    pub measure: f64,
    pub origin: [f64; 2],
    /// Row-major Jacobian; only the leading `dim x dim` block is used.
    pub jacobian: [[f64; 2]; 2],
    pub det: f64,
    /// Transposed inverse Jacobian, maps reference gradients to physical ones.
    pub inv_jacobian_t: [[f64; 2]; 2],
}

impl CellGeometry {
    pub fn map(&self, xi: &[f64]) -> [f64; 2] {
        let mut x = self.origin;
        for (r, xr) in x.iter_mut().enumerate().take(self.dim) {
            for (c, xic) in xi.iter().enumerate().take(self.dim) {
                *xr += self.jacobian[r][c] * xic;
            }
        }
        x
    }

    pub fn inverse_map(&self, x: &[f64]) -> [f64; 2] {
        let mut d = [0.0; 2];
        for r in 0..self.dim {
            d[r] = x[r] - self.origin[r];
        }
        // J^{-1} = (J^{-T})^T
        let mut xi = [0.0; 2];
        for (r, xir) in xi.iter_mut().enumerate().take(self.dim) {
            for (c, dc) in d.iter().enumerate().take(self.dim) {
                *xir += self.inv_jacobian_t[c][r] * dc;
            }
        }
        xi
    }

    pub fn physical_gradient(&self, ref_grad: &[f64]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for (r, gr) in g.iter_mut().enumerate().take(self.dim) {
            for (c, rc) in ref_grad.iter().enumerate().take(self.dim) {
                *gr += self.inv_jacobian_t[r][c] * rc;
            }
        }
        g
    }
}

impl Mesh {
    pub fn interval(length: f64, n_cells: usize) -> Result<Self> {
        check_inputs(length, n_cells)?;
        let h = length / n_cells as f64;
        let mut coords: Vec<f64> = (0..=n_cells).map(|i| i as f64 * h).collect();
        coords[n_cells] = length;
        let cells = (0..n_cells).flat_map(|i| [i, i + 1]).collect();
        let mut mesh = Mesh {
            dim: 1,
            length,
            n_per_side: n_cells,
            coords,
            cells,
            boundary: Vec::new(),
            boundary_vertices: Vec::new(),
        };
        mesh.classify_boundary();
        Ok(mesh)
    }

    pub fn square(length: f64, n_per_side: usize) -> Result<Self> {
        check_inputs(length, n_per_side)?;
        let n = n_per_side;
        let h = length / n as f64;
        let coord = |i: usize| if i == n { length } else { i as f64 * h };
        let mut coords = Vec::with_capacity(2 * (n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                coords.push(coord(i));
                coords.push(coord(j));
            }
        }
        let vid = |i: usize, j: usize| j * (n + 1) + i;
        let mut cells = Vec::with_capacity(6 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (v00, v10, v01, v11) = (vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1));
                cells.extend_from_slice(&[v00, v10, v11]);
                cells.extend_from_slice(&[v00, v11, v01]);
            }
        }
        let mut mesh = Mesh {
            dim: 2,
            length,
            n_per_side: n,
            coords,
            cells,
            boundary: Vec::new(),
            boundary_vertices: Vec::new(),
        };
        mesh.classify_boundary();
        Ok(mesh)
    }

    fn classify_boundary(&mut self) {
        self.boundary = (0..self.n_vertices())
            .map(|v| self.on_boundary(self.vertex(v)))
            .collect();
        self.boundary_vertices = (0..self.n_vertices()).filter(|&v| self.boundary[v]).collect();
    }

    /// Geometric predicate for `x` lying on the boundary of the domain.
    pub fn on_boundary(&self, x: &[f64]) -> bool {
        let tol = BOUNDARY_TOL * self.length;
        x[..self.dim]
            .iter()
            .any(|&c| c.abs() <= tol || (c - self.length).abs() <= tol)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let tol = BOUNDARY_TOL * self.length;
        x.len() >= self.dim && x[..self.dim].iter().all(|&c| c >= -tol && c <= self.length + tol)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n_per_side(&self) -> usize {
        self.n_per_side
    }

    /// Grid spacing along each axis.
    pub fn spacing(&self) -> f64 {
        self.length / self.n_per_side as f64
    }

    pub fn domain_measure(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    pub fn n_vertices(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len() / (self.dim + 1)
    }

    pub fn vertex(&self, v: usize) -> &[f64] {
        &self.coords[v * self.dim..(v + 1) * self.dim]
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        let nv = self.dim + 1;
        &self.cells[c * nv..(c + 1) * nv]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn boundary_vertices(&self) -> &[usize] {
        &self.boundary_vertices
    }

    pub fn cell_geometry(&self, c: usize) -> Result<CellGeometry> {
        if c >= self.n_cells() {
            return Err(Error::IndexOutOfRange { index: c, len: self.n_cells() });
        }
        Ok(self.geometry_unchecked(c))
    }

    pub(crate) fn geometry_unchecked(&self, c: usize) -> CellGeometry {
        let verts = self.cell(c);
        let x0 = self.vertex(verts[0]);
        let mut origin = [0.0; 2];
        origin[..self.dim].copy_from_slice(x0);
        let mut jac = [[0.0; 2]; 2];
        let mut inv_t = [[0.0; 2]; 2];
        let det;
        let measure;
        if self.dim == 1 {
            let x1 = self.vertex(verts[1]);
            jac[0][0] = x1[0] - x0[0];
            det = jac[0][0];
            inv_t[0][0] = 1.0 / det;
            measure = det.abs();
        } else {
            let x1 = self.vertex(verts[1]);
            let x2 = self.vertex(verts[2]);
            jac[0][0] = x1[0] - x0[0];
            jac[1][0] = x1[1] - x0[1];
            jac[0][1] = x2[0] - x0[0];
            jac[1][1] = x2[1] - x0[1];
            det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            // J^{-T} = 1/det [[j11, -j10], [-j01, j00]]
            inv_t[0][0] = jac[1][1] / det;
            inv_t[0][1] = -jac[1][0] / det;
            inv_t[1][0] = -jac[0][1] / det;
            inv_t[1][1] = jac[0][0] / det;
            measure = 0.5 * det.abs();
        }
        CellGeometry {
            dim: self.dim,
            measure,
            origin,
            jacobian: jac,
            det,
            inv_jacobian_t: inv_t,
        }
    }

    /// Finds the cell containing `x` and its reference coordinates there.
    ///
    /// Points on a cell interface are attributed to the cell with the lower
    /// grid index along each axis (the upper triangle wins on the diagonal).
    pub fn locate(&self, x: &[f64]) -> Result<(usize, [f64; 2])> {
        if !self.contains(x) {
            return Err(Error::PointOutsideDomain(x.to_vec()));
        }
        let n = self.n_per_side;
        let h = self.spacing();
        let axis = |c: f64| -> usize { ((c / h).floor().max(0.0) as usize).min(n - 1) };
        let cell = if self.dim == 1 {
            axis(x[0])
        } else {
            let (i, j) = (axis(x[0]), axis(x[1]));
            let s = x[0] - i as f64 * h;
            let t = x[1] - j as f64 * h;
            2 * (j * n + i) + usize::from(t >= s)
        };
        let xi = self.geometry_unchecked(cell).inverse_map(x);
        Ok((cell, xi))
    }
}

fn check_inputs(length: f64, n: usize) -> Result<()> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::InvalidArgument(format!("domain length must be positive, got {length}")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("mesh needs at least one cell per side".into()));
    }
    Ok(())
}
