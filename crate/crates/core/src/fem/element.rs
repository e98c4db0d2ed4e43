//! Nodal Lagrange elements on the reference simplex.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub const MAX_ORDER: usize = 3;

/// Lagrange element of order `order` on the reference simplex of dimension `dim`.
///
/// Nodes sit on the equispaced barycentric lattice; for order 0 the single
/// node is the barycenter.
#[derive(Debug, Clone)]
pub struct LagrangeElement {
    dim: usize,
    order: usize,
    /// Barycentric lattice indices `(b0, .., b_dim)` with `sum = order`.
    lattice: Vec<[usize; 3]>,
    nodes: Vec<[f64; 2]>,
    exponents: Vec<[usize; 2]>,
    /// `coeffs[(m, i)]`: coefficient of monomial `m` in basis function `i`.
    coeffs: DMatrix<f64>,
}

impl LagrangeElement {
    pub fn new(dim: usize, order: usize) -> Result<Self> {
        if order > MAX_ORDER {
            return Err(Error::UnsupportedOrder(order));
        }
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidArgument(format!("unsupported dimension {dim}")));
        }
        let (lattice, nodes) = lattice_nodes(dim, order);
        let exponents: Vec<[usize; 2]> = if dim == 1 {
            (0..=order).map(|i| [i, 0]).collect()
        } else {
            (0..=order).flat_map(|t| (0..=t).map(move |j| [t - j, j])).collect()
        };
        let n = nodes.len();
        debug_assert_eq!(n, exponents.len());
        let vander = DMatrix::from_fn(n, n, |i, m| monomial(&exponents[m], &nodes[i]));
        let coeffs = vander
            .try_inverse()
            .ok_or_else(|| Error::InvalidArgument("singular Vandermonde matrix".into()))?;
        Ok(LagrangeElement { dim, order, lattice, nodes, exponents, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn lattice(&self) -> &[[usize; 3]] {
        &self.lattice
    }

    pub fn eval(&self, xi: &[f64], out: &mut [f64]) {
        let mons: Vec<f64> = self.exponents.iter().map(|e| monomial(e, xi)).collect();
        for (i, o) in out.iter_mut().enumerate().take(self.n_nodes()) {
            *o = mons.iter().enumerate().map(|(m, v)| self.coeffs[(m, i)] * v).sum();
        }
    }

    /// Reference gradients, `out[i][d] = d phi_i / d xi_d`.
    pub fn eval_grad(&self, xi: &[f64], out: &mut [[f64; 2]]) {
        let n = self.n_nodes();
        for o in out.iter_mut().take(n) {
            *o = [0.0; 2];
        }
        for (m, e) in self.exponents.iter().enumerate() {
            let mut g = [0.0; 2];
            for d in 0..self.dim {
                if e[d] == 0 {
                    continue;
                }
                let mut de = *e;
                de[d] -= 1;
                g[d] = e[d] as f64 * monomial(&de, xi);
            }
            for (i, o) in out.iter_mut().enumerate().take(n) {
                let c = self.coeffs[(m, i)];
                o[0] += c * g[0];
                o[1] += c * g[1];
            }
        }
    }
}

fn monomial(e: &[usize; 2], x: &[f64]) -> f64 {
    let mut v = x[0].powi(e[0] as i32);
    if e[1] > 0 {
        v *= x[1].powi(e[1] as i32);
    }
    v
}

fn lattice_nodes(dim: usize, order: usize) -> (Vec<[usize; 3]>, Vec<[f64; 2]>) {
    if order == 0 {
        let c = 1.0 / (dim + 1) as f64;
        return (vec![[0, 0, 0]], vec![[c, if dim == 2 { c } else { 0.0 }]]);
    }
    let p = order as f64;
    let mut lattice = Vec::new();
    if dim == 1 {
        // vertices first, then interior points left to right
        lattice.push([order, 0, 0]);
        lattice.push([0, order, 0]);
        for i in 1..order {
            lattice.push([order - i, i, 0]);
        }
    } else {
        lattice.push([order, 0, 0]);
        lattice.push([0, order, 0]);
        lattice.push([0, 0, order]);
        // edges (0,1), (1,2), (2,0)
        for i in 1..order {
            lattice.push([order - i, i, 0]);
        }
        for i in 1..order {
            lattice.push([0, order - i, i]);
        }
        for i in 1..order {
            lattice.push([i, 0, order - i]);
        }
        for j in 1..order {
            for i in 1..order - j {
                lattice.push([order - i - j, i, j]);
            }
        }
    }
    let nodes = lattice
        .iter()
        .map(|b| [b[1] as f64 / p, if dim == 2 { b[2] as f64 / p } else { 0.0 }])
        .collect();
    (lattice, nodes)
}
