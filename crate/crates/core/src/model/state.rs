use crate::error::{Error, Result};
use crate::fem::MixedSpace;

/// Coefficient vectors of velocity and enthalpy at time `t`.
///
/// Also used for time derivatives, where `t` is ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub v: Vec<f64>,
    pub h: Vec<f64>,
    pub t: f64,
}

impl State {
    pub fn zeros(space: &MixedSpace, t: f64) -> Self {
        State { v: vec![0.0; space.n_v_dofs()], h: vec![0.0; space.n_h_dofs()], t }
    }

    /// Interpolates initial data; the boundary values of `h` are set to zero.
    pub fn interpolate<H, V>(space: &MixedSpace, h0: H, v0: V, t: f64) -> Self
    where
        H: Fn(&[f64]) -> f64,
        V: Fn(&[f64], &mut [f64]),
    {
        let mut h = space.interpolate_scalar(h0);
        for &d in space.dirichlet_dofs() {
            h[d] = 0.0;
        }
        State { v: space.interpolate_vector(v0), h, t }
    }

    pub fn check(&self, space: &MixedSpace) -> Result<()> {
        if self.v.len() != space.n_v_dofs() {
            return Err(Error::DimensionMismatch { expected: space.n_v_dofs(), got: self.v.len() });
        }
        if self.h.len() != space.n_h_dofs() {
            return Err(Error::DimensionMismatch { expected: space.n_h_dofs(), got: self.h.len() });
        }
        if let Some(&d) = space.dirichlet_dofs().iter().find(|&&d| self.h[d] != 0.0) {
            return Err(Error::InvalidArgument(format!("boundary enthalpy dof {d} is nonzero")));
        }
        Ok(())
    }

    /// Stacked vector `[v; h]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.v.len() + self.h.len());
        x.extend_from_slice(&self.v);
        x.extend_from_slice(&self.h);
        x
    }

    pub fn from_vec(x: &[f64], n_v: usize, t: f64) -> Self {
        State { v: x[..n_v].to_vec(), h: x[n_v..].to_vec(), t }
    }

    pub fn norm(&self) -> f64 {
        self.v.iter().chain(&self.h).map(|x| x * x).sum::<f64>().sqrt()
    }
}
