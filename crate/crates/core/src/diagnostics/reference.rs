use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::model::{Discretization, State};

/// Exact solution of the linear semi-discrete system `M x' + K x = 0`
/// through a dense matrix exponential. Meant for small meshes: the time
/// integration error of a scheme is its distance to this reference.
pub struct SemiDiscreteReference {
    free: Vec<usize>,
    n_v: usize,
    mass: DMatrix<f64>,
    stiffness: DMatrix<f64>,
    generator: DMatrix<f64>,
}

impl SemiDiscreteReference {
    pub fn new(disc: &Discretization) -> Result<Self> {
        let p = &disc.params;
        if !p.is_linear() || p.forcing.is_some() || p.velocity_source.is_some() {
            return Err(Error::InvalidArgument("semi-discrete reference needs an unforced linear model".into()));
        }
        let space = disc.space();
        let n_v = space.n_v_dofs();
        let free: Vec<usize> = (0..disc.n_dofs()).filter(|&i| i < n_v || !space.is_dirichlet(i - n_v)).collect();
        let zero = State::zeros(space, 0.0);
        let dense = |a: f64, b: f64| -> Result<DMatrix<f64>> {
            let j = disc.jacobian_raw(&zero, &zero, a, b)?;
            let mut pos = vec![usize::MAX; disc.n_dofs()];
            for (k, &i) in free.iter().enumerate() {
                pos[i] = k;
            }
            let mut m = DMatrix::zeros(free.len(), free.len());
            for (r, &i) in free.iter().enumerate() {
                for (c, v) in j.row(i) {
                    if pos[c] != usize::MAX {
                        m[(r, pos[c])] = v;
                    }
                }
            }
            Ok(m)
        };
        let mass = dense(0.0, 1.0)?;
        let stiffness = dense(1.0, 0.0)?;
        let generator = -mass
            .clone()
            .lu()
            .solve(&stiffness)
            .ok_or_else(|| Error::SingularLinearSystem("mass matrix".into()))?;
        Ok(SemiDiscreteReference { free, n_v, mass, stiffness, generator })
    }

    fn gather(&self, s: &State) -> DVector<f64> {
        let x = s.to_vec();
        DVector::from_iterator(self.free.len(), self.free.iter().map(|&i| x[i]))
    }

    fn scatter(&self, y: &DVector<f64>, n_h: usize, t: f64) -> State {
        let mut x = vec![0.0; self.n_v + n_h];
        for (k, &i) in self.free.iter().enumerate() {
            x[i] = y[k];
        }
        State::from_vec(&x, self.n_v, t)
    }

    /// State at `s.t + t`.
    pub fn evolve(&self, s: &State, t: f64) -> State {
        let y = (&self.generator * t).exp() * self.gather(s);
        self.scatter(&y, s.h.len(), s.t + t)
    }

    /// Lowest undamped eigenmode: `h` with zero velocity, normalized to a
    /// maximum nodal value of one; returns the state and its angular frequency.
    pub fn fundamental_mode(&self, n_h: usize) -> Result<(State, f64)> {
        // velocities carry no boundary condition, so they lead the free list
        let nv = self.n_v;
        let nf = self.free.len();
        let nh = nf - nv;
        let m_v = self.mass.view((0, 0), (nv, nv)).into_owned();
        let m_h = self.mass.view((nv, nv), (nh, nh)).into_owned();
        let k_vh = self.stiffness.view((0, nv), (nv, nh)).into_owned();
        let k_hv = self.stiffness.view((nv, 0), (nh, nv)).into_owned();
        let mv_inv_kvh = m_v
            .lu()
            .solve(&k_vh)
            .ok_or_else(|| Error::SingularLinearSystem("velocity mass".into()))?;
        let e = -(k_hv * mv_inv_kvh);
        let e = 0.5 * (&e + e.transpose());
        let chol = m_h
            .cholesky()
            .ok_or_else(|| Error::SingularLinearSystem("enthalpy mass is not positive definite".into()))?;
        let l = chol.l();
        let l_inv = l
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::SingularLinearSystem("enthalpy mass".into()))?;
        let sym = &l_inv * e * l_inv.transpose();
        let sym = 0.5 * (&sym + sym.transpose());
        let eig = SymmetricEigen::new(sym);
        let (imin, &lambda) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty spectrum");
        let h = l_inv.transpose() * eig.eigenvectors.column(imin);
        let scale = h.iter().copied().fold(0.0, |m: f64, x| if x.abs() > m.abs() { x } else { m });
        let mut y = DVector::zeros(nf);
        for k in 0..nh {
            y[nv + k] = h[k] / scale;
        }
        Ok((self.scatter(&y, n_h, 0.0), lambda.max(0.0).sqrt()))
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::fem::MixedSpace;
    use crate::mesh::Mesh;
    use crate::model::{ModelKind, ModelParams};

    fn disc(b: f64) -> Discretization {
        let p = ModelParams::new(0.0, b, 0.0, 0.0, 1500.0).unwrap();
        let space = MixedSpace::new(Arc::new(Mesh::interval(0.4, 12).unwrap()), 1).unwrap();
        Discretization::new(p, Arc::new(space))
    }

    #[test]
    fn generator_matches_semi_discrete_rates() {
        let d = disc(6e-9);
        let r = SemiDiscreteReference::new(&d).unwrap();
        let s = State::interpolate(d.space(), |x| (x[0] * 20.0).sin() * x[0] * (0.4 - x[0]), |x, v| v[0] = x[0], 0.0);
        let rates = d.semi_discrete_rates(&s).unwrap();
        let y = &r.generator * r.gather(&s);
        let expected = r.gather(&rates);
        assert!((y - &expected).norm() <= 1e-10 * expected.norm());
    }

    #[test]
    fn fundamental_mode_frequency() {
        let d = disc(1e-12);
        let r = SemiDiscreteReference::new(&d).unwrap();
        let (mode, omega) = r.fundamental_mode(d.space().n_h_dofs()).unwrap();
        let exact = 1500.0 * std::f64::consts::PI / 0.4;
        assert!((omega / exact - 1.0).abs() < 1e-4, "{omega} {exact}");
        // half a period later the enthalpy has flipped sign
        let later = r.evolve(&mode, std::f64::consts::PI / omega);
        for (a, b) in mode.h.iter().zip(&later.h) {
            assert!((a + b).abs() < 1e-6, "{a} {b}");
        }
    }

    #[test]
    fn rejects_nonlinear_models() {
        let p = ModelParams::preset(ModelKind::Westervelt, 6.0, 1500.0, 6e-9).unwrap();
        let space = MixedSpace::new(Arc::new(Mesh::interval(0.4, 4).unwrap()), 1).unwrap();
        assert!(SemiDiscreteReference::new(&Discretization::new(p, Arc::new(space))).is_err());
    }
}
