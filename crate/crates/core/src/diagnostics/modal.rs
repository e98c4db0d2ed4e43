use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// Single Fourier mode of the damped linear system on `(0, L)`:
/// `h = alpha(t) sin(kappa x)`, `v = beta(t) cos(kappa x)` with
/// `(alpha, beta)' = A (alpha, beta)`, `A = [[-b kappa^2, c0^2 kappa], [-kappa, 0]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModalOracle {
    pub mode: usize,
    pub length: f64,
    pub b: f64,
    pub c0: f64,
}

impl ModalOracle {
    pub fn new(mode: usize, length: f64, b: f64, c0: f64) -> Result<Self> {
        if mode == 0 {
            return Err(Error::InvalidArgument("mode index must be >= 1".into()));
        }
        if !(length > 0.0 && b >= 0.0 && c0 > 0.0) {
            return Err(Error::InvalidArgument(format!("invalid modal parameters L = {length}, b = {b}, c0 = {c0}")));
        }
        Ok(ModalOracle { mode, length, b, c0 })
    }

    pub fn kappa(&self) -> f64 {
        self.mode as f64 * PI / self.length
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        let k = self.kappa();
        [[-self.b * k * k, self.c0 * self.c0 * k], [-k, 0.0]]
    }

    /// Field values `(h, v)` at `(x, t)` for initial amplitudes `(alpha0, beta0)`.
    pub fn fields(&self, alpha0: f64, beta0: f64, x: f64, t: f64) -> (f64, f64) {
        let (a, b) = modal_reference(self, alpha0, beta0, t);
        let k = self.kappa();
        (a * (k * x).sin(), b * (k * x).cos())
    }
}

/// `sinh(sqrt(z) t) / sqrt(z)`, continued to `z <= 0`.
fn sinhc(z: f64, t: f64) -> f64 {
    let u = z * t * t;
    if u.abs() < 1e-6 {
        t * (1.0 + u / 6.0 + u * u / 120.0)
    } else if z > 0.0 {
        (z.sqrt() * t).sinh() / z.sqrt()
    } else {
        ((-z).sqrt() * t).sin() / (-z).sqrt()
    }
}

/// `cosh(sqrt(z) t)`, continued to `z <= 0`.
fn coshc(z: f64, t: f64) -> f64 {
    let u = z * t * t;
    if u.abs() < 1e-6 {
        1.0 + u / 2.0 + u * u / 24.0
    } else if z > 0.0 {
        (z.sqrt() * t).cosh()
    } else {
        ((-z).sqrt() * t).cos()
    }
}

/// `exp(t M)` of a real 2x2 matrix in closed form:
/// `e^{mu t} (cosh(delta t) I + sinh(delta t)/delta (M - mu I))` with
/// `mu = tr/2`, `delta^2 = mu^2 - det`, including the repeated-eigenvalue limit.
pub fn expm2(m: [[f64; 2]; 2], t: f64) -> [[f64; 2]; 2] {
    let mu = 0.5 * (m[0][0] + m[1][1]);
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let z = mu * mu - det;
    let e = (mu * t).exp();
    let (c, s) = (coshc(z, t), sinhc(z, t));
    [
        [e * (c + s * (m[0][0] - mu)), e * s * m[0][1]],
        [e * s * m[1][0], e * (c + s * (m[1][1] - mu))],
    ]
}

/// Modal amplitudes at time `t`.
pub fn modal_reference(oracle: &ModalOracle, alpha0: f64, beta0: f64, t: f64) -> (f64, f64) {
    let e = expm2(oracle.matrix(), t);
    (e[0][0] * alpha0 + e[0][1] * beta0, e[1][0] * alpha0 + e[1][1] * beta0)
}

/// Pointwise residuals `(h_t + c0^2 v_x - b h_xx, v_t + h_x)` of the linear
/// equations, with time derivatives from `(alpha, beta)' = A (alpha, beta)`.
pub fn modal_pde_residual(oracle: &ModalOracle, alpha0: f64, beta0: f64, x: f64, t: f64) -> (f64, f64) {
    let (a, b) = modal_reference(oracle, alpha0, beta0, t);
    let m = oracle.matrix();
    let (da, db) = (m[0][0] * a + m[0][1] * b, m[1][0] * a + m[1][1] * b);
    let k = oracle.kappa();
    let (s, c) = (k * x).sin_cos();
    let h_t = da * s;
    let v_x = -b * k * s;
    let h_xx = -a * k * k * s;
    let v_t = db * c;
    let h_x = a * k * c;
    (h_t + oracle.c0 * oracle.c0 * v_x - oracle.b * h_xx, v_t + h_x)
}
