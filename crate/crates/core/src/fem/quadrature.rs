//! Quadrature rules on the reference simplex.
//!
//! The reference interval is `[0, 1]` and the reference triangle has vertices
//! `(0,0), (1,0), (0,1)`; weights sum to the reference measure (1 and 1/2).

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Quadrature {
    pub dim: usize,
    pub degree: usize,
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl Quadrature {
    /// Default rule exact for polynomials of total degree `degree`.
    ///
    /// In 2D, degrees up to 6 use symmetric rules with positive weights, higher
    /// degrees fall back to the collapsed Gauss product rule.
    pub fn for_degree(dim: usize, degree: usize) -> Result<Self> {
        match dim {
            1 => Ok(Self::gauss_interval((degree + 1).div_ceil(2).max(1), degree)),
            2 if degree <= 6 => Ok(symmetric_triangle(degree)),
            2 => Ok(Self::collapsed_triangle(degree)),
            _ => Err(Error::InvalidArgument(format!("no quadrature for dimension {dim}"))),
        }
    }

    fn gauss_interval(n: usize, degree: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        Quadrature {
            dim: 1,
            degree,
            points: x.iter().map(|&t| [0.5 * (t + 1.0), 0.0]).collect(),
            weights: w.iter().map(|&wi| 0.5 * wi).collect(),
        }
    }

    /// Conical product (Duffy) rule built from Gauss-Legendre nodes.
    pub fn collapsed_triangle(degree: usize) -> Self {
        // the collapsed integrand has degree `degree + 1` in the collapsed direction
        let n = (degree + 2).div_ceil(2);
        let (x, w) = gauss_legendre(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (u, wu) in x.iter().zip(&w) {
            let u = 0.5 * (u + 1.0);
            for (s, ws) in x.iter().zip(&w) {
                let s = 0.5 * (s + 1.0);
                points.push([u, s * (1.0 - u)]);
                weights.push(0.25 * wu * ws * (1.0 - u));
            }
        }
        Quadrature { dim: 2, degree, points, weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        dp = if d != 0.0 { d } else { dp };
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

fn symmetric_triangle(degree: usize) -> Quadrature {
    // (weight, orbit) with weights normalised to 1; orbits are barycentric
    let table: &[(f64, [f64; 3])] = match degree {
        0 | 1 => &[(1.0, [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0])],
        2 => &[(1.0 / 3.0, [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0])],
        3 | 4 => &[
            (0.223381589678011, [0.108103018168070, 0.445948490915965, 0.445948490915965]),
            (0.109951743655322, [0.816847572980459, 0.091576213509771, 0.091576213509771]),
        ],
        5 => &[
            (0.225, [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]),
            (0.132394152788506, [0.059715871789770, 0.470142064105115, 0.470142064105115]),
            (0.125939180544827, [0.797426985353087, 0.101286507323456, 0.101286507323456]),
        ],
        _ => &[
            (0.116786275726379, [0.501426509658179, 0.249286745170910, 0.249286745170910]),
            (0.050844906370207, [0.873821971016996, 0.063089014491502, 0.063089014491502]),
            (0.082851075618374, [0.053145049844817, 0.310352451033784, 0.636502499121399]),
        ],
    };
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (w, orbit) in table {
        for l in orbit_points(orbit) {
            // reference coordinates are the last two barycentrics
            points.push([l[1], l[2]]);
            weights.push(0.5 * w);
        }
    }
    Quadrature { dim: 2, degree, points, weights }
}

fn orbit_points(l: &[f64; 3]) -> Vec<[f64; 3]> {
    let perms = [[0, 1, 2], [1, 2, 0], [2, 0, 1], [0, 2, 1], [2, 1, 0], [1, 0, 2]];
    let mut out: Vec<[f64; 3]> = Vec::new();
    for p in perms {
        let q = [l[p[0]], l[p[1]], l[p[2]]];
        if !out.iter().any(|o| o.iter().zip(&q).all(|(a, b)| (a - b).abs() < 1e-14)) {
            out.push(q);
        }
    }
    out
}
