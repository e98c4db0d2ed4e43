use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fem::{FieldKind, MixedSpace};

/// Position and value of the largest enthalpy on `[from, to]` of a 1D field,
/// sampled at `samples + 1` equispaced points.
pub fn peak_1d(space: &MixedSpace, h: &[f64], from: f64, to: f64, samples: usize) -> Result<(f64, f64)> {
    if space.dim() != 1 || samples == 0 || !(from < to) {
        return Err(Error::InvalidArgument("peak_1d needs a 1D space and a nonempty interval".into()));
    }
    let pts: Vec<Vec<f64>> = (0..=samples).map(|i| vec![from + (to - from) * i as f64 / samples as f64]).collect();
    let vals = space.evaluate_field(h, &pts, FieldKind::Scalar)?;
    let (i, v) = vals
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
    Ok((pts[i][0], v))
}

/// Mean over `rays` directions of the radius where the enthalpy along the ray
/// from `center` peaks, searching `(0, r_max]`.
pub fn radial_peak_2d(
    space: &MixedSpace,
    h: &[f64],
    center: [f64; 2],
    r_max: f64,
    rays: usize,
    samples: usize,
) -> Result<f64> {
    if space.dim() != 2 || rays == 0 || samples == 0 {
        return Err(Error::InvalidArgument("radial_peak_2d needs a 2D space, rays and samples".into()));
    }
    let mut total = 0.0;
    for k in 0..rays {
        let (s, c) = (2.0 * PI * k as f64 / rays as f64).sin_cos();
        let radii: Vec<f64> = (1..=samples).map(|i| r_max * i as f64 / samples as f64).collect();
        let pts: Vec<Vec<f64>> = radii.iter().map(|r| vec![center[0] + r * c, center[1] + r * s]).collect();
        let vals = space.evaluate_field(h, &pts, FieldKind::Scalar)?;
        let (i, _) = vals
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
        total += radii[i];
    }
    Ok(total / rays as f64)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::mesh::Mesh;

    #[test]
    fn finds_quadratic_peak() {
        let space = MixedSpace::new(Arc::new(Mesh::interval(0.4, 40).unwrap()), 1).unwrap();
        let h = space.interpolate_scalar(|x| 1.0 - (x[0] - 0.2375).powi(2));
        let (x, v) = peak_1d(&space, &h, 0.0, 0.4, 4000).unwrap();
        assert!((x - 0.2375).abs() < 1e-4);
        assert!((v - 1.0).abs() < 1e-12);
        let (x, _) = peak_1d(&space, &h, 0.3, 0.4, 100).unwrap();
        assert!((x - 0.3).abs() < 1e-12);
    }

    #[test]
    fn ring_radius() {
        let space = MixedSpace::new(Arc::new(Mesh::square(0.4, 40).unwrap()), 1).unwrap();
        let h = space.interpolate_scalar(|x| {
            let r = ((x[0] - 0.2).powi(2) + (x[1] - 0.2).powi(2)).sqrt();
            (-(r - 0.05).powi(2) / 2e-4).exp()
        });
        let r = radial_peak_2d(&space, &h, [0.2, 0.2], 0.19, 16, 380).unwrap();
        assert!((r - 0.05).abs() < 2e-3, "{r}");
    }
}
