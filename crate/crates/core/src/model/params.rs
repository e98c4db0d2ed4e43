use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar source `f(x, t)` added to the enthalpy equation.
pub type ScalarSource = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;
/// Vector source `g(x, t)` added to the velocity equation, written into `out`.
pub type VectorSource = Arc<dyn Fn(&[f64], f64, &mut [f64]) + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Westervelt,
    Kuznetsov,
    Rasmussen,
    Linear,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Linear, ModelKind::Westervelt, ModelKind::Kuznetsov, ModelKind::Rasmussen];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Westervelt => "westervelt",
            ModelKind::Kuznetsov => "kuznetsov",
            ModelKind::Rasmussen => "rasmussen",
            ModelKind::Linear => "linear",
        }
    }

    /// `(a * c0^2, c, d)` as functions of the equation-of-state exponent.
    fn coefficients(self, gamma: f64) -> (f64, f64, f64) {
        match self {
            ModelKind::Westervelt => (gamma + 1.0, 0.0, 0.0),
            ModelKind::Kuznetsov => (gamma - 1.0, 2.0, 0.0),
            ModelKind::Rasmussen => (gamma - 2.0, 2.0, 1.0),
            ModelKind::Linear => (0.0, 0.0, 0.0),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "westervelt" => Ok(ModelKind::Westervelt),
            "kuznetsov" => Ok(ModelKind::Kuznetsov),
            "rasmussen" => Ok(ModelKind::Rasmussen),
            "linear" => Ok(ModelKind::Linear),
            other => Err(Error::InvalidArgument(format!("unknown model '{other}'"))),
        }
    }
}

/// What to do when `1 - a h <= 0` is met at a quadrature point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DegeneracyPolicy {
    #[default]
    Error,
    Allow,
}

/// Coefficients of the general model
/// `(1 - a h) h_t + c0^2 div v = b lap h - c v.grad h - d h div v`, `v_t + grad h = 0`.
#[derive(Clone)]
pub struct ModelParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub c0: f64,
    /// Equation-of-state exponent the preset was built from, if any.
    pub gamma: Option<f64>,
    pub forcing: Option<ScalarSource>,
    pub velocity_source: Option<VectorSource>,
    pub degeneracy: DegeneracyPolicy,
}

impl fmt::Debug for ModelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelParams")
            .field("a", &self.a)
            .field("b", &self.b)
            .field("c", &self.c)
            .field("d", &self.d)
            .field("c0", &self.c0)
            .field("gamma", &self.gamma)
            .field("forcing", &self.forcing.is_some())
            .field("velocity_source", &self.velocity_source.is_some())
            .field("degeneracy", &self.degeneracy)
            .finish()
    }
}

impl ModelParams {
    /// Explicit coefficients; requires `a, c, d >= 0`, `b > 0` and `c0 > 0`.
    pub fn new(a: f64, b: f64, c: f64, d: f64, c0: f64) -> Result<Self> {
        let p = Self::new_unchecked_sign(a, b, c, d, c0)?;
        if a < 0.0 {
            return Err(Error::InvalidArgument(format!("nonlinearity coefficient a = {a:e} must be >= 0")));
        }
        Ok(p)
    }

    /// Like [`ModelParams::new`] but accepts a negative `a`, which the
    /// small-data theory excludes but e.g. a Rasmussen preset with `gamma < 2` produces.
    pub fn new_unchecked_sign(a: f64, b: f64, c: f64, d: f64, c0: f64) -> Result<Self> {
        if !(b > 0.0) {
            return Err(Error::InvalidArgument(format!("diffusivity b = {b:e} must be > 0")));
        }
        if !(c0 > 0.0) {
            return Err(Error::InvalidArgument(format!("sound speed c0 = {c0:e} must be > 0")));
        }
        if !(c >= 0.0 && d >= 0.0) {
            return Err(Error::InvalidArgument(format!("coefficients c = {c}, d = {d} must be >= 0")));
        }
        if !a.is_finite() {
            return Err(Error::InvalidArgument("a must be finite".into()));
        }
        Ok(ModelParams {
            a,
            b,
            c,
            d,
            c0,
            gamma: None,
            forcing: None,
            velocity_source: None,
            degeneracy: DegeneracyPolicy::Error,
        })
    }

    /// The undamped linear wave equation (`b = 0`), outside the `b > 0` range
    /// of [`ModelParams::new`]. Its discrete energy is an exact quadratic
    /// invariant of the midpoint rule.
    pub fn lossless_linear(c0: f64) -> Result<Self> {
        let mut p = Self::new(0.0, 1.0, 0.0, 0.0, c0)?;
        p.b = 0.0;
        Ok(p)
    }

    /// Named preset; `a` is derived from `gamma` and `c0`.
    pub fn preset(kind: ModelKind, gamma: f64, c0: f64, b: f64) -> Result<Self> {
        Self::preset_with(kind, gamma, c0, b, false)
    }

    pub fn preset_with(kind: ModelKind, gamma: f64, c0: f64, b: f64, allow_negative_a: bool) -> Result<Self> {
        if !(c0 > 0.0) {
            return Err(Error::InvalidArgument(format!("sound speed c0 = {c0:e} must be > 0")));
        }
        let (ac2, c, d) = kind.coefficients(gamma);
        let a = ac2 / (c0 * c0);
        let mut p = if allow_negative_a {
            Self::new_unchecked_sign(a, b, c, d, c0)?
        } else {
            Self::new(a, b, c, d, c0).map_err(|e| match e {
                Error::InvalidArgument(msg) if a < 0.0 => {
                    Error::InvalidArgument(format!("{kind} preset with gamma = {gamma}: {msg}"))
                }
                other => other,
            })?
        };
        p.gamma = Some(gamma);
        Ok(p)
    }

    pub fn with_forcing(mut self, f: ScalarSource) -> Self {
        self.forcing = Some(f);
        self
    }

    pub fn with_velocity_source(mut self, g: VectorSource) -> Self {
        self.velocity_source = Some(g);
        self
    }

    pub fn with_degeneracy(mut self, policy: DegeneracyPolicy) -> Self {
        self.degeneracy = policy;
        self
    }

    pub fn is_linear(&self) -> bool {
        self.a == 0.0 && self.c == 0.0 && self.d == 0.0
    }

    /// `c = 2 d`: the energy balance has no indefinite term.
    pub fn is_passive(&self) -> bool {
        self.c == 2.0 * self.d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lossless_linear_has_no_damping() {
        let p = ModelParams::lossless_linear(2.0).unwrap();
        assert_eq!((p.a, p.b, p.c, p.d, p.c0), (0.0, 0.0, 0.0, 0.0, 2.0));
        assert!(p.is_linear() && p.is_passive());
        assert!(ModelParams::lossless_linear(0.0).is_err());
    }

    #[test]
    fn westervelt_preset() {
        let p = ModelParams::preset(ModelKind::Westervelt, 6.0, 1500.0, 6e-9).unwrap();
        assert!((p.a - 7.0 / 2.25e6).abs() < 1e-22);
        assert!((p.a - 3.111e-6).abs() < 1e-9);
        assert_eq!((p.c, p.d), (0.0, 0.0));
    }

    #[test]
    fn kuznetsov_and_rasmussen_presets() {
        let k = ModelParams::preset(ModelKind::Kuznetsov, 6.0, 1500.0, 6e-9).unwrap();
        assert!((k.a - 5.0 / 2.25e6).abs() < 1e-22);
        assert_eq!((k.c, k.d), (2.0, 0.0));
        let r = ModelParams::preset(ModelKind::Rasmussen, 6.0, 1500.0, 6e-9).unwrap();
        assert!((r.a - 4.0 / 2.25e6).abs() < 1e-22);
        assert_eq!((r.c, r.d), (2.0, 1.0));
        assert!(r.is_passive() && !k.is_passive());
    }

    #[test]
    fn linear_preset() {
        let p = ModelParams::preset(ModelKind::Linear, 6.0, 1500.0, 6e-9).unwrap();
        assert_eq!((p.a, p.c, p.d), (0.0, 0.0, 0.0));
        assert!(p.is_linear());
    }

    #[test]
    fn rejects_invalid() {
        assert!(ModelParams::preset(ModelKind::Rasmussen, 1.0, 1500.0, 6e-9).is_err());
        assert!(ModelParams::preset(ModelKind::Westervelt, 6.0, 1500.0, 0.0).is_err());
        assert!(ModelParams::preset(ModelKind::Westervelt, 6.0, 0.0, 6e-9).is_err());
        assert!(ModelParams::new(-1.0, 1.0, 0.0, 0.0, 1.0).is_err());
        let r = ModelParams::preset_with(ModelKind::Rasmussen, 1.0, 1500.0, 6e-9, true).unwrap();
        assert!(r.a < 0.0);
    }

    #[test]
    fn model_names_round_trip() {
        for kind in ModelKind::ALL {
            assert_eq!(kind.name().parse::<ModelKind>().unwrap(), kind);
        }
        assert!("burgers".parse::<ModelKind>().is_err());
    }
}
