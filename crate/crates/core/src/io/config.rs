//! Simulation configuration in TOML.
//!
//! A file may start from a built-in preset (`preset = "exp1d-westervelt"`)
//! and override any key; `--set section.key=value` overrides are applied last.
//! Every effective value is written back by [`SimConfig::to_toml`].

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::model::{DegeneracyPolicy, ModelKind, ModelParams};
use crate::timestepper::{step_count, LinearSolver, StepConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelChoice {
    Westervelt,
    Kuznetsov,
    Rasmussen,
    Linear,
    /// Explicit `a, c, d` instead of a preset.
    Custom,
}

impl ModelChoice {
    pub fn kind(self) -> Option<ModelKind> {
        match self {
            ModelChoice::Westervelt => Some(ModelKind::Westervelt),
            ModelChoice::Kuznetsov => Some(ModelKind::Kuznetsov),
            ModelChoice::Rasmussen => Some(ModelKind::Rasmussen),
            ModelChoice::Linear => Some(ModelKind::Linear),
            ModelChoice::Custom => None,
        }
    }
}

impl From<ModelKind> for ModelChoice {
    fn from(k: ModelKind) -> Self {
        match k {
            ModelKind::Westervelt => ModelChoice::Westervelt,
            ModelKind::Kuznetsov => ModelChoice::Kuznetsov,
            ModelKind::Rasmussen => ModelChoice::Rasmussen,
            ModelKind::Linear => ModelChoice::Linear,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelChoice,
    pub gamma: f64,
    pub c0: f64,
    pub b: f64,
    /// Only read for `kind = "custom"`.
    pub a: f64,
    pub c: f64,
    pub d: f64,
    /// Accept presets whose `a` comes out negative (e.g. Rasmussen, gamma < 2).
    pub allow_negative_a: bool,
    pub degeneracy: DegeneracyPolicy,
    /// Work in units with `c0 = 1`; forces `c0` to 1.
    pub scaled_units: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub dim: usize,
    pub length: f64,
    /// Cells per side.
    pub n: usize,
    /// Velocity degree; the enthalpy uses `k + 1`.
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub dt: f64,
    pub t_end: f64,
    pub snapshots: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialKind {
    /// `A exp(-|x - center|^2 / (2 width^2))`, zero velocity.
    Gaussian,
    /// `A prod_i sin(pi x_i / L)`, zero velocity.
    Sine,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub kind: InitialKind,
    pub amplitude: f64,
    pub center: Vec<f64>,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewtonSection {
    pub tol: f64,
    pub scale_tol_by_state: bool,
    pub max_iters: usize,
    pub max_halvings: usize,
    pub reuse_factorization: bool,
    pub linear_solver: LinearSolver,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Points per side of the 2D sampling lattice.
    pub field_lattice: usize,
    /// Samples per cell of the 1D profiles (plus the right end point).
    pub profile_samples_per_cell: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub name: String,
    /// Reserved; no component draws random numbers.
    pub seed: u64,
    pub model: ModelSection,
    pub domain: DomainSection,
    pub time: TimeSection,
    pub initial: InitialSection,
    pub newton: NewtonSection,
    pub output: OutputSection,
}

pub const PRESET_NAMES: [&str; 3] = ["exp1d", "energy1d", "exp2d"];

fn base_1d(kind: ModelKind) -> SimConfig {
    let step = StepConfig::default();
    SimConfig {
        name: format!("exp1d-{kind}"),
        seed: 0,
        model: ModelSection {
            kind: kind.into(),
            gamma: 6.0,
            c0: 1500.0,
            b: 6e-9,
            a: 0.0,
            c: 0.0,
            d: 0.0,
            allow_negative_a: false,
            degeneracy: DegeneracyPolicy::Error,
            scaled_units: false,
        },
        domain: DomainSection { dim: 1, length: 0.4, n: 400, k: 1 },
        time: TimeSection { dt: 1e-7, t_end: 1e-4, snapshots: vec![1e-5, 1.5e-5, 2e-5, 3e-5] },
        initial: InitialSection { kind: InitialKind::Gaussian, amplitude: 3e5, center: vec![0.2], width: 0.01 },
        newton: NewtonSection {
            tol: step.newton_tol,
            scale_tol_by_state: step.scale_tol_by_state,
            max_iters: step.newton_max_iters,
            max_halvings: step.max_halvings,
            reuse_factorization: step.reuse_factorization,
            linear_solver: step.linear_solver,
        },
        output: OutputSection {
            dir: PathBuf::from(format!("out/exp1d-{kind}")),
            field_lattice: 201,
            profile_samples_per_cell: 2,
        },
    }
}

/// Built-in experiment: `exp1d-<model>`, `energy1d-<model>` or `exp2d-<model>`.
pub fn preset(name: &str) -> Result<SimConfig> {
    let (family, model) = name
        .split_once('-')
        .ok_or_else(|| Error::Config(format!("unknown preset '{name}'; expected e.g. exp1d-westervelt")))?;
    let kind: ModelKind = model.parse().map_err(|_| Error::Config(format!("unknown model in preset '{name}'")))?;
    let mut cfg = base_1d(kind);
    match family {
        "exp1d" => {}
        "energy1d" => {
            cfg.time.t_end = 5e-4;
            cfg.time.snapshots = vec![1e-4, 2e-4, 3e-4, 4e-4, 5e-4];
        }
        "exp2d" => {
            cfg.model.gamma = 1.0;
            // Rasmussen with gamma = 1 has a = -1/c0^2
            cfg.model.allow_negative_a = true;
            cfg.domain = DomainSection { dim: 2, length: 0.4, n: 200, k: 1 };
            cfg.time = TimeSection { dt: 1e-7, t_end: 2e-4, snapshots: vec![2.5e-5, 5e-5, 1e-4, 2e-4] };
            cfg.initial = InitialSection { kind: InitialKind::Gaussian, amplitude: 1.2e6, center: vec![0.2, 0.2], width: 0.01 };
        }
        _ => return Err(Error::Config(format!("unknown preset family '{family}' (known: {PRESET_NAMES:?})"))),
    }
    cfg.name = name.to_string();
    cfg.output.dir = PathBuf::from("out").join(name);
    Ok(cfg)
}

fn to_value(cfg: &SimConfig) -> Value {
    Value::try_from(cfg).expect("configuration serializes to TOML")
}

fn merge(base: &mut Table, over: Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Parses the right-hand side of a `--set` override as a TOML value, falling
/// back to a bare string.
fn parse_override_value(text: &str) -> Value {
    let wrapped = format!("v = {text}");
    match wrapped.parse::<Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| Value::String(text.to_string())),
        Err(_) => Value::String(text.to_string()),
    }
}

/// Applies a `section.key=value` override.
pub fn apply_override(root: &mut Table, assignment: &str) -> Result<()> {
    let (path, value) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override '{assignment}' is not of the form key=value")))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::Config(format!("malformed key '{path}'")));
    }
    let mut table = root;
    for k in &keys[..keys.len() - 1] {
        table = match table.get_mut(*k) {
            Some(Value::Table(t)) => t,
            _ => return Err(Error::Config(format!("unknown section '{k}' in override '{path}'"))),
        };
    }
    let last = keys[keys.len() - 1];
    if !table.contains_key(last) {
        return Err(Error::Config(format!("unknown key '{path}'")));
    }
    table.insert(last.to_string(), parse_override_value(value.trim()));
    Ok(())
}

/// Parses configuration text. An optional top-level `preset` key selects the
/// base configuration; the default base is `exp1d-westervelt`.
pub fn parse_config_text(text: &str, overrides: &[String]) -> Result<SimConfig> {
    let mut file: Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    let base = match file.remove("preset") {
        Some(Value::String(name)) => preset(&name)?,
        Some(other) => return Err(Error::Config(format!("preset must be a string, got {other}"))),
        None => preset("exp1d-westervelt")?,
    };
    let mut root = match to_value(&base) {
        Value::Table(t) => t,
        _ => unreachable!("config serializes to a table"),
    };
    merge(&mut root, file);
    for o in overrides {
        apply_override(&mut root, o)?;
    }
    let cfg: SimConfig = Value::Table(root).try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    cfg.resolved()
}

pub fn parse_config(path: &Path, overrides: &[String]) -> Result<SimConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_config_text(&text, overrides).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Applies `overrides` to a preset.
pub fn preset_with_overrides(name: &str, overrides: &[String]) -> Result<SimConfig> {
    parse_config_text(&format!("preset = \"{name}\""), overrides)
}

fn check_grid(what: &str, t: f64, dt: f64) -> Result<()> {
    step_count(0.0, t, dt).map(|_| ()).map_err(|_| {
        Error::Config(format!("{what} = {t:e} is not an integer multiple of time.dt = {dt:e}"))
    })
}

impl SimConfig {
    /// Fills derived values and checks every invariant.
    pub fn resolved(mut self) -> Result<Self> {
        if self.model.scaled_units {
            self.model.c0 = 1.0;
        }
        let m = &self.model;
        if !(m.c0 > 0.0) {
            return Err(Error::Config(format!("model.c0 = {} must be > 0", m.c0)));
        }
        if !(m.b > 0.0) {
            return Err(Error::Config(format!("model.b = {} must be > 0", m.b)));
        }
        let d = &self.domain;
        if d.dim != 1 && d.dim != 2 {
            return Err(Error::Config(format!("domain.dim = {} must be 1 or 2", d.dim)));
        }
        if !(d.length > 0.0) || d.n == 0 {
            return Err(Error::Config("domain.length and domain.n must be positive".into()));
        }
        if d.k > 2 {
            return Err(Error::Config(format!("domain.k = {} not supported (0, 1 or 2)", d.k)));
        }
        let t = &self.time;
        if !(t.dt > 0.0) || !(t.t_end > 0.0) {
            return Err(Error::Config("time.dt and time.t_end must be positive".into()));
        }
        check_grid("time.t_end", t.t_end, t.dt)?;
        for &s in &t.snapshots {
            if !(0.0..=t.t_end * (1.0 + 1e-9)).contains(&s) {
                return Err(Error::Config(format!("snapshot time {s:e} outside [0, t_end = {:e}]", t.t_end)));
            }
            if s > 0.0 {
                check_grid("snapshot time", s, t.dt)?;
            }
        }
        let i = &self.initial;
        if i.center.len() != d.dim {
            return Err(Error::Config(format!(
                "initial.center has {} coordinates, domain.dim is {}",
                i.center.len(),
                d.dim
            )));
        }
        if i.kind == InitialKind::Gaussian && !(i.width > 0.0) {
            return Err(Error::Config(format!("initial.width = {} must be > 0", i.width)));
        }
        if !i.amplitude.is_finite() {
            return Err(Error::Config("initial.amplitude must be finite".into()));
        }
        if self.newton.max_iters == 0 || !(self.newton.tol > 0.0) {
            return Err(Error::Config("newton.tol must be > 0 and newton.max_iters >= 1".into()));
        }
        if self.output.field_lattice < 2 || self.output.profile_samples_per_cell == 0 {
            return Err(Error::Config("output.field_lattice >= 2 and output.profile_samples_per_cell >= 1".into()));
        }
        self.model_params()?;
        Ok(self)
    }

    pub fn model_params(&self) -> Result<ModelParams> {
        let m = &self.model;
        let p = match m.kind.kind() {
            Some(kind) => ModelParams::preset_with(kind, m.gamma, m.c0, m.b, m.allow_negative_a),
            None if m.allow_negative_a => ModelParams::new_unchecked_sign(m.a, m.b, m.c, m.d, m.c0),
            None => ModelParams::new(m.a, m.b, m.c, m.d, m.c0),
        }
        .map_err(|e| Error::Config(format!("model: {e}")))?;
        Ok(p.with_degeneracy(m.degeneracy))
    }

    pub fn step_config(&self) -> StepConfig {
        let n = &self.newton;
        StepConfig {
            dt: self.time.dt,
            newton_tol: n.tol,
            scale_tol_by_state: n.scale_tol_by_state,
            newton_max_iters: n.max_iters,
            max_halvings: n.max_halvings,
            reuse_factorization: n.reuse_factorization,
            linear_solver: n.linear_solver,
        }
    }

    /// Resolved configuration as TOML, including every default.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes to TOML")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp1d_preset_values() {
        let c = preset("exp1d-westervelt").unwrap();
        assert_eq!((c.domain.length, c.domain.n), (0.4, 400));
        assert_eq!((c.time.dt, c.time.t_end), (1e-7, 1e-4));
        assert_eq!((c.model.b, c.model.c0, c.model.gamma), (6e-9, 1500.0, 6.0));
        assert_eq!((c.initial.amplitude, c.initial.center.clone(), c.initial.width), (3e5, vec![0.2], 0.01));
    }

    #[test]
    fn exp2d_preset_values() {
        let c = preset("exp2d-rasmussen").unwrap().resolved().unwrap();
        assert_eq!(c.domain.dim, 2);
        assert_eq!(c.model.gamma, 1.0);
        assert_eq!(c.initial.amplitude, 1.2e6);
        assert_eq!(c.time.snapshots, vec![2.5e-5, 5e-5, 1e-4, 2e-4]);
        assert!(c.model_params().unwrap().a < 0.0);
    }

    #[test]
    fn misaligned_dt_is_rejected() {
        let err = preset_with_overrides("exp1d-linear", &["time.dt=3e-7".into()]).unwrap_err();
        assert!(matches!(err, Error::Config(msg) if msg.contains("integer multiple")));
    }

    #[test]
    fn file_overrides_preset() {
        let cfg = parse_config_text(
            "preset = \"exp1d-kuznetsov\"\n[domain]\nn = 100\n[time]\nt_end = 2e-5\nsnapshots = [1e-5]\n",
            &["time.dt=5e-8".into(), "output.dir=\"tmp/x\"".into()],
        )
        .unwrap();
        assert_eq!(cfg.model.kind, ModelChoice::Kuznetsov);
        assert_eq!(cfg.domain.n, 100);
        assert_eq!(cfg.time.dt, 5e-8);
        assert_eq!(cfg.output.dir, PathBuf::from("tmp/x"));
        // untouched keys keep the preset values
        assert_eq!(cfg.domain.length, 0.4);
    }

    #[test]
    fn bare_string_override() {
        let cfg = preset_with_overrides("exp1d-linear", &["model.kind=rasmussen".into()]).unwrap();
        assert_eq!(cfg.model.kind, ModelChoice::Rasmussen);
    }

    #[test]
    fn unknown_keys_are_errors() {
        assert!(parse_config_text("[domain]\nnn = 3\n", &[]).is_err());
        assert!(preset_with_overrides("exp1d-linear", &["time.dtt=1".into()]).is_err());
        assert!(preset_with_overrides("exp1d-linear", &["nosuch.dt=1".into()]).is_err());
        assert!(preset("exp3d-linear").is_err());
        assert!(preset("exp1d-burgers").is_err());
    }

    #[test]
    fn parse_errors_carry_line() {
        let err = parse_config_text("[time]\ndt = = 1\n", &[]).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn resolved_dump_round_trips() {
        for name in ["exp1d-westervelt", "energy1d-rasmussen", "exp2d-linear"] {
            let c = preset(name).unwrap().resolved().unwrap();
            let back = parse_config_text(&c.to_toml(), &[]).unwrap();
            assert_eq!(back, c);
        }
    }

    #[test]
    fn validation_names_the_invariant() {
        let e = preset_with_overrides("exp1d-linear", &["time.snapshots=[2e-4]".into()]).unwrap_err();
        assert!(e.to_string().contains("snapshot"), "{e}");
        let e = preset_with_overrides("exp1d-linear", &["model.b=0".into()]).unwrap_err();
        assert!(e.to_string().contains("model.b"), "{e}");
        let e = preset_with_overrides("exp1d-linear", &["initial.center=[0.2, 0.2]".into()]).unwrap_err();
        assert!(e.to_string().contains("initial.center"), "{e}");
        let e = preset_with_overrides("exp2d-rasmussen", &["model.allow_negative_a=false".into()]).unwrap_err();
        assert!(e.to_string().contains("must be >= 0"), "{e}");
    }

    #[test]
    fn scaled_units_force_unit_speed() {
        let c = preset_with_overrides("exp1d-linear", &["model.scaled_units=true".into()]).unwrap();
        assert_eq!(c.model.c0, 1.0);
    }
}
