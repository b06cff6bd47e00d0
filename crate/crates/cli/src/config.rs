//! Scenario files.
//!
//! A scenario is a TOML document with the tables `params`, `initial`,
//! `integrator`, and the optional `tolerances`, `output` and `regularize`.
//! Unknown keys are rejected. The `initial` table holds exactly one of
//! `explicit`, `elements` or `sample`; the integrator horizon is exactly one
//! of `t_end` or `periods`. See the README for a complete example.

use std::path::{Path, PathBuf};

use kepler_sphere::conserved::{conserved_set, orbit_from_elements, orbital_period, OrbitElements};
use kepler_sphere::dynamics::{IntegratorConfig, Method, DEFAULT_COLLISION_GUARD};
use kepler_sphere::geometry::{constraint_residual, project_to_ts3, sample_phase_point, Vec4};
use kepler_sphere::{KeplerError, KeplerParams, SpherePhasePoint, Tolerances};
use serde::Deserialize;

use crate::error::{CliError, Result};

/// Largest constraint residual accepted for an explicit initial state before
/// it is projected onto TS³.
pub const EXPLICIT_CONSTRAINT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub params: ParamsSection,
    pub initial: InitialSection,
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub tolerances: ToleranceSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub regularize: RegularizeSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub gamma: f64,
}

impl Default for ParamsSection {
    fn default() -> Self {
        Self { gamma: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub explicit: Option<ExplicitState>,
    pub elements: Option<ElementsSpec>,
    pub sample: Option<SampleSpec>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitState {
    pub q: [f64; 4],
    pub v: [f64; 4],
}

/// Apocentre colatitude, eccentricity and z-x-z orientation angles.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementsSpec {
    pub colatitude: f64,
    pub eccentricity: f64,
    #[serde(default)]
    pub inclination: f64,
    #[serde(default)]
    pub node: f64,
    #[serde(default)]
    pub argument: f64,
}

/// Seeded point with reduced energy inside the open window `energy`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSpec {
    pub seed: u64,
    pub energy: [f64; 2],
}

/// The initial condition after validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialCondition {
    Explicit(SpherePhasePoint),
    Elements(OrbitElements<f64>),
    Sample { seed: u64, energy: (f64, f64) },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    Rk4,
    Dop853,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    pub method: MethodName,
    /// RK4 step, or DOP853 output interval.
    pub dt: f64,
    pub t_end: Option<f64>,
    /// Horizon in orbital periods; bound orbits only.
    pub periods: Option<f64>,
    #[serde(default = "default_guard")]
    pub collision_guard: f64,
    #[serde(default = "default_adaptive_tol")]
    pub rtol: f64,
    #[serde(default = "default_adaptive_tol")]
    pub atol: f64,
    #[serde(default = "one")]
    pub reproject_every: usize,
    #[serde(default = "one")]
    pub sample_every: usize,
}

fn default_guard() -> f64 {
    DEFAULT_COLLISION_GUARD
}

fn default_adaptive_tol() -> f64 {
    1e-13
}

fn one() -> usize {
    1
}

/// Overrides of the default tolerances; `--tol-scale` multiplies the result.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSection {
    pub tol_constraint: Option<f64>,
    pub tol_identity: Option<f64>,
    pub tol_drift: Option<f64>,
    pub tol_fd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// File stem for everything this scenario writes.
    pub name: String,
    #[serde(default = "yes")]
    pub csv: bool,
}

fn yes() -> bool {
    true
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { name: "scenario".into(), csv: true }
    }
}

/// Settings of the Delaunay continuation in `regularize --mode ligon-schaaf`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularizeSection {
    pub periods: f64,
    pub samples_per_period: usize,
}

impl Default for RegularizeSection {
    fn default() -> Self {
        Self { periods: 5.0, samples_per_period: 64 }
    }
}

/// A validated scenario ready to run.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub source: PathBuf,
    pub params: KeplerParams,
    pub initial: InitialCondition,
    pub start: SpherePhasePoint,
    pub integrator: IntegratorConfig<f64>,
    pub tolerances: Tolerances,
    pub output: OutputSection,
    pub regularize: RegularizeSection,
}

pub fn load(path: &Path, tol_scale: f64) -> Result<Resolved> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::config(path, e.to_string()))?;
    parse(&text, path, tol_scale)
}

pub fn parse(text: &str, path: &Path, tol_scale: f64) -> Result<Resolved> {
    let scenario: Scenario = toml::from_str(text).map_err(|e| CliError::config(path, e.to_string()))?;
    scenario.resolve(path, tol_scale)
}

impl Scenario {
    pub fn resolve(&self, path: &Path, tol_scale: f64) -> Result<Resolved> {
        let bad = |msg: String| CliError::config(path, msg);
        let params = KeplerParams::new(self.params.gamma).map_err(|_| {
            bad(format!("params.gamma must be positive and finite, got {}", self.params.gamma))
        })?;
        let initial = self.initial.resolve().map_err(bad)?;
        let start = initial_state(&initial, &params).map_err(|e| match e {
            KeplerError::InvalidConfig(msg) => bad(format!("initial: {msg}")),
            other => other.into(),
        })?;
        let tolerances = self.tolerances.resolve(tol_scale).map_err(bad)?;
        let integrator = self.integrator.resolve(&start, &params).map_err(bad)?;
        if self.output.name.is_empty() || self.output.name.contains(['/', '\\']) {
            return Err(bad(format!("output.name must be a plain file stem, got {:?}", self.output.name)));
        }
        if !(self.regularize.periods > 0.0 && self.regularize.periods.is_finite()) {
            return Err(bad(format!("regularize.periods must be positive, got {}", self.regularize.periods)));
        }
        if self.regularize.samples_per_period == 0 {
            return Err(bad("regularize.samples_per_period must be at least 1".into()));
        }
        Ok(Resolved {
            source: path.to_path_buf(),
            params,
            initial,
            start,
            integrator,
            tolerances,
            output: self.output.clone(),
            regularize: self.regularize.clone(),
        })
    }
}

impl InitialSection {
    fn resolve(&self) -> std::result::Result<InitialCondition, String> {
        let given: Vec<&str> = [
            self.explicit.as_ref().map(|_| "initial.explicit"),
            self.elements.as_ref().map(|_| "initial.elements"),
            self.sample.as_ref().map(|_| "initial.sample"),
        ]
        .into_iter()
        .flatten()
        .collect();
        if given.len() != 1 {
            return Err(format!(
                "exactly one of initial.explicit, initial.elements, initial.sample is required, got {}",
                if given.is_empty() { "none".to_string() } else { given.join(", ") }
            ));
        }
        if let Some(x) = &self.explicit {
            let p = SpherePhasePoint::new(Vec4(x.q), Vec4(x.v));
            if !p.is_finite() {
                return Err("initial.explicit contains a non-finite value".into());
            }
            let (c1, c2) = constraint_residual(&p);
            if c1.abs().max(c2.abs()) > EXPLICIT_CONSTRAINT_TOL {
                return Err(format!(
                    "initial.explicit is not on TS^3: <q,q>-1 = {c1:.3e}, <q,v> = {c2:.3e} (tolerance {EXPLICIT_CONSTRAINT_TOL:e})"
                ));
            }
            return Ok(InitialCondition::Explicit(p));
        }
        if let Some(el) = &self.elements {
            return Ok(InitialCondition::Elements(OrbitElements {
                colatitude: el.colatitude,
                eccentricity: el.eccentricity,
                inclination: el.inclination,
                node: el.node,
                argument: el.argument,
            }));
        }
        let s = self.sample.as_ref().expect("one source is present");
        Ok(InitialCondition::Sample { seed: s.seed, energy: (s.energy[0], s.energy[1]) })
    }
}

fn initial_state(init: &InitialCondition, params: &KeplerParams) -> kepler_sphere::Result<SpherePhasePoint> {
    match init {
        InitialCondition::Explicit(p) => project_to_ts3(p.q, p.v),
        InitialCondition::Elements(el) => orbit_from_elements(el, params),
        InitialCondition::Sample { seed, energy } => sample_phase_point(*seed, *energy, params.gamma),
    }
}

impl ToleranceSection {
    fn resolve(&self, scale: f64) -> std::result::Result<Tolerances, String> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(format!("--tol-scale must be positive, got {scale}"));
        }
        let d = Tolerances::default();
        let tol = Tolerances {
            tol_constraint: self.tol_constraint.unwrap_or(d.tol_constraint),
            tol_identity: self.tol_identity.unwrap_or(d.tol_identity),
            tol_drift: self.tol_drift.unwrap_or(d.tol_drift),
            tol_fd: self.tol_fd.unwrap_or(d.tol_fd),
            fd_step: d.fd_step,
        }
        .scaled(scale);
        tol.validate().map_err(|e| format!("tolerances: {e}"))?;
        Ok(tol)
    }
}

impl IntegratorSection {
    fn resolve(&self, start: &SpherePhasePoint, params: &KeplerParams) -> std::result::Result<IntegratorConfig<f64>, String> {
        let t_end = match (self.t_end, self.periods) {
            (Some(t), None) => t,
            (None, Some(n)) => {
                let cs = conserved_set(start, params).map_err(|e| format!("integrator.periods: {e}"))?;
                let period = orbital_period(&cs, params)
                    .map_err(|e| format!("integrator.periods needs a bound orbit: {e}"))?;
                n * period
            }
            _ => return Err("exactly one of integrator.t_end and integrator.periods is required".into()),
        };
        if self.reproject_every == 0 {
            return Err("integrator.reproject_every must be at least 1".into());
        }
        if self.sample_every == 0 {
            return Err("integrator.sample_every must be at least 1".into());
        }
        for (name, value) in [("rtol", self.rtol), ("atol", self.atol)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(format!("integrator.{name} must be positive, got {value}"));
            }
        }
        let method = match self.method {
            MethodName::Rk4 => Method::Rk4Projected,
            MethodName::Dop853 => Method::Dop853Projected,
        };
        let cfg = IntegratorConfig {
            method,
            dt: self.dt,
            t_end,
            reproject_every: self.reproject_every,
            collision_guard: self.collision_guard,
            sample_every: self.sample_every,
            rtol: self.rtol,
            atol: self.atol,
        };
        cfg.validate().map_err(|e| match e {
            KeplerError::InvalidConfig(msg) => format!("integrator: {msg}"),
            other => other.to_string(),
        })?;
        Ok(cfg)
    }
}
