//! Flat JSON experiment configuration.

use std::path::Path;

use rlcnet_core::geometry::{rasterize_quarter_stadium, rasterize_rectangle, BcKind, GridGeometry, ShuntRl};
use rlcnet_core::network::{CircuitSpec, Model, ToleranceLaw, ToleranceSettings};
use serde::{Deserialize, Serialize};

use crate::RunError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Spectrum,
    Drive,
    Sweep,
    Ensemble,
    Stats,
    Streamlines,
    Oracle,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Spectrum => "spectrum",
            Experiment::Drive => "drive",
            Experiment::Sweep => "sweep",
            Experiment::Ensemble => "ensemble",
            Experiment::Stats => "stats",
            Experiment::Streamlines => "streamlines",
            Experiment::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    QuarterStadium,
    Rectangle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelName {
    I,
    II,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Dirichlet,
    Neumann,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    Explicit,
    DensityMaximum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LawName {
    Uniform,
    TruncatedGaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Eigenmode,
    Driven,
}

fn d_model() -> ModelName {
    ModelName::I
}
fn d_l() -> f64 {
    1e-4
}
fn d_c() -> f64 {
    1e-9
}
fn d_boundary() -> Boundary {
    Boundary::Dirichlet
}
fn d_placement() -> Placement {
    Placement::DensityMaximum
}
fn d_iter() -> usize {
    3
}
fn d_law() -> LawName {
    LawName::Uniform
}
fn d_true() -> bool {
    true
}
fn d_taus() -> Vec<f64> {
    vec![0.01, 0.03, 0.05]
}
fn d_realizations() -> usize {
    100
}
fn d_target() -> Target {
    Target::Eigenmode
}
fn d_ens_bins() -> usize {
    40
}
fn d_bins() -> usize {
    50
}
fn d_modes() -> usize {
    10
}
fn d_points() -> usize {
    101
}
fn d_mask() -> f64 {
    1.0
}
fn d_seeds() -> usize {
    24
}
fn d_steps() -> usize {
    20_000
}
fn d_samples() -> usize {
    1_000_000
}
fn d_sigma() -> f64 {
    1.0
}

/// One experiment. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Must match the subcommand when given.
    #[serde(default)]
    pub experiment: Option<Experiment>,

    pub geometry: Shape,
    pub a0: f64,
    /// Interior sites along x and y for a rectangle.
    #[serde(default)]
    pub nx: Option<usize>,
    #[serde(default)]
    pub ny: Option<usize>,

    #[serde(default = "d_model")]
    pub model: ModelName,
    #[serde(default = "d_l")]
    pub inductance: f64,
    #[serde(default = "d_c")]
    pub capacitance: f64,
    #[serde(default)]
    pub resistance: f64,

    #[serde(default = "d_boundary")]
    pub boundary: Boundary,
    /// Shunt of mixed boundary sites.
    #[serde(default)]
    pub mixed_resistance: Option<f64>,
    #[serde(default)]
    pub mixed_inductance: Option<f64>,

    /// Drive or target frequency, rad/s.
    #[serde(default)]
    pub omega: Option<f64>,
    #[serde(default)]
    pub omega_min: Option<f64>,
    #[serde(default)]
    pub omega_max: Option<f64>,
    #[serde(default = "d_points")]
    pub n_points: usize,
    #[serde(default = "d_modes")]
    pub n_modes: usize,

    /// Source site `[i, j]`; the start of the search under `density_maximum`.
    #[serde(default)]
    pub source: Option<[usize; 2]>,
    #[serde(default = "d_placement")]
    pub placement: Placement,
    #[serde(default = "d_iter")]
    pub place_iterations: usize,

    #[serde(default)]
    pub tau: f64,
    #[serde(default = "d_law")]
    pub tolerance_law: LawName,
    #[serde(default = "d_true")]
    pub resistance_follows_inductor: bool,

    #[serde(default = "d_taus")]
    pub taus: Vec<f64>,
    #[serde(default = "d_realizations")]
    pub n_realizations: usize,
    #[serde(default = "d_target")]
    pub ensemble_target: Target,
    #[serde(default = "d_ens_bins")]
    pub ensemble_bins: usize,

    #[serde(default = "d_mask")]
    pub mask_wavelengths: f64,
    #[serde(default = "d_bins")]
    pub bins: usize,

    #[serde(default = "d_seeds")]
    pub streamline_seeds: usize,
    #[serde(default = "d_steps")]
    pub max_steps: usize,

    #[serde(default = "d_sigma")]
    pub sigma_r: f64,
    #[serde(default = "d_sigma")]
    pub sigma_i: f64,
    #[serde(default = "d_samples")]
    pub n_samples: usize,

    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<String>,
}

fn cfg_err(field: &str, msg: impl std::fmt::Display) -> RunError {
    RunError::Config(format!("{field}: {msg}"))
}

fn positive(field: &str, v: f64) -> Result<(), RunError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(cfg_err(field, "must be positive"))
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, RunError> {
        serde_json::from_str(text).map_err(|e| RunError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks the parameters `kind` needs.
    pub fn validate(&self, kind: Experiment) -> Result<(), RunError> {
        if let Some(e) = self.experiment {
            if e != kind {
                return Err(cfg_err(
                    "experiment",
                    format!("config is for `{}`, not `{}`", e.name(), kind.name()),
                ));
            }
        }
        positive("a0", self.a0)?;
        positive("inductance", self.inductance)?;
        positive("capacitance", self.capacitance)?;
        if !(self.resistance >= 0.0 && self.resistance.is_finite()) {
            return Err(cfg_err("resistance", "must be non-negative"));
        }
        if kind != Experiment::Oracle && self.geometry == Shape::Rectangle && (self.nx.is_none() || self.ny.is_none()) {
            return Err(cfg_err("nx", "a rectangle needs nx and ny"));
        }
        if self.boundary == Boundary::Mixed {
            positive("mixed_inductance", self.mixed_inductance.unwrap_or(f64::NAN))?;
            if !self.mixed_resistance.is_some_and(|r| r >= 0.0) {
                return Err(cfg_err(
                    "mixed_resistance",
                    "required and non-negative for mixed boundaries",
                ));
            }
        }
        if !(0.0..1.0 / 3.0).contains(&self.tau) {
            return Err(cfg_err("tau", "must lie in [0, 1/3)"));
        }
        let needs_omega = matches!(
            kind,
            Experiment::Drive | Experiment::Ensemble | Experiment::Stats | Experiment::Streamlines
        );
        if needs_omega {
            positive("omega", self.omega.unwrap_or(f64::NAN))?;
        }
        match kind {
            Experiment::Sweep => {
                positive("omega_min", self.omega_min.unwrap_or(f64::NAN))?;
                positive("omega_max", self.omega_max.unwrap_or(f64::NAN))?;
                if self.omega_max <= self.omega_min {
                    return Err(cfg_err("omega_max", "must exceed omega_min"));
                }
                if self.source.is_none() {
                    return Err(cfg_err("source", "a sweep needs an explicit source"));
                }
            }
            Experiment::Spectrum if self.n_modes == 0 => return Err(cfg_err("n_modes", "must be at least 1")),
            Experiment::Ensemble => {
                if self.n_realizations == 0 {
                    return Err(cfg_err("n_realizations", "must be at least 1"));
                }
                if self.taus.iter().any(|t| !(0.0..1.0 / 3.0).contains(t)) {
                    return Err(cfg_err("taus", "each must lie in [0, 1/3)"));
                }
                if self.taus.contains(&0.0) && self.n_realizations > 1 {
                    return Err(cfg_err(
                        "taus",
                        "τ = 0 with several realizations is a degenerate ensemble",
                    ));
                }
                if self.ensemble_target == Target::Driven && self.source.is_none() {
                    return Err(cfg_err("source", "a driven ensemble needs an explicit source"));
                }
                if self.seed.is_none() {
                    return Err(cfg_err("seed", "required for an ensemble"));
                }
            }
            Experiment::Oracle => {
                positive("sigma_r", self.sigma_r)?;
                positive("sigma_i", self.sigma_i)?;
                if self.n_samples == 0 {
                    return Err(cfg_err("n_samples", "must be at least 1"));
                }
                if self.seed.is_none() {
                    return Err(cfg_err("seed", "required for the oracle"));
                }
            }
            _ => {}
        }
        if self.tau > 0.0 && self.seed.is_none() {
            return Err(cfg_err("seed", "required when tau > 0"));
        }
        if self.placement == Placement::Explicit
            && matches!(kind, Experiment::Drive | Experiment::Stats | Experiment::Streamlines)
            && self.source.is_none()
        {
            return Err(cfg_err("source", "explicit placement needs a source"));
        }
        Ok(())
    }

    pub fn spec(&self) -> Result<CircuitSpec, RunError> {
        let model = match self.model {
            ModelName::I => Model::I,
            ModelName::II => Model::II,
        };
        CircuitSpec::new(model, self.inductance, self.capacitance, self.resistance).map_err(|e| cfg_err("circuit", e))
    }

    pub fn geometry(&self) -> Result<GridGeometry, RunError> {
        let g = match self.geometry {
            Shape::QuarterStadium => rasterize_quarter_stadium(self.a0),
            Shape::Rectangle => rasterize_rectangle(self.nx.unwrap_or(0), self.ny.unwrap_or(0), self.a0),
        }
        .map_err(|e| cfg_err("geometry", e))?;
        let kind = match self.boundary {
            Boundary::Dirichlet => return Ok(g),
            Boundary::Neumann => BcKind::Neumann,
            Boundary::Mixed => BcKind::Mixed(
                ShuntRl::new(
                    self.mixed_resistance.unwrap_or(0.0),
                    self.mixed_inductance.unwrap_or(0.0),
                )
                .map_err(|e| cfg_err("mixed_inductance", e))?,
            ),
        };
        Ok(g.tag_boundary(kind))
    }

    pub fn tolerance(&self, tau: f64) -> ToleranceSettings {
        let mut t = ToleranceSettings::new(tau);
        t.law = match self.tolerance_law {
            LawName::Uniform => ToleranceLaw::Uniform,
            LawName::TruncatedGaussian => ToleranceLaw::TruncatedGaussian,
        };
        t.resistance_follows_inductor = self.resistance_follows_inductor;
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{"geometry": "rectangle", "a0": 0.1, "nx": 9, "ny": 9}"#;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_json(BASE).unwrap();
        assert_eq!(c.inductance, 1e-4);
        assert_eq!(c.place_iterations, 3);
        assert!(c.validate(Experiment::Spectrum).is_ok());
        assert_eq!(c.geometry().unwrap().interior().len(), 81);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = ExperimentConfig::from_json(r#"{"geometry": "rectangle", "a0": 0.1, "inductanse": 1.0}"#).unwrap_err();
        assert!(matches!(e, RunError::Config(ref m) if m.contains("inductanse")));
    }

    #[test]
    fn validation_names_the_field() {
        let mut c = ExperimentConfig::from_json(BASE).unwrap();
        let msg = |r: Result<(), RunError>| match r {
            Err(RunError::Config(m)) => m,
            other => panic!("{other:?}"),
        };
        assert!(msg(c.validate(Experiment::Drive)).starts_with("omega"));
        c.omega = Some(1e6);
        c.tau = 0.01;
        assert!(msg(c.validate(Experiment::Drive)).starts_with("seed"));
        c.seed = Some(1);
        c.experiment = Some(Experiment::Sweep);
        assert!(msg(c.validate(Experiment::Drive)).starts_with("experiment"));
        c.experiment = None;
        c.a0 = -1.0;
        assert!(msg(c.validate(Experiment::Drive)).starts_with("a0"));
    }
}
