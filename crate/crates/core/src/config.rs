//! Declarative experiment configuration: one JSON document per experiment.
//! Unknown keys are rejected; numeric preconditions are validated with
//! errors naming the offending field.

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    make_bz_map, make_standard_map, MapModel, NoiseKernel, PerturbationS, PerturbationSpec,
    StandardMap,
};
use crate::error::{EngineError, Result};
use crate::measures::{Grid, NormKind};
use crate::operator::BoundaryMode;
use crate::system::System;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemConfig,
    #[serde(default)]
    pub perturbation: Option<PerturbationConfig>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub mixing: MixingConfig,
    #[serde(default)]
    pub validate: ValidateConfig,
    #[serde(default)]
    pub simulate: SimulateConfig,
    #[serde(default)]
    pub control: ControlConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub map: MapConfig,
    pub kernel: KernelConfig,
    /// Cell count of the uniform grid (kept signed so a bad sign fails
    /// validation with a named field rather than a serde type error).
    pub grid_n: i64,
    pub boundary: BoundaryMode,
    #[serde(default = "default_quadrature")]
    pub quadrature_k: i64,
}

fn default_quadrature() -> i64 {
    64
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase", deny_unknown_fields)]
pub enum MapConfig {
    Doubling,
    Tent,
    Rotation { theta: f64 },
    Bz,
}

impl MapConfig {
    pub fn build(&self) -> Result<MapModel> {
        match self {
            MapConfig::Doubling => Ok(make_standard_map(StandardMap::Doubling)),
            MapConfig::Tent => Ok(make_standard_map(StandardMap::Tent)),
            MapConfig::Rotation { theta } => {
                if !(0.0..1.0).contains(theta) {
                    return Err(EngineError::invalid_config(
                        "system.map.theta",
                        format!("rotation angle {theta} must be in [0,1)"),
                    ));
                }
                Ok(make_standard_map(StandardMap::Rotation(*theta)))
            }
            MapConfig::Bz => Ok(make_bz_map()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase", deny_unknown_fields)]
pub enum KernelConfig {
    Uniform {
        radius: f64,
    },
    /// General step kernel with support in [-1, 1].
    Step {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
}

impl KernelConfig {
    pub fn build(&self) -> Result<NoiseKernel> {
        match self {
            KernelConfig::Uniform { radius } => NoiseKernel::uniform(*radius),
            KernelConfig::Step {
                breakpoints,
                values,
            } => NoiseKernel::new("step", breakpoints.clone(), values.clone(), vec![]),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PerturbationConfig {
    /// Deterministic map perturbation; give either explicit nodes or a bump.
    Map {
        #[serde(default)]
        nodes: Option<Vec<(f64, f64)>>,
        #[serde(default)]
        bump: Option<BumpConfig>,
        /// Neighborhood of a critical maximizer that the support must avoid.
        #[serde(default = "default_exclusion_radius")]
        max_exclusion_radius: f64,
    },
    /// Noise-radius perturbation of the system's uniform kernel.
    Noise {},
    Mixture {
        second_map: MapConfig,
    },
}

fn default_exclusion_radius() -> f64 {
    0.02
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpConfig {
    pub center: f64,
    pub halfwidth: f64,
    pub height: f64,
}

impl PerturbationConfig {
    /// Build the perturbation and check it against the system: noise-radius
    /// perturbations need a uniform kernel; map perturbations of a map with
    /// a critical maximizer must keep their support away from it.
    pub fn build(&self, system: &SystemConfig) -> Result<PerturbationSpec> {
        match self {
            PerturbationConfig::Map {
                nodes,
                bump,
                max_exclusion_radius,
            } => {
                let s = match (nodes, bump) {
                    (Some(nodes), None) => PerturbationS::new(nodes.clone())?,
                    (None, Some(b)) => PerturbationS::bump(b.center, b.halfwidth, b.height)?,
                    _ => {
                        return Err(EngineError::invalid_config(
                            "perturbation",
                            "give exactly one of `nodes` or `bump`",
                        ))
                    }
                };
                let map = system.map.build()?;
                if let Some(m) = map.maximizer() {
                    if map.critical_points().contains(&m) {
                        let clash = s.support().iter().any(|(lo, hi)| {
                            *lo < m + max_exclusion_radius && *hi > m - max_exclusion_radius
                        });
                        if clash {
                            return Err(EngineError::invalid_config(
                                "perturbation",
                                format!(
                                    "support of S must avoid ({}, {}) around the map's \
                                     critical maximizer",
                                    m - max_exclusion_radius,
                                    m + max_exclusion_radius
                                ),
                            ));
                        }
                    }
                }
                Ok(PerturbationSpec::Map(s))
            }
            PerturbationConfig::Noise {} => match &system.kernel {
                KernelConfig::Uniform { radius } => Ok(PerturbationSpec::NoiseRadius {
                    base_radius: *radius,
                }),
                _ => Err(EngineError::invalid_config(
                    "perturbation",
                    "noise-radius perturbation requires a uniform kernel",
                )),
            },
            PerturbationConfig::Mixture { second_map } => Ok(PerturbationSpec::Mixture {
                second_map: second_map.build()?,
            }),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: i64,
    #[serde(default = "default_tol")]
    pub resolvent_tol: f64,
    #[serde(default = "default_max_iter")]
    pub resolvent_max_terms: i64,
}

fn default_tol() -> f64 {
    1e-12
}

fn default_max_iter() -> i64 {
    20_000
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: default_tol(),
            max_iter: default_max_iter(),
            resolvent_tol: default_tol(),
            resolvent_max_terms: default_max_iter(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixingConfig {
    #[serde(default = "default_n_steps")]
    pub n_steps: i64,
    /// Force or suppress the exact pairwise mode; default: automatic by
    /// grid size.
    #[serde(default)]
    pub exact: Option<bool>,
}

fn default_n_steps() -> i64 {
    20
}

impl Default for MixingConfig {
    fn default() -> Self {
        MixingConfig {
            n_steps: default_n_steps(),
            exact: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    #[serde(default = "default_deltas")]
    pub deltas: Vec<f64>,
    /// Norm override; default is picked by perturbation kind.
    #[serde(default)]
    pub norm: Option<NormKind>,
}

fn default_deltas() -> Vec<f64> {
    vec![1e-1, 1e-2, 1e-3]
}

impl Default for ValidateConfig {
    fn default() -> Self {
        ValidateConfig {
            deltas: default_deltas(),
            norm: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(default = "default_samples")]
    pub samples: i64,
    #[serde(default = "default_burn_in")]
    pub burn_in: i64,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
}

fn default_samples() -> i64 {
    1_000_000
}

fn default_burn_in() -> i64 {
    10_000
}

fn default_seeds() -> Vec<u64> {
    vec![1, 2, 3]
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            samples: default_samples(),
            burn_in: default_burn_in(),
            seeds: default_seeds(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ControlConfig {
    /// Target response direction, as a density CSV path.
    #[serde(default)]
    pub target_csv: Option<String>,
    #[serde(default = "default_ridge")]
    pub ridge: f64,
    #[serde(default = "default_floor")]
    pub denominator_floor: f64,
}

fn default_ridge() -> f64 {
    crate::control::DEFAULT_RIDGE
}

fn default_floor() -> f64 {
    crate::control::DEFAULT_DENOMINATOR_FLOOR
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Also export the annealed matrix in triplet text form.
    #[serde(default)]
    pub export_matrix: bool,
    /// Run the BV-stability refinement diagnostic during `respond`.
    #[serde(default)]
    pub bv_diagnostic: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<ExperimentConfig> {
        let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| {
            EngineError::invalid_config("config", format!("not a valid experiment: {e}"))
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.system.grid_n < 2 {
            return Err(EngineError::invalid_config(
                "system.grid_n",
                format!("grid needs at least 2 cells, got {}", self.system.grid_n),
            ));
        }
        if self.system.quadrature_k < 1 {
            return Err(EngineError::invalid_config(
                "system.quadrature_k",
                "need at least one quadrature sample per cell",
            ));
        }
        self.system.map.build()?;
        self.system.kernel.build().map_err(|e| match e {
            EngineError::BadRadius { radius, max } => EngineError::invalid_config(
                "system.kernel.radius",
                format!("radius {radius} outside (0, {max}]"),
            ),
            other => other,
        })?;
        if let Some(p) = &self.perturbation {
            p.build(&self.system)?;
        }
        if !(self.solver.tol > 0.0) {
            return Err(EngineError::invalid_config(
                "solver.tol",
                "tolerance must be positive",
            ));
        }
        if self.solver.max_iter < 1 || self.solver.resolvent_max_terms < 1 {
            return Err(EngineError::invalid_config(
                "solver.max_iter",
                "iteration budgets must be positive",
            ));
        }
        if self.mixing.n_steps < 1 {
            return Err(EngineError::invalid_config(
                "mixing.n_steps",
                "need at least one step",
            ));
        }
        for w in self.validate.deltas.windows(2) {
            if !(w[0] > w[1]) {
                return Err(EngineError::invalid_config(
                    "validate.deltas",
                    "δ values must be strictly decreasing",
                ));
            }
        }
        if self.validate.deltas.iter().any(|d| *d <= 0.0) {
            return Err(EngineError::invalid_config(
                "validate.deltas",
                "δ values must be positive",
            ));
        }
        if self.simulate.samples <= self.simulate.burn_in || self.simulate.burn_in < 0 {
            return Err(EngineError::invalid_config(
                "simulate.samples",
                "need samples > burn_in >= 0",
            ));
        }
        if self.simulate.seeds.is_empty() {
            return Err(EngineError::invalid_config(
                "simulate.seeds",
                "need at least one seed",
            ));
        }
        if !(self.control.ridge >= 0.0) {
            return Err(EngineError::invalid_config(
                "control.ridge",
                "ridge weight must be nonnegative",
            ));
        }
        Ok(())
    }

    pub fn build_system(&self) -> Result<System> {
        System::build(
            self.system.map.build()?,
            self.system.kernel.build()?,
            Grid::new(self.system.grid_n as usize),
            self.system.boundary,
            self.system.quadrature_k as usize,
        )
    }

    pub fn build_perturbation(&self) -> Result<Option<PerturbationSpec>> {
        self.perturbation
            .as_ref()
            .map(|p| p.build(&self.system))
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "system": {
            "map": {"name": "doubling"},
            "kernel": {"name": "uniform", "radius": 0.1},
            "grid_n": 64,
            "boundary": "reflecting"
        }
    }"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let config = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(config.system.quadrature_k, 64);
        assert_eq!(config.solver.tol, 1e-12);
        assert_eq!(config.simulate.seeds, vec![1, 2, 3]);
        config.build_system().unwrap();
    }

    #[test]
    fn negative_grid_is_named_in_the_error() {
        let bad = MINIMAL.replace("\"grid_n\": 64", "\"grid_n\": -5");
        let err = ExperimentConfig::from_json(&bad).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("grid_n"), "message should name the field: {msg}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = MINIMAL.replace("\"grid_n\": 64", "\"grid_n\": 64, \"typo_key\": 1");
        assert!(ExperimentConfig::from_json(&bad).is_err());
    }

    #[test]
    fn bz_map_perturbation_must_avoid_maximizer() {
        let config = r#"{
            "system": {
                "map": {"name": "bz"},
                "kernel": {"name": "uniform", "radius": 0.0086},
                "grid_n": 64,
                "boundary": "reflecting"
            },
            "perturbation": {
                "kind": "map",
                "bump": {"center": 0.3, "halfwidth": 0.05, "height": 0.02}
            }
        }"#;
        let err = ExperimentConfig::from_json(config).unwrap_err();
        assert!(err.to_string().contains("maximizer"));

        let good = config.replace("\"center\": 0.3", "\"center\": 0.6");
        ExperimentConfig::from_json(&good).unwrap();
    }

    #[test]
    fn noise_perturbation_needs_uniform_kernel() {
        let config = r#"{
            "system": {
                "map": {"name": "doubling"},
                "kernel": {"name": "step", "breakpoints": [-0.1, 0.1], "values": [5.0]},
                "grid_n": 64,
                "boundary": "reflecting"
            },
            "perturbation": {"kind": "noise"}
        }"#;
        let err = ExperimentConfig::from_json(config).unwrap_err();
        assert!(err.to_string().contains("uniform"));
    }

    #[test]
    fn tent_map_perturbation_at_maximizer_is_fine() {
        // The tent maximizer is not a critical point (|T'| = 2 there), so no
        // exclusion applies.
        let config = r#"{
            "system": {
                "map": {"name": "tent"},
                "kernel": {"name": "uniform", "radius": 0.1},
                "grid_n": 64,
                "boundary": "reflecting"
            },
            "perturbation": {
                "kind": "map",
                "bump": {"center": 0.5, "halfwidth": 0.2, "height": 0.1}
            }
        }"#;
        ExperimentConfig::from_json(config).unwrap();
    }
}
