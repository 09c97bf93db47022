//! Scenario configuration: the TOML schema, its defaults, and resolution
//! into the core types.
//!
//! ```toml
//! mode = "restricted"          # or "generalized"
//! prob_mut = 0.1
//! rng_seed = 1234
//! output_dir = "out"
//!
//! [geometry]
//! grid_points = 15             # M
//! d_over_lambda = 0.5
//! angle_min_deg = -89.0
//! angle_max_deg = 89.0
//! angle_step_deg = 1.0
//!
//! [design]
//! targets_deg = [-50.0, 0.0, 50.0]
//! beamwidth_deg = 20.0
//! weights = 1.0                # scalar broadcast, or a per-angle array
//! omega_c = 1.0
//! power_budget_c = 1.0
//! antenna_budget_n = 10
//! penalty_rho = 0.0
//!
//! [solver]                     # optional, defaults shown
//! max_iterations = 2000
//! rel_tolerance = 1e-7
//! initial_step = 1.0
//! step_shrink = 0.5
//! sufficient_decrease = 1e-4
//! dykstra_max = 200
//! dykstra_tol = 1e-10
//! alpha_floor = 1e-9
//!
//! [outer]                      # optional
//! max_cycles = 20
//! tolerance = 1e-6
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use txbeam_core::{ArrayGeometry, DesignOptions, DesignSpec, SearchMode, SolverSettings};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub geometry: GeometryConfig,
    pub design: DesignConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub outer: OuterConfig,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default = "default_prob_mut")]
    pub prob_mut: f64,
    /// Seed of the search RNG stream; required so every run is
    /// reproducible from its config.
    pub rng_seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_prob_mut() -> f64 {
    0.1
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Restricted,
    Generalized,
}

impl From<Mode> for SearchMode {
    fn from(mode: Mode) -> Self {
        match mode {
            Mode::Restricted => SearchMode::Restricted,
            Mode::Generalized => SearchMode::Generalized,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub grid_points: usize,
    pub d_over_lambda: f64,
    #[serde(default = "default_angle_min")]
    pub angle_min_deg: f64,
    #[serde(default = "default_angle_max")]
    pub angle_max_deg: f64,
    #[serde(default = "default_angle_step")]
    pub angle_step_deg: f64,
}

fn default_angle_min() -> f64 {
    -89.0
}

fn default_angle_max() -> f64 {
    89.0
}

fn default_angle_step() -> f64 {
    1.0
}

/// Scalar broadcast over the grid, or one weight per grid angle.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Weights {
    Scalar(f64),
    PerAngle(Vec<f64>),
}

impl Default for Weights {
    fn default() -> Self {
        Weights::Scalar(1.0)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    #[serde(default)]
    pub targets_deg: Vec<f64>,
    pub beamwidth_deg: f64,
    #[serde(default)]
    pub weights: Weights,
    #[serde(default)]
    pub omega_c: f64,
    #[serde(default = "default_power_budget")]
    pub power_budget_c: f64,
    pub antenna_budget_n: usize,
    #[serde(default)]
    pub penalty_rho: f64,
}

fn default_power_budget() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub max_iterations: usize,
    pub rel_tolerance: f64,
    pub initial_step: f64,
    pub step_shrink: f64,
    pub sufficient_decrease: f64,
    pub dykstra_max: usize,
    pub dykstra_tol: f64,
    pub alpha_floor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let s = SolverSettings::default();
        Self {
            max_iterations: s.max_iterations,
            rel_tolerance: s.rel_tolerance,
            initial_step: s.initial_step,
            step_shrink: s.step_shrink,
            sufficient_decrease: s.sufficient_decrease,
            dykstra_max: s.dykstra_max,
            dykstra_tol: s.dykstra_tol,
            alpha_floor: s.alpha_floor,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OuterConfig {
    pub max_cycles: usize,
    pub tolerance: f64,
}

impl Default for OuterConfig {
    fn default() -> Self {
        Self {
            max_cycles: 20,
            tolerance: 1e-6,
        }
    }
}

impl ScenarioConfig {
    /// Parses a TOML config file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Validation(format!("cannot read config {}: {e}", path.display()))
        })?;
        toml::from_str(&text)
            .map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))
    }

    /// Builds the angle grid values from min/max/step.
    pub fn angle_grid(&self) -> Vec<f64> {
        let g = &self.geometry;
        let mut grid = Vec::new();
        let mut k = 0usize;
        loop {
            let theta = g.angle_min_deg + g.angle_step_deg * k as f64;
            if theta > g.angle_max_deg + 1e-9 {
                break;
            }
            grid.push(theta);
            k += 1;
            if k > 1_000_000 {
                break;
            }
        }
        grid
    }

    /// Resolves the scenario into validated core types.
    pub fn resolve(&self) -> Result<ResolvedScenario, CliError> {
        if self.geometry.angle_step_deg <= 0.0 || !self.geometry.angle_step_deg.is_finite() {
            return Err(CliError::Validation(format!(
                "geometry.angle_step_deg must be positive, got {}",
                self.geometry.angle_step_deg
            )));
        }
        let grid = self.angle_grid();
        let geom = ArrayGeometry::new(self.geometry.grid_points, self.geometry.d_over_lambda, grid)
            .map_err(CliError::validation)?;
        let k_angles = geom.angle_count();
        let weights = match &self.design.weights {
            Weights::Scalar(w) => vec![*w; k_angles],
            Weights::PerAngle(w) => w.clone(),
        };
        let spec = DesignSpec::builder(geom)
            .targets_deg(self.design.targets_deg.clone())
            .beamwidth_deg(self.design.beamwidth_deg)
            .weights(weights)
            .cross_weight(self.design.omega_c)
            .power_budget(self.design.power_budget_c)
            .antenna_budget(self.design.antenna_budget_n)
            .penalty(self.design.penalty_rho)
            .build()
            .map_err(CliError::validation)?;

        let solver = SolverSettings {
            max_iterations: self.solver.max_iterations,
            rel_tolerance: self.solver.rel_tolerance,
            initial_step: self.solver.initial_step,
            step_shrink: self.solver.step_shrink,
            sufficient_decrease: self.solver.sufficient_decrease,
            dykstra_max: self.solver.dykstra_max,
            dykstra_tol: self.solver.dykstra_tol,
            alpha_floor: self.solver.alpha_floor,
        };
        solver.validate().map_err(CliError::validation)?;

        let options = DesignOptions {
            mode: self.mode.into(),
            prob_mut: self.prob_mut,
            rng_seed: self.rng_seed,
            outer_max: self.outer.max_cycles,
            outer_tol: self.outer.tolerance,
            ..DesignOptions::default()
        };

        Ok(ResolvedScenario {
            spec,
            solver,
            options,
        })
    }
}

/// Core types resolved from a [`ScenarioConfig`].
#[derive(Debug)]
pub struct ResolvedScenario {
    pub spec: DesignSpec,
    pub solver: SolverSettings,
    pub options: DesignOptions,
}
