//! JSON experiment configuration.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::ControlSpec;
use crate::grid::GridSpec;
use crate::params::ModelParams;

/// Everything an experiment run depends on besides the subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelParams,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default = "defaults::n_modes")]
    pub n_modes: usize,
    #[serde(default = "defaults::horizon")]
    pub horizon: f64,
    #[serde(default = "defaults::control")]
    pub control: ControlSpec,
    /// Nested control-family sizes for the approximate-controllability sweep.
    #[serde(default = "defaults::control_sizes")]
    pub control_sizes: Vec<usize>,
    /// Regularization values for the ε-sweep.
    #[serde(default = "defaults::epsilons")]
    pub epsilons: Vec<f64>,
    /// Regularization for the approximate-controllability table.
    #[serde(default = "defaults::synthesis_epsilon")]
    pub synthesis_epsilon: f64,
    #[serde(default)]
    pub oracles: OracleToggles,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

/// Optional cross-checks that cost more than the experiment itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleToggles {
    /// Compare the series solution with implicit time stepping in `simulate`.
    #[serde(default)]
    pub time_stepping: bool,
    #[serde(default = "defaults::time_steps")]
    pub time_steps: usize,
    /// Panel counts for the duality refinement table.
    #[serde(default = "defaults::refinement_panels")]
    pub refinement_panels: Vec<usize>,
}

impl Default for OracleToggles {
    fn default() -> Self {
        OracleToggles {
            time_stepping: false,
            time_steps: defaults::time_steps(),
            refinement_panels: defaults::refinement_panels(),
        }
    }
}

mod defaults {
    use crate::forward::ControlSpec;

    pub fn n_modes() -> usize {
        64
    }
    pub fn horizon() -> f64 {
        4.0
    }
    pub fn control() -> ControlSpec {
        ControlSpec { region: (1.2, 1.8), profiles: 2, time_panels: 64 }
    }
    pub fn control_sizes() -> Vec<usize> {
        vec![4, 8, 16, 32]
    }
    pub fn synthesis_epsilon() -> f64 {
        1e-8
    }
    pub fn epsilons() -> Vec<f64> {
        (2..=10).map(|k| 10f64.powi(-k)).collect()
    }
    pub fn time_steps() -> usize {
        2048
    }
    pub fn refinement_panels() -> Vec<usize> {
        vec![4, 8, 16, 64]
    }
}

impl ExperimentConfig {
    /// The reference configuration: s = 0.6, α = 1.2, b = 10, c = 1, T = 4,
    /// Ω = (−1, 1) with 256 cells, 64 modes, control on (1.2, 1.8).
    pub fn reference() -> Self {
        ExperimentConfig {
            model: ModelParams::new(1.2, 10.0, 1.0, 0.6).expect("reference parameters satisfy the standing assumptions"),
            grid: GridSpec::default(),
            n_modes: defaults::n_modes(),
            horizon: defaults::horizon(),
            control: defaults::control(),
            control_sizes: defaults::control_sizes(),
            epsilons: defaults::epsilons(),
            synthesis_epsilon: defaults::synthesis_epsilon(),
            oracles: OracleToggles::default(),
            output_dir: None,
            seed: 0,
        }
    }

    /// Parse and validate. Syntax errors carry serde's line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let field = |name: &str, msg: String| Err(Error::Config(format!("{name}: {msg}")));
        let g = &self.grid;
        if !(g.omega_lo < g.omega_hi) {
            return field("grid", format!("omega_lo = {} must be below omega_hi = {}", g.omega_lo, g.omega_hi));
        }
        if g.n_interior < 2 {
            return field("grid.n_interior", format!("{} cells is too few", g.n_interior));
        }
        if !(g.exterior_half_width > 0.0) {
            return field("grid.exterior_half_width", format!("{} must be positive", g.exterior_half_width));
        }
        if self.n_modes == 0 || self.n_modes > g.n_interior {
            return field("n_modes", format!("{} must lie in 1..={}", self.n_modes, g.n_interior));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return field("horizon", format!("T = {} must be positive", self.horizon));
        }
        let (lo, hi) = self.control.region;
        if !(lo < hi) {
            return field("control.region", format!("({lo}, {hi}) is empty"));
        }
        if hi > g.omega_lo && lo < g.omega_hi {
            return field(
                "control.region",
                format!("({lo}, {hi}) meets Ω = ({}, {}); the control set must be exterior", g.omega_lo, g.omega_hi),
            );
        }
        let r = g.exterior_half_width;
        if lo < g.omega_lo - r || hi > g.omega_hi + r {
            return field("control.region", format!("({lo}, {hi}) leaves the exterior band of half-width {r}"));
        }
        if self.control.profiles == 0 || self.control.time_panels == 0 {
            return field("control", "profiles and time_panels must be positive".into());
        }
        if self.control_sizes.is_empty() || self.control_sizes.contains(&0) {
            return field("control_sizes", "must be a non-empty list of positive sizes".into());
        }
        if !(self.synthesis_epsilon > 0.0 && self.synthesis_epsilon.is_finite()) {
            return field("synthesis_epsilon", format!("{} is not a positive regularization", self.synthesis_epsilon));
        }
        if let Some(e) = self.epsilons.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return field("epsilons", format!("{e} is not a positive regularization"));
        }
        if self.oracles.time_steps == 0 {
            return field("oracles.time_steps", "must be positive".into());
        }
        if self.oracles.refinement_panels.contains(&0) {
            return field("oracles.refinement_panels", "panel counts must be positive".into());
        }
        Ok(())
    }

    pub fn largest_control_size(&self) -> usize {
        self.control_sizes.iter().copied().max().unwrap_or(1)
    }
}
