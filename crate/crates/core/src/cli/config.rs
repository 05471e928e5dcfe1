//! Experiment configuration: a TOML document with defaults for every key.

use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{validate_lattice, LatticeParams, LatticeReport, MAX_LEVELS};
use crate::measurement::Grid;
use crate::walk::{RwMode, WalkConfig, DEFAULT_TRAJECTORIES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RwModeName {
    #[default]
    Ensemble,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSpec {
    pub alpha: f64,
    pub d: usize,
    /// Fock levels of the simulation basis; at least `d`, at most 64.
    pub fock_levels: usize,
    pub steps: usize,
    pub g_values: Vec<f64>,
    pub rw_mode: RwModeName,
    pub n_traj: usize,
    pub seed: u64,
    pub substeps: usize,
    pub quadrature_angle: f64,
    /// Defaults to [-12, 12] with 1201 points, widened for large n̄.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    pub out: PathBuf,
    pub allow_invalid_lattice: bool,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            alpha: 5.0,
            d: 31,
            fock_levels: MAX_LEVELS,
            steps: 15,
            g_values: vec![0.0, 0.01],
            rw_mode: RwModeName::Ensemble,
            n_traj: DEFAULT_TRAJECTORIES,
            seed: 42,
            substeps: 100,
            quadrature_angle: FRAC_PI_2,
            grid: None,
            out: PathBuf::from("out"),
            allow_invalid_lattice: false,
        }
    }
}

impl ExperimentSpec {
    pub fn lattice(&self) -> LatticeParams {
        LatticeParams::new(self.alpha, self.d)
    }

    pub fn lattice_report(&self) -> LatticeReport {
        validate_lattice(&self.lattice())
    }

    pub fn grid(&self) -> Grid {
        match self.grid {
            Some(g) => Grid {
                min: g.min,
                max: g.max,
                points: g.points,
            },
            None => Grid::for_mean_photons(self.alpha * self.alpha),
        }
    }

    pub fn rw_mode(&self) -> RwMode {
        match self.rw_mode {
            RwModeName::Ensemble => RwMode::Ensemble,
            RwModeName::MonteCarlo => RwMode::MonteCarlo {
                trajectories: self.n_traj,
            },
        }
    }

    /// Walk configuration for one curve with loss `g`.
    pub fn walk_config(&self, g: f64) -> WalkConfig {
        WalkConfig::new(self.alpha, self.d)
            .with_levels(self.fock_levels)
            .with_steps(self.steps)
            .with_loss(g)
            .with_substeps(self.substeps)
            .with_seed(self.seed)
    }

    /// Checks everything except the lattice conditions.
    pub fn check_parameters(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return bad(format!("alpha must be finite and >= 0, got {}", self.alpha));
        }
        if self.d == 0 || self.d > MAX_LEVELS {
            return bad(format!("d must be in 1..={MAX_LEVELS}, got {}", self.d));
        }
        if self.fock_levels < self.d || self.fock_levels > MAX_LEVELS {
            return bad(format!(
                "fock_levels must be in {}..={MAX_LEVELS}, got {}",
                self.d, self.fock_levels
            ));
        }
        if self.g_values.is_empty() {
            return bad("g_values must not be empty".into());
        }
        if let Some(g) = self.g_values.iter().find(|g| !(**g >= 0.0) || !g.is_finite()) {
            return bad(format!("g values must be finite and >= 0, got {g}"));
        }
        if self.substeps == 0 {
            return bad("substeps must be at least 1".into());
        }
        if self.rw_mode == RwModeName::MonteCarlo && self.n_traj == 0 {
            return bad("n_traj must be at least 1 in monte_carlo mode".into());
        }
        if !self.quadrature_angle.is_finite() {
            return bad("quadrature_angle must be finite".into());
        }
        self.grid().validate().map_err(|e| Error::Config(e.to_string()))
    }

    /// Full validation, including the lattice gate unless overridden.
    pub fn validate(&self) -> Result<()> {
        self.check_parameters()?;
        let report = self.lattice_report();
        if !report.pass() && !self.allow_invalid_lattice {
            return Err(Error::InvalidLattice(format!(
                "{report}\n(set allow_invalid_lattice = true to run anyway)"
            )));
        }
        Ok(())
    }

    /// TOML echo of the spec, used in output provenance.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }
}

/// Parses without validation; CLI overrides are applied before validating.
pub fn parse_unvalidated(text: &str) -> Result<ExperimentSpec> {
    toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
}

pub fn parse_config(text: &str) -> Result<ExperimentSpec> {
    let spec = parse_unvalidated(text)?;
    spec.validate()?;
    Ok(spec)
}
