//! Run configuration: a strict JSON schema with documented defaults.
//!
//! Unknown keys are hard errors, so a typo cannot silently fall back to
//! a default. Every run emits the fully-populated configuration under
//! `effective_config` in results.json; feeding that block back in as a
//! config file reproduces the run.

use std::f64::consts::TAU;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use crate::Suite;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub grid: GridConfig,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
    /// Time step; required by the `evolve` and `crossval` suites,
    /// ignored by the static check suites.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    /// A sample is recorded every this many steps.
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default)]
    pub potential: PotentialConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    /// Number of randomized trials in the check suites.
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Number of grid points on the periodic circle (even, ≥ 16).
    pub points: usize,
    /// Circumference of the evolution domain. The check suites
    /// (`verify-geometry`, `bracket-check`) always use circumference 2π.
    #[serde(default = "default_length")]
    pub length: f64,
}

/// External potential, expressed in the lowest circle harmonic
/// k₀ = 2π/length.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    Zero,
    /// V(x) = amplitude · cos(k₀ x).
    Cosine { amplitude: f64 },
    /// V = −Q(ρ₀, ħ): the initial density becomes an equilibrium when
    /// the initial phase is zero.
    Stationary,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        PotentialConfig::Cosine { amplitude: 1.0 }
    }
}

/// Initial data ρ₀ ∝ 1 + density_contrast·cos(k₀x),
/// φ₀ = phase_amplitude·sin(k₀x).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    #[serde(default = "default_contrast")]
    pub density_contrast: f64,
    #[serde(default = "default_phase_amplitude")]
    pub phase_amplitude: f64,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self {
            density_contrast: default_contrast(),
            phase_amplitude: default_phase_amplitude(),
        }
    }
}

/// Per-check tolerances. The defaults are the release gates; a config
/// may tighten or relax them for exploratory runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "d_energy_drift")]
    pub energy_drift: f64,
    #[serde(default = "d_mass_error")]
    pub mass_error: f64,
    #[serde(default = "d_stationary_drift")]
    pub stationary_drift: f64,
    #[serde(default = "d_density_gap")]
    pub density_gap: f64,
    #[serde(default = "d_ray_gap")]
    pub ray_gap: f64,
    #[serde(default = "d_round_trip")]
    pub round_trip: f64,
    #[serde(default = "d_bracket")]
    pub bracket: f64,
    #[serde(default = "d_gradient_relation")]
    pub gradient_relation: f64,
    #[serde(default = "d_torsion_witness")]
    pub torsion_witness: f64,
    #[serde(default = "d_antisymmetry")]
    pub antisymmetry: f64,
    #[serde(default = "d_nijenhuis_floor")]
    pub nijenhuis_floor: f64,
    #[serde(default = "d_form_agreement")]
    pub form_agreement: f64,
    #[serde(default = "d_curvature")]
    pub curvature: f64,
    #[serde(default = "d_closedness")]
    pub closedness: f64,
    #[serde(default = "d_quantization")]
    pub quantization: f64,
    #[serde(default = "d_quadrature_shift")]
    pub quadrature_shift: f64,
    #[serde(default = "d_modulus_law")]
    pub modulus_law: f64,
    #[serde(default = "d_orientation_residual")]
    pub orientation_residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty tolerance object")
    }
}

fn default_hbar() -> f64 {
    0.5
}
fn default_t_final() -> f64 {
    1.0
}
fn default_record_every() -> usize {
    10
}
fn default_length() -> f64 {
    TAU
}
fn default_contrast() -> f64 {
    0.3
}
fn default_phase_amplitude() -> f64 {
    0.2
}
fn default_trials() -> usize {
    20
}
fn d_energy_drift() -> f64 {
    1e-6
}
fn d_mass_error() -> f64 {
    1e-10
}
fn d_stationary_drift() -> f64 {
    1e-9
}
fn d_density_gap() -> f64 {
    1e-4
}
fn d_ray_gap() -> f64 {
    1e-3
}
fn d_round_trip() -> f64 {
    1e-8
}
fn d_bracket() -> f64 {
    1e-6
}
fn d_gradient_relation() -> f64 {
    1e-5
}
fn d_torsion_witness() -> f64 {
    1e-8
}
fn d_antisymmetry() -> f64 {
    1e-10
}
fn d_nijenhuis_floor() -> f64 {
    1e-3
}
fn d_form_agreement() -> f64 {
    1e-12
}
fn d_curvature() -> f64 {
    1e-6
}
fn d_closedness() -> f64 {
    1e-5
}
fn d_quantization() -> f64 {
    1e-8
}
fn d_quadrature_shift() -> f64 {
    1e-10
}
fn d_modulus_law() -> f64 {
    1e-14
}
fn d_orientation_residual() -> f64 {
    1e-10
}

impl Config {
    pub fn load(path: &Path, suite: Suite) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let config: Config = serde_json::from_str(&text)
            .with_context(|| format!("cannot parse config file {}", path.display()))?;
        config.validate(suite)?;
        Ok(config)
    }

    pub fn validate(&self, suite: Suite) -> Result<()> {
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            bail!("field \"hbar\" must be positive, got {}", self.hbar);
        }
        if !(self.grid.length > 0.0 && self.grid.length.is_finite()) {
            bail!(
                "field \"grid.length\" must be positive, got {}",
                self.grid.length
            );
        }
        if self.grid.points < 16 || self.grid.points % 2 != 0 {
            bail!(
                "field \"grid.points\" must be an even number of at least 16, got {}",
                self.grid.points
            );
        }
        if self.record_every == 0 {
            bail!("field \"record_every\" must be at least 1");
        }
        if self.trials == 0 {
            bail!("field \"trials\" must be at least 1");
        }
        let contrast = self.initial.density_contrast;
        if contrast.is_nan() || contrast.abs() >= 1.0 {
            bail!(
                "field \"initial.density_contrast\" must lie in (−1, 1) to keep the density \
                 positive, got {contrast}"
            );
        }
        match self.dt {
            Some(dt) if !(dt > 0.0 && dt.is_finite()) => {
                bail!("field \"dt\" must be positive, got {dt}");
            }
            Some(dt) if suite.needs_dt() && dt >= self.t_final => {
                bail!(
                    "field \"dt\" ({dt}) must be smaller than \"t_final\" ({})",
                    self.t_final
                );
            }
            None if suite.needs_dt() => {
                bail!("field \"dt\" is required by the {} suite", suite.name());
            }
            _ => {}
        }
        Ok(())
    }
}
