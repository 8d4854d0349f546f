//! Split-step spectral reference solver for the linear Schrödinger
//! equation
//!
//! ```text
//!     iħ ∂ψ/∂t = −(ħ²/2)Δψ + Vψ
//! ```
//!
//! on flat periodic grids, together with the wave-function
//! correspondence ψ = √ρ·e^{−i(φ − ∫c_t dt)/ħ} and a projective
//! comparison metric. The solver deliberately shares no state
//! representation or stepping code with the hydrodynamic integrator, so
//! agreement between the two is meaningful cross-validation rather than
//! a consistency check of one code path.
//!
//! Each Strang step applies a half-step potential phase, a full kinetic
//! step as the frequency multiplier exp(−iħ|k|²·dt/2), and a second
//! half-step potential phase. Every factor is a pointwise complex phase,
//! so the discrete L² norm is preserved to rounding.

use num_complex::Complex64;
use std::sync::Arc;

use crate::density::Density;
use crate::dynamics::TrajectoryState;
use crate::grid::{PeriodicGrid, ScalarField};
use crate::{Error, Result};

/// A normalized complex wave function sampled on a flat periodic grid.
///
/// The constructor rescales to unit L² norm, ∫|ψ|² dvol = 1.
#[derive(Debug, Clone)]
pub struct WaveFunction {
    grid: Arc<PeriodicGrid>,
    values: Vec<Complex64>,
}

impl WaveFunction {
    /// Build and normalize a wave function from nodal samples.
    ///
    /// # Errors
    /// [`Error::UnsupportedMetric`] on conformally curved grids,
    /// [`Error::ShapeMismatch`] for a wrong sample count, and
    /// [`Error::NonFinite`] for non-finite entries.
    ///
    /// # Panics
    /// If the samples are identically zero; a zero function cannot be
    /// normalized.
    pub fn new(grid: &Arc<PeriodicGrid>, values: Vec<Complex64>) -> Result<Self> {
        if !grid.is_flat() {
            return Err(Error::UnsupportedMetric);
        }
        if values.len() != grid.node_count() {
            return Err(Error::ShapeMismatch {
                expected: grid.node_count(),
                found: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let mut wave = Self {
            grid: Arc::clone(grid),
            values,
        };
        let norm = wave.norm();
        assert!(norm > 0.0, "cannot normalize a zero wave function");
        let inv = 1.0 / norm;
        for c in &mut wave.values {
            *c *= inv;
        }
        Ok(wave)
    }

    pub fn grid(&self) -> &Arc<PeriodicGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// L² norm against the grid quadrature, ‖ψ‖ = (∫|ψ|² dvol)^{1/2}.
    pub fn norm(&self) -> f64 {
        let sum: f64 = self
            .values
            .iter()
            .zip(self.grid.quadrature_weights())
            .map(|(c, &w)| c.norm_sqr() * w)
            .sum();
        sum.sqrt()
    }

    /// Hermitian L² pairing ⟨ψ, χ⟩ = ∫ ψ̄ χ dvol.
    pub fn inner(&self, other: &WaveFunction) -> Complex64 {
        assert_eq!(
            self.grid, other.grid,
            "wave functions live on different grids"
        );
        self.values
            .iter()
            .zip(&other.values)
            .zip(self.grid.quadrature_weights())
            .map(|((a, b), &w)| a.conj() * b * w)
            .sum()
    }
}

/// The wave function of a hydrodynamic state,
/// ψ = √ρ·exp(−i(φ − ∫c_t dt)/ħ). Unit norm is automatic since ∫ρ = 1.
///
/// # Errors
/// [`Error::UnsupportedMetric`] if the state lives on a conformally
/// curved grid, where no spectral Schrödinger representation is set up.
pub fn to_wave(s: &TrajectoryState, hbar: f64) -> Result<WaveFunction> {
    let phase_scale = -1.0 / hbar;
    let values = s
        .rho
        .values()
        .iter()
        .zip(s.phi.field().values())
        .map(|(&r, &p)| {
            Complex64::from_polar(r.sqrt(), phase_scale * (p - s.gauge_integral))
        })
        .collect();
    WaveFunction::new(s.rho.grid(), values)
}

/// The density |ψ|² of a wave function.
///
/// # Errors
/// [`Error::DensityFloor`] if |ψ|² dips below the positivity floor
/// (the wave function has a node at grid resolution).
pub fn density_of(psi: &WaveFunction) -> Result<Density> {
    let values = psi.values.iter().map(|c| c.norm_sqr()).collect();
    Density::from_values(&psi.grid, values)
}

/// Advance a wave function by `steps` Strang-split steps of size `dt`.
///
/// # Errors
/// [`Error::InvalidConfig`] for non-positive ħ or dt. (Construction of
/// the input already rules out curved grids.)
pub fn split_step_evolve(
    psi: &WaveFunction,
    v: &ScalarField,
    hbar: f64,
    dt: f64,
    steps: usize,
) -> Result<WaveFunction> {
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "hbar must be positive, got {hbar}"
        )));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidConfig(format!("dt must be positive, got {dt}")));
    }
    let grid = &psi.grid;
    assert_eq!(v.grid(), grid, "potential lives on a different grid");

    // Pointwise phases of the half-step potential factor
    // exp(−iV·dt/(2ħ)).
    let half_potential: Vec<Complex64> = v
        .values()
        .iter()
        .map(|&vv| Complex64::from_polar(1.0, -vv * dt / (2.0 * hbar)))
        .collect();
    let kinetic = |ksq: f64| Complex64::from_polar(1.0, -hbar * ksq * dt / 2.0);

    let mut values = psi.values.clone();
    for _ in 0..steps {
        for (c, p) in values.iter_mut().zip(&half_potential) {
            *c *= p;
        }
        grid.apply_isotropic_multiplier(&mut values, &kinetic);
        for (c, p) in values.iter_mut().zip(&half_potential) {
            *c *= p;
        }
    }
    // Every factor is unitary, so the norm is preserved to rounding; no
    // renormalization, so norm() doubles as a drift diagnostic.
    Ok(WaveFunction {
        grid: Arc::clone(grid),
        values,
    })
}

/// Distance between the complex lines spanned by two normalized wave
/// functions: sqrt(max(0, 1 − |⟨a,b⟩|²)). Zero exactly when the two
/// agree up to a global phase.
pub fn projective_distance(a: &WaveFunction, b: &WaveFunction) -> f64 {
    let overlap = a.inner(b).norm_sqr();
    (1.0 - overlap).max(0.0).sqrt()
}

/// Energy expectation ⟨ψ, (−(ħ²/2)Δ + V)ψ⟩ of a wave function.
pub fn wave_energy(psi: &WaveFunction, v: &ScalarField, hbar: f64) -> f64 {
    assert_eq!(v.grid(), &psi.grid, "potential lives on a different grid");
    let mut kinetic = psi.values.clone();
    psi.grid.apply_isotropic_multiplier(&mut kinetic, &|ksq| {
        Complex64::new(0.5 * hbar * hbar * ksq, 0.0)
    });
    psi.values
        .iter()
        .zip(&kinetic)
        .zip(v.values())
        .zip(psi.grid.quadrature_weights())
        .map(|(((c, k), &vv), &w)| (c.conj() * (k + vv * c) * w).re)
        .sum()
}
