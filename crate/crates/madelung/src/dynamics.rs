//! Variational quantum hydrodynamics on the density manifold.
//!
//! The flow integrates the coupled system
//!
//! ```text
//!     ∂φ/∂t = ½‖∇φ + X‖² + V + Q(ρ, ħ) + c_t,
//!     ∂ρ/∂t = div(ρ(∇φ + X)),
//! ```
//!
//! with quantum potential Q(ρ, ħ) = −(ħ²/2)·Δ√ρ/√ρ — the Euler–Lagrange
//! equations of the Lagrangian
//! ∫(½‖∇φ‖² − ‖X‖² − V)ρ dvol − (ħ²/2)∫‖∇√ρ‖² dvol, and equivalently the
//! flow of the symplectic gradient of the Hamiltonian
//! ∫(½‖∇φ‖² + V)ρ dvol + (ħ²/2)∫‖∇√ρ‖² dvol.
//!
//! Gauge convention: the phase φ is defined up to a time-dependent
//! constant. We keep φ zero-mean at every step and pick
//! c_t = −(1/Vol)∫(½‖∇φ+X‖² + V + Q)dvol, the unique choice that
//! preserves the gauge; the running integral ∫c_t dt is accumulated with
//! the same Runge–Kutta quadrature as the state itself, so the full
//! phase φ − ∫c_t dt — the one whose wave function solves the
//! Schrödinger equation — is reconstructible exactly.
//!
//! Time stepping is classical RK4 on (φ, ρ, ∫c_t); it is not a
//! symplectic scheme, so energy conservation is monitored (see
//! [`EnergyReport`]) rather than guaranteed. The density is renormalized
//! once per step; the pre-renormalization mass defect is recorded as a
//! diagnostic and stays at rounding level for resolved flows, since the
//! density update is a divergence.

use std::sync::Arc;

use crate::density::{zero_mean_project, Density, PhasePotential, TangentDensity, DENSITY_FLOOR};
use crate::geometry::TangentPoint;
use crate::grid::{divergence, gradient, integrate, PeriodicGrid, ScalarField, VectorField};
use crate::{Error, Result};

/// Time-stepping scheme; classical fourth-order Runge–Kutta is the only
/// member at present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    #[default]
    Rk4,
}

/// A drift vector field, possibly time-dependent. Sampled at every
/// integrator stage time.
#[derive(Debug, Clone, PartialEq)]
pub enum Drift {
    /// A fixed field X(x).
    Constant(VectorField),
    /// A field with oscillating amplitude, X_t(x) = cos(ωt)·X(x).
    Oscillating {
        field: VectorField,
        angular_frequency: f64,
    },
}

impl Drift {
    /// The drift field at time `t`.
    pub fn sample(&self, t: f64) -> VectorField {
        match self {
            Drift::Constant(x) => x.clone(),
            Drift::Oscillating {
                field,
                angular_frequency,
            } => field.scale((angular_frequency * t).cos()),
        }
    }
}

/// Parameters of an evolution run.
#[derive(Debug, Clone)]
pub struct SimulationConfig {
    /// Planck constant ħ > 0.
    pub hbar: f64,
    /// Time step of the integrator.
    pub dt: f64,
    /// Final time; the run takes round((t_final − t₀)/dt) steps.
    pub t_final: f64,
    /// Time-independent external potential V.
    pub potential: ScalarField,
    /// Optional drift field X_t.
    pub drift: Option<Drift>,
    /// The spatial grid; all fields must live on it.
    pub grid: Arc<PeriodicGrid>,
    /// Time-stepping scheme.
    pub integrator: Integrator,
    /// A state snapshot is recorded every this many steps (≥ 1).
    pub record_every: usize,
}

impl SimulationConfig {
    /// Configuration with the common defaults: no drift, RK4,
    /// recording every step.
    pub fn new(
        grid: &Arc<PeriodicGrid>,
        potential: ScalarField,
        hbar: f64,
        dt: f64,
        t_final: f64,
    ) -> Self {
        Self {
            hbar,
            dt,
            t_final,
            potential,
            drift: None,
            grid: Arc::clone(grid),
            integrator: Integrator::Rk4,
            record_every: 1,
        }
    }

    fn validate(&self, initial: &TrajectoryState) -> Result<()> {
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "hbar must be positive, got {}",
                self.hbar
            )));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.dt >= self.t_final - initial.time {
            return Err(Error::InvalidConfig(format!(
                "dt = {} must be smaller than the remaining time span {}",
                self.dt,
                self.t_final - initial.time
            )));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidConfig(
                "record_every must be at least 1".into(),
            ));
        }
        if self.potential.grid() != &self.grid || initial.rho.grid() != &self.grid {
            return Err(Error::InvalidConfig(
                "potential, initial state, and configuration use different grids".into(),
            ));
        }
        if let Some(drift) = &self.drift {
            let field = match drift {
                Drift::Constant(x) => x,
                Drift::Oscillating { field, .. } => field,
            };
            if field.grid() != &self.grid {
                return Err(Error::InvalidConfig(
                    "drift field lives on a different grid".into(),
                ));
            }
        }
        Ok(())
    }
}

/// One snapshot of the flow: time, density, zero-mean phase, and the
/// accumulated gauge integral ∫c_t dt.
#[derive(Debug, Clone)]
pub struct TrajectoryState {
    pub time: f64,
    pub rho: Density,
    pub phi: PhasePotential,
    /// Running integral of the gauge constant; the full phase is
    /// φ − gauge_integral.
    pub gauge_integral: f64,
}

impl TrajectoryState {
    /// Initial snapshot at time `time` with zero gauge integral.
    pub fn new(time: f64, rho: Density, phi: PhasePotential) -> Self {
        Self {
            time,
            rho,
            phi,
            gauge_integral: 0.0,
        }
    }
}

/// Conservation diagnostics sampled at the recorded snapshots.
#[derive(Debug, Clone, Default)]
pub struct EnergyReport {
    pub times: Vec<f64>,
    /// Total energy ∫(½‖∇φ‖²+V)ρ + (ħ²/2)∫‖∇√ρ‖².
    pub energy: Vec<f64>,
    /// |∫ρ − 1| measured before the per-step renormalization.
    pub mass_error: Vec<f64>,
    /// Smallest node density.
    pub min_density: Vec<f64>,
}

impl EnergyReport {
    fn push(&mut self, time: f64, energy: f64, mass_error: f64, min_density: f64) {
        self.times.push(time);
        self.energy.push(energy);
        self.mass_error.push(mass_error);
        self.min_density.push(min_density);
    }
}

/// How an evolution run ended.
#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    /// Reached the configured final time.
    Completed,
    /// The density crossed the positivity floor; the trajectory holds
    /// all states up to the last valid one.
    DensityFloor { time: f64, min_density: f64 },
    /// A field became non-finite; the trajectory holds all states up to
    /// the last valid one.
    StepRejected { time: f64 },
}

/// Result of an evolution run: recorded snapshots, diagnostics, and how
/// the run ended.
#[derive(Debug, Clone)]
pub struct Evolution {
    pub states: Vec<TrajectoryState>,
    pub report: EnergyReport,
    pub termination: Termination,
}

/// The quantum potential Q(ρ, ħ) = −(ħ²/2)·Δ√ρ/√ρ.
///
/// Equivalently (ħ²/2)(¼‖∇ρ‖²/ρ² − ½Δρ/ρ); the agreement of the two
/// forms is a tested invariant. Vanishes for uniform densities and
/// scales as ħ².
pub fn quantum_potential(rho: &Density, hbar: f64) -> ScalarField {
    let sqrt_rho = rho.field().map(f64::sqrt);
    let lap = crate::grid::laplacian(&sqrt_rho);
    lap.zip_with(&sqrt_rho, move |l, s| -0.5 * hbar * hbar * l / s)
}

/// The action functional density at a point:
/// ∫(½‖∇φ‖² − ‖X‖² − V)ρ dvol − (ħ²/2)∫‖∇√ρ‖² dvol
/// (X omitted means X = 0).
pub fn lagrangian(p: &TangentPoint, x: Option<&VectorField>, v: &ScalarField, hbar: f64) -> f64 {
    let speed_sq = p.grad_phi().norm_squared();
    let x_sq = match x {
        Some(x) => x.norm_squared(),
        None => ScalarField::constant(p.grid(), 0.0),
    };
    let integrand = speed_sq
        .zip_with(&x_sq, |s, xs| 0.5 * s - xs)
        .zip_with(v, |s, vv| s - vv)
        .zip_with(p.rho().field(), |s, r| s * r);
    integrate(&integrand) - 0.5 * hbar * hbar * fisher_information(p.rho())
}

/// The conserved energy at a point:
/// ∫(½‖∇φ‖² + V)ρ dvol + (ħ²/2)∫‖∇√ρ‖² dvol.
pub fn hamiltonian(p: &TangentPoint, v: &ScalarField, hbar: f64) -> f64 {
    let speed_sq = p.grad_phi().norm_squared();
    let integrand = speed_sq
        .zip_with(v, |s, vv| 0.5 * s + vv)
        .zip_with(p.rho().field(), |s, r| s * r);
    integrate(&integrand) + 0.5 * hbar * hbar * fisher_information(p.rho())
}

/// ∫‖∇√ρ‖² dvol, the gradient-energy of the square-root amplitude.
fn fisher_information(rho: &Density) -> f64 {
    let sqrt_rho = rho.field().map(f64::sqrt);
    integrate(&gradient(&sqrt_rho).norm_squared())
}

/// Right-hand side of the hydrodynamic system at a state: the zero-mean
/// phase velocity, the density velocity, and the gauge constant
/// c_t = −(1/Vol)∫(½‖∇φ+X‖² + V + Q)dvol that was removed from the
/// phase velocity.
///
/// # Errors
/// [`Error::DensityFloor`] if the state's density sits below the floor
/// (cannot happen for a [`Density`] built through its constructor).
pub fn madelung_rhs(
    s: &TrajectoryState,
    cfg: &SimulationConfig,
) -> Result<(ScalarField, TangentDensity, f64)> {
    let min = s.rho.min_value();
    if min < DENSITY_FLOOR {
        return Err(Error::DensityFloor {
            min,
            floor: DENSITY_FLOOR,
        });
    }
    let grad_phi = s.phi.gradient();
    let velocity = match &cfg.drift {
        None => grad_phi,
        Some(drift) => &grad_phi + &drift.sample(s.time),
    };
    let q = quantum_potential(&s.rho, cfg.hbar);
    let full = velocity
        .norm_squared()
        .zip_with(&cfg.potential, |s2, vv| 0.5 * s2 + vv)
        .zip_with(&q, |s2, qq| s2 + qq);
    let c_t = -full.mean();
    let dphi = zero_mean_project(&full).field().clone();
    let drho = zero_mean_project(&divergence(&velocity.scale_by(s.rho.field())));
    Ok((dphi, drho, c_t))
}

/// Raw field data of one RK4 stage derivative.
struct StageSlope {
    dphi: Vec<f64>,
    drho: Vec<f64>,
    c_t: f64,
}

fn slope_at(
    time: f64,
    phi: &[f64],
    rho: &[f64],
    cfg: &SimulationConfig,
) -> Result<StageSlope> {
    let grid = &cfg.grid;
    let state = TrajectoryState {
        time,
        rho: Density::new(ScalarField::new(Arc::clone(grid), rho.to_vec())?)?,
        phi: PhasePotential::from_field(&ScalarField::new(Arc::clone(grid), phi.to_vec())?),
        gauge_integral: 0.0,
    };
    let (dphi, drho, c_t) = madelung_rhs(&state, cfg)?;
    Ok(StageSlope {
        dphi: dphi.values().to_vec(),
        drho: drho.values().to_vec(),
        c_t,
    })
}

/// Integrate the hydrodynamic flow from an initial snapshot.
///
/// Classical RK4 on (φ, ρ) with the gauge integral carried as an
/// augmented component under the same quadrature. After each step the
/// phase is re-centered to zero mean (adjusting the gauge integral by
/// the removed amount, so the full phase is untouched) and the density
/// is renormalized; the pre-renormalization mass defect is recorded.
///
/// Snapshots are recorded at the initial time, every
/// `record_every`-th step, and the final step. If the density crosses
/// its floor or a field becomes non-finite, the run stops early and
/// returns the partial trajectory with the corresponding
/// [`Termination`].
///
/// # Errors
/// [`Error::InvalidConfig`] for inconsistent parameters or grids.
pub fn evolve(initial: &TrajectoryState, cfg: &SimulationConfig) -> Result<Evolution> {
    cfg.validate(initial)?;
    let grid = &cfg.grid;
    let n_steps = ((cfg.t_final - initial.time) / cfg.dt).round() as usize;

    let mut states = Vec::with_capacity(n_steps / cfg.record_every + 2);
    let mut report = EnergyReport::default();
    let record = |s: &TrajectoryState, mass_error: f64, report: &mut EnergyReport| {
        let p = TangentPoint::new_unchecked(s.rho.clone(), s.phi.gradient());
        report.push(
            s.time,
            hamiltonian(&p, &cfg.potential, cfg.hbar),
            mass_error,
            s.rho.min_value(),
        );
    };

    let mut current = initial.clone();
    record(&current, (integrate(current.rho.field()) - 1.0).abs(), &mut report);
    states.push(current.clone());

    for step in 1..=n_steps {
        let dt = cfg.dt;
        let t = current.time;
        let phi0 = current.phi.field().values().to_vec();
        let rho0 = current.rho.values().to_vec();

        let combine = |base: &[f64], slope: &[f64], factor: f64| -> Vec<f64> {
            base.iter()
                .zip(slope)
                .map(|(&b, &s)| b + factor * s)
                .collect()
        };

        let stage = |time: f64, phi: &[f64], rho: &[f64]| slope_at(time, phi, rho, cfg);

        let outcome = (|| -> Result<(Vec<f64>, Vec<f64>, f64)> {
            let k1 = stage(t, &phi0, &rho0)?;
            let k2 = stage(
                t + 0.5 * dt,
                &combine(&phi0, &k1.dphi, 0.5 * dt),
                &combine(&rho0, &k1.drho, 0.5 * dt),
            )?;
            let k3 = stage(
                t + 0.5 * dt,
                &combine(&phi0, &k2.dphi, 0.5 * dt),
                &combine(&rho0, &k2.drho, 0.5 * dt),
            )?;
            let k4 = stage(
                t + dt,
                &combine(&phi0, &k3.dphi, dt),
                &combine(&rho0, &k3.drho, dt),
            )?;
            let sixth = dt / 6.0;
            let phi1: Vec<f64> = (0..phi0.len())
                .map(|i| {
                    phi0[i]
                        + sixth * (k1.dphi[i] + 2.0 * k2.dphi[i] + 2.0 * k3.dphi[i] + k4.dphi[i])
                })
                .collect();
            let rho1: Vec<f64> = (0..rho0.len())
                .map(|i| {
                    rho0[i]
                        + sixth * (k1.drho[i] + 2.0 * k2.drho[i] + 2.0 * k3.drho[i] + k4.drho[i])
                })
                .collect();
            let dgauge = sixth * (k1.c_t + 2.0 * k2.c_t + 2.0 * k3.c_t + k4.c_t);
            Ok((phi1, rho1, dgauge))
        })();

        let (phi1, rho1, dgauge) = match outcome {
            Ok(v) => v,
            Err(Error::DensityFloor { min, .. }) => {
                return Ok(Evolution {
                    states,
                    report,
                    termination: Termination::DensityFloor {
                        time: t,
                        min_density: min,
                    },
                });
            }
            Err(Error::NonFinite { .. }) => {
                return Ok(Evolution {
                    states,
                    report,
                    termination: Termination::StepRejected { time: t },
                });
            }
            Err(e) => return Err(e),
        };

        if phi1.iter().chain(&rho1).any(|v| !v.is_finite()) || !dgauge.is_finite() {
            return Ok(Evolution {
                states,
                report,
                termination: Termination::StepRejected { time: t },
            });
        }

        let time = initial.time + step as f64 * dt;
        let rho_raw = ScalarField::from_values_unchecked(grid, rho1);
        let mass_error = (integrate(&rho_raw) - 1.0).abs();
        let rho = match Density::new(rho_raw) {
            Ok(r) => r,
            Err(Error::DensityFloor { min, .. }) => {
                return Ok(Evolution {
                    states,
                    report,
                    termination: Termination::DensityFloor {
                        time,
                        min_density: min,
                    },
                });
            }
            Err(e) => return Err(e),
        };

        // Re-center the phase; shifting φ by its mean m must shift the
        // gauge integral by the same m to keep φ − ∫c_t dt unchanged.
        let phi_raw = ScalarField::from_values_unchecked(grid, phi1);
        let mean = phi_raw.mean();
        let phi = PhasePotential::from_field(&phi_raw);
        // The stages produced zero-mean slopes, so `mean` is pure
        // rounding; fold it into the gauge regardless.
        let gauge_integral = current.gauge_integral + dgauge - mean;

        current = TrajectoryState {
            time,
            rho,
            phi,
            gauge_integral,
        };

        if step % cfg.record_every == 0 || step == n_steps {
            record(&current, mass_error, &mut report);
            states.push(current.clone());
        }
    }

    Ok(Evolution {
        states,
        report,
        termination: Termination::Completed,
    })
}
