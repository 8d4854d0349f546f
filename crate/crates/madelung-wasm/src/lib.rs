//! Browser bindings for the density-manifold simulator.
//!
//! Exposes three interactive operations to the static demo page:
//!
//! - [`FlowSession`] — the hydrodynamic flow and the independent
//!   split-step Schrödinger reference advancing side by side, with live
//!   conservation and cross-validation readouts;
//! - [`gaussian_identity`] / [`gaussian_profile`] — the coherent-state
//!   quantization identity at an interactively chosen phase-space point;
//! - [`geometry_defects`] — seeded spot checks of the metric,
//!   symplectic, and connection identities.
//!
//! Build with `--target wasm32-unknown-unknown` and run `wasm-bindgen
//! --target web` on the artifact; the crate also compiles natively so
//! the bindings stay covered by the workspace test build.

use std::f64::consts::TAU;
use std::sync::Arc;

use wasm_bindgen::prelude::*;

use madelung::bandlimited::FieldSampler;
use madelung::density::{p_operator, solve_phase, Density, PhasePotential};
use madelung::dynamics::{evolve, hamiltonian, SimulationConfig, Termination, TrajectoryState};
use madelung::gaussian::{
    expectation, gaussian_wave, kahler_eval, GaussianPoint, KahlerFunction, SampleLine,
};
use madelung::geometry::{
    almost_hermitian, curvature_defect, nijenhuis, symplectic_form, torsion, DoubleTangent,
    TangentPoint,
};
use madelung::grid::{gradient, PeriodicGrid, ScalarField, VectorField};
use madelung::schrodinger::{projective_distance, split_step_evolve, to_wave, WaveFunction};

fn js_err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// The hydrodynamic flow and the split-step reference integrating the
/// same initial data on the flat circle, stepped in chunks from the
/// browser event loop.
#[wasm_bindgen]
pub struct FlowSession {
    grid: Arc<PeriodicGrid>,
    potential: ScalarField,
    hbar: f64,
    dt: f64,
    state: TrajectoryState,
    psi: WaveFunction,
    initial_energy: f64,
    worst_mass_error: f64,
}

#[wasm_bindgen]
impl FlowSession {
    /// Benchmark-style initial data on the circumference-2π circle:
    /// ρ₀ ∝ 1 + density_contrast·cos x, φ₀ = phase_amplitude·sin x,
    /// V = potential_amplitude·cos x.
    #[wasm_bindgen(constructor)]
    pub fn new(
        points: usize,
        hbar: f64,
        dt: f64,
        potential_amplitude: f64,
        density_contrast: f64,
        phase_amplitude: f64,
    ) -> Result<FlowSession, JsValue> {
        let grid = PeriodicGrid::circle(points, TAU).map_err(js_err)?;
        let rho = Density::new(ScalarField::from_fn(&grid, |x| {
            (1.0 + density_contrast * x[0].cos()) / TAU
        }))
        .map_err(js_err)?;
        let phi = PhasePotential::from_field(&ScalarField::from_fn(&grid, |x| {
            phase_amplitude * x[0].sin()
        }));
        let potential = ScalarField::from_fn(&grid, |x| potential_amplitude * x[0].cos());

        let state = TrajectoryState::new(0.0, rho, phi);
        let psi = to_wave(&state, hbar).map_err(js_err)?;
        let point =
            TangentPoint::new(state.rho.clone(), state.phi.gradient()).map_err(js_err)?;
        let initial_energy = hamiltonian(&point, &potential, hbar);

        // Validate hbar/dt eagerly so the constructor reports bad
        // parameters, not the first step.
        SimulationConfig::new(&grid, potential.clone(), hbar, dt, dt * 4.0);
        if !(hbar > 0.0 && hbar.is_finite() && dt > 0.0 && dt.is_finite()) {
            return Err(js_err("hbar and dt must be positive and finite"));
        }

        Ok(FlowSession {
            grid,
            potential,
            hbar,
            dt,
            state,
            psi,
            initial_energy,
            worst_mass_error: 0.0,
        })
    }

    /// Advance both integrators by `steps` time steps (at least 2) and
    /// return the new time. Errors when the density crosses its
    /// positivity floor or a step produces non-finite values.
    pub fn step(&mut self, steps: usize) -> Result<f64, JsValue> {
        let steps = steps.max(2);
        let mut cfg = SimulationConfig::new(
            &self.grid,
            self.potential.clone(),
            self.hbar,
            self.dt,
            self.state.time + steps as f64 * self.dt,
        );
        cfg.record_every = steps;
        let out = evolve(&self.state, &cfg).map_err(js_err)?;
        match out.termination {
            Termination::Completed => {}
            Termination::DensityFloor { time, min_density } => {
                return Err(js_err(format!(
                    "density crossed its positivity floor at t = {time:.4} \
                     (min {min_density:.3e}); the step size is too large for \
                     this grid's fastest mode"
                )));
            }
            Termination::StepRejected { time } => {
                return Err(js_err(format!("non-finite step at t = {time:.4}")));
            }
        }
        for e in &out.report.mass_error {
            self.worst_mass_error = self.worst_mass_error.max(*e);
        }
        self.state = out.states.last().expect("completed run has states").clone();
        self.psi = split_step_evolve(&self.psi, &self.potential, self.hbar, self.dt, steps)
            .map_err(js_err)?;
        Ok(self.state.time)
    }

    pub fn time(&self) -> f64 {
        self.state.time
    }

    /// Node coordinates, for the horizontal plot axis.
    pub fn nodes(&self) -> Vec<f64> {
        self.grid.nodes().iter().map(|p| p[0]).collect()
    }

    /// Current hydrodynamic density ρ(t).
    pub fn density(&self) -> Vec<f64> {
        self.state.rho.field().values().to_vec()
    }

    /// Current reference density |ψ(t)|² from the split-step solver.
    pub fn reference_density(&self) -> Vec<f64> {
        self.psi.values().iter().map(|c| c.norm_sqr()).collect()
    }

    /// Relative energy drift since t = 0.
    pub fn energy_drift(&self) -> Result<f64, JsValue> {
        let point = TangentPoint::new(self.state.rho.clone(), self.state.phi.gradient())
            .map_err(js_err)?;
        let h = hamiltonian(&point, &self.potential, self.hbar);
        let scale = self.initial_energy.abs().max(1e-12);
        Ok((h - self.initial_energy).abs() / scale)
    }

    /// Worst pre-renormalization mass defect seen so far.
    pub fn mass_error(&self) -> f64 {
        self.worst_mass_error
    }

    /// Weighted L² distance between ρ(t) and |ψ(t)|².
    pub fn density_gap(&self) -> f64 {
        self.state
            .rho
            .field()
            .values()
            .iter()
            .zip(self.psi.values())
            .zip(self.grid.quadrature_weights())
            .map(|((r, c), &w)| (r - c.norm_sqr()).powi(2) * w)
            .sum::<f64>()
            .sqrt()
    }

    /// Projective (ray) distance between the reconstructed wave
    /// function and the split-step reference.
    pub fn ray_distance(&self) -> Result<f64, JsValue> {
        let wave = to_wave(&self.state, self.hbar).map_err(js_err)?;
        Ok(projective_distance(&wave, &self.psi))
    }
}

/// The quantization identity at z = x + iy: for each of the four
/// functions (1, x, y, (x²+y²)/2), the symbol value and the
/// coherent-state expectation of its quantized operator, flattened as
/// [symbol₀, expectation₀, symbol₁, …].
#[wasm_bindgen]
pub fn gaussian_identity(x: f64, y: f64, hbar: f64) -> Result<Vec<f64>, JsValue> {
    if !(x.is_finite() && y.is_finite() && hbar > 0.0 && hbar.is_finite()) {
        return Err(js_err("x, y must be finite and hbar positive"));
    }
    let z = GaussianPoint::new(x, y);
    let mut out = Vec::with_capacity(8);
    for f in KahlerFunction::ALL {
        out.push(kahler_eval(f, z));
        out.push(expectation(f, z, hbar).map_err(js_err)?);
    }
    Ok(out)
}

/// Samples of the coherent state at z = x + iy for plotting: flattened
/// (ξ, Re Ψ, |Ψ|) triples on a window of ±6 around the mean,
/// `samples` points.
#[wasm_bindgen]
pub fn gaussian_profile(x: f64, y: f64, hbar: f64, samples: usize) -> Result<Vec<f64>, JsValue> {
    if !(x.is_finite() && y.is_finite() && hbar > 0.0 && hbar.is_finite()) {
        return Err(js_err("x, y must be finite and hbar positive"));
    }
    let z = GaussianPoint::new(x, y);
    let line = SampleLine::standard(z.x);
    let psi = gaussian_wave(z, hbar, &line).map_err(js_err)?;
    let n = samples.clamp(16, line.points().len());
    let mut out = Vec::with_capacity(3 * n);
    for (xi, value) in line.points().iter().zip(&psi) {
        // Only the central ±6 window is visually interesting; the tails
        // are below 1e−8 of the peak.
        if (xi - z.x).abs() > 6.0 {
            continue;
        }
        out.push(*xi);
        out.push(value.re);
        out.push(value.norm());
    }
    // Decimate to roughly the requested sample count.
    let stride = (out.len() / 3 / n).max(1);
    Ok(out
        .chunks(3)
        .step_by(stride)
        .flatten()
        .copied()
        .collect())
}

/// Seeded spot check of the geometric identities at grid size `points`:
/// returns [elliptic round-trip sup error, torsion witness gap,
/// torsion antisymmetry, Nijenhuis witness norm, form agreement gap,
/// curvature defect].
#[wasm_bindgen]
pub fn geometry_defects(points: usize, seed: u64) -> Result<Vec<f64>, JsValue> {
    let grid = PeriodicGrid::circle(points, TAU).map_err(js_err)?;
    let mut s = FieldSampler::new(&grid, seed);

    let rho = Density::from_values(&grid, s.density_values(0.5)).map_err(js_err)?;
    let phi = s.scalar(1.0);
    let h = p_operator(rho.field(), &phi).map_err(js_err)?;
    let recovered = solve_phase(&rho, &h, None).map_err(js_err)?;
    let round_trip = (recovered.field() - &phi).sup_norm();

    let uniform = Density::uniform(&grid);
    let gp = gradient(&ScalarField::from_fn(&grid, |x| {
        x[0].sin() - (3.0 * x[0]).sin() / 12.0
    }));
    let gq = gradient(&ScalarField::from_fn(&grid, |x| {
        -x[0].cos() + (3.0 * x[0]).cos() / 12.0
    }));
    let witness = gradient(&ScalarField::from_fn(&grid, |x| -(2.0 * x[0]).sin() / 2.0));
    let torsion_gap =
        (&torsion(&uniform, &gp, &gq).map_err(js_err)? - &witness).sup_norm();

    let a = gradient(&s.scalar(1.0));
    let b = gradient(&s.scalar(1.0));
    let tab = torsion(&rho, &a, &b).map_err(js_err)?;
    let tba = torsion(&rho, &b, &a).map_err(js_err)?;
    let antisym = (&tab + &tba).sup_norm();

    let rest = TangentPoint::rest(&grid);
    let zero = VectorField::zero(&grid);
    let da = DoubleTangent::new(rest.clone(), gp, zero.clone()).map_err(js_err)?;
    let db = DoubleTangent::new(rest, gq, zero).map_err(js_err)?;
    let nijenhuis_norm = nijenhuis(&da, &db).map_err(js_err)?.sup_norm();

    let p = TangentPoint::new(
        Density::from_values(&grid, s.density_values(0.5)).map_err(js_err)?,
        gradient(&s.scalar(0.8)),
    )
    .map_err(js_err)?;
    let x = DoubleTangent::new(p.clone(), gradient(&s.scalar(0.8)), gradient(&s.scalar(0.8)))
        .map_err(js_err)?;
    let y = DoubleTangent::new(p.clone(), gradient(&s.scalar(0.8)), gradient(&s.scalar(0.8)))
        .map_err(js_err)?;
    let (_, omega_via_j, _) = almost_hermitian(&x, &y).map_err(js_err)?;
    let omega_direct = symplectic_form(&x, &y).map_err(js_err)?;
    let form_gap = (omega_via_j - omega_direct).abs();

    let curvature = curvature_defect(&rho, &s.scalar(0.8), &s.scalar(0.8), 5e-4);

    Ok(vec![
        round_trip,
        torsion_gap,
        antisym,
        nijenhuis_norm,
        form_gap,
        curvature,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flow_session_tracks_reference() {
        let mut session = FlowSession::new(64, 0.5, 1e-3, 1.0, 0.3, 0.2).unwrap();
        let t = session.step(100).unwrap();
        assert!((t - 0.1).abs() < 1e-12);
        assert!(session.density_gap() < 1e-6);
        assert!(session.ray_distance().unwrap() < 1e-5);
        assert!(session.energy_drift().unwrap() < 1e-9);
        assert_eq!(session.density().len(), 64);
        assert_eq!(session.reference_density().len(), 64);
    }

    #[test]
    fn gaussian_identity_holds_interactively() {
        let values = gaussian_identity(1.0, 2.0, 1.0).unwrap();
        assert_eq!(values.len(), 8);
        for pair in values.chunks(2) {
            assert!((pair[0] - pair[1]).abs() < 1e-8);
        }
    }

    #[test]
    fn profile_is_decimated_and_finite() {
        let triples = gaussian_profile(0.5, -1.0, 0.5, 200).unwrap();
        assert_eq!(triples.len() % 3, 0);
        assert!(triples.len() >= 3 * 16);
        assert!(triples.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn geometry_defects_are_small_except_the_witness() {
        let d = geometry_defects(64, 11).unwrap();
        assert!(d[0] < 1e-8, "round trip {:.3e}", d[0]);
        assert!(d[1] < 1e-8, "torsion witness {:.3e}", d[1]);
        assert!(d[2] < 1e-10, "antisymmetry {:.3e}", d[2]);
        assert!(d[3] > 1e-3, "Nijenhuis witness {:.3e}", d[3]);
        assert!(d[4] < 1e-12, "form agreement {:.3e}", d[4]);
        assert!(d[5] < 1e-6, "curvature {:.3e}", d[5]);
    }
}
