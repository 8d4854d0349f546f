//! The five check suites behind the command-line interface.
//!
//! Each suite builds its inputs from the parsed [`Config`] and the seed,
//! runs its checks, and returns a [`Report`]. Hard errors (`Err`) mean
//! the run could not be set up — a configuration problem; physics and
//! tolerance failures are reported as failing checks instead, so the
//! caller can map the two cases to distinct exit codes.

use std::f64::consts::TAU;
use std::sync::Arc;

use anyhow::{anyhow, Context, Result};

use madelung::bandlimited::FieldSampler;
use madelung::density::{p_operator, solve_phase, Density, PhasePotential};
use madelung::dynamics::{
    evolve, quantum_potential, Evolution, SimulationConfig, TrajectoryState,
};
use madelung::gaussian::{
    expectation, expectation_on, finite_wave, gaussian_phase_check, gaussian_wave, kahler_eval,
    FiniteProbability, GaussianPoint, KahlerFunction, SampleLine, DEFAULT_SAMPLES, MIN_HALF_WIDTH,
};
use madelung::geometry::{
    almost_hermitian, canonical_bracket, closedness_defect, curvature_defect,
    lift_directional_derivative, nijenhuis, poisson_bracket_lifted, symplectic_form,
    symplectic_gradient_lift, torsion, DoubleTangent, Observable, TangentPoint,
};
use madelung::grid::{
    gradient, integrate, laplacian, PeriodicGrid, ScalarField, VectorField,
};
use madelung::schrodinger::{projective_distance, split_step_evolve, to_wave, WaveFunction};

use crate::config::{Config, PotentialConfig};
use crate::report::{Check, Report, Series};

/// Central-difference step of the symplectic-gradient relation check.
const GRADIENT_RELATION_STEP: f64 = 1e-4;
/// Central-difference step of the closedness probe.
const CLOSEDNESS_STEP: f64 = 1e-4;
/// Central-difference step of the curvature probe.
const CURVATURE_STEP: f64 = 5e-4;
/// Fourth-order window for the flow error under dt halving.
const RK4_FACTOR_RANGE: (f64, f64) = (12.0, 20.0);
/// Second-order window for the split-step error under dt halving.
const STRANG_FACTOR_RANGE: (f64, f64) = (3.4, 4.6);
/// Required error shrinkage per grid doubling for the spectral Laplacian.
const SPECTRAL_DECAY_FACTOR: f64 = 1e-2;
/// Errors below this are treated as fully converged (rounding-dominated),
/// where the decay ratio stops being meaningful.
const SPECTRAL_FLOOR: f64 = 1e-11;

/// The evolution problem a config describes: a periodic circle, cosine
/// initial data in the lowest harmonic k₀ = 2π/length, and the
/// configured external potential.
struct Problem {
    grid: Arc<PeriodicGrid>,
    initial: TrajectoryState,
    potential: ScalarField,
}

fn problem_of(config: &Config) -> Result<Problem> {
    let grid = PeriodicGrid::circle(config.grid.points, config.grid.length)
        .map_err(|e| anyhow!("field \"grid\": {e}"))?;
    let length = config.grid.length;
    let k0 = TAU / length;
    let contrast = config.initial.density_contrast;
    let rho0 = Density::new(ScalarField::from_fn(&grid, |x| {
        (1.0 + contrast * (k0 * x[0]).cos()) / length
    }))
    .map_err(|e| anyhow!("field \"initial.density_contrast\": {e}"))?;
    let amplitude = config.initial.phase_amplitude;
    let phi0 = PhasePotential::from_field(&ScalarField::from_fn(&grid, |x| {
        amplitude * (k0 * x[0]).sin()
    }));
    let potential = match config.potential {
        PotentialConfig::Zero => ScalarField::constant(&grid, 0.0),
        PotentialConfig::Cosine { amplitude } => {
            ScalarField::from_fn(&grid, |x| amplitude * (k0 * x[0]).cos())
        }
        PotentialConfig::Stationary => quantum_potential(&rho0, config.hbar).scale(-1.0),
    };
    Ok(Problem {
        grid,
        initial: TrajectoryState::new(0.0, rho0, phi0),
        potential,
    })
}

fn integrate_flow(config: &Config, problem: &Problem) -> Result<Evolution> {
    let dt = config.dt.expect("dt presence is validated for this suite");
    let mut sim = SimulationConfig::new(
        &problem.grid,
        problem.potential.clone(),
        config.hbar,
        dt,
        config.t_final,
    );
    sim.record_every = config.record_every;
    evolve(&problem.initial, &sim).map_err(|e| anyhow!("configuration rejected: {e}"))
}

/// Checks shared by the two evolution suites: the run covered the
/// requested span, the energy drifted within tolerance, and the
/// pre-renormalization mass defect stayed small.
fn conservation_checks(config: &Config, evolution: &Evolution) -> Vec<Check> {
    let dt = config.dt.expect("dt presence is validated for this suite");
    let report = &evolution.report;
    let last_time = *report.times.last().expect("the initial sample is always recorded");
    // Zero (up to rounding of t_final/dt) when the run completed; the
    // number of missing steps when it aborted early.
    let steps_remaining = (config.t_final - last_time) / dt;

    let h0 = report.energy[0];
    // Drift relative to the initial energy; absolute when that energy is
    // numerically zero, as for the engineered stationary states where
    // the potential and quantum terms cancel exactly.
    let scale = if h0.abs() > 1e-9 { h0.abs() } else { 1.0 };
    let energy_drift = report
        .energy
        .iter()
        .map(|h| (h - h0).abs() / scale)
        .fold(0.0f64, f64::max);
    let mass_error = report.mass_error.iter().fold(0.0f64, |m, &e| m.max(e));

    vec![
        Check::le("steps_remaining", steps_remaining, 0.5),
        Check::le("energy_drift", energy_drift, config.tolerances.energy_drift),
        Check::le("mass_error", mass_error, config.tolerances.mass_error),
    ]
}

fn conservation_series(evolution: &Evolution) -> Vec<Series> {
    let report = &evolution.report;
    let mut energy = Series::new("energy");
    let mut mass_error = Series::new("mass_error");
    let mut min_density = Series::new("min_density");
    for (i, &t) in report.times.iter().enumerate() {
        energy.push(t, report.energy[i]);
        mass_error.push(t, report.mass_error[i]);
        min_density.push(t, report.min_density[i]);
    }
    vec![energy, mass_error, min_density]
}

/// `evolve`: integrate the hydrodynamic flow and check its conservation
/// laws; for stationary configurations with zero initial phase, also
/// check that the state is a fixed point.
pub fn run_evolve(config: &Config, seed: u64) -> Result<Report> {
    let problem = problem_of(config)?;
    let evolution = integrate_flow(config, &problem)?;
    let mut checks = conservation_checks(config, &evolution);

    if matches!(config.potential, PotentialConfig::Stationary)
        && config.initial.phase_amplitude == 0.0
    {
        let last = evolution.states.last().expect("the initial state is always recorded");
        let drift = (last.rho.field() - problem.initial.rho.field())
            .sup_norm()
            .max(last.phi.field().sup_norm());
        checks.push(Check::le(
            "stationary_drift",
            drift,
            config.tolerances.stationary_drift,
        ));
    }

    Ok(Report {
        suite: "evolve",
        seed,
        config: config.clone(),
        checks,
        series: conservation_series(&evolution),
    })
}

/// Weighted L² distance between a density and the modulus squared of a
/// wave function on the same grid.
fn density_distance(rho: &ScalarField, psi: &WaveFunction) -> f64 {
    rho.values()
        .iter()
        .zip(psi.values())
        .zip(psi.grid().quadrature_weights())
        .map(|((r, c), &w)| (r - c.norm_sqr()).powi(2) * w)
        .sum::<f64>()
        .sqrt()
}

/// `crossval`: run the hydrodynamic flow and the split-step reference
/// side by side, comparing densities and rays at every recorded time,
/// and verify the advertised convergence orders of both integrators on
/// a fixed small study problem.
pub fn run_crossval(config: &Config, seed: u64) -> Result<Report> {
    let problem = problem_of(config)?;
    let evolution = integrate_flow(config, &problem)?;
    let dt = config.dt.expect("dt presence is validated for this suite");
    let hbar = config.hbar;

    let mut psi = to_wave(&problem.initial, hbar)
        .map_err(|e| anyhow!("cross-validation needs a flat grid: {e}"))?;
    let mut density_gap = Series::new("density_gap");
    let mut ray_gap = Series::new("projective_distance");
    let mut worst_density = 0.0f64;
    let mut worst_ray = 0.0f64;
    let mut prev_time = problem.initial.time;
    for state in &evolution.states {
        let steps = ((state.time - prev_time) / dt).round() as usize;
        if steps > 0 {
            psi = split_step_evolve(&psi, &problem.potential, hbar, dt, steps)
                .map_err(|e| anyhow!("split-step reference rejected the run: {e}"))?;
            prev_time = state.time;
        }
        let d = density_distance(state.rho.field(), &psi);
        let r = projective_distance(
            &to_wave(state, hbar).expect("grid flatness was checked above"),
            &psi,
        );
        density_gap.push(state.time, d);
        ray_gap.push(state.time, r);
        worst_density = worst_density.max(d);
        worst_ray = worst_ray.max(r);
    }

    let mut checks = conservation_checks(config, &evolution);
    checks.push(Check::le(
        "density_gap",
        worst_density,
        config.tolerances.density_gap,
    ));
    checks.push(Check::le(
        "projective_distance",
        worst_ray,
        config.tolerances.ray_gap,
    ));
    checks.extend(convergence_checks());

    let mut series = conservation_series(&evolution);
    series.push(density_gap);
    series.push(ray_gap);

    Ok(Report {
        suite: "crossval",
        seed,
        config: config.clone(),
        checks,
        series,
    })
}

/// Convergence orders on a fixed study problem (independent of the run
/// configuration, so the measured factors are comparable across runs):
/// the flow error must shrink ≈16× and the split-step error ≈4× under
/// dt halving, and the spectral Laplacian error on the entire function
/// e^{cos x} must fall geometrically with the grid size.
fn convergence_checks() -> Vec<Check> {
    let g = PeriodicGrid::circle(32, TAU).expect("study grid");
    let rho0 = Density::new(ScalarField::from_fn(&g, |x| (1.0 + 0.3 * x[0].cos()) / TAU))
        .expect("study density");
    let phi0 = PhasePotential::from_field(&ScalarField::from_fn(&g, |x| 0.2 * x[0].sin()));
    let initial = TrajectoryState::new(0.0, rho0, phi0);
    let v = ScalarField::from_fn(&g, |x| x[0].cos());
    let hbar = 0.5;

    let run = |dt: f64| -> TrajectoryState {
        let mut sim = SimulationConfig::new(&g, v.clone(), hbar, dt, 0.4);
        sim.record_every = usize::MAX / 2;
        evolve(&initial, &sim)
            .expect("fixed study configuration")
            .states
            .last()
            .expect("completed study run")
            .clone()
    };
    let reference = run(0.0025);
    let err = |s: &TrajectoryState| {
        (s.rho.field() - reference.rho.field()).l2_norm()
            + (s.phi.field() - reference.phi.field()).l2_norm()
    };
    let rk4_factor = err(&run(0.02)) / err(&run(0.01));

    let gs = PeriodicGrid::circle(64, TAU).expect("study grid");
    let rho0 = Density::new(ScalarField::from_fn(&gs, |x| (1.0 + 0.3 * x[0].cos()) / TAU))
        .expect("study density");
    let phi0 = PhasePotential::from_field(&ScalarField::from_fn(&gs, |x| 0.2 * x[0].sin()));
    let vs = ScalarField::from_fn(&gs, |x| x[0].cos());
    let psi0 = to_wave(&TrajectoryState::new(0.0, rho0, phi0), hbar).expect("flat study grid");
    let strang = |steps: usize| {
        split_step_evolve(&psi0, &vs, hbar, 0.1 / steps as f64, steps)
            .expect("fixed study configuration")
    };
    let wave_gap = |a: &WaveFunction, b: &WaveFunction| {
        a.values()
            .iter()
            .zip(b.values())
            .zip(a.grid().quadrature_weights())
            .map(|((x, y), &w)| (x - y).norm_sqr() * w)
            .sum::<f64>()
            .sqrt()
    };
    let strang_reference = strang(800);
    let strang_factor =
        wave_gap(&strang(50), &strang_reference) / wave_gap(&strang(100), &strang_reference);

    let spectral_errs: Vec<f64> = [16usize, 32, 64]
        .iter()
        .map(|&n| {
            let g = PeriodicGrid::circle(n, TAU).expect("study grid");
            let f = ScalarField::from_fn(&g, |x| x[0].cos().exp());
            let exact = ScalarField::from_fn(&g, |x| {
                (x[0].sin().powi(2) - x[0].cos()) * x[0].cos().exp()
            });
            (&laplacian(&f) - &exact).sup_norm()
        })
        .collect();
    // Decay ratio per doubling; zero once the finer error is
    // rounding-dominated.
    let decay = |coarse: f64, fine: f64| {
        if fine < SPECTRAL_FLOOR {
            0.0
        } else {
            fine / coarse
        }
    };

    vec![
        Check::ge("flow_halving_factor_floor", rk4_factor, RK4_FACTOR_RANGE.0),
        Check::le("flow_halving_factor_ceiling", rk4_factor, RK4_FACTOR_RANGE.1),
        Check::ge(
            "split_step_halving_factor_floor",
            strang_factor,
            STRANG_FACTOR_RANGE.0,
        ),
        Check::le(
            "split_step_halving_factor_ceiling",
            strang_factor,
            STRANG_FACTOR_RANGE.1,
        ),
        Check::le(
            "laplacian_decay_16_to_32",
            decay(spectral_errs[0], spectral_errs[1]),
            SPECTRAL_DECAY_FACTOR,
        ),
        Check::le(
            "laplacian_decay_32_to_64",
            decay(spectral_errs[1], spectral_errs[2]),
            SPECTRAL_DECAY_FACTOR,
        ),
    ]
}

fn random_point(grid: &Arc<PeriodicGrid>, s: &mut FieldSampler) -> Result<TangentPoint> {
    TangentPoint::new(
        Density::from_values(grid, s.density_values(0.5)).context("sampled density")?,
        gradient(&s.scalar(0.8)),
    )
    .context("sampled tangent point")
}

fn random_direction(p: &TangentPoint, s: &mut FieldSampler, scale: f64) -> Result<DoubleTangent> {
    DoubleTangent::new(
        p.clone(),
        gradient(&s.scalar(scale)),
        gradient(&s.scalar(scale)),
    )
    .context("sampled direction")
}

/// `verify-geometry`: the metric, symplectic, and connection identities
/// on seeded random band-limited fields over the unit-circumference-2π
/// circle (the witness fields are harmonics of that circle, so the
/// configured grid length is not used here).
pub fn run_verify_geometry(config: &Config, seed: u64) -> Result<Report> {
    let grid = PeriodicGrid::circle(config.grid.points, TAU)
        .map_err(|e| anyhow!("field \"grid.points\": {e}"))?;
    let mut s = FieldSampler::new(&grid, seed);
    let t = &config.tolerances;
    let trials = config.trials;

    // The weighted elliptic solve inverts the tangent identification.
    let mut round_trip = 0.0f64;
    for _ in 0..trials {
        let rho = Density::from_values(&grid, s.density_values(0.5)).context("sampled density")?;
        let phi = s.scalar(1.0);
        let h = p_operator(rho.field(), &phi).context("tangent identification")?;
        let recovered = solve_phase(&rho, &h, None).context("elliptic solve")?;
        round_trip = round_trip.max((recovered.field() - &phi).sup_norm());
    }

    // Torsion against the symbolic witness at uniform density:
    // ψ = sin x − sin(3x)/12 and χ = −cos x + cos(3x)/12 have
    // [∇ψ, ∇χ] = (19/16 − cos 2x)∂x, whose projection is ∇(−sin(2x)/2).
    let uniform = Density::uniform(&grid);
    let gp = gradient(&ScalarField::from_fn(&grid, |x| {
        x[0].sin() - (3.0 * x[0]).sin() / 12.0
    }));
    let gq = gradient(&ScalarField::from_fn(&grid, |x| {
        -x[0].cos() + (3.0 * x[0]).cos() / 12.0
    }));
    let witness = gradient(&ScalarField::from_fn(&grid, |x| -(2.0 * x[0]).sin() / 2.0));
    let torsion_gap =
        (&torsion(&uniform, &gp, &gq).context("torsion witness")? - &witness).sup_norm();

    let mut antisym = 0.0f64;
    for _ in 0..trials {
        let rho = Density::from_values(&grid, s.density_values(0.5)).context("sampled density")?;
        let a = gradient(&s.scalar(1.0));
        let b = gradient(&s.scalar(1.0));
        let tab = torsion(&rho, &a, &b).context("torsion")?;
        let tba = torsion(&rho, &b, &a).context("torsion")?;
        antisym = antisym.max((&tab + &tba).sup_norm());
    }

    // A nonvanishing Nijenhuis value: the almost complex structure is
    // not integrable.
    let rest = TangentPoint::rest(&grid);
    let zero = VectorField::zero(&grid);
    let a = DoubleTangent::new(rest.clone(), gp.clone(), zero.clone())
        .context("Nijenhuis witness direction")?;
    let b = DoubleTangent::new(rest, gq, zero).context("Nijenhuis witness direction")?;
    let nijenhuis_norm = nijenhuis(&a, &b).context("Nijenhuis tensor")?.sup_norm();

    // The two expressions for the symplectic pairing agree.
    let mut form_gap = 0.0f64;
    for _ in 0..trials {
        let p = random_point(&grid, &mut s)?;
        let x = random_direction(&p, &mut s, 0.8)?;
        let y = random_direction(&p, &mut s, 0.8)?;
        let (_, omega_via_j, _) = almost_hermitian(&x, &y).context("almost-Hermitian triple")?;
        let omega_direct = symplectic_form(&x, &y).context("symplectic form")?;
        form_gap = form_gap.max((omega_via_j - omega_direct).abs());
    }

    // Flatness and closedness by finite-difference probes.
    let mut curvature = 0.0f64;
    let mut closedness = 0.0f64;
    for _ in 0..trials {
        let rho = Density::from_values(&grid, s.density_values(0.5)).context("sampled density")?;
        let xi_x = s.scalar(0.8);
        let xi_y = s.scalar(0.8);
        curvature = curvature.max(curvature_defect(&rho, &xi_x, &xi_y, CURVATURE_STEP));

        let p = random_point(&grid, &mut s)?;
        let x = random_direction(&p, &mut s, 0.6)?;
        let y = random_direction(&p, &mut s, 0.6)?;
        closedness =
            closedness.max(closedness_defect(&x, &y, CLOSEDNESS_STEP).context("closedness probe")?);
    }

    // The symplectic gradient pairs to the directional derivative.
    let mut relation = 0.0f64;
    for _ in 0..trials {
        let p = random_point(&grid, &mut s)?;
        let f = Observable::new(s.scalar(1.0), s.vector(0.8), 0.5);
        let c = random_direction(&p, &mut s, 0.5)?;
        let xf = symplectic_gradient_lift(&f, &p).context("symplectic gradient")?;
        let lhs = symplectic_form(&xf, &c).context("symplectic form")?;
        let rhs = lift_directional_derivative(&f, &p, &c, GRADIENT_RELATION_STEP)
            .context("directional derivative")?;
        relation = relation.max((lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1e-6));
    }

    Ok(Report {
        suite: "verify-geometry",
        seed,
        config: config.clone(),
        checks: vec![
            Check::le("elliptic_round_trip", round_trip, t.round_trip),
            Check::le("torsion_witness", torsion_gap, t.torsion_witness),
            Check::le("torsion_antisymmetry", antisym, t.antisymmetry),
            Check::ge("nijenhuis_witness", nijenhuis_norm, t.nijenhuis_floor),
            Check::le("form_agreement", form_gap, t.form_agreement),
            Check::le("curvature_defect", curvature, t.curvature),
            Check::le("closedness_defect", closedness, t.closedness),
            Check::le("gradient_relation", relation, t.gradient_relation),
        ],
        series: Vec::new(),
    })
}

/// `bracket-check`: the lifted Poisson bracket negates the lift of the
/// canonical bracket, over seeded random observables and base points.
pub fn run_bracket_check(config: &Config, seed: u64) -> Result<Report> {
    let grid = PeriodicGrid::circle(config.grid.points, TAU)
        .map_err(|e| anyhow!("field \"grid.points\": {e}"))?;
    let mut s = FieldSampler::new(&grid, seed);
    let coeffs = [0.4, -0.3, 0.25, 0.6, -0.45, 0.35];

    let mut worst = 0.0f64;
    for trial in 0..config.trials {
        let p = random_point(&grid, &mut s)?;
        let f = Observable::new(s.scalar(1.0), s.vector(0.7), coeffs[trial % coeffs.len()]);
        let g = Observable::new(
            s.scalar(0.9),
            s.vector(0.6),
            coeffs[(trial + 3) % coeffs.len()],
        );
        let lifted = poisson_bracket_lifted(&f, &g, &p).context("lifted bracket")?;
        let base = canonical_bracket(&f, &g, p.grad_phi()).context("canonical bracket")?;
        let integrated = -integrate(&base.zip_with(p.rho().field(), |a, b| a * b));
        let scale = lifted.abs().max(integrated.abs()).max(1.0);
        worst = worst.max((lifted - integrated).abs() / scale);
    }

    Ok(Report {
        suite: "bracket-check",
        seed,
        config: config.clone(),
        checks: vec![Check::le(
            "bracket_negation",
            worst,
            config.tolerances.bracket,
        )],
        series: Vec::new(),
    })
}

/// `gaussian-check`: the coherent-state quantization identities — the
/// expectation of each quantized function reproduces its symbol, the
/// quadrature is converged, the modulus law holds pointwise, the phase
/// orientation of the mean-path identification is the documented one,
/// and the finite-dimensional wave function obeys its modulus law.
pub fn run_gaussian_check(config: &Config, seed: u64) -> Result<Report> {
    let t = &config.tolerances;
    let hbar = config.hbar;

    // The identity sweep always covers the three canonical ħ values in
    // addition to the configured one, over a 5×5 grid of z ∈ [−2, 2]².
    let mut identity = 0.0f64;
    for f in KahlerFunction::ALL {
        for i in 0..5 {
            for j in 0..5 {
                let z = GaussianPoint::new(-2.0 + i as f64, -2.0 + j as f64);
                for h in [0.5, 1.0, 2.0, hbar] {
                    let gap =
                        (expectation(f, z, h).context("expectation")? - kahler_eval(f, z)).abs();
                    identity = identity.max(gap);
                }
            }
        }
    }

    // Doubling the sample count must not move the expectations.
    let z = GaussianPoint::new(0.7, -0.4);
    let doubled = SampleLine::new(z.x, MIN_HALF_WIDTH, 2 * DEFAULT_SAMPLES)
        .context("doubled quadrature window")?;
    let mut quadrature_shift = 0.0f64;
    for f in KahlerFunction::ALL {
        let coarse = expectation(f, z, hbar).context("expectation")?;
        let fine = expectation_on(f, z, hbar, &doubled).context("expectation")?;
        quadrature_shift = quadrature_shift.max((fine - coarse).abs());
    }

    // |Ψ(z)(ξ)|² is the 𝒩(x, 1) density, pointwise.
    let mut modulus = 0.0f64;
    for &(x, y) in &[(0.0, 0.0), (1.2, -0.8), (-2.0, 2.0)] {
        let z = GaussianPoint::new(x, y);
        let line = SampleLine::standard(z.x);
        let psi = gaussian_wave(z, hbar, &line).context("coherent state")?;
        for (xi, value) in line.points().iter().zip(&psi) {
            let pdf = (-0.5 * (xi - x).powi(2)).exp() / TAU.sqrt();
            modulus = modulus.max((value.norm_sqr() - pdf).abs());
        }
    }

    // Transporting the mean with μ̇ = −y zeroes the continuity residual
    // for the phase φ = +yξ; the opposite orientation must not win.
    let mut orientation = 0.0f64;
    let mut flips = 0.0f64;
    for &y in &[0.0, 0.7, -1.3] {
        let check = gaussian_phase_check(-y, y);
        orientation = orientation.max(check.residual);
        if check.flipped {
            flips += 1.0;
        }
    }

    // Finite sample space: |Ψ_k|² = p_k for seeded weights and a
    // zero-sum velocity.
    let sample_grid = PeriodicGrid::circle(16, TAU).expect("sampling grid");
    let mut s = FieldSampler::new(&sample_grid, seed);
    let weights = FiniteProbability::new(s.density_values(0.5)).context("sampled weights")?;
    let pdot = s.scalar(0.5);
    let wave = finite_wave(&weights, pdot.values()).context("finite wave")?;
    let mut finite_modulus = 0.0f64;
    for (value, &p) in wave.iter().zip(weights.weights()) {
        finite_modulus = finite_modulus.max((value.norm_sqr() - p).abs());
    }

    Ok(Report {
        suite: "gaussian-check",
        seed,
        config: config.clone(),
        checks: vec![
            Check::le("quantization_identity", identity, t.quantization),
            Check::le("quadrature_shift", quadrature_shift, t.quadrature_shift),
            Check::le("modulus_law", modulus, t.modulus_law),
            Check::le("phase_orientation_residual", orientation, t.orientation_residual),
            Check::le("phase_orientation_flips", flips, 0.0),
            Check::le("finite_modulus_law", finite_modulus, t.modulus_law),
        ],
        series: Vec::new(),
    })
}
