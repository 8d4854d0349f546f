//! The manifold of probability densities and its tangent calculus.
//!
//! The state space is 𝒟 = { ρ ∈ C^∞(M) : ρ > 0, ∫ρ dvol = 1 }, realized
//! here by [`Density`]: strictly positive node values above a fixed floor,
//! normalized to unit mass. Its tangent space at any point is the space of
//! zero-mean functions ([`TangentDensity`]), and a tangent vector `h` is
//! identified with a phase potential φ (zero-mean, [`PhasePotential`])
//! through the weighted elliptic equation
//!
//! ```text
//!     h = div(ρ(∇φ + X)),
//! ```
//!
//! where `X` is an optional drift field. The operator `u ↦ div(f∇u)`
//! ([`p_operator`]) is self-adjoint in L²(dvol) and negative definite on
//! zero-mean functions for positive `f`, so the identification is solved
//! by preconditioned conjugate gradients ([`solve_phase`]); a dense
//! direct solve ([`dense_solve_phase`]) serves as an independent
//! cross-check at small grid sizes.
//!
//! The same solve yields the ρ-weighted Helmholtz–Hodge projection
//! ([`helmholtz_project`]): any vector field `Z` splits as
//! `Z = Z̄ + ρ∇φ` with `div Z̄ = 0`, and the projection returns the
//! gradient part `∇φ`.

use std::sync::Arc;

use crate::grid::{divergence, gradient, integrate, PeriodicGrid, ScalarField, VectorField};
use crate::{Error, Result};

/// Pointwise lower bound for admissible densities. Densities are strictly
/// positive in the continuum; the floor turns "the density develops a
/// node" into a detectable error instead of silent ill-conditioning.
pub const DENSITY_FLOOR: f64 = 1e-8;

/// Relative residual target of the elliptic solver: small enough that
/// discretization error dominates solver error in every downstream check.
pub const TOL_SOLVE: f64 = 1e-10;

/// Tolerance on |∫h dvol| relative to ‖h‖ for zero-mean data.
pub const ZERO_MEAN_TOL: f64 = 1e-10;

/// A point of the density manifold: strictly positive node values with
/// unit mass. Construction renormalizes, so mass holds to rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    field: ScalarField,
}

impl Density {
    /// Normalize `field` to unit mass and validate positivity.
    ///
    /// # Errors
    /// [`Error::DensityFloor`] if any normalized node value falls below
    /// [`DENSITY_FLOOR`] (including non-positive total mass).
    pub fn new(field: ScalarField) -> Result<Self> {
        let mass = integrate(&field);
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::DensityFloor {
                min: field.min_value(),
                floor: DENSITY_FLOOR,
            });
        }
        let field = field.scale(1.0 / mass);
        let min = field.min_value();
        if min < DENSITY_FLOOR {
            return Err(Error::DensityFloor {
                min,
                floor: DENSITY_FLOOR,
            });
        }
        Ok(Self { field })
    }

    /// Wrap raw node values (see [`Density::new`]).
    pub fn from_values(grid: &Arc<PeriodicGrid>, values: Vec<f64>) -> Result<Self> {
        Self::new(ScalarField::new(Arc::clone(grid), values)?)
    }

    /// The uniform density 1/Vol.
    pub fn uniform(grid: &Arc<PeriodicGrid>) -> Self {
        Self {
            field: ScalarField::constant(grid, 1.0 / grid.volume()),
        }
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    pub fn grid(&self) -> &Arc<PeriodicGrid> {
        self.field.grid()
    }

    pub fn values(&self) -> &[f64] {
        self.field.values()
    }

    /// Smallest node value.
    pub fn min_value(&self) -> f64 {
        self.field.min_value()
    }
}

/// A tangent vector to the density manifold: a zero-mean function
/// (the mass constraint ∫ρ = 1 differentiates to ∫h = 0).
#[derive(Debug, Clone, PartialEq)]
pub struct TangentDensity {
    field: ScalarField,
}

impl TangentDensity {
    /// Validate that `field` has zero mean relative to its size.
    ///
    /// # Errors
    /// [`Error::NonZeroMean`] if |∫h dvol| > [`ZERO_MEAN_TOL`]·‖h‖₂.
    pub fn new(field: ScalarField) -> Result<Self> {
        let integral = integrate(&field);
        let limit = ZERO_MEAN_TOL * field.l2_norm();
        if integral.abs() > limit {
            return Err(Error::NonZeroMean { integral, limit });
        }
        Ok(Self { field })
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    pub fn values(&self) -> &[f64] {
        self.field.values()
    }

    pub(crate) fn from_zero_mean_unchecked(field: ScalarField) -> Self {
        Self { field }
    }
}

/// The zero-mean representative of a phase potential, which the continuum
/// theory only defines up to an additive constant.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePotential {
    field: ScalarField,
}

impl PhasePotential {
    /// Validate that `field` has zero mean relative to its size.
    ///
    /// # Errors
    /// [`Error::NonZeroMean`] if |∫φ dvol| > [`ZERO_MEAN_TOL`]·‖φ‖₂.
    pub fn new(field: ScalarField) -> Result<Self> {
        let integral = integrate(&field);
        let limit = ZERO_MEAN_TOL * field.l2_norm();
        if integral.abs() > limit {
            return Err(Error::NonZeroMean { integral, limit });
        }
        Ok(Self { field })
    }

    /// Canonical representative of an arbitrary potential: subtract the
    /// dvol-mean.
    pub fn from_field(f: &ScalarField) -> Self {
        Self {
            field: f.map({
                let m = f.mean();
                move |v| v - m
            }),
        }
    }

    /// The zero potential.
    pub fn zero(grid: &Arc<PeriodicGrid>) -> Self {
        Self {
            field: ScalarField::constant(grid, 0.0),
        }
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    /// Metric gradient ∇φ.
    pub fn gradient(&self) -> VectorField {
        gradient(&self.field)
    }
}

/// L²(dvol)-orthogonal projection onto zero-mean functions:
/// `f − (1/Vol)∫f dvol`. Idempotent.
pub fn zero_mean_project(f: &ScalarField) -> TangentDensity {
    let m = f.mean();
    TangentDensity::from_zero_mean_unchecked(f.map(move |v| v - m))
}

/// The weighted elliptic operator `P_f(u) = div(f·∇u)`.
///
/// For positive weight `f` this is self-adjoint in L²(dvol) and maps into
/// zero-mean functions (a divergence always integrates to zero). With
/// `f ≡ 1` it reduces to the Laplace–Beltrami operator; its kernel is the
/// constants.
///
/// # Errors
/// [`Error::NonPositiveWeight`] if `min(f) ≤ 0`.
pub fn p_operator(f: &ScalarField, u: &ScalarField) -> Result<TangentDensity> {
    let min = f.min_value();
    if min <= 0.0 {
        return Err(Error::NonPositiveWeight { min });
    }
    let flux = gradient(u).scale_by(f);
    Ok(TangentDensity::from_zero_mean_unchecked(divergence(&flux)))
}

/// Apply `u ↦ −div(ρ∇u)` to raw node values (the positive-definite form
/// of the weighted Laplacian used by the solvers below).
fn apply_neg_weighted_laplacian(rho: &Density, u_values: Vec<f64>) -> Vec<f64> {
    let grid = rho.grid();
    let u = ScalarField::from_values_unchecked(grid, u_values);
    let flux = gradient(&u).scale_by(rho.field());
    divergence(&flux).map(|v| -v).into_values()
}

/// Right-hand side of the solver in positive-definite form:
/// `b = −(h − div(ρX))`, projected to zero mean.
fn solver_rhs(rho: &Density, h: &TangentDensity, x: Option<&VectorField>) -> Vec<f64> {
    let grid = rho.grid();
    let mut b: Vec<f64> = match x {
        None => h.values().iter().map(|&v| -v).collect(),
        Some(x) => {
            let div_rx = divergence(&x.scale_by(rho.field()));
            h.values()
                .iter()
                .zip(div_rx.values())
                .map(|(&hv, &dv)| dv - hv)
                .collect()
        }
    };
    let m = grid.mean_of(&b);
    for v in &mut b {
        *v -= m;
    }
    b
}

/// Recover the phase potential φ of a tangent vector: the unique
/// zero-mean solution of `div(ρ(∇φ + X)) = h` (with `X = 0` when
/// omitted).
///
/// The equation is solved by conjugate gradients on the zero-mean
/// subspace in the L²(dvol) inner product, preconditioned by the
/// flat-chart inverse Laplacian; iteration stops when the residual
/// `‖div(ρ(∇φ+X)) − h‖` drops below [`TOL_SOLVE`] relative to the data
/// (the larger of ‖h‖ and ‖h − div(ρX)‖, so a pure-drift right-hand side
/// is still well-scaled).
///
/// # Errors
/// - [`Error::NonZeroMean`] if `h` violates its zero-mean precondition.
/// - [`Error::SolverDivergence`] if the iteration fails to reach the
///   residual target within 10·N iterations.
pub fn solve_phase(
    rho: &Density,
    h: &TangentDensity,
    x: Option<&VectorField>,
) -> Result<PhasePotential> {
    let grid = Arc::clone(rho.grid());
    let w = grid.quadrature_weights();
    let dot = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).zip(w).map(|((x, y), w)| x * y * w).sum()
    };

    let h_int = integrate(h.field());
    let h_norm = dot(h.values(), h.values()).max(0.0).sqrt();
    let limit = ZERO_MEAN_TOL * h_norm;
    if h_int.abs() > limit {
        return Err(Error::NonZeroMean {
            integral: h_int,
            limit,
        });
    }

    let b = solver_rhs(rho, h, x);
    let b_norm = dot(&b, &b).max(0.0).sqrt();
    if b_norm == 0.0 && h_norm == 0.0 {
        return Ok(PhasePotential::zero(&grid));
    }
    let target = TOL_SOLVE * h_norm.max(b_norm);
    let max_iters = 10 * grid.node_count();

    let project = |v: &mut [f64]| {
        let m = grid.mean_of(v);
        for x in v.iter_mut() {
            *x -= m;
        }
    };
    // Preconditioner W⁻¹∘(−Δ_chart)⁻¹: symmetric positive definite in the
    // weighted inner product (⟨Pa, b⟩_W = aᵀ(−Δ)⁻¹b), exact for ρ uniform
    // on a flat grid.
    let precondition = |r: &[f64]| -> Vec<f64> {
        let mut z = grid.flat_inverse_laplacian(r);
        for (zi, wi) in z.iter_mut().zip(w) {
            *zi /= wi;
        }
        project(&mut z);
        z
    };

    let mut phi = vec![0.0; grid.node_count()];
    let mut r = b;
    let mut z = precondition(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut res_norm = dot(&r, &r).max(0.0).sqrt();
    let mut iters = 0;

    while res_norm > target {
        if iters >= max_iters || !res_norm.is_finite() {
            return Err(Error::SolverDivergence {
                iters,
                residual: res_norm,
                target,
            });
        }
        let ap = apply_neg_weighted_laplacian(rho, p.clone());
        let pap = dot(&p, &ap);
        if !(pap.is_finite() && pap > 0.0) {
            return Err(Error::SolverDivergence {
                iters,
                residual: res_norm,
                target,
            });
        }
        let alpha = rz / pap;
        for ((phi_i, r_i), (p_i, ap_i)) in
            phi.iter_mut().zip(r.iter_mut()).zip(p.iter().zip(&ap))
        {
            *phi_i += alpha * p_i;
            *r_i -= alpha * ap_i;
        }
        z = precondition(&r);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for (p_i, z_i) in p.iter_mut().zip(&z) {
            *p_i = z_i + beta * *p_i;
        }
        res_norm = dot(&r, &r).max(0.0).sqrt();
        iters += 1;
    }

    // Canonical gauge: drop the sawtooth modes the derivative cannot see
    // (they are inert in the iteration) and re-center the mean.
    grid.remove_nyquist_kernel(&mut phi);
    project(&mut phi);
    PhasePotential::new(ScalarField::from_values_unchecked(&grid, phi))
}

/// Dense direct counterpart of [`solve_phase`]: assembles the weighted
/// Laplacian column by column, borders it with the quadrature weights to
/// pin the zero-mean gauge, and solves by Gaussian elimination with
/// partial pivoting.
///
/// An O(N³) reference implementation for cross-checking the iterative
/// solver on grids up to a few hundred nodes; not for production use.
///
/// # Errors
/// [`Error::NonZeroMean`] as for [`solve_phase`].
///
/// # Panics
/// If the bordered system is numerically singular, which cannot happen
/// for a valid density.
pub fn dense_solve_phase(
    rho: &Density,
    h: &TangentDensity,
    x: Option<&VectorField>,
) -> Result<PhasePotential> {
    let grid = Arc::clone(rho.grid());
    let n = grid.node_count();
    let w = grid.quadrature_weights();

    let h_int = integrate(h.field());
    let limit = ZERO_MEAN_TOL * h.field().l2_norm();
    if h_int.abs() > limit {
        return Err(Error::NonZeroMean {
            integral: h_int,
            limit,
        });
    }

    let b = solver_rhs(rho, h, x);
    // The discrete operator has a gauge kernel: constants plus the
    // Nyquist sawtooth modes the spectral derivative annihilates. Border
    // the system with one row/column per kernel direction — the
    // quadrature weights pin ∫φ dvol = 0, the sawtooths pin their own
    // components — giving a nonsingular square system
    // [[A, C], [Cᵀ, 0]]·[φ, μ] = [b, 0].
    let mut borders = vec![w.to_vec()];
    borders.extend(grid.nyquist_kernel_basis());
    let m = borders.len();
    let size = n + m;
    let mut aug = vec![vec![0.0; size + 1]; size];
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = apply_neg_weighted_laplacian(rho, e);
        for (i, &v) in col.iter().enumerate() {
            aug[i][j] = v;
        }
    }
    for (k, border) in borders.iter().enumerate() {
        for i in 0..n {
            aug[i][n + k] = border[i];
            aug[n + k][i] = border[i];
        }
    }
    for i in 0..n {
        aug[i][size] = b[i];
    }

    let sol = gaussian_elimination(&mut aug).expect("bordered weighted Laplacian is nonsingular");
    let mut phi: Vec<f64> = sol[..n].to_vec();
    grid.remove_nyquist_kernel(&mut phi);
    let mean = grid.mean_of(&phi);
    for v in &mut phi {
        *v -= mean;
    }
    PhasePotential::new(ScalarField::from_values_unchecked(&grid, phi))
}

/// Solve the augmented system rows `[M | rhs]` in place by Gaussian
/// elimination with partial pivoting; returns the solution vector, or
/// `None` on a vanishing pivot.
fn gaussian_elimination(aug: &mut [Vec<f64>]) -> Option<Vec<f64>> {
    let n = aug.len();
    for k in 0..n {
        let pivot_row = (k..n).max_by(|&a, &b| {
            aug[a][k]
                .abs()
                .partial_cmp(&aug[b][k].abs())
                .expect("pivot magnitudes are comparable")
        })?;
        aug.swap(k, pivot_row);
        let (solved, remaining) = aug.split_at_mut(k + 1);
        let lead_row = &solved[k];
        let pivot = lead_row[k];
        if pivot.abs() < f64::EPSILON {
            return None;
        }
        for row in remaining.iter_mut() {
            let factor = row[k] / pivot;
            if factor == 0.0 {
                continue;
            }
            for (entry, lead) in row[k..=n].iter_mut().zip(&lead_row[k..=n]) {
                *entry -= factor * lead;
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut s = aug[k][n];
        for j in k + 1..n {
            s -= aug[k][j] * x[j];
        }
        x[k] = s / aug[k][k];
    }
    Some(x)
}

/// ρ-weighted Helmholtz–Hodge projection: the gradient part of
/// `Z = Z̄ + ρ∇φ` with `div Z̄ = 0`.
///
/// Returns `∇φ` where `φ = solve_phase(ρ, div Z)`; the divergence-free
/// remainder is `Z − ρ∇φ`.
///
/// # Errors
/// Propagates [`solve_phase`] errors.
pub fn helmholtz_project(rho: &Density, z: &VectorField) -> Result<VectorField> {
    let h = zero_mean_project(&divergence(z));
    let phi = solve_phase(rho, &h, None)?;
    Ok(phi.gradient())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandlimited::FieldSampler;
    use crate::grid::laplacian;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::TAU;

    fn circle(n: usize) -> Arc<PeriodicGrid> {
        PeriodicGrid::circle(n, TAU).unwrap()
    }

    /// The benchmark density (1 + 0.5 sin x)/2π.
    fn sine_density(grid: &Arc<PeriodicGrid>) -> Density {
        Density::new(ScalarField::from_fn(grid, |x| (1.0 + 0.5 * x[0].sin()) / TAU)).unwrap()
    }

    #[test]
    fn density_construction_normalizes_and_enforces_floor() {
        let g = circle(64);
        // Mass 2 on input: construction halves it back to unit mass.
        let double = ScalarField::from_fn(&g, |x| (2.0 + x[0].sin()) / TAU);
        let rho = Density::new(double).unwrap();
        assert_abs_diff_eq!(integrate(rho.field()), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(rho.values()[0], 1.0 / TAU, epsilon = 1e-14);

        // A node-touching profile is rejected.
        let touching = ScalarField::from_fn(&g, |x| 1.0 + x[0].cos());
        match Density::new(touching) {
            Err(Error::DensityFloor { min, floor }) => {
                assert!(min < floor);
            }
            other => panic!("expected DensityFloor, got {other:?}"),
        }
    }

    #[test]
    fn uniform_density_has_unit_mass_on_conformal_circle() {
        let g0 = circle(32);
        let lam: Vec<f64> = g0.nodes().iter().map(|x| 0.3 * x[0].cos()).collect();
        let g = PeriodicGrid::conformal_circle(32, TAU, lam).unwrap();
        let rho = Density::uniform(&g);
        assert_abs_diff_eq!(integrate(rho.field()), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn zero_mean_project_examples() {
        let g = circle(32);
        let c = zero_mean_project(&ScalarField::constant(&g, 3.7));
        assert!(c.field().sup_norm() < 1e-14);

        let cos = ScalarField::from_fn(&g, |x| x[0].cos());
        let p = zero_mean_project(&cos);
        for (a, b) in p.values().iter().zip(cos.values()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }

        let shifted = ScalarField::from_fn(&g, |x| 1.0 + x[0].cos());
        let q = zero_mean_project(&shifted);
        for (a, b) in q.values().iter().zip(cos.values()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
        // Idempotent.
        let qq = zero_mean_project(q.field());
        for (a, b) in qq.values().iter().zip(q.values()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn p_operator_with_unit_weight_is_laplacian() {
        let g = circle(64);
        let mut s = FieldSampler::new(&g, 42);
        let u = s.scalar(1.0);
        let via_p = p_operator(&ScalarField::constant(&g, 1.0), &u).unwrap();
        let via_lap = laplacian(&u);
        for (a, b) in via_p.values().iter().zip(via_lap.values()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn p_operator_kernel_contains_constants() {
        let g = circle(32);
        let f = ScalarField::from_fn(&g, |x| 1.5 + x[0].sin());
        let u = ScalarField::constant(&g, -2.0);
        assert!(p_operator(&f, &u).unwrap().field().sup_norm() < 1e-12);
    }

    #[test]
    fn p_operator_matches_symbolic_derivative() {
        // f = (1 + 0.5 sin x)/2π, u = cos x:
        // div(f·(−sin x)) = d/dx[−(sin x + 0.5 sin²x)]/2π
        //                 = −(cos x + 0.5 sin 2x)/2π.
        let g = circle(64);
        let f = ScalarField::from_fn(&g, |x| (1.0 + 0.5 * x[0].sin()) / TAU);
        let u = ScalarField::from_fn(&g, |x| x[0].cos());
        let out = p_operator(&f, &u).unwrap();
        for (x, &v) in g.nodes().iter().zip(out.values()) {
            let expected = -(x[0].cos() + 0.5 * (2.0 * x[0]).sin()) / TAU;
            assert_abs_diff_eq!(v, expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn p_operator_rejects_nonpositive_weight() {
        let g = circle(32);
        let f = ScalarField::from_fn(&g, |x| x[0].sin());
        let u = ScalarField::constant(&g, 1.0);
        match p_operator(&f, &u) {
            Err(Error::NonPositiveWeight { min }) => assert!(min <= 0.0),
            other => panic!("expected NonPositiveWeight, got {other:?}"),
        }
    }

    #[test]
    fn p_operator_range_is_zero_mean() {
        let g = circle(64);
        let mut s = FieldSampler::new(&g, 9);
        for _ in 0..20 {
            let f = s.scalar(0.4).map(|v| 1.0 + v);
            let u = s.scalar(1.3);
            let out = p_operator(&f, &u).unwrap();
            assert!(integrate(out.field()).abs() < 1e-10 * u.l2_norm().max(1e-30));
        }
    }

    #[test]
    fn weighted_laplacian_is_self_adjoint() {
        let g = circle(64);
        let mut s = FieldSampler::new(&g, 17);
        for _ in 0..10 {
            let rho = sine_density(&g);
            let u = s.scalar(1.0);
            let v = s.scalar(1.0);
            let pu = p_operator(rho.field(), &u).unwrap();
            let pv = p_operator(rho.field(), &v).unwrap();
            let lhs = integrate(&(&u * pv.field()));
            let rhs = integrate(&(&v * pu.field()));
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-10);
        }
    }

    #[test]
    fn solve_phase_zero_data_returns_zero() {
        let g = circle(32);
        let rho = sine_density(&g);
        let h = zero_mean_project(&ScalarField::constant(&g, 0.0));
        let phi = solve_phase(&rho, &h, None).unwrap();
        assert!(phi.field().sup_norm() < 1e-14);
    }

    #[test]
    fn solve_phase_uniform_density_recovers_eigenmodes() {
        // For ρ = 1/2π, div(ρ∇(cos kx)) = −(k²/2π)cos kx.
        let g = circle(64);
        let rho = Density::uniform(&g);
        for k in [1.0_f64, 3.0] {
            let h = zero_mean_project(&ScalarField::from_fn(&g, |x| {
                -(k * k / TAU) * (k * x[0]).cos()
            }));
            let phi = solve_phase(&rho, &h, None).unwrap();
            for (x, &v) in g.nodes().iter().zip(phi.field().values()) {
                assert_abs_diff_eq!(v, (k * x[0]).cos(), epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn solve_phase_round_trip_on_sine_density() {
        let g = circle(64);
        let rho = sine_density(&g);
        let phi_true = ScalarField::from_fn(&g, |x| x[0].cos());
        let h = p_operator(rho.field(), &phi_true).unwrap();
        let phi = solve_phase(&rho, &h, None).unwrap();
        let err = (phi.field() - &phi_true).sup_norm();
        assert!(err < 1e-9, "round-trip error {err:.3e} exceeds 1e-9");
    }

    #[test]
    fn solve_phase_round_trip_50_random_pairs() {
        let g = circle(64);
        let mut s = FieldSampler::new(&g, 1234);
        for trial in 0..50 {
            let rho = Density::from_values(&g, s.density_values(0.6)).unwrap();
            let phi_true = zero_mean_project(&s.scalar(1.0));
            let h = p_operator(rho.field(), phi_true.field()).unwrap();
            let phi = solve_phase(&rho, &h, None).unwrap();
            let err = (phi.field() - phi_true.field()).sup_norm();
            assert!(err < 1e-8, "trial {trial}: round-trip error {err:.3e}");
        }
    }

    #[test]
    fn solve_phase_handles_drift_term() {
        // With X given and h := div(ρ(∇φ_true + X)), the solve must
        // return φ_true.
        let g = circle(64);
        let mut s = FieldSampler::new(&g, 77);
        let rho = Density::from_values(&g, s.density_values(0.5)).unwrap();
        let phi_true = zero_mean_project(&s.scalar(0.8));
        let x = s.vector(0.7);
        let total = &gradient(phi_true.field()) + &x;
        let h = zero_mean_project(&divergence(&total.scale_by(rho.field())));
        let phi = solve_phase(&rho, &h, Some(&x)).unwrap();
        let err = (phi.field() - phi_true.field()).sup_norm();
        assert!(err < 1e-8, "drift round-trip error {err:.3e}");
    }

    #[test]
    fn solve_phase_works_on_conformal_circle() {
        let g0 = circle(64);
        let lam: Vec<f64> = g0.nodes().iter().map(|x| 0.2 * x[0].sin()).collect();
        let g = PeriodicGrid::conformal_circle(64, TAU, lam).unwrap();
        let mut s = FieldSampler::new(&g, 31);
        let rho = Density::from_values(&g, s.density_values(0.4)).unwrap();
        let phi_true = zero_mean_project(&s.scalar(1.0));
        let h = p_operator(rho.field(), phi_true.field()).unwrap();
        let phi = solve_phase(&rho, &h, None).unwrap();
        let err = (phi.field() - phi_true.field()).sup_norm();
        assert!(err < 1e-8, "conformal round-trip error {err:.3e}");
    }

    #[test]
    fn solve_phase_works_on_torus() {
        let g = PeriodicGrid::torus(32, 32, TAU, TAU).unwrap();
        let mut s = FieldSampler::new(&g, 55);
        let rho = Density::from_values(&g, s.density_values(0.5)).unwrap();
        let phi_true = zero_mean_project(&s.scalar(1.0));
        let h = p_operator(rho.field(), phi_true.field()).unwrap();
        let phi = solve_phase(&rho, &h, None).unwrap();
        let err = (phi.field() - phi_true.field()).sup_norm();
        assert!(err < 1e-8, "torus round-trip error {err:.3e}");
    }

    #[test]
    fn solve_phase_rejects_nonzero_mean_data() {
        let g = circle(32);
        let rho = Density::uniform(&g);
        // Bypass the TangentDensity constructor to exercise the solver's
        // own precondition check.
        let bad = TangentDensity::from_zero_mean_unchecked(ScalarField::constant(&g, 1.0));
        match solve_phase(&rho, &bad, None) {
            Err(Error::NonZeroMean { .. }) => {}
            other => panic!("expected NonZeroMean, got {other:?}"),
        }
    }

    #[test]
    fn iterative_solver_agrees_with_dense_oracle() {
        let g = circle(64);
        let mut s = FieldSampler::new(&g, 2024);
        for _ in 0..3 {
            let rho = Density::from_values(&g, s.density_values(0.6)).unwrap();
            let h = zero_mean_project(&s.scalar(1.0));
            let x = s.vector(0.5);
            let fast = solve_phase(&rho, &h, Some(&x)).unwrap();
            let dense = dense_solve_phase(&rho, &h, Some(&x)).unwrap();
            let err = (fast.field() - dense.field()).sup_norm();
            assert!(err < 1e-8, "PCG vs dense disagreement {err:.3e}");
        }
    }

    #[test]
    fn dense_oracle_agrees_on_conformal_grid() {
        let g0 = circle(32);
        let lam: Vec<f64> = g0.nodes().iter().map(|x| 0.25 * x[0].cos()).collect();
        let g = PeriodicGrid::conformal_circle(32, TAU, lam).unwrap();
        let mut s = FieldSampler::new(&g, 4096);
        let rho = Density::from_values(&g, s.density_values(0.5)).unwrap();
        let h = zero_mean_project(&s.scalar(1.0));
        let fast = solve_phase(&rho, &h, None).unwrap();
        let dense = dense_solve_phase(&rho, &h, None).unwrap();
        let err = (fast.field() - dense.field()).sup_norm();
        assert!(err < 1e-8, "conformal PCG vs dense disagreement {err:.3e}");
    }

    #[test]
    fn helmholtz_fixes_gradient_inputs() {
        // Z = ρ∇ψ lies entirely in the gradient summand.
        let g = circle(64);
        let mut s = FieldSampler::new(&g, 8);
        let rho = Density::from_values(&g, s.density_values(0.5)).unwrap();
        let psi = zero_mean_project(&s.scalar(1.0));
        let grad_psi = gradient(psi.field());
        let z = grad_psi.scale_by(rho.field());
        let proj = helmholtz_project(&rho, &z).unwrap();
        let err = (&proj - &grad_psi).sup_norm();
        assert!(err < 1e-8, "gradient input distorted by {err:.3e}");
    }

    #[test]
    fn helmholtz_annihilates_divergence_free_inputs() {
        // On the circle, a constant field is divergence-free.
        let g = circle(32);
        let rho = sine_density(&g);
        let z = VectorField::constant(&g, &[0.9]);
        let proj = helmholtz_project(&rho, &z).unwrap();
        assert!(proj.sup_norm() < 1e-10);
    }

    #[test]
    fn helmholtz_remainder_is_divergence_free() {
        let g = circle(64);
        let rho = sine_density(&g);
        let z = VectorField::from_fn(&g, |x| vec![(2.0 * x[0]).sin()]);
        let grad_phi = helmholtz_project(&rho, &z).unwrap();
        let remainder = &z - &grad_phi.scale_by(rho.field());
        assert!(divergence(&remainder).sup_norm() < 1e-8);
    }

    #[test]
    fn stokes_pairing_holds_for_random_data() {
        // ∫ g(∇φ, ℙ_ρ(ρX)) ρ dvol = ∫ g(∇φ, X) ρ dvol.
        let g = circle(64);
        let mut s = FieldSampler::new(&g, 99);
        for _ in 0..20 {
            let rho = Density::from_values(&g, s.density_values(0.5)).unwrap();
            let phi = zero_mean_project(&s.scalar(1.0));
            let x = s.vector(1.0);
            let grad_phi = gradient(phi.field());
            let projected = helmholtz_project(&rho, &x.scale_by(rho.field())).unwrap();
            let lhs = integrate(&grad_phi.inner(&projected).zip_with(rho.field(), |a, b| a * b));
            let rhs = integrate(&grad_phi.inner(&x).zip_with(rho.field(), |a, b| a * b));
            let scale = lhs.abs().max(rhs.abs()).max(1e-12);
            assert!(
                (lhs - rhs).abs() / scale < 1e-8,
                "Stokes pairing violated: {lhs:.12e} vs {rhs:.12e}"
            );
        }
    }
}
