//! Symplectic and almost-Hermitian geometry on the tangent bundle of the
//! density manifold.
//!
//! Points of T𝒟 are pairs (ρ, ∇φ) ([`TangentPoint`]); tangent vectors to
//! T𝒟 at such a point are pairs of gradient fields (∇ψ₁, ∇ψ₂)
//! ([`DoubleTangent`]), the global trivialization
//! T(T𝒟) ≅ 𝒟 × ∇C^∞ × ∇C^∞ × ∇C^∞. The horizontal label ∇ψ₁ encodes the
//! density velocity h = div(ρ∇ψ₁); the vertical label ∇ψ₂ is the velocity
//! of the phase gradient itself.
//!
//! On this bundle the module provides
//!
//! - the weighted metric g^𝒟 ([`tangent_metric`]) and its Sasaki-type lift
//!   g^{T𝒟}, the canonical one-form Θ_L ([`liouville_form`]), and the symplectic
//!   form Ω_L ([`symplectic_form`]);
//! - the almost-complex structure J(∇ψ₁, ∇ψ₂) = (−∇ψ₂, ∇ψ₁) and the
//!   compatible triple (g^{T𝒟}, ω^{T𝒟} = Ω_L, J) ([`almost_hermitian`]);
//! - fiberwise observables F(x, u) = a(x) + g(B, u) + (c/2)|u|²
//!   ([`Observable`]), their integrated lifts F̂ ([`observable_lift`]),
//!   Hamiltonian vector fields of F on the base tangent bundle
//!   ([`canonical_hvf`]) and of F̂ on T𝒟 ([`symplectic_gradient_lift`]),
//!   the flow generator of the total energy
//!   ([`energy_symplectic_gradient`]), and Poisson brackets
//!   ([`poisson_bracket_lifted`], [`canonical_bracket`]);
//! - curvature-style diagnostics: the dual-connection torsion
//!   ([`torsion`]), the Nijenhuis tensor of J ([`nijenhuis`]), and
//!   finite-difference probes for the closedness of Ω_L
//!   ([`closedness_defect`]), the defining relation of symplectic
//!   gradients ([`lift_directional_derivative`] with [`displace`]), and
//!   the flatness of the trivialized connection ([`curvature_defect`]).
//!
//! Sign conventions, fixed once here and relied on throughout: the
//! symplectic form pairs horizontal-of-first with vertical-of-second
//! positively, Ω_L(A, B) = ∫g(∇ψ₁,∇α₂)ρ − ∫g(∇α₁,∇ψ₂)ρ; the canonical
//! bracket on the base is {F,G} = g(π_*X_F, K X_G) − g(π_*X_G, K X_F)
//! with connector values K X_F = −(∇a + (DB)ᵀu); with these orientations
//! the lifted and base brackets satisfy {F̂,Ĝ} = −({F,G})^ with no
//! residual sign freedom.

use std::sync::Arc;

use crate::density::{helmholtz_project, solve_phase, zero_mean_project, Density, PhasePotential};
use crate::dynamics::quantum_potential;
use crate::grid::{divergence, gradient, integrate, lie_bracket, ScalarField, VectorField};
use crate::{Error, Result};

/// Tolerance of the gradient-field membership check, relative to
/// 1 + ‖X‖∞: a field is accepted when its divergence-free remainder
/// X − ρ_u·ℙ_{ρ_u}(X) (uniform weight ρ_u) is below this.
pub const GRADIENT_TOL: f64 = 1e-8;

/// Verify that `x` is a metric gradient: project with uniform weight and
/// require the divergence-free remainder to vanish.
fn check_gradient(x: &VectorField) -> Result<()> {
    let uniform = Density::uniform(x.grid());
    let proj = helmholtz_project(&uniform, x)?;
    let remainder = x - &proj.scale_by(uniform.field());
    let deviation = remainder.sup_norm();
    let limit = GRADIENT_TOL * (1.0 + x.sup_norm());
    if deviation > limit {
        return Err(Error::NotGradientField { deviation, limit });
    }
    Ok(())
}

/// A point of T𝒟: a density together with the gradient field of its
/// phase potential.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentPoint {
    rho: Density,
    grad_phi: VectorField,
}

impl TangentPoint {
    /// Pair a density with a phase gradient, verifying that the field is
    /// a genuine metric gradient.
    ///
    /// # Errors
    /// [`Error::NotGradientField`] if the field has a divergence-free
    /// component beyond [`GRADIENT_TOL`]; solver errors from the check.
    pub fn new(rho: Density, grad_phi: VectorField) -> Result<Self> {
        assert!(
            rho.grid() == grad_phi.grid() || Arc::ptr_eq(rho.grid(), grad_phi.grid()),
            "density and phase gradient live on different grids"
        );
        check_gradient(&grad_phi)?;
        Ok(Self { rho, grad_phi })
    }

    /// Pair a density with a field already known to be a gradient
    /// (constructed by [`gradient`] or an elliptic solve).
    pub(crate) fn new_unchecked(rho: Density, grad_phi: VectorField) -> Self {
        Self { rho, grad_phi }
    }

    /// The rest point (ρ uniform, ∇φ = 0).
    pub fn rest(grid: &Arc<crate::grid::PeriodicGrid>) -> Self {
        Self {
            rho: Density::uniform(grid),
            grad_phi: VectorField::zero(grid),
        }
    }

    pub fn rho(&self) -> &Density {
        &self.rho
    }

    pub fn grad_phi(&self) -> &VectorField {
        &self.grad_phi
    }

    pub fn grid(&self) -> &Arc<crate::grid::PeriodicGrid> {
        self.rho.grid()
    }
}

/// A tangent vector to T𝒟 at a [`TangentPoint`]: a horizontal label ∇ψ₁
/// (density direction, via h = div(ρ∇ψ₁)) and a vertical label ∇ψ₂
/// (phase-gradient direction).
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleTangent {
    base: TangentPoint,
    horizontal: VectorField,
    vertical: VectorField,
}

impl DoubleTangent {
    /// Build a tangent vector, verifying both labels are gradients.
    ///
    /// # Errors
    /// As for [`TangentPoint::new`].
    pub fn new(base: TangentPoint, horizontal: VectorField, vertical: VectorField) -> Result<Self> {
        check_gradient(&horizontal)?;
        check_gradient(&vertical)?;
        Ok(Self {
            base,
            horizontal,
            vertical,
        })
    }

    pub(crate) fn new_unchecked(
        base: TangentPoint,
        horizontal: VectorField,
        vertical: VectorField,
    ) -> Self {
        Self {
            base,
            horizontal,
            vertical,
        }
    }

    pub fn base(&self) -> &TangentPoint {
        &self.base
    }

    pub fn horizontal(&self) -> &VectorField {
        &self.horizontal
    }

    pub fn vertical(&self) -> &VectorField {
        &self.vertical
    }

    /// Largest label magnitude, for scale-relative comparisons.
    pub fn sup_norm(&self) -> f64 {
        self.horizontal.sup_norm().max(self.vertical.sup_norm())
    }

    fn check_same_base(&self, other: &Self) -> Result<()> {
        if self.base != other.base {
            return Err(Error::BaseMismatch);
        }
        Ok(())
    }
}

/// A fiberwise observable F(x, u) = a(x) + g_x(B(x), u) + (c/2)·g_x(u, u)
/// on the tangent bundle of the base manifold: the closure of position,
/// momentum, and kinetic observables.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    position_part: ScalarField,
    linear_part: VectorField,
    kinetic_coeff: f64,
}

impl Observable {
    /// Combine the three parts; panics if they sit on different grids.
    pub fn new(position_part: ScalarField, linear_part: VectorField, kinetic_coeff: f64) -> Self {
        assert!(
            position_part.grid() == linear_part.grid()
                || Arc::ptr_eq(position_part.grid(), linear_part.grid()),
            "observable parts live on different grids"
        );
        Self {
            position_part,
            linear_part,
            kinetic_coeff,
        }
    }

    /// Pure position observable F = a(x).
    pub fn position(a: ScalarField) -> Self {
        let grid = Arc::clone(a.grid());
        Self::new(a, VectorField::zero(&grid), 0.0)
    }

    /// Pure momentum observable F = g(B, u).
    pub fn momentum(b: VectorField) -> Self {
        let grid = Arc::clone(b.grid());
        Self::new(ScalarField::constant(&grid, 0.0), b, 0.0)
    }

    /// Pure kinetic observable F = (c/2)|u|².
    pub fn kinetic(grid: &Arc<crate::grid::PeriodicGrid>, c: f64) -> Self {
        Self::new(ScalarField::constant(grid, 0.0), VectorField::zero(grid), c)
    }

    pub fn position_part(&self) -> &ScalarField {
        &self.position_part
    }

    pub fn linear_part(&self) -> &VectorField {
        &self.linear_part
    }

    pub fn kinetic_coeff(&self) -> f64 {
        self.kinetic_coeff
    }

    pub fn grid(&self) -> &Arc<crate::grid::PeriodicGrid> {
        self.position_part.grid()
    }

    /// Evaluate F pointwise along a velocity field:
    /// a + g(B, u) + (c/2)|u|².
    pub fn eval_along(&self, u: &VectorField) -> ScalarField {
        let linear = self.linear_part.inner(u);
        let quad = u.norm_squared();
        let c = self.kinetic_coeff;
        self.position_part
            .zip_with(&linear, |a, l| a + l)
            .zip_with(&quad, move |s, q| s + 0.5 * c * q)
    }
}

/// The connector of the trivialized connection on T𝒟: it forgets the
/// horizontal label and reads the vertical one,
/// K(ρ, ∇φ, ∇ψ₁, ∇ψ₂) = (ρ, ∇ψ₂). Composed with a vertical lift it is
/// the identity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConnectorMap;

impl ConnectorMap {
    /// Apply the connector to a tangent vector of T𝒟.
    pub fn apply(&self, a: &DoubleTangent) -> TangentPoint {
        TangentPoint::new_unchecked(a.base.rho.clone(), a.vertical.clone())
    }
}

/// The metric on 𝒟 carried to gradient labels:
/// g^𝒟(∇ψ, ∇α) = ∫ g(∇ψ, ∇α) ρ dvol. Symmetric, positive definite on
/// gradient fields.
pub fn tangent_metric(p: &TangentPoint, gp1: &VectorField, gp2: &VectorField) -> f64 {
    integrate(&gp1.inner(gp2).zip_with(p.rho.field(), |a, b| a * b))
}

/// The canonical one-form on T𝒟:
/// Θ_L(A) = g^𝒟(∇φ, ∇ψ₁) at A's base point (ρ, ∇φ).
pub fn liouville_form(a: &DoubleTangent) -> f64 {
    tangent_metric(&a.base, &a.base.grad_phi, &a.horizontal)
}

/// The symplectic form Ω_L = −dΘ_L in the trivialization:
/// Ω_L(A, B) = ∫g(∇ψ₁, ∇α₂)ρ − ∫g(∇α₁, ∇ψ₂)ρ.
///
/// # Errors
/// [`Error::BaseMismatch`] if the arguments live at different points.
pub fn symplectic_form(a: &DoubleTangent, b: &DoubleTangent) -> Result<f64> {
    a.check_same_base(b)?;
    Ok(tangent_metric(&a.base, &a.horizontal, &b.vertical)
        - tangent_metric(&a.base, &b.horizontal, &a.vertical))
}

/// The Dombrowski almost-Hermitian triple at a point: the Sasaki-type
/// metric g^{T𝒟}(A, B) = ∫g(∇ψ₁,∇α₁)ρ + ∫g(∇ψ₂,∇α₂)ρ, the rotation
/// J(∇ψ₁, ∇ψ₂) = (−∇ψ₂, ∇ψ₁), and the induced two-form
/// ω^{T𝒟}(A, B) = g^{T𝒟}(JA, B), which coincides with [`symplectic_form`].
///
/// Returns `(g_val, omega_val, j_a)`.
///
/// # Errors
/// [`Error::BaseMismatch`] if the arguments live at different points.
pub fn almost_hermitian(
    a: &DoubleTangent,
    b: &DoubleTangent,
) -> Result<(f64, f64, DoubleTangent)> {
    a.check_same_base(b)?;
    let g_val = tangent_metric(&a.base, &a.horizontal, &b.horizontal)
        + tangent_metric(&a.base, &a.vertical, &b.vertical);
    let j_a = DoubleTangent::new_unchecked(
        a.base.clone(),
        a.vertical.scale(-1.0),
        a.horizontal.clone(),
    );
    let omega_val = tangent_metric(&a.base, &j_a.horizontal, &b.horizontal)
        + tangent_metric(&a.base, &j_a.vertical, &b.vertical);
    Ok((g_val, omega_val, j_a))
}

/// The integrated lift of an observable:
/// F̂(ρ, ∇φ) = ∫ F(x, ∇φ) ρ dvol.
pub fn observable_lift(f: &Observable, p: &TangentPoint) -> f64 {
    integrate(&f.eval_along(&p.grad_phi).zip_with(p.rho.field(), |a, b| a * b))
}

fn require_flat(grid: &crate::grid::PeriodicGrid) -> Result<()> {
    if grid.is_flat() {
        Ok(())
    } else {
        Err(Error::UnsupportedMetric)
    }
}

/// Transpose-Jacobian contraction ((DB)ᵀu)_i = Σ_j (∂_i B_j) u_j on a
/// flat grid.
fn jacobian_transpose_apply(b: &VectorField, u: &VectorField) -> VectorField {
    let grid = b.grid();
    let dim = grid.dim();
    let n = grid.node_count();
    let mut components = vec![vec![0.0; n]; dim];
    for j in 0..dim {
        let uj = u.component(j);
        for (i, comp) in components.iter_mut().enumerate() {
            let dibj = grid.chart_partial(i, b.component(j));
            for p in 0..n {
                comp[p] += dibj[p] * uj[p];
            }
        }
    }
    VectorField::new(Arc::clone(grid), components).expect("derivatives of finite fields are finite")
}

/// The Hamiltonian vector field of an observable for the canonical
/// symplectic structure on the base tangent bundle, split by the
/// connector into (π_*X_F, K X_F) and evaluated along the velocity
/// field `u`:
///
/// ```text
///     π_*X_F = B + c·u          (fiber derivative of F)
///     K X_F  = −(∇a + (DB)ᵀu)   (u held frozen)
/// ```
///
/// # Errors
/// [`Error::UnsupportedMetric`] on conformal grids (the connector form
/// would need Christoffel symbols).
pub fn canonical_hvf(f: &Observable, u: &VectorField) -> Result<(VectorField, VectorField)> {
    require_flat(u.grid())?;
    let horizontal = f.linear_part.linear_comb(1.0, u, f.kinetic_coeff);
    let grad_a = gradient(&f.position_part);
    let vertical = grad_a
        .linear_comb(1.0, &jacobian_transpose_apply(&f.linear_part, u), 1.0)
        .scale(-1.0);
    Ok((horizontal, vertical))
}

/// The canonical Poisson bracket of two observables on the base tangent
/// bundle, evaluated along `u`:
/// {F,G}(x, u) = g(π_*X_F, K X_G) − g(π_*X_G, K X_F).
///
/// # Errors
/// [`Error::UnsupportedMetric`] on conformal grids.
pub fn canonical_bracket(f: &Observable, g: &Observable, u: &VectorField) -> Result<ScalarField> {
    let (vf, wf) = canonical_hvf(f, u)?;
    let (vg, wg) = canonical_hvf(g, u)?;
    Ok(vf.inner(&wg).zip_with(&vg.inner(&wf), |a, b| a - b))
}

/// The symplectic gradient of the total energy
/// 𝓗 = ∫(½|∇φ|² + V)ρ dvol + (ħ²/2)∫|∇√ρ|² dvol at a point:
/// horizontal label ∇φ, vertical label
/// ∇(½|∇φ|² + V + Q(ρ, ħ)) with Q the quantum potential. These are the
/// right-hand sides of the quantum hydrodynamic flow.
pub fn energy_symplectic_gradient(p: &TangentPoint, v: &ScalarField, hbar: f64) -> DoubleTangent {
    let speed_sq = p.grad_phi.norm_squared();
    let q = quantum_potential(&p.rho, hbar);
    let total = speed_sq
        .zip_with(v, |s, vv| 0.5 * s + vv)
        .zip_with(&q, |s, qq| s + qq);
    let vertical = gradient(zero_mean_project(&total).field());
    DoubleTangent::new_unchecked(p.clone(), p.grad_phi.clone(), vertical)
}

/// The symplectic gradient of a lifted observable F̂ on T𝒟:
/// horizontal label ℙ_ρ(ρ(B + c∇φ)), vertical label ∇(F(·, ∇φ)).
///
/// # Errors
/// [`Error::UnsupportedMetric`] on conformal grids; solver errors from
/// the projection.
pub fn symplectic_gradient_lift(f: &Observable, p: &TangentPoint) -> Result<DoubleTangent> {
    require_flat(p.grid())?;
    let fiber = f.linear_part.linear_comb(1.0, &p.grad_phi, f.kinetic_coeff);
    let horizontal = helmholtz_project(&p.rho, &fiber.scale_by(p.rho.field()))?;
    let vertical = gradient(&f.eval_along(&p.grad_phi));
    Ok(DoubleTangent::new_unchecked(p.clone(), horizontal, vertical))
}

/// The Poisson bracket of lifted observables,
/// {F̂, Ĝ} = Ω_L(X_F̂, X_Ĝ). With the conventions of this module it
/// satisfies {F̂, Ĝ} = −({F,G})^ against [`canonical_bracket`].
///
/// # Errors
/// [`Error::UnsupportedMetric`] on conformal grids; solver errors.
pub fn poisson_bracket_lifted(f: &Observable, g: &Observable, p: &TangentPoint) -> Result<f64> {
    let xf = symplectic_gradient_lift(f, p)?;
    let xg = symplectic_gradient_lift(g, p)?;
    symplectic_form(&xf, &xg)
}

/// Torsion of the dual connection, evaluated on gradient labels:
/// T(∇ψ, ∇α) = ℙ_ρ(ρ·[∇ψ, ∇α]). Generically nonzero — the dual
/// connection is not symmetric.
pub fn torsion(rho: &Density, gp: &VectorField, gq: &VectorField) -> Result<VectorField> {
    let bracket = lie_bracket(gp, gq);
    helmholtz_project(rho, &bracket.scale_by(rho.field()))
}

/// The Nijenhuis tensor of the almost-complex structure J, up to its
/// conventional scale factor, evaluated on two tangent vectors with
/// labels A = (∇ψ₁, ∇ψ₂), B = (∇α₁, ∇α₂):
///
/// ```text
///     horizontal = ℙ_ρ(ρ[∇α₁,∇ψ₁] − ρ[∇α₂,∇ψ₂])
///     vertical   = ℙ_ρ(ρ[∇ψ₂,∇α₁] + ρ[∇ψ₁,∇α₂])
/// ```
///
/// A nonzero value witnesses that J is not integrable: T𝒟 is almost
/// Hermitian but not Hermitian.
///
/// # Errors
/// [`Error::BaseMismatch`] if the arguments live at different points;
/// solver errors from the projections.
pub fn nijenhuis(a: &DoubleTangent, b: &DoubleTangent) -> Result<DoubleTangent> {
    a.check_same_base(b)?;
    let rho = &a.base.rho;
    let horiz_flux = lie_bracket(&b.horizontal, &a.horizontal)
        .linear_comb(1.0, &lie_bracket(&b.vertical, &a.vertical), -1.0)
        .scale_by(rho.field());
    let vert_flux = lie_bracket(&a.vertical, &b.horizontal)
        .linear_comb(1.0, &lie_bracket(&a.horizontal, &b.vertical), 1.0)
        .scale_by(rho.field());
    let horizontal = helmholtz_project(rho, &horiz_flux)?;
    let vertical = helmholtz_project(rho, &vert_flux)?;
    Ok(DoubleTangent::new_unchecked(
        a.base.clone(),
        horizontal,
        vertical,
    ))
}

// ---------------------------------------------------------------------
// Finite-difference verification probes
// ---------------------------------------------------------------------

/// Transport a point of T𝒟 a parameter distance `eps` along the straight
/// line generated by a tangent vector: ρ ↦ ρ + ε·div(ρ∇ψ₁),
/// ∇φ ↦ ∇φ + ε∇ψ₂. Central differences through this curve have no
/// curve-curvature contamination.
///
/// # Errors
/// [`Error::DensityFloor`] if the displaced density crosses the floor.
pub fn displace(p: &TangentPoint, dir: &DoubleTangent, eps: f64) -> Result<TangentPoint> {
    let h = divergence(&dir.horizontal.scale_by(p.rho.field()));
    let rho = Density::new(p.rho.field().zip_with(&h, |r, hh| r + eps * hh))?;
    let grad_phi = p.grad_phi.linear_comb(1.0, &dir.vertical, eps);
    Ok(TangentPoint::new_unchecked(rho, grad_phi))
}

/// Central-difference directional derivative of a lifted observable F̂
/// along a tangent vector: [F̂(p₊) − F̂(p₋)] / 2ε through [`displace`].
/// The defining relation of the symplectic gradient states this equals
/// Ω_L(X_F̂, dir).
pub fn lift_directional_derivative(
    f: &Observable,
    p: &TangentPoint,
    dir: &DoubleTangent,
    step: f64,
) -> Result<f64> {
    let plus = observable_lift(f, &displace(p, dir, step)?);
    let minus = observable_lift(f, &displace(p, dir, -step)?);
    Ok((plus - minus) / (2.0 * step))
}

/// Finite-difference closedness probe of the symplectic form. For
/// constant-label extensions X, Y of two tangent vectors, computes the
/// exterior-derivative combination
///
/// ```text
///     dΘ_L(X, Y) = X(Θ_L(Y)) − Y(Θ_L(X)) − Θ_L([X, Y])
/// ```
///
/// by central differences along [`displace`] curves (the bracket term
/// analytically: [X,Y] has density component
/// div(div(ρ∇ψ₁)∇α₁) − div(div(ρ∇α₁)∇ψ₁) and zero vertical component),
/// and returns the defect |dΘ_L(X, Y) + Ω_L(X, Y)|, which vanishes for a
/// closed form with Ω_L = −dΘ_L.
///
/// # Errors
/// [`Error::BaseMismatch`] if the arguments live at different points;
/// displacement and solver errors.
pub fn closedness_defect(x: &DoubleTangent, y: &DoubleTangent, step: f64) -> Result<f64> {
    x.check_same_base(y)?;
    let p = &x.base;
    let rho = &p.rho;

    let theta_of = |labels: &DoubleTangent, at: &TangentPoint| -> f64 {
        liouville_form(&DoubleTangent::new_unchecked(
            at.clone(),
            labels.horizontal.clone(),
            labels.vertical.clone(),
        ))
    };
    let x_theta_y =
        (theta_of(y, &displace(p, x, step)?) - theta_of(y, &displace(p, x, -step)?)) / (2.0 * step);
    let y_theta_x =
        (theta_of(x, &displace(p, y, step)?) - theta_of(x, &displace(p, y, -step)?)) / (2.0 * step);

    // Bracket of the constant-label extensions: only the density slot
    // survives, as the flux divergence div(h_X·∇α₁ − h_Y·∇ψ₁); its
    // horizontal label is the ρ-weighted projection of that flux.
    let h_x = divergence(&x.horizontal.scale_by(rho.field()));
    let h_y = divergence(&y.horizontal.scale_by(rho.field()));
    let flux = y
        .horizontal
        .scale_by(&h_x)
        .linear_comb(1.0, &x.horizontal.scale_by(&h_y), -1.0);
    let bracket_label = helmholtz_project(rho, &flux)?;
    let theta_bracket = tangent_metric(p, &p.grad_phi, &bracket_label);

    let d_theta = x_theta_y - y_theta_x - theta_bracket;
    Ok((d_theta + symplectic_form(x, y)?).abs())
}

/// Finite-difference flatness probe of the trivialized connection.
/// Differentiates the nonlinear test section S(ρ) = ∇(ρ²) twice along
/// the flows generated by potentials ξ_X, ξ_Y (density direction
/// div(ρ∇ξ)), subtracts the reversed order and the derivative along the
/// analytic bracket direction, and returns the sup norm of
///
/// ```text
///     R(X, Y)S = ∇_X ∇_Y S − ∇_Y ∇_X S − ∇_{[X,Y]} S,
/// ```
///
/// which vanishes identically for the globally trivialized (flat)
/// connection.
pub fn curvature_defect(rho: &Density, xi_x: &ScalarField, xi_y: &ScalarField, step: f64) -> f64 {
    let section = |r: &ScalarField| gradient(&r.zip_with(r, |a, b| a * b));
    let flow_dir =
        |r: &ScalarField, xi: &ScalarField| divergence(&gradient(xi).scale_by(r));
    // ∇_Y S at an arbitrary density, by central differences; the flow
    // direction is re-evaluated at each base density, which is what
    // makes the second derivative see the variation of Y itself.
    let cov = |r: &ScalarField, xi: &ScalarField| -> VectorField {
        let h = flow_dir(r, xi);
        let plus = section(&r.zip_with(&h, |a, b| a + step * b));
        let minus = section(&r.zip_with(&h, |a, b| a - step * b));
        plus.linear_comb(1.0 / (2.0 * step), &minus, -1.0 / (2.0 * step))
    };
    let second = |xi_outer: &ScalarField, xi_inner: &ScalarField| -> VectorField {
        let h = flow_dir(rho.field(), xi_outer);
        let plus = cov(&rho.field().zip_with(&h, |a, b| a + step * b), xi_inner);
        let minus = cov(&rho.field().zip_with(&h, |a, b| a - step * b), xi_inner);
        plus.linear_comb(1.0 / (2.0 * step), &minus, -1.0 / (2.0 * step))
    };

    let xy = second(xi_x, xi_y);
    let yx = second(xi_y, xi_x);
    let h_x = flow_dir(rho.field(), xi_x);
    let h_y = flow_dir(rho.field(), xi_y);
    let bracket_dir = divergence(&gradient(xi_y).scale_by(&h_x))
        .zip_with(&divergence(&gradient(xi_x).scale_by(&h_y)), |a, b| a - b);
    let along_bracket = {
        let plus = section(&rho.field().zip_with(&bracket_dir, |a, b| a + step * b));
        let minus = section(&rho.field().zip_with(&bracket_dir, |a, b| a - step * b));
        plus.linear_comb(1.0 / (2.0 * step), &minus, -1.0 / (2.0 * step))
    };

    xy.linear_comb(1.0, &yx, -1.0)
        .linear_comb(1.0, &along_bracket, -1.0)
        .sup_norm()
}

/// Recover the zero-mean potential of a gradient field by a
/// uniform-weight elliptic solve: φ with div(ρ_u∇φ) = div(ρ_u·X).
pub fn potential_of(x: &VectorField) -> Result<PhasePotential> {
    let uniform = Density::uniform(x.grid());
    let h = zero_mean_project(&divergence(&x.scale_by(uniform.field())));
    solve_phase(&uniform, &h, None)
}
