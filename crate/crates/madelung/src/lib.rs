//! Quantum dynamics as geometry on the manifold of probability densities.
//!
//! This crate simulates and cross-validates the hydrodynamic (Madelung)
//! formulation of quantum mechanics on compact one- and two-dimensional
//! periodic domains, treating a quantum state as a point `(ρ, ∇φ)` of the
//! tangent bundle over the manifold 𝒟 of smooth positive probability
//! densities.
//!
//! The pieces fit together as follows:
//!
//! - [`grid`] — spectrally accurate calculus (gradient, divergence,
//!   Laplacian, integration, Lie bracket) on periodic grids: the flat
//!   circle, the flat 2-torus, and a 1-dimensional conformal metric
//!   `e^{2λ}dx²`.
//! - [`density`] — the density manifold 𝒟: positivity-floored normalized
//!   densities, zero-mean tangent functions, the weighted elliptic operator
//!   `P_f(u) = div(f∇u)`, its inversion on zero-mean functions by
//!   preconditioned conjugate gradients, and the ρ-weighted
//!   Helmholtz–Hodge projection.
//! - [`geometry`] — the metric, canonical one-form, and symplectic form on
//!   T𝒟, the almost-Hermitian (Dombrowski) triple, connector, symplectic
//!   gradients, Poisson brackets, torsion, and the Nijenhuis tensor.
//! - [`dynamics`] — the Madelung flow: Lagrangian, Hamiltonian, quantum
//!   potential, the coupled phase/continuity right-hand side with gauge
//!   tracking, and a classical RK4 integrator with conservation
//!   diagnostics.
//! - [`schrodinger`] — an independent split-step Fourier Schrödinger
//!   solver and the wave-function correspondence `ψ = √ρ·e^{−iφ/ħ}` used
//!   to cross-validate the flow.
//! - [`gaussian`] — the Gaussian family 𝒩(μ,1) viewed through its tangent
//!   bundle ≅ ℂ: Kähler functions, their quantization on sampled wave
//!   functions, the expectation identity, and the finite-dimensional wave
//!   function on positive probability vectors.
//! - [`bandlimited`] — seeded generators for band-limited random fields,
//!   shared by the test suites and the command-line property runners.
//!
//! All field operations are pure functions of immutable values and are safe
//! to call concurrently.

pub mod bandlimited;
pub mod density;
pub mod dynamics;
pub mod error;
pub mod gaussian;
pub mod geometry;
pub mod grid;
pub mod schrodinger;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
