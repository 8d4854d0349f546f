//! Seeded generators for smooth random test data.
//!
//! Property-style invariant checks throughout the crate need random smooth
//! fields whose derivatives are fully resolved by the grid. The generators
//! here build band-limited trigonometric polynomials from a seeded RNG
//! ([`rand_chacha::ChaCha8Rng`]), so every check is reproducible from its
//! seed and the spectral operators commit no truncation error on the
//! sampled data.
//!
//! Frequencies are drawn from `1..=max_mode` per axis; amplitudes are
//! uniform in `[-1, 1]` and then scaled as requested. Densities are built
//! by shifting a band-limited field above a positive floor and normalizing
//! to unit mass.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::grid::{gradient, integrate, PeriodicGrid, ScalarField, VectorField};

/// Default highest mode used by the generators; low enough that products
/// of two generated fields stay resolved on 16-point grids.
pub const DEFAULT_MAX_MODE: usize = 3;

/// One product term of a trigonometric polynomial: an amplitude times,
/// per factor, `(axis, mode number, cosine? else sine)`.
type Harmonic = (f64, Vec<(usize, f64, bool)>);

/// Reproducible generator of band-limited fields on a fixed grid.
pub struct FieldSampler {
    grid: Arc<PeriodicGrid>,
    rng: ChaCha8Rng,
    max_mode: usize,
}

impl FieldSampler {
    /// Generator seeded with `seed`, emitting modes up to [`DEFAULT_MAX_MODE`].
    pub fn new(grid: &Arc<PeriodicGrid>, seed: u64) -> Self {
        Self {
            grid: Arc::clone(grid),
            rng: ChaCha8Rng::seed_from_u64(seed),
            max_mode: DEFAULT_MAX_MODE,
        }
    }

    /// Override the highest emitted mode per axis.
    pub fn with_max_mode(mut self, max_mode: usize) -> Self {
        self.max_mode = max_mode.max(1);
        self
    }

    /// Random zero-mean trigonometric polynomial with sup norm ≈ `scale`.
    ///
    /// Each axis contributes `max_mode` cosine and sine harmonics with
    /// uniform random amplitudes; in two dimensions a product harmonic is
    /// added so the field genuinely couples the axes.
    pub fn scalar(&mut self, scale: f64) -> ScalarField {
        let grid = Arc::clone(&self.grid);
        let dim = grid.dim();
        let mut terms: Vec<Harmonic> = Vec::new();
        for axis in 0..dim {
            for m in 1..=self.max_mode {
                let (ac, as_) = (self.amp(), self.amp());
                terms.push((ac, vec![(axis, m as f64, true)]));
                terms.push((as_, vec![(axis, m as f64, false)]));
            }
        }
        if dim == 2 {
            for _ in 0..2 {
                let mx = self.rng.gen_range(1..=self.max_mode) as f64;
                let my = self.rng.gen_range(1..=self.max_mode) as f64;
                let a = self.amp();
                terms.push((a, vec![(0, mx, true), (1, my, false)]));
            }
        }
        let lengths = grid.lengths().to_vec();
        let f = ScalarField::from_fn(&grid, |x| {
            terms
                .iter()
                .map(|(a, factors)| {
                    a * factors
                        .iter()
                        .map(|&(axis, m, is_cos)| {
                            let theta =
                                m * std::f64::consts::TAU * x[axis] / lengths[axis];
                            if is_cos {
                                theta.cos()
                            } else {
                                theta.sin()
                            }
                        })
                        .product::<f64>()
                })
                .sum()
        });
        let peak = f.sup_norm().max(1e-12);
        f.scale(scale / peak)
    }

    /// Random band-limited gradient field `∇ψ` with `‖∇ψ‖_∞ ≈ scale`.
    pub fn gradient_field(&mut self, scale: f64) -> VectorField {
        let psi = self.scalar(1.0);
        let g = gradient(&psi);
        let peak = g.sup_norm().max(1e-12);
        g.scale(scale / peak)
    }

    /// Random band-limited vector field (not necessarily a gradient),
    /// with sup norm ≈ `scale`.
    pub fn vector(&mut self, scale: f64) -> VectorField {
        let comps: Vec<ScalarField> = (0..self.grid.dim()).map(|_| self.scalar(1.0)).collect();
        let v = VectorField::new(
            Arc::clone(&self.grid),
            comps.into_iter().map(|c| c.values().to_vec()).collect(),
        )
        .expect("components sampled on the same grid");
        let peak = v.sup_norm().max(1e-12);
        v.scale(scale / peak)
    }

    /// Random smooth probability density: a band-limited perturbation of
    /// the uniform density, bounded below by `floor · uniform` and
    /// normalized to unit mass.
    ///
    /// `contrast` in `(0, 1)` controls how far the density departs from
    /// uniform; `floor` must satisfy `0 < floor ≤ 1 − contrast`.
    pub fn density_values(&mut self, contrast: f64) -> Vec<f64> {
        assert!((0.0..1.0).contains(&contrast), "contrast must lie in [0, 1)");
        let bump = self.scalar(contrast);
        let uniform = 1.0 / self.grid.volume();
        let raw = bump.map(|b| uniform * (1.0 + b));
        let mass = integrate(&raw);
        raw.scale(1.0 / mass).into_values()
    }

    fn amp(&mut self) -> f64 {
        self.rng.gen_range(-1.0..=1.0)
    }
}
