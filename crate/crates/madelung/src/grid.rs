//! Spectral calculus on periodic grids.
//!
//! A [`PeriodicGrid`] discretizes a compact oriented Riemannian manifold as
//! a uniform periodic grid in one dimension (a circle) or two (a flat
//! torus). In one dimension the metric may carry a conformal factor
//! `e^{2λ}dx²`, in which case the volume element is `e^{λ}dx`; otherwise
//! the metric is flat and the volume element is the product of the grid
//! spacings.
//!
//! Differentiation is pseudospectral: a partial derivative is computed by
//! forward FFT, multiplication by `ik`, and inverse FFT. For even grid
//! sizes the Nyquist mode has no well-defined odd derivative and its
//! multiplier is set to zero, the standard choice that keeps derivatives of
//! real fields real. Smooth fields therefore differentiate with spectral
//! (geometrically convergent) accuracy.
//!
//! Quadrature is the uniform node-weight rule times the local volume
//! element — exact for band-limited integrands on flat grids, and the
//! periodic trapezoidal rule in general.
//!
//! The exposed operators are
//!
//! - [`gradient`]: metric gradient, `e^{−2λ}f′` in the conformal case;
//! - [`divergence`]: divergence with respect to the Riemannian volume,
//!   defined by `ℒ_X(dvol) = div(X)·dvol`, i.e. `e^{−λ}(e^{λ}u)′` in the
//!   conformal case;
//! - [`laplacian`]: the composition `divergence ∘ gradient`, so that the
//!   discrete integration-by-parts identities hold exactly;
//! - [`integrate`]: quadrature against `dvol`;
//! - [`lie_bracket`]: the coordinate Lie bracket `[X,Y] = X(Y) − Y(X)`,
//!   which is metric-independent and uses chart partials only.
//!
//! All values are immutable after construction and safe to share across
//! threads; every operation is a pure function of its inputs.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::{Error, Result};

/// Smallest admissible number of points per axis. Below this, spectral
/// differentiation has too few modes to represent the test fields used
/// throughout the crate.
pub const MIN_POINTS_PER_AXIS: usize = 16;

/// Forward and inverse FFT plans for one axis length.
struct AxisPlans {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

/// A uniform periodic grid over a circle, a flat 2-torus, or a circle with
/// a conformal metric `e^{2λ}dx²`.
///
/// Nodes along axis `a` sit at `x_j = j·L_a/n_a` for `j = 0..n_a`; in two
/// dimensions the node `(i, j)` is stored at flat index `i·n_1 + j`.
pub struct PeriodicGrid {
    dims: Vec<usize>,
    lengths: Vec<f64>,
    /// Conformal exponent λ sampled at the nodes (one dimension only).
    conformal: Option<Vec<f64>>,
    /// Quadrature weight of each node (local volume element).
    weights: Vec<f64>,
    /// Total volume ∫ dvol.
    volume: f64,
    /// Signed angular wavenumbers per axis, `2π·j/L` with the upper half
    /// shifted to negative frequencies; the Nyquist entry is positive.
    wavenumbers: Vec<Vec<f64>>,
    /// Derivative multipliers per axis: the wavenumbers with the Nyquist
    /// entry replaced by zero.
    deriv_wavenumbers: Vec<Vec<f64>>,
    plans: Vec<AxisPlans>,
}

impl fmt::Debug for PeriodicGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicGrid")
            .field("dims", &self.dims)
            .field("lengths", &self.lengths)
            .field("conformal", &self.conformal.is_some())
            .finish()
    }
}

impl PartialEq for PeriodicGrid {
    fn eq(&self, other: &Self) -> bool {
        self.dims == other.dims
            && self.lengths == other.lengths
            && self.conformal == other.conformal
    }
}

impl PeriodicGrid {
    fn build(dims: Vec<usize>, lengths: Vec<f64>, conformal: Option<Vec<f64>>) -> Result<Arc<Self>> {
        if dims.is_empty() || dims.len() > 2 {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1 or 2, got {}",
                dims.len()
            )));
        }
        for (&n, &l) in dims.iter().zip(&lengths) {
            if n < MIN_POINTS_PER_AXIS || n % 2 != 0 {
                return Err(Error::InvalidGrid(format!(
                    "points per axis must be even and at least {MIN_POINTS_PER_AXIS}, got {n}"
                )));
            }
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidGrid(format!("axis length must be positive, got {l}")));
            }
        }
        let node_count: usize = dims.iter().product();
        if let Some(lambda) = &conformal {
            if dims.len() != 1 {
                return Err(Error::InvalidGrid(
                    "a conformal factor is supported in one dimension only".into(),
                ));
            }
            if lambda.len() != node_count {
                return Err(Error::InvalidGrid(format!(
                    "conformal factor has {} samples but the grid has {node_count} nodes",
                    lambda.len()
                )));
            }
            if let Some(i) = lambda.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { index: i });
            }
        }

        let cell: f64 = dims
            .iter()
            .zip(&lengths)
            .map(|(&n, &l)| l / n as f64)
            .product();
        let weights: Vec<f64> = match &conformal {
            None => vec![cell; node_count],
            Some(lambda) => lambda.iter().map(|&l| cell * l.exp()).collect(),
        };
        let volume: f64 = weights.iter().sum();
        if !(volume.is_finite() && volume > 0.0) {
            return Err(Error::InvalidGrid(format!("total volume must be positive, got {volume}")));
        }

        let mut planner = FftPlanner::new();
        let mut wavenumbers = Vec::new();
        let mut deriv_wavenumbers = Vec::new();
        let mut plans = Vec::new();
        for (&n, &l) in dims.iter().zip(&lengths) {
            let dk = std::f64::consts::TAU / l;
            let mut k = vec![0.0; n];
            for (j, kj) in k.iter_mut().enumerate() {
                let signed = if j <= n / 2 { j as i64 } else { j as i64 - n as i64 };
                *kj = signed as f64 * dk;
            }
            let mut kd = k.clone();
            kd[n / 2] = 0.0;
            wavenumbers.push(k);
            deriv_wavenumbers.push(kd);
            plans.push(AxisPlans {
                fwd: planner.plan_fft_forward(n),
                inv: planner.plan_fft_inverse(n),
            });
        }

        Ok(Arc::new(Self {
            dims,
            lengths,
            conformal,
            weights,
            volume,
            wavenumbers,
            deriv_wavenumbers,
            plans,
        }))
    }

    /// Flat circle of circumference `length` with `n` nodes.
    pub fn circle(n: usize, length: f64) -> Result<Arc<Self>> {
        Self::build(vec![n], vec![length], None)
    }

    /// Flat 2-torus with `nx × ny` nodes over physical periods `lx × ly`.
    pub fn torus(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Arc<Self>> {
        Self::build(vec![nx, ny], vec![lx, ly], None)
    }

    /// Circle with conformal metric `e^{2λ}dx²`; `lambda` is sampled at
    /// the nodes. The volume element is `e^{λ}dx`.
    pub fn conformal_circle(n: usize, length: f64, lambda: Vec<f64>) -> Result<Arc<Self>> {
        Self::build(vec![n], vec![length], Some(lambda))
    }

    /// Number of axes (1 or 2).
    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    /// Points per axis.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Physical period per axis.
    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// Total number of nodes.
    pub fn node_count(&self) -> usize {
        self.weights.len()
    }

    /// Whether the metric is flat (no conformal factor).
    pub fn is_flat(&self) -> bool {
        self.conformal.is_none()
    }

    /// Conformal exponent samples, if present.
    pub fn conformal_exponent(&self) -> Option<&[f64]> {
        self.conformal.as_deref()
    }

    /// Total Riemannian volume ∫ dvol.
    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// Quadrature weight (local volume element) of each node.
    pub fn quadrature_weights(&self) -> &[f64] {
        &self.weights
    }

    /// Signed angular wavenumbers along one axis.
    pub fn wavenumbers(&self, axis: usize) -> &[f64] {
        &self.wavenumbers[axis]
    }

    /// Node coordinates along one axis.
    pub fn coords(&self, axis: usize) -> Vec<f64> {
        let n = self.dims[axis];
        let d = self.lengths[axis] / n as f64;
        (0..n).map(|j| j as f64 * d).collect()
    }

    /// Coordinates of every node, in storage order.
    pub fn nodes(&self) -> Vec<Vec<f64>> {
        match self.dims.len() {
            1 => self.coords(0).into_iter().map(|x| vec![x]).collect(),
            _ => {
                let xs = self.coords(0);
                let ys = self.coords(1);
                let mut out = Vec::with_capacity(self.node_count());
                for &x in &xs {
                    for &y in &ys {
                        out.push(vec![x, y]);
                    }
                }
                out
            }
        }
    }

    /// Apply a frequency-diagonal operator along one axis: forward FFT,
    /// multiply mode `j` by `mult[j]`, inverse FFT, take the real part.
    pub(crate) fn axis_filter(&self, axis: usize, values: &[f64], mult: &[Complex64]) -> Vec<f64> {
        let n = self.dims[axis];
        let plans = &self.plans[axis];
        let scale = 1.0 / n as f64;
        let mut out = vec![0.0; values.len()];
        let mut buf = vec![Complex64::new(0.0, 0.0); n];

        let run = |gather: &dyn Fn(usize) -> usize, buf: &mut Vec<Complex64>, out: &mut [f64]| {
            for (j, b) in buf.iter_mut().enumerate() {
                *b = Complex64::new(values[gather(j)], 0.0);
            }
            plans.fwd.process(buf);
            for (b, m) in buf.iter_mut().zip(mult) {
                *b *= m;
            }
            plans.inv.process(buf);
            for (j, b) in buf.iter().enumerate() {
                out[gather(j)] = b.re * scale;
            }
        };

        match self.dims.len() {
            1 => run(&|j| j, &mut buf, &mut out),
            _ => {
                let (n0, n1) = (self.dims[0], self.dims[1]);
                if axis == 1 {
                    for i0 in 0..n0 {
                        let base = i0 * n1;
                        run(&move |j| base + j, &mut buf, &mut out);
                    }
                } else {
                    for i1 in 0..n1 {
                        run(&move |j| j * n1 + i1, &mut buf, &mut out);
                    }
                }
            }
        }
        out
    }

    /// Apply a frequency-diagonal operator over the full spectrum: the
    /// multiplier is a function of |k|² of each mode (Nyquist included).
    /// Transforms in place, including the 1/N normalization.
    pub(crate) fn apply_isotropic_multiplier(
        &self,
        data: &mut [Complex64],
        mult: &dyn Fn(f64) -> Complex64,
    ) {
        match self.dims.len() {
            1 => {
                let n = self.dims[0];
                self.plans[0].fwd.process(data);
                for (c, &k) in data.iter_mut().zip(&self.wavenumbers[0]) {
                    *c *= mult(k * k);
                }
                self.plans[0].inv.process(data);
                let scale = 1.0 / n as f64;
                for c in data.iter_mut() {
                    *c *= scale;
                }
            }
            _ => {
                let (n0, n1) = (self.dims[0], self.dims[1]);
                for row in data.chunks_mut(n1) {
                    self.plans[1].fwd.process(row);
                }
                let mut col = vec![Complex64::new(0.0, 0.0); n0];
                for i1 in 0..n1 {
                    for i0 in 0..n0 {
                        col[i0] = data[i0 * n1 + i1];
                    }
                    self.plans[0].fwd.process(&mut col);
                    for i0 in 0..n0 {
                        data[i0 * n1 + i1] = col[i0];
                    }
                }
                for (i0, &k0) in self.wavenumbers[0].iter().enumerate() {
                    for (i1, &k1) in self.wavenumbers[1].iter().enumerate() {
                        data[i0 * n1 + i1] *= mult(k0 * k0 + k1 * k1);
                    }
                }
                for i1 in 0..n1 {
                    for i0 in 0..n0 {
                        col[i0] = data[i0 * n1 + i1];
                    }
                    self.plans[0].inv.process(&mut col);
                    for i0 in 0..n0 {
                        data[i0 * n1 + i1] = col[i0];
                    }
                }
                let scale = 1.0 / (n0 * n1) as f64;
                for row in data.chunks_mut(n1) {
                    self.plans[1].inv.process(row);
                    for c in row.iter_mut() {
                        *c *= scale;
                    }
                }
            }
        }
    }

    /// Solve −Δ_chart z = r for the zero-mean part of `r` spectrally, in
    /// flat chart coordinates (mode multiplier 1/|k|², constants
    /// annihilated). Used as an elliptic preconditioner; on conformal
    /// grids this approximates the true inverse but stays symmetric
    /// positive definite on non-constant data.
    pub(crate) fn flat_inverse_laplacian(&self, values: &[f64]) -> Vec<f64> {
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.apply_isotropic_multiplier(&mut data, &|ksq| {
            if ksq == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(1.0 / ksq, 0.0)
            }
        });
        data.iter().map(|c| c.re).collect()
    }

    /// Basis of the non-constant kernel of the spectral derivative: the
    /// per-axis Nyquist sawtooth modes and (in two dimensions) their
    /// product. On an even grid these modes have no well-defined odd
    /// derivative and are annihilated by [`gradient`], so they span the
    /// gauge directions of any equation built from it.
    pub(crate) fn nyquist_kernel_basis(&self) -> Vec<Vec<f64>> {
        let parity = |m: usize| if m % 2 == 0 { 1.0 } else { -1.0 };
        match self.dims.len() {
            1 => {
                let n = self.dims[0];
                vec![(0..n).map(parity).collect()]
            }
            _ => {
                let (n0, n1) = (self.dims[0], self.dims[1]);
                let mut basis = Vec::with_capacity(3);
                for mode in 0..3 {
                    let mut v = vec![0.0; n0 * n1];
                    for i0 in 0..n0 {
                        for i1 in 0..n1 {
                            v[i0 * n1 + i1] = match mode {
                                0 => parity(i0),
                                1 => parity(i1),
                                _ => parity(i0 + i1),
                            };
                        }
                    }
                    basis.push(v);
                }
                basis
            }
        }
    }

    /// Remove the sawtooth gauge components (see
    /// [`Self::nyquist_kernel_basis`]) from nodal values in place.
    pub(crate) fn remove_nyquist_kernel(&self, values: &mut [f64]) {
        let n = values.len() as f64;
        for s in self.nyquist_kernel_basis() {
            let coeff: f64 = s.iter().zip(values.iter()).map(|(a, b)| a * b).sum::<f64>() / n;
            for (v, si) in values.iter_mut().zip(&s) {
                *v -= coeff * si;
            }
        }
    }

    /// Chart partial derivative ∂/∂x_axis (no metric factors).
    pub(crate) fn chart_partial(&self, axis: usize, values: &[f64]) -> Vec<f64> {
        let mult: Vec<Complex64> = self.deriv_wavenumbers[axis]
            .iter()
            .map(|&k| Complex64::new(0.0, k))
            .collect();
        self.axis_filter(axis, values, &mult)
    }

    /// Mean of raw values against dvol, `(1/Vol)∫f dvol`.
    pub(crate) fn mean_of(&self, values: &[f64]) -> f64 {
        let s: f64 = values.iter().zip(&self.weights).map(|(v, w)| v * w).sum();
        s / self.volume
    }
}

fn check_values(grid: &Arc<PeriodicGrid>, values: &[f64]) -> Result<()> {
    if values.len() != grid.node_count() {
        return Err(Error::ShapeMismatch {
            expected: grid.node_count(),
            found: values.len(),
        });
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index: i });
    }
    Ok(())
}

fn assert_same_grid(a: &Arc<PeriodicGrid>, b: &Arc<PeriodicGrid>) {
    assert!(
        Arc::ptr_eq(a, b) || **a == **b,
        "fields live on different grids"
    );
}

/// A sampled real function on a [`PeriodicGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Arc<PeriodicGrid>,
    values: Vec<f64>,
}

impl ScalarField {
    /// Wrap raw node values; fails on shape mismatch or non-finite entries.
    pub fn new(grid: Arc<PeriodicGrid>, values: Vec<f64>) -> Result<Self> {
        check_values(&grid, &values)?;
        Ok(Self { grid, values })
    }

    /// Sample a function of the node coordinates.
    pub fn from_fn(grid: &Arc<PeriodicGrid>, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = grid.nodes().iter().map(|x| f(x)).collect();
        Self {
            grid: Arc::clone(grid),
            values,
        }
    }

    /// The constant field.
    pub fn constant(grid: &Arc<PeriodicGrid>, c: f64) -> Self {
        Self {
            grid: Arc::clone(grid),
            values: vec![c; grid.node_count()],
        }
    }

    pub fn grid(&self) -> &Arc<PeriodicGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub(crate) fn from_values_unchecked(grid: &Arc<PeriodicGrid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.node_count());
        Self {
            grid: Arc::clone(grid),
            values,
        }
    }

    /// Pointwise map.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination with another field on the same grid.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_same_grid(&self.grid, &other.grid);
        Self {
            grid: Arc::clone(&self.grid),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Scalar multiple.
    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// Mean against the volume form, `(1/Vol)∫f dvol`.
    pub fn mean(&self) -> f64 {
        self.grid.mean_of(&self.values)
    }

    /// L²(dvol) norm.
    pub fn l2_norm(&self) -> f64 {
        integrate(&self.zip_with(self, |a, b| a * b)).max(0.0).sqrt()
    }

    /// Supremum norm over the nodes.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Smallest node value.
    pub fn min_value(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }
}

impl std::ops::Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl std::ops::Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl std::ops::Mul for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: &ScalarField) -> ScalarField {
        self.zip_with(rhs, |a, b| a * b)
    }
}

/// A sampled vector field on a [`PeriodicGrid`], one component per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Arc<PeriodicGrid>,
    components: Vec<Vec<f64>>,
}

impl VectorField {
    /// Wrap raw components; fails on shape mismatch or non-finite entries.
    pub fn new(grid: Arc<PeriodicGrid>, components: Vec<Vec<f64>>) -> Result<Self> {
        if components.len() != grid.dim() {
            return Err(Error::ShapeMismatch {
                expected: grid.dim(),
                found: components.len(),
            });
        }
        for comp in &components {
            check_values(&grid, comp)?;
        }
        Ok(Self { grid, components })
    }

    /// Sample component functions of the node coordinates.
    pub fn from_fn(grid: &Arc<PeriodicGrid>, f: impl Fn(&[f64]) -> Vec<f64>) -> Self {
        let nodes = grid.nodes();
        let mut components = vec![vec![0.0; grid.node_count()]; grid.dim()];
        for (i, x) in nodes.iter().enumerate() {
            let v = f(x);
            assert_eq!(v.len(), grid.dim(), "component count must match the grid dimension");
            for (a, comp) in components.iter_mut().enumerate() {
                comp[i] = v[a];
            }
        }
        Self {
            grid: Arc::clone(grid),
            components,
        }
    }

    /// The zero field.
    pub fn zero(grid: &Arc<PeriodicGrid>) -> Self {
        Self {
            grid: Arc::clone(grid),
            components: vec![vec![0.0; grid.node_count()]; grid.dim()],
        }
    }

    /// A constant field with the given components.
    pub fn constant(grid: &Arc<PeriodicGrid>, comps: &[f64]) -> Self {
        assert_eq!(comps.len(), grid.dim(), "component count must match the grid dimension");
        Self {
            grid: Arc::clone(grid),
            components: comps
                .iter()
                .map(|&c| vec![c; grid.node_count()])
                .collect(),
        }
    }

    pub fn grid(&self) -> &Arc<PeriodicGrid> {
        &self.grid
    }

    /// Component values along one axis.
    pub fn component(&self, axis: usize) -> &[f64] {
        &self.components[axis]
    }

    pub(crate) fn from_components_unchecked(
        grid: &Arc<PeriodicGrid>,
        components: Vec<Vec<f64>>,
    ) -> Self {
        Self {
            grid: Arc::clone(grid),
            components,
        }
    }

    /// Pointwise linear combination `a·self + b·other`.
    pub fn linear_comb(&self, a: f64, other: &Self, b: f64) -> Self {
        assert_same_grid(&self.grid, &other.grid);
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(s, o)| s.iter().zip(o).map(|(&x, &y)| a * x + b * y).collect())
            .collect();
        Self {
            grid: Arc::clone(&self.grid),
            components,
        }
    }

    /// Scalar multiple.
    pub fn scale(&self, c: f64) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            components: self
                .components
                .iter()
                .map(|comp| comp.iter().map(|&v| c * v).collect())
                .collect(),
        }
    }

    /// Multiply by a scalar field pointwise.
    pub fn scale_by(&self, f: &ScalarField) -> Self {
        assert_same_grid(&self.grid, f.grid());
        Self {
            grid: Arc::clone(&self.grid),
            components: self
                .components
                .iter()
                .map(|comp| comp.iter().zip(f.values()).map(|(&v, &s)| v * s).collect())
                .collect(),
        }
    }

    /// Riemannian inner product `g(X, Y)` as a scalar field; `e^{2λ}X·Y`
    /// in the conformal case, the Euclidean dot product otherwise.
    pub fn inner(&self, other: &Self) -> ScalarField {
        assert_same_grid(&self.grid, &other.grid);
        let n = self.grid.node_count();
        let mut values = vec![0.0; n];
        for (s, o) in self.components.iter().zip(&other.components) {
            for i in 0..n {
                values[i] += s[i] * o[i];
            }
        }
        if let Some(lambda) = self.grid.conformal_exponent() {
            for (v, &l) in values.iter_mut().zip(lambda) {
                *v *= (2.0 * l).exp();
            }
        }
        ScalarField::from_values_unchecked(&self.grid, values)
    }

    /// Pointwise squared metric norm `g(X, X)`.
    pub fn norm_squared(&self) -> ScalarField {
        self.inner(self)
    }

    /// L²(ρ-free) norm, `sqrt(∫ g(X,X) dvol)`.
    pub fn l2_norm(&self) -> f64 {
        integrate(&self.norm_squared()).max(0.0).sqrt()
    }

    /// Largest absolute component value over all nodes and axes.
    pub fn sup_norm(&self) -> f64 {
        self.components
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

impl std::ops::Add for &VectorField {
    type Output = VectorField;
    fn add(self, rhs: &VectorField) -> VectorField {
        self.linear_comb(1.0, rhs, 1.0)
    }
}

impl std::ops::Sub for &VectorField {
    type Output = VectorField;
    fn sub(self, rhs: &VectorField) -> VectorField {
        self.linear_comb(1.0, rhs, -1.0)
    }
}

/// Metric gradient of a scalar field.
///
/// Flat case: the spectral partial derivative along each axis. Conformal
/// case (`e^{2λ}dx²`): `e^{−2λ}·f′`, the musical raise of `df`.
pub fn gradient(f: &ScalarField) -> VectorField {
    let grid = f.grid();
    let mut components: Vec<Vec<f64>> = (0..grid.dim())
        .map(|axis| grid.chart_partial(axis, f.values()))
        .collect();
    if let Some(lambda) = grid.conformal_exponent() {
        for (v, &l) in components[0].iter_mut().zip(lambda) {
            *v *= (-2.0 * l).exp();
        }
    }
    VectorField::from_components_unchecked(grid, components)
}

/// Divergence of a vector field with respect to the Riemannian volume,
/// characterized by `ℒ_X(dvol) = div(X)·dvol`.
///
/// Flat case: `Σ ∂_a X^a`. Conformal case: `e^{−λ}(e^{λ}u)′`. The result
/// integrates to zero against `dvol` up to rounding.
pub fn divergence(x: &VectorField) -> ScalarField {
    let grid = x.grid();
    match grid.conformal_exponent() {
        None => {
            let n = grid.node_count();
            let mut values = vec![0.0; n];
            for axis in 0..grid.dim() {
                let d = grid.chart_partial(axis, x.component(axis));
                for i in 0..n {
                    values[i] += d[i];
                }
            }
            ScalarField::from_values_unchecked(grid, values)
        }
        Some(lambda) => {
            let weighted: Vec<f64> = x
                .component(0)
                .iter()
                .zip(lambda)
                .map(|(&u, &l)| l.exp() * u)
                .collect();
            let mut values = grid.chart_partial(0, &weighted);
            for (v, &l) in values.iter_mut().zip(lambda) {
                *v *= (-l).exp();
            }
            ScalarField::from_values_unchecked(grid, values)
        }
    }
}

/// Laplace–Beltrami operator, implemented exactly as the composition
/// `divergence(gradient(f))` so that discrete integration by parts holds
/// with no extra error terms.
pub fn laplacian(f: &ScalarField) -> ScalarField {
    divergence(&gradient(f))
}

/// Quadrature of a scalar field against the Riemannian volume form.
pub fn integrate(f: &ScalarField) -> f64 {
    f.values()
        .iter()
        .zip(f.grid().quadrature_weights())
        .map(|(v, w)| v * w)
        .sum()
}

/// Coordinate Lie bracket `[X, Y] = X(Y) − Y(X)`, computed componentwise
/// with chart partials; it is independent of the metric.
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> VectorField {
    let grid = x.grid();
    assert_same_grid(grid, y.grid());
    let n = grid.node_count();
    let dim = grid.dim();
    // Pre-compute all partials ∂_a Y^i and ∂_a X^i.
    let dy: Vec<Vec<Vec<f64>>> = (0..dim)
        .map(|i| (0..dim).map(|a| grid.chart_partial(a, y.component(i))).collect())
        .collect();
    let dx: Vec<Vec<Vec<f64>>> = (0..dim)
        .map(|i| (0..dim).map(|a| grid.chart_partial(a, x.component(i))).collect())
        .collect();
    let mut components = vec![vec![0.0; n]; dim];
    for i in 0..dim {
        for a in 0..dim {
            let xa = x.component(a);
            let ya = y.component(a);
            let dyi = &dy[i][a];
            let dxi = &dx[i][a];
            for p in 0..n {
                components[i][p] += xa[p] * dyi[p] - ya[p] * dxi[p];
            }
        }
    }
    VectorField::from_components_unchecked(grid, components)
}
