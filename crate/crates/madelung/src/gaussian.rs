//! The Gaussian statistical family 𝒩(μ, 1) as a worked quantization
//! example, plus the finite-dimensional analogue on positive
//! probability vectors.
//!
//! Tangent vectors b∂_μ at a point of the family are identified with
//! complex numbers z = x + iy (x the mean, y the fiber coordinate), and
//! the four Kähler functions 1, x, y, (x²+y²)/2 on ℂ are quantized to
//! operators on L²(ℝ):
//!
//! ```text
//!     1 ↦ Id,   x ↦ ξ·,   y ↦ iħ ∂/∂ξ,
//!     (x²+y²)/2 ↦ −(ħ²/2) ∂²/∂ξ² + ½ξ² − (ħ²/8 + ½),
//! ```
//!
//! with coherent states Ψ(z)(ξ) = (2π)^{−1/4} e^{−(ξ−x)²/4} e^{−iyξ/ħ}.
//! The defining identity f(z) = ⟨Ψ(z), Q(f)Ψ(z)⟩ is the module's tested
//! centerpiece.
//!
//! The line ℝ is truncated to [c−L, c+L] with L = 12: the coherent
//! states decay like e^{−(ξ−x)²/4}, so with the domain centered within
//! a few units of x the truncated mass is far below rounding, and
//! uniform-step quadrature on the window is spectrally accurate.

use num_complex::Complex64;
use std::f64::consts::TAU;
use std::sync::Arc;

use crate::grid::PeriodicGrid;
use crate::{Error, Result};

/// Half-width the coherent-state quadrature window must cover on each
/// side of the state's mean.
pub const MIN_HALF_WIDTH: f64 = 12.0;

/// Default number of quadrature samples on the window.
pub const DEFAULT_SAMPLES: usize = 2048;

/// A uniform sample window [center−half_width, center+half_width] on
/// the real line, with spectral differentiation carried by a periodic
/// grid of the same extent. Functions handled here decay below rounding
/// at the window edge, so the periodic identification is harmless.
#[derive(Debug, Clone)]
pub struct SampleLine {
    center: f64,
    half_width: f64,
    points: Vec<f64>,
    grid: Arc<PeriodicGrid>,
}

impl SampleLine {
    /// Window of `samples` uniform points (even, ≥ 16) spanning
    /// [center−half_width, center+half_width].
    pub fn new(center: f64, half_width: f64, samples: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite() && center.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "sample window [{} ± {}] is not a bounded interval",
                center, half_width
            )));
        }
        let grid = PeriodicGrid::circle(samples, 2.0 * half_width)?;
        let step = 2.0 * half_width / samples as f64;
        let points = (0..samples)
            .map(|j| center - half_width + j as f64 * step)
            .collect();
        Ok(Self {
            center,
            half_width,
            points,
            grid,
        })
    }

    /// The standard window for a coherent state of mean `center`:
    /// half-width 12, 2048 samples.
    pub fn standard(center: f64) -> Self {
        Self::new(center, MIN_HALF_WIDTH, DEFAULT_SAMPLES).expect("standard window parameters")
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half_width / self.points.len() as f64
    }

    /// Margin by which the window covers [x−r, x+r]; negative when it
    /// does not.
    fn coverage(&self, x: f64) -> f64 {
        self.half_width - (self.center - x).abs()
    }

    /// Quadrature pairing ⟨a, b⟩ = ∫ ā·b dξ over the window.
    pub fn inner(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        let h = self.step();
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>() * h
    }

    /// Spectral derivative d/dξ of complex samples.
    fn derivative(&self, values: &[Complex64]) -> Vec<Complex64> {
        let re: Vec<f64> = values.iter().map(|c| c.re).collect();
        let im: Vec<f64> = values.iter().map(|c| c.im).collect();
        let dre = self.grid.chart_partial(0, &re);
        let dim = self.grid.chart_partial(0, &im);
        dre.into_iter()
            .zip(dim)
            .map(|(r, i)| Complex64::new(r, i))
            .collect()
    }

    /// Apply (ħ²/2)|k|² in frequency space: the operator −(ħ²/2)∂².
    fn kinetic(&self, values: &[Complex64], hbar: f64) -> Vec<Complex64> {
        let mut out = values.to_vec();
        self.grid.apply_isotropic_multiplier(&mut out, &|ksq| {
            Complex64::new(0.5 * hbar * hbar * ksq, 0.0)
        });
        out
    }
}

/// A tangent point of the Gaussian family: mean coordinate `x`, fiber
/// coordinate `y`, identified with z = x + iy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPoint {
    pub x: f64,
    pub y: f64,
}

impl GaussianPoint {
    pub fn new(x: f64, y: f64) -> Self {
        assert!(x.is_finite() && y.is_finite(), "coordinates must be finite");
        Self { x, y }
    }
}

/// The four Kähler functions of the plane: 1, x, y, and the harmonic
/// generator (x²+y²)/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KahlerFunction {
    One,
    PosX,
    PosY,
    Harmonic,
}

impl KahlerFunction {
    pub const ALL: [KahlerFunction; 4] = [
        KahlerFunction::One,
        KahlerFunction::PosX,
        KahlerFunction::PosY,
        KahlerFunction::Harmonic,
    ];

    fn index(self) -> usize {
        match self {
            KahlerFunction::One => 0,
            KahlerFunction::PosX => 1,
            KahlerFunction::PosY => 2,
            KahlerFunction::Harmonic => 3,
        }
    }
}

/// A real linear combination of the four Kähler functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KahlerCombination {
    /// Coefficients in the order (One, PosX, PosY, Harmonic).
    pub coefficients: [f64; 4],
}

impl KahlerCombination {
    pub fn zero() -> Self {
        Self {
            coefficients: [0.0; 4],
        }
    }

    pub fn of(f: KahlerFunction) -> Self {
        let mut c = Self::zero();
        c.coefficients[f.index()] = 1.0;
        c
    }

    pub fn scaled(f: KahlerFunction, coefficient: f64) -> Self {
        let mut c = Self::zero();
        c.coefficients[f.index()] = coefficient;
        c
    }

    pub fn eval(&self, z: GaussianPoint) -> f64 {
        KahlerFunction::ALL
            .iter()
            .zip(&self.coefficients)
            .map(|(f, c)| c * kahler_eval(*f, z))
            .sum()
    }
}

/// Evaluate a Kähler function at a tangent point.
pub fn kahler_eval(f: KahlerFunction, z: GaussianPoint) -> f64 {
    match f {
        KahlerFunction::One => 1.0,
        KahlerFunction::PosX => z.x,
        KahlerFunction::PosY => z.y,
        KahlerFunction::Harmonic => 0.5 * (z.x * z.x + z.y * z.y),
    }
}

/// Poisson bracket of two Kähler functions: {x,y} = 1,
/// {x,(x²+y²)/2} = y, {y,(x²+y²)/2} = −x, constants are central, and
/// the table closes under antisymmetry.
pub fn kahler_bracket(f: KahlerFunction, g: KahlerFunction) -> KahlerCombination {
    use KahlerFunction::*;
    match (f, g) {
        (PosX, PosY) => KahlerCombination::scaled(One, 1.0),
        (PosX, Harmonic) => KahlerCombination::of(PosY),
        (PosY, Harmonic) => KahlerCombination::scaled(PosX, -1.0),
        (a, b) if a == b => KahlerCombination::zero(),
        (One, _) | (_, One) => KahlerCombination::zero(),
        _ => {
            let mut c = kahler_bracket(g, f);
            for v in &mut c.coefficients {
                *v = -*v;
            }
            c
        }
    }
}

/// The quantization of a Kähler function: a linear operator on sampled
/// complex functions of ξ.
#[derive(Debug, Clone, Copy)]
pub struct QuantOperator {
    kind: KahlerFunction,
    hbar: f64,
}

impl QuantOperator {
    /// Apply the operator to samples on a window.
    pub fn apply(&self, line: &SampleLine, values: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(
            values.len(),
            line.points.len(),
            "sample count does not match the window"
        );
        match self.kind {
            KahlerFunction::One => values.to_vec(),
            KahlerFunction::PosX => line
                .points
                .iter()
                .zip(values)
                .map(|(&xi, c)| xi * c)
                .collect(),
            KahlerFunction::PosY => {
                let i_hbar = Complex64::new(0.0, self.hbar);
                line.derivative(values)
                    .into_iter()
                    .map(|d| i_hbar * d)
                    .collect()
            }
            KahlerFunction::Harmonic => {
                let shift = self.hbar * self.hbar / 8.0 + 0.5;
                let kinetic = line.kinetic(values, self.hbar);
                line.points
                    .iter()
                    .zip(values)
                    .zip(kinetic)
                    .map(|((&xi, c), k)| k + (0.5 * xi * xi - shift) * c)
                    .collect()
            }
        }
    }
}

/// Quantize a Kähler function: 1 ↦ Id, x ↦ ξ·, y ↦ iħ∂/∂ξ,
/// (x²+y²)/2 ↦ −(ħ²/2)∂² + ½ξ² − (ħ²/8 + ½).
pub fn quantize(f: KahlerFunction, hbar: f64) -> QuantOperator {
    QuantOperator { kind: f, hbar }
}

/// Samples of the coherent state
/// Ψ(z)(ξ) = (2π)^{−1/4}·e^{−(ξ−x)²/4}·e^{−iyξ/ħ}, whose modulus
/// squared is the 𝒩(x, 1) density.
///
/// # Errors
/// [`Error::DomainTooSmall`] when the window does not cover
/// [x−12, x+12].
pub fn gaussian_wave(
    z: GaussianPoint,
    hbar: f64,
    line: &SampleLine,
) -> Result<Vec<Complex64>> {
    let covered = line.coverage(z.x);
    if covered < MIN_HALF_WIDTH {
        return Err(Error::DomainTooSmall {
            required: MIN_HALF_WIDTH,
            covered,
        });
    }
    let amp = TAU.powf(-0.25);
    Ok(line
        .points
        .iter()
        .map(|&xi| {
            let d = xi - z.x;
            Complex64::from_polar(amp * (-d * d / 4.0).exp(), -z.y * xi / hbar)
        })
        .collect())
}

/// The quadrature expectation ⟨Ψ(z), Q(f)·Ψ(z)⟩, whose real part the
/// quantization identity equates with f(z). The imaginary part is a
/// hermiticity diagnostic and must sit at rounding level.
///
/// # Errors
/// [`Error::DomainTooSmall`] as for [`gaussian_wave`].
pub fn expectation(f: KahlerFunction, z: GaussianPoint, hbar: f64) -> Result<f64> {
    expectation_on(f, z, hbar, &SampleLine::standard(z.x))
}

/// [`expectation`] on a caller-supplied window (for quadrature
/// refinement studies).
pub fn expectation_on(
    f: KahlerFunction,
    z: GaussianPoint,
    hbar: f64,
    line: &SampleLine,
) -> Result<f64> {
    let psi = gaussian_wave(z, hbar, line)?;
    let q_psi = quantize(f, hbar).apply(line, &psi);
    let pairing = line.inner(&psi, &q_psi);
    assert!(
        pairing.im.abs() < 1e-10,
        "non-hermitian pairing: imaginary part {:.3e}",
        pairing.im
    );
    Ok(pairing.re)
}

/// Which orientation of the identification b∂_μ ↦ x + iy makes the
/// continuity equation hold for a transported Gaussian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPhaseCheck {
    /// The smaller of the two orientation residuals.
    pub residual: f64,
    /// True when the minimizing phase is φ = −yξ rather than φ = +yξ.
    pub flipped: bool,
}

/// Residual ‖∂_t p − div(p∇φ)‖ for the 𝒩(μ,1) density under mean
/// velocity μ̇ and linear phase φ = ±yξ, evaluated on the standard
/// window. Both sign orientations are formed and the smaller residual
/// is reported; μ̇ = −y zeroes the φ = +yξ orientation.
pub fn gaussian_phase_check(mu_velocity: f64, y: f64) -> GaussianPhaseCheck {
    let line = SampleLine::standard(0.0);
    let h = line.step();
    // p(ξ; 0), ∂_t p = μ̇·ξ·p, and div(p·∇(±yξ)) = ±y·p′ = ∓y·ξ·p.
    let l2 = |sign: f64| -> f64 {
        line.points()
            .iter()
            .map(|&xi| {
                let p = (-xi * xi / 2.0).exp() / TAU.sqrt();
                let dt = mu_velocity * xi * p;
                let transport = -sign * y * xi * p;
                (dt - transport) * (dt - transport) * h
            })
            .sum::<f64>()
            .sqrt()
    };
    let plus = l2(1.0);
    let minus = l2(-1.0);
    GaussianPhaseCheck {
        residual: plus.min(minus),
        flipped: minus < plus,
    }
}

/// A strictly positive probability vector. Construction rescales to
/// unit total mass.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteProbability {
    weights: Vec<f64>,
}

impl FiniteProbability {
    /// # Errors
    /// [`Error::NonPositiveWeight`] when any entry is ≤ 0 (or not
    /// finite).
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let min = weights.iter().fold(f64::INFINITY, |m, &v| m.min(v));
        if weights.iter().any(|v| !v.is_finite()) || min <= 0.0 {
            return Err(Error::NonPositiveWeight { min });
        }
        let total: f64 = weights.iter().sum();
        Ok(Self {
            weights: weights.into_iter().map(|w| w / total).collect(),
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Tolerance on Σ pdot for a direction tangent to the probability
/// simplex.
pub const TANGENT_SUM_TOL: f64 = 1e-10;

/// Wave function of a finite probability with tangent direction pdot:
/// with u_k = pdot_k / p_k, the components are √p_k · e^{i·u_k/2}.
///
/// # Errors
/// [`Error::ShapeMismatch`] for a length mismatch and
/// [`Error::NonZeroSum`] when pdot is not tangent (Σ pdot ≠ 0).
pub fn finite_wave(p: &FiniteProbability, pdot: &[f64]) -> Result<Vec<Complex64>> {
    if pdot.len() != p.len() {
        return Err(Error::ShapeMismatch {
            expected: p.len(),
            found: pdot.len(),
        });
    }
    let sum: f64 = pdot.iter().sum();
    if sum.abs() > TANGENT_SUM_TOL {
        return Err(Error::NonZeroSum {
            sum,
            limit: TANGENT_SUM_TOL,
        });
    }
    Ok(p
        .weights
        .iter()
        .zip(pdot)
        .map(|(&pk, &dk)| Complex64::from_polar(pk.sqrt(), dk / pk / 2.0))
        .collect())
}
