//! State vectors, Hermitian generators and the handful of linear-algebra
//! primitives everything else is built from.
//!
//! States are kept normalized at construction. Generators are validated as
//! Hermitian once and cache their spectral decomposition lazily, so a
//! generator can be shared freely between threads and paths.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Unit convention. Only ħ is free; `h` and the uncertainty bound follow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Units {
    hbar: f64,
}

impl Units {
    pub fn new(hbar: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "hbar must be positive and finite, got {hbar}"
            )));
        }
        Ok(Self { hbar })
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Planck's constant h = 2πħ.
    pub fn planck(&self) -> f64 {
        2.0 * PI * self.hbar
    }

    /// The uncertainty bound h/4, evaluated as πħ/2.
    pub fn bound(&self) -> f64 {
        PI * self.hbar / 2.0
    }
}

impl Default for Units {
    fn default() -> Self {
        Self { hbar: 1.0 }
    }
}

/// Numeric tolerances used across the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    /// Normalization and orthonormality.
    pub norm: f64,
    /// Hermiticity, relative to the largest matrix entry.
    pub herm: f64,
    /// Relative saturation test |ratio - 1| for spectrally propagated paths.
    pub saturation_rel: f64,
    /// Same test for ODE-propagated paths.
    pub saturation_rel_ode: f64,
    /// Geodesic-equation residual at unit speed.
    pub residual_abs: f64,
    /// Relative cutoff for the numerical rank of the sampled subspace.
    pub rank_cutoff: f64,
    /// Smallest Bargmann angle for which Δλ is defined.
    pub coincident_s0: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            norm: 1e-12,
            herm: 1e-12,
            saturation_rel: 1e-9,
            saturation_rel_ode: 1e-6,
            residual_abs: 1e-6,
            rank_cutoff: 1e-8,
            coincident_s0: 1e-8,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("norm", self.norm),
            ("herm", self.herm),
            ("saturation_rel", self.saturation_rel),
            ("saturation_rel_ode", self.saturation_rel_ode),
            ("residual_abs", self.residual_abs),
            ("rank_cutoff", self.rank_cutoff),
            ("coincident_s0", self.coincident_s0),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "tolerance {name} must be positive, got {value}"
                )));
            }
        }
        Ok(())
    }
}

/// A unit-norm vector of complex amplitudes, N ≥ 2.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    amplitudes: DVector<C64>,
}

impl QuantumState {
    /// Wraps already-normalized amplitudes, checked against the default
    /// normalization tolerance.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        Self::with_tolerance(amplitudes, ToleranceConfig::default().norm)
    }

    pub fn with_tolerance(amplitudes: Vec<C64>, tol: f64) -> Result<Self> {
        let v = DVector::from_vec(amplitudes);
        check_vector(&v)?;
        let n2 = v.norm_squared();
        if (n2 - 1.0).abs() > tol {
            return Err(Error::NotNormalized(n2));
        }
        Ok(Self { amplitudes: v })
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        Self::from_vector(DVector::from_vec(amplitudes))
    }

    pub fn from_vector(v: DVector<C64>) -> Result<Self> {
        check_vector(&v)?;
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::NotNormalized(0.0));
        }
        Ok(Self {
            amplitudes: v.unscale(norm),
        })
    }

    /// Standard basis vector e_k.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        if k >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {k} out of range for dimension {dim}"
            )));
        }
        let mut v = DVector::zeros(dim);
        v[k] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes: v })
    }

    /// Caller guarantees finiteness and unit norm up to roundoff.
    pub(crate) fn from_vector_unchecked(amplitudes: DVector<C64>) -> Self {
        debug_assert!(amplitudes.len() >= 2);
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.amplitudes.as_slice()
    }

    pub fn as_vector(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    /// Multiplies by the global phase e^{iθ}; the ray is unchanged.
    pub fn rephased(&self, theta: f64) -> Self {
        Self {
            amplitudes: self.amplitudes.scale_complex(C64::from_polar(1.0, theta)),
        }
    }
}

fn check_vector(v: &DVector<C64>) -> Result<()> {
    if v.len() < 2 {
        return Err(Error::DimensionTooSmall(v.len()));
    }
    if v.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

trait ScaleComplex {
    fn scale_complex(&self, c: C64) -> Self;
}

impl ScaleComplex for DVector<C64> {
    fn scale_complex(&self, c: C64) -> Self {
        self.map(|z| z * c)
    }
}

/// ⟨a|b⟩, conjugate-linear in `a`.
pub fn inner_product(a: &QuantumState, b: &QuantumState) -> Result<C64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(a.amplitudes.dotc(&b.amplitudes))
}

/// Ascending eigenvalues with orthonormal eigenvectors stored as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
    vectors: DMatrix<C64>,
    min_gap: f64,
    degenerate: bool,
}

impl Spectrum {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn vectors(&self) -> &DMatrix<C64> {
        &self.vectors
    }

    pub fn vector(&self, k: usize) -> DVector<C64> {
        self.vectors.column(k).into_owned()
    }

    /// Smallest gap between consecutive eigenvalues.
    pub fn min_gap(&self) -> f64 {
        self.min_gap
    }

    /// True when some gap is at or below `herm · ‖A‖`.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn spectral_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, a| m.max(a.abs()))
    }
}

/// Constituents of a split generator A = A₀ + A₁ with A₀ = a₀·I and A₁
/// coupling two basis states |ψᵢ⟩, |ψⱼ⟩ with strength a₁.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub a0: f64,
    pub a1: f64,
    pub i: usize,
    pub j: usize,
    /// Orthonormal basis {|ψₖ⟩} as columns.
    pub basis: DMatrix<C64>,
    pub a0_part: DMatrix<C64>,
    pub a1_part: DMatrix<C64>,
}

/// An N×N Hermitian matrix generating evolution in a parameter λ.
#[derive(Debug, Clone)]
pub struct HermitianGenerator {
    matrix: DMatrix<C64>,
    herm_tol: f64,
    norm_tol: f64,
    split: Option<Split>,
    spectrum: OnceLock<Result<Spectrum>>,
}

impl PartialEq for HermitianGenerator {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix && self.split == other.split
    }
}

impl HermitianGenerator {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        Self::with_tolerance(matrix, &ToleranceConfig::default())
    }

    pub fn with_tolerance(matrix: DMatrix<C64>, tol: &ToleranceConfig) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows < 2 {
            return Err(Error::DimensionTooSmall(rows));
        }
        if matrix.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite);
        }
        let scale = max_abs(&matrix).max(1.0);
        let deviation = hermiticity_deviation(&matrix);
        if deviation > tol.herm * scale {
            return Err(Error::NotHermitian(deviation));
        }
        Ok(Self {
            matrix,
            herm_tol: tol.herm,
            norm_tol: tol.norm,
            split: None,
            spectrum: OnceLock::new(),
        })
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let diag = DVector::from_iterator(values.len(), values.iter().map(|&a| C64::new(a, 0.0)));
        Self::new(DMatrix::from_diagonal(&diag))
    }

    pub fn zero(dim: usize) -> Result<Self> {
        Self::new(DMatrix::zeros(dim, dim))
    }

    /// Builds A = A₀ + A₁ from its parts, checking the split invariants.
    pub fn from_split(split: Split, tol: &ToleranceConfig) -> Result<Self> {
        let n = split.basis.nrows();
        if split.basis.shape() != (n, n) || split.a0_part.shape() != (n, n) || split.a1_part.shape() != (n, n)
        {
            return Err(Error::InvalidSplit(
                "parts must be square and of equal size".into(),
            ));
        }
        if split.i == split.j || split.i >= n || split.j >= n {
            return Err(Error::InvalidSplit(format!(
                "indices i = {}, j = {} must be distinct and below {n}",
                split.i, split.j
            )));
        }
        let gram = split.basis.adjoint() * &split.basis;
        let ortho = max_abs(&(gram - DMatrix::<C64>::identity(n, n)));
        if ortho > tol.norm * n as f64 {
            return Err(Error::InvalidSplit(format!(
                "basis is not orthonormal (deviation {ortho:e})"
            )));
        }
        let scale = split.a0.abs().max(split.a1.abs()).max(1.0);
        let a0_dev = max_abs(&(&split.a0_part - DMatrix::<C64>::identity(n, n) * C64::from(split.a0)));
        if a0_dev > tol.herm * scale {
            return Err(Error::InvalidSplit(format!("A0 differs from a0·I by {a0_dev:e}")));
        }
        let bi = split.basis.column(split.i);
        let bj = split.basis.column(split.j);
        let elem =
            |x: &nalgebra::DVectorView<C64>, y: &nalgebra::DVectorView<C64>| x.dotc(&(&split.a1_part * y));
        let checks = [
            elem(&bi, &bi),
            elem(&bj, &bj),
            elem(&bi, &bj) - split.a1,
            elem(&bj, &bi) - split.a1,
        ];
        let a1_dev = checks.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
        if a1_dev > tol.herm * scale {
            return Err(Error::InvalidSplit(format!(
                "A1 matrix elements on the (i, j) block deviate by {a1_dev:e}"
            )));
        }
        let matrix = &split.a0_part + &split.a1_part;
        let mut generator = Self::with_tolerance(matrix, tol)?;
        generator.split = Some(split);
        Ok(generator)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn split(&self) -> Option<&Split> {
        self.split.as_ref()
    }

    /// cA for real c. A stored split is dropped.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        self.rebuild(&self.matrix * C64::from(c))
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        self.rebuild(&self.matrix + &other.matrix)
    }

    fn rebuild(&self, matrix: DMatrix<C64>) -> Result<Self> {
        let tol = ToleranceConfig {
            herm: self.herm_tol,
            norm: self.norm_tol,
            ..ToleranceConfig::default()
        };
        Self::with_tolerance(matrix, &tol)
    }

    /// A|ψ⟩.
    pub fn apply(&self, psi: &QuantumState) -> Result<DVector<C64>> {
        self.check_dim(psi)?;
        Ok(&self.matrix * psi.as_vector())
    }

    /// ⟨ψ|A|ψ⟩.
    pub fn expectation(&self, psi: &QuantumState) -> Result<f64> {
        let a_psi = self.apply(psi)?;
        let value = psi.as_vector().dotc(&a_psi);
        let scale = max_abs(&self.matrix).max(1.0);
        if value.im.abs() > self.herm_tol * scale {
            return Err(Error::ImaginaryExpectation(value.im));
        }
        Ok(value.re)
    }

    /// ΔA = ‖(A − ⟨A⟩)ψ‖, which equals √(⟨A²⟩ − ⟨A⟩²) and cannot go negative.
    pub fn uncertainty(&self, psi: &QuantumState) -> Result<f64> {
        self.mean_and_uncertainty(psi).map(|(_, d)| d)
    }

    pub fn mean_and_uncertainty(&self, psi: &QuantumState) -> Result<(f64, f64)> {
        let mean = self.expectation(psi)?;
        let centred = &self.matrix * psi.as_vector() - psi.as_vector() * C64::from(mean);
        Ok((mean, centred.norm()))
    }

    /// Spectral decomposition, computed once per generator.
    pub fn eigendecompose(&self) -> Result<&Spectrum> {
        self.spectrum
            .get_or_init(|| decompose(&self.matrix, self.herm_tol, self.norm_tol))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn check_dim(&self, psi: &QuantumState) -> Result<()> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: psi.dim(),
            });
        }
        Ok(())
    }
}

fn decompose(matrix: &DMatrix<C64>, herm_tol: f64, norm_tol: f64) -> Result<Spectrum> {
    let n = matrix.nrows();
    let eig = SymmetricEigen::try_new(matrix.clone(), f64::EPSILON, 100 * n * n)
        .ok_or_else(|| Error::Decomposition("QR iteration did not converge".into()))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::<C64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }

    let ortho = max_abs(&(vectors.adjoint() * &vectors - DMatrix::<C64>::identity(n, n)));
    if ortho > norm_tol * n as f64 {
        return Err(Error::Decomposition(format!(
            "eigenvectors not orthonormal (deviation {ortho:e})"
        )));
    }

    let min_gap = values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let norm = values.iter().fold(0.0_f64, |m, a| m.max(a.abs()));
    Ok(Spectrum {
        degenerate: min_gap <= herm_tol * norm,
        values,
        vectors,
        min_gap,
    })
}

pub(crate) fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

fn hermiticity_deviation(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0_f64;
    for r in 0..n {
        for c in r..n {
            dev = dev.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    dev
}
