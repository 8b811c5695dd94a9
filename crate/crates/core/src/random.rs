//! Seeded random Hermitian generators and states.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::algebra::{HermitianGenerator, QuantumState, C64};
use crate::error::Result;

/// Complex Gaussian with E|z|² = 1.
fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// A = (G + G†)/2 with independent standard complex Gaussian entries.
pub fn gaussian_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<HermitianGenerator> {
    let g = DMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
    let a = (&g + g.adjoint()) * C64::from(0.5);
    HermitianGenerator::new(a)
}

/// Haar-distributed pure state (normalized complex Gaussian vector).
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<QuantumState> {
    QuantumState::from_vector(DVector::from_fn(dim, |_, _| complex_gaussian(rng)))
}
