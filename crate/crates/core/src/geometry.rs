//! Fubini-Study geometry of sampled evolution curves.
//!
//! Length conventions: the Fubini-Study length `S = (2/ħ)∫ΔA dλ` puts
//! orthogonal rays at distance π, matching the Bargmann angle
//! `S₀ = 2 arccos|⟨ψ₁|ψ₂⟩|`. The parallel-transported lift moves with speed
//! ‖dψ̄/dλ‖ = ΔA/ħ, so its Hilbert-space length is `l = S/2`.
//!
//! Derivatives use second-order central differences at interior nodes and
//! second-order one-sided stencils at the ends. Both the curve length and
//! the lift length carry a Richardson estimate from the half-resolution grid.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::algebra::{inner_product, QuantumState, ToleranceConfig, C64};
use crate::error::{Error, Result};
use crate::evolution::{EvolutionPath, Gauge};
use crate::quadrature::{self, Estimate};

/// Geodesic distance between the rays of `a` and `b`, in [0, π].
///
/// Evaluated as 2·atan2(‖b − ⟨a|b⟩a‖, |⟨a|b⟩|), which equals
/// 2·arccos(|⟨a|b⟩|) but keeps full precision for nearly coincident rays.
pub fn bargmann_angle(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    let overlap = inner_product(a, b)?;
    let perp = b.as_vector() - a.as_vector() * overlap;
    Ok(2.0 * perp.norm().atan2(overlap.norm()))
}

/// |⟨a|b⟩|².
pub fn fidelity(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    inner_product(a, b).map(|z| z.norm_sqr())
}

/// ΔA(λₖ) at every sample.
pub fn uncertainty_profile(path: &EvolutionPath) -> Result<Vec<f64>> {
    path.grid()
        .values()
        .zip(path.states())
        .map(|(lambda, psi)| path.generator().at(lambda)?.uncertainty(psi))
        .collect()
}

fn require_samples(path: &EvolutionPath, needed: usize) -> Result<()> {
    if path.len() < needed {
        return Err(Error::TooFewSamples {
            needed,
            got: path.len(),
        });
    }
    Ok(())
}

/// S = (2/ħ)∫ΔA dλ over the path.
pub fn fubini_study_length(path: &EvolutionPath) -> Result<Estimate> {
    require_samples(path, 3)?;
    let scale = 2.0 / path.units().hbar();
    let profile: Vec<f64> = uncertainty_profile(path)?.iter().map(|d| d * scale).collect();
    Ok(quadrature::integrate_with_estimate(&profile, path.grid().step()))
}

/// S(λₖ) from the start of the path, cumulative trapezoid.
pub fn cumulative_fs_length(path: &EvolutionPath) -> Result<Vec<f64>> {
    let scale = 2.0 / path.units().hbar();
    let profile: Vec<f64> = uncertainty_profile(path)?.iter().map(|d| d * scale).collect();
    Ok(quadrature::cumulative_trapezoid(&profile, path.grid().step()))
}

/// Removes the dynamical phase: ψ̄(λ) = exp((i/ħ)∫⟨A⟩dλ') ψ(λ), the integral
/// running from the first grid point by cumulative trapezoid.
pub fn parallel_transport(path: &EvolutionPath) -> Result<EvolutionPath> {
    let means = path
        .grid()
        .values()
        .zip(path.states())
        .map(|(lambda, psi)| path.generator().at(lambda)?.expectation(psi))
        .collect::<Result<Vec<_>>>()?;
    let hbar = path.units().hbar();
    let phases = quadrature::cumulative_trapezoid(&means, path.grid().step());
    let states = path
        .states()
        .iter()
        .zip(&phases)
        .map(|(psi, phi)| psi.rephased(phi / hbar))
        .collect();
    Ok(path.with_states(states, Gauge::ParallelTransported))
}

/// max |⟨ψ̄ₖ|(ψ̄ₖ₊₁ − ψ̄ₖ₋₁)/2h⟩| over interior nodes.
pub fn transport_defect(path: &EvolutionPath) -> Result<f64> {
    require_samples(path, 3)?;
    let h = path.grid().step();
    let s = path.states();
    Ok((1..s.len() - 1)
        .map(|k| {
            let d = (s[k + 1].as_vector() - s[k - 1].as_vector()) / C64::from(2.0 * h);
            s[k].as_vector().dotc(&d).norm()
        })
        .fold(0.0, f64::max))
}

fn derivative_norms(states: &[&DVector<C64>], h: f64) -> Vec<f64> {
    let n = states.len();
    let two_h = C64::from(2.0 * h);
    (0..n)
        .map(|k| {
            let d = if k == 0 {
                (states[1] * C64::from(4.0) - states[0] * C64::from(3.0) - states[2]) / two_h
            } else if k == n - 1 {
                (states[n - 1] * C64::from(3.0) - states[n - 2] * C64::from(4.0) + states[n - 3]) / two_h
            } else {
                (states[k + 1] - states[k - 1]) / two_h
            };
            d.norm()
        })
        .collect()
}

/// l = ∫‖dψ̄/dλ‖dλ of a parallel-transported path.
pub fn transported_length(path: &EvolutionPath) -> Result<Estimate> {
    if path.gauge() != Gauge::ParallelTransported {
        return Err(Error::NotTransported);
    }
    require_samples(path, 3)?;
    let h = path.grid().step();
    let vectors: Vec<&DVector<C64>> = path.states().iter().map(|s| s.as_vector()).collect();
    let value = quadrature::integrate(&derivative_norms(&vectors, h), h);
    // Finite differences dominate the discretization error: O(h²).
    let error = quadrature::richardson_prefix(vectors.len()).map(|m| {
        let fine = quadrature::integrate(&derivative_norms(&vectors[..m], h), h);
        let coarse_vectors: Vec<&DVector<C64>> = vectors[..m].iter().step_by(2).copied().collect();
        let coarse = quadrature::integrate(&derivative_norms(&coarse_vectors, 2.0 * h), 2.0 * h);
        quadrature::richardson_error(fine, coarse, 2)
    });
    Ok(Estimate { value, error })
}

/// The curve λ ↦ cos(vλ)ψ̄₀ + sin(vλ)/v·ψ̄̇₀ for an initial point and a
/// horizontal initial velocity of length v.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicFrame {
    origin: QuantumState,
    velocity: DVector<C64>,
    speed: f64,
}

impl GeodesicFrame {
    pub fn new(origin: QuantumState, velocity: DVector<C64>, speed: f64, tol: f64) -> Result<Self> {
        if !(speed.is_finite() && speed > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "speed must be positive, got {speed}"
            )));
        }
        if velocity.len() != origin.dim() {
            return Err(Error::DimensionMismatch {
                expected: origin.dim(),
                found: velocity.len(),
            });
        }
        let scale = speed.max(1.0);
        let norm = velocity.norm();
        if (norm - speed).abs() > tol * scale {
            return Err(Error::InvalidArgument(format!(
                "velocity norm {norm} differs from speed {speed}"
            )));
        }
        let overlap = origin.as_vector().dotc(&velocity).norm();
        if overlap > tol * scale {
            return Err(Error::InvalidArgument(format!(
                "velocity is not horizontal: |<psi0|dpsi0>| = {overlap:e}"
            )));
        }
        Ok(Self {
            origin,
            velocity,
            speed,
        })
    }

    pub fn origin(&self) -> &QuantumState {
        &self.origin
    }

    pub fn velocity(&self) -> &DVector<C64> {
        &self.velocity
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn at(&self, lambda: f64) -> QuantumState {
        let (s, c) = (self.speed * lambda).sin_cos();
        let v = self.origin.as_vector() * C64::from(c) + &self.velocity * C64::from(s / self.speed);
        QuantumState::from_vector_unchecked(v)
    }
}

/// One-shot evaluation of a geodesic, see [`GeodesicFrame`].
pub fn geodesic_curve(
    origin: &QuantumState,
    velocity: &DVector<C64>,
    speed: f64,
    lambda: f64,
    tol: f64,
) -> Result<QuantumState> {
    GeodesicFrame::new(origin.clone(), velocity.clone(), speed, tol).map(|g| g.at(lambda))
}

/// max over interior nodes of ‖(ψ̄ₖ₊₁ − 2ψ̄ₖ + ψ̄ₖ₋₁)/h² + v²ψ̄ₖ‖.
///
/// The stencil is O(h²): on an exact geodesic the residual is about
/// v⁴h²/12.
pub fn geodesic_residual(path: &EvolutionPath, speed: f64) -> Result<f64> {
    require_samples(path, 5)?;
    let h = path.grid().step();
    let s = path.states();
    let inv_h2 = C64::from(1.0 / (h * h));
    let v2 = C64::from(speed * speed);
    Ok((1..s.len() - 1)
        .map(|k| {
            let second =
                (s[k + 1].as_vector() - s[k].as_vector() * C64::from(2.0) + s[k - 1].as_vector()) * inv_h2;
            (second + s[k].as_vector() * v2).norm()
        })
        .fold(0.0, f64::max))
}

/// Numerical dimension of span{ψ̄ₖ}: eigenvalues of Σₖ|ψ̄ₖ⟩⟨ψ̄ₖ| above
/// `cutoff` times the largest. This operator shares its non-zero spectrum
/// with the Gram matrix of the samples.
pub fn subspace_rank(path: &EvolutionPath, cutoff: f64) -> Result<usize> {
    require_samples(path, 3)?;
    let n = path.first().dim();
    let mut frame = DMatrix::<C64>::zeros(n, n);
    for s in path.states() {
        let v = s.as_vector();
        frame += v * v.adjoint();
    }
    let eig = SymmetricEigen::new(frame);
    let largest = eig.eigenvalues.iter().fold(0.0_f64, |m, &x| m.max(x));
    Ok(eig.eigenvalues.iter().filter(|&&x| x > cutoff * largest).count())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    pub fs_length: Estimate,
    pub geodesic_distance: f64,
    pub transported_length: Estimate,
    /// v = ΔA/ħ at the first sample.
    pub speed: f64,
    pub residual_max: f64,
    pub transport_defect: f64,
    pub gram_rank: usize,
}

impl GeometryReport {
    /// |S − 2l| and the tolerance it is held to: ten times the combined
    /// Richardson estimates, with a roundoff floor.
    pub fn factor_identity(&self) -> (f64, f64) {
        let s = self.fs_length.value;
        let deviation = (s - 2.0 * self.transported_length.value).abs();
        let estimate = self.fs_length.error_or_zero() + 2.0 * self.transported_length.error_or_zero();
        (deviation, 10.0 * estimate + 1e-12 * s.max(1.0))
    }
}

/// Length, distance, transport and subspace diagnostics for one path.
pub fn analyze(path: &EvolutionPath, tol: &ToleranceConfig) -> Result<GeometryReport> {
    require_samples(path, 5)?;
    let fs_length = fubini_study_length(path)?;
    let geodesic_distance = bargmann_angle(path.first(), path.last())?;
    let transported = parallel_transport(path)?;
    let speed = path
        .generator()
        .at(path.grid().start())?
        .uncertainty(path.first())?
        / path.units().hbar();
    Ok(GeometryReport {
        fs_length,
        geodesic_distance,
        transported_length: transported_length(&transported)?,
        speed,
        residual_max: geodesic_residual(&transported, speed)?,
        transport_defect: transport_defect(&transported)?,
        gram_rank: subspace_rank(&transported, tol.rank_cutoff)?,
    })
}
