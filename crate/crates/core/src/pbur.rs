//! Parameter-based uncertainty relation ⟨ΔA⟩·Δλ ≥ h/4.
//!
//! ⟨ΔA⟩ is the λ-average of the generator uncertainty along the path and
//! Δλ = (π/S₀)(λ₂ − λ₁) rescales the parameter span by the geodesic distance
//! between the endpoint rays. The ratio product/bound equals S/S₀, so it is
//! one exactly when the path runs along a geodesic.

use serde::{Deserialize, Serialize};

use crate::algebra::ToleranceConfig;
use crate::error::{Error, Result};
use crate::evolution::{EvolutionPath, Propagation};
use crate::geometry::{bargmann_angle, fubini_study_length};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PburReport {
    pub avg_uncertainty: f64,
    pub delta_lambda: f64,
    pub product: f64,
    pub bound: f64,
    pub ratio: f64,
    pub saturated: bool,
    /// Relative tolerance the saturation verdict used.
    pub saturation_tolerance: f64,
    pub fs_length: f64,
    pub geodesic_distance: f64,
    /// Richardson estimate of the quadrature error in `fs_length`.
    pub quadrature_error: Option<f64>,
    /// Set when the ratio falls below one by more than the tolerance, which
    /// can only come from under-resolved quadrature.
    pub diagnostic: Option<String>,
}

/// (1/(λ₂ − λ₁))∫ΔA dλ.
pub fn averaged_uncertainty(path: &EvolutionPath) -> Result<f64> {
    let s = fubini_study_length(path)?;
    Ok(s.value * path.units().hbar() / (2.0 * path.grid().span()))
}

/// Δλ = (π/S₀)(λ₂ − λ₁). Rays closer than `eps` are rejected rather than
/// producing an unbounded value.
pub fn parameter_uncertainty(s0: f64, lambda1: f64, lambda2: f64, eps: f64) -> Result<f64> {
    if lambda1.is_nan() || lambda2.is_nan() || lambda2 <= lambda1 {
        return Err(Error::InvalidArgument(format!(
            "lambda2 = {lambda2} must exceed lambda1 = {lambda1}"
        )));
    }
    if s0.is_nan() || s0 <= eps {
        return Err(Error::CoincidentEndpoints { s0, eps });
    }
    Ok(std::f64::consts::PI / s0 * (lambda2 - lambda1))
}

pub fn saturation_tolerance(method: Propagation, tol: &ToleranceConfig) -> f64 {
    match method {
        Propagation::Spectral => tol.saturation_rel,
        Propagation::Ode => tol.saturation_rel_ode,
    }
}

pub fn evaluate_pbur(path: &EvolutionPath, tol: &ToleranceConfig) -> Result<PburReport> {
    let grid = path.grid();
    let s = fubini_study_length(path)?;
    let s0 = bargmann_angle(path.first(), path.last())?;
    let delta_lambda = parameter_uncertainty(s0, grid.start(), grid.end(), tol.coincident_s0)?;
    let avg_uncertainty = s.value * path.units().hbar() / (2.0 * grid.span());
    let product = avg_uncertainty * delta_lambda;
    let bound = path.units().bound();
    let ratio = product / bound;
    let saturation_tolerance = saturation_tolerance(path.method(), tol);

    let diagnostic = (ratio < 1.0 - saturation_tolerance).then(|| {
        format!(
            "bound violated: ratio = {ratio}, S = {}, S0 = {s0}, quadrature error estimate {}; \
             refine the grid",
            s.value,
            s.error.map_or("n/a".to_string(), |e| format!("{e:e}")),
        )
    });

    Ok(PburReport {
        avg_uncertainty,
        delta_lambda,
        product,
        bound,
        ratio,
        saturated: (ratio - 1.0).abs() < saturation_tolerance,
        saturation_tolerance,
        fs_length: s.value,
        geodesic_distance: s0,
        quadrature_error: s.error,
        diagnostic,
    })
}
