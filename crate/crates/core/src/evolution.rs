//! Propagation of states along a parameter λ under iħ dψ/dλ = A(λ)ψ.
//!
//! Constant generators are propagated through their spectral decomposition,
//! which is exact up to eigensolver roundoff. λ-dependent generators go
//! through a fixed-step classic Runge-Kutta integrator on the same uniform
//! grid, renormalizing after every step and recording the drift it removed.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::algebra::{HermitianGenerator, QuantumState, Spectrum, Units, C64};
use crate::error::{Error, Result};

/// Largest norm drift a single RK4 step may introduce before renormalization.
pub const MAX_STEP_DRIFT: f64 = 1e-6;

/// Uniformly spaced samples λ₀ < λ₁ < … < λₙ₋₁, n ≥ 3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterGrid {
    start: f64,
    end: f64,
    samples: usize,
}

impl ParameterGrid {
    pub fn new(start: f64, end: f64, samples: usize) -> Result<Self> {
        if !(start.is_finite() && end.is_finite()) {
            return Err(Error::InvalidGrid("endpoints must be finite".into()));
        }
        if end <= start {
            return Err(Error::InvalidGrid(format!("end {end} must exceed start {start}")));
        }
        if samples < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3 samples, got {samples}"
            )));
        }
        Ok(Self { start, end, samples })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn len(&self) -> usize {
        self.samples
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn span(&self) -> f64 {
        self.end - self.start
    }

    pub fn step(&self) -> f64 {
        self.span() / (self.samples - 1) as f64
    }

    /// λₖ; the last sample is exactly `end`.
    pub fn value(&self, k: usize) -> f64 {
        if k + 1 == self.samples {
            self.end
        } else {
            self.start + k as f64 * self.step()
        }
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples).map(move |k| self.value(k))
    }
}

pub type GeneratorFn = dyn Fn(f64) -> Result<HermitianGenerator> + Send + Sync;

/// The generator a path was propagated with.
#[derive(Clone)]
pub enum Generator {
    Constant(Arc<HermitianGenerator>),
    Parametric(Arc<GeneratorFn>),
}

impl Generator {
    pub fn parametric<F>(f: F) -> Self
    where
        F: Fn(f64) -> Result<HermitianGenerator> + Send + Sync + 'static,
    {
        Self::Parametric(Arc::new(f))
    }

    pub fn at(&self, lambda: f64) -> Result<Arc<HermitianGenerator>> {
        match self {
            Self::Constant(a) => Ok(Arc::clone(a)),
            Self::Parametric(f) => f(lambda).map(Arc::new),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Self::Constant(_))
    }
}

impl From<HermitianGenerator> for Generator {
    fn from(a: HermitianGenerator) -> Self {
        Self::Constant(Arc::new(a))
    }
}

impl From<Arc<HermitianGenerator>> for Generator {
    fn from(a: Arc<HermitianGenerator>) -> Self {
        Self::Constant(a)
    }
}

impl fmt::Debug for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(a) => f.debug_tuple("Constant").field(&a.dim()).finish(),
            Self::Parametric(_) => f.write_str("Parametric(..)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Propagation {
    Spectral,
    Ode,
}

/// Phase convention of the stored samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gauge {
    /// As produced by the evolution equation.
    Dynamical,
    /// Dynamical phase removed: ⟨ψ̄|dψ̄/dλ⟩ = 0.
    ParallelTransported,
}

/// Sampled curve λ ↦ |ψ(λ)⟩ together with how it was produced.
#[derive(Debug, Clone)]
pub struct EvolutionPath {
    grid: ParameterGrid,
    states: Vec<QuantumState>,
    generator: Generator,
    units: Units,
    method: Propagation,
    gauge: Gauge,
    max_norm_drift: f64,
}

impl EvolutionPath {
    /// Assembles a path from externally computed samples.
    pub fn from_states(
        grid: ParameterGrid,
        states: Vec<QuantumState>,
        generator: Generator,
        units: Units,
        method: Propagation,
        gauge: Gauge,
    ) -> Result<Self> {
        if states.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} states for {} grid samples",
                states.len(),
                grid.len()
            )));
        }
        let dim = states[0].dim();
        if let Some(bad) = states.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        Ok(Self {
            grid,
            states,
            generator,
            units,
            method,
            gauge,
            max_norm_drift: 0.0,
        })
    }

    pub fn grid(&self) -> &ParameterGrid {
        &self.grid
    }

    pub fn states(&self) -> &[QuantumState] {
        &self.states
    }

    pub fn first(&self) -> &QuantumState {
        &self.states[0]
    }

    pub fn last(&self) -> &QuantumState {
        &self.states[self.states.len() - 1]
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn units(&self) -> Units {
        self.units
    }

    pub fn method(&self) -> Propagation {
        self.method
    }

    pub fn gauge(&self) -> Gauge {
        self.gauge
    }

    /// Largest norm drift removed by renormalization (zero for spectral paths).
    pub fn max_norm_drift(&self) -> f64 {
        self.max_norm_drift
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Multiplies sample k by e^{iθₖ}. The result is tagged as dynamical
    /// gauge since arbitrary phases break parallel transport.
    pub fn with_phases(&self, phases: &[f64]) -> Result<Self> {
        if phases.len() != self.len() {
            return Err(Error::InvalidArgument(format!(
                "{} phases for {} samples",
                phases.len(),
                self.len()
            )));
        }
        let states = self
            .states
            .iter()
            .zip(phases)
            .map(|(s, &theta)| s.rephased(theta))
            .collect();
        Ok(self.with_states(states, Gauge::Dynamical))
    }

    pub(crate) fn with_states(&self, states: Vec<QuantumState>, gauge: Gauge) -> Self {
        Self {
            states,
            gauge,
            ..self.clone()
        }
    }
}

fn check_initial(a_dim: usize, psi0: &QuantumState) -> Result<()> {
    if psi0.dim() != a_dim {
        return Err(Error::DimensionMismatch {
            expected: a_dim,
            found: psi0.dim(),
        });
    }
    Ok(())
}

/// exp(−iAλ/ħ)|ψ₀⟩ = Σᵢ e^{−iaᵢλ/ħ} ⟨ψᵢ|ψ₀⟩ |ψᵢ⟩.
pub fn evolve_exact(
    a: &HermitianGenerator,
    psi0: &QuantumState,
    lambda: f64,
    units: Units,
) -> Result<QuantumState> {
    check_initial(a.dim(), psi0)?;
    if !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("lambda = {lambda}")));
    }
    if lambda == 0.0 {
        return Ok(psi0.clone());
    }
    let spectrum = a.eigendecompose()?;
    let coeffs = spectrum.vectors().adjoint() * psi0.as_vector();
    Ok(propagate_coefficients(spectrum, &coeffs, lambda, units))
}

fn propagate_coefficients(
    spectrum: &Spectrum,
    coeffs: &DVector<C64>,
    lambda: f64,
    units: Units,
) -> QuantumState {
    let phased = DVector::from_iterator(
        coeffs.len(),
        coeffs
            .iter()
            .zip(spectrum.values())
            .map(|(c, &ak)| c * C64::from_polar(1.0, -ak * lambda / units.hbar())),
    );
    QuantumState::from_vector_unchecked(spectrum.vectors() * phased)
}

/// Samples the exact evolution at every grid point.
pub fn sample_path(
    a: Arc<HermitianGenerator>,
    psi0: &QuantumState,
    grid: ParameterGrid,
    units: Units,
) -> Result<EvolutionPath> {
    check_initial(a.dim(), psi0)?;
    let origin = grid.start();
    let spectrum = a.eigendecompose()?;
    let coeffs = spectrum.vectors().adjoint() * psi0.as_vector();
    let states = grid
        .values()
        .map(|lambda| {
            if lambda == origin {
                psi0.clone()
            } else {
                propagate_coefficients(spectrum, &coeffs, lambda - origin, units)
            }
        })
        .collect();
    EvolutionPath::from_states(
        grid,
        states,
        Generator::Constant(a),
        units,
        Propagation::Spectral,
        Gauge::Dynamical,
    )
}

/// Classic fourth-order Runge-Kutta on the grid, ψ(grid.start) = ψ₀.
pub fn evolve_ode(
    generator: Generator,
    psi0: &QuantumState,
    grid: ParameterGrid,
    units: Units,
) -> Result<EvolutionPath> {
    let h = grid.step();
    let scale = C64::new(0.0, -1.0 / units.hbar());
    let rhs = |a: &HermitianGenerator, psi: &DVector<C64>| (a.matrix() * psi) * scale;

    let mut a_left = generator.at(grid.start())?;
    check_initial(a_left.dim(), psi0)?;

    let mut states = Vec::with_capacity(grid.len());
    states.push(psi0.clone());
    let mut psi = psi0.as_vector().clone();
    let mut max_drift = 0.0_f64;

    for k in 1..grid.len() {
        let lambda = grid.value(k - 1);
        let a_mid = generator.at(lambda + 0.5 * h)?;
        let a_right = generator.at(grid.value(k))?;
        let half = C64::from(0.5 * h);
        let k1 = rhs(&a_left, &psi);
        let k2 = rhs(&a_mid, &(&psi + &k1 * half));
        let k3 = rhs(&a_mid, &(&psi + &k2 * half));
        let k4 = rhs(&a_right, &(&psi + &k3 * C64::from(h)));
        psi += (k1 + k2 * C64::from(2.0) + k3 * C64::from(2.0) + k4) * C64::from(h / 6.0);

        let norm = psi.norm();
        if !norm.is_finite() {
            return Err(Error::NonFinite);
        }
        let drift = (norm - 1.0).abs();
        if drift > MAX_STEP_DRIFT {
            return Err(Error::StepTooCoarse {
                drift,
                limit: MAX_STEP_DRIFT,
                required_samples: required_samples(grid, drift),
            });
        }
        max_drift = max_drift.max(drift);
        psi.unscale_mut(norm);
        states.push(QuantumState::from_vector_unchecked(psi.clone()));
        a_left = a_right;
    }

    let mut path =
        EvolutionPath::from_states(grid, states, generator, units, Propagation::Ode, Gauge::Dynamical)?;
    path.max_norm_drift = max_drift;
    Ok(path)
}

// Local RK4 error scales as h^5; aim for half the drift limit.
fn required_samples(grid: ParameterGrid, drift: f64) -> usize {
    let shrink = (0.5 * MAX_STEP_DRIFT / drift).powf(0.2);
    let h_new = grid.step() * shrink;
    (grid.span() / h_new).ceil() as usize + 1
}
