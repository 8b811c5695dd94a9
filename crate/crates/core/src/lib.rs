//! Fubini-Study geometry of parametric quantum evolution, the parameter-based
//! uncertainty relation ⟨ΔA⟩·Δλ ≥ h/4, and the state families that saturate it.
//!
//! Module map:
//!
//! * [`algebra`]: states, Hermitian generators, units and tolerances.
//! * [`evolution`]: spectral and Runge-Kutta propagation along λ.
//! * [`quadrature`]: Simpson/trapezoid integration with Richardson estimates.
//! * [`geometry`]: path length, Bargmann angle, parallel transport, geodesics.
//! * [`pbur`]: the uncertainty relation and its saturation verdict.
//! * [`intelligent`]: the saturating families and the checks built on them.
//! * [`random`]: seeded random generators and states.
//! * [`cli`]: the `qgeo` command-line harness.

pub mod algebra;
pub mod cli;
pub mod error;
pub mod evolution;
pub mod geometry;
pub mod intelligent;
pub mod pbur;
pub mod quadrature;
pub mod random;

pub use algebra::{inner_product, HermitianGenerator, QuantumState, Spectrum, ToleranceConfig, Units, C64};
pub use error::{Error, Result};
pub use evolution::{
    evolve_exact, evolve_ode, sample_path, EvolutionPath, Generator, ParameterGrid, Propagation,
};
