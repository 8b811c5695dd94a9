//! Intelligent states: state families whose evolution saturates the
//! parameter-based uncertainty relation.
//!
//! Two families are built here.
//!
//! * Orthogonal endpoints: the equal superposition of two eigenstates of a
//!   generator with non-degenerate eigenvalues aᵢ ≠ aⱼ,
//!   ψ(λ) = (e^{−iaᵢλ/ħ}|ψᵢ⟩ + e^{−iaⱼλ/ħ}|ψⱼ⟩)/√2, which reaches an
//!   orthogonal ray at λ = πħ/|aⱼ − aᵢ|.
//! * Non-orthogonal endpoints: a split generator A = a₀·I + a₁(|ψᵢ⟩⟨ψⱼ| + h.c.)
//!   started in |ψᵢ⟩, giving
//!   ψ(λ) = e^{−ia₀λ/ħ}(cos(a₁λ/ħ)|ψᵢ⟩ − i sin(a₁λ/ħ)|ψⱼ⟩) with ΔA = a₁.
//!
//! [`verify_theorem`] checks that the parallel-transported family obeys the
//! geodesic equation, stays in a two-dimensional subspace and matches the
//! closed-form great circle cos(vλ)ψ̄₀ + sin(vλ)/v·ψ̄̇₀.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::algebra::{HermitianGenerator, QuantumState, Split, ToleranceConfig, Units, C64};
use crate::error::{Error, Result};
use crate::evolution::{evolve_exact, sample_path, EvolutionPath, ParameterGrid};
use crate::geometry::{
    self, geodesic_residual, parallel_transport, subspace_rank, transport_defect, GeodesicFrame,
};
use crate::pbur::{evaluate_pbur, PburReport};

/// Largest allowed node deviation from the closed-form great circle.
pub const GREAT_CIRCLE_TOLERANCE: f64 = 1e-8;
/// Largest allowed |⟨ψ̄|dψ̄/dλ⟩| at interior nodes.
pub const TRANSPORT_TOLERANCE: f64 = 1e-6;
/// Minimum excess of the uncertainty product over the bound for a state
/// to count as clearly non-intelligent.
pub const NON_SATURATION_MARGIN: f64 = 1e-3;

/// Parameters of a split generator A₀ + A₁.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitGeneratorSpec {
    pub dimension: usize,
    /// Orthonormal basis {|ψₖ⟩} as columns; the standard basis when `None`.
    pub basis: Option<DMatrix<C64>>,
    pub i: usize,
    pub j: usize,
    pub a0: f64,
    pub a1: f64,
}

impl SplitGeneratorSpec {
    pub fn standard(dimension: usize, i: usize, j: usize, a0: f64, a1: f64) -> Self {
        Self {
            dimension,
            basis: None,
            i,
            j,
            a0,
            a1,
        }
    }

    fn resolved_basis(&self) -> Result<DMatrix<C64>> {
        let n = self.dimension;
        if n < 2 {
            return Err(Error::DimensionTooSmall(n));
        }
        if self.i == self.j || self.i >= n || self.j >= n {
            return Err(Error::InvalidSplit(format!(
                "indices i = {}, j = {} must be distinct and below {n}",
                self.i, self.j
            )));
        }
        if !(self.a1.is_finite() && self.a1 > 0.0) {
            return Err(Error::InvalidSplit(format!(
                "a1 must be positive, got {}",
                self.a1
            )));
        }
        if !self.a0.is_finite() {
            return Err(Error::InvalidSplit(format!("a0 = {}", self.a0)));
        }
        match &self.basis {
            None => Ok(DMatrix::identity(n, n)),
            Some(b) if b.shape() == (n, n) => Ok(b.clone()),
            Some(b) => Err(Error::InvalidSplit(format!(
                "basis is {}x{}, expected {n}x{n}",
                b.nrows(),
                b.ncols()
            ))),
        }
    }
}

/// A = a₀·I + a₁(|ψᵢ⟩⟨ψⱼ| + |ψⱼ⟩⟨ψᵢ|). A₁ has no entries outside the
/// (i, j) block, so the two-level dynamics is exact.
pub fn build_split_generator(spec: &SplitGeneratorSpec, tol: &ToleranceConfig) -> Result<HermitianGenerator> {
    let basis = spec.resolved_basis()?;
    let n = spec.dimension;
    let bi = basis.column(spec.i);
    let bj = basis.column(spec.j);
    let a0_part = DMatrix::<C64>::identity(n, n) * C64::from(spec.a0);
    let a1_part = (bi * bj.adjoint() + bj * bi.adjoint()) * C64::from(spec.a1);
    HermitianGenerator::from_split(
        Split {
            a0: spec.a0,
            a1: spec.a1,
            i: spec.i,
            j: spec.j,
            basis,
            a0_part,
            a1_part,
        },
        tol,
    )
}

/// ‖(1 − P)AP‖_F with P the projector onto span{|ψᵢ⟩, |ψⱼ⟩}: how strongly
/// A couples the two-level block to the rest of the space.
pub fn block_leakage(a: &HermitianGenerator, psi_i: &DVector<C64>, psi_j: &DVector<C64>) -> f64 {
    let n = a.dim();
    let p = psi_i * psi_i.adjoint() + psi_j * psi_j.adjoint();
    let q = DMatrix::<C64>::identity(n, n) - &p;
    (q * a.matrix() * p).norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Orthogonal,
    Nonorthogonal,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Orthogonal => "orthogonal",
            FamilyKind::Nonorthogonal => "nonorthogonal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Params {
    Orthogonal { a_i: f64, a_j: f64 },
    Nonorthogonal { a0: f64, a1: f64 },
}

/// One of the two intelligent-state families, up to a global U(1) phase.
#[derive(Debug, Clone)]
pub struct IntelligentFamily {
    params: Params,
    generator: Arc<HermitianGenerator>,
    units: Units,
    psi_i: DVector<C64>,
    psi_j: DVector<C64>,
    phase: f64,
}

/// Equal superposition of the eigenstates i and j (ascending eigenvalue
/// order) of `a`.
pub fn horesh_mann_family(
    a: Arc<HermitianGenerator>,
    i: usize,
    j: usize,
    units: Units,
    tol: &ToleranceConfig,
) -> Result<IntelligentFamily> {
    let spectrum = a.eigendecompose()?;
    let n = a.dim();
    if i == j || i >= n || j >= n {
        return Err(Error::InvalidArgument(format!(
            "eigenstate indices i = {i}, j = {j} must be distinct and below {n}"
        )));
    }
    let (a_i, a_j) = (spectrum.value(i), spectrum.value(j));
    if (a_j - a_i).abs() <= tol.herm * spectrum.spectral_norm().max(1.0) {
        return Err(Error::DegeneratePair { a_i, a_j });
    }
    let (psi_i, psi_j) = (spectrum.vector(i), spectrum.vector(j));
    Ok(IntelligentFamily {
        params: Params::Orthogonal { a_i, a_j },
        generator: a,
        units,
        psi_i,
        psi_j,
        phase: 0.0,
    })
}

/// The split-generator family started in |ψᵢ⟩.
pub fn nonorthogonal_family(
    spec: &SplitGeneratorSpec,
    units: Units,
    tol: &ToleranceConfig,
) -> Result<IntelligentFamily> {
    let generator = build_split_generator(spec, tol)?;
    let split = generator.split().expect("split generator keeps its parts");
    let psi_i = split.basis.column(spec.i).into_owned();
    let psi_j = split.basis.column(spec.j).into_owned();
    Ok(IntelligentFamily {
        params: Params::Nonorthogonal {
            a0: spec.a0,
            a1: spec.a1,
        },
        generator: Arc::new(generator),
        units,
        psi_i,
        psi_j,
        phase: 0.0,
    })
}

impl IntelligentFamily {
    pub fn kind(&self) -> FamilyKind {
        match self.params {
            Params::Orthogonal { .. } => FamilyKind::Orthogonal,
            Params::Nonorthogonal { .. } => FamilyKind::Nonorthogonal,
        }
    }

    pub fn generator(&self) -> &Arc<HermitianGenerator> {
        &self.generator
    }

    pub fn units(&self) -> Units {
        self.units
    }

    pub fn basis_pair(&self) -> (&DVector<C64>, &DVector<C64>) {
        (&self.psi_i, &self.psi_j)
    }

    /// The same family multiplied by e^{iθ}.
    pub fn rephased(&self, theta: f64) -> Self {
        Self {
            phase: self.phase + theta,
            ..self.clone()
        }
    }

    /// Closed-form amplitudes (cᵢ(λ), cⱼ(λ)) on |ψᵢ⟩, |ψⱼ⟩.
    pub fn amplitudes(&self, lambda: f64) -> (C64, C64) {
        let hbar = self.units.hbar();
        let global = C64::from_polar(1.0, self.phase);
        match self.params {
            Params::Orthogonal { a_i, a_j } => (
                global * C64::from_polar(FRAC_1_SQRT_2, -a_i * lambda / hbar),
                global * C64::from_polar(FRAC_1_SQRT_2, -a_j * lambda / hbar),
            ),
            Params::Nonorthogonal { a0, a1 } => {
                let dyn_phase = global * C64::from_polar(1.0, -a0 * lambda / hbar);
                let (s, c) = (a1 * lambda / hbar).sin_cos();
                (dyn_phase * c, dyn_phase * C64::new(0.0, -s))
            }
        }
    }

    /// Closed-form state at λ.
    pub fn state(&self, lambda: f64) -> QuantumState {
        let (ci, cj) = self.amplitudes(lambda);
        QuantumState::from_vector_unchecked(&self.psi_i * ci + &self.psi_j * cj)
    }

    pub fn initial_state(&self) -> QuantumState {
        self.state(0.0)
    }

    /// λ at which the family first reaches a ray orthogonal to its start.
    pub fn orthogonality_parameter(&self) -> f64 {
        let hbar = self.units.hbar();
        match self.params {
            Params::Orthogonal { a_i, a_j } => PI * hbar / (a_j - a_i).abs(),
            Params::Nonorthogonal { a1, .. } => PI * hbar / (2.0 * a1),
        }
    }

    /// Valid parameter range [0, max], open at the top for the
    /// non-orthogonal family.
    pub fn range(&self) -> (f64, f64, bool) {
        let open = self.kind() == FamilyKind::Nonorthogonal;
        (0.0, self.orthogonality_parameter(), open)
    }

    pub fn check_lambda(&self, lambda: f64) -> Result<()> {
        let (min, max, open_end) = self.range();
        let above = if open_end { lambda >= max } else { lambda > max };
        if !lambda.is_finite() || lambda < min || above {
            return Err(Error::OutOfRange {
                value: lambda,
                min,
                max,
                open_end,
                orthogonality: self.orthogonality_parameter(),
            });
        }
        Ok(())
    }

    /// ΔA/ħ, constant along the family.
    pub fn speed(&self) -> f64 {
        let hbar = self.units.hbar();
        match self.params {
            Params::Orthogonal { a_i, a_j } => (a_j - a_i).abs() / (2.0 * hbar),
            Params::Nonorthogonal { a1, .. } => a1 / hbar,
        }
    }

    /// ΔA along the family.
    pub fn uncertainty(&self) -> f64 {
        self.speed() * self.units.hbar()
    }

    /// Expected (ψ̄(0), ψ̄̇(0)/v) of the transported family, without the
    /// global phase.
    pub fn transport_frame(&self) -> (DVector<C64>, DVector<C64>) {
        let r = C64::from(FRAC_1_SQRT_2);
        let i = C64::new(0.0, 1.0);
        match self.params {
            Params::Orthogonal { a_i, a_j } => {
                let sign = (a_j - a_i).signum();
                (
                    (&self.psi_i + &self.psi_j) * r,
                    (&self.psi_i - &self.psi_j) * (i * r * sign),
                )
            }
            Params::Nonorthogonal { .. } => (self.psi_i.clone(), &self.psi_j * -i),
        }
    }

    /// Spectral propagation of the family over `grid`.
    pub fn path(&self, grid: ParameterGrid) -> Result<EvolutionPath> {
        self.check_lambda(grid.start())?;
        self.check_lambda(grid.end())?;
        let start = evolve_exact(&self.generator, &self.initial_state(), grid.start(), self.units)?;
        sample_path(Arc::clone(&self.generator), &start, grid, self.units)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub kind: FamilyKind,
    pub speed: f64,
    pub residual_max: f64,
    pub residual_threshold: f64,
    pub residual_ok: bool,
    pub rank: usize,
    pub rank_ok: bool,
    /// Max node distance between the transported samples and the great
    /// circle rebuilt from the first samples.
    pub great_circle_deviation: f64,
    pub great_circle_match: bool,
    /// Distance of the rebuilt (ψ̄₀, ψ̄̇₀/v) from the closed-form frame, modulo
    /// a global phase. Only computed when the grid starts at λ = 0.
    pub frame_deviation: Option<f64>,
    pub frame_ok: bool,
    pub transport_defect: f64,
    pub transport_ok: bool,
    pub pass: bool,
}

// Seven-point one-sided first derivative, O(h⁶).
const FORWARD_D1: [f64; 7] = [
    -49.0 / 20.0,
    6.0,
    -15.0 / 2.0,
    20.0 / 3.0,
    -15.0 / 4.0,
    6.0 / 5.0,
    -1.0 / 6.0,
];

fn initial_velocity(path: &EvolutionPath) -> DVector<C64> {
    let h = path.grid().step();
    let s = path.states();
    let mut d = DVector::<C64>::zeros(s[0].dim());
    for (w, psi) in FORWARD_D1.iter().zip(s) {
        d += psi.as_vector() * C64::from(*w / h);
    }
    d
}

/// Transported family obeys ψ̄'' + v²ψ̄ = 0, spans two dimensions and
/// coincides with cos(vλ)ψ̄₀ + sin(vλ)/v·ψ̄̇₀.
pub fn verify_theorem(
    family: &IntelligentFamily,
    grid: ParameterGrid,
    tol: &ToleranceConfig,
) -> Result<TheoremReport> {
    if grid.len() < FORWARD_D1.len() {
        return Err(Error::TooFewSamples {
            needed: FORWARD_D1.len(),
            got: grid.len(),
        });
    }
    let path = family.path(grid)?;
    let bar = parallel_transport(&path)?;
    let speed = family.speed();

    let residual_max = geodesic_residual(&bar, speed)?;
    // Stencil error grows like v⁴h²; at fixed sample count over a range
    // proportional to 1/v that is v².
    let residual_threshold = tol.residual_abs * speed.powi(2).max(1.0);
    let rank = subspace_rank(&bar, tol.rank_cutoff)?;
    let defect = transport_defect(&bar)?;

    let origin = bar.first().clone();
    let mut velocity = initial_velocity(&bar);
    let along = origin.as_vector().dotc(&velocity);
    velocity -= origin.as_vector() * along;
    let rebuilt_speed = velocity.norm();
    let frame = GeodesicFrame::new(origin.clone(), velocity, rebuilt_speed, tol.norm)?;
    let great_circle_deviation = grid
        .values()
        .zip(bar.states())
        .map(|(lambda, s)| (frame.at(lambda - grid.start()).as_vector() - s.as_vector()).norm())
        .fold(0.0, f64::max);

    let frame_deviation = (grid.start() == 0.0).then(|| {
        let (e0, e1) = family.transport_frame();
        let overlap = e0.dotc(origin.as_vector());
        let phase = overlap / overlap.norm();
        let d0 = (origin.as_vector() - &e0 * phase).norm();
        let d1 = (frame.velocity() / C64::from(rebuilt_speed) - &e1 * phase).norm();
        let dv = (rebuilt_speed - speed).abs() / speed;
        d0.max(d1).max(dv)
    });

    let residual_ok = residual_max < residual_threshold;
    let rank_ok = rank == 2;
    let great_circle_match = great_circle_deviation < GREAT_CIRCLE_TOLERANCE;
    let frame_ok = frame_deviation.is_none_or(|d| d < GREAT_CIRCLE_TOLERANCE);
    let transport_ok = defect < TRANSPORT_TOLERANCE;
    Ok(TheoremReport {
        kind: family.kind(),
        speed,
        residual_max,
        residual_threshold,
        residual_ok,
        rank,
        rank_ok,
        great_circle_deviation,
        great_circle_match,
        frame_deviation,
        frame_ok,
        transport_defect: defect,
        transport_ok,
        pass: residual_ok && rank_ok && great_circle_match && frame_ok && transport_ok,
    })
}

/// First local minimum of |⟨ψ₀|ψ(λ)⟩|² for λ > 0, as (λ, fidelity).
///
/// Scans the spectral fidelity on a uniform grid out to four times the
/// longest beat period, then bisects on the sign of its derivative inside
/// the bracketing cells.
pub fn first_fidelity_minimum(
    a: &HermitianGenerator,
    psi0: &QuantumState,
    units: Units,
) -> Result<(f64, f64)> {
    let spectrum = a.eigendecompose()?;
    let weights: Vec<f64> = (spectrum.vectors().adjoint() * psi0.as_vector())
        .iter()
        .map(|z| z.norm_sqr())
        .collect();
    let hbar = units.hbar();
    let fidelity = |lambda: f64| -> f64 {
        weights
            .iter()
            .zip(spectrum.values())
            .map(|(w, ak)| C64::from_polar(*w, -ak * lambda / hbar))
            .sum::<C64>()
            .norm_sqr()
    };

    let occupied: Vec<f64> = weights
        .iter()
        .zip(spectrum.values())
        .filter(|(w, _)| **w > 1e-14)
        .map(|(_, a)| *a)
        .collect();
    let smallest_gap = occupied
        .iter()
        .flat_map(|x| occupied.iter().map(move |y| (x - y).abs()))
        .filter(|g| *g > 1e-12)
        .fold(f64::INFINITY, f64::min);
    if !smallest_gap.is_finite() {
        return Err(Error::InvalidArgument(
            "state is stationary; fidelity has no minimum".into(),
        ));
    }

    const SCAN: usize = 20_000;
    let horizon = 4.0 * 2.0 * PI * hbar / smallest_gap;
    let step = horizon / SCAN as f64;
    let values: Vec<f64> = (0..=SCAN).map(|k| fidelity(k as f64 * step)).collect();
    let k = (1..SCAN)
        .find(|&k| values[k] < values[k - 1] && values[k] <= values[k + 1])
        .ok_or_else(|| Error::InvalidArgument("no fidelity minimum found".into()))?;

    // Bisect on d|g|²/dλ = 2 Re(conj(g)·g'), g(λ) = Σ wₖ e^{-iaₖλ/ħ}.
    let slope = |lambda: f64| -> f64 {
        let (g, dg) = weights.iter().zip(spectrum.values()).fold(
            (C64::from(0.0), C64::from(0.0)),
            |(g, dg), (w, ak)| {
                let term = C64::from_polar(*w, -ak * lambda / hbar);
                (g + term, dg + term * C64::new(0.0, -ak / hbar))
            },
        );
        2.0 * (g.conj() * dg).re
    };
    let (mut lo, mut hi) = ((k - 1) as f64 * step, (k + 1) as f64 * step);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);
    Ok((lambda, fidelity(lambda)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub spectrum: Vec<f64>,
    pub lambda_min: f64,
    pub fidelity_min: f64,
    pub pbur: PburReport,
    pub speed: f64,
    pub residual_max: f64,
    pub rank: usize,
    /// ratio > 1 + margin, residual > 0.1·v² somewhere, rank equal to the
    /// number of superposed levels.
    pub not_intelligent: bool,
}

/// Equal superposition of all eigenstates of diag(spectrum), evolved to the
/// first fidelity minimum over `samples` grid points.
pub fn equal_superposition_counterexample(
    spectrum: &[f64],
    samples: usize,
    units: Units,
    tol: &ToleranceConfig,
) -> Result<CounterexampleReport> {
    let a = Arc::new(HermitianGenerator::diagonal(spectrum)?);
    let n = spectrum.len();
    let psi = QuantumState::normalized(vec![C64::from(1.0); n])?;
    let (lambda_min, fidelity_min) = first_fidelity_minimum(&a, &psi, units)?;
    let grid = ParameterGrid::new(0.0, lambda_min, samples)?;
    let path = sample_path(Arc::clone(&a), &psi, grid, units)?;
    let pbur = evaluate_pbur(&path, tol)?;
    let bar = parallel_transport(&path)?;
    let speed = a.uncertainty(&psi)? / units.hbar();
    let residual_max = geodesic_residual(&bar, speed)?;
    let rank = subspace_rank(&bar, tol.rank_cutoff)?;
    Ok(CounterexampleReport {
        spectrum: spectrum.to_vec(),
        lambda_min,
        fidelity_min,
        not_intelligent: pbur.ratio > 1.0 + NON_SATURATION_MARGIN
            && residual_max > 0.1 * speed * speed
            && rank == n,
        pbur,
        speed,
        residual_max,
        rank,
    })
}

/// The three-level case with generator scale·diag(0, 1, 3).
pub fn counterexample_three_level(
    scale: f64,
    units: Units,
    tol: &ToleranceConfig,
) -> Result<CounterexampleReport> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "scale must be positive, got {scale}"
        )));
    }
    equal_superposition_counterexample(&[0.0, scale, 3.0 * scale], 1001, units, tol)
}

/// Geometry of a family path, for callers that want S, l and the Richardson
/// estimates alongside the theorem checks.
pub fn family_geometry(
    family: &IntelligentFamily,
    grid: ParameterGrid,
    tol: &ToleranceConfig,
) -> Result<geometry::GeometryReport> {
    geometry::analyze(&family.path(grid)?, tol)
}
