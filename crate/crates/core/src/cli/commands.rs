use std::f64::consts::TAU;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{Ensemble, Kind, RunConfig};
use super::report::{
    Check, FamilyResult, Report, Summary, SweepResult, TraceRow, TrialResult, SCHEMA_VERSION,
};
use crate::algebra::{HermitianGenerator, QuantumState, Units};
use crate::error::{Error, Result};
use crate::evolution::{evolve_ode, sample_path, EvolutionPath, ParameterGrid, Propagation};
use crate::geometry::{
    self, bargmann_angle, cumulative_fs_length, fidelity, fubini_study_length, uncertainty_profile,
};
use crate::intelligent::{
    horesh_mann_family, nonorthogonal_family, verify_theorem, FamilyKind, IntelligentFamily,
    SplitGeneratorSpec, GREAT_CIRCLE_TOLERANCE, TRANSPORT_TOLERANCE,
};
use crate::pbur::{evaluate_pbur, saturation_tolerance};
use crate::random::{gaussian_hermitian, random_state};

/// Largest tolerated S₀ − S in sweeps and traces.
pub const SWEEP_TOLERANCE: f64 = 1e-6;
/// Largest tolerated |S − S₀| on geodesic sweep trials.
pub const GEODESIC_TOLERANCE: f64 = 1e-9;
/// Relative tolerance on ΔA being constant along a family.
pub const UNCERTAINTY_TOLERANCE: f64 = 1e-10;

fn report(
    config: &RunConfig,
    checks: Vec<Check>,
    worst_ratio: Option<f64>,
    max_residual: Option<f64>,
) -> Report {
    Report {
        schema_version: SCHEMA_VERSION,
        command: config.command.as_str().to_string(),
        config: config.clone(),
        summary: Summary {
            pass: checks.iter().all(|c| c.pass),
            worst_ratio,
            max_residual,
        },
        checks,
        families: Vec::new(),
        sweep: None,
        trace: Vec::new(),
    }
}

fn propagate(
    generator: Arc<HermitianGenerator>,
    start: &QuantumState,
    grid: ParameterGrid,
    units: Units,
    method: Propagation,
) -> Result<EvolutionPath> {
    match method {
        Propagation::Spectral => sample_path(generator, start, grid, units),
        Propagation::Ode => evolve_ode(generator.into(), start, grid, units),
    }
}

fn orthogonal(config: &RunConfig) -> Result<IntelligentFamily> {
    let a = Arc::new(HermitianGenerator::diagonal(&config.spectrum)?);
    horesh_mann_family(a, config.i, config.j, config.units(), &config.tolerances)
}

fn nonorthogonal(config: &RunConfig) -> Result<IntelligentFamily> {
    let spec = SplitGeneratorSpec::standard(config.dimension, config.i, config.j, config.a0, config.a1);
    nonorthogonal_family(&spec, config.units(), &config.tolerances)
}

fn family_lambda2(config: &RunConfig, family: &IntelligentFamily) -> f64 {
    config.lambda2.unwrap_or_else(|| {
        let orth = family.orthogonality_parameter();
        match family.kind() {
            FamilyKind::Orthogonal => orth,
            FamilyKind::Nonorthogonal => 0.5 * orth,
        }
    })
}

fn run_family(config: &RunConfig, family: &IntelligentFamily) -> Result<(FamilyResult, Vec<Check>)> {
    let tol = &config.tolerances;
    let lambda2 = family_lambda2(config, family);
    let grid = ParameterGrid::new(config.lambda1, lambda2, config.samples)?;
    let theorem = verify_theorem(family, grid, tol)?;
    let path = family.path(grid)?;
    let pbur = evaluate_pbur(&path, tol)?;
    let geometry = geometry::analyze(&path, tol)?;
    let expected = family.uncertainty();
    let max_uncertainty_deviation = uncertainty_profile(&path)?
        .iter()
        .map(|d| (d - expected).abs())
        .fold(0.0, f64::max);

    let name = |check: &str| format!("{}.{check}", family.kind().name());
    let (factor_dev, factor_tol) = geometry.factor_identity();
    let uncertainty_tol = UNCERTAINTY_TOLERANCE * expected.max(1.0);
    let mut checks = vec![
        Check::new(
            name("saturation"),
            pbur.ratio,
            pbur.saturation_tolerance,
            pbur.saturated,
        ),
        Check::new(
            name("geodesic_residual"),
            theorem.residual_max,
            theorem.residual_threshold,
            theorem.residual_ok,
        ),
        Check::new(
            name("gram_rank"),
            theorem.rank as f64,
            tol.rank_cutoff,
            theorem.rank_ok,
        ),
        Check::new(
            name("great_circle_deviation"),
            theorem.great_circle_deviation,
            GREAT_CIRCLE_TOLERANCE,
            theorem.great_circle_match,
        ),
    ];
    if let Some(d) = theorem.frame_deviation {
        checks.push(Check::new(
            name("frame_deviation"),
            d,
            GREAT_CIRCLE_TOLERANCE,
            theorem.frame_ok,
        ));
    }
    checks.extend([
        Check::new(
            name("transport_defect"),
            theorem.transport_defect,
            TRANSPORT_TOLERANCE,
            theorem.transport_ok,
        ),
        Check::new(
            name("factor_identity"),
            factor_dev,
            factor_tol,
            factor_dev <= factor_tol,
        ),
        Check::new(
            name("constant_uncertainty"),
            max_uncertainty_deviation,
            uncertainty_tol,
            max_uncertainty_deviation <= uncertainty_tol,
        ),
    ]);
    let result = FamilyResult {
        kind: family.kind(),
        lambda1: config.lambda1,
        lambda2,
        orthogonality_parameter: family.orthogonality_parameter(),
        pbur,
        theorem,
        geometry,
        max_uncertainty_deviation,
    };
    Ok((result, checks))
}

pub fn verify_intelligent(config: &RunConfig) -> Result<Report> {
    let families = match config.kind {
        Kind::Orthogonal => vec![orthogonal(config)?],
        Kind::Nonorthogonal => vec![nonorthogonal(config)?],
        Kind::Both => vec![orthogonal(config)?, nonorthogonal(config)?],
        Kind::Stationary => {
            return Err(Error::InvalidArgument(
                "stationary kind is trace-path only".into(),
            ))
        }
    };
    let mut checks = Vec::new();
    let mut results = Vec::new();
    for family in &families {
        let (result, c) = run_family(config, family)?;
        checks.extend(c);
        results.push(result);
    }
    let worst_ratio = results
        .iter()
        .map(|r| r.pbur.ratio)
        .max_by(|a, b| (a - 1.0).abs().total_cmp(&(b - 1.0).abs()));
    let max_residual = results.iter().map(|r| r.theorem.residual_max).reduce(f64::max);
    let mut out = report(config, checks, worst_ratio, max_residual);
    out.families = results;
    Ok(out)
}

fn trial_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn run_trial(config: &RunConfig, index: usize) -> Result<TrialResult> {
    let mut rng = trial_rng(config.seed, index);
    let units = config.units();
    let tol = &config.tolerances;
    let dimension = rng.random_range(config.dimension..=config.dimension_max);
    let (generator, start, span) = match config.ensemble {
        Ensemble::Gaussian => {
            let a = gaussian_hermitian(&mut rng, dimension)?;
            let psi = random_state(&mut rng, dimension)?;
            // ΔA is conserved, so the span fixes S.
            let target = rng.random_range(0.1..=TAU);
            let span = target * units.hbar() / (2.0 * a.uncertainty(&psi)?);
            (Arc::new(a), psi, span)
        }
        Ensemble::Split => {
            let basis = gaussian_hermitian(&mut rng, dimension)?
                .eigendecompose()?
                .vectors()
                .clone();
            let i = rng.random_range(0..dimension);
            let j = (i + rng.random_range(1..dimension)) % dimension;
            let spec = SplitGeneratorSpec {
                dimension,
                basis: Some(basis),
                i,
                j,
                a0: rng.random_range(-2.0..=2.0),
                a1: rng.random_range(0.1..=2.0),
            };
            let family = nonorthogonal_family(&spec, units, tol)?;
            let span = rng.random_range(0.05..=0.95) * family.orthogonality_parameter();
            (Arc::clone(family.generator()), family.initial_state(), span)
        }
    };
    let grid = ParameterGrid::new(config.lambda1, config.lambda1 + span, config.samples)?;
    let path = propagate(generator, &start, grid, units, config.method.into())?;
    let s = fubini_study_length(&path)?;
    let s0 = bargmann_angle(path.first(), path.last())?;
    let ratio = match evaluate_pbur(&path, tol) {
        Ok(r) => Some(r.ratio),
        Err(Error::CoincidentEndpoints { .. }) => None,
        Err(e) => return Err(e),
    };
    let gap = s.value - s0;
    Ok(TrialResult {
        index,
        dimension,
        lambda2: grid.end(),
        fs_length: s.value,
        geodesic_distance: s0,
        gap,
        ratio,
        quadrature_error: s.error,
        violation: gap < -SWEEP_TOLERANCE,
    })
}

pub fn random_sweep(config: &RunConfig) -> Result<Report> {
    if config.trials == 0 {
        return Err(Error::InvalidArgument("--trials must be at least 1".into()));
    }
    // Each trial owns an RNG stream, so results do not depend on scheduling.
    let trials = std::thread::scope(|scope| {
        let workers = std::thread::available_parallelism()
            .map_or(1, |n| n.get())
            .min(config.trials);
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                scope.spawn(move || {
                    (w..config.trials)
                        .step_by(workers)
                        .map(|k| run_trial(config, k))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        let mut all: Vec<Result<TrialResult>> = Vec::with_capacity(config.trials);
        for h in handles {
            all.extend(h.join().expect("sweep worker panicked"));
        }
        all
    });
    let mut trials = trials.into_iter().collect::<Result<Vec<_>>>()?;
    trials.sort_by_key(|t| t.index);

    let mut gaps: Vec<f64> = trials.iter().map(|t| t.gap).collect();
    gaps.sort_by(f64::total_cmp);
    let n = gaps.len();
    let median_gap = if n % 2 == 1 {
        gaps[n / 2]
    } else {
        0.5 * (gaps[n / 2 - 1] + gaps[n / 2])
    };
    let (min_gap, max_gap) = (gaps[0], gaps[n - 1]);
    let violations = trials.iter().filter(|t| t.violation).count();
    let worst_ratio = trials.iter().filter_map(|t| t.ratio).reduce(f64::min);
    let sat_tol = saturation_tolerance(config.method.into(), &config.tolerances);

    let mut checks = vec![Check::new(
        "min_length_gap",
        min_gap,
        SWEEP_TOLERANCE,
        violations == 0,
    )];
    if let Some(r) = worst_ratio {
        checks.push(Check::new("ratio_floor", r, sat_tol, r >= 1.0 - sat_tol));
    }
    if config.ensemble == Ensemble::Split {
        let worst = trials.iter().map(|t| t.gap.abs()).fold(0.0, f64::max);
        checks.push(Check::new(
            "geodesic_gap",
            worst,
            GEODESIC_TOLERANCE,
            worst < GEODESIC_TOLERANCE,
        ));
    }
    let mut out = report(config, checks, worst_ratio, None);
    out.sweep = Some(SweepResult {
        trials: n,
        violations,
        min_gap,
        median_gap,
        max_gap,
        per_trial: trials,
    });
    Ok(out)
}

pub fn trace_path(config: &RunConfig) -> Result<Report> {
    let units = config.units();
    let (generator, start, default_end) = match config.kind {
        Kind::Orthogonal | Kind::Nonorthogonal => {
            let family = if config.kind == Kind::Orthogonal {
                orthogonal(config)?
            } else {
                nonorthogonal(config)?
            };
            let end = family_lambda2(config, &family);
            family.check_lambda(config.lambda1)?;
            family.check_lambda(end)?;
            (Arc::clone(family.generator()), family.state(config.lambda1), end)
        }
        Kind::Stationary => {
            let a = HermitianGenerator::diagonal(&config.spectrum)?;
            let psi = QuantumState::basis(a.dim(), config.i)?;
            (Arc::new(a), psi, config.lambda1 + 1.0)
        }
        Kind::Both => return Err(Error::InvalidArgument("trace-path needs a single --kind".into())),
    };
    let grid = ParameterGrid::new(
        config.lambda1,
        config.lambda2.unwrap_or(default_end),
        config.samples,
    )?;
    let path = propagate(generator, &start, grid, units, config.method.into())?;
    let delta = uncertainty_profile(&path)?;
    let cumulative = cumulative_fs_length(&path)?;
    let first = path.first();
    let rows = grid
        .values()
        .zip(path.states())
        .zip(delta.iter().zip(&cumulative))
        .map(|((lambda, psi), (&delta_a, &cumulative_s))| {
            Ok(TraceRow {
                lambda,
                delta_a,
                fidelity_to_start: fidelity(first, psi)?,
                cumulative_s,
                cumulative_s0_chord: bargmann_angle(first, psi)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let min_gap = rows
        .iter()
        .map(|r| r.cumulative_s - r.cumulative_s0_chord)
        .fold(f64::INFINITY, f64::min);
    let checks = vec![Check::new(
        "length_exceeds_chord",
        min_gap,
        SWEEP_TOLERANCE,
        min_gap >= -SWEEP_TOLERANCE,
    )];
    let mut out = report(config, checks, None, None);
    out.trace = rows;
    Ok(out)
}
