//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use qgeo::cli::{execute, Cli};
use qgeo::evolution::evolve_ode;
use qgeo::geometry::{analyze, fidelity, GeometryReport};
use qgeo::intelligent::{
    counterexample_three_level, horesh_mann_family, nonorthogonal_family, verify_theorem, IntelligentFamily,
    SplitGeneratorSpec,
};
use qgeo::pbur::evaluate_pbur;
use qgeo::random::gaussian_hermitian;
use qgeo::{evolve_exact, HermitianGenerator, ParameterGrid, ToleranceConfig, Units};

use clap::Parser;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SAMPLES: usize = 1001;
const TIME_LIMIT: Duration = Duration::from_secs(5);

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = fn(&mut Vec<GeometryReport>) -> Result<Outcome, String>;

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn random_split_spec(rng: &mut ChaCha8Rng) -> SplitGeneratorSpec {
    let n = [2, 4, 8][rng.random_range(0..3)];
    let i = rng.random_range(0..n);
    let j = (i + rng.random_range(1..n)) % n;
    SplitGeneratorSpec::standard(n, i, j, rng.random_range(-3.0..3.0), rng.random_range(0.1..3.0))
}

fn nonorthogonal_saturation(geometry: &mut Vec<GeometryReport>) -> Result<Outcome, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut paths = Vec::new();
    for _ in 0..20 {
        let spec = random_split_spec(&mut rng);
        let units = Units::new(rng.random_range(0.5..2.0)).map_err(|e| e.to_string())?;
        let family = nonorthogonal_family(&spec, units, &tol()).map_err(|e| e.to_string())?;
        let top = family.orthogonality_parameter();
        for _ in 0..10 {
            let l2 = top * rng.random_range(0.01..0.99);
            let grid = ParameterGrid::new(0.0, l2, SAMPLES).map_err(|e| e.to_string())?;
            let path = family.path(grid).map_err(|e| e.to_string())?;
            let r = evaluate_pbur(&path, &tol()).map_err(|e| e.to_string())?;
            worst = worst.max((r.ratio - 1.0).abs());
            paths.push(path);
        }
    }
    let elapsed = start.elapsed();
    for p in &paths {
        geometry.push(analyze(p, &tol()).map_err(|e| e.to_string())?);
    }
    Ok(Outcome {
        pass: worst < 1e-9 && elapsed < TIME_LIMIT,
        detail: format!(
            "200 paths, max |ratio - 1| = {worst:.2e}, {:.2}s",
            elapsed.as_secs_f64()
        ),
    })
}

fn orthogonal_saturation(geometry: &mut Vec<GeometryReport>) -> Result<Outcome, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let start = Instant::now();
    let (mut worst, mut worst_overlap) = (0.0f64, 0.0f64);
    let mut paths = Vec::new();
    for _ in 0..20 {
        let n = rng.random_range(2..=8);
        let a = Arc::new(gaussian_hermitian(&mut rng, n).map_err(|e| e.to_string())?);
        let i = rng.random_range(0..n);
        let j = (i + rng.random_range(1..n)) % n;
        let family = horesh_mann_family(a, i, j, Units::default(), &tol()).map_err(|e| e.to_string())?;
        let grid =
            ParameterGrid::new(0.0, family.orthogonality_parameter(), SAMPLES).map_err(|e| e.to_string())?;
        let path = family.path(grid).map_err(|e| e.to_string())?;
        let r = evaluate_pbur(&path, &tol()).map_err(|e| e.to_string())?;
        worst = worst.max((r.ratio - 1.0).abs());
        let overlap = fidelity(path.first(), path.last())
            .map_err(|e| e.to_string())?
            .sqrt();
        worst_overlap = worst_overlap.max(overlap);
        paths.push(path);
    }
    let elapsed = start.elapsed();
    for p in &paths {
        geometry.push(analyze(p, &tol()).map_err(|e| e.to_string())?);
    }
    Ok(Outcome {
        pass: worst < 1e-9 && worst_overlap < 1e-10 && elapsed < TIME_LIMIT,
        detail: format!(
            "20 pairs, max |ratio - 1| = {worst:.2e}, max overlap = {worst_overlap:.2e}, {:.2}s",
            elapsed.as_secs_f64()
        ),
    })
}

fn orthogonal_half_period(_: &mut Vec<GeometryReport>) -> Result<Outcome, String> {
    let a = Arc::new(HermitianGenerator::diagonal(&[1.0, 3.0]).map_err(|e| e.to_string())?);
    let family = horesh_mann_family(a, 0, 1, Units::default(), &tol()).map_err(|e| e.to_string())?;
    let l2 = 0.5 * family.orthogonality_parameter();
    let grid = ParameterGrid::new(0.0, l2, SAMPLES).map_err(|e| e.to_string())?;
    let path = family.path(grid).map_err(|e| e.to_string())?;
    let r = evaluate_pbur(&path, &tol()).map_err(|e| e.to_string())?;
    Ok(Outcome {
        pass: r.ratio >= 1.0 + 1e-3,
        detail: format!(
            "ratio = {:.15} at lambda2 = {l2:.6} (required >= 1.001); S = {:.12}, S0 = {:.12}",
            r.ratio, r.fs_length, r.geodesic_distance
        ),
    })
}

fn default_families() -> Result<Vec<(IntelligentFamily, f64)>, String> {
    let a = Arc::new(HermitianGenerator::diagonal(&[1.0, 3.0, 4.5]).map_err(|e| e.to_string())?);
    let orth = horesh_mann_family(a, 0, 1, Units::default(), &tol()).map_err(|e| e.to_string())?;
    let split = SplitGeneratorSpec::standard(4, 1, 3, 2.0, 1.0);
    let non = nonorthogonal_family(&split, Units::default(), &tol()).map_err(|e| e.to_string())?;
    let (l_orth, l_non) = (
        orth.orthogonality_parameter(),
        0.9 * non.orthogonality_parameter(),
    );
    Ok(vec![(orth, l_orth), (non, l_non)])
}

fn theorem_checks(geometry: &mut Vec<GeometryReport>) -> Result<Outcome, String> {
    let mut pass = true;
    let mut parts = Vec::new();
    for (family, l2) in default_families()? {
        let grid = ParameterGrid::new(0.0, l2, SAMPLES).map_err(|e| e.to_string())?;
        let t = verify_theorem(&family, grid, &tol()).map_err(|e| e.to_string())?;
        pass &= t.residual_max < 1e-5 && t.rank == 2 && t.great_circle_deviation < 1e-8;
        parts.push(format!(
            "{}: residual {:.2e}, rank {}, great-circle deviation {:.2e}",
            family.kind().name(),
            t.residual_max,
            t.rank,
            t.great_circle_deviation
        ));
        geometry.push(
            analyze(&family.path(grid).map_err(|e| e.to_string())?, &tol()).map_err(|e| e.to_string())?,
        );
    }
    Ok(Outcome {
        pass,
        detail: parts.join("; "),
    })
}

fn variance_identity(_: &mut Vec<GeometryReport>) -> Result<Outcome, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let spec = SplitGeneratorSpec::standard(4, 0, 2, 1.3, 0.8);
    let family = nonorthogonal_family(&spec, Units::default(), &tol()).map_err(|e| e.to_string())?;
    let top = family.orthogonality_parameter();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let lambda = rng.random_range(0.0..top);
        let psi = evolve_exact(
            family.generator(),
            &family.initial_state(),
            lambda,
            Units::default(),
        )
        .map_err(|e| e.to_string())?;
        let d = family.generator().uncertainty(&psi).map_err(|e| e.to_string())?;
        worst = worst.max((d - spec.a1).abs());
    }
    Ok(Outcome {
        pass: worst < 1e-10,
        detail: format!("100 points, max |dA - a1| = {worst:.2e}"),
    })
}

fn amplitude_oracle(_: &mut Vec<GeometryReport>) -> Result<Outcome, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let spec = SplitGeneratorSpec::standard(3, 2, 0, -0.4, 1.7);
    let units = Units::new(0.9).map_err(|e| e.to_string())?;
    let family = nonorthogonal_family(&spec, units, &tol()).map_err(|e| e.to_string())?;
    let top = family.orthogonality_parameter();
    let (psi_i, psi_j) = family.basis_pair();
    let psi0 = family.initial_state();
    let mismatch = |lambda: f64, v: &nalgebra::DVector<qgeo::C64>| {
        let (ci, cj) = family.amplitudes(lambda);
        (psi_i.dotc(v) - ci).norm().max((psi_j.dotc(v) - cj).norm())
    };
    let mut spectral: f64 = 0.0;
    for _ in 0..100 {
        let lambda = rng.random_range(0.0..top);
        let psi = evolve_exact(family.generator(), &psi0, lambda, units).map_err(|e| e.to_string())?;
        spectral = spectral.max(mismatch(lambda, psi.as_vector()));
    }
    let grid = ParameterGrid::new(0.0, 0.99 * top, SAMPLES).map_err(|e| e.to_string())?;
    let ode =
        evolve_ode(Arc::clone(family.generator()).into(), &psi0, grid, units).map_err(|e| e.to_string())?;
    let ode_err = grid
        .values()
        .zip(ode.states())
        .map(|(l, s)| mismatch(l, s.as_vector()))
        .fold(0.0, f64::max);
    Ok(Outcome {
        pass: spectral < 1e-10 && ode_err < 1e-6,
        detail: format!("spectral max error {spectral:.2e}, RK4 (1001 nodes) max error {ode_err:.2e}"),
    })
}

fn sweep(args: &[&str]) -> Result<qgeo::cli::Report, String> {
    let cli = Cli::try_parse_from(args).map_err(|e| e.to_string())?;
    execute(&cli).map_err(|e| e.to_string())
}

fn global_inequality(_: &mut Vec<GeometryReport>) -> Result<Outcome, String> {
    let gaussian = sweep(&[
        "qgeo",
        "random-sweep",
        "--trials",
        "100",
        "--dim",
        "4",
        "--dim-max",
        "8",
        "--seed",
        "42",
    ])?;
    let g = gaussian.sweep.ok_or("missing sweep")?;
    let geodesic = sweep(&[
        "qgeo",
        "random-sweep",
        "--trials",
        "100",
        "--dim",
        "2",
        "--dim-max",
        "8",
        "--ensemble",
        "split",
    ])?;
    let s = geodesic.sweep.ok_or("missing sweep")?;
    let worst_geodesic = s.per_trial.iter().map(|t| t.gap.abs()).fold(0.0, f64::max);
    Ok(Outcome {
        pass: g.violations == 0 && g.min_gap >= -1e-6 && worst_geodesic < 1e-9,
        detail: format!(
            "{} violations, min S - S0 = {:.2e}; geodesic trials max |S - S0| = {worst_geodesic:.2e}",
            g.violations, g.min_gap
        ),
    })
}

#[allow(clippy::ptr_arg)]
fn factor_identity(geometry: &mut Vec<GeometryReport>) -> Result<Outcome, String> {
    let failures = geometry
        .iter()
        .filter(|g| {
            let (dev, bound) = g.factor_identity();
            dev > bound
        })
        .count();
    let worst = geometry
        .iter()
        .map(|g| {
            let (dev, bound) = g.factor_identity();
            dev / bound
        })
        .fold(0.0, f64::max);
    Ok(Outcome {
        pass: failures == 0 && !geometry.is_empty(),
        detail: format!(
            "{} family paths, {failures} outside bound, worst |S - 2l| / bound = {worst:.3}",
            geometry.len()
        ),
    })
}

fn counterexample(_: &mut Vec<GeometryReport>) -> Result<Outcome, String> {
    let r = counterexample_three_level(1.0, Units::default(), &tol()).map_err(|e| e.to_string())?;
    let v2 = r.speed * r.speed;
    Ok(Outcome {
        pass: r.rank == 3 && r.residual_max > 0.1 * v2 && r.pbur.ratio > 1.0 + 1e-3,
        detail: format!(
            "lambda_min = {:.4}, rank {}, residual {:.3} vs 0.1 v^2 = {:.3}, ratio {:.4}",
            r.lambda_min,
            r.rank,
            r.residual_max,
            0.1 * v2,
            r.pbur.ratio
        ),
    })
}

fn determinism(_: &mut Vec<GeometryReport>) -> Result<Outcome, String> {
    let runs: [&[&str]; 3] = [
        &[
            "random-sweep",
            "--trials",
            "50",
            "--dim",
            "4",
            "--dim-max",
            "8",
            "--seed",
            "7",
        ],
        &["verify-intelligent", "--seed", "7"],
        &["trace-path", "--kind", "orthogonal", "--format", "csv"],
    ];
    let mut identical = 0;
    for args in runs {
        let bin = env!("CARGO_BIN_EXE_qgeo");
        let a = Command::new(bin).args(args).output().map_err(|e| e.to_string())?;
        let b = Command::new(bin).args(args).output().map_err(|e| e.to_string())?;
        if a.stdout == b.stdout && !a.stdout.is_empty() && a.status.code() == b.status.code() {
            identical += 1;
        }
    }
    Ok(Outcome {
        pass: identical == runs.len(),
        detail: format!(
            "{identical}/{} commands byte-identical across two runs",
            runs.len()
        ),
    })
}

fn main() {
    let criteria: [(&str, Criterion); 10] = [
        (
            "non-orthogonal family saturates the bound",
            nonorthogonal_saturation,
        ),
        (
            "orthogonal family saturates at orthogonality",
            orthogonal_saturation,
        ),
        (
            "orthogonal family off orthogonality exceeds the bound",
            orthogonal_half_period,
        ),
        ("transported families are geodesics in a 2-plane", theorem_checks),
        (
            "uncertainty equals a1 along the non-orthogonal family",
            variance_identity,
        ),
        ("closed-form amplitudes match propagation", amplitude_oracle),
        (
            "S >= S0 on random trials, equality on geodesics",
            global_inequality,
        ),
        ("S = 2 l within the quadrature estimate", factor_identity),
        ("three-level superposition is not intelligent", counterexample),
        ("reports are deterministic", determinism),
    ];
    let mut geometry = Vec::new();
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let (pass, detail) = match run(&mut geometry) {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {detail}",
            k + 1,
            if pass { "PASS" } else { "FAIL" }
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
