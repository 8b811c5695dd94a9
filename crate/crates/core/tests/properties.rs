use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use qgeo::evolution::Propagation;
use qgeo::geometry::{
    analyze, bargmann_angle, fubini_study_length, geodesic_curve, parallel_transport, subspace_rank,
    transported_length, uncertainty_profile,
};
use qgeo::intelligent::{horesh_mann_family, nonorthogonal_family, verify_theorem, SplitGeneratorSpec};
use qgeo::pbur::evaluate_pbur;
use qgeo::{
    evolve_exact, inner_product, sample_path, HermitianGenerator, ParameterGrid, QuantumState,
    ToleranceConfig, Units, C64,
};

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn amplitudes(dim: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), dim)
        .prop_map(|v| v.into_iter().map(|(re, im)| C64::new(re, im)).collect())
}

fn state_of(dim: usize) -> impl Strategy<Value = QuantumState> {
    amplitudes(dim).prop_filter_map("near-zero vector", |v| {
        let n: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        (n > 1e-2).then(|| QuantumState::normalized(v).unwrap())
    })
}

fn generator_of(dim: usize) -> impl Strategy<Value = HermitianGenerator> {
    amplitudes(dim * dim).prop_map(move |v| {
        let m = DMatrix::from_vec(dim, dim, v);
        HermitianGenerator::new((&m + m.adjoint()) * C64::from(0.5)).unwrap()
    })
}

/// Generator and state of the same random dimension.
fn system(
    dims: std::ops::RangeInclusive<usize>,
) -> impl Strategy<Value = (HermitianGenerator, QuantumState)> {
    dims.prop_flat_map(|d| (generator_of(d), state_of(d)))
}

fn close(a: &QuantumState, b: &QuantumState, eps: f64) -> bool {
    (a.as_vector() - b.as_vector()).norm() < eps
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn inner_product_conjugate_symmetry((a, b) in (2usize..7).prop_flat_map(|d| (state_of(d), state_of(d)))) {
        let ab = inner_product(&a, &b).unwrap();
        let ba = inner_product(&b, &a).unwrap();
        prop_assert!((ab - ba.conj()).norm() < 1e-15);
    }

    #[test]
    fn uncertainty_ignores_global_phase((a, psi) in system(2..=6), theta in -10.0..10.0f64) {
        let d0 = a.uncertainty(&psi).unwrap();
        let d1 = a.uncertainty(&psi.rephased(theta)).unwrap();
        prop_assert!((d0 - d1).abs() < 1e-13);
    }

    #[test]
    fn uncertainty_conserved_by_own_evolution((a, psi) in system(2..=6), lambda in -5.0..5.0f64) {
        let later = evolve_exact(&a, &psi, lambda, Units::default()).unwrap();
        let d = (a.uncertainty(&later).unwrap() - a.uncertainty(&psi).unwrap()).abs();
        prop_assert!(d < 1e-12, "{d}");
    }

    #[test]
    fn expectation_is_additive(
        (a, b, psi) in (2usize..7).prop_flat_map(|d| (generator_of(d), generator_of(d), state_of(d)))
    ) {
        let sum = a.sum(&b).unwrap();
        let lhs = sum.expectation(&psi).unwrap();
        let rhs = a.expectation(&psi).unwrap() + b.expectation(&psi).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-13);
    }

    #[test]
    fn overlap_depends_on_separation_only(
        (a, psi) in system(2..=6),
        l0 in -3.0..3.0f64,
        l1 in -3.0..3.0f64,
        sep in 0.0..3.0f64,
        hbar in 0.3..3.0f64,
    ) {
        let units = Units::new(hbar).unwrap();
        let at = |l: f64| evolve_exact(&a, &psi, l, units).unwrap();
        let f0 = inner_product(&at(l0), &at(l0 + sep)).unwrap().norm();
        let f1 = inner_product(&at(l1), &at(l1 + sep)).unwrap().norm();
        prop_assert!((f0 - f1).abs() < 1e-10);
    }

    #[test]
    fn evolution_composes((a, psi) in system(2..=6), l1 in -3.0..3.0f64, l2 in -3.0..3.0f64) {
        let units = Units::default();
        let two_step = evolve_exact(&a, &evolve_exact(&a, &psi, l1, units).unwrap(), l2, units).unwrap();
        let one_step = evolve_exact(&a, &psi, l1 + l2, units).unwrap();
        prop_assert!(close(&two_step, &one_step, 1e-10));
        prop_assert!((one_step.norm_squared() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uncertainty_constant_along_spectral_path((a, psi) in system(2..=6), span in 0.1..4.0f64) {
        let grid = ParameterGrid::new(0.0, span, 101).unwrap();
        let path = sample_path(Arc::new(a), &psi, grid, Units::default()).unwrap();
        let profile = uncertainty_profile(&path).unwrap();
        let drift = profile.iter().map(|d| (d - profile[0]).abs()).fold(0.0, f64::max);
        prop_assert!(drift <= 1e-12, "{drift}");
    }

    #[test]
    fn length_dominates_distance((a, psi) in system(4..=8), span in 0.05..3.0f64) {
        let grid = ParameterGrid::new(0.0, span, 401).unwrap();
        let path = sample_path(Arc::new(a), &psi, grid, Units::default()).unwrap();
        let s = fubini_study_length(&path).unwrap().value;
        let s0 = bargmann_angle(path.first(), path.last()).unwrap();
        prop_assert!(s >= s0 - 1e-6, "S = {s}, S0 = {s0}");
        let r = evaluate_pbur(&path, &tol()).unwrap();
        prop_assert!(r.product >= r.bound * (1.0 - 1e-9));
        if r.saturated {
            let g = analyze(&path, &tol()).unwrap();
            prop_assert!(g.residual_max < 1e-4 * g.speed * g.speed);
        }
    }

    #[test]
    fn lengths_and_rank_are_gauge_invariant(
        (a, psi) in system(2..=5),
        span in 0.1..3.0f64,
        phases in prop::collection::vec(-PI..PI, 201),
    ) {
        let grid = ParameterGrid::new(0.0, span, 201).unwrap();
        let path = sample_path(Arc::new(a), &psi, grid, Units::default()).unwrap();
        let twisted = path.with_phases(&phases).unwrap();
        let s = fubini_study_length(&path).unwrap().value;
        prop_assert!((s - fubini_study_length(&twisted).unwrap().value).abs() < 1e-12);
        let s0 = bargmann_angle(path.first(), path.last()).unwrap();
        prop_assert!((s0 - bargmann_angle(twisted.first(), twisted.last()).unwrap()).abs() < 1e-12);
        prop_assert_eq!(
            subspace_rank(&path, 1e-8).unwrap(),
            subspace_rank(&twisted, 1e-8).unwrap()
        );
    }

    #[test]
    fn length_is_twice_transported_length((a, psi) in system(2..=5), span in 0.1..3.0f64) {
        let grid = ParameterGrid::new(0.0, span, 401).unwrap();
        let path = sample_path(Arc::new(a), &psi, grid, Units::default()).unwrap();
        let g = analyze(&path, &tol()).unwrap();
        let (dev, bound) = g.factor_identity();
        prop_assert!(dev <= bound, "|S - 2l| = {dev:e} > {bound:e}");
        let bar = parallel_transport(&path).unwrap();
        prop_assert_eq!(transported_length(&bar).unwrap(), g.transported_length);
    }

    #[test]
    fn bargmann_triangle_inequality(
        (a, b, c) in (2usize..7).prop_flat_map(|d| (state_of(d), state_of(d), state_of(d)))
    ) {
        let ab = bargmann_angle(&a, &b).unwrap();
        let bc = bargmann_angle(&b, &c).unwrap();
        let ac = bargmann_angle(&a, &c).unwrap();
        prop_assert!(ac <= ab + bc + 1e-9);
        prop_assert!((0.0..=PI).contains(&ab));
    }

    #[test]
    fn geodesic_stays_in_its_plane(
        (origin, raw) in (2usize..7).prop_flat_map(|d| (state_of(d), amplitudes(d))),
        speed in 0.1..5.0f64,
        lambda in -10.0..10.0f64,
    ) {
        let raw = DVector::from_vec(raw);
        let o = origin.as_vector();
        let horiz = &raw - o * o.dotc(&raw);
        prop_assume!(horiz.norm() > 1e-3);
        let e = horiz.normalize();
        let point = geodesic_curve(&origin, &(&e * C64::from(speed)), speed, lambda, 1e-12).unwrap();
        let p = point.as_vector();
        let projected = o * o.dotc(p) + &e * e.dotc(p);
        prop_assert!((p - projected).norm() < 1e-12);
        prop_assert!((point.norm_squared() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ratio_scale_covariant((a, psi) in system(2..=5), span in 0.1..2.0f64, c in 0.2..5.0f64) {
        let units = Units::default();
        let scaled = a.scaled(c).unwrap();
        let p1 = sample_path(Arc::new(a), &psi, ParameterGrid::new(0.0, span, 201).unwrap(), units).unwrap();
        let p2 = sample_path(Arc::new(scaled), &psi, ParameterGrid::new(0.0, span / c, 201).unwrap(), units)
            .unwrap();
        let r1 = evaluate_pbur(&p1, &tol()).unwrap();
        let r2 = evaluate_pbur(&p2, &tol()).unwrap();
        prop_assert!((r1.ratio - r2.ratio).abs() < 1e-12 * r1.ratio);
        prop_assert!((r1.product - r2.product).abs() < 1e-12 * r1.product);
    }

    #[test]
    fn ratio_hbar_covariant((a, psi) in system(2..=5), span in 0.1..2.0f64, hbar in 0.2..5.0f64) {
        let a = Arc::new(a);
        let grid = |s: f64| ParameterGrid::new(0.0, s, 201).unwrap();
        let p1 = sample_path(Arc::clone(&a), &psi, grid(span), Units::default()).unwrap();
        let p2 = sample_path(a, &psi, grid(span * hbar), Units::new(hbar).unwrap()).unwrap();
        let r1 = evaluate_pbur(&p1, &tol()).unwrap();
        let r2 = evaluate_pbur(&p2, &tol()).unwrap();
        prop_assert!((r1.ratio - r2.ratio).abs() < 1e-12 * r1.ratio);
        prop_assert!((r2.bound - PI * hbar / 2.0).abs() < 1e-15 * hbar);
    }
}

fn split_spec() -> impl Strategy<Value = SplitGeneratorSpec> {
    (2usize..=8)
        .prop_flat_map(|n| (Just(n), 0..n, 1..n, -3.0..3.0f64, 0.1..3.0f64))
        .prop_map(|(n, i, shift, a0, a1)| SplitGeneratorSpec::standard(n, i, (i + shift) % n, a0, a1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn split_family_report_is_independent_of_endpoint(spec in split_spec(), hbar in 0.5..2.0f64) {
        let units = Units::new(hbar).unwrap();
        let family = nonorthogonal_family(&spec, units, &tol()).unwrap();
        let top = family.orthogonality_parameter();
        let reports: Vec<_> = (1..=10)
            .map(|k| {
                let grid = ParameterGrid::new(0.0, top * k as f64 / 11.0, 201).unwrap();
                evaluate_pbur(&family.path(grid).unwrap(), &tol()).unwrap()
            })
            .collect();
        for r in &reports {
            prop_assert!(r.saturated, "ratio {}", r.ratio);
            prop_assert!((r.avg_uncertainty - spec.a1).abs() < 1e-9 * spec.a1);
            prop_assert!((r.delta_lambda - PI * hbar / (2.0 * spec.a1)).abs() < 1e-9 * r.delta_lambda);
        }
    }

    #[test]
    fn family_amplitudes_are_normalized(spec in split_spec(), gap in 0.1..4.0f64, t in 0.0..1.0f64) {
        let units = Units::default();
        let split = nonorthogonal_family(&spec, units, &tol()).unwrap();
        let (ci, cj) = split.amplitudes(t * split.orthogonality_parameter());
        prop_assert!((ci.norm_sqr() + cj.norm_sqr() - 1.0).abs() < 1e-12);

        let a = Arc::new(HermitianGenerator::diagonal(&[0.0, gap]).unwrap());
        let orth = horesh_mann_family(a, 0, 1, units, &tol()).unwrap();
        let (ci, cj) = orth.amplitudes(t * orth.orthogonality_parameter());
        prop_assert!((ci.norm_sqr() + cj.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn closed_form_matches_spectral_oracle(spec in split_spec(), t in 0.0..1.0f64) {
        let family = nonorthogonal_family(&spec, Units::default(), &tol()).unwrap();
        let lambda = t * family.orthogonality_parameter();
        let evolved = evolve_exact(family.generator(), &family.initial_state(), lambda, Units::default()).unwrap();
        let (psi_i, psi_j) = family.basis_pair();
        let (ci, cj) = family.amplitudes(lambda);
        prop_assert!((psi_i.dotc(evolved.as_vector()) - ci).norm() < 1e-10);
        prop_assert!((psi_j.dotc(evolved.as_vector()) - cj).norm() < 1e-10);
    }

    #[test]
    fn orthogonal_family_saturates_on_whole_range(gap in 0.2..4.0f64, shift in -2.0..2.0f64, t in 0.05..1.0f64) {
        // Its endpoints sit on a great circle for every λ₂ up to orthogonality.
        let a = Arc::new(HermitianGenerator::diagonal(&[shift, shift + gap, shift + 2.5 * gap]).unwrap());
        let family = horesh_mann_family(a, 0, 1, Units::default(), &tol()).unwrap();
        let grid = ParameterGrid::new(0.0, t * family.orthogonality_parameter(), 401).unwrap();
        let r = evaluate_pbur(&family.path(grid).unwrap(), &tol()).unwrap();
        prop_assert!(r.saturated, "ratio {}", r.ratio);
    }

    #[test]
    fn verdicts_ignore_global_phase(spec in split_spec(), theta in -PI..PI) {
        let family = nonorthogonal_family(&spec, Units::default(), &tol()).unwrap();
        let grid = ParameterGrid::new(0.0, 0.7 * family.orthogonality_parameter(), 401).unwrap();
        let base = verify_theorem(&family, grid, &tol()).unwrap();
        let turned = verify_theorem(&family.rephased(theta), grid, &tol()).unwrap();
        prop_assert_eq!(base.pass, turned.pass);
        prop_assert_eq!(base.rank, turned.rank);
        let r0 = evaluate_pbur(&family.path(grid).unwrap(), &tol()).unwrap();
        let r1 = evaluate_pbur(&family.rephased(theta).path(grid).unwrap(), &tol()).unwrap();
        prop_assert_eq!(r0.saturated, r1.saturated);
        prop_assert!((r0.ratio - r1.ratio).abs() < 1e-12);
    }
}

#[test]
fn ode_and_spectral_paths_agree_on_pbur() {
    let a = Arc::new(HermitianGenerator::diagonal(&[-0.5, 0.2, 1.3]).unwrap());
    let psi =
        QuantumState::normalized(vec![C64::new(0.6, 0.1), C64::new(-0.2, 0.5), C64::from(0.4)]).unwrap();
    let grid = ParameterGrid::new(0.0, 2.0, 1001).unwrap();
    let spectral = sample_path(Arc::clone(&a), &psi, grid, Units::default()).unwrap();
    let ode = qgeo::evolve_ode(a.into(), &psi, grid, Units::default()).unwrap();
    assert_eq!(ode.method(), Propagation::Ode);
    let r1 = evaluate_pbur(&spectral, &tol()).unwrap();
    let r2 = evaluate_pbur(&ode, &tol()).unwrap();
    assert!((r1.ratio - r2.ratio).abs() < 1e-6);
    assert_eq!(r2.saturation_tolerance, tol().saturation_rel_ode);
}
