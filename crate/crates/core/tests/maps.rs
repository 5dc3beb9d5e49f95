use std::f64::consts::PI;

use oqs_core::gksl::{dissipator, GKSLGenerator};
use oqs_core::liouville::{c64, ops, Superoperator};
use oqs_core::maps::*;
use oqs_core::random::seeded;
use proptest::prelude::*;

/// Dephasing family with rate `γ(t) = cos t`: coherences decay by
/// `e^{−2 sin t}` under `γ(t)(σzρσz − ρ)`.
fn cos_rate_family(times: &[f64]) -> Vec<(f64, DynamicalMap)> {
    let d = dissipator(1.0, &ops::pauli_z());
    times
        .iter()
        .map(|&t| (t, DynamicalMap::new(d.exp_t(t.sin()).unwrap(), format!("t={t}"))))
        .collect()
}

#[test]
fn gksl_exponentials_are_cptp_and_contractive() {
    let mut rng = seeded(42, 0);
    for n in [2, 3] {
        for _ in 0..5 {
            let gen = GKSLGenerator::random(n, 2, 1.0, &mut rng);
            for tau in [0.1, 1.0, 10.0] {
                let map = DynamicalMap::new(gen.superop().exp_t(tau).unwrap(), "semigroup");
                assert!(is_cp(&map, TOL_CP).verdict);
                assert!(is_trace_preserving(&map, 1e-10));
                let c = contraction_check(&map, 300);
                assert!(c.verdict && c.max_ratio <= 1.0 + 1e-10, "{}", c.max_ratio);
            }
        }
    }
}

#[test]
fn semigroup_samples_are_divisible() {
    let mut rng = seeded(7, 0);
    let gen = GKSLGenerator::random(3, 3, 1.0, &mut rng);
    let l = gen.superop();
    let family: Vec<(f64, DynamicalMap)> = (0..=12)
        .map(|i| {
            let t = 0.25 * i as f64;
            (t, DynamicalMap::new(l.exp_t(t).unwrap(), "semigroup"))
        })
        .collect();
    let report = divisibility_witness(&family, TOL_CP).unwrap();
    assert!(report.markovian_on_grid);
    assert_eq!(report.intervals.len(), 12);
}

#[test]
fn cos_rate_family_fails_where_integral_decreases() {
    let times: Vec<f64> = (0..=40).map(|i| 0.1 * PI * i as f64 / 2.0).collect();
    let report = divisibility_witness(&cos_rate_family(&times), TOL_CP).unwrap();
    assert!(!report.markovian_on_grid);
    for r in &report.intervals {
        let decreasing = r.t_end.sin() < r.t_start.sin() - 1e-12;
        match r.status {
            IntervalStatus::NotCp { min_choi_eigenvalue } => {
                assert!(decreasing, "[{}, {}]", r.t_start, r.t_end);
                assert!(min_choi_eigenvalue < -1e-6);
                // Intermediate coherence factor e^{2(sin t₀ − sin t₁)} > 1.
                let grow = (2.0 * (r.t_start.sin() - r.t_end.sin())).exp();
                assert!((min_choi_eigenvalue - (1.0 - grow)).abs() <= 1e-10);
            }
            IntervalStatus::Cp { .. } => assert!(!decreasing),
            IntervalStatus::Inconclusive { .. } => panic!("family is invertible"),
        }
    }
}

#[test]
fn non_divisible_intermediate_map_expands_trace_norm() {
    let fam = cos_rate_family(&[2.0, 2.5]);
    let inv = invert_map(&fam[0].1, COND_THRESHOLD).unwrap();
    assert!(!inv.may_be_udm);
    let mid = fam[1].1.compose(&inv.map).unwrap();
    let c = contraction_check(&mid, 200);
    assert!(!c.verdict);
    let factor = (2.0 * (2.0f64.sin() - 2.5f64.sin())).exp();
    assert!((c.max_ratio - factor).abs() <= 1e-10, "{} vs {factor}", c.max_ratio);
}

#[test]
fn tensor_extension_keeps_cp() {
    let mut rng = seeded(1, 0);
    for n in [2, 3] {
        let ks = random_channel(n, 2, &mut rng);
        let map = map_from_kraus(&ks).unwrap();
        assert!(is_cp(&map, TOL_CP).verdict);
        let ext = map.tensor_identity(2);
        assert_eq!(ext.dim(), 2 * n);
        assert!(is_cp(&ext, TOL_CP).verdict);
        assert!(is_trace_preserving(&ext, 1e-10));
    }
    let t = DynamicalMap::transpose(2);
    assert!(!is_cp(&t, TOL_CP).verdict);
    assert!(!is_cp(&t.tensor_identity(2), TOL_CP).verdict);
}

#[test]
fn family_csv_round_trip_preserves_witness() {
    let times: Vec<f64> = (0..=10).map(|i| 0.4 * i as f64).collect();
    let fam = cos_rate_family(&times);
    let back = family_from_csv(&family_to_csv(&fam)).unwrap();
    assert_eq!(back.len(), fam.len());
    let a = divisibility_witness(&fam, TOL_CP).unwrap();
    let b = divisibility_witness(&back, TOL_CP).unwrap();
    assert_eq!(a.markovian_on_grid, b.markovian_on_grid);
    assert!((a.min_choi_eigenvalue().unwrap() - b.min_choi_eigenvalue().unwrap()).abs() <= 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn choi_is_linear(seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let mut rng = seeded(seed, 0);
        let e1 = map_from_kraus(&random_channel(3, 2, &mut rng)).unwrap();
        let e2 = map_from_kraus(&random_channel(3, 3, &mut rng)).unwrap();
        let lhs = choi_of(&e1.combine(a, &e2, b).unwrap());
        let rhs = choi_of(&e1).matrix() * c64(a, 0.0) + choi_of(&e2).matrix() * c64(b, 0.0);
        prop_assert!((lhs.matrix() - rhs).norm() <= 1e-12);
    }

    #[test]
    fn kraus_round_trip(seed in any::<u64>(), n in 2usize..=4, rank in 1usize..=4) {
        let mut rng = seeded(seed, 0);
        let map = map_from_kraus(&random_channel(n, rank, &mut rng)).unwrap();
        let ks = kraus_from_choi(&choi_of(&map), TOL_CP).unwrap();
        prop_assert!(ks.len() <= rank);
        prop_assert!(ks.completeness_defect() <= 1e-10);
        let back = map_from_kraus(&ks).unwrap();
        prop_assert!((back.sop().matrix() - map.sop().matrix()).norm() <= 1e-10);
    }

    #[test]
    fn cptp_implies_contraction(seed in any::<u64>(), n in 2usize..=3) {
        let mut rng = seeded(seed, 0);
        let map = map_from_kraus(&random_channel(n, n, &mut rng)).unwrap();
        prop_assert!(is_cp(&map, TOL_CP).verdict && is_trace_preserving(&map, 1e-10));
        prop_assert!(contraction_check(&map, 100).verdict);
    }

    #[test]
    fn unitary_maps_invert_to_unitary_maps(seed in any::<u64>()) {
        let mut rng = seeded(seed, 0);
        let u = oqs_core::random::random_unitary(3, &mut rng);
        let map = DynamicalMap::unitary(&u).unwrap();
        let inv = invert_map(&map, COND_THRESHOLD).unwrap();
        prop_assert!(inv.may_be_udm);
        prop_assert!(is_cp(&inv.map, TOL_CP).verdict);
        let prod = map.compose(&inv.map).unwrap();
        prop_assert!((prod.sop().matrix() - Superoperator::identity(3).matrix()).norm() <= 1e-10);
    }
}
