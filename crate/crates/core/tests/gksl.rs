use nalgebra::DMatrix;
use oqs_core::gksl::*;
use oqs_core::liouville::{c64, hs_basis, ops, trace, Operator};
use oqs_core::maps::{is_cp, is_trace_preserving, DynamicalMap, TOL_CP};
use oqs_core::random::{random_density_matrix, seeded};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn random_generators_give_cptp_propagators() {
    let mut rng = seeded(2024, 0);
    for n in [2, 3, 4] {
        for _ in 0..6 {
            let jumps = rng.random_range(1..=3);
            let gen = GKSLGenerator::random(n, jumps, 2.0, &mut rng);
            let l = superop_of_generator(&gen).unwrap();
            for tau in [1e-2, 1e-1, 1.0, 10.0] {
                let map = DynamicalMap::new(l.exp_t(tau).unwrap(), "semigroup");
                assert!(is_cp(&map, TOL_CP).verdict, "n = {n}, τ = {tau}");
                assert!(is_trace_preserving(&map, 1e-10));
            }
        }
    }
}

#[test]
fn kossakowski_conditions_hold_for_random_generators() {
    let mut rng = seeded(99, 0);
    for k in 0..50 {
        let n = 2 + k % 3;
        let gen = GKSLGenerator::random(n, 2, 1.0, &mut rng);
        let mut parts = vec![Partition::computational(n)];
        parts.extend((0..19).map(|_| Partition::random(n, &mut rng)));
        let report = check_kossakowski_conditions(&gen.superop(), &parts, 1e-10).unwrap();
        assert!(report.passed(), "generator {k}: {:?}", report.first_violation);
        assert!(report.max_column_sum <= 1e-10);
    }
}

#[test]
fn sign_flip_violates_diagonal_condition() {
    let l = dissipator(0.7, &ops::sigma_minus());
    let flipped = l.scale(-1.0);
    let report = check_kossakowski_conditions(&flipped, &[Partition::computational(2)], 1e-10).unwrap();
    assert!(matches!(
        report.first_violation,
        Some(KossakowskiViolation::Diagonal { .. })
    ));
}

#[test]
fn kolmogorov_exponentials_are_stochastic() {
    let mut rng = seeded(5, 0);
    for _ in 0..10 {
        let q = random_classical_generator(4, &mut rng);
        assert!(classical_generator_check(&q, 1e-12));
        for tau in [0.1, 1.0, 10.0] {
            let qc = q.map(|x| c64(x, 0.0)) * c64(tau, 0.0);
            let p = oqs_core::liouville::expm(&qc).unwrap();
            for i in 0..4 {
                let row: f64 = (0..4).map(|j| p[(i, j)].re).sum();
                assert!((row - 1.0).abs() <= 1e-12);
                assert!((0..4).all(|j| p[(i, j)].re >= -1e-12 && p[(i, j)].im.abs() <= 1e-12));
            }
        }
    }
    assert!(classical_generator_check(
        &DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, -1.0]),
        1e-12
    ));
    assert!(!classical_generator_check(
        &DMatrix::from_row_slice(2, 2, &[-1.0, -1.0, 2.0, 1.0]),
        1e-12
    ));
}

#[test]
fn negative_direction_in_kossakowski_matrix_is_diagnosed() {
    let basis = hs_basis(2).unwrap();
    let gen = GKSLGenerator::new(Operator::zeros(2, 2), vec![(1.0, ops::sigma_minus())]).unwrap();
    let mut kf = kossakowski_matrix(&gen, &basis).unwrap();
    kf.a[(2, 2)] = c64(-0.3, 0.0);
    match canonical_form(&kf) {
        CanonicalForm::NonGksl { min_eigenvalue, .. } => assert!((min_eigenvalue + 0.3).abs() <= 1e-12),
        CanonicalForm::Gksl(_) => panic!("negative direction accepted"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generators_annihilate_trace_and_preserve_hermiticity(seed in any::<u64>(), n in 2usize..=4) {
        let mut rng = seeded(seed, 0);
        let gen = GKSLGenerator::random(n, 2, 1.0, &mut rng);
        let l = gen.superop();
        for f in hs_basis(n).unwrap().elements() {
            prop_assert!(trace(&l.apply(f)).norm() <= 1e-10);
        }
        let sigma = oqs_core::random::ginibre(n, n, &mut rng);
        let lhs = l.apply(&sigma.adjoint());
        let rhs = l.apply(&sigma).adjoint();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + sigma.norm()));
        let rho = random_density_matrix(n, &mut rng);
        prop_assert!(trace(&l.apply(rho.op())).norm() <= 1e-12);
    }

    #[test]
    fn kossakowski_matrix_is_psd_and_reconstructs(seed in any::<u64>(), n in 2usize..=4) {
        let mut rng = seeded(seed, 0);
        let gen = GKSLGenerator::random(n, 3, 1.0, &mut rng);
        let basis = hs_basis(n).unwrap();
        let kf = kossakowski_matrix(&gen, &basis).unwrap();
        let top = kf.eigenvalues().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        prop_assert!(kf.eigenvalues().iter().all(|&x| x >= -1e-10 * top.max(1.0)));
        prop_assert!((kf.superop().matrix() - gen.superop().matrix()).norm() <= 1e-10);
    }

    #[test]
    fn canonical_form_preserves_superoperator(seed in any::<u64>(), n in 2usize..=4) {
        let mut rng = seeded(seed, 0);
        let gen = GKSLGenerator::random(n, 3, 1.0, &mut rng);
        let basis = hs_basis(n).unwrap();
        let kf = kossakowski_matrix(&gen, &basis).unwrap();
        let canon = canonical_form(&kf);
        let g2 = canon.generator().unwrap();
        prop_assert!((g2.superop().matrix() - gen.superop().matrix()).norm() <= 1e-10);
        let kf2 = kossakowski_matrix(g2, &basis).unwrap();
        for (a, b) in kf.eigenvalues().iter().zip(kf2.eigenvalues()) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
    }
}
