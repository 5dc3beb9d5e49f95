use oqs_core::gksl::{dissipator, GKSLGenerator};
use oqs_core::liouville::{c64, hamiltonian_superop, ops, trace_norm, unit, DensityMatrix, Operator, Superoperator};
use oqs_core::random::{random_density_matrix, random_hermitian, seeded};
use oqs_core::spectra::*;
use proptest::prelude::*;

fn damped_qubit(gamma: f64, nbar: f64, omega: f64) -> Superoperator {
    &(&hamiltonian_superop(&(ops::pauli_z() * c64(omega / 2.0, 0.0)))
        + &dissipator(gamma * (nbar + 1.0), &ops::sigma_minus()))
        + &dissipator(gamma * nbar, &ops::sigma_plus())
}

#[test]
fn damped_qubit_analytic_spectrum() {
    let (g, w) = (0.3, 1.7);
    let rep = liouvillian_spectrum(&damped_qubit(g, 0.0, w), TOL_ZERO).unwrap();
    let want = [c64(-g, 0.0), c64(-g / 2.0, -w), c64(-g / 2.0, w), c64(0.0, 0.0)];
    for (a, b) in rep.eigenvalues.iter().zip(&want) {
        assert!((a - b).norm() <= 1e-12, "{a} vs {b}");
    }
    assert_eq!(rep.zero_multiplicity, 1);
    assert!((rep.spectral_gap - g / 2.0).abs() <= 1e-12);
}

#[test]
fn relaxing_verdict_agrees_with_long_time_evolution() {
    let mut rng = seeded(17, 0);
    let mut checked = 0;
    for k in 0..20 {
        let n = 2 + k % 2;
        let gen = GKSLGenerator::random(n, 2, 1.0, &mut rng);
        let l = gen.superop();
        let v = is_relaxing(&l, TOL_ZERO).unwrap();
        if !v.verdict {
            continue;
        }
        checked += 1;
        let ss = steady_states(&l, TOL_ZERO).unwrap();
        assert_eq!(ss.states.len(), 1);
        let prop = l.exp_t(20.0 / v.spectral_gap).unwrap();
        for _ in 0..10 {
            let rho0 = random_density_matrix(n, &mut rng);
            let d = trace_norm(&(prop.apply(rho0.op()) - ss.states[0].op())).unwrap();
            assert!(d <= 1e-6, "{d:e}");
        }
    }
    assert!(checked >= 15);
}

#[test]
fn spohn_guarantee_implies_relaxing() {
    let mut rng = seeded(3, 0);
    for n in [2, 3, 4] {
        for _ in 0..5 {
            let a = oqs_core::random::ginibre(n, n, &mut rng);
            let jumps = vec![a.clone(), a.adjoint()];
            let rep = spohn_check(&jumps).unwrap();
            assert!(rep.self_adjoint_set);
            assert!(rep.relaxing_guaranteed);
            let h = random_hermitian(n, &mut rng);
            let l = &hamiltonian_superop(&h) + &(&dissipator(1.0, &jumps[0]) + &dissipator(1.0, &jumps[1]));
            assert!(is_relaxing(&l, TOL_ZERO).unwrap().verdict);
        }
    }
}

#[test]
fn unique_pure_steady_state_attracts() {
    // Cascade |2⟩ → |1⟩ → |0⟩ into a pure ground state.
    let mut rng = seeded(8, 0);
    let h = Operator::from_diagonal(&nalgebra::DVector::from_vec(vec![
        c64(0.0, 0.0),
        c64(1.0, 0.0),
        c64(2.3, 0.0),
    ]));
    let l = &(&hamiltonian_superop(&h) + &dissipator(0.5, &unit(3, 0, 1))) + &dissipator(0.8, &unit(3, 1, 2));
    let v = is_relaxing(&l, TOL_ZERO).unwrap();
    assert!(v.verdict);
    let ss = steady_states(&l, TOL_ZERO).unwrap();
    assert!((ss.states[0].op() - unit(3, 0, 0)).norm() <= 1e-10);
    let prop = l.exp_t(20.0 / v.spectral_gap).unwrap();
    for _ in 0..10 {
        let rho0 = random_density_matrix(3, &mut rng);
        assert!(trace_norm(&(prop.apply(rho0.op()) - unit(3, 0, 0))).unwrap() <= 1e-6);
    }
}

#[test]
fn ergodic_average_of_precession_matches_time_average() {
    let w = 1.3;
    let l = hamiltonian_superop(&(ops::pauli_z() * c64(w / 2.0, 0.0)));
    let mut rng = seeded(1, 0);
    let rho0 = random_density_matrix(2, &mut rng);
    let avg = ergodic_average(&l, &rho0).unwrap();
    // Time average over T = 10³/ω by the midpoint rule.
    let t_end = 1e3 / w;
    let steps = 200_000;
    let dt = t_end / steps as f64;
    let mut acc = Operator::zeros(2, 2);
    let step = l.exp_t(dt).unwrap();
    let mut rho = l.exp_t(dt / 2.0).unwrap().apply(rho0.op());
    for _ in 0..steps {
        acc += &rho * c64(dt / t_end, 0.0);
        rho = step.apply(&rho);
    }
    assert!((avg.op() - &acc).norm() <= 1e-3);
    assert!(avg.op()[(0, 1)].norm() <= 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn valid_generators_have_contractive_spectra(seed in any::<u64>(), n in 2usize..=4) {
        let mut rng = seeded(seed, 0);
        let gen = GKSLGenerator::random(n, 2, 1.0, &mut rng);
        let rep = liouvillian_spectrum(&gen.superop(), TOL_ZERO).unwrap();
        prop_assert!(rep.max_real_part() <= 1e-10 * rep.norm);
        prop_assert!(rep.zero_multiplicity >= 1);
    }

    #[test]
    fn ergodic_average_is_steady(seed in any::<u64>(), n in 2usize..=3) {
        let mut rng = seeded(seed, 0);
        let gen = GKSLGenerator::random(n, 2, 1.0, &mut rng);
        let l = gen.superop();
        let rho0 = random_density_matrix(n, &mut rng);
        let avg = ergodic_average(&l, &rho0).unwrap();
        prop_assert!(trace_norm(&l.apply(avg.op())).unwrap() <= 1e-8);
        prop_assert!(DensityMatrix::with_tolerance(avg.op().clone(), 1e-8, 1e-8).is_ok());
    }
}
