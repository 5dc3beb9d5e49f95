use nalgebra::DMatrix;
use oqs_core::liouville::*;
use oqs_core::random::{ginibre, random_density_matrix, random_hermitian, random_pure_state, random_unitary, seeded};
use proptest::prelude::*;

fn random_generator(n: usize, seed: u64) -> Superoperator {
    let mut rng = seeded(seed, 0);
    let m = ginibre(n * n, n * n, &mut rng) * c64(0.5, 0.0);
    Superoperator::new(m).unwrap()
}

#[test]
fn trace_norm_of_signed_pure_state_mixture() {
    let mut rng = seeded(3, 0);
    for _ in 0..10 {
        let p1 = random_pure_state(3, &mut rng);
        let p2 = random_pure_state(3, &mut rng);
        let s = (projector(&p1) - projector(&p2)) * c64(0.5, 0.0);
        let overlap = p2.dotc(&p1).norm_sqr();
        assert!((trace_norm(&s).unwrap() - (1.0 - overlap).sqrt()).abs() <= 1e-12);
    }
    assert!((trace_norm(&diag(&[3.0, -4.0])).unwrap() - 7.0).abs() <= 1e-13);
    let rho = random_density_matrix(4, &mut rng);
    assert!((trace_norm(rho.op()).unwrap() - 1.0).abs() <= 1e-12);
}

#[test]
fn trotter_error_halves_with_n() {
    for seed in 0..5 {
        let l1 = random_generator(2, 2 * seed);
        let l2 = random_generator(2, 2 * seed + 1);
        let exact = (&l1 + &l2).exp().unwrap();
        let err = |n: u64| (trotter_product(&l1, &l2, n).unwrap().matrix() - exact.matrix()).norm();
        for n in [64u64, 128, 256] {
            let ratio = err(n) / err(2 * n);
            assert!((1.6..=2.4).contains(&ratio), "seed {seed}, n {n}: {ratio}");
        }
    }
}

#[test]
fn trotter_converges_monotonically_to_large_n() {
    let mut rng = seeded(11, 0);
    let a = random_hermitian(2, &mut rng);
    let b = random_hermitian(2, &mut rng);
    let l1 = hamiltonian_superop(&a);
    let l2 = &hamiltonian_superop(&b) + &oqs_core::gksl::dissipator(0.4, &ops::sigma_minus());
    let exact = (&l1 + &l2).exp().unwrap();
    let mut prev = f64::INFINITY;
    for k in 0..=16 {
        let e = (trotter_product(&l1, &l2, 1 << k).unwrap().matrix() - exact.matrix()).norm();
        assert!(e <= prev * (1.0 + 1e-9), "k = {k}");
        prev = e;
    }
    assert!(prev <= 1e-4);
}

#[test]
fn commuting_family_splitting_matches_integrated_exponent() {
    let base = &sandwich(&ops::pauli_z()).unwrap() - &Superoperator::identity(2);
    let gamma = |t: f64| 1.0 + 0.5 * t.sin();
    let integral = |t: f64| t + 0.5 * (1.0 - t.cos());
    let exact = base.exp_t(integral(2.0)).unwrap();
    let err = |steps: usize| {
        let p = propagate_time_dependent(|t| base.scale(gamma(t)), 0.0, 2.0, steps).unwrap();
        (p.matrix() - exact.matrix()).norm()
    };
    let (e1, e2) = (err(100), err(200));
    assert!(e1 <= 1e-2);
    assert!((1.6..=2.4).contains(&(e1 / e2)));
    let mid = propagate_midpoint(|t| base.scale(gamma(t)), 0.0, 2.0, 100).unwrap();
    assert!((mid.matrix() - exact.matrix()).norm() <= 1e-4);
}

#[test]
fn non_commuting_splitting_is_first_order() {
    let hx = hamiltonian_superop(&ops::pauli_x());
    let damp = &sandwich(&ops::sigma_minus()).unwrap()
        - &(&left(&(ops::sigma_plus() * ops::sigma_minus())) + &right(&(ops::sigma_plus() * ops::sigma_minus())))
            .scale(0.5);
    let gen = |t: f64| &hx.scale(t.cos()) + &damp.scale(0.5 + t);
    let reference = propagate_time_dependent(gen, 0.0, 1.5, 16 * 160).unwrap();
    let err =
        |steps: usize| (propagate_time_dependent(gen, 0.0, 1.5, steps).unwrap().matrix() - reference.matrix()).norm();
    let ratio = err(40) / err(80);
    assert!((1.6..=2.4).contains(&ratio), "{ratio}");
}

#[test]
fn expm_inverse_round_trip() {
    for seed in 0..10 {
        let mut rng = seeded(seed, 1);
        let m = ginibre(4, 4, &mut rng);
        let m = &m * c64(10.0 / m.norm(), 0.0);
        let prod = expm(&m).unwrap() * expm(&(-&m)).unwrap();
        assert!((prod - DMatrix::<C64>::identity(4, 4)).norm() <= 1e-10);
    }
    assert!(expm(&DMatrix::from_element(2, 2, c64(f64::NAN, 0.0))).is_err());
}

#[test]
fn unitary_conjugation_preserves_spectrum() {
    let mut rng = seeded(5, 0);
    let u = random_unitary(3, &mut rng);
    let rho = random_density_matrix(3, &mut rng);
    let out = conjugation_superop(&u, &u.adjoint()).unwrap().apply(rho.op());
    assert!((trace(&out) - ONE).norm() <= 1e-12);
    let (a, _) = eigh(rho.op());
    let (b, _) = eigh(&out);
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() <= 1e-12);
    }
}

#[test]
fn partial_trace_commutes_with_local_unitaries() {
    let mut rng = seeded(9, 0);
    for _ in 0..10 {
        let rho = random_density_matrix(6, &mut rng);
        let ua = random_unitary(2, &mut rng);
        let ub = random_unitary(3, &mut rng);
        let u = kron(&ua, &ub);
        let lhs = partial_trace_op(&(&u * rho.op() * u.adjoint()), (2, 3), Subsystem::A).unwrap();
        let rhs = &ua * partial_trace_op(rho.op(), (2, 3), Subsystem::A).unwrap() * ua.adjoint();
        assert!((lhs - rhs).norm() <= 1e-12);
    }
}

#[test]
fn induced_norm_is_submultiplicative() {
    for seed in 0..10 {
        let t1 = random_generator(2, 100 + seed).scale(0.3);
        let t2 = random_generator(2, 200 + seed).scale(0.3);
        let n1 = induced_trace_norm_estimate(&t1, 1000, seed);
        let n2 = induced_trace_norm_estimate(&t2, 1000, seed);
        let n12 = induced_trace_norm_estimate(&t1.compose(&t2).unwrap(), 1000, seed);
        assert!(n12 <= n1 * n2 * (1.0 + 1e-12), "seed {seed}");
    }
}

fn complex_matrix(n: usize) -> impl Strategy<Value = Operator> {
    prop::collection::vec(-1.0f64..1.0, 2 * n * n)
        .prop_map(move |v| Operator::from_fn(n, n, |i, j| c64(v[2 * (i * n + j)], v[2 * (i * n + j) + 1])))
}

fn triple() -> impl Strategy<Value = (Operator, Operator, Operator)> {
    (2usize..=5).prop_flat_map(|n| (complex_matrix(n), complex_matrix(n), complex_matrix(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn vectorization_identity((a, x, b) in triple()) {
        let lhs = vectorize(&(&a * &x * &b));
        let rhs = kron(&b.transpose(), &a) * vectorize(&x);
        prop_assert!((lhs - &rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
        let sop = conjugation_superop(&a, &b).unwrap();
        prop_assert!((sop.apply(&x) - &a * &x * &b).norm() <= 1e-12 * (1.0 + rhs.norm()));
        prop_assert_eq!(devectorize(&vectorize(&x)).unwrap(), x);
    }

    #[test]
    fn partial_trace_keeps_trace_and_positivity(seed in any::<u64>(), na in 2usize..=3, nb in 2usize..=3) {
        let mut rng = seeded(seed, 0);
        let rho = random_density_matrix(na * nb, &mut rng);
        for keep in [Subsystem::A, Subsystem::B] {
            let r = partial_trace(&rho, (na, nb), keep).unwrap();
            prop_assert!((trace(r.op()) - ONE).norm() <= 1e-12);
            prop_assert!(min_eigenvalue(r.op()) >= -1e-12);
        }
    }

    #[test]
    fn hs_basis_is_orthonormal(n in 2usize..=5) {
        let b = hs_basis(n).unwrap();
        prop_assert_eq!(b.len(), n * n);
        for (j, fj) in b.elements().iter().enumerate() {
            prop_assert!(is_hermitian(fj, 1e-12));
            for (k, fk) in b.elements().iter().enumerate() {
                let want = if j == k { 1.0 } else { 0.0 };
                prop_assert!((hs_inner(fj, fk) - c64(want, 0.0)).norm() <= 1e-12);
            }
        }
        let last = b.elements().last().unwrap();
        prop_assert!((last - identity(n) * c64(1.0 / (n as f64).sqrt(), 0.0)).norm() <= 1e-12);
        prop_assert!(b.traceless().iter().all(|f| trace(f).norm() <= 1e-12));
    }

    #[test]
    fn expm_of_hermitian_generator_is_unitary(seed in any::<u64>()) {
        let mut rng = seeded(seed, 0);
        let h = random_hermitian(3, &mut rng);
        let u = expm(&(&h * c64(0.0, -1.0))).unwrap();
        prop_assert!((&u * u.adjoint() - identity(3)).norm() <= 1e-12);
    }
}
