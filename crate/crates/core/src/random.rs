//! Seeded random operators and states. Every generator takes an explicit RNG
//! so that parallel samplers can derive independent streams from one seed.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::liouville::{c64, DensityMatrix, Operator, C64};

/// Deterministic RNG for `(seed, stream)`.
pub fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix of i.i.d. standard complex Gaussians.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// GUE-distributed Hermitian matrix.
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Operator {
    let g = ginibre(n, n, rng);
    (&g + g.adjoint()) * c64(0.5, 0.0)
}

/// Haar-random unitary (QR of a Ginibre matrix with the phase correction).
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Operator {
    let qr = ginibre(n, n, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c64(1.0, 0.0) };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    q
}

pub fn random_pure_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DVector<C64> {
    let v = DVector::from_fn(n, |_, _| complex_normal(rng));
    let nrm = v.norm();
    v / c64(nrm, 0.0)
}

/// Hilbert–Schmidt random density matrix of full rank.
pub fn random_density_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DensityMatrix {
    random_density_matrix_rank(n, n, rng)
}

pub fn random_density_matrix_rank<R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> DensityMatrix {
    let g = ginibre(n, rank.max(1), rng);
    let m = &g * g.adjoint();
    let tr = crate::liouville::trace(&m).re;
    let m = crate::liouville::hermitian_part(&(m * c64(1.0 / tr, 0.0)));
    DensityMatrix::with_tolerance(m, 1e-10, 1e-10).expect("Gram matrices are valid states")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_is_unitary() {
        let mut rng = seeded(5, 1);
        let u = random_unitary(4, &mut rng);
        assert!((&u * u.adjoint() - DMatrix::<C64>::identity(4, 4)).norm() < 1e-13);
    }

    #[test]
    fn streams_differ_and_repeat() {
        let a = random_hermitian(3, &mut seeded(9, 0));
        let b = random_hermitian(3, &mut seeded(9, 1));
        let c = random_hermitian(3, &mut seeded(9, 0));
        assert_eq!(a, c);
        assert!((a - b).norm() > 1e-3);
    }

    #[test]
    fn density_matrix_is_valid() {
        let mut rng = seeded(0, 0);
        for n in 2..6 {
            let rho = random_density_matrix(n, &mut rng);
            assert!(DensityMatrix::new(rho.op().clone()).is_ok());
        }
    }
}
