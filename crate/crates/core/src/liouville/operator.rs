use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense complex square matrix acting on an N-dimensional Hilbert space.
pub type Operator = DMatrix<C64>;

/// Default relative tolerance for Hermiticity checks.
pub const TOL_HERM: f64 = 1e-12;
/// Default tolerance on negative eigenvalues of positive semidefinite objects.
pub const TOL_PSD: f64 = 1e-10;

pub const fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub const ONE: C64 = c64(1.0, 0.0);
pub const ZERO: C64 = c64(0.0, 0.0);
pub const I: C64 = c64(0.0, 1.0);

pub fn ensure_square(m: &Operator) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub fn ensure_dim(m: &Operator, dim: usize) -> Result<()> {
    let n = ensure_square(m)?;
    if n != dim {
        return Err(Error::Dimension {
            expected: dim,
            found: n,
        });
    }
    Ok(())
}

pub fn identity(n: usize) -> Operator {
    Operator::identity(n, n)
}

pub fn trace(m: &Operator) -> C64 {
    m.diagonal().sum()
}

pub fn commutator(a: &Operator, b: &Operator) -> Operator {
    a * b - b * a
}

pub fn anticommutator(a: &Operator, b: &Operator) -> Operator {
    a * b + b * a
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    a.kronecker(b)
}

/// Largest entry modulus.
pub fn max_abs(m: &Operator) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Hermiticity within `tol` relative to the largest entry (absolute below 1).
pub fn is_hermitian(m: &Operator, tol: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    let scale = max_abs(m).max(1.0);
    let n = m.nrows();
    for i in 0..n {
        for j in i..n {
            if (m[(i, j)] - m[(j, i)].conj()).norm() > tol * scale {
                return false;
            }
        }
    }
    true
}

/// `(m + m†)/2`.
pub fn hermitian_part(m: &Operator) -> Operator {
    (m + m.adjoint()) * c64(0.5, 0.0)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
/// The input is symmetrized before the solve.
pub fn eigh(m: &Operator) -> (Vec<f64>, Operator) {
    let h = hermitian_part(m);
    let n = h.nrows();
    if n == 0 {
        return (Vec::new(), h);
    }
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = Operator::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(k));
    }
    (values, vectors)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &Operator) -> f64 {
    eigh(m).0.first().copied().unwrap_or(0.0)
}

/// Eigenvalues of a general square matrix from its complex Schur form,
/// sorted by real part and then imaginary part.
pub fn eigenvalues(m: &Operator) -> Result<Vec<C64>> {
    let n = ensure_square(m)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let schur = Schur::try_new(m.clone(), 1e-15, 10_000 * n).ok_or(Error::NoConvergence)?;
    let (_, t) = schur.unpack();
    let mut ev: Vec<C64> = t.diagonal().iter().copied().collect();
    sort_spectrum(&mut ev);
    Ok(ev)
}

/// Sorts by real part, then imaginary part, treating real parts within
/// `1e-10·max|λ|` of their neighbours as equal so that conjugate pairs keep
/// a stable order.
pub fn sort_spectrum(ev: &mut [C64]) {
    let scale = ev.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let eps = 1e-10 * scale;
    ev.sort_by(|a, b| a.re.total_cmp(&b.re));
    let mut start = 0;
    while start < ev.len() {
        let mut end = start + 1;
        while end < ev.len() && ev[end].re - ev[end - 1].re <= eps {
            end += 1;
        }
        ev[start..end].sort_by(|a, b| a.im.total_cmp(&b.im));
        start = end;
    }
}

/// Singular values in descending order.
pub fn singular_values(m: &Operator) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Trace norm `tr √(M†M)`: the sum of singular values.
pub fn trace_norm(m: &Operator) -> Result<f64> {
    ensure_square(m)?;
    Ok(singular_values(m).iter().sum())
}

/// Largest singular value.
pub fn spectral_norm(m: &Operator) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Hilbert–Schmidt inner product `Tr(A†B)`.
pub fn hs_inner(a: &Operator, b: &Operator) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Matrix with a single unit entry at `(i, j)`.
pub fn unit(n: usize, i: usize, j: usize) -> Operator {
    let mut m = Operator::zeros(n, n);
    m[(i, j)] = ONE;
    m
}

/// Rank-one projector onto the normalized `v`.
pub fn projector(v: &DVector<C64>) -> Operator {
    let nrm = v.norm();
    let u = v / c64(nrm, 0.0);
    &u * u.adjoint()
}

/// Builds a matrix from real row-major data.
pub fn real_matrix(n: usize, data: &[f64]) -> Operator {
    Operator::from_row_iterator(n, n, data.iter().map(|&x| c64(x, 0.0)))
}

/// Builds a diagonal operator from real entries.
pub fn diag(entries: &[f64]) -> Operator {
    let n = entries.len();
    let mut m = Operator::zeros(n, n);
    for (i, &x) in entries.iter().enumerate() {
        m[(i, i)] = c64(x, 0.0);
    }
    m
}

/// Standard operators. Qubit convention: index 0 is the excited state
/// `|e⟩` and `σz = diag(1, -1)`, so `σ− = |g⟩⟨e|`.
pub mod ops {
    use super::*;

    pub fn pauli_x() -> Operator {
        real_matrix(2, &[0.0, 1.0, 1.0, 0.0])
    }

    pub fn pauli_y() -> Operator {
        Operator::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
    }

    pub fn pauli_z() -> Operator {
        diag(&[1.0, -1.0])
    }

    /// `σ+ = |e⟩⟨g|`.
    pub fn sigma_plus() -> Operator {
        unit(2, 0, 1)
    }

    /// `σ− = |g⟩⟨e|`.
    pub fn sigma_minus() -> Operator {
        unit(2, 1, 0)
    }

    /// Truncated bosonic annihilation operator on `n` levels.
    pub fn annihilation(n: usize) -> Operator {
        let mut a = Operator::zeros(n, n);
        for k in 1..n {
            a[(k - 1, k)] = c64((k as f64).sqrt(), 0.0);
        }
        a
    }

    /// Truncated number operator.
    pub fn number(n: usize) -> Operator {
        diag(&(0..n).map(|k| k as f64).collect::<Vec<_>>())
    }

    pub fn basis_ket(n: usize, k: usize) -> DVector<C64> {
        let mut v = DVector::zeros(n);
        v[k] = ONE;
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_norm_of_diagonal() {
        assert!((trace_norm(&diag(&[3.0, -4.0])).unwrap() - 7.0).abs() < 1e-12);
    }

    #[test]
    fn trace_norm_rejects_non_square() {
        let m = Operator::zeros(2, 3);
        assert!(matches!(trace_norm(&m), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn trace_norm_of_pure_state_difference() {
        // σ = ½(|ψ₁⟩⟨ψ₁| − |ψ₂⟩⟨ψ₂|) has trace norm √(1 − |⟨ψ₂|ψ₁⟩|²).
        let psi1 = DVector::from_vec(vec![c64(1.0, 0.0), c64(0.0, 0.0)]);
        let theta: f64 = 0.7;
        let psi2 = DVector::from_vec(vec![c64(theta.cos(), 0.0), c64(0.0, theta.sin())]);
        let sigma = (projector(&psi1) - projector(&psi2)) * c64(0.5, 0.0);
        let overlap = psi2.dotc(&psi1).norm();
        let expected = (1.0 - overlap * overlap).sqrt();
        assert!((trace_norm(&sigma).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn pauli_algebra() {
        let (x, y, z) = (ops::pauli_x(), ops::pauli_y(), ops::pauli_z());
        assert!((commutator(&x, &y) - z * c64(0.0, 2.0)).norm() < 1e-15);
        let sp = ops::sigma_plus();
        let sm = ops::sigma_minus();
        assert!((&sp + &sm - &x).norm() < 1e-15);
        assert!(is_hermitian(&y, TOL_HERM));
        assert!(!is_hermitian(&sp, TOL_HERM));
    }

    #[test]
    fn eigh_sorts_ascending() {
        let (vals, vecs) = eigh(&diag(&[2.0, -1.0, 0.5]));
        assert_eq!(vals, vec![-1.0, 0.5, 2.0]);
        assert!((vecs[(1, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn annihilation_commutator() {
        let a = ops::annihilation(5);
        let c = commutator(&a, &a.adjoint());
        // [a, a†] = 𝟙 except for the truncation corner.
        for k in 0..4 {
            assert!((c[(k, k)] - ONE).norm() < 1e-14);
        }
        assert!((c[(4, 4)] - c64(-4.0, 0.0)).norm() < 1e-14);
    }
}
