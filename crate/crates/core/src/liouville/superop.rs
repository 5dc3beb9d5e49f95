use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};

use super::expm::expm;
use super::operator::{ensure_dim, ensure_square, Operator, C64};
use crate::error::{Error, Result};

/// Column-stacking vectorization: `|i⟩⟨j|` maps to index `j·N + i`.
/// nalgebra stores matrices column-major, so this is a plain copy.
pub fn vectorize(a: &Operator) -> DVector<C64> {
    DVector::from_column_slice(a.as_slice())
}

/// Inverse of [`vectorize`].
pub fn devectorize(v: &DVector<C64>) -> Result<Operator> {
    let n = perfect_sqrt(v.len()).ok_or(Error::Shape(v.len()))?;
    Ok(Operator::from_column_slice(n, n, v.as_slice()))
}

pub(crate) fn perfect_sqrt(len: usize) -> Option<usize> {
    let n = (len as f64).sqrt().round() as usize;
    (n * n == len).then_some(n)
}

/// Linear map on N×N operators stored as an N²×N² matrix in the
/// column-stacking convention.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: DMatrix<C64>,
}

impl Superoperator {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        let dim = perfect_sqrt(matrix.nrows()).ok_or(Error::Shape(matrix.nrows()))?;
        Ok(Self { dim, matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            matrix: DMatrix::identity(dim * dim, dim * dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            matrix: DMatrix::zeros(dim * dim, dim * dim),
        }
    }

    /// Builds the matrix of a linear map from its action on the units `|i⟩⟨j|`.
    pub fn from_fn<F>(dim: usize, f: F) -> Result<Self>
    where
        F: Fn(&Operator) -> Operator,
    {
        let n2 = dim * dim;
        let mut matrix = DMatrix::zeros(n2, n2);
        for col in 0..n2 {
            let mut e = Operator::zeros(dim, dim);
            e[(col % dim, col / dim)] = C64::new(1.0, 0.0);
            let out = f(&e);
            ensure_dim(&out, dim)?;
            matrix.set_column(col, &vectorize(&out));
        }
        Ok(Self { dim, matrix })
    }

    /// Hilbert-space dimension N.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    /// Applies the map to an operator.
    ///
    /// # Panics
    /// If `x` is not `dim × dim`.
    pub fn apply(&self, x: &Operator) -> Operator {
        assert!(
            x.nrows() == self.dim && x.ncols() == self.dim,
            "operator of size {}x{} applied to a superoperator of dim {}",
            x.nrows(),
            x.ncols(),
            self.dim
        );
        let v = &self.matrix * vectorize(x);
        Operator::from_column_slice(self.dim, self.dim, v.as_slice())
    }

    pub fn try_apply(&self, x: &Operator) -> Result<Operator> {
        ensure_dim(x, self.dim)?;
        Ok(self.apply(x))
    }

    /// `self ∘ other`, i.e. `other` acts first.
    pub fn compose(&self, other: &Superoperator) -> Result<Superoperator> {
        self.check_same(other)?;
        Ok(Self {
            dim: self.dim,
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn scale(&self, s: f64) -> Superoperator {
        Self {
            dim: self.dim,
            matrix: &self.matrix * C64::new(s, 0.0),
        }
    }

    /// `e^{t·L}`.
    pub fn exp_t(&self, t: f64) -> Result<Superoperator> {
        Ok(Self {
            dim: self.dim,
            matrix: expm(&(&self.matrix * C64::new(t, 0.0)))?,
        })
    }

    pub fn exp(&self) -> Result<Superoperator> {
        self.exp_t(1.0)
    }

    /// Frobenius norm of the Liouville-space matrix.
    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }

    /// Induced 2-norm on Liouville space (largest singular value).
    pub fn spectral_norm(&self) -> f64 {
        super::operator::spectral_norm(&self.matrix)
    }

    pub(crate) fn check_same(&self, other: &Superoperator) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    /// The map `ρ ↦ (self(ρ†))†` minus `self`, measuring failure of
    /// Hermiticity preservation (zero for Hermiticity-preserving maps).
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for col in 0..n * n {
            let (i, j) = (col % n, col / n);
            let mut e = Operator::zeros(n, n);
            e[(i, j)] = C64::new(1.0, 0.0);
            let lhs = self.apply(&e.adjoint());
            let rhs = self.apply(&e).adjoint();
            worst = worst.max((lhs - rhs).norm());
        }
        worst
    }
}

impl Add for &Superoperator {
    type Output = Superoperator;

    fn add(self, rhs: &Superoperator) -> Superoperator {
        assert_eq!(self.dim, rhs.dim, "superoperator dimension mismatch");
        Superoperator {
            dim: self.dim,
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl Sub for &Superoperator {
    type Output = Superoperator;

    fn sub(self, rhs: &Superoperator) -> Superoperator {
        assert_eq!(self.dim, rhs.dim, "superoperator dimension mismatch");
        Superoperator {
            dim: self.dim,
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

impl Neg for &Superoperator {
    type Output = Superoperator;

    fn neg(self) -> Superoperator {
        self.scale(-1.0)
    }
}

impl Mul for &Superoperator {
    type Output = Superoperator;

    fn mul(self, rhs: &Superoperator) -> Superoperator {
        assert_eq!(self.dim, rhs.dim, "superoperator dimension mismatch");
        Superoperator {
            dim: self.dim,
            matrix: &self.matrix * &rhs.matrix,
        }
    }
}

/// Matrix of `ρ ↦ AρB`, which is `Bᵀ ⊗ A`.
pub fn conjugation_superop(a: &Operator, b: &Operator) -> Result<Superoperator> {
    let n = ensure_square(a)?;
    ensure_dim(b, n)?;
    Ok(Superoperator {
        dim: n,
        matrix: b.transpose().kronecker(a),
    })
}

/// Matrix of `ρ ↦ AρA†`.
pub fn sandwich(a: &Operator) -> Result<Superoperator> {
    conjugation_superop(a, &a.adjoint())
}

/// Left multiplication `ρ ↦ Aρ`.
pub fn left(a: &Operator) -> Superoperator {
    let n = a.nrows();
    Superoperator {
        dim: n,
        matrix: Operator::identity(n, n).kronecker(a),
    }
}

/// Right multiplication `ρ ↦ ρA`.
pub fn right(a: &Operator) -> Superoperator {
    let n = a.nrows();
    Superoperator {
        dim: n,
        matrix: a.transpose().kronecker(&Operator::identity(n, n)),
    }
}

/// Commutator map `ρ ↦ −i[H, ρ]`.
pub fn hamiltonian_superop(h: &Operator) -> Superoperator {
    let m = (&left(h).matrix - &right(h).matrix) * C64::new(0.0, -1.0);
    Superoperator {
        dim: h.nrows(),
        matrix: m,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::operator::{ops, unit};

    #[test]
    fn unit_vectorizes_to_convention_index() {
        let v = vectorize(&unit(2, 0, 1));
        assert_eq!(v[2], C64::new(1.0, 0.0));
        assert_eq!(v.iter().filter(|z| z.norm() > 0.0).count(), 1);
    }

    #[test]
    fn devectorize_rejects_non_square_length() {
        let v = DVector::<C64>::zeros(5);
        assert!(matches!(devectorize(&v), Err(Error::Shape(5))));
    }

    #[test]
    fn bit_flip_by_conjugation() {
        let x = ops::pauli_x();
        let s = conjugation_superop(&x, &x).unwrap();
        let rho = crate::liouville::operator::diag(&[0.3, 0.7]);
        let out = s.apply(&rho);
        assert!((out - crate::liouville::operator::diag(&[0.7, 0.3])).norm() < 1e-15);
    }

    #[test]
    fn identity_conjugation_is_identity() {
        let id = Operator::identity(3, 3);
        assert_eq!(conjugation_superop(&id, &id).unwrap(), Superoperator::identity(3));
    }

    #[test]
    fn from_fn_matches_conjugation() {
        let a = ops::sigma_minus();
        let b = ops::pauli_y();
        let s = Superoperator::from_fn(2, |x| &a * x * &b).unwrap();
        assert_eq!(s, conjugation_superop(&a, &b).unwrap());
    }

    #[test]
    fn superoperator_rejects_bad_shape() {
        assert!(Superoperator::new(DMatrix::zeros(3, 3)).is_err());
        assert!(Superoperator::new(DMatrix::zeros(4, 5)).is_err());
        assert_eq!(Superoperator::new(DMatrix::zeros(9, 9)).unwrap().dim(), 3);
    }

    #[test]
    fn hamiltonian_superop_is_commutator() {
        let h = ops::pauli_z();
        let rho = ops::pauli_x();
        let direct = (&h * &rho - &rho * &h) * C64::new(0.0, -1.0);
        assert!((hamiltonian_superop(&h).apply(&rho) - direct).norm() < 1e-15);
    }
}
