use super::operator::{c64, hs_inner, Operator, C64};
use crate::error::{Error, Result};

/// Hilbert–Schmidt orthonormal Hermitian basis whose last element is `𝟙/√N`.
#[derive(Clone, Debug)]
pub struct HermitianBasis {
    dim: usize,
    elements: Vec<Operator>,
}

impl HermitianBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &[Operator] {
        &self.elements
    }

    /// The N²−1 traceless elements.
    pub fn traceless(&self) -> &[Operator] {
        &self.elements[..self.elements.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Coefficients `c_j = Tr(F_j X)` so that `X = Σ c_j F_j`.
    pub fn coefficients(&self, x: &Operator) -> Vec<C64> {
        self.elements.iter().map(|f| hs_inner(f, x)).collect()
    }

    pub fn combine(&self, coeffs: &[C64]) -> Operator {
        let mut out = Operator::zeros(self.dim, self.dim);
        for (c, f) in coeffs.iter().zip(&self.elements) {
            out += f * *c;
        }
        out
    }
}

/// Generalized Gell-Mann basis. For each pair `j < k` the symmetric and
/// antisymmetric elements appear consecutively, followed by the diagonal
/// elements and finally `𝟙/√N`.
pub fn hs_basis(n: usize) -> Result<HermitianBasis> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "basis dimension must be at least 2, got {n}"
        )));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut elements = Vec::with_capacity(n * n);
    for j in 0..n {
        for k in j + 1..n {
            let mut sym = Operator::zeros(n, n);
            sym[(j, k)] = c64(s, 0.0);
            sym[(k, j)] = c64(s, 0.0);
            elements.push(sym);
            let mut anti = Operator::zeros(n, n);
            anti[(j, k)] = c64(0.0, -s);
            anti[(k, j)] = c64(0.0, s);
            elements.push(anti);
        }
    }
    for l in 1..n {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut d = Operator::zeros(n, n);
        for m in 0..l {
            d[(m, m)] = c64(norm, 0.0);
        }
        d[(l, l)] = c64(-(l as f64) * norm, 0.0);
        elements.push(d);
    }
    elements.push(Operator::identity(n, n) * c64(1.0 / (n as f64).sqrt(), 0.0));
    Ok(HermitianBasis { dim: n, elements })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::operator::{is_hermitian, ops, trace};

    #[test]
    fn qubit_basis_is_normalized_paulis() {
        let b = hs_basis(2).unwrap();
        let s = c64(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let expected = [
            ops::pauli_x() * s,
            ops::pauli_y() * s,
            ops::pauli_z() * s,
            Operator::identity(2, 2) * s,
        ];
        for (f, e) in b.elements().iter().zip(&expected) {
            assert!((f - e).norm() < 1e-15);
        }
    }

    #[test]
    fn orthonormal_and_traceless() {
        for n in 2..=6 {
            let b = hs_basis(n).unwrap();
            assert_eq!(b.len(), n * n);
            for (j, fj) in b.elements().iter().enumerate() {
                assert!(is_hermitian(fj, 1e-14));
                for (k, fk) in b.elements().iter().enumerate() {
                    let expected = if j == k { 1.0 } else { 0.0 };
                    assert!((hs_inner(fj, fk) - c64(expected, 0.0)).norm() < 1e-12);
                }
            }
            let traceless = b.traceless().iter().filter(|f| trace(f).norm() < 1e-12).count();
            assert_eq!(traceless, n * n - 1);
        }
    }

    #[test]
    fn expansion_round_trip() {
        let b = hs_basis(3).unwrap();
        let x = ops::annihilation(3) + ops::number(3) * c64(0.0, 0.5);
        assert!((b.combine(&b.coefficients(&x)) - x).norm() < 1e-14);
    }

    #[test]
    fn rejects_trivial_dimension() {
        assert!(hs_basis(1).is_err());
    }
}
