use super::operator::{ensure_square, Operator};
use super::state::DensityMatrix;
use crate::error::{Error, Result};

/// Which factor of `H_A ⊗ H_B` to keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Partial trace of an operator on `H_A ⊗ H_B`, with `|a b⟩` at index
/// `a·N_B + b`.
pub fn partial_trace_op(m: &Operator, dims: (usize, usize), keep: Subsystem) -> Result<Operator> {
    let n = ensure_square(m)?;
    let (na, nb) = dims;
    if na * nb != n {
        return Err(Error::Dimension {
            expected: na * nb,
            found: n,
        });
    }
    Ok(match keep {
        Subsystem::A => Operator::from_fn(na, na, |a, a2| (0..nb).map(|b| m[(a * nb + b, a2 * nb + b)]).sum()),
        Subsystem::B => Operator::from_fn(nb, nb, |b, b2| (0..na).map(|a| m[(a * nb + b, a * nb + b2)]).sum()),
    })
}

pub fn partial_trace(rho: &DensityMatrix, dims: (usize, usize), keep: Subsystem) -> Result<DensityMatrix> {
    let reduced = partial_trace_op(rho.op(), dims, keep)?;
    DensityMatrix::with_tolerance(reduced, 1e-10, super::operator::TOL_PSD)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::operator::{c64, diag, kron};
    use nalgebra::DVector;

    #[test]
    fn product_state_reduces_exactly() {
        let ra = diag(&[0.2, 0.8]);
        let rb = diag(&[0.1, 0.3, 0.6]);
        let rho = DensityMatrix::new(kron(&ra, &rb)).unwrap();
        let a = partial_trace(&rho, (2, 3), Subsystem::A).unwrap();
        let b = partial_trace(&rho, (2, 3), Subsystem::B).unwrap();
        assert!((a.op() - ra).norm() < 1e-15);
        assert!((b.op() - rb).norm() < 1e-15);
    }

    #[test]
    fn bell_state_is_maximally_mixed() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = DVector::from_vec(vec![c64(s, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(s, 0.0)]);
        let rho = DensityMatrix::pure(&psi);
        let a = partial_trace(&rho, (2, 2), Subsystem::A).unwrap();
        assert!((a.op() - diag(&[0.5, 0.5])).norm() < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        let rho = DensityMatrix::maximally_mixed(4);
        assert!(partial_trace(&rho, (3, 2), Subsystem::A).is_err());
    }
}
