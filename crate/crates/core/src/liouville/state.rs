use nalgebra::DVector;

use super::operator::{
    c64, ensure_square, is_hermitian, min_eigenvalue, projector, trace, trace_norm, Operator, C64, TOL_HERM, TOL_PSD,
};
use crate::error::{Error, Result};

/// Trace tolerance for validated density matrices.
pub const TOL_TRACE: f64 = 1e-12;

/// Hermitian, unit-trace, positive semidefinite operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(Operator);

impl DensityMatrix {
    pub fn new(op: Operator) -> Result<Self> {
        Self::with_tolerance(op, TOL_TRACE, TOL_PSD)
    }

    pub fn with_tolerance(op: Operator, tol_trace: f64, tol_psd: f64) -> Result<Self> {
        ensure_square(&op)?;
        if !is_hermitian(&op, TOL_HERM.max(tol_trace)) {
            return Err(Error::Validation("density matrix is not Hermitian".into()));
        }
        let tr = trace(&op);
        if (tr - c64(1.0, 0.0)).norm() > tol_trace {
            return Err(Error::Validation(format!(
                "density matrix trace {} differs from 1",
                tr.re
            )));
        }
        let lmin = min_eigenvalue(&op);
        if lmin < -tol_psd {
            return Err(Error::Validation(format!(
                "density matrix has negative eigenvalue {lmin:e}"
            )));
        }
        Ok(Self(op))
    }

    pub fn pure(psi: &DVector<C64>) -> Self {
        Self(projector(psi))
    }

    pub fn basis(n: usize, k: usize) -> Self {
        Self(super::operator::unit(n, k, k))
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self(Operator::identity(n, n) * c64(1.0 / n as f64, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn op(&self) -> &Operator {
        &self.0
    }

    pub fn into_inner(self) -> Operator {
        self.0
    }

    /// `Tr(O ρ)`.
    pub fn expectation(&self, o: &Operator) -> C64 {
        trace(&(o * &self.0))
    }

    /// `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &Operator) -> f64 {
        0.5 * trace_norm(&(&self.0 - other)).unwrap_or(f64::NAN)
    }
}

impl AsRef<Operator> for DensityMatrix {
    fn as_ref(&self) -> &Operator {
        &self.0
    }
}

/// `½‖a − b‖₁` for arbitrary square operators.
pub fn trace_distance(a: &Operator, b: &Operator) -> f64 {
    0.5 * trace_norm(&(a - b)).unwrap_or(f64::NAN)
}
