//! Liouvillian spectra, relaxation classification, steady states, ergodic
//! averages and the commutant criterion for relaxation.

use nalgebra::{DMatrix, SVD};

use crate::error::{Error, Result};
use crate::liouville::{
    c64, devectorize, eigenvalues, eigh, ensure_dim, ensure_square, hermitian_part, trace, trace_norm, vectorize,
    DensityMatrix, Operator, Superoperator, C64,
};
use crate::random::seeded;
use rand::Rng;

/// Default zero-cluster tolerance, relative to `‖L‖`.
pub const TOL_ZERO: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralReport {
    /// Sorted by real part, then imaginary part.
    pub eigenvalues: Vec<C64>,
    pub zero_multiplicity: usize,
    /// `−max Re λ` over eigenvalues outside the zero cluster; infinite when
    /// every eigenvalue is in the zero cluster.
    pub spectral_gap: f64,
    pub diagonalizable: bool,
    /// `‖L‖` (largest singular value), the scale for all tolerances.
    pub norm: f64,
    pub tol: f64,
}

impl SpectralReport {
    fn zero_cut(&self) -> f64 {
        self.tol * self.norm
    }

    pub fn nonzero(&self) -> impl Iterator<Item = &C64> {
        let cut = self.zero_cut();
        self.eigenvalues.iter().filter(move |z| z.norm() > cut)
    }

    pub fn max_real_part(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }
}

fn singular(m: &DMatrix<C64>) -> SVD<C64, nalgebra::Dyn, nalgebra::Dyn> {
    SVD::new(m.clone(), true, true)
}

/// Full eigendecomposition through the complex Schur form. Eigenvalues with
/// `|λ| ≤ tol·‖L‖` form the zero cluster.
pub fn liouvillian_spectrum(l: &Superoperator, tol: f64) -> Result<SpectralReport> {
    let m = l.matrix();
    let norm = l.spectral_norm();
    let ev = eigenvalues(m)?;
    let cut = tol * norm;
    let zero_multiplicity = ev.iter().filter(|z| z.norm() <= cut).count();
    let gap = ev
        .iter()
        .filter(|z| z.norm() > cut)
        .map(|z| -z.re)
        .fold(f64::INFINITY, f64::min);
    Ok(SpectralReport {
        diagonalizable: diagonalizable(m, &ev, norm),
        eigenvalues: ev,
        zero_multiplicity,
        spectral_gap: gap,
        norm,
        tol,
    })
}

/// Compares algebraic and geometric multiplicities of clustered
/// eigenvalues. Defective blocks split by about `√ε·‖L‖`, so clusters use
/// that scale.
fn diagonalizable(m: &DMatrix<C64>, ev: &[C64], norm: f64) -> bool {
    if norm == 0.0 {
        return true;
    }
    let cluster_tol = 1e-6 * norm;
    let mut used = vec![false; ev.len()];
    let n = m.nrows();
    for i in 0..ev.len() {
        if used[i] {
            continue;
        }
        let members: Vec<usize> = (i..ev.len())
            .filter(|&j| !used[j] && (ev[j] - ev[i]).norm() <= cluster_tol)
            .collect();
        for &j in &members {
            used[j] = true;
        }
        if members.len() < 2 {
            continue;
        }
        let mu = members.iter().map(|&j| ev[j]).sum::<C64>() / members.len() as f64;
        let shifted = m - DMatrix::<C64>::identity(n, n) * mu;
        let sv = crate::liouville::singular_values(&shifted);
        let geometric = sv.iter().filter(|&&s| s <= 1e-5 * norm).count();
        if geometric < members.len() {
            return false;
        }
    }
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelaxingReason {
    Relaxing,
    /// Nonzero eigenvalues on the imaginary axis: persistent oscillations.
    ImaginaryEigenvalues,
    /// More than one independent steady state.
    DegenerateZero,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelaxingVerdict {
    pub verdict: bool,
    pub reason: RelaxingReason,
    pub zero_multiplicity: usize,
    pub spectral_gap: f64,
}

/// Relaxing iff the zero eigenvalue is simple and every other eigenvalue has
/// real part below `−tol·‖L‖`.
pub fn is_relaxing(l: &Superoperator, tol: f64) -> Result<RelaxingVerdict> {
    let rep = liouvillian_spectrum(l, tol)?;
    let cut = rep.zero_cut();
    let imaginary = rep.nonzero().any(|z| z.re.abs() <= cut);
    let reason = if imaginary {
        RelaxingReason::ImaginaryEigenvalues
    } else if rep.zero_multiplicity != 1 {
        RelaxingReason::DegenerateZero
    } else {
        RelaxingReason::Relaxing
    };
    Ok(RelaxingVerdict {
        verdict: reason == RelaxingReason::Relaxing && rep.spectral_gap > cut,
        reason,
        zero_multiplicity: rep.zero_multiplicity,
        spectral_gap: rep.spectral_gap,
    })
}

/// Right and left null vectors of `L` (columns), from one SVD.
fn null_spaces(l: &Superoperator, tol: f64) -> (DMatrix<C64>, DMatrix<C64>) {
    let m = l.matrix();
    let n2 = m.nrows();
    let svd = singular(m);
    let u = svd.u.expect("requested");
    let vt = svd.v_t.expect("requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let idx: Vec<usize> = (0..n2).filter(|&k| svd.singular_values[k] <= tol * smax).collect();
    let mut right = DMatrix::<C64>::zeros(n2, idx.len());
    let mut left = DMatrix::<C64>::zeros(n2, idx.len());
    for (c, &k) in idx.iter().enumerate() {
        right.set_column(c, &vt.row(k).adjoint());
        left.set_column(c, &u.column(k));
    }
    (right, left)
}

/// Hermitian real basis of a †-closed kernel, orthonormal under `Re Tr(AB)`.
fn hermitian_kernel_basis(right: &DMatrix<C64>, n: usize) -> Vec<Operator> {
    let mut cands = Vec::new();
    for col in right.column_iter() {
        let x = devectorize(&col.into_owned()).expect("square");
        cands.push(hermitian_part(&x));
        cands.push(hermitian_part(&(x * c64(0.0, 1.0))));
    }
    let mut basis: Vec<Operator> = Vec::new();
    for mut c in cands {
        for b in &basis {
            let p = crate::liouville::hs_inner(b, &c).re;
            c -= b * c64(p, 0.0);
        }
        let nrm = c.norm();
        if nrm > 1e-8 && basis.len() < right.ncols() {
            basis.push(c * c64(1.0 / nrm, 0.0));
        }
    }
    let _ = n;
    basis
}

#[derive(Clone, Debug)]
pub struct SteadyStates {
    pub states: Vec<DensityMatrix>,
    pub kernel_dim: usize,
}

/// Steady states from the kernel of `L`. A one-dimensional kernel yields
/// the unique state. Otherwise the eigenprojectors of a generic Hermitian
/// kernel element are averaged onto the kernel, giving extreme points when
/// the steady states are diagonal in a common basis.
pub fn steady_states(l: &Superoperator, tol: f64) -> Result<SteadyStates> {
    let n = l.dim();
    let (right, _) = null_spaces(l, tol);
    let kernel_dim = right.ncols();
    let herm = hermitian_kernel_basis(&right, n);
    let mut states: Vec<DensityMatrix> = Vec::new();
    if kernel_dim == 1 && herm.len() == 1 {
        let tr = trace(&herm[0]).re;
        if tr.abs() > 1e-12 {
            let rho = &herm[0] * c64(1.0 / tr, 0.0);
            if let Ok(s) = DensityMatrix::with_tolerance(rho, 1e-8, 1e-8) {
                states.push(s);
            }
        }
    } else if kernel_dim > 1 {
        let mut rng = seeded(0x5eed, 0);
        let mut k = Operator::zeros(n, n);
        for h in &herm {
            k += h * c64(rng.random_range(0.5..1.5), 0.0);
        }
        let (vals, vecs) = eigh(&k);
        let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && (vals[end] - vals[start]).abs() <= 1e-8 * scale {
                end += 1;
            }
            let mut p = Operator::zeros(n, n);
            for c in start..end {
                let v = vecs.column(c);
                p += v * v.adjoint();
            }
            let rho0 = DensityMatrix::with_tolerance(p * c64(1.0 / (end - start) as f64, 0.0), 1e-10, 1e-10)?;
            if let Ok(avg) = ergodic_average(l, &rho0) {
                let fresh = states.iter().all(|s| s.trace_distance(avg.op()) > 1e-7);
                if fresh {
                    states.push(avg);
                }
            }
            start = end;
        }
    }
    if states.is_empty() {
        states.push(ergodic_average(l, &DensityMatrix::maximally_mixed(n))?);
    }
    Ok(SteadyStates { states, kernel_dim })
}

/// Spectral projection of `ρ₀` onto the kernel of `L`, equal to the
/// long-time average of `e^{tL}ρ₀`.
pub fn ergodic_average(l: &Superoperator, rho0: &DensityMatrix) -> Result<DensityMatrix> {
    ensure_dim(rho0.op(), l.dim())?;
    let rep = liouvillian_spectrum(l, TOL_ZERO)?;
    let (right, left) = null_spaces(l, TOL_ZERO);
    if right.ncols() != rep.zero_multiplicity {
        return Err(Error::NumericalDegeneracy(format!(
            "zero eigenvalue has algebraic multiplicity {} but kernel dimension {}",
            rep.zero_multiplicity,
            right.ncols()
        )));
    }
    let gram = left.adjoint() * &right;
    let inv = gram.clone().try_inverse().ok_or_else(|| {
        Error::NumericalDegeneracy("left and right kernels are not dual (defective zero eigenvalue)".into())
    })?;
    let sv = crate::liouville::singular_values(&gram);
    if sv.last().copied().unwrap_or(0.0) < 1e-8 * sv.first().copied().unwrap_or(1.0) {
        return Err(Error::NumericalDegeneracy("ill-conditioned kernel projector".into()));
    }
    let v = &right * (inv * (left.adjoint() * vectorize(rho0.op())));
    let out = hermitian_part(&devectorize(&v)?);
    let resid = trace_norm(&l.apply(&out))?;
    if resid > 1e-8 {
        return Err(Error::NumericalDegeneracy(format!(
            "projected state has residual {resid:e}"
        )));
    }
    DensityMatrix::with_tolerance(out, 1e-8, 1e-8)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpohnReport {
    pub self_adjoint_set: bool,
    pub commutant_dim: usize,
    pub relaxing_guaranteed: bool,
}

/// Self-adjointness of the jump set and the dimension of its commutant
/// `{X : [V_k, X] = 0 ∀k}`.
pub fn spohn_check(jumps: &[Operator]) -> Result<SpohnReport> {
    let first = jumps
        .first()
        .ok_or_else(|| Error::InvalidArgument("spohn_check needs at least one operator".into()))?;
    let n = ensure_square(first)?;
    for v in jumps {
        ensure_dim(v, n)?;
    }
    let self_adjoint_set = jumps.iter().all(|v| {
        let vd = v.adjoint();
        let tol = 1e-12 * v.norm().max(1.0);
        jumps.iter().any(|w| (w - &vd).norm() <= tol)
    });
    let id = Operator::identity(n, n);
    let n2 = n * n;
    let mut stacked = DMatrix::<C64>::zeros(jumps.len() * n2, n2);
    for (k, v) in jumps.iter().enumerate() {
        let block = id.kronecker(v) - v.transpose().kronecker(&id);
        stacked.view_mut((k * n2, 0), (n2, n2)).copy_from(&block);
    }
    let sv = crate::liouville::singular_values(&stacked);
    let smax = sv.first().copied().unwrap_or(0.0);
    let rank = sv
        .iter()
        .filter(|&&s| s > 1e-10 * smax.max(1e-300) && smax > 0.0)
        .count();
    let commutant_dim = n2 - rank;
    Ok(SpohnReport {
        self_adjoint_set,
        commutant_dim,
        relaxing_guaranteed: self_adjoint_set && commutant_dim == 1,
    })
}
