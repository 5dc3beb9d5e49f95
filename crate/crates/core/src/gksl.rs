//! Markovian generators in GKSL form, their Kossakowski-matrix
//! representation, canonical diagonalization and the Kossakowski
//! conditions.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::liouville::{
    c64, eigh, ensure_dim, ensure_square, hamiltonian_superop, hs_basis, is_hermitian, trace, HermitianBasis, Operator,
    Superoperator, C64, TOL_HERM, TOL_PSD,
};
use crate::random::{ginibre, random_hermitian, random_unitary};

/// A rate and its jump operator.
#[derive(Clone, Debug, PartialEq)]
pub struct Jump {
    pub rate: f64,
    pub op: Operator,
}

/// `L(ρ) = −i[H, ρ] + Σ_k γ_k (V_k ρ V_k† − ½{V_k†V_k, ρ})` with `γ_k ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct GKSLGenerator {
    h: Operator,
    jumps: Vec<Jump>,
}

impl GKSLGenerator {
    pub fn new(h: Operator, jumps: Vec<(f64, Operator)>) -> Result<Self> {
        let g = Self::new_unchecked(h, jumps)?;
        g.validate()?;
        Ok(g)
    }

    /// Builds the generator checking shapes only; rates may be negative.
    pub fn new_unchecked(h: Operator, jumps: Vec<(f64, Operator)>) -> Result<Self> {
        let n = ensure_square(&h)?;
        let jumps = jumps
            .into_iter()
            .map(|(rate, op)| {
                ensure_dim(&op, n)?;
                Ok(Jump { rate, op })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { h, jumps })
    }

    pub fn hamiltonian_only(h: Operator) -> Result<Self> {
        Self::new(h, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.h
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    pub fn validate(&self) -> Result<()> {
        if !is_hermitian(&self.h, TOL_HERM) {
            return Err(Error::Validation("Hamiltonian is not Hermitian".into()));
        }
        if let Some(j) = self.jumps.iter().find(|j| !(j.rate >= 0.0) || !j.rate.is_finite()) {
            return Err(Error::Validation(format!("negative or non-finite rate {}", j.rate)));
        }
        let l = self.superop();
        if let Ok(basis) = hs_basis(self.dim()) {
            let scale = l.norm().max(1.0);
            for f in basis.elements() {
                let t = trace(&l.apply(f)).norm();
                if t > 1e-10 * scale {
                    return Err(Error::Validation(format!(
                        "generator does not annihilate the trace ({t:e})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Liouville-space matrix of the generator.
    pub fn superop(&self) -> Superoperator {
        let mut l = hamiltonian_superop(&self.h);
        for j in &self.jumps {
            l = &l + &dissipator(j.rate, &j.op);
        }
        l
    }

    /// Applies the generator directly in Hilbert space.
    pub fn apply(&self, rho: &Operator) -> Operator {
        let mut out = (&self.h * rho - rho * &self.h) * c64(0.0, -1.0);
        for j in &self.jumps {
            let vd = j.op.adjoint();
            let vdv = &vd * &j.op;
            out += (&j.op * rho * &vd - (&vdv * rho + rho * &vdv) * c64(0.5, 0.0)) * c64(j.rate, 0.0);
        }
        out
    }

    /// Random generator: GUE Hamiltonian and `n_jumps` Ginibre jump
    /// operators with rates uniform in `[0, max_rate)`.
    pub fn random<R: Rng + ?Sized>(n: usize, n_jumps: usize, max_rate: f64, rng: &mut R) -> Self {
        let h = random_hermitian(n, rng);
        let jumps = (0..n_jumps)
            .map(|_| {
                let rate = rng.random::<f64>() * max_rate;
                (rate, ginibre(n, n, rng) * c64(1.0 / (n as f64).sqrt(), 0.0))
            })
            .collect();
        Self::new(h, jumps).expect("random generator is valid")
    }
}

/// `ρ ↦ γ(VρV† − ½{V†V, ρ})` as `γ[conj(V)⊗V − ½𝟙⊗V†V − ½(V†V)ᵀ⊗𝟙]`.
pub fn dissipator(rate: f64, v: &Operator) -> Superoperator {
    let n = v.nrows();
    let id = Operator::identity(n, n);
    let vdv = v.adjoint() * v;
    let m = (v.conjugate().kronecker(v)
        - id.kronecker(&vdv) * c64(0.5, 0.0)
        - vdv.transpose().kronecker(&id) * c64(0.5, 0.0))
        * c64(rate, 0.0);
    Superoperator::new(m).expect("square")
}

pub fn superop_of_generator(gen: &GKSLGenerator) -> Result<Superoperator> {
    gen.validate()?;
    Ok(gen.superop())
}

/// Generator `−i[H, ·] + Σ_jk a_jk (F_j · F_k − ½{F_k F_j, ·})` over the
/// traceless elements of a Hermitian basis.
#[derive(Clone, Debug)]
pub struct KossakowskiForm {
    pub h: Operator,
    pub a: DMatrix<C64>,
    pub basis: HermitianBasis,
}

impl KossakowskiForm {
    pub fn dissipator(&self) -> Superoperator {
        let fs = self.basis.traceless();
        let n = self.basis.dim();
        let mut m = DMatrix::<C64>::zeros(n * n, n * n);
        let id = Operator::identity(n, n);
        for (j, fj) in fs.iter().enumerate() {
            for (k, fk) in fs.iter().enumerate() {
                let a = self.a[(j, k)];
                if a.norm() == 0.0 {
                    continue;
                }
                // F_j ρ F_k† with F_k Hermitian.
                let fkfj = fk * fj;
                m += (fk.transpose().kronecker(fj)
                    - id.kronecker(&fkfj) * c64(0.5, 0.0)
                    - fkfj.transpose().kronecker(&id) * c64(0.5, 0.0))
                    * a;
            }
        }
        Superoperator::new(m).expect("square")
    }

    pub fn superop(&self) -> Superoperator {
        &hamiltonian_superop(&self.h) + &self.dissipator()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigh(&self.a).0
    }
}

/// Expands every jump over the basis. The identity component `c = Tr V/N`
/// of each jump moves into the Hamiltonian as `(iγ/2)(c* V₀ − c V₀†)`,
/// where `V₀` is the traceless part.
pub fn kossakowski_matrix(gen: &GKSLGenerator, basis: &HermitianBasis) -> Result<KossakowskiForm> {
    let n = gen.dim();
    if basis.dim() != n {
        return Err(Error::Dimension {
            expected: n,
            found: basis.dim(),
        });
    }
    let m = n * n - 1;
    let mut a = DMatrix::<C64>::zeros(m, m);
    let mut h = gen.hamiltonian().clone();
    for jump in gen.jumps() {
        let coeffs = basis.coefficients(&jump.op);
        let v = &coeffs[..m];
        let c = trace(&jump.op) / n as f64;
        let v0 = &jump.op - Operator::identity(n, n) * c;
        h += (v0.clone() * c.conj() - v0.adjoint() * c) * c64(0.0, 0.5 * jump.rate);
        for j in 0..m {
            for k in 0..m {
                a[(j, k)] += v[j] * v[k].conj() * jump.rate;
            }
        }
    }
    Ok(KossakowskiForm {
        h,
        a,
        basis: basis.clone(),
    })
}

#[derive(Clone, Debug)]
pub enum CanonicalForm {
    Gksl(GKSLGenerator),
    /// The Kossakowski matrix has an eigenvalue below `−tol_psd·‖a‖`.
    NonGksl {
        min_eigenvalue: f64,
        eigenvalues: Vec<f64>,
    },
}

impl CanonicalForm {
    pub fn generator(&self) -> Option<&GKSLGenerator> {
        match self {
            CanonicalForm::Gksl(g) => Some(g),
            CanonicalForm::NonGksl { .. } => None,
        }
    }
}

/// Diagonalizes `a = U Λ U†` and returns jumps `V_m = Σ_j U_jm F_j` with
/// rates `λ_m` in descending order. Eigenvalues within `tol_psd·‖a‖` of zero
/// are dropped.
pub fn canonical_form(kf: &KossakowskiForm) -> CanonicalForm {
    canonical_form_with(kf, TOL_PSD)
}

pub fn canonical_form_with(kf: &KossakowskiForm, tol_psd: f64) -> CanonicalForm {
    let (vals, vecs) = eigh(&kf.a);
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min = vals.first().copied().unwrap_or(0.0);
    if min < -tol_psd * scale {
        return CanonicalForm::NonGksl {
            min_eigenvalue: min,
            eigenvalues: vals,
        };
    }
    let fs = kf.basis.traceless();
    let n = kf.basis.dim();
    let mut jumps = Vec::new();
    for m in (0..vals.len()).rev() {
        if vals[m] <= tol_psd * scale {
            continue;
        }
        let mut v = Operator::zeros(n, n);
        for (j, f) in fs.iter().enumerate() {
            v += f * vecs[(j, m)];
        }
        jumps.push((vals[m], v));
    }
    let h = crate::liouville::hermitian_part(&kf.h);
    CanonicalForm::Gksl(GKSLGenerator::new_unchecked(h, jumps).expect("consistent dimensions"))
}

type GeneratorFn = dyn Fn(f64) -> (Operator, Vec<(f64, Operator)>) + Send + Sync;

/// Time-dependent GKSL-shaped generator `t ↦ (H(t), {(γ_k(t), V_k(t))})`.
/// Rates must be nonnegative only when the caller asserts Markovianity.
#[derive(Clone)]
pub struct TimeDependentGksl {
    eval: Arc<GeneratorFn>,
    markovian: bool,
}

impl TimeDependentGksl {
    pub fn new<F>(f: F, markovian: bool) -> Self
    where
        F: Fn(f64) -> (Operator, Vec<(f64, Operator)>) + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(f),
            markovian,
        }
    }

    pub fn at(&self, t: f64) -> Result<GKSLGenerator> {
        let (h, jumps) = (self.eval)(t);
        if self.markovian {
            GKSLGenerator::new(h, jumps)
        } else {
            GKSLGenerator::new_unchecked(h, jumps)
        }
    }

    pub fn superop_at(&self, t: f64) -> Result<Superoperator> {
        Ok(self.at(t)?.superop())
    }
}

/// A resolution of the identity into orthogonal projectors.
#[derive(Clone, Debug)]
pub struct Partition(Vec<Operator>);

impl Partition {
    pub fn new(projectors: Vec<Operator>, tol: f64) -> Result<Self> {
        let first = projectors
            .first()
            .ok_or_else(|| Error::Validation("empty partition".into()))?;
        let n = ensure_square(first)?;
        let mut sum = Operator::zeros(n, n);
        for (i, p) in projectors.iter().enumerate() {
            ensure_dim(p, n)?;
            if !is_hermitian(p, tol) || (p * p - p).norm() > tol {
                return Err(Error::Validation(format!("element {i} is not an orthogonal projector")));
            }
            for q in &projectors[i + 1..] {
                if (p * q).norm() > tol {
                    return Err(Error::Validation("projectors are not mutually orthogonal".into()));
                }
            }
            sum += p;
        }
        if (sum - Operator::identity(n, n)).norm() > tol {
            return Err(Error::Validation("projectors do not sum to the identity".into()));
        }
        Ok(Self(projectors))
    }

    /// Rank-one projectors onto the columns of a unitary.
    pub fn from_basis(u: &Operator) -> Result<Self> {
        let n = ensure_square(u)?;
        let ps = (0..n).map(|k| {
            let v = u.column(k);
            v * v.adjoint()
        });
        Self::new(ps.collect(), 1e-10)
    }

    pub fn computational(n: usize) -> Self {
        Self::from_basis(&Operator::identity(n, n)).expect("identity basis")
    }

    /// Eigenbasis of a random Hermitian matrix, with basis vectors grouped
    /// into a random number of blocks.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let u = random_unitary(n, rng);
        let blocks = rng.random_range(2..=n.max(2));
        let mut ps = vec![Operator::zeros(n, n); blocks];
        for k in 0..n {
            let b = if k < blocks { k } else { rng.random_range(0..blocks) };
            let v = u.column(k);
            ps[b] += v * v.adjoint();
        }
        ps.retain(|p| p.norm() > 0.0);
        Self::new(ps, 1e-10).expect("unitary columns form a resolution of the identity")
    }

    pub fn projectors(&self) -> &[Operator] {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KossakowskiViolation {
    /// `A_ii > tol`.
    Diagonal { partition: usize, i: usize, value: f64 },
    /// `A_ij < −tol` for `i ≠ j`.
    OffDiagonal {
        partition: usize,
        i: usize,
        j: usize,
        value: f64,
    },
    /// `|Σ_i A_ij| > tol`.
    ColumnSum { partition: usize, j: usize, value: f64 },
}

#[derive(Clone, Debug)]
pub struct KossakowskiReport {
    /// `A_ij = Re Tr[P_i L(P_j)]` per partition.
    pub matrices: Vec<DMatrix<f64>>,
    pub first_violation: Option<KossakowskiViolation>,
    pub max_column_sum: f64,
}

impl KossakowskiReport {
    pub fn passed(&self) -> bool {
        self.first_violation.is_none()
    }
}

/// Evaluates the Kossakowski conditions on each partition. Passing is
/// evidence only; a violation is a counterexample.
pub fn check_kossakowski_conditions(
    l: &Superoperator,
    partitions: &[Partition],
    tol: f64,
) -> Result<KossakowskiReport> {
    let mut matrices = Vec::with_capacity(partitions.len());
    let mut first = None;
    let mut max_column_sum: f64 = 0.0;
    for (pi, part) in partitions.iter().enumerate() {
        let ps = part.projectors();
        if ps[0].nrows() != l.dim() {
            return Err(Error::Dimension {
                expected: l.dim(),
                found: ps[0].nrows(),
            });
        }
        let images: Vec<Operator> = ps.iter().map(|p| l.apply(p)).collect();
        let k = ps.len();
        let a = DMatrix::from_fn(k, k, |i, j| trace(&(&ps[i] * &images[j])).re);
        for j in 0..k {
            let s: f64 = a.column(j).sum();
            max_column_sum = max_column_sum.max(s.abs());
            if first.is_some() {
                continue;
            }
            for i in 0..k {
                let v = a[(i, j)];
                if i == j && v > tol {
                    first = Some(KossakowskiViolation::Diagonal {
                        partition: pi,
                        i,
                        value: v,
                    });
                    break;
                }
                if i != j && v < -tol {
                    first = Some(KossakowskiViolation::OffDiagonal {
                        partition: pi,
                        i,
                        j,
                        value: v,
                    });
                    break;
                }
            }
            if first.is_none() && s.abs() > tol {
                first = Some(KossakowskiViolation::ColumnSum {
                    partition: pi,
                    j,
                    value: s,
                });
            }
        }
        matrices.push(a);
    }
    Ok(KossakowskiReport {
        matrices,
        first_violation: first,
        max_column_sum,
    })
}

/// Classical rate-matrix conditions: `Q_ii ≤ tol`, `Q_ij ≥ −tol` for
/// `i ≠ j`, and `|Σ_j Q_ij| ≤ tol` for every row.
pub fn classical_generator_check(q: &DMatrix<f64>, tol: f64) -> bool {
    if q.nrows() != q.ncols() {
        return false;
    }
    let n = q.nrows();
    (0..n).all(|i| q[(i, i)] <= tol && (0..n).all(|j| i == j || q[(i, j)] >= -tol) && q.row(i).sum().abs() <= tol)
}

/// Random valid classical generator with off-diagonal rates in `[0, 1)`.
pub fn random_classical_generator<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let mut q = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { rng.random::<f64>() });
    for i in 0..n {
        let s: f64 = q.row(i).sum();
        q[(i, i)] = -s;
    }
    q
}
