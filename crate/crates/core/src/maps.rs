//! Dynamical maps: Choi and Kraus representations, complete positivity,
//! trace preservation, contraction, inversion and the divisibility witness.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::liouville::{
    c64, eigh, hs_basis, induced_trace_norm_estimate, is_hermitian, trace, unit, Operator, Superoperator, C64, TOL_HERM,
};
use crate::par;
use crate::random::random_unitary;

/// Default CP tolerance, relative to the operator norm of the Choi matrix.
pub const TOL_CP: f64 = 1e-10;
/// Default condition-number ceiling for map inversion.
pub const COND_THRESHOLD: f64 = 1e10;

/// A linear map on N×N operators, not necessarily physical.
#[derive(Clone, Debug, PartialEq)]
pub struct DynamicalMap {
    sop: Superoperator,
    label: String,
}

impl DynamicalMap {
    pub fn new(sop: Superoperator, label: impl Into<String>) -> Self {
        Self {
            sop,
            label: label.into(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(Superoperator::identity(n), "identity")
    }

    /// The transposition `ρ ↦ ρᵀ`: positive but not completely positive.
    pub fn transpose(n: usize) -> Self {
        let sop = Superoperator::from_fn(n, |x| x.transpose()).expect("square output");
        Self::new(sop, "transpose")
    }

    /// `ρ ↦ Tr(ρ)·σ`.
    pub fn replacement(sigma: &Operator) -> Result<Self> {
        let n = sigma.nrows();
        let sop = Superoperator::from_fn(n, |x| sigma * trace(x))?;
        Ok(Self::new(sop, "replacement"))
    }

    /// `ρ ↦ U ρ U†`.
    pub fn unitary(u: &Operator) -> Result<Self> {
        Ok(Self::new(crate::liouville::sandwich(u)?, "unitary"))
    }

    pub fn sop(&self) -> &Superoperator {
        &self.sop
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.sop.dim()
    }

    pub fn apply(&self, x: &Operator) -> Operator {
        self.sop.apply(x)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &DynamicalMap) -> Result<DynamicalMap> {
        Ok(Self::new(
            self.sop.compose(&other.sop)?,
            format!("{}∘{}", self.label, other.label),
        ))
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &DynamicalMap, b: f64) -> Result<DynamicalMap> {
        self.sop.check_same(&other.sop)?;
        Ok(Self::new(&self.sop.scale(a) + &other.sop.scale(b), "combination"))
    }

    /// `E ⊗ id_k` acting on `H ⊗ C^k`, with `|a b⟩` at index `a·k + b`.
    pub fn tensor_identity(&self, k: usize) -> DynamicalMap {
        let n = self.dim();
        let sop = Superoperator::from_fn(n * k, |x| {
            let mut out = Operator::zeros(n * k, n * k);
            for b in 0..k {
                for b2 in 0..k {
                    let block = Operator::from_fn(n, n, |a, a2| x[(a * k + b, a2 * k + b2)]);
                    if block.iter().all(|z| z.norm() == 0.0) {
                        continue;
                    }
                    let img = self.apply(&block);
                    for a in 0..n {
                        for a2 in 0..n {
                            out[(a * k + b, a2 * k + b2)] += img[(a, a2)];
                        }
                    }
                }
            }
            out
        })
        .expect("square output");
        Self::new(sop, format!("{}⊗id{k}", self.label))
    }
}

/// Unnormalized Choi matrix `C = Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiMatrix {
    dim: usize,
    matrix: DMatrix<C64>,
}

impl ChoiMatrix {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        let sop = Superoperator::new(matrix)?;
        let dim = sop.dim();
        Ok(Self {
            dim,
            matrix: sop.into_matrix(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        eigh(&self.matrix).0
    }
}

/// Kraus operators `K_α` with `E(ρ) = Σ K_α ρ K_α†`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausSet {
    dim: usize,
    operators: Vec<Operator>,
}

impl KrausSet {
    pub fn new(operators: Vec<Operator>) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty Kraus set".into()))?;
        let dim = crate::liouville::ensure_square(first)?;
        for k in &operators {
            crate::liouville::ensure_dim(k, dim)?;
        }
        if operators.len() > dim * dim {
            return Err(Error::InvalidArgument(format!(
                "{} Kraus operators exceed the maximum {} for dimension {dim}",
                operators.len(),
                dim * dim
            )));
        }
        Ok(Self { dim, operators })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operators(&self) -> &[Operator] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    /// `‖Σ K_α†K_α − 𝟙‖_F`.
    pub fn completeness_defect(&self) -> f64 {
        let mut s = -Operator::identity(self.dim, self.dim);
        for k in &self.operators {
            s += k.adjoint() * k;
        }
        s.norm()
    }

    pub fn apply(&self, rho: &Operator) -> Operator {
        let mut out = Operator::zeros(self.dim, self.dim);
        for k in &self.operators {
            out += k * rho * k.adjoint();
        }
        out
    }
}

pub fn choi_of(map: &DynamicalMap) -> ChoiMatrix {
    let n = map.dim();
    let s = map.sop().matrix();
    let matrix = DMatrix::from_fn(n * n, n * n, |r, c| {
        let (i, a) = (r / n, r % n);
        let (j, b) = (c / n, c % n);
        s[(b * n + a, j * n + i)]
    });
    ChoiMatrix { dim: n, matrix }
}

/// Inverse of [`choi_of`].
pub fn map_from_choi(choi: &ChoiMatrix) -> DynamicalMap {
    let n = choi.dim;
    let c = &choi.matrix;
    let m = DMatrix::from_fn(n * n, n * n, |r, col| {
        let (b, a) = (r / n, r % n);
        let (j, i) = (col / n, col % n);
        c[(i * n + a, j * n + b)]
    });
    DynamicalMap::new(Superoperator::new(m).expect("square"), "from Choi")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CpReport {
    pub verdict: bool,
    pub min_choi_eigenvalue: f64,
    pub choi_norm: f64,
    pub hermiticity_preserving: bool,
}

/// Complete positivity via the Choi matrix: the verdict holds iff the map is
/// Hermiticity-preserving and `λ_min(C) ≥ −tol·‖C‖_op`.
pub fn is_cp(map: &DynamicalMap, tol: f64) -> CpReport {
    let choi = choi_of(map);
    let hermiticity_preserving = is_hermitian(choi.matrix(), TOL_HERM.max(tol));
    let vals = choi.eigenvalues();
    let min = vals.first().copied().unwrap_or(0.0);
    let choi_norm = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    CpReport {
        verdict: hermiticity_preserving && min >= -tol * choi_norm.max(f64::MIN_POSITIVE),
        min_choi_eigenvalue: min,
        choi_norm,
        hermiticity_preserving,
    }
}

/// `Tr[E(F_j)] = Tr[F_j]` over the Hilbert–Schmidt basis within `tol`.
pub fn is_trace_preserving(map: &DynamicalMap, tol: f64) -> bool {
    let n = map.dim();
    let probes: Vec<Operator> = match hs_basis(n) {
        Ok(b) => b.elements().to_vec(),
        Err(_) => vec![unit(n, 0, 0)],
    };
    probes.iter().all(|f| (trace(&map.apply(f)) - trace(f)).norm() <= tol)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContractionReport {
    pub max_ratio: f64,
    pub verdict: bool,
    pub samples: usize,
}

/// Sampled contraction test `‖E(σ)‖₁ ≤ ‖σ‖₁` over Hermitian σ. A ratio above
/// one disproves contraction; a pass is evidence only.
pub fn contraction_check(map: &DynamicalMap, samples: usize) -> ContractionReport {
    contraction_check_with(map, samples, 0, TOL_CP)
}

pub fn contraction_check_with(map: &DynamicalMap, samples: usize, seed: u64, tol: f64) -> ContractionReport {
    let max_ratio = induced_trace_norm_estimate(map.sop(), samples.max(1), seed);
    ContractionReport {
        max_ratio,
        verdict: max_ratio <= 1.0 + tol,
        samples,
    }
}

/// Kraus operators from the Choi eigendecomposition, sorted by descending
/// weight; weights below `1e-12·λ_max` are dropped. Each operator is
/// phase-fixed so that its largest entry is real and positive.
pub fn kraus_from_choi(choi: &ChoiMatrix, tol: f64) -> Result<KrausSet> {
    let n = choi.dim;
    let (vals, vecs) = eigh(&choi.matrix);
    let lmax = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let lmin = vals.first().copied().unwrap_or(0.0);
    if lmin < -tol * lmax.max(f64::MIN_POSITIVE) {
        return Err(Error::NotCompletelyPositive { min_eigenvalue: lmin });
    }
    let mut ops = Vec::new();
    for k in (0..vals.len()).rev() {
        let lambda = vals[k];
        if lambda <= 1e-12 * lmax || lambda <= 0.0 {
            continue;
        }
        let s = lambda.sqrt();
        let v = vecs.column(k);
        let mut op = Operator::from_fn(n, n, |a, i| v[i * n + a] * s);
        let pivot = op
            .iter()
            .copied()
            .max_by(|x, y| x.norm().total_cmp(&y.norm()))
            .unwrap_or(c64(1.0, 0.0));
        if pivot.norm() > 0.0 {
            op *= pivot.conj() / pivot.norm();
        }
        ops.push(op);
    }
    if ops.is_empty() {
        ops.push(Operator::zeros(n, n));
    }
    KrausSet::new(ops)
}

/// Superoperator `Σ conj(K_α) ⊗ K_α`.
pub fn map_from_kraus(ks: &KrausSet) -> Result<DynamicalMap> {
    let n = ks.dim();
    let mut m = DMatrix::zeros(n * n, n * n);
    for k in ks.operators() {
        m += k.conjugate().kronecker(k);
    }
    Ok(DynamicalMap::new(Superoperator::new(m)?, "kraus"))
}

/// Random CPTP map from a Haar-random Stinespring isometry with `rank`
/// Kraus operators.
pub fn random_channel<R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> KrausSet {
    let r = rank.clamp(1, n * n);
    let u = random_unitary(n * r, rng);
    let ops = (0..r)
        .map(|alpha| Operator::from_fn(n, n, |a, i| u[(alpha * n + a, i)]))
        .collect();
    KrausSet::new(ops).expect("rank within bounds")
}

#[derive(Clone, Debug, PartialEq)]
pub struct InverseMap {
    pub map: DynamicalMap,
    pub condition: f64,
    /// False whenever the source map is not a unitary conjugation: the
    /// inverse of a non-unitary UDM is never itself a UDM.
    pub may_be_udm: bool,
}

/// Matrix inverse of a map whose 2-norm condition number is at most
/// `cond_threshold`.
pub fn invert_map(map: &DynamicalMap, cond_threshold: f64) -> Result<InverseMap> {
    let m = map.sop().matrix();
    let sv = crate::liouville::singular_values(m);
    let smax = sv.first().copied().unwrap_or(0.0);
    let smin = sv.last().copied().unwrap_or(0.0);
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= cond_threshold) {
        return Err(Error::SingularMap { condition });
    }
    let inv = m.clone().try_inverse().ok_or(Error::SingularMap { condition })?;
    let n2 = m.nrows();
    let unitary = (m.adjoint() * m - DMatrix::<C64>::identity(n2, n2)).norm() <= 1e-10 * n2 as f64;
    Ok(InverseMap {
        map: DynamicalMap::new(Superoperator::new(inv)?, format!("{}⁻¹", map.label())),
        condition,
        may_be_udm: unitary,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum IntervalStatus {
    Cp {
        min_choi_eigenvalue: f64,
    },
    NotCp {
        min_choi_eigenvalue: f64,
    },
    /// The earlier map could not be inverted reliably.
    Inconclusive {
        condition: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntervalReport {
    pub t_start: f64,
    pub t_end: f64,
    pub status: IntervalStatus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DivisibilityReport {
    pub intervals: Vec<IntervalReport>,
    /// Every intermediate map on the sampled grid is CP. Says nothing about
    /// times between samples.
    pub markovian_on_grid: bool,
}

impl DivisibilityReport {
    pub fn min_choi_eigenvalue(&self) -> Option<f64> {
        self.intervals
            .iter()
            .filter_map(|r| match r.status {
                IntervalStatus::Cp { min_choi_eigenvalue } | IntervalStatus::NotCp { min_choi_eigenvalue } => {
                    Some(min_choi_eigenvalue)
                }
                IntervalStatus::Inconclusive { .. } => None,
            })
            .reduce(f64::min)
    }
}

/// Checks the intermediate maps `E_{i+1} E_i⁻¹` of a sampled family. Each
/// `E_i` maps from the common initial time to `t_i`; include the identity
/// at the initial time to test the first interval.
pub fn divisibility_witness(family: &[(f64, DynamicalMap)], tol: f64) -> Result<DivisibilityReport> {
    divisibility_witness_with(family, tol, COND_THRESHOLD)
}

pub fn divisibility_witness_with(
    family: &[(f64, DynamicalMap)],
    tol: f64,
    cond_threshold: f64,
) -> Result<DivisibilityReport> {
    for w in family.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(Error::Ordering { t0: w[0].0, t1: w[1].0 });
        }
        w[0].1.sop().check_same(w[1].1.sop())?;
    }
    let intervals = par::map_range(family.len().saturating_sub(1), |i| {
        let (t0, e0) = &family[i];
        let (t1, e1) = &family[i + 1];
        let status = match invert_map(e0, cond_threshold) {
            Err(Error::SingularMap { condition }) => IntervalStatus::Inconclusive { condition },
            Err(_) => IntervalStatus::Inconclusive {
                condition: f64::INFINITY,
            },
            Ok(inv) => {
                let mid = e1.compose(&inv.map).expect("dimensions checked");
                let r = is_cp(&mid, tol);
                if r.verdict {
                    IntervalStatus::Cp {
                        min_choi_eigenvalue: r.min_choi_eigenvalue,
                    }
                } else {
                    IntervalStatus::NotCp {
                        min_choi_eigenvalue: r.min_choi_eigenvalue,
                    }
                }
            }
        };
        IntervalReport {
            t_start: *t0,
            t_end: *t1,
            status,
        }
    });
    let markovian_on_grid = intervals.iter().all(|r| matches!(r.status, IntervalStatus::Cp { .. }));
    Ok(DivisibilityReport {
        intervals,
        markovian_on_grid,
    })
}

/// Writes a sampled family as CSV: one record per superoperator row,
/// `t,row,re_0,im_0,…,re_{N²−1},im_{N²−1}`.
pub fn family_to_csv(family: &[(f64, DynamicalMap)]) -> String {
    let mut out = String::new();
    for (t, e) in family {
        let m = e.sop().matrix();
        for r in 0..m.nrows() {
            let _ = write!(out, "{t:.17e},{r}");
            for c in 0..m.ncols() {
                let z = m[(r, c)];
                let _ = write!(out, ",{:.17e},{:.17e}", z.re, z.im);
            }
            out.push('\n');
        }
    }
    out
}

/// Parses the format written by [`family_to_csv`]. Blank lines and lines
/// starting with `#` are ignored.
pub fn family_from_csv(text: &str) -> Result<Vec<(f64, DynamicalMap)>> {
    let mut out: Vec<(f64, DynamicalMap)> = Vec::new();
    let mut rows: Vec<Vec<C64>> = Vec::new();
    let mut current: Option<f64> = None;
    let bad = |line: usize, msg: &str| Error::InvalidArgument(format!("family CSV line {line}: {msg}"));
    let flush = |t: f64, rows: &mut Vec<Vec<C64>>, out: &mut Vec<(f64, DynamicalMap)>| -> Result<()> {
        let n2 = rows.len();
        let flat: Vec<C64> = rows.drain(..).flatten().collect();
        if flat.len() != n2 * n2 {
            return Err(Error::InvalidArgument(format!(
                "family CSV: time {t} has {n2} rows of unequal or wrong length"
            )));
        }
        let sop = Superoperator::new(DMatrix::from_row_slice(n2, n2, &flat))?;
        out.push((t, DynamicalMap::new(sop, format!("t={t}"))));
        Ok(())
    };
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() < 4 || !fields.len().is_multiple_of(2) {
            return Err(bad(lineno + 1, "expected t,row followed by re,im pairs"));
        }
        let t: f64 = fields[0].parse().map_err(|_| bad(lineno + 1, "bad time"))?;
        let row: usize = fields[1].parse().map_err(|_| bad(lineno + 1, "bad row index"))?;
        if current != Some(t) {
            if let Some(prev) = current {
                flush(prev, &mut rows, &mut out)?;
            }
            current = Some(t);
        }
        if row != rows.len() {
            return Err(bad(lineno + 1, "row indices must start at 0 and be consecutive"));
        }
        let mut vals = Vec::with_capacity(fields.len() / 2 - 1);
        for pair in fields[2..].chunks(2) {
            let re: f64 = pair[0].parse().map_err(|_| bad(lineno + 1, "bad number"))?;
            let im: f64 = pair[1].parse().map_err(|_| bad(lineno + 1, "bad number"))?;
            vals.push(c64(re, im));
        }
        rows.push(vals);
    }
    if let Some(t) = current {
        flush(t, &mut rows, &mut out)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::{diag, ops, projector};
    use crate::random::seeded;
    use nalgebra::DVector;

    #[test]
    fn identity_choi_is_scaled_bell_projector() {
        let c = choi_of(&DynamicalMap::identity(2));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = DVector::from_vec(vec![c64(s, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(s, 0.0)]);
        assert!((c.matrix() - projector(&bell) * c64(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn transpose_choi_is_swap() {
        let c = choi_of(&DynamicalMap::transpose(2));
        let mut swap = DMatrix::<C64>::zeros(4, 4);
        for (r, col) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
            swap[(r, col)] = c64(1.0, 0.0);
        }
        assert_eq!(c.matrix(), &swap);
        let v = c.eigenvalues();
        let expected = [-1.0, 1.0, 1.0, 1.0];
        for (a, b) in v.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(!is_cp(&DynamicalMap::transpose(2), TOL_CP).verdict);
    }

    #[test]
    fn replacement_choi_is_identity_tensor_phi() {
        let phi = DVector::from_vec(vec![c64(0.6, 0.0), c64(0.0, 0.8)]);
        let p = projector(&phi);
        let map = DynamicalMap::replacement(&p).unwrap();
        let expected = Operator::identity(2, 2).kronecker(&p);
        assert!((choi_of(&map).matrix() - expected).norm() < 1e-15);
    }

    #[test]
    fn choi_round_trip() {
        let ks = random_channel(3, 4, &mut seeded(11, 0));
        let e = map_from_kraus(&ks).unwrap();
        assert!((map_from_choi(&choi_of(&e)).sop().matrix() - e.sop().matrix()).norm() < 1e-14);
    }

    #[test]
    fn trace_preservation_examples() {
        assert!(is_trace_preserving(&DynamicalMap::identity(3), 1e-12));
        let half = DynamicalMap::new(Superoperator::identity(2).scale(0.5), "half");
        assert!(!is_trace_preserving(&half, 1e-10));
    }

    #[test]
    fn contraction_of_doubled_identity() {
        let m = DynamicalMap::new(Superoperator::identity(2).scale(2.0), "2id");
        let r = contraction_check(&m, 50);
        assert!(!r.verdict);
        assert!((r.max_ratio - 2.0).abs() < 1e-12);
    }

    #[test]
    fn identity_channel_has_single_kraus() {
        let ks = kraus_from_choi(&choi_of(&DynamicalMap::identity(3)), TOL_CP).unwrap();
        assert_eq!(ks.len(), 1);
        assert!((&ks.operators()[0] - Operator::identity(3, 3)).norm() < 1e-13);
    }

    #[test]
    fn replacement_kraus_are_rank_one() {
        let phi = DVector::from_vec(vec![c64(0.6, 0.0), c64(0.0, 0.8)]);
        let p = projector(&phi);
        let ks = kraus_from_choi(&choi_of(&DynamicalMap::replacement(&p).unwrap()), TOL_CP).unwrap();
        assert_eq!(ks.len(), 2);
        for k in ks.operators() {
            // K = |φ⟩⟨ψ_n|: range is span{φ}, so (𝟙 − P)K = 0.
            assert!(((Operator::identity(2, 2) - &p) * k).norm() < 1e-13);
        }
        assert!(ks.completeness_defect() < 1e-13);
    }

    #[test]
    fn kraus_rejects_non_cp() {
        let err = kraus_from_choi(&choi_of(&DynamicalMap::transpose(2)), TOL_CP).unwrap_err();
        match err {
            Error::NotCompletelyPositive { min_eigenvalue } => assert!((min_eigenvalue + 1.0).abs() < 1e-13),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn dephasing_kraus_map() {
        let p: f64 = 0.8;
        let ks = KrausSet::new(vec![
            Operator::identity(2, 2) * c64(p.sqrt(), 0.0),
            ops::pauli_z() * c64((1.0f64 - p).sqrt(), 0.0),
        ])
        .unwrap();
        let e = map_from_kraus(&ks).unwrap();
        let rho = Operator::from_element(2, 2, c64(0.5, 0.0));
        let out = e.apply(&rho);
        assert!((out[(0, 1)].re - 0.5 * (2.0 * p - 1.0)).abs() < 1e-15);
        assert!((out[(0, 0)].re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn random_channel_reconstructs() {
        let mut rng = seeded(3, 3);
        for n in 2..=4 {
            let ks = random_channel(n, n, &mut rng);
            assert!(ks.completeness_defect() < 1e-12);
            let e = map_from_kraus(&ks).unwrap();
            let back = kraus_from_choi(&choi_of(&e), TOL_CP).unwrap();
            let e2 = map_from_kraus(&back).unwrap();
            assert!((e2.sop().matrix() - e.sop().matrix()).norm() < 1e-10);
            for i in 0..n {
                for j in 0..n {
                    let x = unit(n, i, j);
                    assert!((ks.apply(&x) - back.apply(&x)).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn kraus_set_size_limit() {
        let ops: Vec<Operator> = (0..5).map(|_| Operator::identity(2, 2)).collect();
        assert!(KrausSet::new(ops).is_err());
    }

    #[test]
    fn unitary_inverse_is_adjoint_conjugation() {
        let u = random_unitary(3, &mut seeded(4, 0));
        let e = DynamicalMap::unitary(&u).unwrap();
        let inv = invert_map(&e, COND_THRESHOLD).unwrap();
        assert!(inv.may_be_udm);
        let expected = DynamicalMap::unitary(&u.adjoint()).unwrap();
        assert!((inv.map.sop().matrix() - expected.sop().matrix()).norm() < 1e-12);
        assert!(is_cp(&inv.map, TOL_CP).verdict);
    }

    #[test]
    fn depolarizing_inverse_is_not_cp() {
        let p = 0.3;
        let id = DynamicalMap::identity(2);
        let dep = id
            .combine(1.0 - p, &DynamicalMap::replacement(&diag(&[0.5, 0.5])).unwrap(), p)
            .unwrap();
        let inv = invert_map(&dep, COND_THRESHOLD).unwrap();
        assert!(!inv.may_be_udm);
        let r = is_cp(&inv.map, TOL_CP);
        assert!(!r.verdict);
        assert!(r.min_choi_eigenvalue < 0.0);
    }

    #[test]
    fn replacement_is_singular() {
        let e = DynamicalMap::replacement(&diag(&[1.0, 0.0])).unwrap();
        assert!(matches!(invert_map(&e, COND_THRESHOLD), Err(Error::SingularMap { .. })));
    }

    #[test]
    fn unitary_family_is_divisible() {
        let h = ops::pauli_x() + ops::pauli_z() * c64(0.3, 0.0);
        let l = crate::liouville::hamiltonian_superop(&h);
        let family: Vec<(f64, DynamicalMap)> = (0..8)
            .map(|k| {
                let t = 0.4 * k as f64;
                (t, DynamicalMap::new(l.exp_t(t).unwrap(), "u"))
            })
            .collect();
        let r = divisibility_witness(&family, TOL_CP).unwrap();
        assert!(r.markovian_on_grid);
        assert_eq!(r.intervals.len(), 7);
    }

    #[test]
    fn witness_rejects_unsorted_times() {
        let e = DynamicalMap::identity(2);
        let fam = vec![(1.0, e.clone()), (0.5, e)];
        assert!(matches!(
            divisibility_witness(&fam, TOL_CP),
            Err(Error::Ordering { .. })
        ));
    }

    #[test]
    fn singular_interval_is_inconclusive() {
        let e = DynamicalMap::replacement(&diag(&[1.0, 0.0])).unwrap();
        let fam = vec![(0.0, DynamicalMap::identity(2)), (1.0, e.clone()), (2.0, e)];
        let r = divisibility_witness(&fam, TOL_CP).unwrap();
        assert!(matches!(r.intervals[0].status, IntervalStatus::Cp { .. }));
        assert!(matches!(r.intervals[1].status, IntervalStatus::Inconclusive { .. }));
        assert!(!r.markovian_on_grid);
    }

    #[test]
    fn csv_round_trip() {
        let ks = random_channel(2, 2, &mut seeded(8, 0));
        let fam = vec![(0.0, DynamicalMap::identity(2)), (0.5, map_from_kraus(&ks).unwrap())];
        let back = family_from_csv(&family_to_csv(&fam)).unwrap();
        assert_eq!(back.len(), 2);
        for ((t, e), (t2, e2)) in fam.iter().zip(&back) {
            assert_eq!(t, t2);
            assert_eq!(e.sop().matrix(), e2.sop().matrix());
        }
        assert!(family_from_csv("0,1,1,0\n").is_err());
    }

    #[test]
    fn tensor_identity_of_identity() {
        let e = DynamicalMap::identity(2).tensor_identity(3);
        assert_eq!(e.sop(), &Superoperator::identity(6));
        let t = DynamicalMap::transpose(2).tensor_identity(2);
        assert!(!is_cp(&t, TOL_CP).verdict);
    }

    #[test]
    fn spectral_norm_bounds_contraction_of_unitary() {
        let u = random_unitary(2, &mut seeded(1, 1));
        let e = DynamicalMap::unitary(&u).unwrap();
        assert!((crate::liouville::spectral_norm(e.sop().matrix()) - 1.0).abs() < 1e-12);
        assert!(contraction_check(&e, 30).verdict);
    }
}
