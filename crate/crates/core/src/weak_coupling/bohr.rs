use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::liouville::{eigh, ensure_dim, ensure_square, is_hermitian, max_abs, Operator, C64, TOL_HERM};

/// Gaps merged into one bin although they differ by more than roundoff, or
/// distinct bins that sit closer than ten bin widths.
#[derive(Clone, Debug, PartialEq)]
pub struct NearDegeneracy {
    pub gaps: Vec<f64>,
}

/// `A_k(ω) = Σ_{ε′−ε=ω} P(ε) A_k P(ε′)` for every Bohr frequency `ω` at
/// which some `A_k(ω)` is nonzero, sorted ascending.
#[derive(Clone, Debug)]
pub struct BohrDecomposition {
    pub frequencies: Vec<f64>,
    /// `blocks[i][k] = A_k(frequencies[i])`.
    pub blocks: Vec<Vec<Operator>>,
    pub warnings: Vec<NearDegeneracy>,
}

impl BohrDecomposition {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Index of the bin at `-frequencies[i]`.
    pub fn partner(&self, i: usize, tol: f64) -> Option<usize> {
        let w = -self.frequencies[i];
        self.frequencies.iter().position(|&x| (x - w).abs() <= tol)
    }
}

/// Bohr decomposition of a single coupling operator.
pub fn bohr_decompose(h: &Operator, a: &Operator, bin_tol: f64) -> Result<BohrDecomposition> {
    bohr_decompose_all(h, std::slice::from_ref(a), bin_tol)
}

/// Energies within `bin_tol` form one level and gaps within `bin_tol` form
/// one bin.
pub fn bohr_decompose_all(h: &Operator, couplings: &[Operator], bin_tol: f64) -> Result<BohrDecomposition> {
    let n = ensure_square(h)?;
    if !is_hermitian(h, TOL_HERM) {
        return Err(Error::Validation("Hamiltonian is not Hermitian".into()));
    }
    if !(bin_tol > 0.0) {
        return Err(Error::InvalidArgument("bin_tol must be positive".into()));
    }
    for a in couplings {
        ensure_dim(a, n)?;
    }
    let (e, v) = eigh(h);
    let scale = e.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let roundoff = 1e-12 * scale;

    let mut levels: Vec<(f64, Vec<usize>)> = Vec::new();
    for (i, &x) in e.iter().enumerate() {
        match levels.last_mut() {
            Some((e0, idx)) if x - *e0 <= bin_tol => idx.push(i),
            _ => levels.push((x, vec![i])),
        }
    }
    let levels: Vec<(f64, Vec<usize>)> = levels
        .into_iter()
        .map(|(_, idx)| (idx.iter().map(|&i| e[i]).sum::<f64>() / idx.len() as f64, idx))
        .collect();
    let projectors: Vec<Operator> = levels
        .iter()
        .map(|(_, idx)| {
            let mut p = Operator::zeros(n, n);
            for &i in idx {
                let c = v.column(i);
                p += c * c.adjoint();
            }
            p
        })
        .collect();

    let mut gaps: Vec<(f64, usize, usize)> = Vec::new();
    for (a, la) in levels.iter().enumerate() {
        for (b, lb) in levels.iter().enumerate() {
            gaps.push((lb.0 - la.0, a, b));
        }
    }
    gaps.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut bins: Vec<Vec<(f64, usize, usize)>> = Vec::new();
    for g in gaps {
        match bins.last_mut() {
            Some(bin) if g.0 - bin[0].0 <= bin_tol => bin.push(g),
            _ => bins.push(vec![g]),
        }
    }

    let mut warnings = Vec::new();
    let norm_a = couplings.iter().map(max_abs).fold(0.0, f64::max);
    let mut frequencies = Vec::new();
    let mut blocks = Vec::new();
    for bin in &bins {
        let mut w = bin.iter().map(|g| g.0).sum::<f64>() / bin.len() as f64;
        if bin.iter().any(|g| g.1 == g.2) {
            w = 0.0;
        }
        let ops: Vec<Operator> = couplings
            .iter()
            .map(|a| {
                let mut m = Operator::zeros(n, n);
                for &(_, i, j) in bin {
                    m += &projectors[i] * a * &projectors[j];
                }
                m
            })
            .collect();
        if ops.iter().all(|m| max_abs(m) <= 1e-13 * norm_a.max(f64::MIN_POSITIVE)) {
            continue;
        }
        let lo = bin.first().map(|g| g.0).unwrap_or(w);
        let hi = bin.last().map(|g| g.0).unwrap_or(w);
        if hi - lo > roundoff {
            let mut distinct: Vec<f64> = bin.iter().map(|g| g.0).collect();
            distinct.dedup_by(|x, y| (*x - *y).abs() <= roundoff);
            warnings.push(NearDegeneracy { gaps: distinct });
        }
        frequencies.push(w);
        blocks.push(ops);
    }
    for pair in frequencies.windows(2) {
        if pair[1] - pair[0] < 10.0 * bin_tol {
            warnings.push(NearDegeneracy { gaps: pair.to_vec() });
        }
    }
    Ok(BohrDecomposition {
        frequencies,
        blocks,
        warnings,
    })
}

/// Largest residual among `Σ_ω A_k(ω) − A_k`, `[H, A_k(ω)] + ωA_k(ω)` and
/// `A_k(−ω) − A_k(ω)†`.
pub fn invariant_residual(h: &Operator, couplings: &[Operator], dec: &BohrDecomposition) -> f64 {
    let mut worst = 0.0f64;
    for (k, a) in couplings.iter().enumerate() {
        if let Some(sum) = resum(dec, k) {
            worst = worst.max(max_abs(&(sum - a)));
        }
    }
    for (i, (w, ops)) in dec.frequencies.iter().zip(&dec.blocks).enumerate() {
        for (k, b) in ops.iter().enumerate() {
            let c = h * b - b * h + b * C64::new(*w, 0.0);
            worst = worst.max(max_abs(&c));
            match dec.partner(i, 1e-9 * (1.0 + w.abs())) {
                Some(j) => worst = worst.max(max_abs(&(b.adjoint() - &dec.blocks[j][k]))),
                None => worst = f64::INFINITY,
            }
        }
    }
    worst
}

/// `Σ_ω A(ω)`; equals `A` when nothing was dropped.
pub fn resum(dec: &BohrDecomposition, k: usize) -> Option<DMatrix<C64>> {
    let mut it = dec.blocks.iter().map(|b| &b[k]);
    let first = it.next()?.clone();
    Some(it.fold(first, |acc, m| acc + m))
}
