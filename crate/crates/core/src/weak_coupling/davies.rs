use nalgebra::DMatrix;

use super::bath::{bath_rates, lamb_shift, BathModel};
use super::bohr::{bohr_decompose_all, BohrDecomposition, NearDegeneracy};
use crate::error::{Error, Result};
use crate::gksl::GKSLGenerator;
use crate::liouville::{
    c64, eigh, ensure_dim, ensure_square, hermitian_part, is_hermitian, trace_norm, DensityMatrix, Operator,
    Superoperator, C64, TOL_HERM,
};
use crate::par;

/// Hamiltonian `H_A` and Hermitian couplings `A_k` of `V = Σ_k A_k ⊗ B_k`.
#[derive(Clone, Debug)]
pub struct SystemModel {
    pub h: Operator,
    pub couplings: Vec<Operator>,
}

impl SystemModel {
    pub fn new(h: Operator, couplings: Vec<Operator>) -> Result<Self> {
        let n = ensure_square(&h)?;
        if !is_hermitian(&h, TOL_HERM) {
            return Err(Error::Validation("system Hamiltonian is not Hermitian".into()));
        }
        if couplings.is_empty() {
            return Err(Error::InvalidArgument(
                "at least one coupling operator is required".into(),
            ));
        }
        for a in &couplings {
            ensure_dim(a, n)?;
            if !is_hermitian(a, TOL_HERM) {
                return Err(Error::Validation("coupling operators must be Hermitian".into()));
            }
        }
        Ok(Self { h, couplings })
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }
}

/// Bath data at one Bohr frequency.
#[derive(Clone, Debug)]
pub struct FrequencyBlock {
    pub omega: f64,
    pub ops: Vec<Operator>,
    /// `γ_kℓ(ω)`, without the coupling strength.
    pub gamma: DMatrix<C64>,
    /// `S_kℓ(ω)`, without the coupling strength.
    pub shift: DMatrix<C64>,
}

#[derive(Clone, Debug)]
pub struct DaviesGenerator {
    pub generator: GKSLGenerator,
    /// `H_LS = Σ_ω Σ_kℓ S_kℓ(ω) A_k†(ω)A_ℓ(ω)`, without `α²`.
    pub lamb_shift: Operator,
    pub blocks: Vec<FrequencyBlock>,
    pub alpha: f64,
    pub bin_tol: f64,
    pub warnings: Vec<NearDegeneracy>,
}

impl DaviesGenerator {
    pub fn superop(&self) -> Superoperator {
        self.generator.superop()
    }

    pub fn dim(&self) -> usize {
        self.generator.dim()
    }

    pub fn block_at(&self, omega: f64) -> Option<&FrequencyBlock> {
        self.blocks.iter().find(|b| (b.omega - omega).abs() <= self.bin_tol)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct DaviesOptions {
    /// Absolute Bohr-bin width; `None` picks `10⁻⁹ max(‖H‖, 1)`.
    pub bin_tol: Option<f64>,
    pub lamb_shift: bool,
}

impl Default for DaviesOptions {
    fn default() -> Self {
        Self {
            bin_tol: None,
            lamb_shift: true,
        }
    }
}

/// Rescale `v` so its first significant entry (row-major scan) is 1;
/// returns `|c|²` for the rate.
fn normalize_gauge(v: &mut Operator) -> f64 {
    let m = v.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    let n = v.nrows();
    for r in 0..n {
        for c in 0..v.ncols() {
            let z = v[(r, c)];
            if z.norm() > 1e-8 * m {
                *v /= z;
                return z.norm_sqr();
            }
        }
    }
    1.0
}

pub fn davies_generator(system: &SystemModel, bath: &BathModel, alpha: f64) -> Result<DaviesGenerator> {
    davies_generator_with(system, bath, alpha, DaviesOptions::default())
}

/// Markovian weak-coupling generator:
/// `L = −i[H_A + α²H_LS, ·] + α² Σ_ω Σ_kℓ γ_kℓ(ω)(A_ℓ(ω)ρA_k†(ω) − ½{A_k†(ω)A_ℓ(ω), ρ})`,
/// with `γ(ω)` diagonalised into canonical jumps.
pub fn davies_generator_with(
    system: &SystemModel,
    bath: &BathModel,
    alpha: f64,
    opts: DaviesOptions,
) -> Result<DaviesGenerator> {
    let pattern = bath.pattern;
    if system.couplings.len() != pattern.size() {
        return Err(Error::InvalidArgument(format!(
            "coupling pattern {:?} needs {} operators, got {}",
            pattern,
            pattern.size(),
            system.couplings.len()
        )));
    }
    if !alpha.is_finite() {
        return Err(Error::InvalidArgument("coupling strength must be finite".into()));
    }
    let n = system.dim();
    let hscale = system.h.iter().fold(1.0f64, |m, z| m.max(z.norm()));
    let bin_tol = opts.bin_tol.unwrap_or(1e-9 * hscale);
    let dec: BohrDecomposition = bohr_decompose_all(&system.h, &system.couplings, bin_tol)?;

    let computed = par::map_range(dec.len(), |i| -> Result<(DMatrix<C64>, DMatrix<C64>)> {
        let w = dec.frequencies[i];
        let g = bath_rates(bath, w, pattern)?;
        let s = if opts.lamb_shift {
            lamb_shift(bath, w, pattern)?
        } else {
            DMatrix::zeros(pattern.size(), pattern.size())
        };
        Ok((g, s))
    });

    let a2 = alpha * alpha;
    let mut blocks = Vec::with_capacity(dec.len());
    let mut h_ls = Operator::zeros(n, n);
    let mut jumps = Vec::new();
    for ((w, ops), res) in dec.frequencies.iter().zip(dec.blocks).zip(computed) {
        let (gamma, shift) = res?;
        let k = ops.len();
        for a in 0..k {
            for b in 0..k {
                if shift[(a, b)].norm() > 0.0 {
                    h_ls += ops[a].adjoint() * &ops[b] * shift[(a, b)];
                }
            }
        }
        let (lam, u) = eigh(&gamma);
        let top = lam.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (m, &l) in lam.iter().enumerate() {
            if l <= 1e-12 * top || l <= 0.0 {
                continue;
            }
            let mut v = Operator::zeros(n, n);
            for (q, op) in ops.iter().enumerate() {
                v += op * u[(q, m)].conj();
            }
            if v.iter().all(|z| z.norm() == 0.0) {
                continue;
            }
            let weight = normalize_gauge(&mut v);
            jumps.push((a2 * l * weight, v));
        }
        blocks.push(FrequencyBlock {
            omega: *w,
            ops,
            gamma,
            shift,
        });
    }
    let h_ls = hermitian_part(&h_ls);
    let h = &system.h + &h_ls * c64(a2, 0.0);
    let generator = GKSLGenerator::new(h, jumps)?;
    Ok(DaviesGenerator {
        generator,
        lamb_shift: h_ls,
        blocks,
        alpha,
        bin_tol,
        warnings: dec.warnings,
    })
}

#[derive(Clone, Debug)]
pub struct KmsReport {
    /// `max_ω ‖γ(ω) − e^{ω/T}γ(−ω)ᵀ‖ / ‖γ(ω)‖` over checked pairs.
    pub max_violation: f64,
    pub pairs_checked: usize,
    /// True when `T = 0` or every `ω/T` exceeds 700, where the relation
    /// degenerates to `γ(−ω) = 0`.
    pub vacuum: bool,
    pub passed: bool,
}

/// Detailed-balance check `γ_kℓ(ω) = e^{ω/T} γ_ℓk(−ω)` on every positive
/// Bohr frequency.
pub fn kms_check(gen: &DaviesGenerator, temperature: f64, tol: f64) -> Result<KmsReport> {
    let mut worst = 0.0f64;
    let mut pairs = 0;
    let mut vacuum = true;
    for b in gen.blocks.iter().filter(|b| b.omega > 0.0) {
        let partner = gen.block_at(-b.omega).ok_or(Error::IncompleteDecomposition(b.omega))?;
        let scale = b.gamma.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        if temperature == 0.0 || b.omega / temperature > 700.0 {
            let back = partner.gamma.iter().fold(0.0f64, |m, z| m.max(z.norm()));
            if scale > 0.0 {
                worst = worst.max(back / scale);
            }
            pairs += 1;
            continue;
        }
        vacuum = false;
        let boltz = (b.omega / temperature).exp();
        let diff = &b.gamma - partner.gamma.transpose() * c64(boltz, 0.0);
        let d = diff.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        if scale > 0.0 {
            worst = worst.max(d / scale);
        } else if d > 0.0 {
            worst = f64::INFINITY;
        }
        pairs += 1;
    }
    Ok(KmsReport {
        max_violation: worst,
        pairs_checked: pairs,
        vacuum,
        passed: worst <= tol,
    })
}

/// Gibbs state `e^{−H/T}/Z`; the uniform mixture over the ground level at
/// `T = 0`.
pub fn thermal_state(h: &Operator, temperature: f64) -> Result<DensityMatrix> {
    ensure_square(h)?;
    if !(temperature >= 0.0) {
        return Err(Error::InvalidArgument("temperature must be >= 0".into()));
    }
    let (e, v) = eigh(h);
    let e0 = e[0];
    let weights: Vec<f64> = if temperature == 0.0 {
        let scale = e.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        e.iter()
            .map(|&x| if x - e0 <= 1e-12 * scale { 1.0 } else { 0.0 })
            .collect()
    } else {
        e.iter().map(|&x| (-(x - e0) / temperature).exp()).collect()
    };
    let z: f64 = weights.iter().sum();
    let n = h.nrows();
    let mut rho = Operator::zeros(n, n);
    for (i, w) in weights.iter().enumerate() {
        if *w > 0.0 {
            let c = v.column(i);
            rho += c * c.adjoint() * c64(w / z, 0.0);
        }
    }
    DensityMatrix::new(hermitian_part(&rho))
}

/// `‖L(ρ_th)‖₁` for the Gibbs state of the bare system Hamiltonian.
pub fn stationarity_check(gen: &DaviesGenerator, h_system: &Operator, temperature: f64) -> Result<f64> {
    let rho = thermal_state(h_system, temperature)?;
    trace_norm(&gen.generator.apply(rho.op()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::ops;
    use crate::weak_coupling::{presets, BathModel, CouplingPattern};

    #[test]
    fn gauge_normalization() {
        let mut v = ops::sigma_minus() * c64(0.0, -2.0);
        let w = normalize_gauge(&mut v);
        assert!((w - 4.0).abs() < 1e-15);
        assert!((&v - ops::sigma_minus()).norm() < 1e-15);
    }

    #[test]
    fn thermal_state_qubit() {
        let h = ops::pauli_z() * c64(0.5, 0.0);
        let rho = thermal_state(&h, 0.0).unwrap();
        assert!((rho.op()[(1, 1)].re - 1.0).abs() < 1e-15);
        let rho = thermal_state(&h, 1.0).unwrap();
        let ratio = rho.op()[(0, 0)].re / rho.op()[(1, 1)].re;
        assert!((ratio - (-1.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn pattern_size_mismatch() {
        let p = presets::pure_dephasing(1.0);
        let bath = BathModel::ohmic(0.05, 1.0, 0.5, 20.0, CouplingPattern::PositionXy).unwrap();
        assert!(davies_generator(&p.system, &bath, 0.1).is_err());
    }
}
