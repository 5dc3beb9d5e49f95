use nalgebra::DMatrix;

use super::grid::{converged, finite_time_kernel, FrequencyGrid};
use super::kernel::{check_grid, Trajectory};
use super::tcl::{bohr_of, check_pattern, TOL_GRID};
use crate::error::{Error, Result};
use crate::gksl::GKSLGenerator;
use crate::liouville::{
    c64, conjugation_superop, devectorize, eigh, expm, hamiltonian_superop, hermitian_part, left, right, vectorize,
    DensityMatrix, Operator, Superoperator, C64, TOL_PSD,
};
use crate::par;
use crate::quad::exp_dd2;
use crate::weak_coupling::{BathModel, BohrDecomposition, SystemModel};

/// Coarse-grained generator `L̄^τ = L^τ/τ`.
#[derive(Clone, Debug)]
pub struct CoarseGrained {
    pub tau: f64,
    pub alpha: f64,
    /// `L̄^τ` in the interaction picture.
    pub interaction: Superoperator,
    /// `−i[H_A, ·] + L̄^τ`.
    pub superop: Superoperator,
    /// `H_LS^τ/τ` without `α²`.
    pub lamb_shift: Operator,
    /// Kossakowski matrix of `L̄^τ` (with `α²`), indexed by
    /// (coupling, Bohr frequency) pairs in `labels` order.
    pub kossakowski: DMatrix<C64>,
    pub labels: Vec<(usize, f64)>,
    pub operators: Vec<Operator>,
    pub min_kossakowski_eigenvalue: f64,
}

impl CoarseGrained {
    /// Canonical GKSL form of `−i[H_A + α²H_LS^τ/τ, ·] + D^τ/τ`; eigenvalues
    /// of the Kossakowski matrix below `tol_psd` relative are dropped.
    pub fn generator(&self, h_a: &Operator) -> Result<GKSLGenerator> {
        let n = h_a.nrows();
        let (lam, u) = eigh(&self.kossakowski);
        let top = lam.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut jumps = Vec::new();
        for (m, &rate) in lam.iter().enumerate() {
            if rate <= TOL_PSD * top {
                continue;
            }
            let mut v = Operator::zeros(n, n);
            for (q, op) in self.operators.iter().enumerate() {
                v += op * u[(q, m)].conj();
            }
            jumps.push((rate, v));
        }
        let a2 = self.alpha * self.alpha;
        GKSLGenerator::new(h_a + &self.lamb_shift * c64(a2, 0.0), jumps)
    }

    /// Entry of the Kossakowski matrix between `(k, ω)` and `(ℓ, ω′)`.
    pub fn entry(&self, k: usize, omega: f64, l: usize, omega_p: f64, tol: f64) -> Option<C64> {
        let find = |c: usize, w: f64| {
            self.labels
                .iter()
                .position(|&(cc, ww)| cc == c && (ww - w).abs() <= tol)
        };
        Some(self.kossakowski[(find(k, omega)?, find(l, omega_p)?)])
    }
}

/// Dynamical coarse graining over `[0, τ]`. With `Λ = ∫₀^τ Ṽ(t)dt`,
/// `D^τρ = α²Tr_B[ΛρΛ − ½{Λ², ρ}]` and
/// `H_LS^τ = (α²/2i)∫∫_{t₂<t₁}Tr_B[Ṽ(t₁), Ṽ(t₂)]`. The time integrals are done
/// in closed form per bath frequency, leaving one frequency integral:
/// `G_kℓ(ω, ω′) = ∫dν M₊w₊(ν) K_τ(ω′−ν) K_τ(ω−ν)* + M₋w₋(ν) K_τ(ω′+ν) K_τ(ω+ν)*`.
pub fn coarse_grain_generator(system: &SystemModel, bath: &BathModel, tau: f64, alpha: f64) -> Result<CoarseGrained> {
    check_pattern(system, bath)?;
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "coarse-graining time must be positive, got {tau}"
        )));
    }
    let dec = bohr_of(system)?;
    coarse_with_decomposition(system, bath, tau, alpha, &dec)
}

fn coarse_with_decomposition(
    system: &SystemModel,
    bath: &BathModel,
    tau: f64,
    alpha: f64,
    dec: &BohrDecomposition,
) -> Result<CoarseGrained> {
    let n = system.dim();
    let freqs = &dec.frequencies;
    let f = freqs.len();
    let kc = system.couplings.len();
    let (mp, mm) = (bath.pattern.emission(), bath.pattern.absorption());

    // Layout: [G₊, G₋, X₊, X₋], each f×f with index j·f + i for (ω′=ω_j, ω=ω_i).
    let size = 4 * f * f;
    let tau2 = c64(tau * tau, 0.0);
    let sums = converged(
        |r| {
            let grid = FrequencyGrid::new(bath, tau, freqs, r);
            grid.accumulate(size, |node, acc| {
                let (v, w) = (grid.nodes[node], grid.weights[node]);
                let (p, q) = (w * grid.w_plus[node], w * grid.w_minus[node]);
                for (sign, weight, base_g, base_x) in [(-1.0, p, 0, 2), (1.0, q, 1, 3)] {
                    if weight == 0.0 {
                        continue;
                    }
                    let k: Vec<C64> = freqs.iter().map(|&om| finite_time_kernel(om + sign * v, tau)).collect();
                    for j in 0..f {
                        for i in 0..f {
                            acc[base_g * f * f + j * f + i] += k[j] * k[i].conj() * weight;
                            let a = c64(0.0, (freqs[j] + sign * v) * tau);
                            let z2 = c64(0.0, (freqs[j] - freqs[i]) * tau);
                            acc[base_x * f * f + j * f + i] += exp_dd2(c64(0.0, 0.0), a, z2) * tau2 * weight;
                        }
                    }
                }
            })
        },
        TOL_GRID,
        4,
    )?;
    let at = |block: usize, j: usize, i: usize| sums[block * f * f + j * f + i];

    let mut labels = Vec::with_capacity(kc * f);
    let mut operators = Vec::with_capacity(kc * f);
    for k in 0..kc {
        for (i, &w) in freqs.iter().enumerate() {
            labels.push((k, w));
            operators.push(dec.blocks[i][k].clone());
        }
    }
    let m = kc * f;
    let a2 = alpha * alpha;
    let mut koss = DMatrix::<C64>::zeros(m, m);
    let mut x = Operator::zeros(n, n);
    for k in 0..kc {
        for j in 0..f {
            let a = k * f + j;
            for l in 0..kc {
                for i in 0..f {
                    let b = l * f + i;
                    let g = mp[(k, l)] * at(0, j, i) + mm[(k, l)] * at(1, j, i);
                    koss[(a, b)] = g * c64(a2 / tau, 0.0);
                    let xi = mp[(k, l)] * at(2, j, i) + mm[(k, l)] * at(3, j, i);
                    if xi.norm() != 0.0 {
                        x += operators[a].adjoint() * &operators[b] * xi;
                    }
                }
            }
        }
    }
    let koss = (&koss + koss.adjoint()) * c64(0.5, 0.0);
    let lamb = (&x - x.adjoint()) * c64(0.0, -0.5 / tau);
    let lamb = hermitian_part(&lamb);

    let mut d = Superoperator::zeros(n);
    for a in 0..m {
        for b in 0..m {
            let c = koss[(a, b)];
            if c.norm() == 0.0 {
                continue;
            }
            let oa_d = operators[a].adjoint();
            let prod = &oa_d * &operators[b];
            let term =
                &(&conjugation_superop(&operators[b], &oa_d)? - &left(&prod).scale(0.5)) - &right(&prod).scale(0.5);
            d = &d + &Superoperator::new(term.matrix() * c)?;
        }
    }
    let interaction = &hamiltonian_superop(&lamb).scale(a2) + &d;
    let superop = &hamiltonian_superop(&system.h) + &interaction;
    let (lam, _) = eigh(&koss);
    Ok(CoarseGrained {
        tau,
        alpha,
        interaction,
        superop,
        lamb_shift: lamb,
        kossakowski: koss,
        labels,
        operators,
        min_kossakowski_eigenvalue: lam.first().copied().unwrap_or(0.0),
    })
}

/// `ρ(t) = U_t e^{t L̄^{τ=t}} ρ₀` with `U_t` the free evolution, one
/// coarse-graining time per output point.
pub fn coarse_grain_evolve(
    system: &SystemModel,
    bath: &BathModel,
    alpha: f64,
    rho0: &DensityMatrix,
    t_grid: &[f64],
) -> Result<Trajectory> {
    check_grid(t_grid)?;
    check_pattern(system, bath)?;
    if rho0.dim() != system.dim() {
        return Err(Error::Dimension {
            expected: system.dim(),
            found: rho0.dim(),
        });
    }
    let dec = bohr_of(system)?;
    let free = hamiltonian_superop(&system.h);
    let v0 = vectorize(rho0.op());
    let states = par::map_slice(t_grid, |&t| -> Result<Operator> {
        if t == 0.0 {
            return Ok(rho0.op().clone());
        }
        let cg = coarse_with_decomposition(system, bath, t, alpha, &dec)?;
        let inter = expm(&(cg.interaction.matrix() * c64(t, 0.0)))?;
        let rot = expm(&(free.matrix() * c64(t, 0.0)))?;
        devectorize(&(rot * inter * &v0))
    });
    let states = states.into_iter().collect::<Result<Vec<_>>>()?;
    let traj = Trajectory::new(t_grid.to_vec(), states, None);
    traj.density_matrices()?;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weak_coupling::{presets, CouplingPattern};

    #[test]
    fn alpha_enters_quadratically() {
        let p = presets::damped_qubit(1.0);
        let bath = BathModel::ohmic(0.05, 1.0, 0.5, 20.0, CouplingPattern::PositionXy).unwrap();
        let a = coarse_grain_generator(&p.system, &bath, 3.0, 0.1).unwrap();
        let b = coarse_grain_generator(&p.system, &bath, 3.0, 0.2).unwrap();
        let diff = (&b.kossakowski - &a.kossakowski * c64(4.0, 0.0)).norm();
        assert!(diff <= 1e-10 * b.kossakowski.norm());
        let da = &a.interaction - &hamiltonian_superop(&a.lamb_shift).scale(0.01);
        let db = &b.interaction - &hamiltonian_superop(&b.lamb_shift).scale(0.04);
        assert!((db.matrix() - da.matrix() * c64(4.0, 0.0)).norm() <= 1e-10 * db.norm());
    }
}
