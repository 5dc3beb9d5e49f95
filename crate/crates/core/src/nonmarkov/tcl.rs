use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::grid::{converged, finite_time_kernel, FrequencyGrid};
use super::kernel::{check_grid, Trajectory};
use crate::error::{Error, Result};
use crate::gksl::GKSLGenerator;
use crate::liouville::{
    c64, conjugation_superop, devectorize, eigh, expm, hamiltonian_superop, hermitian_part, left, right, vectorize,
    DensityMatrix, Operator, Superoperator, C64,
};
use crate::maps::{choi_of, invert_map, DynamicalMap, COND_THRESHOLD};
use crate::par;
use crate::weak_coupling::{bohr_decompose_all, BathModel, BohrDecomposition, SystemModel};

/// `t ↦ L_t` on `[0, t_max]`.
#[derive(Clone)]
pub struct TimeDependentGenerator {
    eval: Arc<dyn Fn(f64) -> Result<Superoperator> + Send + Sync>,
    pub t_max: f64,
}

impl fmt::Debug for TimeDependentGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TimeDependentGenerator(t_max={})", self.t_max)
    }
}

impl TimeDependentGenerator {
    pub fn new<F: Fn(f64) -> Result<Superoperator> + Send + Sync + 'static>(eval: F, t_max: f64) -> Self {
        Self {
            eval: Arc::new(eval),
            t_max,
        }
    }

    pub fn eval(&self, t: f64) -> Result<Superoperator> {
        if !(0.0..=self.t_max).contains(&t) {
            return Err(Error::InvalidArgument(format!("time {t} outside [0, {}]", self.t_max)));
        }
        (self.eval)(t)
    }
}

/// Second-order time-convolutionless generator at time `t`, Schrödinger
/// picture.
#[derive(Clone, Debug)]
pub struct Tcl2Generator {
    pub time: f64,
    pub alpha: f64,
    pub superop: Superoperator,
    pub h: Operator,
    pub frequencies: Vec<f64>,
    pub blocks: Vec<Vec<Operator>>,
    /// `Γ^t_kℓ(ω) = ∫₀^t du e^{iωu} C_kℓ(u)` per Bohr frequency, without `α²`.
    pub coefficients: Vec<DMatrix<C64>>,
}

impl Tcl2Generator {
    /// `Γ^t(ω) + Γ^t(ω)†`, the finite-time analogue of `γ(ω)`.
    pub fn secular_rates(&self, i: usize) -> DMatrix<C64> {
        &self.coefficients[i] + self.coefficients[i].adjoint()
    }

    /// `(Γ^t(ω) − Γ^t(ω)†)/2i`, the finite-time analogue of `S(ω)`.
    pub fn secular_shift(&self, i: usize) -> DMatrix<C64> {
        (&self.coefficients[i] - self.coefficients[i].adjoint()) * c64(0.0, -0.5)
    }

    /// Generator with all cross terms between distinct Bohr frequencies
    /// dropped. Rates are not sign-checked.
    pub fn secular_part(&self) -> Result<GKSLGenerator> {
        let n = self.h.nrows();
        let a2 = self.alpha * self.alpha;
        let mut h_ls = Operator::zeros(n, n);
        let mut jumps = Vec::new();
        for (i, ops) in self.blocks.iter().enumerate() {
            let s = self.secular_shift(i);
            for (k, ak) in ops.iter().enumerate() {
                for (l, al) in ops.iter().enumerate() {
                    h_ls += ak.adjoint() * al * s[(k, l)];
                }
            }
            let (lam, u) = eigh(&self.secular_rates(i));
            for (m, &rate) in lam.iter().enumerate() {
                if rate.abs() <= 1e-14 * lam.iter().fold(0.0f64, |x, y| x.max(y.abs())) {
                    continue;
                }
                let mut v = Operator::zeros(n, n);
                for (q, op) in ops.iter().enumerate() {
                    v += op * u[(q, m)].conj();
                }
                jumps.push((a2 * rate, v));
            }
        }
        GKSLGenerator::new_unchecked(&self.h + hermitian_part(&h_ls) * c64(a2, 0.0), jumps)
    }
}

pub(crate) fn bohr_of(system: &SystemModel) -> Result<BohrDecomposition> {
    let scale = system.h.iter().fold(1.0f64, |m, z| m.max(z.norm()));
    bohr_decompose_all(&system.h, &system.couplings, 1e-9 * scale)
}

pub(crate) fn check_pattern(system: &SystemModel, bath: &BathModel) -> Result<()> {
    if system.couplings.len() != bath.pattern.size() {
        return Err(Error::InvalidArgument(format!(
            "coupling pattern {:?} needs {} operators, got {}",
            bath.pattern,
            bath.pattern.size(),
            system.couplings.len()
        )));
    }
    Ok(())
}

/// Grid tolerance for the frequency integrals.
pub const TOL_GRID: f64 = 1e-8;

/// `Γ^t(ω_i)` for each frequency: `M₊∫J(n̄+1)K_t(ω−ν) + M₋∫Jn̄K_t(ω+ν)`.
pub fn tcl2_coefficients(bath: &BathModel, frequencies: &[f64], t: f64) -> Result<Vec<DMatrix<C64>>> {
    let f = frequencies.len();
    let (mp, mm) = (bath.pattern.emission(), bath.pattern.absorption());
    if t == 0.0 {
        return Ok(vec![DMatrix::zeros(mp.nrows(), mp.nrows()); f]);
    }
    let sums = converged(
        |r| {
            let grid = FrequencyGrid::new(bath, t, frequencies, r);
            grid.accumulate(2 * f, |n, acc| {
                let (v, w) = (grid.nodes[n], grid.weights[n]);
                let (p, q) = (w * grid.w_plus[n], w * grid.w_minus[n]);
                for (i, &om) in frequencies.iter().enumerate() {
                    if p != 0.0 {
                        acc[i] += finite_time_kernel(om - v, t) * p;
                    }
                    if q != 0.0 {
                        acc[f + i] += finite_time_kernel(om + v, t) * q;
                    }
                }
            })
        },
        TOL_GRID,
        4,
    )?;
    Ok((0..f).map(|i| &mp * sums[i] + &mm * sums[f + i]).collect())
}

/// `L_t ρ = −i[H_A, ρ] − α² Σ_k ([A_k, Λ_kρ] − [A_k, ρΛ_k†])` with
/// `Λ_k = Σ_ω Σ_ℓ Γ^t_kℓ(ω) A_ℓ(ω)`. All Bohr cross terms are kept.
pub fn tcl2_generator(system: &SystemModel, bath: &BathModel, alpha: f64, t: f64) -> Result<Tcl2Generator> {
    check_pattern(system, bath)?;
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("time must be >= 0, got {t}")));
    }
    let dec = bohr_of(system)?;
    tcl2_with_decomposition(system, bath, alpha, t, &dec)
}

fn tcl2_with_decomposition(
    system: &SystemModel,
    bath: &BathModel,
    alpha: f64,
    t: f64,
    dec: &BohrDecomposition,
) -> Result<Tcl2Generator> {
    let n = system.dim();
    let coefficients = tcl2_coefficients(bath, &dec.frequencies, t)?;
    let mut l = hamiltonian_superop(&system.h);
    let a2 = alpha * alpha;
    for (k, ak) in system.couplings.iter().enumerate() {
        let mut lam = Operator::zeros(n, n);
        for (ops, g) in dec.blocks.iter().zip(&coefficients) {
            for (q, op) in ops.iter().enumerate() {
                lam += op * g[(k, q)];
            }
        }
        let lam_d = lam.adjoint();
        let term = &(&(&conjugation_superop(&lam, ak)? + &conjugation_superop(ak, &lam_d)?) - &left(&(ak * &lam)))
            - &right(&(&lam_d * ak));
        l = &l + &term.scale(a2);
    }
    Ok(Tcl2Generator {
        time: t,
        alpha,
        superop: l,
        h: system.h.clone(),
        frequencies: dec.frequencies.clone(),
        blocks: dec.blocks.clone(),
        coefficients,
    })
}

/// `t ↦ tcl2_generator(t).superop` on `[0, t_max]`.
pub fn tcl2_family(system: &SystemModel, bath: &BathModel, alpha: f64, t_max: f64) -> Result<TimeDependentGenerator> {
    check_pattern(system, bath)?;
    let dec = bohr_of(system)?;
    let (system, bath) = (system.clone(), bath.clone());
    Ok(TimeDependentGenerator::new(
        move |t| Ok(tcl2_with_decomposition(&system, &bath, alpha, t, &dec)?.superop),
        t_max,
    ))
}

/// Midpoint time-splitting propagation of the TCL2 equation. The minimal
/// Choi eigenvalue of the propagated maps is reported; complete positivity
/// is not guaranteed at finite order.
pub fn tcl2_evolve(
    system: &SystemModel,
    bath: &BathModel,
    alpha: f64,
    rho0: &DensityMatrix,
    t_grid: &[f64],
) -> Result<Trajectory> {
    let hn = crate::liouville::spectral_norm(&system.h);
    let step = 0.05 / bath.reference_frequency().max(hn).max(1e-12);
    tcl2_evolve_with(system, bath, alpha, rho0, t_grid, step)
}

pub fn tcl2_evolve_with(
    system: &SystemModel,
    bath: &BathModel,
    alpha: f64,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    max_step: f64,
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
    let mut mids = Vec::new();
    let mut owners = Vec::new();
    let mut prev = 0.0;
    for (g, &t) in t_grid.iter().enumerate() {
        let span = t - prev;
        if span > 0.0 {
            let steps = (span / max_step).ceil() as usize;
            let dt = span / steps as f64;
            for s in 0..steps {
                mids.push((prev + (s as f64 + 0.5) * dt, dt));
                owners.push(g);
            }
        }
        prev = t;
    }
    let factors = par::map_slice(&mids, |&(t, dt)| -> Result<DMatrix<C64>> {
        let l = tcl2_with_decomposition(system, bath, alpha, t, &dec)?.superop;
        expm(&(l.matrix() * c64(dt, 0.0)))
    });
    let n2 = system.dim() * system.dim();
    let mut prop = DMatrix::<C64>::identity(n2, n2);
    let mut it = factors.into_iter().zip(owners).peekable();
    let v0 = vectorize(rho0.op());
    let mut states = Vec::with_capacity(t_grid.len());
    let mut min_choi = f64::INFINITY;
    for g in 0..t_grid.len() {
        while let Some((_, owner)) = it.peek() {
            if *owner != g {
                break;
            }
            let (f, _) = it.next().expect("peeked");
            prop = f? * prop;
        }
        let map = DynamicalMap::new(Superoperator::new(prop.clone())?, "tcl2");
        let vals = choi_of(&map).eigenvalues();
        min_choi = min_choi.min(vals.first().copied().unwrap_or(0.0));
        states.push(devectorize(&(&prop * &v0))?);
    }
    Ok(Trajectory::new(t_grid.to_vec(), states, Some(min_choi)))
}

/// Exact decoherence exponent of the spin–boson pure-dephasing model with
/// `V = ασz ⊗ B`: `Γ(t) = 4α² ∫ J(ω) coth(ω/2T) (1 − cos ωt)/ω² dω`, so that
/// `|ρ_eg(t)| = |ρ_eg(0)| e^{−Γ(t)}`.
pub fn exact_dephasing_exponent(bath: &BathModel, alpha: f64, t: f64) -> Result<f64> {
    let f = |w: f64| {
        let s = (0.5 * w * t).sin();
        (bath.w_plus(w) + bath.w_minus(w)) * 2.0 * s * s / (w * w)
    };
    let mut breaks = bath.breakpoints();
    if t > 0.0 {
        let period = 2.0 * std::f64::consts::PI / t;
        let mut x = period;
        while x < bath.omega_max && breaks.len() < 4000 {
            breaks.push(x);
            x += period;
        }
    }
    let v = crate::quad::adaptive_with_breaks(f, 0.0, bath.omega_max, &breaks, 1e-14, 1e-12)?;
    Ok(4.0 * alpha * alpha * v)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Smoothing {
    /// Two-point forward differences (backward at the last sample).
    None,
    /// Three-point central differences, second-order one-sided at the ends.
    CentralDifference,
}

/// Generator recovered at one sample; `None` where the map is singular.
#[derive(Clone, Debug)]
pub struct TclSample {
    pub time: f64,
    pub generator: Option<Superoperator>,
    pub condition: f64,
}

fn derivative_weights(x: &[f64], at: f64) -> Vec<f64> {
    (0..x.len())
        .map(|j| {
            let mut num = 0.0;
            for m in 0..x.len() {
                if m == j {
                    continue;
                }
                num += x
                    .iter()
                    .enumerate()
                    .filter(|&(l, _)| l != j && l != m)
                    .map(|(_, xl)| at - xl)
                    .product::<f64>();
            }
            let den: f64 = (0..x.len()).filter(|&l| l != j).map(|l| x[j] - x[l]).product();
            num / den
        })
        .collect()
}

/// `L_t = (dE_t/dt) E_t⁻¹` from sampled maps.
pub fn tcl_from_family(samples: &[(f64, DynamicalMap)], smoothing: Smoothing) -> Result<Vec<TclSample>> {
    let need = match smoothing {
        Smoothing::None => 2,
        Smoothing::CentralDifference => 3,
    };
    if samples.len() < need {
        return Err(Error::InvalidArgument(format!("need at least {need} samples")));
    }
    let dim = samples[0].1.dim();
    for w in samples.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(Error::Ordering { t0: w[0].0, t1: w[1].0 });
        }
        if w[1].1.dim() != dim {
            return Err(Error::Dimension {
                expected: dim,
                found: w[1].1.dim(),
            });
        }
    }
    let n = samples.len();
    let times: Vec<f64> = samples.iter().map(|s| s.0).collect();
    Ok(par::map_range(n, |i| {
        let stencil: Vec<usize> = match smoothing {
            Smoothing::None => {
                if i + 1 < n {
                    vec![i, i + 1]
                } else {
                    vec![i - 1, i]
                }
            }
            Smoothing::CentralDifference => {
                let c = i.clamp(1, n - 2);
                vec![c - 1, c, c + 1]
            }
        };
        let xs: Vec<f64> = stencil.iter().map(|&j| times[j]).collect();
        let wts = derivative_weights(&xs, times[i]);
        let mut d = DMatrix::<C64>::zeros(dim * dim, dim * dim);
        for (&j, w) in stencil.iter().zip(&wts) {
            d += samples[j].1.sop().matrix() * c64(*w, 0.0);
        }
        match invert_map(&samples[i].1, COND_THRESHOLD) {
            Ok(inv) => TclSample {
                time: times[i],
                generator: Superoperator::new(d * inv.map.sop().matrix()).ok(),
                condition: inv.condition,
            },
            Err(Error::SingularMap { condition }) => TclSample {
                time: times[i],
                generator: None,
                condition,
            },
            Err(_) => TclSample {
                time: times[i],
                generator: None,
                condition: f64::INFINITY,
            },
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_weights_exact_for_quadratics() {
        let x = [0.0, 0.3, 1.0];
        let w = derivative_weights(&x, 0.3);
        let d: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * (xi * xi + 2.0 * xi)).sum();
        assert!((d - (2.0 * 0.3 + 2.0)).abs() < 1e-13);
        let w = derivative_weights(&x, 0.0);
        let d: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi * xi).sum();
        assert!(d.abs() < 1e-13);
    }
}
