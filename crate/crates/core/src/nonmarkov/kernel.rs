use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::liouville::{
    c64, devectorize, min_eigenvalue, trace, vectorize, DensityMatrix, Operator, Superoperator, C64,
};
use crate::quad;

/// Memory kernel `k(t)` of `dρ/dt = ∫₀^t k(t−t′) L ρ(t′) dt′`.
#[derive(Clone, Debug, PartialEq)]
pub enum MemoryKernel {
    /// `k(t) = g e^{−gt}`, normalised to unit integral.
    Exponential { g: f64 },
    /// Linear interpolation through `(t_i, k_i)`, zero after the last node.
    Tabulated { times: Vec<f64>, values: Vec<f64> },
}

impl MemoryKernel {
    pub fn exponential(g: f64) -> Result<Self> {
        if !(g > 0.0) || !g.is_finite() {
            return Err(Error::InvalidArgument(format!("kernel rate must be positive, got {g}")));
        }
        Ok(Self::Exponential { g })
    }

    pub fn tabulated(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() || times.len() < 2 {
            return Err(Error::InvalidArgument(
                "kernel table needs at least two matching rows".into(),
            ));
        }
        if times[0] != 0.0 || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(
                "kernel table times must start at 0 and increase".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("kernel table values must be finite".into()));
        }
        Ok(Self::Tabulated { times, values })
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Self::Exponential { g } => {
                if t < 0.0 {
                    0.0
                } else {
                    g * (-g * t).exp()
                }
            }
            Self::Tabulated { times, values } => {
                if t < 0.0 || t > *times.last().expect("nonempty") {
                    return 0.0;
                }
                let k = times.partition_point(|&x| x <= t);
                if k == times.len() {
                    return *values.last().expect("nonempty");
                }
                let s = (t - times[k - 1]) / (times[k] - times[k - 1]);
                values[k - 1] + s * (values[k] - values[k - 1])
            }
        }
    }

    /// `∫₀^∞ k(t) dt`, evaluated numerically.
    pub fn normalization(&self) -> Result<f64> {
        match self {
            Self::Exponential { g } => {
                let head = quad::adaptive(|t| self.eval(t), 0.0, 60.0 / g, 1e-14, 1e-14)?;
                Ok(head + (-60.0f64).exp())
            }
            Self::Tabulated { times, values } => Ok(times
                .windows(2)
                .zip(values.windows(2))
                .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
                .sum()),
        }
    }

    fn time_scale(&self) -> f64 {
        match self {
            Self::Exponential { g } => 1.0 / g,
            Self::Tabulated { times, .. } => times.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min),
        }
    }
}

/// States on a time grid with trace and positivity diagnostics. Positivity
/// is monitored, not enforced.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Operator>,
    pub max_trace_error: f64,
    pub min_eigenvalue: f64,
    /// Smallest Choi eigenvalue of the propagated maps, where available.
    pub min_choi_eigenvalue: Option<f64>,
}

/// Eigenvalue below which a trajectory is reported as leaving the state
/// space.
pub const TOL_POSITIVITY: f64 = 1e-6;

impl Trajectory {
    pub fn new(times: Vec<f64>, states: Vec<Operator>, min_choi_eigenvalue: Option<f64>) -> Self {
        let max_trace_error = states
            .iter()
            .map(|s| (trace(s) - c64(1.0, 0.0)).norm())
            .fold(0.0, f64::max);
        let min_eigenvalue = states.iter().map(min_eigenvalue).fold(f64::INFINITY, f64::min);
        Self {
            times,
            states,
            max_trace_error,
            min_eigenvalue,
            min_choi_eigenvalue,
        }
    }

    pub fn positivity_violated(&self) -> bool {
        self.min_eigenvalue < -TOL_POSITIVITY
    }

    pub fn density_matrices(&self) -> Result<Vec<DensityMatrix>> {
        self.states
            .iter()
            .map(|s| DensityMatrix::with_tolerance(s.clone(), 1e-8, TOL_POSITIVITY))
            .collect()
    }
}

pub(crate) fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::InvalidArgument("empty time grid".into()));
    }
    if !(t_grid[0] >= 0.0) {
        return Err(Error::Ordering { t0: 0.0, t1: t_grid[0] });
    }
    for w in t_grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Ordering { t0: w[0], t1: w[1] });
        }
    }
    Ok(())
}

/// Allowed trace drift before a step-size error is raised.
pub const TOL_DRIFT: f64 = 1e-6;

/// Frobenius norm beyond which the state is taken to have blown up. Any
/// linear scheme preserves the trace exactly, so divergence must be caught
/// on the norm as well.
const GROWTH_LIMIT: f64 = 1e3;

fn check_step(r: &DVector<C64>, n: usize, time: f64) -> Result<()> {
    let drift = (vec_trace(r, n) - c64(1.0, 0.0)).norm();
    if !(drift <= TOL_DRIFT) || !(r.norm() <= GROWTH_LIMIT) {
        return Err(Error::StepSize { drift, time });
    }
    Ok(())
}

fn vec_trace(v: &DVector<C64>, n: usize) -> C64 {
    (0..n).map(|i| v[i * n + i]).sum()
}

/// Fixed-step RK4 on `(r, w)` with `ṙ = f_r(w, r)`, `ẇ = f_w(r, w)`.
fn rk4_augmented<F>(f: F, r0: DVector<C64>, n: usize, t_grid: &[f64], max_step: f64) -> Result<Vec<Operator>>
where
    F: Fn(&DVector<C64>, &DVector<C64>) -> (DVector<C64>, DVector<C64>),
{
    check_grid(t_grid)?;
    let mut r = r0;
    let mut w = DVector::<C64>::zeros(r.len());
    let mut t = 0.0;
    let mut out = Vec::with_capacity(t_grid.len());
    for &target in t_grid {
        let span = target - t;
        if span > 0.0 {
            let steps = (span / max_step).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            let hc = c64(h, 0.0);
            let half = c64(h / 2.0, 0.0);
            let sixth = c64(h / 6.0, 0.0);
            for _ in 0..steps {
                let (k1r, k1w) = f(&r, &w);
                let (k2r, k2w) = f(&(&r + &k1r * half), &(&w + &k1w * half));
                let (k3r, k3w) = f(&(&r + &k2r * half), &(&w + &k2w * half));
                let (k4r, k4w) = f(&(&r + &k3r * hc), &(&w + &k3w * hc));
                r += (k1r + &k2r * c64(2.0, 0.0) + &k3r * c64(2.0, 0.0) + k4r) * sixth;
                w += (k1w + &k2w * c64(2.0, 0.0) + &k3w * c64(2.0, 0.0) + k4w) * sixth;
                t += h;
                check_step(&r, n, t)?;
            }
        }
        t = target;
        out.push(devectorize(&r)?);
    }
    Ok(out)
}

fn default_step(l: &Superoperator, kernel: &MemoryKernel) -> f64 {
    let rate = l.spectral_norm() + 1.0 / kernel.time_scale();
    0.02 / rate
}

/// `dρ/dt = ∫₀^t k(t−t′) L ρ(t′) dt′`. For the exponential kernel this is the
/// local system `ρ̇ = w`, `ẇ = gLρ − gw`, integrated with fixed-step RK4.
pub fn memory_kernel_evolve(
    l: &Superoperator,
    kernel: &MemoryKernel,
    rho0: &DensityMatrix,
    t_grid: &[f64],
) -> Result<Trajectory> {
    memory_kernel_evolve_with(l, kernel, rho0, t_grid, default_step(l, kernel))
}

pub fn memory_kernel_evolve_with(
    l: &Superoperator,
    kernel: &MemoryKernel,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    max_step: f64,
) -> Result<Trajectory> {
    let n = rho0.dim();
    if l.dim() != n {
        return Err(Error::Dimension {
            expected: l.dim(),
            found: n,
        });
    }
    let states = match kernel {
        MemoryKernel::Exponential { g } => {
            let m = l.matrix();
            let gc = c64(*g, 0.0);
            rk4_augmented(
                |r, w| (w.clone(), (m * r - w) * gc),
                vectorize(rho0.op()),
                n,
                t_grid,
                max_step,
            )?
        }
        MemoryKernel::Tabulated { .. } => history_evolve(l, kernel, rho0, t_grid, max_step, false)?,
    };
    Ok(Trajectory::new(t_grid.to_vec(), states, None))
}

/// `dρ/dt = L ∫₀^t k(t′) e^{Lt′} ρ(t−t′) dt′`. For the exponential kernel the
/// history `w = ∫₀^t k(t−s)e^{L(t−s)}ρ(s)ds` obeys `ẇ = gρ + (L − g)w` and
/// `ρ̇ = Lw`, which is integrated as a whole, so defective `L` needs no
/// special treatment.
pub fn post_markovian_evolve(
    l: &Superoperator,
    kernel: &MemoryKernel,
    rho0: &DensityMatrix,
    t_grid: &[f64],
) -> Result<Trajectory> {
    post_markovian_evolve_with(l, kernel, rho0, t_grid, default_step(l, kernel))
}

pub fn post_markovian_evolve_with(
    l: &Superoperator,
    kernel: &MemoryKernel,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    max_step: f64,
) -> Result<Trajectory> {
    let n = rho0.dim();
    if l.dim() != n {
        return Err(Error::Dimension {
            expected: l.dim(),
            found: n,
        });
    }
    let states = match kernel {
        MemoryKernel::Exponential { g } => {
            let m = l.matrix();
            let gc = c64(*g, 0.0);
            rk4_augmented(
                |r, w| (m * w, r * gc + m * w - w * gc),
                vectorize(rho0.op()),
                n,
                t_grid,
                max_step,
            )?
        }
        MemoryKernel::Tabulated { .. } => history_evolve(l, kernel, rho0, t_grid, max_step, true)?,
    };
    Ok(Trajectory::new(t_grid.to_vec(), states, None))
}

/// Trapezoidal history quadrature with a Heun predictor–corrector on a
/// uniform internal grid, O(h²); output by linear interpolation.
fn history_evolve(
    l: &Superoperator,
    kernel: &MemoryKernel,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    max_step: f64,
    post_markovian: bool,
) -> Result<Vec<Operator>> {
    check_grid(t_grid)?;
    let n = rho0.dim();
    let t_end = *t_grid.last().expect("nonempty");
    let steps = ((t_end / max_step).ceil() as usize).max(1);
    let h = t_end / steps as f64;
    let m = l.matrix();
    let prop = if post_markovian {
        Some(l.exp_t(h)?.into_matrix())
    } else {
        None
    };
    let kv: Vec<f64> = (0..=steps).map(|j| kernel.eval(j as f64 * h)).collect();

    let mut rs: Vec<DVector<C64>> = vec![vectorize(rho0.op())];
    // hist[j] holds L r_j (memory kernel) or r_j (post-Markovian), advanced
    // by e^{Lh} at every step in the post-Markovian case.
    let mut hist: Vec<DVector<C64>> = Vec::new();
    let source = |r: &DVector<C64>| if post_markovian { r.clone() } else { m * r };
    hist.push(source(&rs[0]));

    let history = |hist: &[DVector<C64>], last: &DVector<C64>, k: usize| -> DVector<C64> {
        // Σ' over j = 0..k with trapezoid end weights; `last` replaces hist[k].
        let mut acc = DVector::<C64>::zeros(last.len());
        if k == 0 {
            return acc;
        }
        acc += &hist[0] * c64(0.5 * kv[k], 0.0);
        for (j, hj) in hist.iter().enumerate().take(k).skip(1) {
            acc += hj * c64(kv[k - j], 0.0);
        }
        acc += last * c64(0.5 * kv[0], 0.0);
        let acc = acc * c64(h, 0.0);
        if post_markovian {
            m * acc
        } else {
            acc
        }
    };

    let mut f_prev = DVector::<C64>::zeros(rs[0].len());
    for k in 0..steps {
        if let Some(p) = &prop {
            for hj in hist.iter_mut() {
                *hj = p * &*hj;
            }
        }
        let r = rs[k].clone();
        let pred = &r + &f_prev * c64(h, 0.0);
        let f_pred = history(&hist, &source(&pred), k + 1);
        let next = &r + (&f_prev + &f_pred) * c64(h / 2.0, 0.0);
        let f_next = history(&hist, &source(&next), k + 1);
        check_step(&next, n, (k + 1) as f64 * h)?;
        hist.push(source(&next));
        rs.push(next);
        f_prev = f_next;
    }
    t_grid
        .iter()
        .map(|&t| {
            let x = t / h;
            let i = (x.floor() as usize).min(steps);
            let v = if i == steps {
                rs[steps].clone()
            } else {
                let s = x - i as f64;
                &rs[i] * c64(1.0 - s, 0.0) + &rs[i + 1] * c64(s, 0.0)
            };
            devectorize(&v)
        })
        .collect()
}
