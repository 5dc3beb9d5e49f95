use crate::error::Result;
use crate::liouville::{c64, C64};
use crate::par;
use crate::quad::{composite_nodes, phi1};
use crate::weak_coupling::BathModel;

/// `K_t(y) = ∫₀^t e^{iyu} du = t φ₁(iyt)`.
pub fn finite_time_kernel(y: f64, t: f64) -> C64 {
    phi1(c64(0.0, y * t)) * t
}

/// Composite Gauss–Legendre nodes on `(0, ω_max)` with the bath weights
/// `J(n̄+1)` and `Jn̄` folded in. Panels are no wider than
/// `min(ω_max/64, 1/t)` so that kernels of width `1/t` are resolved.
#[derive(Clone, Debug)]
pub struct FrequencyGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub w_plus: Vec<f64>,
    pub w_minus: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(bath: &BathModel, t: f64, extra_breaks: &[f64], refine: usize) -> Self {
        let wmax = bath.omega_max;
        let width = (wmax / 64.0).min(if t > 0.0 { 1.0 / t } else { f64::INFINITY }) / (1usize << refine) as f64;
        let mut pts = vec![0.0, wmax];
        pts.extend(bath.breakpoints());
        pts.extend(extra_breaks.iter().map(|x| x.abs()).filter(|&x| x > 0.0 && x < wmax));
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * wmax);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for w in pts.windows(2) {
            let panels = ((w[1] - w[0]) / width).ceil().max(1.0) as usize;
            let (x, q) = composite_nodes(w[0], w[1], panels);
            nodes.extend(x);
            weights.extend(q);
        }
        let w_plus = nodes.iter().map(|&v| bath.w_plus(v)).collect();
        let w_minus = nodes.iter().map(|&v| bath.w_minus(v)).collect();
        Self {
            nodes,
            weights,
            w_plus,
            w_minus,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Sums `f(i)` over node chunks in parallel; `f` adds its node's
    /// contribution into the accumulator.
    pub fn accumulate<F>(&self, size: usize, f: F) -> Vec<C64>
    where
        F: Fn(usize, &mut [C64]) + Sync + Send,
    {
        const CHUNK: usize = 2048;
        let chunks = self.len().div_ceil(CHUNK);
        let parts = par::map_range(chunks, |c| {
            let mut acc = vec![c64(0.0, 0.0); size];
            for i in c * CHUNK..((c + 1) * CHUNK).min(self.len()) {
                f(i, &mut acc);
            }
            acc
        });
        let mut total = vec![c64(0.0, 0.0); size];
        for p in parts {
            for (t, x) in total.iter_mut().zip(p) {
                *t += x;
            }
        }
        total
    }
}

/// Repeats `eval` on grids refined by factors of two until the largest
/// entry changes by at most `tol` relative, returning the finer result.
pub fn converged<F>(eval: F, tol: f64, max_refine: usize) -> Result<Vec<C64>>
where
    F: Fn(usize) -> Vec<C64>,
{
    let mut prev = eval(0);
    for r in 1..=max_refine {
        let next = eval(r);
        let scale = next.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let diff = next.iter().zip(&prev).fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        if diff <= tol * scale.max(f64::MIN_POSITIVE) {
            return Ok(next);
        }
        prev = next;
    }
    Err(crate::error::Error::Quadrature(format!(
        "frequency grid did not stabilise to {tol:e} after {max_refine} refinements"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weak_coupling::CouplingPattern;

    #[test]
    fn kernel_small_and_large_arguments() {
        let k = finite_time_kernel(0.0, 2.0);
        assert!((k - c64(2.0, 0.0)).norm() < 1e-15);
        let (y, t) = (3.0, 1.7);
        let direct = (c64(0.0, y * t).exp() - 1.0) / c64(0.0, y);
        assert!((finite_time_kernel(y, t) - direct).norm() < 1e-14);
    }

    #[test]
    fn grid_integrates_bath_weight() {
        let bath = BathModel::ohmic(0.1, 1.0, 0.5, 20.0, CouplingPattern::Single).unwrap();
        let g = FrequencyGrid::new(&bath, 1.0, &[], 0);
        let s: f64 = g.weights.iter().zip(&g.w_plus).map(|(w, x)| w * x).sum();
        let direct = bath.integrate(|w| bath.w_plus(w), 1e-13).unwrap();
        assert!((s - direct).abs() < 1e-12);
    }
}
