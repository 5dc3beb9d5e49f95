//! Dense Liouville-space primitives: operators, states, superoperators in the
//! column-stacking convention, matrix exponentials and time-ordered products.

mod basis;
mod expm;
mod operator;
mod partial;
mod propagate;
mod state;
mod superop;

pub use basis::{hs_basis, HermitianBasis};
pub use expm::expm;
pub use operator::*;
pub use partial::{partial_trace, partial_trace_op, Subsystem};
pub use propagate::{propagate_midpoint, propagate_time_dependent, trotter_product};
pub use state::{trace_distance, DensityMatrix, TOL_TRACE};
pub use superop::{
    conjugation_superop, devectorize, hamiltonian_superop, left, right, sandwich, vectorize, Superoperator,
};

use crate::par;
use crate::random::{random_density_matrix, random_hermitian, random_pure_state, seeded};

/// Test input used by the sampled induced-norm estimate: sample `k` of the
/// stream derived from `seed`. Inputs cycle through random Hermitian
/// matrices, differences of random pure states and random density matrices.
pub fn sample_hermitian(n: usize, seed: u64, k: usize) -> Operator {
    let mut rng = seeded(seed, k as u64);
    match k % 3 {
        0 => random_hermitian(n, &mut rng),
        1 => {
            let a = projector(&random_pure_state(n, &mut rng));
            let b = projector(&random_pure_state(n, &mut rng));
            a - b
        }
        _ => random_density_matrix(n, &mut rng).into_inner(),
    }
}

/// Deterministic inputs: every basis projector and the differences
/// `|i⟩⟨i| − |j⟩⟨j|`, plus `(|i⟩±|j⟩)(⟨i|±⟨j|)/2` differences for `i < j`.
pub fn structured_hermitian(n: usize) -> Vec<Operator> {
    let mut out = Vec::new();
    for i in 0..n {
        out.push(unit(n, i, i));
        for j in i + 1..n {
            out.push(unit(n, i, i) - unit(n, j, j));
            let mut x = Operator::zeros(n, n);
            x[(i, j)] = ONE;
            x[(j, i)] = ONE;
            out.push(x);
            let mut y = Operator::zeros(n, n);
            y[(i, j)] = -I;
            y[(j, i)] = I;
            out.push(y);
        }
    }
    out
}

/// Lower estimate of the trace-norm-induced norm of `map` restricted to
/// Hermitian inputs: the maximum of `‖E(σ)‖₁/‖σ‖₁` over `samples` random
/// inputs plus the structured inputs above.
pub fn induced_trace_norm_estimate(map: &Superoperator, samples: usize, seed: u64) -> f64 {
    let n = map.dim();
    let ratio = |s: &Operator| {
        let den = trace_norm(s).unwrap_or(0.0);
        if den <= 0.0 {
            return 0.0;
        }
        trace_norm(&map.apply(s)).unwrap_or(f64::INFINITY) / den
    };
    let structured = structured_hermitian(n);
    let a = par::max_range(structured.len(), |k| ratio(&structured[k]));
    let b = par::max_range(samples, |k| ratio(&sample_hermitian(n, seed, k)));
    a.max(b)
}
