use nalgebra::DMatrix;

use super::expm::expm;
use super::operator::C64;
use super::superop::Superoperator;
use crate::error::{Error, Result};
use crate::par;

/// `(e^{L1/n} e^{L2/n})^n`. The deviation from `e^{L1+L2}` is O(1/n).
pub fn trotter_product(l1: &Superoperator, l2: &Superoperator, n: u64) -> Result<Superoperator> {
    l1.check_same(l2)?;
    if n == 0 {
        return Err(Error::InvalidArgument("trotter_product needs n >= 1".into()));
    }
    let s = C64::new(1.0 / n as f64, 0.0);
    let step = expm(&(l1.matrix() * s))? * expm(&(l2.matrix() * s))?;
    Superoperator::new(matrix_power(step, n))
}

fn matrix_power(mut base: DMatrix<C64>, mut n: u64) -> DMatrix<C64> {
    let dim = base.nrows();
    let mut acc = DMatrix::<C64>::identity(dim, dim);
    while n > 0 {
        if n & 1 == 1 {
            acc = &acc * &base;
        }
        n >>= 1;
        if n > 0 {
            base = &base * &base;
        }
    }
    acc
}

const CHUNK: usize = 64;

fn split_product<F>(gen: &F, t0: f64, t1: f64, steps: usize, offset: f64) -> Result<Superoperator>
where
    F: Fn(f64) -> Superoperator + Sync + Send,
{
    if t1 < t0 {
        return Err(Error::Ordering { t0, t1 });
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("propagation needs steps >= 1".into()));
    }
    let dt = (t1 - t0) / steps as f64;
    let first = gen(t0 + offset * dt);
    let dim = first.dim();
    let mut acc = Superoperator::identity(dim);
    let mut start = 0;
    while start < steps {
        let end = (start + CHUNK).min(steps);
        let factors = par::map_range(end - start, |k| -> Result<DMatrix<C64>> {
            let t = t0 + ((start + k) as f64 + offset) * dt;
            let g = gen(t);
            if g.dim() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    found: g.dim(),
                });
            }
            expm(&(g.matrix() * C64::new(dt, 0.0)))
        });
        let mut m = acc.into_matrix();
        for f in factors {
            m = f? * m;
        }
        acc = Superoperator::new(m)?;
        start = end;
    }
    Ok(acc)
}

/// Time-splitting propagator `∏_{j=n−1…0} e^{Δt·gen(t_j)}` on a uniform grid
/// with left endpoints `t_j = t0 + jΔt`. Later times act to the left.
pub fn propagate_time_dependent<F>(gen: F, t0: f64, t1: f64, steps: usize) -> Result<Superoperator>
where
    F: Fn(f64) -> Superoperator + Sync + Send,
{
    split_product(&gen, t0, t1, steps, 0.0)
}

/// Same product with each factor evaluated at the interval midpoint, which
/// is second-order accurate.
pub fn propagate_midpoint<F>(gen: F, t0: f64, t1: f64, steps: usize) -> Result<Superoperator>
where
    F: Fn(f64) -> Superoperator + Sync + Send,
{
    split_product(&gen, t0, t1, steps, 0.5)
}
