//! Quadrature and small special-function helpers: Gauss–Legendre rules,
//! adaptive Gauss–Kronrod, Cauchy principal values and stable divided
//! differences of the exponential.

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::liouville::{c64, C64};

/// Values that can be integrated: reals and complex numbers.
pub trait Integrand: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }

    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Integrand for C64 {
    fn zero() -> Self {
        c64(0.0, 0.0)
    }

    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [−1, 1],
/// computed by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for k in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * k + 1) as f64 * z * p1 - k as f64 * p2) / (k + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Points per panel of the composite rules.
pub const PANEL_ORDER: usize = 10;

/// Composite Gauss–Legendre nodes and weights on `[a, b]` with `panels`
/// equal panels.
pub fn composite_nodes(a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = gauss_legendre(PANEL_ORDER);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * PANEL_ORDER);
    let mut weights = Vec::with_capacity(panels * PANEL_ORDER);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (x, w) in gx.iter().zip(&gw) {
            nodes.push(lo + 0.5 * h * (x + 1.0));
            weights.push(0.5 * h * w);
        }
    }
    (nodes, weights)
}

/// Composite Gauss–Legendre integral with a fixed number of panels.
pub fn composite<T: Integrand, F: Fn(f64) -> T>(f: F, a: f64, b: f64, panels: usize) -> T {
    let (nodes, weights) = composite_nodes(a, b, panels);
    nodes
        .iter()
        .zip(&weights)
        .fold(T::zero(), |acc, (&x, &w)| acc + f(x) * w)
}

/// Doubles the panel count from `panels` until successive results agree to
/// `tol` (relative, with an absolute floor of `tol`).
pub fn composite_converged<T: Integrand, F: Fn(f64) -> T>(f: F, a: f64, b: f64, panels: usize, tol: f64) -> Result<T> {
    let mut n = panels.max(1);
    let mut prev = composite(&f, a, b, n);
    for _ in 0..14 {
        n *= 2;
        let next = composite(&f, a, b, n);
        if (next - prev).magnitude() <= tol * next.magnitude().max(1.0) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Quadrature(format!(
        "composite rule on [{a}, {b}] did not converge to {tol:e} with {n} panels"
    )))
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<T: Integrand, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let pair = f(c - x) + f(c + x);
        kronrod = kronrod + pair * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let k = kronrod * h;
    let g = gauss * h;
    (k, (k - g).magnitude())
}

/// Adaptive Gauss–Kronrod (7/15) with global bisection. Converges when the
/// summed error estimate is below `max(abs_tol, rel_tol·|I|)`.
pub fn adaptive<T: Integrand, F: Fn(f64) -> T>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    let mut parts: Vec<(f64, f64, T, f64)> = Vec::new();
    let (v, e) = gk15(&f, a, b);
    parts.push((a, b, v, e));
    for _ in 0..5000 {
        let total = parts.iter().fold(T::zero(), |acc, p| acc + p.2);
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.magnitude()) {
            return Ok(total);
        }
        let (k, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = parts.swap_remove(k);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
    Err(Error::Quadrature(format!(
        "adaptive rule on [{a}, {b}] exceeded its subdivision budget"
    )))
}

/// Adaptive integral split at interior `breaks` (kinks or support edges).
pub fn adaptive_with_breaks<T: Integrand, F: Fn(f64) -> T>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<T> {
    let mut pts = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.sort_by(f64::total_cmp);
    pts.extend(inner);
    pts.push(b);
    let pieces = (pts.len() - 1) as f64;
    let mut total = T::zero();
    for w in pts.windows(2) {
        total = total + adaptive(&f, w[0], w[1], abs_tol / pieces, rel_tol)?;
    }
    Ok(total)
}

/// Cauchy principal value `PV ∫_a^b g(x)/(x − c) dx` for `a < c < b` with a
/// fixed panel count. The symmetric window `|x − c| < h` is folded into
/// `∫_0^h [g(c+u) − g(c−u)]/u du`, whose integrand is regular, and the
/// remaining one-sided tail is integrated directly.
pub fn principal_value_panels<F: Fn(f64) -> f64>(g: F, a: f64, b: f64, c: f64, panels: usize) -> Result<f64> {
    if !(a < c && c < b) {
        return Err(Error::Quadrature(format!(
            "principal value pole {c} is not strictly inside ({a}, {b})"
        )));
    }
    let h = (c - a).min(b - c);
    let sym = composite(|u| (g(c + u) - g(c - u)) / u, 0.0, h, panels);
    let tail_len = (c - a).max(b - c) - h;
    let tail_panels = ((panels as f64 * tail_len / h).ceil() as usize).clamp(1, 64 * panels);
    let tail = if tail_len <= 0.0 {
        0.0
    } else if c - a > b - c {
        composite(|x| g(x) / (x - c), a, c - h, tail_panels)
    } else {
        composite(|x| g(x) / (x - c), c + h, b, tail_panels)
    };
    Ok(sym + tail)
}

/// [`principal_value_panels`] with panel doubling until the relative change
/// is below `tol`.
pub fn principal_value<F: Fn(f64) -> f64>(g: F, a: f64, b: f64, c: f64, tol: f64) -> Result<f64> {
    let mut n = 8;
    let mut prev = principal_value_panels(&g, a, b, c, n)?;
    for _ in 0..12 {
        n *= 2;
        let next = principal_value_panels(&g, a, b, c, n)?;
        if (next - prev).abs() <= tol * next.abs().max(1e-300) || (next - prev).abs() < 1e-15 {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Quadrature(format!(
        "principal value at {c} did not converge to {tol:e}"
    )))
}

/// Adaptive principal value with the same symmetric fold, for integrands
/// with kinks at `breaks`.
pub fn principal_value_adaptive<F: Fn(f64) -> f64>(
    g: F,
    a: f64,
    b: f64,
    c: f64,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64> {
    if !(a < c && c < b) {
        return Err(Error::Quadrature(format!(
            "principal value pole {c} is not strictly inside ({a}, {b})"
        )));
    }
    let h = (c - a).min(b - c);
    let folded: Vec<f64> = breaks.iter().map(|&x| (x - c).abs()).collect();
    let sym = adaptive_with_breaks(|u| (g(c + u) - g(c - u)) / u, 0.0, h, &folded, abs_tol, rel_tol)?;
    let tail = if c - a > b - c {
        adaptive_with_breaks(|x| g(x) / (x - c), a, c - h, breaks, abs_tol, rel_tol)?
    } else if b - c > c - a {
        adaptive_with_breaks(|x| g(x) / (x - c), c + h, b, breaks, abs_tol, rel_tol)?
    } else {
        0.0
    };
    Ok(sym + tail)
}

/// `φ₁(z) = (e^z − 1)/z`, with `φ₁(0) = 1`.
pub fn phi1(z: C64) -> C64 {
    if z.norm() < 0.5 {
        let mut term = c64(1.0, 0.0);
        let mut sum = term;
        for k in 2..30 {
            term = term * z / k as f64;
            sum += term;
            if term.norm() < 1e-18 * sum.norm() {
                break;
            }
        }
        sum
    } else {
        (z.exp() - 1.0) / z
    }
}

/// First divided difference `exp[a, b]`.
pub fn exp_dd1(a: C64, b: C64) -> C64 {
    b.exp() * phi1(a - b)
}

/// Second divided difference `exp[a, b, c] = ∫∫_{simplex} e^{…}`, stable for
/// coincident or nearby points.
pub fn exp_dd2(a: C64, b: C64, c: C64) -> C64 {
    let pts = [a, b, c];
    let pairs = [(0, 1, 2), (0, 2, 1), (1, 2, 0)];
    let (i, j, k) = pairs
        .iter()
        .copied()
        .max_by(|p, q| (pts[p.0] - pts[p.1]).norm().total_cmp(&(pts[q.0] - pts[q.1]).norm()))
        .expect("three pairs");
    let (x, z, y) = (pts[i], pts[j], pts[k]);
    let sep = (x - z).norm();
    if sep >= 1.0 {
        return (exp_dd1(x, y) - exp_dd1(y, z)) / (x - z);
    }
    let m = (a + b + c) / 3.0;
    let d = [a - m, b - m, c - m];
    // Σ_{k≥0} h_k(d)/(k+2)!, h_k the complete homogeneous symmetric polynomial.
    let one = c64(1.0, 0.0);
    let (mut p1, mut p2, mut p3) = (one, one, one);
    let mut fact = 2.0;
    let mut sum = p3 / fact;
    let mut prev_small = false;
    for k in 1..40 {
        p1 *= d[0];
        p2 = p1 + d[1] * p2;
        p3 = p2 + d[2] * p3;
        fact *= (k + 2) as f64;
        let term = p3 / fact;
        sum += term;
        // h₁ vanishes identically for mean-shifted points, so a single
        // small term is no stopping criterion.
        if k >= 3 && term.norm() < 1e-18 * sum.norm() && prev_small {
            break;
        }
        prev_small = term.norm() < 1e-18 * sum.norm();
    }
    m.exp() * sum
}
