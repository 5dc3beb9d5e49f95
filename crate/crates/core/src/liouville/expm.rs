use nalgebra::DMatrix;

use super::operator::C64;
use crate::error::{Error, Result};

const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA_13: f64 = 5.371920351148152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn norm1(m: &DMatrix<C64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Solves `(V − U) X = V + U` for the diagonal Padé approximant.
fn pade_solve(u: DMatrix<C64>, v: DMatrix<C64>) -> Result<DMatrix<C64>> {
    let p = &v + &u;
    let q = v - u;
    q.lu().solve(&p).ok_or(Error::Magnitude(f64::INFINITY))
}

fn pade_low(a: &DMatrix<C64>, b: &[f64]) -> Result<DMatrix<C64>> {
    let n = a.nrows();
    let id = DMatrix::<C64>::identity(n, n);
    let a2 = a * a;
    let m = b.len() - 1;
    let mut powers = vec![id.clone(), a2.clone()];
    while powers.len() <= m / 2 {
        let next = powers.last().unwrap() * &a2;
        powers.push(next);
    }
    let mut u_inner = DMatrix::<C64>::zeros(n, n);
    let mut v = DMatrix::<C64>::zeros(n, n);
    for (k, p) in powers.iter().enumerate() {
        if 2 * k < m {
            u_inner += p * re(b[2 * k + 1]);
        }
        v += p * re(b[2 * k]);
    }
    pade_solve(a * u_inner, v)
}

fn pade13(a: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let n = a.nrows();
    let id = DMatrix::<C64>::identity(n, n);
    let b = &B13;
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_hi = &a6 * re(b[13]) + &a4 * re(b[11]) + &a2 * re(b[9]);
    let u_lo = &a6 * re(b[7]) + &a4 * re(b[5]) + &a2 * re(b[3]) + &id * re(b[1]);
    let u = a * (&a6 * u_hi + u_lo);
    let v_hi = &a6 * re(b[12]) + &a4 * re(b[10]) + &a2 * re(b[8]);
    let v = &a6 * v_hi + &a6 * re(b[6]) + &a4 * re(b[4]) + &a2 * re(b[2]) + &id * re(b[0]);
    pade_solve(u, v)
}

/// Matrix exponential by Padé scaling and squaring (orders 3 to 13 chosen
/// from the 1-norm).
pub fn expm(m: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Magnitude(f64::NAN));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(m.clone());
    }
    let norm = norm1(m);
    for (order, theta) in THETA {
        if norm <= theta {
            let b: &[f64] = match order {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            return check(pade_low(m, b)?, norm);
        }
    }
    let s = (norm / THETA_13).log2().ceil().max(0.0);
    if s > 1000.0 {
        return Err(Error::Magnitude(norm));
    }
    let s = s as i32;
    let scaled = m * re(0.5f64.powi(s));
    let mut r = pade13(&scaled)?;
    for _ in 0..s {
        r = &r * &r;
    }
    check(r, norm)
}

fn check(r: DMatrix<C64>, norm: f64) -> Result<DMatrix<C64>> {
    if r.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(r)
    } else {
        Err(Error::Magnitude(norm))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::operator::{c64, diag, eigh, ops, Operator};
    use crate::random::{random_hermitian, seeded};

    fn taylor(m: &DMatrix<C64>, terms: usize) -> DMatrix<C64> {
        let n = m.nrows();
        let mut term = DMatrix::<C64>::identity(n, n);
        let mut sum = term.clone();
        for k in 1..terms {
            term = &term * m / re(k as f64);
            sum += &term;
        }
        sum
    }

    fn rel(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn zero_gives_identity() {
        let z = DMatrix::<C64>::zeros(3, 3);
        assert_eq!(expm(&z).unwrap(), DMatrix::identity(3, 3));
    }

    #[test]
    fn nilpotent_series_terminates() {
        let m = Operator::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)]);
        let e = expm(&m).unwrap();
        let expected = Operator::from_row_slice(2, 2, &[c64(1.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)]);
        assert!((e - expected).norm() < 1e-15);
    }

    #[test]
    fn matches_taylor_at_small_norms() {
        let mut rng = seeded(1, 0);
        for scale in [1e-3, 0.1, 0.5, 1.5, 3.0] {
            let h = random_hermitian(4, &mut rng) * c64(0.0, scale);
            let m = &h + random_hermitian(4, &mut rng) * re(0.3 * scale);
            let e = expm(&m).unwrap();
            assert!(rel(&e, &taylor(&m, 80)) < 1e-13, "scale {scale}");
        }
    }

    #[test]
    fn matches_eigendecomposition_up_to_norm_fifty() {
        let mut rng = seeded(2, 0);
        for target in [5.0, 20.0, 50.0] {
            let h = random_hermitian(5, &mut rng);
            let h = &h * re(target / crate::liouville::operator::spectral_norm(&h));
            let (vals, vecs) = eigh(&h);
            let d = diag(&vals.iter().map(|v| v.exp()).collect::<Vec<_>>());
            let exact = &vecs * d * vecs.adjoint();
            assert!(rel(&expm(&h).unwrap(), &exact) < 1e-12, "norm {target}");
        }
    }

    #[test]
    fn matches_nalgebra_on_non_normal_input() {
        let mut rng = seeded(3, 0);
        let a = random_hermitian(4, &mut rng);
        let b = random_hermitian(4, &mut rng) * c64(0.0, 1.0);
        let m = (&a * &b + &b) * re(3.0);
        let ours = expm(&m).unwrap();
        let theirs = m.clone().exp();
        assert!(rel(&ours, &theirs) < 1e-11);
    }

    #[test]
    fn commuting_sum_factorizes() {
        let z = ops::pauli_z();
        let m1 = &z * c64(0.3, 1.2);
        let m2 = diag(&[2.0, -0.5]);
        let lhs = expm(&(&m1 + &m2)).unwrap();
        let rhs = expm(&m1).unwrap() * expm(&m2).unwrap();
        assert!(rel(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn rejects_non_finite_and_huge() {
        let mut m = DMatrix::<C64>::zeros(2, 2);
        m[(0, 1)] = c64(f64::NAN, 0.0);
        assert!(matches!(expm(&m), Err(Error::Magnitude(_))));
        let big = diag(&[800.0, 0.0]);
        assert!(matches!(expm(&big), Err(Error::Magnitude(_))));
    }

    #[test]
    fn rejects_non_square() {
        assert!(matches!(
            expm(&DMatrix::<C64>::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
    }
}
