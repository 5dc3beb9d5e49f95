use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::liouville::{c64, C64};
use crate::quad;

/// Spectral density `J(ω) ≥ 0` on `(0, ω_max]`.
#[derive(Clone)]
pub enum SpectralDensity {
    /// `α ω^s ω_c^{1−s} e^{−ω/ω_c}`.
    Ohmic { alpha: f64, s: f64, omega_c: f64 },
    /// Constant `J₀`.
    Flat { j0: f64 },
    /// Linear interpolation through `(ω_i, J_i)`, with `J(0) = 0` implied
    /// below the first node and zero above the last.
    Table { omega: Vec<f64>, j: Vec<f64> },
    /// Arbitrary function with optional kinks for the quadratures.
    Custom {
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        breaks: Vec<f64>,
    },
}

impl fmt::Debug for SpectralDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Ohmic { alpha, s, omega_c } => write!(f, "Ohmic(alpha={alpha}, s={s}, omega_c={omega_c})"),
            Self::Flat { j0 } => write!(f, "Flat(j0={j0})"),
            Self::Table { omega, .. } => write!(f, "Table({} points)", omega.len()),
            Self::Custom { .. } => write!(f, "Custom"),
        }
    }
}

impl SpectralDensity {
    pub fn table(omega: Vec<f64>, j: Vec<f64>) -> Result<Self> {
        if omega.len() != j.len() || omega.is_empty() {
            return Err(Error::InvalidArgument("table needs equal, nonempty columns".into()));
        }
        if omega.windows(2).any(|w| !(w[1] > w[0])) || omega[0] < 0.0 {
            return Err(Error::InvalidArgument(
                "table frequencies must be nonnegative and increasing".into(),
            ));
        }
        if j.iter().any(|&x| !(x >= 0.0)) {
            return Err(Error::InvalidArgument("table values must be nonnegative".into()));
        }
        Ok(Self::Table { omega, j })
    }

    pub fn custom<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F, breaks: Vec<f64>) -> Self {
        Self::Custom { f: Arc::new(f), breaks }
    }

    pub fn eval(&self, w: f64) -> f64 {
        if w <= 0.0 {
            return 0.0;
        }
        match self {
            Self::Ohmic { alpha, s, omega_c } => alpha * w.powf(*s) * omega_c.powf(1.0 - s) * (-w / omega_c).exp(),
            Self::Flat { j0 } => *j0,
            Self::Table { omega, j } => {
                let k = omega.partition_point(|&x| x < w);
                if k == omega.len() {
                    if w == omega[k - 1] {
                        j[k - 1]
                    } else {
                        0.0
                    }
                } else if k == 0 {
                    if omega[0] == 0.0 {
                        j[0]
                    } else {
                        j[0] * w / omega[0]
                    }
                } else {
                    let t = (w - omega[k - 1]) / (omega[k] - omega[k - 1]);
                    j[k - 1] + t * (j[k] - j[k - 1])
                }
            }
            Self::Custom { f, .. } => f(w),
        }
    }

    fn breaks(&self) -> Vec<f64> {
        match self {
            Self::Table { omega, .. } => omega.clone(),
            Self::Custom { breaks, .. } => breaks.clone(),
            _ => Vec::new(),
        }
    }
}

/// How the system couples to the bath quadratures. `Single` is one
/// Hermitian coupling `A ⊗ B` with `B = ∫h(ω)(a_ω + a_ω†)`. `PositionXy` is
/// the two-quadrature split `A₁ ⊗ B₁ + A₂ ⊗ B₂` with
/// `B₁ = ∫h(a+a†)/2`, `B₂ = ∫h·i(a†−a)/2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CouplingPattern {
    Single,
    PositionXy,
}

impl CouplingPattern {
    pub fn size(self) -> usize {
        match self {
            Self::Single => 1,
            Self::PositionXy => 2,
        }
    }

    /// `Tr[B_k(ω)B_ℓρ_B] = M₊ J(ω)(n̄+1)` for `ω > 0`.
    pub fn emission(self) -> DMatrix<C64> {
        match self {
            Self::Single => DMatrix::from_element(1, 1, c64(1.0, 0.0)),
            Self::PositionXy => {
                DMatrix::from_row_slice(2, 2, &[c64(0.25, 0.0), c64(0.0, 0.25), c64(0.0, -0.25), c64(0.25, 0.0)])
            }
        }
    }

    /// `Tr[B_k(−ω)B_ℓρ_B] = M₋ J(ω)n̄` for `ω > 0`; `M₋ = conj(M₊)`.
    pub fn absorption(self) -> DMatrix<C64> {
        self.emission().conjugate()
    }
}

/// Thermal bosonic bath: spectral density, temperature `T ≥ 0` (`k_B = 1`),
/// cutoff `ω_max` and coupling pattern.
#[derive(Clone, Debug)]
pub struct BathModel {
    pub density: SpectralDensity,
    pub temperature: f64,
    pub omega_max: f64,
    pub pattern: CouplingPattern,
}

/// Quadrature tolerance used for bath integrals.
pub const TOL_QUAD: f64 = 1e-12;

impl BathModel {
    pub fn new(density: SpectralDensity, temperature: f64, omega_max: f64, pattern: CouplingPattern) -> Result<Self> {
        if !(temperature >= 0.0) || !temperature.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "temperature must be finite and >= 0, got {temperature}"
            )));
        }
        if !(omega_max > 0.0) || !omega_max.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "omega_max must be finite and > 0, got {omega_max}"
            )));
        }
        match &density {
            SpectralDensity::Ohmic { alpha, s, omega_c } => {
                if !(*alpha >= 0.0 && *s > 0.0 && *omega_c > 0.0) {
                    return Err(Error::InvalidArgument(
                        "ohmic density needs alpha >= 0, s > 0, omega_c > 0".into(),
                    ));
                }
            }
            SpectralDensity::Flat { j0 } if !(*j0 >= 0.0) => {
                return Err(Error::InvalidArgument("flat density needs j0 >= 0".into()));
            }
            _ => {}
        }
        Ok(Self {
            density,
            temperature,
            omega_max,
            pattern,
        })
    }

    pub fn ohmic(alpha: f64, omega_c: f64, temperature: f64, omega_max: f64, pattern: CouplingPattern) -> Result<Self> {
        Self::new(
            SpectralDensity::Ohmic { alpha, s: 1.0, omega_c },
            temperature,
            omega_max,
            pattern,
        )
    }

    pub fn with_temperature(&self, temperature: f64) -> Result<Self> {
        Self::new(self.density.clone(), temperature, self.omega_max, self.pattern)
    }

    /// `J(ω)` on `(0, ω_max]`, zero elsewhere.
    pub fn j(&self, w: f64) -> f64 {
        if w <= 0.0 || w > self.omega_max {
            0.0
        } else {
            self.density.eval(w)
        }
    }

    /// `n̄(ω)` for `ω > 0`; zero at `T = 0`.
    pub fn nbar(&self, w: f64) -> f64 {
        nbar_unchecked(w, self.temperature)
    }

    /// `J(ω)(n̄(ω)+1)`, the emission weight.
    pub fn w_plus(&self, w: f64) -> f64 {
        let j = self.j(w);
        if j == 0.0 {
            0.0
        } else {
            j * (self.nbar(w) + 1.0)
        }
    }

    /// `J(ω)n̄(ω)`, the absorption weight.
    pub fn w_minus(&self, w: f64) -> f64 {
        let j = self.j(w);
        if j == 0.0 {
            0.0
        } else {
            j * self.nbar(w)
        }
    }

    /// Interior kinks of the integrands on `(0, ω_max)`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self
            .density
            .breaks()
            .into_iter()
            .filter(|&x| x > 0.0 && x < self.omega_max)
            .collect();
        if let SpectralDensity::Ohmic { omega_c, .. } = self.density {
            for k in [1.0, 4.0, 16.0] {
                if k * omega_c < self.omega_max {
                    b.push(k * omega_c);
                }
            }
        }
        b.sort_by(f64::total_cmp);
        b
    }

    /// Characteristic frequency for relative tolerances.
    pub fn reference_frequency(&self) -> f64 {
        match self.density {
            SpectralDensity::Ohmic { omega_c, .. } => omega_c.min(self.omega_max),
            _ => 0.5 * self.omega_max,
        }
    }

    /// `∫₀^{ω_max} f(ω) dω` split at the bath breakpoints.
    pub fn integrate<T: quad::Integrand, F: Fn(f64) -> T>(&self, f: F, abs_tol: f64) -> Result<T> {
        quad::adaptive_with_breaks(f, 0.0, self.omega_max, &self.breakpoints(), abs_tol, TOL_QUAD)
    }
}

fn nbar_unchecked(w: f64, t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        1.0 / (w / t).exp_m1()
    }
}

/// Bose–Einstein occupation `1/(e^{ω/T} − 1)`; zero at `T = 0`.
pub fn bose_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "occupation needs omega > 0, got {omega}"
        )));
    }
    if !(temperature >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "temperature must be >= 0, got {temperature}"
        )));
    }
    Ok(nbar_unchecked(omega, temperature))
}

/// Relative disagreement above which the one-sided zero-frequency limits
/// are declared inconsistent.
pub const ZERO_FREQ_REL: f64 = 1e-2;

/// `lim_{ε→0⁺} g(ε)` by linear Richardson extrapolation from `ε` and `2ε`.
fn one_sided_limit(g: &dyn Fn(f64) -> f64, eps: f64) -> f64 {
    2.0 * g(eps) - g(2.0 * eps)
}

/// `γ(0)/2π` per coupling entry. The scalars `lim J(ω)(n̄+1)` and
/// `lim J(ω)n̄` as `ω → 0⁺` are extrapolated from `ω = 10⁻⁶ω_ref` and must
/// agree to 1%; the result is the midpoint `(M₊ + M₋)/2` of the one-sided
/// patterns times that limit. For two quadratures the cross entries of `M₊`
/// and `M₋` differ in sign, so their spectrum jumps at zero and the midpoint
/// is its value there.
pub fn zero_frequency_weight(bath: &BathModel, pattern: CouplingPattern) -> Result<DMatrix<C64>> {
    let eps = 1e-6 * bath.reference_frequency();
    let plus = |w: f64| bath.w_plus(w);
    let minus = |w: f64| bath.w_minus(w);
    let p1 = one_sided_limit(&plus, eps);
    let m1 = one_sided_limit(&minus, eps);
    let p2 = one_sided_limit(&plus, eps / 10.0);
    let m2 = one_sided_limit(&minus, eps / 10.0);
    let scale = bath.j(bath.reference_frequency()).abs().max(f64::MIN_POSITIVE);
    let floor = 1e-8 * scale;
    let differ = |a: f64, b: f64| (a - b).abs() > ZERO_FREQ_REL * a.abs().max(b.abs()) && (a - b).abs() > floor;
    let err = || Error::IllDefinedZeroFrequencyRate {
        plus: 2.0 * PI * p1,
        minus: 2.0 * PI * m1,
    };
    if differ(p1, p2) || differ(m1, m2) || !p1.is_finite() || !m1.is_finite() {
        return Err(err());
    }
    if differ(p1, m1) {
        return Err(err());
    }
    let mp = pattern.emission() * c64(p1, 0.0);
    let mm = pattern.absorption() * c64(m1, 0.0);
    Ok((mp + mm) * c64(0.5, 0.0))
}

/// Rate matrix `γ_kℓ(ω) = 2π Tr[B_k(ω)B_ℓρ_B]`: `2πM₊J(ω)(n̄+1)` for
/// `ω > 0`, `2πM₋J(|ω|)n̄(|ω|)` for `ω < 0`, the two-sided limit at `ω = 0`
/// and zero beyond `ω_max`.
pub fn bath_rates(bath: &BathModel, omega: f64, pattern: CouplingPattern) -> Result<DMatrix<C64>> {
    let k = pattern.size();
    if omega.abs() > bath.omega_max {
        return Ok(DMatrix::zeros(k, k));
    }
    let m = if omega > 0.0 {
        pattern.emission() * c64(bath.w_plus(omega), 0.0)
    } else if omega < 0.0 {
        pattern.absorption() * c64(bath.w_minus(-omega), 0.0)
    } else {
        zero_frequency_weight(bath, pattern)?
    };
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "spectral density undefined at omega = {omega}"
        )));
    }
    Ok(m * c64(2.0 * PI, 0.0))
}

/// `PV ∫₀^{ω_max} g(ν)/(x − ν) dν`.
fn pv_minus(bath: &BathModel, g: &dyn Fn(f64) -> f64, x: f64, tol: f64) -> Result<f64> {
    let wmax = bath.omega_max;
    if x > 0.0 && x < wmax {
        Ok(-quad::principal_value_adaptive(
            g,
            0.0,
            wmax,
            x,
            &bath.breakpoints(),
            1e-15,
            tol,
        )?)
    } else if x < 0.0 || x > wmax {
        bath.integrate(|v| g(v) / (x - v), 1e-14)
    } else {
        Err(Error::Quadrature(format!(
            "principal value pole at the domain boundary {x}"
        )))
    }
}

/// Lamb-shift matrix `S(ω) = PV∫ dω′ Tr[B_k(ω′)B_ℓρ_B]/(ω − ω′)`, i.e.
/// `M₊ PV∫J(n̄+1)/(ω−ν) + M₋ PV∫Jn̄/(ω+ν)` over `ν ∈ (0, ω_max)`.
pub fn lamb_shift(bath: &BathModel, omega: f64, pattern: CouplingPattern) -> Result<DMatrix<C64>> {
    lamb_shift_with_tol(bath, omega, pattern, 1e-11)
}

pub fn lamb_shift_with_tol(bath: &BathModel, omega: f64, pattern: CouplingPattern, tol: f64) -> Result<DMatrix<C64>> {
    let wp = |v: f64| bath.w_plus(v);
    let wm = |v: f64| bath.w_minus(v);
    let mp = pattern.emission();
    let mm = pattern.absorption();
    if omega == 0.0 {
        // Both integrands have a 1/ν pole at the boundary. Combine them:
        // −∫ (M₊J(n̄+1) − M₋Jn̄)/ν, finite when M₊ = M₋ or n̄ = 0.
        let k = pattern.size();
        let mut out = DMatrix::<C64>::zeros(k, k);
        for r in 0..k {
            for c in 0..k {
                let (a, b) = (mp[(r, c)], mm[(r, c)]);
                if a.norm() == 0.0 && b.norm() == 0.0 {
                    continue;
                }
                let f = |v: f64| (a * wp(v) - b * wm(v)) / v;
                let eps = 1e-9 * bath.reference_frequency();
                if f(eps / 10.0).norm() > 5.0 * f(eps).norm() {
                    return Err(Error::Quadrature("zero-frequency Lamb shift integral diverges".into()));
                }
                out[(r, c)] = -bath.integrate(f, 1e-13)?;
            }
        }
        return Ok(out);
    }
    let p = if mp.iter().any(|z| z.norm() > 0.0) {
        pv_minus(bath, &wp, omega, tol)?
    } else {
        0.0
    };
    let q = -pv_minus(bath, &wm, -omega, tol)?;
    Ok(mp * c64(p, 0.0) + mm * c64(q, 0.0))
}

/// `C(t) = ∫₀^{ω_max} J(ω)[(n̄+1)e^{−iωt} + n̄e^{iωt}] dω` for the single
/// coupling pattern.
pub fn bath_correlation(bath: &BathModel, t: f64) -> Result<C64> {
    bath.integrate(
        |w| {
            let (p, m) = (bath.w_plus(w), bath.w_minus(w));
            c64((p + m) * (w * t).cos(), (m - p) * (w * t).sin())
        },
        1e-11,
    )
}

/// Matrix correlation `C_kℓ(t) = Tr[B̃_k(t)B_ℓρ_B]`.
pub fn bath_correlation_matrix(bath: &BathModel, t: f64, pattern: CouplingPattern) -> Result<DMatrix<C64>> {
    let e = bath.integrate(|w| c64(0.0, -w * t).exp() * bath.w_plus(w), 1e-11)?;
    let a = bath.integrate(|w| c64(0.0, w * t).exp() * bath.w_minus(w), 1e-11)?;
    Ok(pattern.emission() * e + pattern.absorption() * a)
}
