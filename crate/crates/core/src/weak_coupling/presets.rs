use super::bath::CouplingPattern;
use super::davies::SystemModel;
use crate::liouville::{c64, ops, Operator, I};

/// System model together with the coupling pattern it is meant for.
#[derive(Clone, Debug)]
pub struct Preset {
    pub system: SystemModel,
    pub pattern: CouplingPattern,
}

/// Two-level atom in the electromagnetic field: `H = ω₀σz/2`, couplings
/// `σ₊ + σ₋` and `i(σ₊ − σ₋)`, so that `A₁(ω₀) = σ₋` and `A₂(ω₀) = −iσ₋`.
/// With `|e⟩` first, the second coupling is `−σy`.
pub fn damped_qubit(omega0: f64) -> Preset {
    let h = ops::pauli_z() * c64(omega0 / 2.0, 0.0);
    let (sp, sm) = (ops::sigma_plus(), ops::sigma_minus());
    let x: Operator = &sp + &sm;
    let p: Operator = (&sp - &sm) * I;
    Preset {
        system: SystemModel::new(h, vec![x, p]).expect("valid qubit model"),
        pattern: CouplingPattern::PositionXy,
    }
}

/// Harmonic oscillator truncated to `levels` Fock states: `H = ω₀a†a`,
/// couplings `a + a†` and `i(a† − a)`.
pub fn damped_oscillator(omega0: f64, levels: usize) -> Preset {
    let a = ops::annihilation(levels);
    let ad = a.adjoint();
    let h = ops::number(levels) * c64(omega0, 0.0);
    let x: Operator = &a + &ad;
    let p: Operator = (&ad - &a) * I;
    Preset {
        system: SystemModel::new(h, vec![x, p]).expect("valid oscillator model"),
        pattern: CouplingPattern::PositionXy,
    }
}

/// Qubit with `H = ω₀σz/2` coupled through `σz` to one bath quadrature.
pub fn pure_dephasing(omega0: f64) -> Preset {
    let h = ops::pauli_z() * c64(omega0 / 2.0, 0.0);
    Preset {
        system: SystemModel::new(h, vec![ops::pauli_z()]).expect("valid dephasing model"),
        pattern: CouplingPattern::Single,
    }
}
