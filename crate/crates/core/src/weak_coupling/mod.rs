//! Weak-coupling (Born–Markov–secular) generators for a system linearly
//! coupled to thermal bosonic baths.

mod bath;
mod bohr;
mod davies;
pub mod presets;

pub use bath::{
    bath_correlation, bath_correlation_matrix, bath_rates, bose_occupation, lamb_shift, lamb_shift_with_tol,
    zero_frequency_weight, BathModel, CouplingPattern, SpectralDensity, TOL_QUAD, ZERO_FREQ_REL,
};
pub use bohr::{bohr_decompose, bohr_decompose_all, invariant_residual, resum, BohrDecomposition, NearDegeneracy};
pub use davies::{
    davies_generator, davies_generator_with, kms_check, stationarity_check, thermal_state, DaviesGenerator,
    DaviesOptions, FrequencyBlock, KmsReport, SystemModel,
};
pub use presets::Preset;
