//! Non-Markovian evolution: memory-kernel and post-Markovian equations,
//! second-order time-convolutionless generators, generator extraction from
//! sampled map families and dynamical coarse graining.

mod coarse;
mod grid;
mod kernel;
mod tcl;

pub use coarse::{coarse_grain_evolve, coarse_grain_generator, CoarseGrained};
pub use grid::{finite_time_kernel, FrequencyGrid};
pub use kernel::{
    memory_kernel_evolve, memory_kernel_evolve_with, post_markovian_evolve, post_markovian_evolve_with, MemoryKernel,
    Trajectory, TOL_DRIFT, TOL_POSITIVITY,
};
pub use tcl::{
    exact_dephasing_exponent, tcl2_coefficients, tcl2_evolve, tcl2_evolve_with, tcl2_family, tcl2_generator,
    tcl_from_family, Smoothing, Tcl2Generator, TclSample, TimeDependentGenerator, TOL_GRID,
};
