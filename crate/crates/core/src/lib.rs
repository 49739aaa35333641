//! Numerical solver for particle-volume distributions evolving under
//! coagulation and Ostwald ripening in a closed, supersaturated system.
//!
//! The state is a distribution `phi(xi, tau)` on a uniform grid. Each time
//! step combines the coagulation gain and loss integrals (evaluated either
//! directly or through a low-rank kernel and FFT convolutions) with the
//! advection-diffusion ripening term, then updates the supersaturation from
//! the mass balance. For the constant kernel an exact parametric solution
//! is available as a reference.

pub mod analytic;
pub mod coagulation;
pub mod config;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod initial;
pub mod kernels;
pub mod params;
pub mod ripening;
pub mod stepper;

pub use analytic::{ExactState, ParametricSolution};
pub use coagulation::{l1_fast, l1_naive, l2_fast, l2_naive, Backend, OperatorWorkspace};
pub use config::{KernelChoice, RunConfig};
pub use error::{Error, Result};
pub use grid::{moments, trapezoid, GridFunction, GridSpec};
pub use initial::{make_initial, InitialKind};
pub use kernels::{cross_approximate, kernel_ballistic, kernel_constant, kernel_diffusion, LowRankKernel};
pub use params::{DimensionalParams, PhysParams};
pub use ripening::{apply_absorber, first_derivative, ripening_term, second_derivative, AbsorberConfig};
pub use stepper::{euler_step, run, SimState, Simulation, TimeSpec, Trajectory};
