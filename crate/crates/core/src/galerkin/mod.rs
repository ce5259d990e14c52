//! Numerical corroboration: periodic orbits by Fourier-Galerkin truncation
//! and Newton's method, time-stepping re-verification, and
//! pseudo-arclength continuation in a family parameter.

mod branch;
mod fourier;
mod ode;
mod orbit;
mod problem;

use thiserror::Error;

pub use branch::{
    trace_branch, BranchConfig, BranchPoint, BranchRecord, BranchVerdict, ConstantFamily,
    ParameterFamily, ShiftedFamily, ShiftedPotential,
};
pub use fourier::{active_harmonics, minimal_period_of, FourierLoop};
pub use ode::{integrate_rk4, ode_residual, rk4_check, Rk4Check};
pub use orbit::{
    find_orbit, find_orbit_from, length_scale, search_orbit, seed_schedule, GalerkinConfig,
    OrbitAttempt, OrbitResult, OrbitSearch, Seed, SeedOrigin,
};
pub use problem::GalerkinSystem;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GalerkinError {
    #[error("hessian-only spec, verification unavailable")]
    NoPotential,
    #[error("potential or its derivatives are not finite along the loop")]
    NonFinite,
    #[error("reference matrix has dimension {got}, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("period must be positive and finite, got {0}")]
    BadPeriod(f64),
    #[error("at least one Fourier mode is required")]
    NoModes,
    #[error("seed mode must be at least 1")]
    BadSeedMode,
    #[error("loop is constant")]
    ConstantLoop,
    #[error("Newton's method did not converge in {iterations} iterations (gradient norm {residual:e})")]
    Diverged { iterations: usize, residual: f64 },
    #[error("Newton converged to a stationary loop (sup |u - a_0| = {distance:e})")]
    Stationary { distance: f64 },
    #[error("singular Newton matrix")]
    SingularJacobian,
    #[error("orbit rejected: {0}")]
    Rejected(String),
    #[error("no seed directions for mode {0}")]
    NoSeeds(u32),
}
