//! Time evolution: exponents and windows, split-step reference integrator,
//! Duhamel-Picard fixed-point solver, trajectories and checkpoints.

pub mod exponents;
pub mod picard;
pub mod split_step;
pub mod trajectory;
pub mod window;

pub use exponents::{check_gamma_range, compute_exponents, Exponents, GammaRangeReport};
pub use picard::{
    l2_global_evolve, picard_local_solve, Calibration, ContractionLog, GlobalEvolution,
    PicardConfig, PicardSolution, PicardSolver,
};
pub use split_step::{split_step, SplitStep};
pub use trajectory::{spacetime_norm, SpacetimeNorm, Trajectory};
pub use window::{existence_window, ExistenceWindow, WindowInputs, WindowRule};
