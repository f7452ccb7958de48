//! Relative extremal function on grids: rasterised obstacle `-chi_A`,
//! discrete plurisubharmonic envelope, and its regularisation.

mod grid;
pub mod io;
mod linalg;
mod solver;

pub use grid::{ComplexLine, GridSpec, NodeClass, DEFAULT_NODE_CAP};
pub use solver::{
    build_obstacle, maximality_gap, omega_at, psh_envelope, solve_extremal, sub_mean_violation, usc_regularize,
    EnvelopeResult, GridField, Method, SolverParams,
};
