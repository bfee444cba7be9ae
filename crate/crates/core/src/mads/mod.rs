//! Mesh adaptive direct search for bounded, constrained black-box
//! maximization.
//!
//! Each iteration runs a coarse mesh search around a small set of anchors
//! and a finer poll around the incumbent. Constraints are handled with an
//! extreme barrier: an infeasible trial point never becomes the incumbent.

mod optimizer;
mod problem;
mod stencil;

pub use optimizer::{
    evaluate_with_barrier, optimize, Evaluation, HistoryEntry, IncumbentSolution, Mads,
    MadsSettings, MeshState, OptimizerReport, TerminationReason, UpdateRule,
};
pub use problem::{BlackBoxProblem, Domain, Evaluator};
pub use stencil::{
    coordinate_directions, exchange_directions, generate_mesh_points, generate_poll_points,
    random_direction,
};
