//! Small dense LP, polyhedral projection and matrix-game machinery.

pub mod lp;
pub mod polyhedron;
pub mod projection;
pub mod zero_sum;

pub use lp::{find_feasible_point, solve_lp, LinearProgram, LpOutcome, LpSolution, Sense};
pub use polyhedron::{Polyhedron, Row};
pub use projection::{distance, project, project_with, Projection, ProjectionOptions};
pub use zero_sum::{solve_zero_sum, ZeroSumSolution};
