//! Linear MGT equation: operator, solvers and diagnostics.

pub mod compat;
pub mod dtn;
pub mod energy;
pub mod norms;
pub mod operator;
pub mod solver;
pub mod wave;

pub use compat::{check_compatibility, CompatibilityReport};
pub use dtn::dtn_trace;
pub use norms::boundary_l2;
pub use energy::energy;
pub use norms::{discrete_norm, NormKind};
pub use operator::{apply_l, apply_p, apply_p_companions, apply_p_factored};
pub use solver::{scheme_residual, solve_linear, MgtSolver};
pub use wave::{solve_damped_wave, solve_w_scheme, DampedWaveSolver};
