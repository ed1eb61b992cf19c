//! Nearest network zero-sum game and the pairwise constant-sum form.

mod decompose;
mod nearest;

pub use decompose::{constant_sum_decompose, Decomposition};
pub use nearest::{kkt_residual, nearest_nzsg, Certificate, ProjectionResult};
