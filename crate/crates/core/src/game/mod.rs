//! Polymatrix games: representation, payoffs, the zero-sum test and the
//! Maximum Pairwise Difference distance.

mod matrix;
pub mod mpd;
mod network;
mod strategy;
pub mod zero_sum;

pub use matrix::Matrix;
pub use mpd::{mpd, mpd_bound_2norm, mpd_bound_abs, mpd_exact, MpdBound, MpdKind};
pub use network::{payoff, reward_vector, Edge, Incidence, NetworkGame};
pub use strategy::{JointStrategy, EPS_FLOOR, SIMPLEX_TOL};
pub use zero_sum::{is_zero_sum, zero_sum_residual, ZERO_SUM_TOL};
