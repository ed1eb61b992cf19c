//! Smooth Q-Learning on network (polymatrix) games.
//!
//! * [`game`]: payoffs, the network zero-sum test and the Maximum Pairwise
//!   Difference (MPD) distance with its entrywise and spectral certificates.
//! * [`dynamics`]: the Q-Learning vector field, RK4 integration in logit
//!   coordinates, the discrete Q-update, QRE solving and the KL trapping-region
//!   diagnostics.
//! * [`projection`]: closed-form nearest network zero-sum game and the
//!   pairwise constant-sum decomposition.
//! * [`harness`]: seeded generators, perturbation and noise schedules, the
//!   conflict-network preset, logit-plane embedding and simulation campaigns.

pub mod dynamics;
pub mod error;
pub mod exec;
pub mod game;
pub mod harness;
pub mod projection;

pub use error::{Error, Result};
pub use exec::Execution;
