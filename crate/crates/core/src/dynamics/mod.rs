//! Smooth Q-Learning: the continuous dynamics, the discrete Q-update, QRE
//! and the KL diagnostics around it.

mod field;
mod integrate;
mod kl;
mod nash;
mod qre;
mod qstep;
mod rates;
mod trap;

pub use field::{perturbed_payoff, perturbed_reward, qld_vector_field, vector_field_norm};
pub(crate) use field::LogitFlow;
pub use integrate::{
    integrate, integrate_final, integrate_with, IntegrationConfig, KlDiagnostic, TrajectoryRecord,
    DEFAULT_STEP,
};
pub(crate) use integrate::{check_start, LogitRk4};
pub use kl::kl_divergence;
pub use nash::approximate_nash_gap;
pub use qre::{qre_residual, qre_solve, qre_solve_with, QreMethod, QreOptions, QreSolution};
pub use qstep::{discrete_q_step, QState};
pub use rates::ExplorationRates;
pub use trap::{
    asymptotic_kl, diagnose, kl_time_derivative, lyapunov_check, trap_radius, trap_region,
    AsymptoticKl, LyapunovCheck, TrapRegion, DEFAULT_TAIL_FRACTION, TAIL_KL_TOLERANCE,
    TRAP_ZERO_SUM_TOL,
};
