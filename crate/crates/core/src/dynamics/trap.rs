//! Trapping-region diagnostics for games near a network zero-sum game.

use serde::{Deserialize, Serialize};

use super::integrate::{KlDiagnostic, TrajectoryRecord};
use super::kl::kl_divergence;
use super::qre::qre_solve;
use super::rates::ExplorationRates;
use crate::error::{Error, Result};
use crate::game::{reward_vector, zero_sum_residual, JointStrategy, MpdBound, NetworkGame, EPS_FLOOR};

/// Zero-sum tolerance accepted by [`trap_region`].
pub const TRAP_ZERO_SUM_TOL: f64 = 1e-8;

/// Slack on `max_tail_kl ≤ radius` for integration error.
pub const TAIL_KL_TOLERANCE: f64 = 1e-6;

/// Default tail fraction standing in for the limit.
pub const DEFAULT_TAIL_FRACTION: f64 = 0.2;

/// KL ball `{x : D_KL(p‖x) ≤ N δ / T_min}` around the QRE `p` of a network
/// zero-sum game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrapRegion {
    pub reference: JointStrategy,
    pub radius: f64,
    pub delta: MpdBound,
    pub rates: ExplorationRates,
}

/// `N δ / T_min`.
pub fn trap_radius(agents: usize, delta: f64, t_min: f64) -> f64 {
    agents as f64 * delta / t_min
}

/// Solves for the QRE of `game_zs` and sizes the region for certificate `delta`.
pub fn trap_region(
    game_zs: &NetworkGame,
    delta: MpdBound,
    rates: &ExplorationRates,
) -> Result<TrapRegion> {
    rates.check_agents(game_zs.num_agents())?;
    if !(delta.value >= 0.0 && delta.value.is_finite()) {
        return Err(Error::invalid(format!(
            "δ must be finite and non-negative, got {}",
            delta.value
        )));
    }
    let residual = zero_sum_residual(game_zs);
    if residual > TRAP_ZERO_SUM_TOL {
        return Err(Error::invalid(format!(
            "reference game is not network zero-sum (residual {residual:e})"
        )));
    }
    let init = JointStrategy::uniform(game_zs.action_counts());
    let reference = qre_solve(game_zs, rates, &init, 0.5)?;
    Ok(TrapRegion {
        radius: trap_radius(game_zs.num_agents(), delta.value, rates.min()),
        reference,
        delta,
        rates: rates.clone(),
    })
}

/// `d/dt D_KL(p‖x) = Σ_k (x_k − p_k)ᵀ [r_k(x) − T_k ln x_k]` along the
/// Q-Learning flow of `game`.
pub fn kl_time_derivative(
    game: &NetworkGame,
    x: &JointStrategy,
    p: &JointStrategy,
    rates: &ExplorationRates,
) -> Result<f64> {
    game.check_strategy(x)?;
    game.check_strategy(p)?;
    rates.check_agents(game.num_agents())?;
    x.require_interior(EPS_FLOOR)?;
    let mut total = 0.0;
    for k in 0..game.num_agents() {
        let r = reward_vector(game, x, k)?;
        let t = rates.get(k);
        total += x
            .agent(k)
            .iter()
            .zip(p.agent(k))
            .zip(&r)
            .map(|((&xi, &pi), &ri)| (xi - pi) * (ri - t * xi.ln()))
            .sum::<f64>();
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovCheck {
    /// `N δ / T_min`.
    pub lhs: f64,
    /// `D_KL(p‖x) + D_KL(x‖p)`.
    pub rhs: f64,
    pub condition: bool,
    pub derivative: f64,
    pub decrease_observed: bool,
}

impl LyapunovCheck {
    /// The condition implies strict decrease.
    pub fn implication_holds(&self) -> bool {
        !self.condition || self.decrease_observed
    }
}

pub fn lyapunov_check(
    game: &NetworkGame,
    x: &JointStrategy,
    p: &JointStrategy,
    rates: &ExplorationRates,
    delta: f64,
) -> Result<LyapunovCheck> {
    p.require_interior(EPS_FLOOR)?;
    let derivative = kl_time_derivative(game, x, p, rates)?;
    let lhs = trap_radius(game.num_agents(), delta, rates.min());
    let rhs = kl_divergence(p, x)? + kl_divergence(x, p)?;
    Ok(LyapunovCheck {
        lhs,
        rhs,
        condition: lhs < rhs,
        derivative,
        decrease_observed: derivative < 0.0,
    })
}

/// Fills the trajectory's per-sample KL diagnostics against the region.
pub fn diagnose(traj: &mut TrajectoryRecord, region: &TrapRegion) -> Result<()> {
    let p = &region.reference;
    traj.diagnostics = traj
        .states
        .iter()
        .map(|x| {
            let kl_p_x = kl_divergence(p, x)?;
            let kl_x_p = kl_divergence(x, p)?;
            Ok(KlDiagnostic {
                kl_p_x,
                kl_x_p,
                condition_holds: region.radius < kl_p_x + kl_x_p,
            })
        })
        .collect::<Result<_>>()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticKl {
    pub max_tail_kl: f64,
    pub within_bound: bool,
}

/// Largest `D_KL(p‖x(t))` over the final `tail_fraction` of the trajectory.
pub fn asymptotic_kl(
    traj: &TrajectoryRecord,
    region: &TrapRegion,
    tail_fraction: f64,
) -> Result<AsymptoticKl> {
    if traj.is_empty() {
        return Err(Error::invalid("empty trajectory"));
    }
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::invalid(format!(
            "tail fraction must lie in (0, 1], got {tail_fraction}"
        )));
    }
    let mut max_tail_kl: f64 = 0.0;
    for x in &traj.states[traj.tail_start(tail_fraction)..] {
        max_tail_kl = max_tail_kl.max(kl_divergence(&region.reference, x)?);
    }
    Ok(AsymptoticKl {
        max_tail_kl,
        within_bound: max_tail_kl <= region.radius + TAIL_KL_TOLERANCE,
    })
}
