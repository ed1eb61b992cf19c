//! Q-Learning under payoff noise redrawn on a fixed schedule.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::generate::{certificate_factor, perturb_with};
use crate::dynamics::{
    check_start, diagnose, trap_region, ExplorationRates, IntegrationConfig, LogitFlow, LogitRk4,
    TrajectoryRecord, TrapRegion,
};
use crate::error::{Error, Result};
use crate::game::{JointStrategy, MpdBound, MpdKind, NetworkGame};

#[derive(Debug, Clone, PartialEq)]
pub struct NoisyRun {
    pub trajectory: TrajectoryRecord,
    /// Trap region of the base game for the ε-implied certificate.
    pub region: TrapRegion,
}

/// Integrates the Q-Learning dynamics while replacing the payoffs by a fresh
/// `[−ε, ε]` perturbation of `game_zs` every `period` steps.
pub fn noisy_run(
    game_zs: &NetworkGame,
    rates: &ExplorationRates,
    epsilon: f64,
    period: usize,
    config: &IntegrationConfig,
    seed: u64,
    x0: &JointStrategy,
) -> Result<NoisyRun> {
    if period == 0 {
        return Err(Error::invalid("noise period must be ≥ 1"));
    }
    config.validate()?;
    check_start(game_zs, x0, rates)?;
    let delta = MpdBound::new(certificate_factor(game_zs) * epsilon, MpdKind::AbsEntryBound);
    let region = trap_region(game_zs, delta, rates)?;
    let mut trajectory = noisy_path(game_zs, rates, epsilon, period, config, seed, x0)?;
    diagnose(&mut trajectory, &region)?;
    Ok(NoisyRun { trajectory, region })
}

fn noisy_path(
    game_zs: &NetworkGame,
    rates: &ExplorationRates,
    epsilon: f64,
    period: usize,
    config: &IntegrationConfig,
    seed: u64,
    x0: &JointStrategy,
) -> Result<TrajectoryRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let steps = config.num_steps();
    let offsets = game_zs.offsets();
    let mut rk = LogitRk4::new(x0);
    let mut record = TrajectoryRecord::constant(x0, vec![0.0]);
    let mut done = 0;
    while done < steps {
        let current = perturb_with(game_zs, epsilon, &mut rng)?.game;
        let mut flow = LogitFlow::new(&current, rates);
        for i in done + 1..=(done + period).min(steps) {
            rk.step(&mut flow, config.step);
            if !rk.is_finite() {
                return Err(Error::IntegrationDiverged {
                    last_time: (i - 1) as f64 * config.step,
                });
            }
            if i % config.record_stride == 0 || i == steps {
                record.times.push(i as f64 * config.step);
                record.states.push(rk.state(&offsets));
            }
        }
        done = (done + period).min(steps);
    }
    Ok(record)
}

/// Largest sup-norm distance to the region's reference over the final
/// `fraction` of the trajectory.
pub fn tail_spread(traj: &TrajectoryRecord, region: &TrapRegion, fraction: f64) -> f64 {
    traj.states[traj.tail_start(fraction)..]
        .iter()
        .map(|x| x.sup_distance(&region.reference))
        .fold(0.0, f64::max)
}

/// Largest sup-norm distance of the last `samples` recorded states from the
/// final one.
pub fn tail_displacement(traj: &TrajectoryRecord, samples: usize) -> f64 {
    let last = traj.final_state();
    let start = traj.len().saturating_sub(samples + 1);
    traj.states[start..]
        .iter()
        .map(|x| x.sup_distance(last))
        .fold(0.0, f64::max)
}

/// Largest `D_KL(p‖x)` after the first `burn_in` fraction of the time span.
pub fn max_kl_after(traj: &TrajectoryRecord, burn_in: f64) -> f64 {
    let start = traj.tail_start(1.0 - burn_in);
    traj.diagnostics[start..]
        .iter()
        .map(|d| d.kl_p_x)
        .fold(0.0, f64::max)
}
