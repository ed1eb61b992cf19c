//! Fixed-step RK4 integration of the Q-Learning dynamics.

use serde::{Deserialize, Serialize};

use super::field::{from_logits, to_logits, LogitFlow};
use super::rates::ExplorationRates;
use crate::error::{Error, Result};
use crate::game::{JointStrategy, NetworkGame, EPS_FLOOR};

pub const DEFAULT_STEP: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationConfig {
    pub step: f64,
    pub horizon: f64,
    /// Record every `record_stride`-th step (the final step is always kept).
    pub record_stride: usize,
}

impl IntegrationConfig {
    pub fn new(step: f64, horizon: f64) -> Self {
        IntegrationConfig {
            step,
            horizon,
            record_stride: 1,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride;
        self
    }

    pub fn num_steps(&self) -> usize {
        (self.horizon / self.step).round() as usize
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::invalid(format!("step must be positive, got {}", self.step)));
        }
        if !(self.horizon.is_finite() && self.horizon >= self.step) {
            return Err(Error::invalid(format!(
                "horizon {} must be at least one step ({})",
                self.horizon, self.step
            )));
        }
        if self.record_stride == 0 {
            return Err(Error::invalid("record stride must be ≥ 1"));
        }
        Ok(())
    }
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        IntegrationConfig::new(DEFAULT_STEP, 500.0)
    }
}

/// KL diagnostics of one recorded state against a reference point `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KlDiagnostic {
    pub kl_p_x: f64,
    pub kl_x_p: f64,
    /// `N δ / T_min < D_KL(p‖x) + D_KL(x‖p)`.
    pub condition_holds: bool,
}

/// Time-stamped joint strategies from one run, plus optional diagnostics
/// (filled by [`crate::dynamics::diagnose`]).
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub states: Vec<JointStrategy>,
    pub diagnostics: Vec<KlDiagnostic>,
}

impl TrajectoryRecord {
    pub(crate) fn with_capacity(n: usize) -> Self {
        TrajectoryRecord {
            times: Vec::with_capacity(n),
            states: Vec::with_capacity(n),
            diagnostics: Vec::new(),
        }
    }

    /// A trajectory sitting at `x` for the given times.
    pub fn constant(x: &JointStrategy, times: Vec<f64>) -> Self {
        let states = vec![x.clone(); times.len()];
        TrajectoryRecord {
            times,
            states,
            diagnostics: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &JointStrategy {
        self.states.last().expect("trajectory is non-empty")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory is non-empty")
    }

    /// Index of the first sample inside the final `fraction` of the time span.
    pub fn tail_start(&self, fraction: f64) -> usize {
        let (t0, t1) = (self.times[0], self.final_time());
        let cut = t1 - fraction * (t1 - t0);
        self.times
            .iter()
            .position(|&t| t >= cut - 1e-12)
            .unwrap_or(self.len() - 1)
    }
}

/// Classical RK4 on the centered logit state.
pub(crate) struct LogitRk4 {
    pub z: Vec<f64>,
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl LogitRk4 {
    pub fn new(x0: &JointStrategy) -> Self {
        let z = to_logits(x0);
        let n = z.len();
        LogitRk4 {
            z,
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }

    pub fn step(&mut self, flow: &mut LogitFlow<'_>, h: f64) {
        let n = self.z.len();
        flow.eval(&self.z, &mut self.k1);
        for i in 0..n {
            self.tmp[i] = self.z[i] + 0.5 * h * self.k1[i];
        }
        flow.eval(&self.tmp, &mut self.k2);
        for i in 0..n {
            self.tmp[i] = self.z[i] + 0.5 * h * self.k2[i];
        }
        flow.eval(&self.tmp, &mut self.k3);
        for i in 0..n {
            self.tmp[i] = self.z[i] + h * self.k3[i];
        }
        flow.eval(&self.tmp, &mut self.k4);
        for i in 0..n {
            self.z[i] += h / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.z.iter().all(|v| v.is_finite())
    }

    pub fn state(&self, offsets: &[usize]) -> JointStrategy {
        let mut x = vec![0.0; self.z.len()];
        from_logits(&self.z, offsets, &mut x);
        JointStrategy::from_flat(offsets.to_vec(), x)
    }
}

pub(crate) fn check_start(
    game: &NetworkGame,
    x0: &JointStrategy,
    rates: &ExplorationRates,
) -> Result<()> {
    game.check_strategy(x0)?;
    rates.check_agents(game.num_agents())?;
    x0.require_interior(EPS_FLOOR)
}

/// Integrates from `x0` over `[0, horizon]` with fixed step `step`, recording
/// every step.
pub fn integrate(
    game: &NetworkGame,
    x0: &JointStrategy,
    rates: &ExplorationRates,
    horizon: f64,
    step: f64,
) -> Result<TrajectoryRecord> {
    integrate_with(game, x0, rates, &IntegrationConfig::new(step, horizon))
}

pub fn integrate_with(
    game: &NetworkGame,
    x0: &JointStrategy,
    rates: &ExplorationRates,
    config: &IntegrationConfig,
) -> Result<TrajectoryRecord> {
    config.validate()?;
    check_start(game, x0, rates)?;
    let steps = config.num_steps();
    let mut flow = LogitFlow::new(game, rates);
    let mut rk = LogitRk4::new(x0);
    let mut record = TrajectoryRecord::with_capacity(steps / config.record_stride + 2);
    record.times.push(0.0);
    record.states.push(rk.state(flow.offsets()));
    for i in 1..=steps {
        rk.step(&mut flow, config.step);
        if !rk.is_finite() {
            return Err(Error::IntegrationDiverged {
                last_time: (i - 1) as f64 * config.step,
            });
        }
        if i % config.record_stride == 0 || i == steps {
            record.times.push(i as f64 * config.step);
            record.states.push(rk.state(flow.offsets()));
        }
    }
    Ok(record)
}

/// Final state only, without storing the path.
pub fn integrate_final(
    game: &NetworkGame,
    x0: &JointStrategy,
    rates: &ExplorationRates,
    horizon: f64,
    step: f64,
) -> Result<JointStrategy> {
    let config = IntegrationConfig::new(step, horizon);
    config.validate()?;
    check_start(game, x0, rates)?;
    let mut flow = LogitFlow::new(game, rates);
    let mut rk = LogitRk4::new(x0);
    for i in 1..=config.num_steps() {
        rk.step(&mut flow, step);
        if !rk.is_finite() {
            return Err(Error::IntegrationDiverged {
                last_time: (i - 1) as f64 * step,
            });
        }
    }
    Ok(rk.state(flow.offsets()))
}
