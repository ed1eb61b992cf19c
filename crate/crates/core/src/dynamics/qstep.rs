//! Discrete Q-update with Boltzmann exploration.

use super::field::softmax_into;
use super::rates::ExplorationRates;
use crate::error::{Error, Result};
use crate::game::{JointStrategy, NetworkGame};

/// Per-agent Q-values and learning rates `α_k ∈ (0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QState {
    q: Vec<Vec<f64>>,
    alpha: Vec<f64>,
}

impl QState {
    pub fn new(q: Vec<Vec<f64>>, alpha: Vec<f64>) -> Result<Self> {
        if q.len() != alpha.len() {
            return Err(Error::invalid(format!(
                "{} Q-vectors but {} learning rates",
                q.len(),
                alpha.len()
            )));
        }
        if let Some((k, a)) = alpha
            .iter()
            .enumerate()
            .find(|(_, a)| !(**a > 0.0 && **a <= 1.0))
        {
            return Err(Error::invalid(format!(
                "learning rate of agent {k} must lie in (0, 1], got {a}"
            )));
        }
        if q.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite Q-value"));
        }
        Ok(QState { q, alpha })
    }

    /// Q-values whose Boltzmann policy is `x`: `Q_ki = T_k ln x_ki`.
    pub fn from_strategy(x: &JointStrategy, rates: &ExplorationRates, alpha: f64) -> Result<Self> {
        let q = x
            .agents()
            .enumerate()
            .map(|(k, b)| b.iter().map(|p| rates.get(k) * p.ln()).collect())
            .collect();
        QState::new(q, vec![alpha; x.num_agents()])
    }

    pub fn q(&self, k: usize) -> &[f64] {
        &self.q[k]
    }

    pub fn alpha(&self, k: usize) -> f64 {
        self.alpha[k]
    }

    /// `x_ki = exp(Q_ki / T_k) / Σ_j exp(Q_kj / T_k)`.
    pub fn policy(&self, rates: &ExplorationRates) -> JointStrategy {
        let blocks = self
            .q
            .iter()
            .enumerate()
            .map(|(k, qk)| {
                let scaled: Vec<f64> = qk.iter().map(|v| v / rates.get(k)).collect();
                let mut out = vec![0.0; qk.len()];
                softmax_into(&scaled, &mut out);
                out
            })
            .collect();
        JointStrategy::from_blocks_unchecked(blocks)
    }
}

/// One synchronous Q-update against the current joint strategy `x`,
/// followed by the Boltzmann policy of the new Q-values.
pub fn discrete_q_step(
    game: &NetworkGame,
    state: &QState,
    rates: &ExplorationRates,
    x: &JointStrategy,
) -> Result<(QState, JointStrategy)> {
    game.check_strategy(x)?;
    rates.check_agents(game.num_agents())?;
    if state.q.len() != game.num_agents()
        || state
            .q
            .iter()
            .zip(game.action_counts())
            .any(|(q, &n)| q.len() != n)
    {
        return Err(Error::ShapeMismatch("Q-state does not match the game".into()));
    }
    let mut r = Vec::new();
    let q = state
        .q
        .iter()
        .enumerate()
        .map(|(k, qk)| {
            r.resize(qk.len(), 0.0);
            game.reward_into(x.as_flat(), x.offsets(), k, &mut r);
            let a = state.alpha[k];
            qk.iter().zip(&r).map(|(qi, ri)| (1.0 - a) * qi + a * ri).collect()
        })
        .collect();
    let next = QState {
        q,
        alpha: state.alpha.clone(),
    };
    let policy = next.policy(rates);
    Ok((next, policy))
}
