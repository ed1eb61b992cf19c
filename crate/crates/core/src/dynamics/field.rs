//! The Q-Learning vector field and the entropy-perturbed game it is the
//! replicator flow of.

use super::rates::ExplorationRates;
use crate::error::{Error, Result};
use crate::game::{payoff, reward_vector, JointStrategy, NetworkGame, EPS_FLOOR};

/// `ẋ_ki = x_ki [ r_ki − ⟨x_k, r_k⟩ + T_k Σ_j x_kj ln(x_kj / x_ki) ]` for
/// every agent, as per-agent velocity vectors.
pub fn qld_vector_field(
    game: &NetworkGame,
    x: &JointStrategy,
    rates: &ExplorationRates,
) -> Result<Vec<Vec<f64>>> {
    game.check_strategy(x)?;
    rates.check_agents(game.num_agents())?;
    x.require_interior(EPS_FLOOR)?;
    let mut out = Vec::with_capacity(game.num_agents());
    let mut r = Vec::new();
    for k in 0..game.num_agents() {
        let xk = x.agent(k);
        r.resize(xk.len(), 0.0);
        game.reward_into(x.as_flat(), x.offsets(), k, &mut r);
        let mean_r: f64 = xk.iter().zip(&r).map(|(p, v)| p * v).sum();
        let mass: f64 = xk.iter().sum();
        let x_ln_x: f64 = xk.iter().map(|p| p * p.ln()).sum();
        let t = rates.get(k);
        out.push(
            xk.iter()
                .zip(&r)
                .map(|(&p, &ri)| p * (ri - mean_r + t * (x_ln_x - mass * p.ln())))
                .collect(),
        );
    }
    Ok(out)
}

/// Sup norm of the vector field.
pub fn vector_field_norm(
    game: &NetworkGame,
    x: &JointStrategy,
    rates: &ExplorationRates,
) -> Result<f64> {
    Ok(qld_vector_field(game, x, rates)?
        .iter()
        .flatten()
        .fold(0.0, |m: f64, v| m.max(v.abs())))
}

fn check_temperature(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid(format!("temperature must be ≥ 0, got {t}")));
    }
    Ok(())
}

/// `r^H_ki = r_ki(x_{-k}) − T_k (ln x_ki + 1)`.
///
/// `temperature` may be zero, which recovers the plain reward.
pub fn perturbed_reward(
    game: &NetworkGame,
    x: &JointStrategy,
    k: usize,
    temperature: f64,
) -> Result<Vec<f64>> {
    check_temperature(temperature)?;
    let mut r = reward_vector(game, x, k)?;
    x.require_interior(EPS_FLOOR)?;
    for (ri, p) in r.iter_mut().zip(x.agent(k)) {
        *ri -= temperature * (p.ln() + 1.0);
    }
    Ok(r)
}

/// `u^H_k(x) = u_k(x) + T_k H(x_k)` with `H` the Shannon entropy.
pub fn perturbed_payoff(
    game: &NetworkGame,
    x: &JointStrategy,
    k: usize,
    temperature: f64,
) -> Result<f64> {
    check_temperature(temperature)?;
    let u = payoff(game, x, k)?;
    x.require_interior(EPS_FLOOR)?;
    let x_ln_x: f64 = x.agent(k).iter().map(|p| p * p.ln()).sum();
    Ok(u - temperature * x_ln_x)
}

/// Writes `softmax(logits)` into `out`, subtracting the max first.
#[inline]
pub(crate) fn softmax_into(logits: &[f64], out: &mut [f64]) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for (o, &z) in out.iter_mut().zip(logits) {
        *o = (z - max).exp();
        total += *o;
    }
    for o in out.iter_mut() {
        *o /= total;
    }
}

/// Centered log-probabilities `z_ki = ln x_ki − mean_j ln x_kj`.
pub(crate) fn to_logits(x: &JointStrategy) -> Vec<f64> {
    let mut z = Vec::with_capacity(x.as_flat().len());
    for block in x.agents() {
        let logs: Vec<f64> = block.iter().map(|p| p.ln()).collect();
        let mean = logs.iter().sum::<f64>() / logs.len() as f64;
        z.extend(logs.into_iter().map(|l| l - mean));
    }
    z
}

pub(crate) fn from_logits(z: &[f64], offsets: &[usize], out: &mut [f64]) {
    for w in offsets.windows(2) {
        softmax_into(&z[w[0]..w[1]], &mut out[w[0]..w[1]]);
    }
}

/// The Q-Learning flow in centered logit coordinates.
///
/// With `x = softmax(z)` the dynamics read `ż_ki = (r_ki − mean_j r_kj) −
/// T_k z_ki`, which is exactly the Q-Learning vector field on the interior
/// and keeps every state strictly positive and normalized.
pub(crate) struct LogitFlow<'a> {
    pub game: &'a NetworkGame,
    rates: &'a ExplorationRates,
    offsets: Vec<usize>,
    x: Vec<f64>,
    r: Vec<f64>,
}

impl<'a> LogitFlow<'a> {
    pub fn new(game: &'a NetworkGame, rates: &'a ExplorationRates) -> Self {
        let offsets = game.offsets();
        let n = *offsets.last().unwrap();
        LogitFlow {
            game,
            rates,
            offsets,
            x: vec![0.0; n],
            r: vec![0.0; n],
        }
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn eval(&mut self, z: &[f64], out: &mut [f64]) {
        from_logits(z, &self.offsets, &mut self.x);
        self.game.rewards_flat(&self.x, &self.offsets, &mut self.r);
        for (k, w) in self.offsets.windows(2).enumerate() {
            let (a, b) = (w[0], w[1]);
            let mean = self.r[a..b].iter().sum::<f64>() / (b - a) as f64;
            let t = self.rates.get(k);
            for i in a..b {
                out[i] = self.r[i] - mean - t * z[i];
            }
        }
    }
}
