//! Seeded game generators and payoff perturbation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::graph::{build_edges, Topology};
use crate::error::{Error, Result};
use crate::game::{Edge, Matrix, MpdBound, MpdKind, NetworkGame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    NzsgRandom,
    Perturbation,
    NoiseSchedule,
    ConflictNetwork,
    /// Random zero-sum game on a chain.
    Chain,
    /// Random zero-sum game on the complete graph.
    CompleteGraph,
}

fn default_range() -> [f64; 2] {
    [-1.0, 1.0]
}

fn default_period() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub agents: usize,
    /// One count for every agent, or a single count broadcast to all.
    pub actions: Vec<usize>,
    #[serde(default)]
    pub topology: Topology,
    pub seed: u64,
    #[serde(default = "default_range")]
    pub entry_range: [f64; 2],
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default = "default_period")]
    pub noise_period: usize,
}

impl GeneratorSpec {
    pub fn nzsg(agents: usize, actions: usize, topology: Topology, seed: u64) -> Self {
        GeneratorSpec {
            kind: GeneratorKind::NzsgRandom,
            agents,
            actions: vec![actions],
            topology,
            seed,
            entry_range: default_range(),
            epsilon: 0.0,
            noise_period: default_period(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.action_counts()?;
        let [lo, hi] = self.entry_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(format!("entry range [{lo}, {hi}] is empty")));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::invalid(format!("ε must be ≥ 0, got {}", self.epsilon)));
        }
        if self.noise_period == 0 {
            return Err(Error::invalid("noise period must be ≥ 1"));
        }
        Ok(())
    }

    pub fn action_counts(&self) -> Result<Vec<usize>> {
        if self.agents < 2 {
            return Err(Error::invalid(format!("need at least 2 agents, got {}", self.agents)));
        }
        let counts = match self.actions.len() {
            1 => vec![self.actions[0]; self.agents],
            n if n == self.agents => self.actions.clone(),
            n => {
                return Err(Error::invalid(format!(
                    "{n} action counts given for {} agents",
                    self.agents
                )))
            }
        };
        if let Some(k) = counts.iter().position(|&n| n < 2) {
            return Err(Error::invalid(format!("agent {k} needs at least 2 actions")));
        }
        Ok(counts)
    }

    fn topology(&self) -> Result<Topology> {
        match self.kind {
            GeneratorKind::NzsgRandom => Ok(self.topology),
            GeneratorKind::Chain => Ok(Topology::Chain),
            GeneratorKind::CompleteGraph => Ok(Topology::Complete),
            other => Err(Error::invalid(format!(
                "{other:?} does not describe a zero-sum generator"
            ))),
        }
    }
}

/// Draws a pairwise constant-sum game with constants summing to zero.
///
/// Entries of `A^{kl}` and the free constants are uniform on the entry range;
/// the last constant is minus the sum of the others and `A^{lk}_ji = c − A^{kl}_ij`.
pub fn generate_nzsg(spec: &GeneratorSpec) -> Result<NetworkGame> {
    spec.validate()?;
    let topology = spec.topology()?;
    let counts = spec.action_counts()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let pairs = build_edges(topology, spec.agents, &mut rng)?;
    let [lo, hi] = spec.entry_range;
    let draw = move |rng: &mut ChaCha8Rng| lo + (hi - lo) * rng.gen::<f64>();

    let forwards: Vec<Matrix> = pairs
        .iter()
        .map(|&(k, l)| Matrix::from_fn(counts[k], counts[l], |_, _| draw(&mut rng)))
        .collect();
    let mut constants: Vec<f64> = (0..pairs.len() - 1).map(|_| draw(&mut rng)).collect();
    constants.push(-constants.iter().sum::<f64>());

    let edges = pairs
        .iter()
        .zip(forwards)
        .zip(&constants)
        .map(|((&(k, l), a), &c)| Edge {
            from: k,
            to: l,
            backward: Matrix::from_fn(counts[l], counts[k], |j, i| c - a.get(i, j)),
            forward: a,
        })
        .collect();
    NetworkGame::new(counts, edges)
}

/// A perturbed game together with the entrywise certificate implied by ε.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbed {
    pub game: NetworkGame,
    pub certificate: MpdBound,
}

/// `max_k 2 n_k Σ_{(k,l)∈E} n_l`, the factor linking entry noise to δ.
pub fn certificate_factor(game: &NetworkGame) -> f64 {
    (0..game.num_agents())
        .map(|k| 2.0 * game.action_counts()[k] as f64 * game.neighbor_action_sum(k) as f64)
        .fold(0.0, f64::max)
}

/// Largest entry noise ε whose entrywise certificate is `delta`.
pub fn epsilon_for_delta(game: &NetworkGame, delta: f64) -> f64 {
    delta / certificate_factor(game)
}

/// Adds independent uniform noise on `[−ε, ε]` to every payoff entry.
pub fn perturb_game(game: &NetworkGame, epsilon: f64, seed: u64) -> Result<Perturbed> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    perturb_with(game, epsilon, &mut rng)
}

pub(crate) fn perturb_with<R: Rng + ?Sized>(
    game: &NetworkGame,
    epsilon: f64,
    rng: &mut R,
) -> Result<Perturbed> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!("ε must be ≥ 0, got {epsilon}")));
    }
    let certificate = MpdBound::new(certificate_factor(game) * epsilon, MpdKind::AbsEntryBound);
    if epsilon == 0.0 {
        return Ok(Perturbed {
            game: game.clone(),
            certificate,
        });
    }
    let mut noisy = |m: &Matrix| {
        Matrix::from_fn(m.rows(), m.cols(), |i, j| {
            m.get(i, j) + epsilon * (2.0 * rng.gen::<f64>() - 1.0)
        })
    };
    let edges = game
        .edges()
        .iter()
        .map(|e| Edge {
            from: e.from,
            to: e.to,
            forward: noisy(&e.forward),
            backward: noisy(&e.backward),
        })
        .collect();
    Ok(Perturbed {
        game: NetworkGame::assemble(game.action_counts().to_vec(), edges),
        certificate,
    })
}
