use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::matrix::Matrix;
use super::strategy::JointStrategy;
use crate::error::{Error, Result};

/// One undirected edge with both payoff matrices.
///
/// `forward` (`n_from × n_to`) pays `from` against `to`; `backward`
/// (`n_to × n_from`) pays `to` against `from`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    #[serde(rename = "A")]
    pub forward: Matrix,
    #[serde(rename = "B")]
    pub backward: Matrix,
}

/// An edge as seen from one of its endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Incidence {
    pub edge: usize,
    pub neighbor: usize,
    /// The agent is the edge's `from` endpoint.
    pub outgoing: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GameFile {
    agents: Vec<usize>,
    edges: Vec<Edge>,
}

/// Polymatrix game on an undirected graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GameFile", into = "GameFile")]
pub struct NetworkGame {
    action_counts: Vec<usize>,
    edges: Vec<Edge>,
    incidence: Vec<Vec<Incidence>>,
}

impl From<NetworkGame> for GameFile {
    fn from(g: NetworkGame) -> Self {
        GameFile {
            agents: g.action_counts,
            edges: g.edges,
        }
    }
}

impl TryFrom<GameFile> for NetworkGame {
    type Error = Error;

    fn try_from(f: GameFile) -> Result<Self> {
        NetworkGame::new(f.agents, f.edges)
    }
}

impl NetworkGame {
    pub fn new(action_counts: Vec<usize>, edges: Vec<Edge>) -> Result<Self> {
        let n = action_counts.len();
        if n < 2 {
            return Err(Error::invalid(format!("need at least 2 agents, got {n}")));
        }
        if let Some((k, &c)) = action_counts.iter().enumerate().find(|(_, &c)| c < 2) {
            return Err(Error::invalid(format!("agent {k} has {c} actions, need ≥ 2")));
        }
        if edges.is_empty() {
            return Err(Error::invalid("game has no edges"));
        }
        let mut seen = BTreeSet::new();
        for (e, edge) in edges.iter().enumerate() {
            let (a, b) = (edge.from, edge.to);
            if a >= n || b >= n {
                return Err(Error::invalid(format!(
                    "edge {e} ({a},{b}) references a missing agent"
                )));
            }
            if a == b {
                return Err(Error::invalid(format!("edge {e} is a self-loop on {a}")));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::invalid(format!("duplicate edge ({a},{b})")));
            }
            let want_f = (action_counts[a], action_counts[b]);
            let want_b = (action_counts[b], action_counts[a]);
            if (edge.forward.rows(), edge.forward.cols()) != want_f {
                return Err(Error::invalid(format!(
                    "edge ({a},{b}): A is {}×{}, expected {}×{}",
                    edge.forward.rows(),
                    edge.forward.cols(),
                    want_f.0,
                    want_f.1
                )));
            }
            if (edge.backward.rows(), edge.backward.cols()) != want_b {
                return Err(Error::invalid(format!(
                    "edge ({a},{b}): B is {}×{}, expected {}×{}",
                    edge.backward.rows(),
                    edge.backward.cols(),
                    want_b.0,
                    want_b.1
                )));
            }
        }
        Ok(Self::assemble(action_counts, edges))
    }

    /// Builds without validation; callers preserve shapes of a valid game.
    pub(crate) fn assemble(action_counts: Vec<usize>, edges: Vec<Edge>) -> Self {
        let mut incidence = vec![Vec::new(); action_counts.len()];
        for (e, edge) in edges.iter().enumerate() {
            incidence[edge.from].push(Incidence {
                edge: e,
                neighbor: edge.to,
                outgoing: true,
            });
            incidence[edge.to].push(Incidence {
                edge: e,
                neighbor: edge.from,
                outgoing: false,
            });
        }
        NetworkGame {
            action_counts,
            edges,
            incidence,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("game serializes")
    }

    pub fn num_agents(&self) -> usize {
        self.action_counts.len()
    }

    pub fn action_counts(&self) -> &[usize] {
        &self.action_counts
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    #[cfg(test)]
    pub(crate) fn edges_mut(&mut self) -> &mut [Edge] {
        &mut self.edges
    }

    pub fn incidence(&self, k: usize) -> &[Incidence] {
        &self.incidence[k]
    }

    /// Matrix paying agent `k` along the given incidence (`A^{kl}`).
    #[inline]
    pub fn payoff_matrix(&self, inc: &Incidence) -> &Matrix {
        let e = &self.edges[inc.edge];
        if inc.outgoing {
            &e.forward
        } else {
            &e.backward
        }
    }

    /// `Σ_{(k,l)∈E} n_l`.
    pub fn neighbor_action_sum(&self, k: usize) -> usize {
        self.incidence[k]
            .iter()
            .map(|inc| self.action_counts[inc.neighbor])
            .sum()
    }

    /// Offsets of each agent's block in a flattened joint strategy.
    pub fn offsets(&self) -> Vec<usize> {
        let mut o = Vec::with_capacity(self.action_counts.len() + 1);
        o.push(0);
        for &n in &self.action_counts {
            o.push(o.last().unwrap() + n);
        }
        o
    }

    /// Same agents, action counts and unordered edge set.
    pub fn same_structure(&self, other: &NetworkGame) -> bool {
        self.structure_mismatch(other).is_none()
    }

    pub(crate) fn require_same_structure(&self, other: &NetworkGame) -> Result<()> {
        match self.structure_mismatch(other) {
            None => Ok(()),
            Some(msg) => Err(Error::StructureMismatch(msg)),
        }
    }

    fn structure_mismatch(&self, other: &NetworkGame) -> Option<String> {
        if self.action_counts != other.action_counts {
            return Some(format!(
                "action counts {:?} vs {:?}",
                self.action_counts, other.action_counts
            ));
        }
        let key = |g: &NetworkGame| -> BTreeSet<(usize, usize)> {
            g.edges
                .iter()
                .map(|e| (e.from.min(e.to), e.from.max(e.to)))
                .collect()
        };
        if key(self) != key(other) {
            return Some("edge sets differ".into());
        }
        None
    }

    /// Payoff matrix of `k` against `l` in this game, if the edge exists.
    pub fn matrix_between(&self, k: usize, l: usize) -> Option<&Matrix> {
        self.incidence[k]
            .iter()
            .find(|inc| inc.neighbor == l)
            .map(|inc| self.payoff_matrix(inc))
    }

    pub(crate) fn check_strategy(&self, x: &JointStrategy) -> Result<()> {
        if x.num_agents() != self.num_agents() {
            return Err(Error::ShapeMismatch(format!(
                "{} agent blocks for a {}-agent game",
                x.num_agents(),
                self.num_agents()
            )));
        }
        for (k, (&n, block)) in self.action_counts.iter().zip(x.agents()).enumerate() {
            if block.len() != n {
                return Err(Error::ShapeMismatch(format!(
                    "agent {k} has {} probabilities, game has {n} actions",
                    block.len()
                )));
            }
        }
        Ok(())
    }

    fn check_agent(&self, k: usize) -> Result<()> {
        if k >= self.num_agents() {
            return Err(Error::invalid(format!("no agent {k}")));
        }
        Ok(())
    }

    /// `out ← Σ_{(k,l)∈E} A^{kl} x_l` on a flat strategy buffer.
    #[inline]
    pub(crate) fn reward_into(&self, flat: &[f64], offsets: &[usize], k: usize, out: &mut [f64]) {
        out.fill(0.0);
        for inc in &self.incidence[k] {
            let l = inc.neighbor;
            self.payoff_matrix(inc)
                .mul_vec_add(&flat[offsets[l]..offsets[l + 1]], out);
        }
    }

    /// All agents' reward vectors written into a flat buffer.
    pub(crate) fn rewards_flat(&self, flat: &[f64], offsets: &[usize], out: &mut [f64]) {
        for k in 0..self.num_agents() {
            let (a, b) = (offsets[k], offsets[k + 1]);
            self.reward_into(flat, offsets, k, &mut out[a..b]);
        }
    }

    /// Negated payoff matrices (`-A` on every edge).
    pub fn negated(&self) -> NetworkGame {
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                from: e.from,
                to: e.to,
                forward: e.forward.map(|v| -v),
                backward: e.backward.map(|v| -v),
            })
            .collect();
        NetworkGame::assemble(self.action_counts.clone(), edges)
    }
}

/// Agent `k`'s expected payoff `Σ_{(k,l)∈E} x_kᵀ A^{kl} x_l`.
pub fn payoff(game: &NetworkGame, x: &JointStrategy, k: usize) -> Result<f64> {
    game.check_strategy(x)?;
    game.check_agent(k)?;
    Ok(game
        .incidence(k)
        .iter()
        .map(|inc| {
            game.payoff_matrix(inc)
                .bilinear(x.agent(k), x.agent(inc.neighbor))
        })
        .sum())
}

/// Marginal payoff of each of agent `k`'s actions against `x_{-k}`.
pub fn reward_vector(game: &NetworkGame, x: &JointStrategy, k: usize) -> Result<Vec<f64>> {
    game.check_strategy(x)?;
    game.check_agent(k)?;
    let mut out = vec![0.0; game.action_counts()[k]];
    game.reward_into(x.as_flat(), x.offsets(), k, &mut out);
    Ok(out)
}
