//! Conflict networks: `A^{kl}_ij = v_k P^{kl}_ij − c^{kl}_i` with
//! `P^{kl}_ij + P^{lk}_ji = 1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::graph::{build_edges, Topology};
use crate::error::{Error, Result};
use crate::game::{Edge, Matrix, NetworkGame};

/// Tolerance on the contest-matrix complement condition.
pub const COMPLEMENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConflictEdge {
    pub from: usize,
    pub to: usize,
    /// `P^{kl}`, `n_k × n_l`.
    pub p_forward: Matrix,
    /// `P^{lk}`, `n_l × n_k`.
    pub p_backward: Matrix,
    /// `c^{kl}`, one cost per action of `from`.
    pub cost_forward: Vec<f64>,
    /// `c^{lk}`, one cost per action of `to`.
    pub cost_backward: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConflictSpec {
    pub action_counts: Vec<usize>,
    pub values: Vec<f64>,
    pub edges: Vec<ConflictEdge>,
}

pub fn conflict_network(spec: &ConflictSpec) -> Result<NetworkGame> {
    let n = spec.action_counts.len();
    if spec.values.len() != n {
        return Err(Error::invalid(format!(
            "{} valuations for {n} agents",
            spec.values.len()
        )));
    }
    if let Some(k) = spec.values.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::invalid(format!("valuation of agent {k} must be positive")));
    }
    let mut edges = Vec::with_capacity(spec.edges.len());
    for e in &spec.edges {
        if e.from >= n || e.to >= n {
            return Err(Error::invalid(format!("edge ({},{}) names an unknown agent", e.from, e.to)));
        }
        let (nk, nl) = (spec.action_counts[e.from], spec.action_counts[e.to]);
        let shapes_ok = (e.p_forward.rows(), e.p_forward.cols()) == (nk, nl)
            && (e.p_backward.rows(), e.p_backward.cols()) == (nl, nk)
            && e.cost_forward.len() == nk
            && e.cost_backward.len() == nl;
        if !shapes_ok {
            return Err(Error::invalid(format!(
                "edge ({},{}): contest matrices or costs have the wrong shape",
                e.from, e.to
            )));
        }
        for i in 0..nk {
            for j in 0..nl {
                let total = e.p_forward.get(i, j) + e.p_backward.get(j, i);
                if (total - 1.0).abs() > COMPLEMENT_TOL {
                    return Err(Error::invalid(format!(
                        "edge ({},{}): P^kl[{i},{j}] + P^lk[{j},{i}] = {total}, not 1",
                        e.from, e.to
                    )));
                }
            }
        }
        let (vk, vl) = (spec.values[e.from], spec.values[e.to]);
        edges.push(Edge {
            from: e.from,
            to: e.to,
            forward: Matrix::from_fn(nk, nl, |i, j| vk * e.p_forward.get(i, j) - e.cost_forward[i]),
            backward: Matrix::from_fn(nl, nk, |j, i| vl * e.p_backward.get(j, i) - e.cost_backward[j]),
        });
    }
    NetworkGame::new(spec.action_counts.clone(), edges)
}

/// The three-agent conflict network with `A^{k,k+1}` and `A^{k,k−1}` pinned
/// for every agent; edges are `(k, k+1 mod 3)`.
pub fn conflict_preset() -> NetworkGame {
    let next = Matrix::from_rows(vec![vec![2.4, 6.6], vec![4.5, 3.1]]).expect("finite");
    let prev = Matrix::from_rows(vec![vec![2.8, 1.0], vec![4.2, 7.2]]).expect("finite");
    let edges = (0..3)
        .map(|k| Edge {
            from: k,
            to: (k + 1) % 3,
            forward: next.clone(),
            backward: prev.clone(),
        })
        .collect();
    NetworkGame::new(vec![2; 3], edges).expect("preset is well formed")
}

/// Random conflict network: `v_k ~ U[0.5, 2]`, `P^{kl} ~ U[0, 1]` with its
/// complement, costs `~ U[0, cost_max]`.
pub fn random_conflict_spec(
    agents: usize,
    actions: usize,
    topology: Topology,
    cost_max: f64,
    seed: u64,
) -> Result<ConflictSpec> {
    if actions < 2 {
        return Err(Error::invalid("need at least 2 actions"));
    }
    if !(cost_max >= 0.0 && cost_max.is_finite()) {
        return Err(Error::invalid(format!("cost bound must be ≥ 0, got {cost_max}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = build_edges(topology, agents, &mut rng)?;
    let values = (0..agents).map(|_| 0.5 + 1.5 * rng.gen::<f64>()).collect();
    let edges = pairs
        .into_iter()
        .map(|(k, l)| {
            let p = Matrix::from_fn(actions, actions, |_, _| rng.gen::<f64>());
            let q = Matrix::from_fn(actions, actions, |j, i| 1.0 - p.get(i, j));
            ConflictEdge {
                from: k,
                to: l,
                p_forward: p,
                p_backward: q,
                cost_forward: (0..actions).map(|_| cost_max * rng.gen::<f64>()).collect(),
                cost_backward: (0..actions).map(|_| cost_max * rng.gen::<f64>()).collect(),
            }
        })
        .collect();
    Ok(ConflictSpec {
        action_counts: vec![actions; agents],
        values,
        edges,
    })
}

/// Shifts every edge by the mean edge constant so that a pairwise
/// constant-sum game with constants `c_e` gets constants `c_e − mean(c)`.
pub fn center_constants(game: &NetworkGame) -> NetworkGame {
    let means: Vec<f64> = game
        .edges()
        .iter()
        .map(|e| {
            let (r, c) = (e.forward.rows(), e.forward.cols());
            let mut total = 0.0;
            for i in 0..r {
                for j in 0..c {
                    total += e.forward.get(i, j) + e.backward.get(j, i);
                }
            }
            total / (r * c) as f64
        })
        .collect();
    let shift = means.iter().sum::<f64>() / means.len() as f64 / 2.0;
    let edges = game
        .edges()
        .iter()
        .map(|e| Edge {
            from: e.from,
            to: e.to,
            forward: e.forward.map(|v| v - shift),
            backward: e.backward.map(|v| v - shift),
        })
        .collect();
    NetworkGame::assemble(game.action_counts().to_vec(), edges)
}
