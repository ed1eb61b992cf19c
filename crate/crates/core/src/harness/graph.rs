//! Interaction graphs for generated games.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Topology {
    /// `0 – 1 – … – N−1`.
    Chain,
    Complete,
    /// Erdős–Rényi graph redrawn until connected.
    Random { edge_prob: f64 },
}

impl Default for Topology {
    fn default() -> Self {
        Topology::Random { edge_prob: 0.5 }
    }
}

const MAX_REDRAWS: usize = 10_000;

/// Edge list `(k, l)` with `k < l`, in lexicographic order.
pub fn build_edges<R: Rng + ?Sized>(
    topology: Topology,
    agents: usize,
    rng: &mut R,
) -> Result<Vec<(usize, usize)>> {
    if agents < 2 {
        return Err(Error::invalid(format!("need at least 2 agents, got {agents}")));
    }
    match topology {
        Topology::Chain => Ok((0..agents - 1).map(|k| (k, k + 1)).collect()),
        Topology::Complete => Ok(all_pairs(agents).collect()),
        Topology::Random { edge_prob } => {
            if !(edge_prob > 0.0 && edge_prob <= 1.0) {
                return Err(Error::invalid(format!(
                    "edge probability must lie in (0, 1], got {edge_prob}"
                )));
            }
            for _ in 0..MAX_REDRAWS {
                let edges: Vec<_> = all_pairs(agents)
                    .filter(|_| rng.gen::<f64>() < edge_prob)
                    .collect();
                if is_connected(agents, &edges) {
                    return Ok(edges);
                }
            }
            Err(Error::invalid(format!(
                "no connected graph after {MAX_REDRAWS} draws at edge probability {edge_prob}"
            )))
        }
    }
}

fn all_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |k| (k + 1..n).map(move |l| (k, l)))
}

pub fn is_connected(agents: usize, edges: &[(usize, usize)]) -> bool {
    let mut adj = vec![Vec::new(); agents];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; agents];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}
