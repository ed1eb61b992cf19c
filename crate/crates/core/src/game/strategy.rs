use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on each agent's probability mass.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Smallest probability an interior strategy may carry.
pub const EPS_FLOOR: f64 = 1e-12;

/// One probability vector per agent, stored contiguously.
///
/// `offsets[k]..offsets[k + 1]` indexes agent `k`'s block in `probs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct JointStrategy {
    offsets: Vec<usize>,
    probs: Vec<f64>,
}

impl JointStrategy {
    /// Validates and renormalizes per-agent blocks.
    ///
    /// Entries below `-1e-12` are rejected; tiny negatives are clamped to zero
    /// and each block is rescaled to sum to one.
    pub fn new(blocks: Vec<Vec<f64>>) -> Result<Self> {
        let mut offsets = Vec::with_capacity(blocks.len() + 1);
        let mut probs = Vec::new();
        offsets.push(0);
        for (k, block) in blocks.into_iter().enumerate() {
            if block.is_empty() {
                return Err(Error::invalid(format!("agent {k} has an empty strategy")));
            }
            for (i, &v) in block.iter().enumerate() {
                if !v.is_finite() || v < -SIMPLEX_TOL {
                    return Err(Error::invalid(format!(
                        "agent {k} action {i} has probability {v}"
                    )));
                }
            }
            let sum: f64 = block.iter().map(|v| v.max(0.0)).sum();
            if (sum - 1.0).abs() > 1e-6 {
                return Err(Error::invalid(format!(
                    "agent {k} probabilities sum to {sum}, not 1"
                )));
            }
            probs.extend(block.iter().map(|v| v.max(0.0) / sum));
            offsets.push(probs.len());
        }
        Ok(JointStrategy { offsets, probs })
    }

    pub fn uniform(action_counts: &[usize]) -> Self {
        let blocks = action_counts
            .iter()
            .map(|&n| vec![1.0 / n as f64; n])
            .collect();
        JointStrategy::from_blocks_unchecked(blocks)
    }

    /// Puts agent `k` on action `profile[k]` with probability one.
    pub fn pure(action_counts: &[usize], profile: &[usize]) -> Self {
        let blocks = action_counts
            .iter()
            .zip(profile)
            .map(|(&n, &a)| {
                let mut b = vec![0.0; n];
                b[a] = 1.0;
                b
            })
            .collect();
        JointStrategy::from_blocks_unchecked(blocks)
    }

    /// Draws each agent's strategy uniformly from the open simplex
    /// (flat Dirichlet via normalized exponentials).
    pub fn random_interior<R: Rng + ?Sized>(action_counts: &[usize], rng: &mut R) -> Self {
        let blocks = action_counts
            .iter()
            .map(|&n| {
                let raw: Vec<f64> = (0..n)
                    .map(|_| -(1.0 - rng.gen::<f64>()).ln() + 1e-9)
                    .collect();
                let s: f64 = raw.iter().sum();
                raw.into_iter().map(|v| v / s).collect()
            })
            .collect();
        JointStrategy::from_blocks_unchecked(blocks)
    }

    pub(crate) fn from_blocks_unchecked(blocks: Vec<Vec<f64>>) -> Self {
        let mut offsets = vec![0];
        let mut probs = Vec::new();
        for b in blocks {
            probs.extend(b);
            offsets.push(probs.len());
        }
        JointStrategy { offsets, probs }
    }

    pub(crate) fn from_flat(offsets: Vec<usize>, probs: Vec<f64>) -> Self {
        debug_assert_eq!(*offsets.last().unwrap(), probs.len());
        JointStrategy { offsets, probs }
    }

    pub fn num_agents(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn action_counts(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    #[inline]
    pub fn agent(&self, k: usize) -> &[f64] {
        &self.probs[self.offsets[k]..self.offsets[k + 1]]
    }

    pub fn agents(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.offsets
            .windows(2)
            .map(move |w| &self.probs[w[0]..w[1]])
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.probs
    }

    pub fn to_blocks(&self) -> Vec<Vec<f64>> {
        self.agents().map(<[f64]>::to_vec).collect()
    }

    /// Every entry is at least `floor`.
    pub fn is_interior(&self, floor: f64) -> bool {
        self.probs.iter().all(|&p| p >= floor)
    }

    /// Checks strict positivity, reporting the first offending entry.
    pub fn require_interior(&self, floor: f64) -> Result<()> {
        for (k, block) in self.agents().enumerate() {
            for (i, &v) in block.iter().enumerate() {
                if !(v >= floor) {
                    return Err(Error::Boundary {
                        agent: k,
                        action: i,
                        value: v,
                    });
                }
            }
        }
        Ok(())
    }

    /// Largest per-agent deviation of the block sums from one.
    pub fn simplex_error(&self) -> f64 {
        self.agents()
            .map(|b| (b.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn sup_distance(&self, other: &JointStrategy) -> f64 {
        debug_assert_eq!(self.offsets, other.offsets);
        self.probs
            .iter()
            .zip(&other.probs)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl TryFrom<Vec<Vec<f64>>> for JointStrategy {
    type Error = Error;

    fn try_from(blocks: Vec<Vec<f64>>) -> Result<Self> {
        JointStrategy::new(blocks)
    }
}

impl From<JointStrategy> for Vec<Vec<f64>> {
    fn from(x: JointStrategy) -> Self {
        x.to_blocks()
    }
}
