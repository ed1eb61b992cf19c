use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-agent exploration rates (temperatures) `T_k > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ExplorationRates(Vec<f64>);

impl ExplorationRates {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::invalid("no exploration rates given"));
        }
        if let Some((k, t)) = rates
            .iter()
            .enumerate()
            .find(|(_, t)| !(t.is_finite() && **t > 0.0))
        {
            return Err(Error::invalid(format!(
                "exploration rate of agent {k} must be positive, got {t}"
            )));
        }
        Ok(ExplorationRates(rates))
    }

    /// The same rate for all `n` agents.
    pub fn uniform(n: usize, t: f64) -> Result<Self> {
        Self::new(vec![t; n])
    }

    /// Broadcasts a single value, or takes one value per agent.
    pub fn for_agents(values: &[f64], n: usize) -> Result<Self> {
        match values.len() {
            1 => Self::uniform(n, values[0]),
            m if m == n => Self::new(values.to_vec()),
            m => Err(Error::invalid(format!(
                "{m} exploration rates for {n} agents"
            ))),
        }
    }

    #[inline]
    pub fn get(&self, k: usize) -> f64 {
        self.0[k]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }

    pub(crate) fn check_agents(&self, n: usize) -> Result<()> {
        if self.0.len() != n {
            return Err(Error::invalid(format!(
                "{} exploration rates for a {n}-agent game",
                self.0.len()
            )));
        }
        Ok(())
    }
}

impl TryFrom<Vec<f64>> for ExplorationRates {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ExplorationRates> for Vec<f64> {
    fn from(r: ExplorationRates) -> Self {
        r.0
    }
}
