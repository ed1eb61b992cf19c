//! Two-dimensional logit-plane embedding of two-action joint strategies.
//!
//! With `ũ = logit(u)` and `ṽ = logit(v)`, the point `(α, β)` maps to the
//! joint strategy in which agent `k` plays its first action with probability
//! `sigmoid(α ũ_k + β ṽ_k)`.

use serde::{Deserialize, Serialize};

use crate::dynamics::kl_divergence;
use crate::error::{Error, Result};
use crate::game::JointStrategy;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingSpec {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    /// Reference point for the KL surface, if any.
    #[serde(default)]
    pub reference: Option<JointStrategy>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingGrid {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    /// `points[a][b]` sits at `(alphas[a], betas[b])`.
    pub points: Vec<Vec<JointStrategy>>,
    /// `D_KL(p‖x)` on the grid when a reference is given.
    pub kl: Option<Vec<Vec<f64>>>,
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn embed_point(u_tilde: &[f64], v_tilde: &[f64], alpha: f64, beta: f64) -> JointStrategy {
    let counts = vec![2; u_tilde.len()];
    let probs = u_tilde
        .iter()
        .zip(v_tilde)
        .flat_map(|(a, b)| {
            let z = alpha * a + beta * b;
            [sigmoid(z), sigmoid(-z)]
        })
        .collect();
    JointStrategy::from_flat((0..=counts.len()).map(|k| 2 * k).collect(), probs)
}

pub fn logit_embedding(spec: &EmbeddingSpec) -> Result<EmbeddingGrid> {
    let n = spec.u.len();
    if n == 0 || spec.v.len() != n {
        return Err(Error::invalid(format!(
            "base vectors have lengths {} and {}",
            n,
            spec.v.len()
        )));
    }
    for (name, w) in [("u", &spec.u), ("v", &spec.v)] {
        if let Some(k) = w.iter().position(|&p| !(p > 0.0 && p < 1.0)) {
            return Err(Error::invalid(format!(
                "{name}[{k}] = {} is not strictly inside (0, 1)",
                w[k]
            )));
        }
    }
    if let Some(a) = spec.alphas.iter().chain(&spec.betas).find(|a| !a.is_finite()) {
        return Err(Error::invalid(format!("non-finite grid coefficient {a}")));
    }
    if let Some(p) = &spec.reference {
        if p.action_counts() != vec![2; n] {
            return Err(Error::ShapeMismatch(format!(
                "reference has action counts {:?}, embedding needs {n} two-action agents",
                p.action_counts()
            )));
        }
    }
    let ut: Vec<f64> = spec.u.iter().map(|&p| logit(p)).collect();
    let vt: Vec<f64> = spec.v.iter().map(|&p| logit(p)).collect();
    let points: Vec<Vec<JointStrategy>> = spec
        .alphas
        .iter()
        .map(|&a| spec.betas.iter().map(|&b| embed_point(&ut, &vt, a, b)).collect())
        .collect();
    let kl = match &spec.reference {
        None => None,
        Some(p) => Some(
            points
                .iter()
                .map(|row| row.iter().map(|x| kl_divergence(p, x)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?,
        ),
    };
    Ok(EmbeddingGrid {
        alphas: spec.alphas.clone(),
        betas: spec.betas.clone(),
        points,
        kl,
    })
}
