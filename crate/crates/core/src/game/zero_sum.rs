//! Network zero-sum test.
//!
//! Total payoff is multilinear in the agents' strategies, so it vanishes on
//! the whole joint simplex iff it vanishes on every pure profile. Games with
//! more than [`PROFILE_CAP`] pure profiles use an exact structural test
//! instead: the total payoff is a sum of pairwise terms, and it is identically
//! zero iff every edge's interaction part vanishes, each agent's main effects
//! cancel across its edges, and the grand constants sum to zero.

use super::network::NetworkGame;
use crate::exec::{self, Execution};

/// Default tolerance on `|Σ_k u_k(s)|`.
pub const ZERO_SUM_TOL: f64 = 1e-9;

/// Largest pure-profile count enumerated directly.
pub const PROFILE_CAP: u128 = 1_000_000;

const CHUNK: usize = 4096;

/// Total payoff `Σ_k u_k(s)` at a pure profile.
pub fn total_payoff_pure(game: &NetworkGame, profile: &[usize]) -> f64 {
    game.edges()
        .iter()
        .map(|e| {
            let (i, j) = (profile[e.from], profile[e.to]);
            e.forward.get(i, j) + e.backward.get(j, i)
        })
        .sum()
}

pub fn profile_count(counts: &[usize]) -> u128 {
    counts.iter().map(|&n| n as u128).product()
}

/// Decodes a mixed-radix index (agent 0 fastest) into a profile.
pub(crate) fn decode_profile(mut idx: usize, counts: &[usize], out: &mut [usize]) {
    for (slot, &n) in out.iter_mut().zip(counts) {
        *slot = idx % n;
        idx /= n;
    }
}

/// Advances a profile odometer; returns false after the last profile.
pub(crate) fn next_profile(profile: &mut [usize], counts: &[usize]) -> bool {
    for (slot, &n) in profile.iter_mut().zip(counts) {
        *slot += 1;
        if *slot < n {
            return true;
        }
        *slot = 0;
    }
    false
}

/// Largest `|Σ_k u_k|` over the joint simplex (exact when enumerable,
/// otherwise an upper bound that is zero iff the game is zero-sum).
pub fn zero_sum_residual(game: &NetworkGame) -> f64 {
    zero_sum_residual_with(game, Execution::default())
}

pub fn zero_sum_residual_with(game: &NetworkGame, exec: Execution) -> f64 {
    let counts = game.action_counts();
    let total = profile_count(counts);
    if total > PROFILE_CAP {
        return structural_residual(game);
    }
    let total = total as usize;
    let chunks = total.div_ceil(CHUNK);
    exec::max_indexed(exec, chunks, 0.0, |c| {
        let start = c * CHUNK;
        let end = (start + CHUNK).min(total);
        let mut profile = vec![0; counts.len()];
        decode_profile(start, counts, &mut profile);
        let mut worst: f64 = 0.0;
        for _ in start..end {
            worst = worst.max(total_payoff_pure(game, &profile).abs());
            next_profile(&mut profile, counts);
        }
        worst
    })
}

/// True iff `Σ_k u_k(x) = 0` within `tol` on the joint simplex.
pub fn is_zero_sum(game: &NetworkGame, tol: f64) -> bool {
    zero_sum_residual(game) <= tol
}

/// Upper bound on `max |Σ_k u_k|` from the two-way ANOVA decomposition of
/// each edge's sum matrix `s_ij = A_ij + B_ji`.
pub fn structural_residual(game: &NetworkGame) -> f64 {
    let counts = game.action_counts();
    let mut main: Vec<Vec<f64>> = counts.iter().map(|&n| vec![0.0; n]).collect();
    let mut grand = 0.0;
    let mut interaction = 0.0;
    for e in game.edges() {
        let (nr, nc) = (counts[e.from], counts[e.to]);
        let s = |i: usize, j: usize| e.forward.get(i, j) + e.backward.get(j, i);
        let mut row_mean = vec![0.0; nr];
        let mut col_mean = vec![0.0; nc];
        let mut mean = 0.0;
        for i in 0..nr {
            for j in 0..nc {
                let v = s(i, j);
                row_mean[i] += v / nc as f64;
                col_mean[j] += v / nr as f64;
                mean += v / (nr * nc) as f64;
            }
        }
        for i in 0..nr {
            for j in 0..nc {
                let g = s(i, j) - row_mean[i] - col_mean[j] + mean;
                interaction = f64::max(interaction, g.abs());
            }
        }
        for i in 0..nr {
            main[e.from][i] += row_mean[i] - mean;
        }
        for j in 0..nc {
            main[e.to][j] += col_mean[j] - mean;
        }
        grand += mean;
    }
    let main_bound: f64 = main
        .iter()
        .map(|m| m.iter().fold(0.0, |a: f64, v| a.max(v.abs())))
        .sum();
    interaction * game.edges().len() as f64 + main_bound + grand.abs()
}
