//! Pairwise constant-sum form of a network zero-sum game.
//!
//! A zero-sum game need not be pairwise constant-sum edge by edge, yet it is
//! payoff-equivalent to one. Adding `g 1ᵀ` to `A^{kl}` shifts `u_k` by
//! `x_kᵀ g`, so per-edge row offsets `g^{kl}` with `Σ_l g^{kl} = 0` leave every
//! payoff unchanged. The offsets solve `s_ij + g^{kl}_i + g^{lk}_j = c_kl`,
//! `Σ c_kl = 0`, which is consistent exactly when the game is zero-sum.

use nalgebra::{DMatrix, DVector};

use super::nearest::{nearest_nzsg, sum_matrix};
use crate::error::{Error, Result};
use crate::game::{zero_sum_residual, Edge, Matrix, NetworkGame};

/// Zero-sum tolerance accepted on input.
pub const DECOMPOSE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    /// Pairwise constant-sum game with the same payoffs as the input.
    pub game: NetworkGame,
    /// `c_kl` per edge in edge order; sums to zero.
    pub constants: Vec<f64>,
}

pub fn constant_sum_decompose(game_zs: &NetworkGame) -> Result<Decomposition> {
    let residual = zero_sum_residual(game_zs);
    if residual > DECOMPOSE_TOL {
        return Err(Error::invalid(format!(
            "game is not network zero-sum (residual {residual:e})"
        )));
    }
    let direct = nearest_nzsg(game_zs);
    let scale = 1.0 + game_zs.edges().iter().map(|e| e.forward.max_abs().max(e.backward.max_abs())).fold(0.0, f64::max);
    if direct.objective.sqrt() <= 1e-10 * scale {
        return Ok(Decomposition {
            game: direct.projected,
            constants: direct.constants,
        });
    }
    let shifted = apply_offsets(game_zs, &solve_offsets(game_zs, scale)?);
    let fixed = nearest_nzsg(&shifted);
    Ok(Decomposition {
        game: fixed.projected,
        constants: fixed.constants,
    })
}

/// Per-edge `(g^{kl}, g^{lk})` in edge orientation.
type Offsets = Vec<(Vec<f64>, Vec<f64>)>;

fn solve_offsets(game: &NetworkGame, scale: f64) -> Result<Offsets> {
    let counts = game.action_counts();
    let edges = game.edges();
    // Unknowns per edge: g_from (n_from), g_to (n_to), c.
    let mut base = Vec::with_capacity(edges.len());
    let mut unknowns = 0;
    for e in edges {
        base.push(unknowns);
        unknowns += counts[e.from] + counts[e.to] + 1;
    }
    let pair_rows: usize = edges.iter().map(|e| counts[e.from] * counts[e.to]).sum();
    let balance_rows: usize = (0..game.num_agents())
        .filter(|&k| !game.incidence(k).is_empty())
        .map(|k| counts[k])
        .sum();
    let rows = pair_rows + balance_rows + 1;
    let mut a = DMatrix::<f64>::zeros(rows, unknowns);
    let mut b = DVector::<f64>::zeros(rows);
    let mut row = 0;
    for (e, edge) in edges.iter().enumerate() {
        let (nf, nt) = (counts[edge.from], counts[edge.to]);
        let s = sum_matrix(edge);
        for i in 0..nf {
            for j in 0..nt {
                a[(row, base[e] + i)] = 1.0;
                a[(row, base[e] + nf + j)] = 1.0;
                a[(row, base[e] + nf + nt)] = -1.0;
                b[row] = -s.get(i, j);
                row += 1;
            }
        }
    }
    for k in 0..game.num_agents() {
        if game.incidence(k).is_empty() {
            continue;
        }
        for act in 0..counts[k] {
            for inc in game.incidence(k) {
                let e = inc.edge;
                let col = if inc.outgoing {
                    base[e] + act
                } else {
                    base[e] + counts[edges[e].from] + act
                };
                a[(row, col)] = 1.0;
            }
            row += 1;
        }
    }
    for (e, edge) in edges.iter().enumerate() {
        a[(row, base[e] + counts[edge.from] + counts[edge.to])] = 1.0;
    }

    let x = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-12)
        .map_err(|_| Error::NoConvergence {
            iterations: 0,
            residual: f64::INFINITY,
        })?;
    let miss = (&a * &x - &b).amax();
    if miss > 1e-8 * scale {
        return Err(Error::NoConvergence {
            iterations: 1,
            residual: miss,
        });
    }
    Ok(edges
        .iter()
        .enumerate()
        .map(|(e, edge)| {
            let (nf, nt) = (counts[edge.from], counts[edge.to]);
            let g = x.rows(base[e], nf + nt);
            (g.rows(0, nf).iter().copied().collect(), g.rows(nf, nt).iter().copied().collect())
        })
        .collect())
}

fn apply_offsets(game: &NetworkGame, offsets: &Offsets) -> NetworkGame {
    let edges = game
        .edges()
        .iter()
        .zip(offsets)
        .map(|(e, (gf, gt))| Edge {
            from: e.from,
            to: e.to,
            forward: Matrix::from_fn(e.forward.rows(), e.forward.cols(), |i, j| {
                e.forward.get(i, j) + gf[i]
            }),
            backward: Matrix::from_fn(e.backward.rows(), e.backward.cols(), |j, i| {
                e.backward.get(j, i) + gt[j]
            }),
        })
        .collect();
    NetworkGame::assemble(game.action_counts().to_vec(), edges)
}
