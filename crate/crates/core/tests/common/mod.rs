//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nzsg::game::{Edge, JointStrategy, Matrix, NetworkGame};
use nzsg::harness::{generate_nzsg, GeneratorSpec, Topology};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn mat(rows: &[&[f64]]) -> Matrix {
    Matrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
}

pub fn pennies() -> NetworkGame {
    let a = mat(&[&[1.0, -1.0], &[-1.0, 1.0]]);
    NetworkGame::new(
        vec![2, 2],
        vec![Edge { from: 0, to: 1, forward: a.clone(), backward: a.transpose().map(|v| -v) }],
    )
    .unwrap()
}

/// Arbitrary (generally not zero-sum) game with entries in `[-scale, scale]`.
pub fn random_game(r: &mut ChaCha8Rng, agents: usize, max_actions: usize, scale: f64) -> NetworkGame {
    let counts: Vec<usize> = (0..agents).map(|_| r.gen_range(2..=max_actions)).collect();
    let mut edges = Vec::new();
    for k in 0..agents {
        for l in k + 1..agents {
            if l == k + 1 || r.gen_bool(0.5) {
                let forward = Matrix::from_fn(counts[k], counts[l], |_, _| scale * (2.0 * r.gen::<f64>() - 1.0));
                let backward = Matrix::from_fn(counts[l], counts[k], |_, _| scale * (2.0 * r.gen::<f64>() - 1.0));
                edges.push(Edge { from: k, to: l, forward, backward });
            }
        }
    }
    NetworkGame::new(counts, edges).unwrap()
}

/// Same structure as `g`, every entry moved by at most `eps`.
pub fn jitter(g: &NetworkGame, r: &mut ChaCha8Rng, eps: f64) -> NetworkGame {
    let edges = g
        .edges()
        .iter()
        .map(|e| Edge {
            from: e.from,
            to: e.to,
            forward: Matrix::from_fn(e.forward.rows(), e.forward.cols(), |i, j| {
                e.forward.get(i, j) + eps * (2.0 * r.gen::<f64>() - 1.0)
            }),
            backward: Matrix::from_fn(e.backward.rows(), e.backward.cols(), |i, j| {
                e.backward.get(i, j) + eps * (2.0 * r.gen::<f64>() - 1.0)
            }),
        })
        .collect();
    NetworkGame::new(g.action_counts().to_vec(), edges).unwrap()
}

pub fn zero_sum(agents: usize, actions: usize, topology: Topology, seed: u64) -> NetworkGame {
    generate_nzsg(&GeneratorSpec::nzsg(agents, actions, topology, seed)).unwrap()
}

/// `A^{kl}` looked up by scanning the edge list.
pub fn block(g: &NetworkGame, k: usize, l: usize) -> Option<&Matrix> {
    g.edges().iter().find_map(|e| {
        if (e.from, e.to) == (k, l) {
            Some(&e.forward)
        } else if (e.to, e.from) == (k, l) {
            Some(&e.backward)
        } else {
            None
        }
    })
}

/// Payoff by summing over each edge directly from the file representation.
pub fn brute_payoff(g: &NetworkGame, x: &JointStrategy, k: usize) -> f64 {
    let mut total = 0.0;
    for l in 0..g.num_agents() {
        if let Some(a) = block(g, k, l) {
            for i in 0..a.rows() {
                for j in 0..a.cols() {
                    total += x.agent(k)[i] * a.get(i, j) * x.agent(l)[j];
                }
            }
        }
    }
    total
}

/// Iterates over every pure joint profile.
pub fn all_profiles(counts: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &n in counts {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..n).map(move |a| {
                    let mut q = p.clone();
                    q.push(a);
                    q
                })
            })
            .collect();
    }
    out
}

/// MPD by brute force over full joint profiles and all deviation pairs.
///
/// The per-action payoff difference is summed edge by edge in edge order.
pub fn mpd_oracle(g1: &NetworkGame, g2: &NetworkGame) -> f64 {
    let counts = g1.action_counts();
    let mut best: f64 = 0.0;
    for s in all_profiles(counts) {
        for k in 0..g1.num_agents() {
            let gain = |i: usize| {
                let mut v = 0.0;
                for e in g1.edges() {
                    let l = if e.from == k {
                        e.to
                    } else if e.to == k {
                        e.from
                    } else {
                        continue;
                    };
                    let a = block(g1, k, l).unwrap();
                    let b = block(g2, k, l).unwrap();
                    v += a.get(i, s[l]) - b.get(i, s[l]);
                }
                v
            };
            for i in 0..counts[k] {
                for ip in 0..counts[k] {
                    best = best.max(gain(ip) - gain(i));
                }
            }
        }
    }
    best
}

/// Largest singular value by power iteration on `MᵀM`.
pub fn power_norm(m: &Matrix) -> f64 {
    let mut v = vec![1.0; m.cols()];
    let mut sigma = 0.0;
    for _ in 0..2000 {
        let mv: Vec<f64> = (0..m.rows()).map(|i| (0..m.cols()).map(|j| m.get(i, j) * v[j]).sum()).collect();
        let mut w: Vec<f64> = (0..m.cols()).map(|j| (0..m.rows()).map(|i| m.get(i, j) * mv[i]).sum()).collect();
        let n = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n == 0.0 {
            return 0.0;
        }
        w.iter_mut().for_each(|a| *a /= n);
        sigma = n.sqrt();
        v = w;
    }
    sigma
}

/// Nearest pairwise constant-sum game with zero-sum constants via the
/// generic KKT system (full-pivot LU) `[2I Cᵀ; C 0] [x; μ] = [2a; 0]`.
///
/// Returns the objective and the optimal entries in edge order (forward
/// row-major, then backward row-major, per edge).
pub fn projection_oracle(g: &NetworkGame) -> (f64, Vec<f64>) {
    let edges = g.edges();
    let mut a = Vec::new();
    let mut layout = Vec::new();
    for e in edges {
        let f0 = a.len();
        a.extend_from_slice(e.forward.as_slice());
        let b0 = a.len();
        a.extend_from_slice(e.backward.as_slice());
        layout.push((f0, b0, e.forward.rows(), e.forward.cols()));
    }
    let n_entries = a.len();
    let n_vars = n_entries + edges.len();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    for (e, &(f0, b0, r, c)) in layout.iter().enumerate() {
        for i in 0..r {
            for j in 0..c {
                rows.push(vec![(f0 + i * c + j, 1.0), (b0 + j * r + i, 1.0), (n_entries + e, -1.0)]);
            }
        }
    }
    rows.push((0..edges.len()).map(|e| (n_entries + e, 1.0)).collect());
    let m = rows.len();
    let dim = n_vars + m;
    let mut kkt = DMatrix::<f64>::zeros(dim, dim);
    let mut rhs = DVector::<f64>::zeros(dim);
    for v in 0..n_entries {
        kkt[(v, v)] = 2.0;
        rhs[v] = 2.0 * a[v];
    }
    for (q, row) in rows.iter().enumerate() {
        for &(v, coef) in row {
            kkt[(n_vars + q, v)] = coef;
            kkt[(v, n_vars + q)] = coef;
        }
    }
    // Constants carry no objective weight; the system stays nonsingular
    // because every constant appears in its edge's constraints.
    let sol = kkt.full_piv_lu().solve(&rhs).expect("KKT system is nonsingular");
    let x: Vec<f64> = sol.iter().take(n_entries).copied().collect();
    let obj = x.iter().zip(&a).map(|(p, q)| (p - q).powi(2)).sum();
    (obj, x)
}

pub fn flatten_entries(g: &NetworkGame) -> Vec<f64> {
    let mut v = Vec::new();
    for e in g.edges() {
        v.extend_from_slice(e.forward.as_slice());
        v.extend_from_slice(e.backward.as_slice());
    }
    v
}

pub fn kl_oracle(y: &JointStrategy, x: &JointStrategy) -> f64 {
    y.as_flat()
        .iter()
        .zip(x.as_flat())
        .filter(|(a, _)| **a > 0.0)
        .map(|(a, b)| a * (a / b).ln())
        .sum()
}

pub fn softmax(v: &[f64]) -> Vec<f64> {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = v.iter().map(|a| (a - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|a| a / s).collect()
}
