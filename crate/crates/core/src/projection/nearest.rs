//! Closed-form solution of the nearest pairwise constant-sum projection.
//!
//! Minimize `Σ_e ‖Â^{kl} − A^{kl}‖²_F + ‖Â^{lk} − A^{lk}‖²_F` subject to
//! `Â^{kl}_ij + Â^{lk}_ji = c_e` and `Σ_e c_e = 0`. For fixed `c` each entry
//! pair splits the gap `c_e − s_ij` evenly, leaving the one-dimensional
//! Lagrange condition on `c` solved by `λ`.

use serde::{Deserialize, Serialize};

use crate::game::{
    mpd_bound_2norm, mpd_bound_abs, zero_sum_residual, Edge, Matrix, MpdBound, NetworkGame,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    pub projected: NetworkGame,
    /// One constant per edge, in the game's edge order.
    pub constants: Vec<f64>,
    pub lambda: f64,
    pub objective: f64,
    pub delta_abs: MpdBound,
    pub delta_2norm: MpdBound,
}

/// Serialized summary of a projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub objective: f64,
    pub constants: Vec<f64>,
    pub lambda: f64,
    pub delta_abs: f64,
    pub delta_2norm: f64,
    pub zero_sum_residual: f64,
}

impl ProjectionResult {
    pub fn certificate(&self) -> Certificate {
        Certificate {
            objective: self.objective,
            constants: self.constants.clone(),
            lambda: self.lambda,
            delta_abs: self.delta_abs.value,
            delta_2norm: self.delta_2norm.value,
            zero_sum_residual: zero_sum_residual(&self.projected),
        }
    }
}

/// `s_ij = A^{kl}_ij + A^{lk}_ji`, laid out as `n_k × n_l`.
pub(crate) fn sum_matrix(edge: &Edge) -> Matrix {
    Matrix::from_fn(edge.forward.rows(), edge.forward.cols(), |i, j| {
        edge.forward.get(i, j) + edge.backward.get(j, i)
    })
}

pub fn nearest_nzsg(game: &NetworkGame) -> ProjectionResult {
    let sums: Vec<Matrix> = game.edges().iter().map(sum_matrix).collect();
    let sizes: Vec<f64> = sums.iter().map(|s| (s.rows() * s.cols()) as f64).collect();
    let totals: Vec<f64> = sums.iter().map(|s| s.as_slice().iter().sum()).collect();
    let lambda = totals.iter().zip(&sizes).map(|(t, m)| t / m).sum::<f64>()
        / sizes.iter().map(|m| 1.0 / m).sum::<f64>();
    let constants: Vec<f64> = totals
        .iter()
        .zip(&sizes)
        .map(|(t, m)| (t - lambda) / m)
        .collect();

    let mut objective = 0.0;
    let edges = game
        .edges()
        .iter()
        .zip(&sums)
        .zip(&constants)
        .map(|((e, s), &c)| {
            objective += s.as_slice().iter().map(|v| (c - v).powi(2)).sum::<f64>() / 2.0;
            Edge {
                from: e.from,
                to: e.to,
                forward: Matrix::from_fn(s.rows(), s.cols(), |i, j| {
                    e.forward.get(i, j) + (c - s.get(i, j)) / 2.0
                }),
                backward: Matrix::from_fn(s.cols(), s.rows(), |j, i| {
                    e.backward.get(j, i) + (c - s.get(i, j)) / 2.0
                }),
            }
        })
        .collect();
    let projected = NetworkGame::assemble(game.action_counts().to_vec(), edges);
    let delta_abs = mpd_bound_abs(game, &projected).expect("projection keeps structure");
    let delta_2norm = mpd_bound_2norm(game, &projected).expect("projection keeps structure");
    ProjectionResult {
        projected,
        constants,
        lambda,
        objective,
        delta_abs,
        delta_2norm,
    }
}

/// Largest violation of the optimality conditions of the projection.
///
/// Covers both constraint families, equal multipliers on the two entries of
/// each pair (`Â^{kl}_ij − A^{kl}_ij = Â^{lk}_ji − A^{lk}_ji`), and the
/// constant multiplier `Σ_ij μ_ij` being shared by all edges, with
/// `μ = 2 (Â − A)`. Structure mismatches give `+∞`.
pub fn kkt_residual(game: &NetworkGame, result: &ProjectionResult) -> f64 {
    let proj = &result.projected;
    if !game.same_structure(proj) || result.constants.len() != game.edges().len() {
        return f64::INFINITY;
    }
    let mut worst: f64 = result.constants.iter().sum::<f64>().abs();
    let mut mu_sums = Vec::with_capacity(game.edges().len());
    for (e, &c) in game.edges().iter().zip(&result.constants) {
        let (a, b) = (&e.forward, &e.backward);
        let ah = proj.matrix_between(e.from, e.to).expect("same structure");
        let bh = proj.matrix_between(e.to, e.from).expect("same structure");
        let mut mu_sum = 0.0;
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                worst = worst.max((ah.get(i, j) + bh.get(j, i) - c).abs());
                let df = ah.get(i, j) - a.get(i, j);
                let db = bh.get(j, i) - b.get(j, i);
                worst = worst.max((df - db).abs());
                mu_sum += df + db;
            }
        }
        mu_sums.push(mu_sum);
    }
    let mean = mu_sums.iter().sum::<f64>() / mu_sums.len() as f64;
    for s in mu_sums {
        worst = worst.max((s - mean).abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::is_zero_sum;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn single(a: Matrix, b: Matrix) -> NetworkGame {
        NetworkGame::new(
            vec![a.rows(), a.cols()],
            vec![Edge {
                from: 0,
                to: 1,
                forward: a,
                backward: b,
            }],
        )
        .unwrap()
    }

    #[test]
    fn identity_pair_projects_to_zero() {
        let i2 = m(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let r = nearest_nzsg(&single(i2.clone(), i2));
        assert_eq!(r.constants, vec![0.0]);
        assert!((r.objective - 4.0).abs() < 1e-12);
        for e in r.projected.edges() {
            assert!(e.forward.max_abs() < 1e-15 && e.backward.max_abs() < 1e-15);
        }
        assert!(is_zero_sum(&r.projected, 1e-8));
    }

    #[test]
    fn zero_sum_input_is_fixed() {
        let a = m(&[&[1.0, -1.0], &[-1.0, 1.0]]);
        let g = single(a.clone(), a.transpose().map(|v| -v));
        let r = nearest_nzsg(&g);
        assert_eq!(r.objective, 0.0);
        assert_eq!(r.projected, g);
        assert!(kkt_residual(&g, &r) < 1e-12);
        assert_eq!(r.delta_abs.value, 0.0);
    }

    #[test]
    fn corrupted_result_is_flagged() {
        let a = m(&[&[0.3, 2.0], &[-1.0, 0.5]]);
        let b = m(&[&[1.0, 0.0], &[4.0, -2.0]]);
        let g = single(a, b);
        let mut r = nearest_nzsg(&g);
        assert!(kkt_residual(&g, &r) < 1e-12);
        let e = &mut r.projected.edges_mut()[0];
        e.forward.set(0, 0, e.forward.get(0, 0) + 0.1);
        assert!(kkt_residual(&g, &r) >= 0.05);
    }

    #[test]
    fn certificate_fields() {
        let i2 = m(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let c = nearest_nzsg(&single(i2.clone(), i2)).certificate();
        let v: serde_json::Value = serde_json::to_value(&c).unwrap();
        for key in ["objective", "constants", "lambda", "delta_abs", "delta_2norm", "zero_sum_residual"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }
}
