use crate::error::Result;
use crate::game::{JointStrategy, NetworkGame};

/// Best-response gap `max_{k,i} r_ki(x_{-k}) − ⟨x_k, r_k(x)⟩`.
///
/// Zero exactly at Nash equilibria; `x` is an ε-approximate equilibrium for
/// every ε at least this value.
pub fn approximate_nash_gap(game: &NetworkGame, x: &JointStrategy) -> Result<f64> {
    game.check_strategy(x)?;
    let mut r = Vec::new();
    let mut gap = f64::NEG_INFINITY;
    for k in 0..game.num_agents() {
        let xk = x.agent(k);
        r.resize(xk.len(), 0.0);
        game.reward_into(x.as_flat(), x.offsets(), k, &mut r);
        let value: f64 = xk.iter().zip(&r).map(|(p, v)| p * v).sum();
        let best = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        gap = gap.max(best - value);
    }
    Ok(gap.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{Edge, Matrix};

    #[test]
    fn pennies_uniform_is_nash() {
        let a = Matrix::from_rows(vec![vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        let g = NetworkGame::new(
            vec![2, 2],
            vec![Edge {
                from: 0,
                to: 1,
                forward: a.clone(),
                backward: a.transpose().map(|v| -v),
            }],
        )
        .unwrap();
        assert_eq!(approximate_nash_gap(&g, &JointStrategy::uniform(&[2, 2])).unwrap(), 0.0);
        let pure = JointStrategy::pure(&[2, 2], &[0, 0]);
        // Agent 1 gains 2 by switching.
        assert_eq!(approximate_nash_gap(&g, &pure).unwrap(), 2.0);
    }
}
