//! Quantal Response Equilibrium solver.
//!
//! Damped fixed-point iteration `x ← (1 − λ) x + λ softmax(r(x) / T)` runs
//! first. If the residual makes no new low for `stall_window` sweeps the
//! solver switches to integrating the Q-Learning dynamics, whose rest points
//! are exactly the QRE. A Newton polish in logit coordinates runs when both
//! stall above tolerance. Last, when the QRE repels both iterations, Newton
//! follows the logit branch down from a high temperature, where the QRE is
//! near uniform, to the requested rates.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::field::{from_logits, softmax_into, to_logits, LogitFlow};
use super::integrate::LogitRk4;
use super::rates::ExplorationRates;
use crate::error::{Error, Result};
use crate::game::{JointStrategy, NetworkGame, EPS_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QreOptions {
    pub damping: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub stall_window: usize,
    pub ode_step: f64,
}

impl Default for QreOptions {
    fn default() -> Self {
        QreOptions {
            damping: 0.5,
            max_iter: 100_000,
            tol: 1e-10,
            stall_window: 100,
            ode_step: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QreMethod {
    FixedPoint,
    Ode,
    Newton,
    Continuation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QreSolution {
    pub strategy: JointStrategy,
    pub residual: f64,
    pub iterations: usize,
    pub method: QreMethod,
}

/// Writes the logit response `softmax(r_k(x_{-k}) / T_k)` of every agent.
fn logit_response(
    game: &NetworkGame,
    rates: &ExplorationRates,
    x: &[f64],
    offsets: &[usize],
    r: &mut [f64],
    out: &mut [f64],
) {
    game.rewards_flat(x, offsets, r);
    for (k, w) in offsets.windows(2).enumerate() {
        let t = rates.get(k);
        for v in &mut r[w[0]..w[1]] {
            *v /= t;
        }
        softmax_into(&r[w[0]..w[1]], &mut out[w[0]..w[1]]);
    }
}

fn sup_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// `max_{k,i} |x_ki − softmax(r_k(x_{-k}) / T_k)_i|`.
pub fn qre_residual(game: &NetworkGame, x: &JointStrategy, rates: &ExplorationRates) -> Result<f64> {
    game.check_strategy(x)?;
    rates.check_agents(game.num_agents())?;
    let n = x.as_flat().len();
    let (mut r, mut resp) = (vec![0.0; n], vec![0.0; n]);
    logit_response(game, rates, x.as_flat(), x.offsets(), &mut r, &mut resp);
    Ok(sup_gap(x.as_flat(), &resp))
}

/// Solves for a QRE starting from the interior point `init`.
pub fn qre_solve(
    game: &NetworkGame,
    rates: &ExplorationRates,
    init: &JointStrategy,
    damping: f64,
) -> Result<JointStrategy> {
    let opts = QreOptions {
        damping,
        ..QreOptions::default()
    };
    qre_solve_with(game, rates, init, &opts).map(|s| s.strategy)
}

pub fn qre_solve_with(
    game: &NetworkGame,
    rates: &ExplorationRates,
    init: &JointStrategy,
    opts: &QreOptions,
) -> Result<QreSolution> {
    game.check_strategy(init)?;
    rates.check_agents(game.num_agents())?;
    init.require_interior(EPS_FLOOR)?;
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(Error::invalid(format!(
            "damping must lie in (0, 1], got {}",
            opts.damping
        )));
    }
    let offsets = game.offsets();
    let n = *offsets.last().unwrap();
    let mut x = init.as_flat().to_vec();
    let (mut r, mut resp) = (vec![0.0; n], vec![0.0; n]);
    let mut iterations = 0;

    let mut best = f64::INFINITY;
    let mut best_x = x.clone();
    let mut since_best = 0;
    let done = |x: Vec<f64>, residual, iterations, method| QreSolution {
        strategy: JointStrategy::from_flat(offsets.clone(), x),
        residual,
        iterations,
        method,
    };

    // Damped fixed point.
    while iterations < opts.max_iter {
        logit_response(game, rates, &x, &offsets, &mut r, &mut resp);
        let res = sup_gap(&x, &resp);
        if res < opts.tol {
            return Ok(done(x, res, iterations, QreMethod::FixedPoint));
        }
        if res < best {
            best = res;
            best_x.copy_from_slice(&x);
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= opts.stall_window {
                break;
            }
        }
        for (xi, ri) in x.iter_mut().zip(&resp) {
            *xi = (1.0 - opts.damping) * *xi + opts.damping * ri;
        }
        iterations += 1;
    }

    // Q-Learning flow from the best fixed-point iterate.
    const BLOCK: usize = 100;
    let mut flow = LogitFlow::new(game, rates);
    let mut rk = LogitRk4::new(&JointStrategy::from_flat(offsets.clone(), best_x.clone()));
    since_best = 0;
    while iterations < opts.max_iter {
        for _ in 0..BLOCK {
            rk.step(&mut flow, opts.ode_step);
        }
        iterations += BLOCK;
        if !rk.is_finite() {
            break;
        }
        from_logits(&rk.z, &offsets, &mut x);
        logit_response(game, rates, &x, &offsets, &mut r, &mut resp);
        let res = sup_gap(&x, &resp);
        if res < opts.tol {
            return Ok(done(x, res, iterations, QreMethod::Ode));
        }
        if res < best {
            best = res;
            best_x.copy_from_slice(&x);
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= opts.stall_window {
                break;
            }
        }
    }

    // Newton polish.
    let start = JointStrategy::from_flat(offsets.clone(), best_x.clone());
    if let Some((xn, res, steps)) = newton_polish(game, rates, &start, opts.tol, 50) {
        iterations += steps;
        if res < opts.tol {
            return Ok(done(xn, res, iterations, QreMethod::Newton));
        }
        best = best.min(res);
    }

    // Temperature continuation.
    if let Some((xc, res, steps)) = continuation(game, rates, opts.tol) {
        iterations += steps;
        if res < opts.tol {
            return Ok(done(xc, res, iterations, QreMethod::Continuation));
        }
        best = best.min(res);
    }
    Err(Error::NoConvergence {
        iterations,
        residual: best,
    })
}

/// Initial temperature multiplier of the continuation.
const CONTINUATION_START: f64 = 1e4;

/// Smallest accepted ratio between consecutive temperature multipliers.
const CONTINUATION_MIN_RATIO: f64 = 1.0 + 1e-6;

/// Newton solves along `s T` for multipliers `s` shrinking from
/// [`CONTINUATION_START`] to one, each warm-started at the previous solution.
/// The ratio between multipliers doubles after a success and is square-rooted
/// after a failure.
fn continuation(
    game: &NetworkGame,
    rates: &ExplorationRates,
    tol: f64,
) -> Option<(Vec<f64>, f64, usize)> {
    let offsets = game.offsets();
    let scaled = |s: f64| ExplorationRates::new(rates.as_slice().iter().map(|t| t * s).collect()).ok();
    let mut x = JointStrategy::uniform(game.action_counts());
    let mut s = CONTINUATION_START;
    let (xs, res, mut steps) = newton_polish(game, &scaled(s)?, &x, tol, 50)?;
    if res >= tol {
        return None;
    }
    x = JointStrategy::from_flat(offsets.clone(), xs);
    let mut ratio: f64 = 2.0;
    loop {
        let next = (s / ratio).max(1.0);
        match newton_polish(game, &scaled(next)?, &x, tol, 50) {
            Some((xs, res, k)) if res < tol => {
                steps += k;
                x = JointStrategy::from_flat(offsets.clone(), xs);
                s = next;
                if s == 1.0 {
                    return Some((x.as_flat().to_vec(), res, steps));
                }
                ratio = (ratio * ratio).min(2.0);
            }
            other => {
                steps += other.map_or(1, |o| o.2);
                ratio = ratio.sqrt();
                if ratio < CONTINUATION_MIN_RATIO {
                    return None;
                }
            }
        }
    }
}

/// Newton's method on `G(z) = z − center(r(softmax(z)) / T)`.
fn newton_polish(
    game: &NetworkGame,
    rates: &ExplorationRates,
    start: &JointStrategy,
    tol: f64,
    max_steps: usize,
) -> Option<(Vec<f64>, f64, usize)> {
    if !start.is_interior(f64::MIN_POSITIVE) {
        return None;
    }
    let offsets = game.offsets();
    let n = *offsets.last().unwrap();
    let mut z = to_logits(start);
    let mut x = vec![0.0; n];
    let (mut r, mut resp) = (vec![0.0; n], vec![0.0; n]);
    let residual_of = |z: &[f64], x: &mut [f64], r: &mut [f64], resp: &mut [f64]| {
        from_logits(z, &offsets, x);
        logit_response(game, rates, x, &offsets, r, resp);
        sup_gap(x, resp)
    };
    let mut res = residual_of(&z, &mut x, &mut r, &mut resp);
    let mut steps = 0;
    while steps < max_steps && res >= tol {
        steps += 1;
        from_logits(&z, &offsets, &mut x);
        let g = newton_residual(game, rates, &z, &x, &offsets);
        let jac = newton_jacobian(game, rates, &x, &offsets);
        let delta = jac.lu().solve(&(-DVector::from_vec(g)))?;
        let mut scale = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let trial: Vec<f64> = z.iter().zip(delta.iter()).map(|(a, d)| a + scale * d).collect();
            let trial_res = residual_of(&trial, &mut x, &mut r, &mut resp);
            if trial_res.is_finite() && trial_res < res {
                z = trial;
                res = trial_res;
                improved = true;
                break;
            }
            scale *= 0.5;
        }
        if !improved {
            break;
        }
    }
    from_logits(&z, &offsets, &mut x);
    Some((x, res, steps))
}

fn newton_residual(
    game: &NetworkGame,
    rates: &ExplorationRates,
    z: &[f64],
    x: &[f64],
    offsets: &[usize],
) -> Vec<f64> {
    let mut r = vec![0.0; x.len()];
    game.rewards_flat(x, offsets, &mut r);
    let mut g = vec![0.0; x.len()];
    for (k, w) in offsets.windows(2).enumerate() {
        let t = rates.get(k);
        let mean = r[w[0]..w[1]].iter().sum::<f64>() / (w[1] - w[0]) as f64;
        for i in w[0]..w[1] {
            g[i] = z[i] - (r[i] - mean) / t;
        }
    }
    g
}

/// `J = I − C T⁻¹ R S` with `R` the block reward Jacobian, `S` the softmax
/// Jacobians and `C` per-agent centering.
fn newton_jacobian(
    game: &NetworkGame,
    rates: &ExplorationRates,
    x: &[f64],
    offsets: &[usize],
) -> DMatrix<f64> {
    let n = x.len();
    let mut jac = DMatrix::<f64>::identity(n, n);
    for k in 0..game.num_agents() {
        let (ka, kb) = (offsets[k], offsets[k + 1]);
        let nk = kb - ka;
        let t = rates.get(k);
        for inc in game.incidence(k) {
            let l = inc.neighbor;
            let (la, lb) = (offsets[l], offsets[l + 1]);
            let a = game.payoff_matrix(inc);
            let xl = &x[la..lb];
            // (A S_l)_{ij} = A_ij x_lj − (A x_l)_i x_lj
            let mut block = vec![0.0; nk * (lb - la)];
            for i in 0..nk {
                let ax: f64 = a.row(i).iter().zip(xl).map(|(p, q)| p * q).sum();
                for j in 0..(lb - la) {
                    block[i * (lb - la) + j] = (a.get(i, j) - ax) * xl[j];
                }
            }
            for j in 0..(lb - la) {
                let col_mean = (0..nk).map(|i| block[i * (lb - la) + j]).sum::<f64>() / nk as f64;
                for i in 0..nk {
                    jac[(ka + i, la + j)] -= (block[i * (lb - la) + j] - col_mean) / t;
                }
            }
        }
    }
    jac
}
