mod common;

use approx::assert_abs_diff_eq;
use common::*;
use proptest::prelude::*;
use rand::Rng;

use nzsg::dynamics::{
    approximate_nash_gap, asymptotic_kl, diagnose, discrete_q_step, integrate, integrate_final, integrate_with,
    kl_divergence, kl_time_derivative, lyapunov_check, perturbed_payoff, perturbed_reward, qld_vector_field,
    qre_residual, qre_solve, qre_solve_with, trap_radius, trap_region, vector_field_norm, ExplorationRates,
    IntegrationConfig, QState, QreOptions, TrajectoryRecord,
};
use nzsg::game::{mpd_bound_abs, payoff, reward_vector, JointStrategy, MpdBound, MpdKind, NetworkGame};
use nzsg::harness::{conflict_preset, Topology};
use nzsg::Error;

fn rates(n: usize, t: f64) -> ExplorationRates {
    ExplorationRates::uniform(n, t).unwrap()
}

/// `x_ki (r^H_ki − ⟨x_k, r^H_k⟩)` assembled from the perturbed reward alone.
fn replicator_form(g: &NetworkGame, x: &JointStrategy, t: &ExplorationRates) -> Vec<Vec<f64>> {
    (0..g.num_agents())
        .map(|k| {
            let rh = perturbed_reward(g, x, k, t.get(k)).unwrap();
            let mean: f64 = x.agent(k).iter().zip(&rh).map(|(p, v)| p * v).sum();
            x.agent(k).iter().zip(&rh).map(|(p, v)| p * (v - mean)).collect()
        })
        .collect()
}

#[test]
fn field_equals_perturbed_replicator_form() {
    let mut r = rng(11);
    for _ in 0..1000 {
        let n = r.gen_range(2..5);
        let g = random_game(&mut r, n, 4, 3.0);
        let t = ExplorationRates::new((0..g.num_agents()).map(|_| r.gen_range(0.05..3.0)).collect()).unwrap();
        let x = JointStrategy::random_interior(g.action_counts(), &mut r);
        let a = qld_vector_field(&g, &x, &t).unwrap();
        let b = replicator_form(&g, &x, &t);
        for (va, vb) in a.iter().flatten().zip(b.iter().flatten()) {
            assert!((va - vb).abs() < 1e-12, "{va} vs {vb}");
        }
    }
}

#[test]
fn field_is_tangent_and_vanishes_on_symmetric_games() {
    let mut r = rng(12);
    let g = random_game(&mut r, 4, 4, 2.0);
    let t = rates(4, 0.6);
    let x = JointStrategy::random_interior(g.action_counts(), &mut r);
    for v in qld_vector_field(&g, &x, &t).unwrap() {
        assert!(v.iter().sum::<f64>().abs() < 1e-12);
    }
    let constant = NetworkGame::new(
        vec![3, 3],
        vec![nzsg::game::Edge { from: 0, to: 1, forward: nzsg::game::Matrix::from_fn(3, 3, |_, _| 1.0), backward: nzsg::game::Matrix::from_fn(3, 3, |_, _| -2.0) }],
    )
    .unwrap();
    let u = JointStrategy::uniform(&[3, 3]);
    assert!(vector_field_norm(&constant, &u, &rates(2, 1.0)).unwrap() < 1e-15);
}

#[test]
fn boundary_states_are_rejected() {
    let g = pennies();
    let x = JointStrategy::pure(&[2, 2], &[0, 1]);
    assert!(matches!(qld_vector_field(&g, &x, &rates(2, 1.0)), Err(Error::Boundary { .. })));
    assert!(matches!(perturbed_reward(&g, &x, 0, 1.0), Err(Error::Boundary { .. })));
    assert!(integrate(&g, &x, &rates(2, 1.0), 1.0, 0.01).is_err());
}

#[test]
fn perturbed_quantities_reduce_at_zero_temperature() {
    let mut r = rng(13);
    let g = random_game(&mut r, 3, 3, 1.0);
    let x = JointStrategy::random_interior(g.action_counts(), &mut r);
    for k in 0..3 {
        assert_eq!(perturbed_reward(&g, &x, k, 0.0).unwrap(), reward_vector(&g, &x, k).unwrap());
        assert_eq!(perturbed_payoff(&g, &x, k, 0.0).unwrap(), payoff(&g, &x, k).unwrap());
    }
    let u = JointStrategy::uniform(&[2, 2]);
    assert_abs_diff_eq!(
        perturbed_payoff(&pennies(), &u, 0, 0.7).unwrap(),
        0.7 * std::f64::consts::LN_2,
        epsilon = 1e-15
    );
}

#[test]
fn perturbed_payoff_is_inner_product_of_perturbed_reward_plus_temperature() {
    // ⟨x_k, r^H_k⟩ = u_k − T_k Σ x ln x − T_k = u^H_k − T_k.
    let mut r = rng(14);
    let g = random_game(&mut r, 3, 4, 2.0);
    let x = JointStrategy::random_interior(g.action_counts(), &mut r);
    for k in 0..3 {
        let rh = perturbed_reward(&g, &x, k, 0.4).unwrap();
        let inner: f64 = x.agent(k).iter().zip(&rh).map(|(p, v)| p * v).sum();
        assert_abs_diff_eq!(inner + 0.4, perturbed_payoff(&g, &x, k, 0.4).unwrap(), epsilon = 1e-12);
    }
}

#[test]
fn zero_game_relaxes_to_uniform() {
    let g = NetworkGame::new(
        vec![3, 2],
        vec![nzsg::game::Edge {
            from: 0,
            to: 1,
            forward: nzsg::game::Matrix::zeros(3, 2),
            backward: nzsg::game::Matrix::zeros(2, 3),
        }],
    )
    .unwrap();
    let mut r = rng(15);
    let x0 = JointStrategy::random_interior(&[3, 2], &mut r);
    let x = integrate_final(&g, &x0, &rates(2, 1.0), 50.0, 0.01).unwrap();
    assert!(x.sup_distance(&JointStrategy::uniform(&[3, 2])) < 1e-12);
}

#[test]
fn pennies_converges_to_its_qre() {
    let g = pennies();
    let t = rates(2, 0.75);
    let p = qre_solve(&g, &t, &JointStrategy::uniform(&[2, 2]), 0.5).unwrap();
    let x0 = JointStrategy::new(vec![vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
    let x = integrate_final(&g, &x0, &t, 100.0, 0.01).unwrap();
    assert!(kl_divergence(&p, &x).unwrap() < 1e-8);
}

#[test]
fn trajectories_stay_on_the_simplex() {
    let mut r = rng(16);
    let g = random_game(&mut r, 4, 4, 1.0);
    let x0 = JointStrategy::random_interior(g.action_counts(), &mut r);
    let traj = integrate(&g, &x0, &rates(4, 0.75), 50.0, 0.01).unwrap();
    for x in &traj.states {
        assert!(x.simplex_error() < 1e-10);
        assert!(x.is_interior(1e-12));
    }
    // Cold, strongly driven play leaves the floor but never hits zero.
    let g = random_game(&mut r, 4, 4, 4.0);
    let x0 = JointStrategy::random_interior(g.action_counts(), &mut r);
    let traj = integrate(&g, &x0, &rates(4, 0.2), 50.0, 0.01).unwrap();
    for x in &traj.states {
        assert!(x.simplex_error() < 1e-10);
        assert!(x.is_interior(f64::MIN_POSITIVE));
    }
}

#[test]
fn halving_the_step_barely_moves_the_final_state() {
    let mut r = rng(17);
    for seed in 0..3 {
        let g = zero_sum(3, 3, Topology::Chain, seed);
        let g = jitter(&g, &mut r, 0.2);
        let x0 = JointStrategy::random_interior(g.action_counts(), &mut r);
        let t = rates(3, 0.75);
        let a = integrate_final(&g, &x0, &t, 50.0, 0.01).unwrap();
        let b = integrate_final(&g, &x0, &t, 50.0, 0.005).unwrap();
        assert!(a.sup_distance(&b) < 1e-6, "{}", a.sup_distance(&b));
    }
}

#[test]
fn divergence_reports_last_valid_time() {
    let big = mat(&[&[1e308, -1e308], &[-1e308, 1e308]]);
    let g = NetworkGame::new(
        vec![2, 2],
        vec![nzsg::game::Edge { from: 0, to: 1, forward: big.clone(), backward: big }],
    )
    .unwrap();
    let x0 = JointStrategy::new(vec![vec![0.6, 0.4], vec![0.3, 0.7]]).unwrap();
    match integrate(&g, &x0, &rates(2, 1.0), 10.0, 0.01) {
        Err(Error::IntegrationDiverged { last_time }) => assert!(last_time < 10.0),
        other => panic!("expected divergence, got {:?}", other.map(|t| t.len())),
    }
}

#[test]
fn stride_keeps_first_and_last_samples() {
    let g = pennies();
    let x0 = JointStrategy::new(vec![vec![0.6, 0.4], vec![0.3, 0.7]]).unwrap();
    let full = integrate(&g, &x0, &rates(2, 1.0), 1.05, 0.01).unwrap();
    let cfg = IntegrationConfig::new(0.01, 1.05).with_stride(10);
    let thin = integrate_with(&g, &x0, &rates(2, 1.0), &cfg).unwrap();
    assert_eq!(thin.times.len(), 12);
    assert_eq!(thin.final_state(), full.final_state());
    assert_eq!(thin.states[3], full.states[30]);
}

#[test]
fn q_step_basics() {
    let g = pennies();
    let t = rates(2, 0.5);
    let x = JointStrategy::new(vec![vec![0.7, 0.3], vec![0.4, 0.6]]).unwrap();
    let s = QState::new(vec![vec![5.0, -1.0], vec![0.0, 2.0]], vec![1.0, 1.0]).unwrap();
    let (next, policy) = discrete_q_step(&g, &s, &t, &x).unwrap();
    for k in 0..2 {
        assert_eq!(next.q(k), reward_vector(&g, &x, k).unwrap().as_slice());
        let expect = softmax(&next.q(k).iter().map(|v| v / 0.5).collect::<Vec<_>>());
        for (a, b) in policy.agent(k).iter().zip(&expect) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
    }
    let flat = QState::new(vec![vec![3.0; 4], vec![3.0; 2]], vec![0.5, 0.5]).unwrap();
    assert_eq!(flat.policy(&rates(2, 0.1)).agent(0), &[0.25; 4]);
    let huge = QState::new(vec![vec![1e6, 0.0], vec![0.0, 0.0]], vec![0.5, 0.5]).unwrap();
    assert_eq!(huge.policy(&rates(2, 1e-3)).agent(0), &[1.0, 0.0]);
    assert!(QState::new(vec![vec![0.0]], vec![1.5]).is_err());
}

#[test]
fn q_iterates_track_the_flow() {
    // Dividing the Q-update by T gives z ← z + α (r/T − z), so one step
    // advances the flow by α / T time units.
    let a = mat(&[&[2.0, -1.0], &[-0.5, 1.0]]);
    let b = mat(&[&[-1.5, 0.5], &[1.0, -0.5]]);
    let g = NetworkGame::new(
        vec![2, 2],
        vec![nzsg::game::Edge { from: 0, to: 1, forward: a, backward: b }],
    )
    .unwrap();
    let t = rates(2, 0.5);
    let alpha = 1e-3;
    let x0 = JointStrategy::new(vec![vec![0.8, 0.2], vec![0.25, 0.75]]).unwrap();
    let mut state = QState::from_strategy(&x0, &t, alpha).unwrap();
    let mut x = x0.clone();
    let steps = 20_000;
    let dt = alpha / 0.5;
    let traj = integrate_with(&g, &x0, &t, &IntegrationConfig::new(dt, steps as f64 * dt).with_stride(1000)).unwrap();
    let mut worst: f64 = 0.0;
    for i in 1..=steps {
        let (s, p) = discrete_q_step(&g, &state, &t, &x).unwrap();
        state = s;
        x = p;
        if i % 1000 == 0 {
            worst = worst.max(x.sup_distance(&traj.states[i / 1000]));
        }
    }
    assert!(worst < 0.05, "{worst}");
}

#[test]
fn qre_examples() {
    let g = pennies();
    for t in [0.05, 0.75, 10.0] {
        let p = qre_solve(&g, &rates(2, t), &JointStrategy::new(vec![vec![0.9, 0.1], vec![0.3, 0.7]]).unwrap(), 0.5)
            .unwrap();
        assert!(p.sup_distance(&JointStrategy::uniform(&[2, 2])) < 1e-9);
    }
    let mut r = rng(18);
    let g = random_game(&mut r, 4, 4, 1.0);
    let p = qre_solve(&g, &rates(4, 1e3), &JointStrategy::uniform(g.action_counts()), 0.5).unwrap();
    assert!(p.sup_distance(&JointStrategy::uniform(g.action_counts())) < 1e-3);
}

#[test]
fn qre_matches_softmax_oracle_and_stops_the_flow() {
    let mut r = rng(19);
    for _ in 0..20 {
        let g = random_game(&mut r, 3, 3, 1.0);
        let t = rates(3, 0.75);
        let p = qre_solve_with(&g, &t, &JointStrategy::uniform(g.action_counts()), &QreOptions::default()).unwrap();
        assert!(p.residual < 1e-10);
        assert!(qre_residual(&g, &p.strategy, &t).unwrap() < 1e-10);
        for k in 0..3 {
            let rk: Vec<f64> = reward_vector(&g, &p.strategy, k).unwrap().iter().map(|v| v / 0.75).collect();
            for (a, b) in p.strategy.agent(k).iter().zip(softmax(&rk)) {
                assert!((a - b).abs() < 1e-10);
            }
        }
        assert!(vector_field_norm(&g, &p.strategy, &t).unwrap() <= 1e-8);
    }
}

#[test]
fn qre_rejects_bad_input() {
    let g = pennies();
    let u = JointStrategy::uniform(&[2, 2]);
    assert!(qre_solve(&g, &rates(2, 1.0), &u, 0.0).is_err());
    assert!(ExplorationRates::new(vec![1.0, -0.5]).is_err());
    assert!(qre_solve(&g, &rates(3, 1.0), &u, 0.5).is_err());
}

#[test]
fn conflict_qre_at_high_temperature_is_the_long_run_limit() {
    let g = conflict_preset();
    let t = rates(3, 2.5);
    let p = qre_solve(&g, &t, &JointStrategy::uniform(&[2, 2, 2]), 0.5).unwrap();
    let x0 = JointStrategy::new(vec![vec![0.9, 0.1], vec![0.2, 0.8], vec![0.6, 0.4]]).unwrap();
    let x = integrate_final(&g, &x0, &t, 1000.0, 0.01).unwrap();
    assert!(p.sup_distance(&x) < 1e-6, "{}", p.sup_distance(&x));
}

#[test]
fn kl_examples() {
    let y = JointStrategy::new(vec![vec![0.5, 0.5]]).unwrap();
    let x = JointStrategy::new(vec![vec![0.75, 0.25]]).unwrap();
    let direct = 0.5 * (0.5f64 / 0.75).ln() + 0.5 * (0.5f64 / 0.25).ln();
    assert_abs_diff_eq!(kl_divergence(&y, &x).unwrap(), direct, epsilon = 1e-15);
    assert_abs_diff_eq!(direct, 0.143841, epsilon = 1e-6);
    assert_eq!(kl_divergence(&x, &x).unwrap(), 0.0);
    let corner = JointStrategy::pure(&[2], &[0]);
    assert!(kl_divergence(&corner, &x).unwrap().is_finite());
    assert!(kl_divergence(&x, &corner).is_err());
}

#[test]
fn trap_radius_examples() {
    assert_eq!(trap_radius(3, 1.0, 0.75), 4.0);
    assert_eq!(trap_radius(3, 0.0, 0.75), 0.0);
    assert_abs_diff_eq!(trap_radius(5, 1.0, 0.75), 20.0 / 3.0, epsilon = 1e-15);
    let mut prev = f64::INFINITY;
    for t in [0.1, 0.5, 1.0, 2.0] {
        let v = trap_radius(4, 1.5, t);
        assert!(v <= prev);
        prev = v;
    }
    assert_eq!(trap_radius(4, 3.0, 0.5), 2.0 * trap_radius(4, 1.5, 0.5));
    assert_eq!(trap_radius(8, 1.5, 0.5), 2.0 * trap_radius(4, 1.5, 0.5));
}

#[test]
fn trap_region_refuses_non_zero_sum_reference() {
    let mut r = rng(20);
    let g = random_game(&mut r, 3, 2, 1.0);
    let d = MpdBound::new(0.1, MpdKind::AbsEntryBound);
    assert!(matches!(trap_region(&g, d, &rates(3, 1.0)), Err(Error::InvalidInput(_))));
}

#[test]
fn lyapunov_at_reference_and_on_exact_nzsg() {
    let g = zero_sum(4, 3, Topology::default(), 3);
    let t = rates(4, 0.75);
    let p = qre_solve(&g, &t, &JointStrategy::uniform(g.action_counts()), 0.5).unwrap();
    let c = lyapunov_check(&g, &p, &p, &t, 0.0).unwrap();
    assert!(!c.condition);
    assert!(c.derivative.abs() < 1e-9);
    let mut r = rng(21);
    for _ in 0..1000 {
        let x = JointStrategy::random_interior(g.action_counts(), &mut r);
        let c = lyapunov_check(&g, &x, &p, &t, 0.0).unwrap();
        assert!(c.condition);
        assert!(c.derivative < 0.0);
    }
}

#[test]
fn lyapunov_decrease_on_certified_pairs() {
    let mut r = rng(22);
    let mut tested = 0;
    for seed in 0..5 {
        let zs = zero_sum(3, 3, Topology::Complete, seed);
        let g = jitter(&zs, &mut r, 0.002);
        let delta = mpd_bound_abs(&g, &zs).unwrap();
        let t = rates(3, 0.75);
        let region = trap_region(&zs, delta, &t).unwrap();
        for _ in 0..1000 {
            let blocks = g
                .action_counts()
                .iter()
                .map(|&n| softmax(&(0..n).map(|_| r.gen_range(-4.0..4.0)).collect::<Vec<_>>()))
                .collect();
            let x = JointStrategy::new(blocks).unwrap();
            let c = lyapunov_check(&g, &x, &region.reference, &t, delta.value).unwrap();
            assert!(c.implication_holds(), "{c:?}");
            tested += usize::from(c.condition);
        }
    }
    assert!(tested > 100);
}

#[test]
fn kl_derivative_matches_recorded_slope() {
    let mut r = rng(23);
    let g = random_game(&mut r, 3, 3, 2.0);
    let t = rates(3, 0.5);
    let p = JointStrategy::random_interior(g.action_counts(), &mut r);
    let x0 = JointStrategy::random_interior(g.action_counts(), &mut r);
    let h = 0.002;
    let traj = integrate(&g, &x0, &t, 5.0, h).unwrap();
    let kl: Vec<f64> = traj.states.iter().map(|x| kl_oracle(&p, x)).collect();
    let mut checked = 0;
    for i in (1..traj.len() - 1).step_by(7) {
        let fd = (kl[i + 1] - kl[i - 1]) / (2.0 * h);
        let analytic = kl_time_derivative(&g, &traj.states[i], &p, &t).unwrap();
        if analytic.abs() > 1e-3 {
            assert!((fd - analytic).abs() <= 1e-4 * analytic.abs(), "t={} fd={fd} an={analytic}", traj.times[i]);
            checked += 1;
        }
    }
    assert!(checked > 100);
}

#[test]
fn asymptotic_kl_examples() {
    let g = zero_sum(3, 2, Topology::Chain, 4);
    let t = rates(3, 0.75);
    let region = trap_region(&g, MpdBound::new(0.0, MpdKind::Exact), &t).unwrap();
    let still = TrajectoryRecord::constant(&region.reference, vec![0.0, 1.0, 2.0]);
    let a = asymptotic_kl(&still, &region, 0.2).unwrap();
    assert_eq!(a.max_tail_kl, 0.0);
    assert!(a.within_bound);
    assert!(asymptotic_kl(&still, &region, 0.0).is_err());

    let mut r = rng(24);
    let x0 = JointStrategy::random_interior(g.action_counts(), &mut r);
    let mut traj = integrate_with(&g, &x0, &t, &IntegrationConfig::new(0.01, 500.0).with_stride(10)).unwrap();
    assert!(asymptotic_kl(&traj, &region, 0.2).unwrap().within_bound);
    diagnose(&mut traj, &region).unwrap();
    assert_eq!(traj.diagnostics.len(), traj.len());
    let d = traj.diagnostics[0];
    assert_abs_diff_eq!(d.kl_p_x, kl_oracle(&region.reference, &traj.states[0]), epsilon = 1e-12);
}

#[test]
fn qre_is_an_approximate_nash_equilibrium() {
    let mut r = rng(25);
    for i in 0..30 {
        let g = random_game(&mut r, 3, 4, 1.0);
        let t = [0.1, 0.75, 2.5][i % 3];
        let Ok(p) = qre_solve(&g, &rates(3, t), &JointStrategy::uniform(g.action_counts()), 0.5) else {
            continue;
        };
        let n_max = *g.action_counts().iter().max().unwrap() as f64;
        assert!(approximate_nash_gap(&g, &p).unwrap() <= t * n_max.ln() + 1e-12);
    }
    assert_eq!(approximate_nash_gap(&pennies(), &JointStrategy::uniform(&[2, 2])).unwrap(), 0.0);
}

#[test]
fn perturbation_integrand_respects_the_entropy_bound() {
    // |u^H_k − u_k| = T_k H(x_k) ≤ T_k ln n_k.
    let mut r = rng(26);
    let g = random_game(&mut r, 3, 4, 1.0);
    let t = ExplorationRates::new(vec![0.2, 1.1, 0.6]).unwrap();
    let n_max = *g.action_counts().iter().max().unwrap() as f64;
    for _ in 0..1000 {
        let x = JointStrategy::random_interior(g.action_counts(), &mut r);
        for k in 0..3 {
            let gap = perturbed_payoff(&g, &x, k, t.get(k)).unwrap() - payoff(&g, &x, k).unwrap();
            assert!(gap >= 0.0 && gap <= 1.1 * n_max.ln() + 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn tail_kl_stays_inside_the_trap(seed in any::<u64>(), eps in 0.0f64..0.3) {
        let zs = zero_sum(3, 2, Topology::Complete, seed);
        let mut r = rng(seed);
        let g = jitter(&zs, &mut r, eps);
        let delta = mpd_bound_abs(&g, &zs).unwrap();
        let t = rates(3, 0.75);
        let region = trap_region(&zs, delta, &t).unwrap();
        let x0 = JointStrategy::random_interior(g.action_counts(), &mut r);
        let traj = integrate_with(&g, &x0, &t, &IntegrationConfig::new(0.01, 200.0).with_stride(10)).unwrap();
        prop_assert!(asymptotic_kl(&traj, &region, 0.2).unwrap().within_bound);
    }

    #[test]
    fn kl_is_additive_and_nonnegative(seed in any::<u64>()) {
        let mut r = rng(seed);
        let counts = [2, 3, 4];
        let x = JointStrategy::random_interior(&counts, &mut r);
        let y = JointStrategy::random_interior(&counts, &mut r);
        let total = kl_divergence(&y, &x).unwrap();
        let parts: f64 = (0..3)
            .map(|k| {
                let yk = JointStrategy::new(vec![y.agent(k).to_vec()]).unwrap();
                let xk = JointStrategy::new(vec![x.agent(k).to_vec()]).unwrap();
                kl_divergence(&yk, &xk).unwrap()
            })
            .sum();
        prop_assert!(total >= 0.0);
        prop_assert!((total - parts).abs() < 1e-12);
        prop_assert!((total - kl_oracle(&y, &x)).abs() < 1e-12);
    }
}

#[test]
fn cold_repelling_qre_is_reached_by_continuation() {
    // Both the damped iteration and the flow cycle around this QRE at T = 0.1.
    let mut r = rng(9027);
    let n = r.gen_range(2..=4);
    let g = random_game(&mut r, n, 4, 1.0);
    let t = rates(n, 0.1);
    let sol = qre_solve_with(&g, &t, &JointStrategy::uniform(g.action_counts()), &QreOptions::default()).unwrap();
    assert_eq!(sol.method, nzsg::dynamics::QreMethod::Continuation);
    assert!(qre_residual(&g, &sol.strategy, &t).unwrap() < 1e-10);
}
