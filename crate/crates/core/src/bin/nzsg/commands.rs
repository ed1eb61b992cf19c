use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use nzsg::dynamics::{
    approximate_nash_gap, asymptotic_kl, diagnose, integrate_with, qre_solve_with, trap_region,
    ExplorationRates, IntegrationConfig, QreOptions, TrapRegion, DEFAULT_TAIL_FRACTION,
};
use nzsg::game::{
    mpd, mpd_bound_2norm, mpd_bound_abs, mpd_exact, zero_sum_residual, JointStrategy, MpdBound,
    MpdKind, NetworkGame,
};
use nzsg::harness::io::{
    fmt_f64, read_game, read_json, write_bytes, write_game, write_json, write_trajectory_csv,
    RunManifest,
};
use nzsg::harness::{
    conflict_network, conflict_preset, epsilon_for_delta, generate_nzsg, linspace,
    logit_embedding, noisy_run, perturb_game, random_conflict_spec, run_campaign, CampaignSpec,
    EmbeddingSpec, GeneratorKind, GeneratorSpec, Topology,
};
use nzsg::projection::nearest_nzsg;
use nzsg::{Error, Execution, Result};

use super::*;

pub(crate) fn run(command: Command) -> Result<()> {
    match command {
        Command::Generate(a) => generate(a),
        Command::Perturb(a) => perturb(a),
        Command::Project(a) => project(a),
        Command::Mpd(a) => mpd_cmd(a),
        Command::Qre(a) => qre(a),
        Command::Simulate(a) => simulate(a),
        Command::NoisySim(a) => noisy_sim(a),
        Command::Embed(a) => embed(a),
        Command::Campaign(a) => campaign(a),
    }
}

fn done(out: &Path, files: &[&str]) {
    for f in files {
        println!("{}", out.join(f).display());
    }
}

fn topology(a: &GenerateArgs) -> Topology {
    match a.topology {
        TopologyArg::Chain => Topology::Chain,
        TopologyArg::Complete => Topology::Complete,
        TopologyArg::Random => Topology::Random { edge_prob: a.edge_prob },
    }
}

fn generate(a: GenerateArgs) -> Result<()> {
    let out = &a.out.out;
    if a.range.len() != 2 {
        return Err(Error::InvalidInput("--range takes lo,hi".into()));
    }
    let (game, provenance) = match &a.spec {
        Some(path) => {
            let spec: GeneratorSpec = read_json(path)?;
            let game = match spec.kind {
                GeneratorKind::ConflictNetwork => {
                    let counts = spec.action_counts()?;
                    if counts.iter().any(|&n| n != counts[0]) {
                        return Err(Error::InvalidInput(
                            "conflict generator needs equal action counts".into(),
                        ));
                    }
                    let c = random_conflict_spec(spec.agents, counts[0], spec.topology, a.cost_max, spec.seed)?;
                    conflict_network(&c)?
                }
                GeneratorKind::Perturbation | GeneratorKind::NoiseSchedule => {
                    return Err(Error::InvalidInput(format!(
                        "{:?} specs need a base game; use `perturb` or `noisy-sim`",
                        spec.kind
                    )))
                }
                _ => generate_nzsg(&spec)?,
            };
            (game, json!({ "spec": spec }))
        }
        None => {
            let kind = match a.kind {
                GameKind::Nzsg => Some(GeneratorKind::NzsgRandom),
                GameKind::Chain => Some(GeneratorKind::Chain),
                GameKind::Complete => Some(GeneratorKind::CompleteGraph),
                _ => None,
            };
            match (kind, a.kind) {
                (Some(kind), _) => {
                    let mut spec = GeneratorSpec::nzsg(a.agents, a.actions, topology(&a), a.seed);
                    spec.kind = kind;
                    spec.entry_range = [a.range[0], a.range[1]];
                    (generate_nzsg(&spec)?, json!({ "spec": spec }))
                }
                (None, GameKind::ConflictPreset) => (conflict_preset(), json!({ "preset": "conflict" })),
                _ => {
                    let c = random_conflict_spec(a.agents, a.actions, topology(&a), a.cost_max, a.seed)?;
                    let game = conflict_network(&c)?;
                    (game, json!({ "conflict": c }))
                }
            }
        }
    };
    let sha = write_game(&out.join("game.json"), &game)?;
    write_json(
        &out.join("manifest.json"),
        &json!({
            "command": "generate",
            "game_sha256": sha,
            "zero_sum_residual": zero_sum_residual(&game),
            "source": provenance,
        }),
    )?;
    done(out, &["game.json", "manifest.json"]);
    Ok(())
}

fn epsilon_of(game: &NetworkGame, size: &NoiseSize) -> Result<f64> {
    let eps = match (size.epsilon, size.delta) {
        (Some(e), _) => e,
        (None, Some(d)) => {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(Error::InvalidInput(format!("δ must be ≥ 0, got {d}")));
            }
            epsilon_for_delta(game, d)
        }
        (None, None) => 0.0,
    };
    Ok(eps)
}

fn perturb(a: PerturbArgs) -> Result<()> {
    let out = &a.out.out;
    let game = read_game(&a.game)?;
    let eps = epsilon_of(&game, &a.size)?;
    let p = perturb_game(&game, eps, a.seed)?;
    let sha = write_game(&out.join("game.json"), &p.game)?;
    write_json(
        &out.join("certificate.json"),
        &json!({
            "epsilon": eps,
            "delta_abs": p.certificate.value,
            "kind": p.certificate.kind,
            "seed": a.seed,
            "game_sha256": sha,
            "source_sha256": file_sha(&a.game)?,
        }),
    )?;
    done(out, &["game.json", "certificate.json"]);
    Ok(())
}

fn file_sha(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(nzsg::harness::io::sha256_hex(&bytes))
}

fn project(a: ProjectArgs) -> Result<()> {
    let out = &a.out.out;
    let game = read_game(&a.game)?;
    let result = nearest_nzsg(&game);
    write_game(&out.join("projected.json"), &result.projected)?;
    write_json(&out.join("certificate.json"), &result.certificate())?;
    done(out, &["projected.json", "certificate.json"]);
    Ok(())
}

fn mpd_cmd(a: MpdArgs) -> Result<()> {
    let out = &a.out.out;
    let g1 = read_game(&a.game)?;
    let g2 = read_game(&a.other)?;
    let exact = match mpd_exact(&g1, &g2) {
        Ok(b) => Some(b.value),
        Err(Error::EnumerationTooLarge { .. }) => None,
        Err(e) => return Err(e),
    };
    write_json(
        &out.join("mpd.json"),
        &json!({
            "exact": exact,
            "abs_entry_bound": mpd_bound_abs(&g1, &g2)?.value,
            "two_norm_bound": mpd_bound_2norm(&g1, &g2)?.value,
        }),
    )?;
    done(out, &["mpd.json"]);
    Ok(())
}

fn qre(a: QreArgs) -> Result<()> {
    let out = &a.out.out;
    let game = read_game(&a.game)?;
    let rates = ExplorationRates::for_agents(&a.temp, game.num_agents())?;
    let opts = QreOptions {
        damping: a.damping,
        max_iter: a.max_iter,
        ..QreOptions::default()
    };
    let init = JointStrategy::uniform(game.action_counts());
    let sol = qre_solve_with(&game, &rates, &init, &opts)?;
    let max_ln_n = game.action_counts().iter().map(|&n| (n as f64).ln()).fold(0.0, f64::max);
    write_json(
        &out.join("qre.json"),
        &json!({
            "temperatures": rates,
            "strategy": sol.strategy,
            "residual": sol.residual,
            "method": sol.method,
            "iterations": sol.iterations,
            "nash_gap": approximate_nash_gap(&game, &sol.strategy)?,
            "nash_gap_bound": rates.max() * max_ln_n,
        }),
    )?;
    done(out, &["qre.json"]);
    Ok(())
}

fn initial_point(game: &NetworkGame, init: InitArg, seed: u64) -> JointStrategy {
    match init {
        InitArg::Uniform => JointStrategy::uniform(game.action_counts()),
        InitArg::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            JointStrategy::random_interior(game.action_counts(), &mut rng)
        }
    }
}

fn tail_extras(manifest: RunManifest, traj: &nzsg::dynamics::TrajectoryRecord, region: &TrapRegion) -> Result<RunManifest> {
    let tail = asymptotic_kl(traj, region, DEFAULT_TAIL_FRACTION)?;
    Ok(manifest
        .with_extra("tail_fraction", DEFAULT_TAIL_FRACTION)
        .with_extra("max_tail_kl", tail.max_tail_kl)
        .with_extra("within_bound", tail.within_bound))
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let out = &a.out.out;
    let game = read_game(&a.game)?;
    let rates = ExplorationRates::for_agents(&a.sim.temp, game.num_agents())?;
    let config = IntegrationConfig::new(a.sim.step, a.sim.horizon);
    let x0 = initial_point(&game, a.init, a.sim.seed);
    let mut traj = integrate_with(&game, &x0, &rates, &config)?;

    let mut manifest = RunManifest::new("simulate", file_sha(&a.game)?, rates.as_slice().to_vec(), a.sim.step, a.sim.horizon);
    manifest.seed = Some(a.sim.seed);
    let reference = match &a.reference {
        Some(path) => {
            manifest.reference_sha256 = Some(file_sha(path)?);
            Some(read_game(path)?)
        }
        None if zero_sum_residual(&game) <= nzsg::dynamics::TRAP_ZERO_SUM_TOL => Some(game.clone()),
        None => None,
    };
    if let Some(zs) = reference {
        let delta = mpd(&game, &zs)?;
        let region = trap_region(&zs, delta, &rates)?;
        diagnose(&mut traj, &region)?;
        manifest.delta = Some(delta);
        manifest.trap_radius = Some(region.radius);
        manifest = tail_extras(manifest, &traj, &region)?;
    }
    write_trajectory_csv(&out.join("trajectory.csv"), &traj, a.stride)?;
    write_json(&out.join("manifest.json"), &manifest.with_extra("init", format!("{:?}", a.init).to_lowercase()))?;
    done(out, &["trajectory.csv", "manifest.json"]);
    Ok(())
}

fn noisy_sim(a: NoisySimArgs) -> Result<()> {
    let out = &a.out.out;
    let game = read_game(&a.game)?;
    let rates = ExplorationRates::for_agents(&a.sim.temp, game.num_agents())?;
    let config = IntegrationConfig::new(a.sim.step, a.sim.horizon);
    let eps = epsilon_of(&game, &a.size)?;
    let x0 = initial_point(&game, a.init, a.sim.seed);
    let run = noisy_run(&game, &rates, eps, a.period, &config, a.sim.seed, &x0)?;
    let mut manifest = RunManifest::new("noisy-sim", file_sha(&a.game)?, rates.as_slice().to_vec(), a.sim.step, a.sim.horizon);
    manifest.seed = Some(a.sim.seed);
    manifest.delta = Some(run.region.delta);
    manifest.trap_radius = Some(run.region.radius);
    let manifest = tail_extras(manifest, &run.trajectory, &run.region)?
        .with_extra("epsilon", eps)
        .with_extra("noise_period", a.period)
        .with_extra("init", format!("{:?}", a.init).to_lowercase());
    write_trajectory_csv(&out.join("trajectory.csv"), &run.trajectory, a.stride)?;
    write_json(&out.join("manifest.json"), &manifest)?;
    done(out, &["trajectory.csv", "manifest.json"]);
    Ok(())
}

fn embed(a: EmbedArgs) -> Result<()> {
    let out = &a.out.out;
    let game = read_game(&a.game)?;
    let n = game.num_agents();
    let rates = ExplorationRates::for_agents(&a.temp, n)?;
    if a.grid.len() != 3 {
        return Err(Error::InvalidInput("--grid takes lo,hi,n".into()));
    }
    let steps = a.grid[2];
    if !(steps >= 1.0 && steps.fract() == 0.0) {
        return Err(Error::InvalidInput(format!("grid size must be a positive integer, got {steps}")));
    }
    let axis = linspace(a.grid[0], a.grid[1], steps as usize);
    let region = trap_region(&game, MpdBound::new(a.delta, MpdKind::AbsEntryBound), &rates)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut base = || -> Vec<f64> { (0..n).map(|_| 0.01 + 0.98 * rng.gen::<f64>()).collect() };
    let (u, v) = (base(), base());
    let spec = EmbeddingSpec {
        u,
        v,
        alphas: axis.clone(),
        betas: axis,
        reference: Some(region.reference.clone()),
    };
    let grid = logit_embedding(&spec)?;
    let kl = grid.kl.as_ref().expect("reference given");
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["alpha", "beta", "kl_p_z", "inside"])?;
    for (ia, alpha) in grid.alphas.iter().enumerate() {
        for (ib, beta) in grid.betas.iter().enumerate() {
            let d = kl[ia][ib];
            w.write_record([fmt_f64(*alpha), fmt_f64(*beta), fmt_f64(d), (d <= region.radius).to_string()])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?;
    write_bytes(&out.join("embedding.csv"), &bytes)?;
    write_json(
        &out.join("manifest.json"),
        &json!({
            "command": "embed",
            "game_sha256": file_sha(&a.game)?,
            "temperatures": rates,
            "delta": a.delta,
            "trap_radius": region.radius,
            "qre": region.reference,
            "u": spec.u,
            "v": spec.v,
            "seed": a.seed,
        }),
    )?;
    done(out, &["embedding.csv", "manifest.json"]);
    Ok(())
}

fn campaign(a: CampaignArgs) -> Result<()> {
    let out = &a.out.out;
    let spec: CampaignSpec = read_json(&a.spec)?;
    let exec = if a.sequential { Execution::Sequential } else { Execution::Parallel };
    let report = run_campaign(&spec, out, exec)?;
    println!(
        "runs={} failures={} violations={} radius={}",
        report.runs.len(),
        report.failures,
        report.violations,
        fmt_f64(report.region.radius)
    );
    done(out, &["summary.csv", "runs.csv", "campaign.json"]);
    Ok(())
}
