//! Seeded simulation campaigns: one base zero-sum game, many perturbed
//! copies, one trajectory each, and summary statistics of the last iterates.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::generate::{epsilon_for_delta, generate_nzsg, perturb_with, GeneratorSpec};
use super::graph::Topology;
use super::io::{fmt_f64, write_bytes, write_game, write_json, write_trajectory_csv, RunManifest};
use super::noise::noisy_run;
use crate::dynamics::{
    asymptotic_kl, diagnose, integrate_with, trap_region, ExplorationRates, IntegrationConfig,
    TrapRegion,
};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::game::{JointStrategy, MpdBound, MpdKind};

fn two() -> usize {
    2
}
fn default_temperature() -> f64 {
    0.75
}
fn default_step() -> f64 {
    0.01
}
fn default_horizon() -> f64 {
    500.0
}
fn default_record_stride() -> usize {
    10
}
fn default_csv_stride() -> usize {
    100
}
fn default_tail() -> f64 {
    0.2
}
fn default_range() -> [f64; 2] {
    [-1.0, 1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSpec {
    pub agents: usize,
    #[serde(default = "two")]
    pub actions: usize,
    #[serde(default)]
    pub topology: Topology,
    pub seed: u64,
    pub runs: usize,
    /// Target entrywise certificate; ε is derived from it.
    #[serde(default)]
    pub delta: Option<f64>,
    /// Entry noise bound; ignored when `delta` is set.
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Redraw the noise every `noise_period` steps instead of perturbing once.
    #[serde(default)]
    pub noise_period: Option<usize>,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    /// Stride of the in-memory record used for the tail statistic.
    #[serde(default = "default_record_stride")]
    pub record_stride: usize,
    /// Stride (in records) of the rows written to each trajectory CSV.
    #[serde(default = "default_csv_stride")]
    pub csv_stride: usize,
    #[serde(default = "default_tail")]
    pub tail_fraction: f64,
    #[serde(default = "default_range")]
    pub entry_range: [f64; 2],
}

impl CampaignSpec {
    pub fn new(agents: usize, seed: u64, runs: usize) -> Self {
        serde_json::from_value(serde_json::json!({
            "agents": agents, "seed": seed, "runs": runs
        }))
        .expect("defaults deserialize")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunStats {
    pub max_tail_kl: f64,
    pub within_bound: bool,
    pub final_state: JointStrategy,
    pub game_sha256: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub index: usize,
    pub seed: u64,
    pub result: std::result::Result<RunStats, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentSummary {
    pub agent: usize,
    pub qre: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignReport {
    pub region: TrapRegion,
    pub epsilon: f64,
    pub runs: Vec<RunOutcome>,
    pub summary: Vec<AgentSummary>,
    pub failures: usize,
    pub violations: usize,
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn run_campaign(spec: &CampaignSpec, out: &Path, exec: Execution) -> Result<CampaignReport> {
    if spec.runs == 0 {
        return Err(Error::invalid("campaign needs at least one run"));
    }
    if !(spec.tail_fraction > 0.0 && spec.tail_fraction <= 1.0) {
        return Err(Error::invalid(format!("tail fraction {} not in (0, 1]", spec.tail_fraction)));
    }
    let config = IntegrationConfig::new(spec.step, spec.horizon).with_stride(spec.record_stride);
    config.validate()?;
    let mut gen = GeneratorSpec::nzsg(spec.agents, spec.actions, spec.topology, spec.seed);
    gen.entry_range = spec.entry_range;
    let base = generate_nzsg(&gen)?;
    let epsilon = match (spec.delta, spec.epsilon) {
        (Some(d), _) => epsilon_for_delta(&base, d),
        (None, Some(e)) => e,
        (None, None) => 0.0,
    };
    let rates = ExplorationRates::uniform(spec.agents, spec.temperature)?;
    let delta = MpdBound::new(
        super::generate::certificate_factor(&base) * epsilon,
        MpdKind::AbsEntryBound,
    );
    let region = trap_region(&base, delta, &rates)?;
    let base_sha = write_game(&out.join("base_game.json"), &base)?;

    let mut seeder = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x9e37_79b9_7f4a_7c15);
    let seeds: Vec<u64> = (0..spec.runs).map(|_| seeder.gen()).collect();
    let counts = base.action_counts().to_vec();

    let runs = exec::map_indexed(exec, spec.runs, |i| {
        let seed = seeds[i];
        let dir = out.join(format!("run_{i:04}"));
        let result = (|| -> Result<RunStats> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (game, mut traj) = match spec.noise_period {
                Some(period) => {
                    let x0 = JointStrategy::random_interior(&counts, &mut rng);
                    let run = noisy_run(&base, &rates, epsilon, period, &config, seed, &x0)?;
                    (base.clone(), run.trajectory)
                }
                None => {
                    let game = perturb_with(&base, epsilon, &mut rng)?.game;
                    let x0 = JointStrategy::random_interior(&counts, &mut rng);
                    let traj = integrate_with(&game, &x0, &rates, &config)?;
                    (game, traj)
                }
            };
            diagnose(&mut traj, &region)?;
            let tail = asymptotic_kl(&traj, &region, spec.tail_fraction)?;
            let game_sha256 = write_game(&dir.join("game.json"), &game)?;
            write_trajectory_csv(&dir.join("trajectory.csv"), &traj, spec.csv_stride)?;
            let manifest = RunManifest {
                seed: Some(seed),
                delta: Some(region.delta),
                trap_radius: Some(region.radius),
                reference_sha256: Some(base_sha.clone()),
                ..RunManifest::new("campaign", game_sha256.clone(), vec![spec.temperature], spec.step, spec.horizon)
            }
            .with_extra("epsilon", epsilon)
            .with_extra("noise_period", spec.noise_period)
            .with_extra("max_tail_kl", tail.max_tail_kl)
            .with_extra("within_bound", tail.within_bound);
            write_json(&dir.join("manifest.json"), &manifest)?;
            Ok(RunStats {
                max_tail_kl: tail.max_tail_kl,
                within_bound: tail.within_bound,
                final_state: traj.final_state().clone(),
                game_sha256,
            })
        })();
        RunOutcome {
            index: i,
            seed,
            result: result.map_err(|e| e.to_string()),
        }
    });

    let ok: Vec<&RunStats> = runs.iter().filter_map(|r| r.result.as_ref().ok()).collect();
    let failures = runs.len() - ok.len();
    let violations = ok.iter().filter(|s| !s.within_bound).count();
    let summary = (0..spec.agents)
        .map(|k| {
            let mut finals: Vec<f64> = ok.iter().map(|s| s.final_state.agent(k)[0]).collect();
            finals.sort_by(f64::total_cmp);
            let stat = |q| if finals.is_empty() { f64::NAN } else { quantile(&finals, q) };
            AgentSummary {
                agent: k,
                qre: region.reference.agent(k)[0],
                min: stat(0.0),
                q1: stat(0.25),
                median: stat(0.5),
                q3: stat(0.75),
                max: stat(1.0),
            }
        })
        .collect::<Vec<_>>();

    write_bytes(&out.join("summary.csv"), summary_csv(&summary)?.as_bytes())?;
    write_bytes(&out.join("runs.csv"), runs_csv(&runs)?.as_bytes())?;
    let manifest = serde_json::json!({
        "spec": spec,
        "base_game_sha256": base_sha,
        "epsilon": epsilon,
        "delta": region.delta,
        "trap_radius": region.radius,
        "qre": region.reference,
        "failures": failures,
        "violations": violations,
        "iteration_unit": super::io::ITERATION_UNIT,
    });
    write_json(&out.join("campaign.json"), &manifest)?;
    Ok(CampaignReport {
        region,
        epsilon,
        runs,
        summary,
        failures,
        violations,
    })
}

fn summary_csv(summary: &[AgentSummary]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["agent", "qre", "min", "q1", "median", "q3", "max"])?;
    for s in summary {
        let mut row = vec![s.agent.to_string()];
        row.extend([s.qre, s.min, s.q1, s.median, s.q3, s.max].map(fmt_f64));
        w.write_record(&row)?;
    }
    finish(w)
}

fn runs_csv(runs: &[RunOutcome]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["run", "seed", "status", "max_tail_kl", "within_bound", "error"])?;
    for r in runs {
        let (status, kl, within, err) = match &r.result {
            Ok(s) => ("ok", fmt_f64(s.max_tail_kl), s.within_bound.to_string(), String::new()),
            Err(e) => ("failed", String::new(), String::new(), e.clone()),
        };
        w.write_record([&r.index.to_string(), &r.seed.to_string(), status, &kl, &within, &err])?;
    }
    finish(w)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
