//! Experiment plumbing: seeded generators, perturbation and noise schedules,
//! conflict networks, the logit-plane embedding, campaigns and file output.

mod campaign;
mod conflict;
mod embed;
mod generate;
mod graph;
pub mod io;
mod noise;

pub use campaign::{
    quantile, run_campaign, AgentSummary, CampaignReport, CampaignSpec, RunOutcome, RunStats,
};
pub use conflict::{
    center_constants, conflict_network, conflict_preset, random_conflict_spec, ConflictEdge,
    ConflictSpec, COMPLEMENT_TOL,
};
pub use embed::{embed_point, linspace, logit_embedding, EmbeddingGrid, EmbeddingSpec};
pub use generate::{
    certificate_factor, epsilon_for_delta, generate_nzsg, perturb_game, GeneratorKind,
    GeneratorSpec, Perturbed,
};
pub use graph::{build_edges, is_connected, Topology};
pub use noise::{max_kl_after, noisy_run, tail_displacement, tail_spread, NoisyRun};
