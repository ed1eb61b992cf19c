//! Output files: trajectory CSV, JSON documents and run manifests.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::TrajectoryRecord;
use crate::error::{Error, Result};
use crate::game::{MpdBound, NetworkGame};

pub const TRAJECTORY_HEADER: [&str; 6] = ["t", "agent", "action", "prob", "kl_p_x", "kl_x_p"];

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Shortest round-trip decimal, switching to exponent form for very small or
/// very large magnitudes.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_bytes(path, to_json_string(value)?.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&read_text(path)?)?)
}

pub fn read_game(path: &Path) -> Result<NetworkGame> {
    NetworkGame::from_json(&read_text(path)?)
}

/// Writes the game file and returns the SHA-256 of its bytes.
pub fn write_game(path: &Path, game: &NetworkGame) -> Result<String> {
    let mut text = game.to_json();
    text.push('\n');
    write_bytes(path, text.as_bytes())?;
    Ok(sha256_hex(text.as_bytes()))
}

/// One row per (time, agent, action); KL columns stay empty without
/// diagnostics. Only every `stride`-th record (and the last) is written.
pub fn write_trajectory<W: Write>(out: W, traj: &TrajectoryRecord, stride: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER)?;
    let stride = stride.max(1);
    let last = traj.len().saturating_sub(1);
    for (s, (t, x)) in traj.times.iter().zip(&traj.states).enumerate() {
        if s % stride != 0 && s != last {
            continue;
        }
        let (kl_px, kl_xp) = match traj.diagnostics.get(s) {
            Some(d) => (fmt_f64(d.kl_p_x), fmt_f64(d.kl_x_p)),
            None => (String::new(), String::new()),
        };
        let t = fmt_f64(*t);
        for (k, block) in x.agents().enumerate() {
            for (i, p) in block.iter().enumerate() {
                w.write_record([
                    t.as_str(),
                    &k.to_string(),
                    &i.to_string(),
                    &fmt_f64(*p),
                    &kl_px,
                    &kl_xp,
                ])?;
            }
        }
    }
    w.flush().map_err(|e| Error::io("<trajectory>", e))?;
    Ok(())
}

pub fn write_trajectory_csv(path: &Path, traj: &TrajectoryRecord, stride: usize) -> Result<()> {
    let mut buf = Vec::new();
    write_trajectory(&mut buf, traj, stride)?;
    write_bytes(path, &buf)
}

/// Everything needed to re-run a simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub game_sha256: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_sha256: Option<String>,
    pub temperatures: Vec<f64>,
    pub step: f64,
    pub horizon: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<MpdBound>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trap_radius: Option<f64>,
    /// How a discrete "iteration" maps onto the integrator.
    pub iteration_unit: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, serde_json::Value>,
}

pub const ITERATION_UNIT: &str = "one iteration is one fixed RK4 step in logit coordinates";

impl RunManifest {
    pub fn new(command: &str, game_sha256: String, temperatures: Vec<f64>, step: f64, horizon: f64) -> Self {
        RunManifest {
            command: command.to_string(),
            game_sha256,
            reference_sha256: None,
            temperatures,
            step,
            horizon,
            seed: None,
            delta: None,
            trap_radius: None,
            iteration_unit: ITERATION_UNIT.to_string(),
            extra: BTreeMap::new(),
        }
    }

    pub fn with_extra(mut self, key: &str, value: impl Serialize) -> Self {
        let v = serde_json::to_value(value).expect("manifest values serialize");
        self.extra.insert(key.to_string(), v);
        self
    }
}
