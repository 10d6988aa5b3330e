use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::hashing::Digest256;

/// Rounds to 9 significant digits, the precision of every reported float.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Blocks found by any miner, the attacker included.
    pub blocks_mined: u64,
    pub active_height: u64,
    pub stale_blocks: u64,
    pub stale_rate: f64,
    /// Found blocks per miner, in configuration order (the attacker last).
    pub miner_blocks: Vec<u64>,
    pub miner_shares: Vec<f64>,
    /// Delay from a block being found to its first arrival at another node.
    pub mean_propagation_s: f64,
    pub p95_propagation_s: f64,
    /// Found time of the final tip divided by the number of blocks mined in the run.
    pub mean_block_interval_s: f64,
    pub attack_success_frequency: Option<f64>,
    /// Reorg count at honest nodes keyed by the number of blocks rolled back.
    pub reorg_depths: BTreeMap<usize, u64>,
    pub converged: bool,
    pub simulated_time_s: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockRecord {
    pub height: u64,
    pub hash: Digest256,
    pub miner: usize,
    pub found_time: f64,
    /// Off honest node 0's final chain.
    pub stale: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EventRecord {
    pub time: f64,
    /// found, tx, extended, side_chain, reorg, pending, rejected, known or publish.
    pub kind: &'static str,
    pub node: usize,
    pub hash: Digest256,
}

/// Everything one run produces.
#[derive(Clone, Debug)]
pub struct SimOutput {
    pub metrics: Metrics,
    pub blocks: Vec<BlockRecord>,
    pub events: Vec<EventRecord>,
}

impl SimOutput {
    pub fn metrics_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.metrics).expect("metrics serialize");
        s.push('\n');
        s
    }

    pub fn blocks_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["height", "hash", "miner", "found_time", "stale"]).unwrap();
        for b in &self.blocks {
            w.write_record([
                b.height.to_string(),
                b.hash.to_hex(),
                b.miner.to_string(),
                round_sig(b.found_time).to_string(),
                b.stale.to_string(),
            ])
            .unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).expect("ascii")
    }

    pub fn events_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["time", "kind", "node", "hash"]).unwrap();
        for e in &self.events {
            w.write_record([round_sig(e.time).to_string(), e.kind.to_string(), e.node.to_string(), e.hash.to_hex()])
                .unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).expect("ascii")
    }

    /// Writes metrics.json, blocks.csv and events.csv into `dir`, creating it if needed.
    pub fn write_to(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("metrics.json"), self.metrics_json())?;
        fs::write(dir.join("blocks.csv"), self.blocks_csv())?;
        fs::write(dir.join("events.csv"), self.events_csv())
    }
}
