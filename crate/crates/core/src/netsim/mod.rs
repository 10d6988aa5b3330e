//! Discrete-event simulation of miners and block relay over a random peer graph.
//!
//! Each miner finds blocks as a Poisson process whose rate is its hashpower share
//! divided by the target interval. Blocks flood the graph with per-link sampled
//! delays and every node runs the full consensus rules on arrival. An optional
//! attacker node races a private branch to reverse a payment.

mod config;
mod engine;
mod metrics;
mod streams;
mod topology;


use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

pub use config::{AttackConfig, AttackMode, LatencyModel, MinerConfig, SimConfig};
pub use engine::CATCH_UP_LIMIT;
pub use metrics::{round_sig, BlockRecord, EventRecord, Metrics, SimOutput};
pub use streams::Streams;
pub use topology::{build_topology, Topology, MAX_TOPOLOGY_ATTEMPTS};

use engine::Engine;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetsimError {
    #[error("scenario line {line} column {column}: {message}")]
    BadScenario { line: usize, column: usize, message: String },
    #[error("{field}: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error("attacker hashpower fraction {0} outside [0, 1)")]
    InvalidFraction(f64),
    #[error("no connected peer graph after {attempts} attempts")]
    CannotConnect { attempts: u64 },
}

/// Runs the scenario. Without an attacker this mines until `duration_blocks`
/// blocks are on the chain and every honest node agrees on the tip. With one,
/// it runs `trials` independent races; the logs and metrics describe the first
/// and `attack_success_frequency` covers all of them.
pub fn run_simulation(config: &SimConfig) -> Result<SimOutput, NetsimError> {
    let prepared = Engine::new(config, false)?;
    let streams = Streams::new(config.rng_seed);
    let mut first = prepared.clone();
    first.set_recording(true);
    first.start(streams);
    first.run();
    let mut successes = u64::from(first.attack_succeeded());
    let (mut metrics, blocks, events) = first.finish();
    if let Some(attack) = &config.attacker {
        for t in 1..attack.trials {
            successes += u64::from(run_trial(&prepared, streams.trial(t)));
        }
        metrics.attack_success_frequency = Some(round_sig(successes as f64 / attack.trials as f64));
    }
    Ok(SimOutput { metrics, blocks, events })
}

fn run_trial(prepared: &Engine, streams: Streams) -> bool {
    let mut engine = prepared.clone();
    engine.start(streams);
    engine.run();
    engine.attack_succeeded()
}

/// Reads and validates a JSON scenario.
pub fn load_scenario(path: &std::path::Path) -> Result<SimConfig, NetsimError> {
    let text = std::fs::read_to_string(path).map_err(|e| NetsimError::BadScenario {
        line: 0,
        column: 0,
        message: format!("{}: {e}", path.display()),
    })?;
    SimConfig::from_json(&text)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShareTable {
    pub blocks: Vec<u64>,
    pub shares: Vec<f64>,
    /// Hashpower proportions.
    pub expected: Vec<f64>,
    pub total: u64,
    /// Over miners with nonzero hashpower; 0 with a single such miner.
    pub chi_square: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

/// Found blocks per miner pooled over `trials` runs of `config` (trial t uses
/// the t-th derived stream set), with a chi-square test against hashpower.
pub fn miner_share_experiment(config: &SimConfig, trials: u64) -> Result<ShareTable, NetsimError> {
    if config.attacker.is_some() {
        return Err(NetsimError::InvalidConfig { field: "attacker", reason: "share runs are honest-only".into() });
    }
    let prepared = Engine::new(config, false)?;
    let streams = Streams::new(config.rng_seed);
    let mut blocks = vec![0u64; config.miners.len()];
    for t in 0..trials.max(1) {
        let mut engine = prepared.clone();
        engine.start(streams.trial(t));
        engine.run();
        for (b, n) in blocks.iter_mut().zip(engine.mined_by()) {
            *b += n;
        }
    }
    let total: u64 = blocks.iter().sum();
    let power = config.total_hashpower();
    let expected: Vec<f64> = config.miners.iter().map(|m| m.hashpower / power).collect();
    let shares = blocks.iter().map(|&b| b as f64 / total as f64).collect();
    let mut chi_square = 0.0;
    let mut cells = 0;
    for (&b, &p) in blocks.iter().zip(&expected) {
        if p > 0.0 {
            let e = p * total as f64;
            chi_square += (b as f64 - e).powi(2) / e;
            cells += 1;
        }
    }
    let degrees_of_freedom = cells - 1;
    let p_value = if degrees_of_freedom == 0 {
        1.0
    } else {
        ChiSquared::new(degrees_of_freedom as f64).expect("positive dof").sf(chi_square)
    };
    Ok(ShareTable { blocks, shares, expected, total, chi_square, degrees_of_freedom, p_value })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SybilReport {
    pub extra_identities: usize,
    /// Finds compared: the shorter of the two runs' pre-pause find sequences.
    pub compared_finds: usize,
    pub baseline_blocks: Vec<u64>,
    pub with_sybils_blocks: Vec<u64>,
    pub baseline_shares: Vec<f64>,
    pub with_sybils_shares: Vec<f64>,
    /// Blocks found by the added identities.
    pub sybil_blocks: u64,
    pub identical: bool,
}

/// Runs `base` and a copy with `extra_identities` zero-hashpower nodes appended,
/// on the same mining streams, and compares each real miner's block count over
/// the finds both runs made before reaching their duration.
pub fn sybil_experiment(base: &SimConfig, extra_identities: usize) -> Result<SybilReport, NetsimError> {
    let mut sybil = base.clone();
    sybil.node_count += extra_identities;
    sybil
        .miners
        .extend((0..extra_identities).map(|i| MinerConfig { node: base.node_count + i, hashpower: 0.0 }));
    let run = |config: &SimConfig| -> Result<Engine, NetsimError> {
        let mut engine = Engine::new(config, false)?;
        engine.start(Streams::new(config.rng_seed));
        engine.run();
        Ok(engine)
    };
    let a = run(base)?;
    let b = run(&sybil)?;
    let n = a.early_finds().len().min(b.early_finds().len());
    let count = |finds: &[usize], miners: usize| {
        let mut c = vec![0u64; miners];
        for &m in &finds[..n] {
            c[m] += 1;
        }
        c
    };
    let baseline_blocks = count(a.early_finds(), base.miners.len());
    let all = count(b.early_finds(), sybil.miners.len());
    let with_sybils_blocks = all[..base.miners.len()].to_vec();
    let share = |c: &[u64]| c.iter().map(|&x| if n == 0 { 0.0 } else { x as f64 / n as f64 }).collect();
    Ok(SybilReport {
        extra_identities,
        compared_finds: n,
        baseline_shares: share(&baseline_blocks),
        with_sybils_shares: share(&with_sybils_blocks),
        sybil_blocks: all[base.miners.len()..].iter().sum(),
        identical: baseline_blocks == with_sybils_blocks,
        baseline_blocks,
        with_sybils_blocks,
    })
}

/// Scenario used by [`double_spend_experiment`]: one honest node holding all
/// honest hashpower, the attacker node, and instant links.
pub fn double_spend_config(q: f64, z: u64, trials: u64, seed: u64) -> SimConfig {
    SimConfig {
        node_count: 1,
        peer_degree: 1,
        latency_model: LatencyModel::Fixed { seconds: 0.0 },
        miners: vec![MinerConfig { node: 0, hashpower: 1.0 }],
        block_interval_target_s: 600.0,
        duration_blocks: 0,
        rng_seed: seed,
        attacker: Some(AttackConfig {
            hashpower_fraction: q,
            confirmations: z,
            mode: AttackMode::DoubleSpendWithholding,
            trials,
        }),
    }
}

/// Number of races (out of `config.attacker.trials`) in which the payment was reversed.
pub fn attack_successes(config: &SimConfig) -> Result<u64, NetsimError> {
    let Some(attack) = &config.attacker else {
        return Err(NetsimError::InvalidConfig { field: "attacker", reason: "missing".into() });
    };
    let prepared = Engine::new(config, false)?;
    let streams = Streams::new(config.rng_seed);
    Ok((0..attack.trials).filter(|&t| run_trial(&prepared, streams.trial(t))).count() as u64)
}

/// Fraction of `trials` withholding races won by an attacker with hashpower share
/// `q` against a victim waiting for `z` confirmations.
pub fn double_spend_experiment(q: f64, z: u64, trials: u64, seed: u64) -> Result<f64, NetsimError> {
    if !(0.0..1.0).contains(&q) {
        return Err(NetsimError::InvalidFraction(q));
    }
    let trials = trials.max(1);
    Ok(attack_successes(&double_spend_config(q, z, trials, seed))? as f64 / trials as f64)
}
