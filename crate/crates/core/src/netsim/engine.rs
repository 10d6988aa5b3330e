use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap};
use std::sync::Arc;

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rustc_hash::FxHashMap;

use super::config::{LatencyModel, SimConfig};
use super::metrics::{round_sig, BlockRecord, EventRecord, Metrics};
use super::streams::Streams;
use super::topology::build_topology;
use super::NetsimError;
use crate::consensus::{
    make_genesis_with, mine_block, Block, ChainEvent, ChainParams, ChainState, GenesisSpec, Target, GENESIS_MESSAGE,
    GENESIS_TIMESTAMP,
};
use crate::ecc::generate_private_key;
use crate::hashing::{hash160, sha256, Digest256};
use crate::ledger::{
    reward_at_height, txid, Amount, LockingScript, OutPoint, SigCache, Transaction, TxInput, TxOutput,
    COINBASE_MATURITY,
};

/// A race is abandoned once the public branch leads the private one by this many blocks.
pub const CATCH_UP_LIMIT: u64 = 200;

/// Blocks mined before an attack starts, so the attacker's genesis coin is spendable.
const ATTACK_PREFIX: u64 = COINBASE_MATURITY;

#[derive(Clone)]
enum EventKind {
    BlockFound { miner: usize },
    BlockArrival { node: usize, from: usize, block: Arc<Block>, hash: Digest256 },
    TxArrival { node: usize, tx: Arc<Transaction> },
}

#[derive(Clone)]
struct Queued {
    time: f64,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time.total_cmp(&other.time).then(self.seq.cmp(&other.seq))
    }
}

#[derive(Clone)]
struct Link {
    peer: usize,
    rng: Option<ChaCha8Rng>,
}

#[derive(Clone)]
struct Node {
    chain: ChainState,
    mempool: Vec<Transaction>,
    links: Vec<Link>,
}

#[derive(Clone)]
struct Miner {
    node: usize,
    /// Blocks per simulated second.
    rate: f64,
    payout: LockingScript,
    rng: Option<ChaCha8Rng>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    Racing,
    Published,
    GaveUp,
}

#[derive(Clone)]
struct Attack {
    node: usize,
    miner: usize,
    confirmations: u64,
    payout: LockingScript,
    /// The coin paid to the victim and, in the private branch, back to the attacker.
    coin: OutPoint,
    payment: Arc<Transaction>,
    conflict: Transaction,
    conflict_out: OutPoint,
    fork_height: u64,
    private_tip: Digest256,
    private: Vec<Arc<Block>>,
    public_height: u64,
    payment_height: Option<u64>,
    phase: Phase,
}

fn sample_delay(model: &LatencyModel, rng: &mut ChaCha8Rng) -> f64 {
    match *model {
        LatencyModel::Fixed { seconds } => seconds,
        LatencyModel::Exponential { mean_seconds } if mean_seconds > 0.0 => {
            Exp::new(1.0 / mean_seconds).expect("positive rate").sample(rng)
        }
        LatencyModel::Exponential { .. } => 0.0,
    }
}

fn miner_payout(index: usize) -> LockingScript {
    LockingScript::PayToPubKeyHash(hash160(format!("miner {index}").as_bytes()))
}

/// One simulated network. Build with [`Engine::new`], seed with [`Engine::start`],
/// then [`Engine::run`]. A built but unstarted engine can be cloned for repeated trials.
#[derive(Clone)]
pub(crate) struct Engine {
    config: Arc<SimConfig>,
    record: bool,
    time: f64,
    seq: u64,
    queue: BinaryHeap<Reverse<Queued>>,
    nodes: Vec<Node>,
    honest: usize,
    miners: Vec<Miner>,
    in_flight: usize,
    paused: bool,
    halted: bool,
    ever_paused: bool,
    max_found_height: u64,
    base_height: u64,
    mined_by: Vec<u64>,
    early_finds: Vec<usize>,
    blocks: Vec<BlockRecord>,
    found: FxHashMap<Digest256, usize>,
    events: Vec<EventRecord>,
    delays: Vec<f64>,
    reorg_depths: BTreeMap<usize, u64>,
    attack: Option<Attack>,
}

impl Engine {
    pub fn new(config: &SimConfig, record: bool) -> Result<Engine, NetsimError> {
        config.validate()?;
        let topology = build_topology(config.total_nodes(), config.peer_degree, config.rng_seed)?;
        let spacing = (config.block_interval_target_s.round() as u64).max(1);
        let params = ChainParams { pow_limit: Target::MAX, target_spacing_s: spacing, ..ChainParams::default() };
        let sim_target = Target::from_leading_zero_bits(1).expect("1 < 256");

        let attacker_key = generate_private_key(sha256(b"netsim attacker").as_bytes()).expect("nonzero");
        let attacker_payout = LockingScript::PayToPubKeyHash(hash160(
            &crate::ecc::derive_public_key(&attacker_key).expect("nonzero key").to_bytes(),
        ));
        let prefix = if config.attacker.is_some() { ATTACK_PREFIX } else { 0 };
        let spec = GenesisSpec {
            payout: if config.attacker.is_some() { attacker_payout.clone() } else { GenesisSpec::default().payout },
            timestamp: GENESIS_TIMESTAMP - spacing * (prefix + 1) * u64::from(prefix > 0),
            target: sim_target,
        };
        let genesis = make_genesis_with(GENESIS_MESSAGE.as_bytes(), &spec).expect("message fits");
        let genesis_coin = OutPoint::new(txid(&genesis.transactions[0]), 0);
        let sigs = Arc::new(SigCache::new());
        let mut chain = ChainState::new(genesis, params).expect("well-formed genesis").with_sig_cache(sigs);
        let filler = LockingScript::PayToPubKeyHash(hash160(b"prefix"));
        for i in 1..=prefix {
            let tip = chain.tip();
            let template = chain
                .assemble_block(&tip, vec![], Amount::ZERO, filler.clone(), spec.timestamp + spacing * i, 0)
                .expect("tip is connected");
            let block = mine_block(template, 0, u64::MAX).expect("easy target");
            chain.connect_block(block);
        }

        let nodes = topology
            .peers
            .iter()
            .map(|peers| Node {
                chain: chain.clone(),
                mempool: Vec::new(),
                links: peers.iter().map(|&peer| Link { peer, rng: None }).collect(),
            })
            .collect();

        let q = config.attacker.as_ref().map_or(0.0, |a| a.hashpower_fraction);
        let total = config.total_hashpower();
        let mut miners: Vec<Miner> = config
            .miners
            .iter()
            .enumerate()
            .map(|(i, m)| Miner {
                node: m.node,
                rate: (1.0 - q) * m.hashpower / total / config.block_interval_target_s,
                payout: miner_payout(i),
                rng: None,
            })
            .collect();

        let attack = config.attacker.as_ref().map(|a| {
            let node = config.node_count;
            let miner = miners.len();
            miners.push(Miner {
                node,
                rate: q / config.block_interval_target_s,
                payout: attacker_payout.clone(),
                rng: None,
            });
            let value = reward_at_height(0);
            let signed = |to: LockingScript| {
                let mut tx = Transaction::spend(vec![TxInput::unsigned(genesis_coin)], vec![TxOutput::new(value, to)]);
                tx.sign_inputs(&[&[attacker_key]]).expect("one signer per input");
                tx
            };
            let payment = signed(LockingScript::PayToPubKeyHash(hash160(b"merchant")));
            let conflict = signed(attacker_payout.clone());
            Attack {
                node,
                miner,
                confirmations: a.confirmations,
                payout: attacker_payout.clone(),
                coin: genesis_coin,
                payment: Arc::new(payment),
                conflict_out: OutPoint::new(txid(&conflict), 0),
                conflict,
                fork_height: prefix,
                private_tip: chain.tip(),
                private: Vec::new(),
                public_height: prefix,
                payment_height: None,
                phase: Phase::Racing,
            }
        });

        Ok(Engine {
            config: Arc::new(config.clone()),
            record,
            time: 0.0,
            seq: 0,
            queue: BinaryHeap::new(),
            nodes,
            honest: config.node_count,
            mined_by: vec![0; miners.len()],
            miners,
            in_flight: 0,
            paused: false,
            halted: false,
            ever_paused: false,
            max_found_height: prefix,
            base_height: prefix,
            early_finds: Vec::new(),
            blocks: Vec::new(),
            found: FxHashMap::default(),
            events: Vec::new(),
            delays: Vec::new(),
            reorg_depths: BTreeMap::new(),
            attack,
        })
    }

    pub fn set_recording(&mut self, record: bool) {
        self.record = record;
    }

    /// Seeds the mining and latency streams and queues the first events.
    pub fn start(&mut self, streams: Streams) {
        for (u, node) in self.nodes.iter_mut().enumerate() {
            for link in &mut node.links {
                link.rng = Some(streams.link(u, link.peer));
            }
        }
        for (i, miner) in self.miners.iter_mut().enumerate() {
            miner.rng = Some(streams.miner(i));
        }
        for i in 0..self.miners.len() {
            self.schedule_find(i);
        }
        if let Some(a) = &self.attack {
            let tx = Arc::clone(&a.payment);
            for node in 0..self.honest {
                self.push(0.0, EventKind::TxArrival { node, tx: Arc::clone(&tx) });
            }
        }
    }

    fn push(&mut self, time: f64, kind: EventKind) {
        self.queue.push(Reverse(Queued { time, seq: self.seq, kind }));
        self.seq += 1;
    }

    fn schedule_find(&mut self, miner: usize) {
        let m = &mut self.miners[miner];
        if m.rate <= 0.0 {
            return;
        }
        let rng = m.rng.as_mut().expect("engine started");
        let wait = Exp::new(m.rate).expect("positive rate").sample(rng);
        let time = self.time + wait;
        self.push(time, EventKind::BlockFound { miner });
    }

    fn log(&mut self, kind: &'static str, node: usize, hash: Digest256) {
        if self.record {
            self.events.push(EventRecord { time: self.time, kind, node, hash });
        }
    }

    pub fn run(&mut self) {
        while let Some(Reverse(event)) = self.queue.pop() {
            self.time = event.time;
            match event.kind {
                EventKind::BlockFound { miner } => self.on_found(miner),
                EventKind::BlockArrival { node, from, block, hash } => {
                    self.in_flight -= 1;
                    self.deliver(node, block, hash, Some(from), true);
                }
                EventKind::TxArrival { node, tx } => {
                    let id = txid(&tx);
                    let mempool = &mut self.nodes[node].mempool;
                    if !mempool.iter().any(|t| *t == *tx) {
                        mempool.push((*tx).clone());
                    }
                    self.log("tx", node, id);
                }
            }
            if self.settle() {
                break;
            }
        }
    }

    fn on_found(&mut self, miner: usize) {
        if self.halted {
            return;
        }
        self.schedule_find(miner);
        if self.paused {
            return;
        }
        let node = self.miners[miner].node;
        let payout = self.miners[miner].payout.clone();
        let timestamp = GENESIS_TIMESTAMP + self.time as u64;
        let chain = &self.nodes[node].chain;
        let private = self.attack.as_ref().filter(|a| a.miner == miner);
        let template = match private {
            Some(a) => {
                let txs = if a.private.is_empty() { vec![a.conflict.clone()] } else { Vec::new() };
                chain
                    .assemble_block(&a.private_tip, txs, Amount::ZERO, payout, timestamp, 0)
                    .expect("private tip is connected")
            }
            None => chain.build_template(&self.nodes[node].mempool, payout, timestamp),
        };
        let height = chain.height_of(&template.header.prev_hash).expect("parent is connected") + 1;
        let block = Arc::new(mine_block(template, 0, u64::MAX).expect("easy target"));
        let hash = block.hash();

        self.max_found_height = self.max_found_height.max(height);
        self.mined_by[miner] += 1;
        if !self.ever_paused {
            self.early_finds.push(miner);
        }
        if self.record {
            self.found.insert(hash, self.blocks.len());
            self.blocks.push(BlockRecord { height, hash, miner, found_time: self.time, stale: false });
        }
        self.log("found", node, hash);
        let relay = match &mut self.attack {
            Some(a) if a.miner == miner => {
                a.private_tip = hash;
                a.private.push(Arc::clone(&block));
                false
            }
            _ => true,
        };
        self.deliver(node, block, hash, None, relay);
    }

    fn relay(&mut self, node: usize, block: &Arc<Block>, hash: Digest256, from: Option<usize>) {
        let model = self.config.latency_model;
        let now = self.time;
        for link in &mut self.nodes[node].links {
            if Some(link.peer) == from {
                continue;
            }
            let delay = sample_delay(&model, link.rng.as_mut().expect("engine started"));
            let kind = EventKind::BlockArrival { node: link.peer, from: node, block: Arc::clone(block), hash };
            self.queue.push(Reverse(Queued { time: now + delay, seq: self.seq, kind }));
            self.seq += 1;
            self.in_flight += 1;
        }
    }

    fn deliver(&mut self, node: usize, block: Arc<Block>, hash: Digest256, from: Option<usize>, relay: bool) {
        if self.nodes[node].chain.is_known(&hash) {
            return;
        }
        if self.record && from.is_some() {
            if let Some(&i) = self.found.get(&hash) {
                self.delays.push(self.time - self.blocks[i].found_time);
            }
        }
        let events = self.nodes[node].chain.connect_block(Arc::clone(&block));
        let mut tip_changed = false;
        let mut accepted = true;
        for event in &events {
            let (kind, h) = match event {
                ChainEvent::ExtendedActiveChain { hash, .. } => {
                    tip_changed = true;
                    ("extended", *hash)
                }
                ChainEvent::CreatedSideChain { hash, .. } => ("side_chain", *hash),
                ChainEvent::TriggeredReorg { new_tip, rolled_back, .. } => {
                    tip_changed = true;
                    if node < self.honest {
                        *self.reorg_depths.entry(rolled_back.len()).or_default() += 1;
                    }
                    ("reorg", *new_tip)
                }
                ChainEvent::StoredPendingParent { hash, .. } => ("pending", *hash),
                ChainEvent::RejectedInvalid { hash: h, .. } => {
                    accepted &= *h != hash;
                    ("rejected", *h)
                }
                ChainEvent::AlreadyKnown { hash } => ("known", *hash),
            };
            self.log(kind, node, h);
            if kind != "rejected" && kind != "pending" && kind != "known" {
                self.observe_public(node, &h);
            }
        }
        if tip_changed && !self.nodes[node].mempool.is_empty() {
            let n = &mut self.nodes[node];
            let utxo = n.chain.utxo();
            n.mempool.retain(|tx| tx.inputs.iter().all(|i| utxo.contains(&i.outpoint)));
        }
        if relay && accepted {
            self.relay(node, &block, hash, from);
        }
    }

    /// Attacker bookkeeping: the public branch height and the payment's block, as
    /// seen by the attacker's node.
    fn observe_public(&mut self, node: usize, hash: &Digest256) {
        let Some(a) = &mut self.attack else { return };
        if node != a.node {
            return;
        }
        let chain = &self.nodes[node].chain;
        let (Some(block), Some(height)) = (chain.block(hash), chain.height_of(hash)) else { return };
        if block.transactions[0].outputs.first().map(|o| &o.script) == Some(&a.payout) {
            return;
        }
        a.public_height = a.public_height.max(height);
        if a.payment_height.is_none()
            && block.transactions[1..].iter().any(|tx| tx.inputs.iter().any(|i| i.outpoint == a.coin))
        {
            a.payment_height = Some(height);
        }
    }

    /// Checks the attack and stopping rules after an event. Returns true to stop.
    fn settle(&mut self) -> bool {
        let mut publish = false;
        if let Some(a) = &mut self.attack {
            if a.phase == Phase::Racing {
                let public_len = a.public_height - a.fork_height;
                let private_len = a.private.len() as u64;
                let confirmations = a.payment_height.map_or(0, |h| a.public_height + 1 - h);
                if confirmations >= a.confirmations && private_len > public_len {
                    a.phase = Phase::Published;
                    publish = true;
                    self.halted = true;
                } else if public_len >= private_len + CATCH_UP_LIMIT {
                    a.phase = Phase::GaveUp;
                    self.halted = true;
                }
            }
        } else if !self.paused && self.max_found_height >= self.config.duration_blocks {
            self.paused = true;
            self.ever_paused = true;
        }
        if publish {
            let a = self.attack.as_ref().expect("attack configured");
            let (node, blocks) = (a.node, a.private.clone());
            for block in &blocks {
                let hash = block.hash();
                self.log("publish", node, hash);
                self.relay(node, block, hash, None);
            }
        }
        if (self.paused || self.halted) && self.in_flight == 0 {
            if self.halted || self.converged() {
                return true;
            }
            self.paused = false;
        }
        false
    }

    /// Whether every honest node has the same active tip.
    pub fn converged(&self) -> bool {
        let tip = self.nodes[0].chain.tip();
        self.nodes[..self.honest].iter().all(|n| n.chain.tip() == tip)
    }

    /// The double spend stuck: honest node 0 holds the attacker's conflicting payment.
    pub fn attack_succeeded(&self) -> bool {
        self.attack.as_ref().is_some_and(|a| self.nodes[0].chain.utxo().contains(&a.conflict_out))
    }

    pub fn mined_by(&self) -> &[u64] {
        &self.mined_by
    }

    /// Miner of each block found before mining first paused, in order.
    pub fn early_finds(&self) -> &[usize] {
        &self.early_finds
    }

    #[allow(dead_code)]
    pub fn chain(&self, node: usize) -> &ChainState {
        &self.nodes[node].chain
    }

    /// Metrics against honest node 0's final chain, plus the block and event logs.
    pub fn finish(mut self) -> (Metrics, Vec<BlockRecord>, Vec<EventRecord>) {
        let reference = &self.nodes[0].chain;
        let mut stale = 0;
        for b in &mut self.blocks {
            b.stale = !reference.is_active(&b.hash);
            stale += u64::from(b.stale);
        }
        let mined: u64 = self.mined_by.iter().sum();
        let shares: Vec<f64> = self.mined_by.iter().map(|&n| if mined == 0 { 0.0 } else { n as f64 / mined as f64 }).collect();
        let height = reference.height();
        let tip_time = self.found.get(&reference.tip()).map(|&i| self.blocks[i].found_time);
        let interval = match tip_time {
            Some(t) if height > self.base_height => t / (height - self.base_height) as f64,
            _ => 0.0,
        };
        self.delays.sort_by(f64::total_cmp);
        let mean_delay = if self.delays.is_empty() { 0.0 } else { self.delays.iter().sum::<f64>() / self.delays.len() as f64 };
        let p95 = match self.delays.len() {
            0 => 0.0,
            n => self.delays[(n * 95).div_ceil(100) - 1],
        };
        let metrics = Metrics {
            blocks_mined: mined,
            active_height: height,
            stale_blocks: stale,
            stale_rate: round_sig(if mined == 0 { 0.0 } else { stale as f64 / mined as f64 }),
            miner_blocks: self.mined_by.clone(),
            miner_shares: shares.into_iter().map(round_sig).collect(),
            mean_propagation_s: round_sig(mean_delay),
            p95_propagation_s: round_sig(p95),
            mean_block_interval_s: round_sig(interval),
            attack_success_frequency: None,
            reorg_depths: self.reorg_depths.clone(),
            converged: self.converged(),
            simulated_time_s: round_sig(self.time),
        };
        (metrics, self.blocks, self.events)
    }
}
