use std::collections::VecDeque;
use std::sync::Arc;

use rustc_hash::{FxHashMap, FxHashSet};

use super::block::{check_pow, coinbase_transaction, committed_height, Block, BlockHeader};
use super::target::{retarget, ChainParams, Target};
use super::{BlockError, ConsensusError};
use crate::hashing::{merkle_root, Digest256};
use crate::ledger::{
    reward_at_height, tx_fee, txid, validate_transaction_with, Amount, BlockUndo, LedgerError, LockingScript,
    SigCache, Transaction, UtxoOverlay, UtxoSet,
};

/// Number of previous timestamps whose median a new timestamp must exceed.
pub const MEDIAN_TIME_SPAN: usize = 11;

/// What happened to a block handed to [`ChainState::connect_block`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChainEvent {
    ExtendedActiveChain { hash: Digest256, height: u64 },
    CreatedSideChain { hash: Digest256, height: u64 },
    /// `rolled_back` lists the blocks leaving the active chain, old tip first.
    TriggeredReorg { old_tip: Digest256, new_tip: Digest256, rolled_back: Vec<Digest256> },
    StoredPendingParent { hash: Digest256, parent: Digest256 },
    RejectedInvalid { hash: Digest256, reason: BlockError },
    AlreadyKnown { hash: Digest256 },
}

/// Applies an already validated block to `utxo`.
pub fn apply_block_to_utxo(block: &Block, utxo: &mut UtxoSet) -> BlockUndo {
    utxo.apply_transactions(&block.transactions)
}

#[derive(Clone)]
struct Entry {
    block: Arc<Block>,
    height: u64,
    arrival: u64,
    /// Present while the block is on the active chain.
    undo: Option<BlockUndo>,
}

/// One node's view: every connected block, the active chain and its UTXO set.
///
/// Blocks whose parent is unknown wait in a pending pool and are connected when
/// the parent arrives. Side-chain blocks get header and structure checks on
/// arrival; their transactions are checked when a reorg makes them active.
#[derive(Clone)]
pub struct ChainState {
    params: ChainParams,
    index: FxHashMap<Digest256, Entry>,
    active: Vec<Digest256>,
    utxo: UtxoSet,
    pending: FxHashMap<Digest256, Vec<Arc<Block>>>,
    pending_hashes: FxHashSet<Digest256>,
    invalid: FxHashMap<Digest256, BlockError>,
    arrivals: u64,
    sigs: Arc<SigCache>,
}

impl ChainState {
    pub fn new(genesis: Block, params: ChainParams) -> Result<Self, ConsensusError> {
        let well_formed = genesis.header.prev_hash == Digest256::ZERO
            && check_pow(&genesis.header)
            && genesis.coinbase().is_some()
            && genesis.compute_merkle_root().ok() == Some(genesis.header.merkle_root)
            && genesis.transactions.iter().skip(1).all(|tx| tx.inputs.is_empty() && !tx.is_coinbase);
        if !well_formed {
            return Err(ConsensusError::BadGenesis);
        }
        let hash = genesis.hash();
        let mut utxo = UtxoSet::new();
        let undo = apply_block_to_utxo(&genesis, &mut utxo);
        let entry = Entry { block: Arc::new(genesis), height: 0, arrival: 0, undo: Some(undo) };
        Ok(ChainState {
            params,
            index: FxHashMap::from_iter([(hash, entry)]),
            active: vec![hash],
            utxo,
            pending: FxHashMap::default(),
            pending_hashes: FxHashSet::default(),
            invalid: FxHashMap::default(),
            arrivals: 1,
            sigs: Arc::new(SigCache::new()),
        })
    }

    /// Shares a signature cache with other chain states (e.g. other simulated nodes).
    pub fn with_sig_cache(mut self, cache: Arc<SigCache>) -> Self {
        self.sigs = cache;
        self
    }

    pub fn params(&self) -> &ChainParams {
        &self.params
    }

    pub fn tip(&self) -> Digest256 {
        *self.active.last().expect("genesis is always active")
    }

    pub fn height(&self) -> u64 {
        self.active.len() as u64 - 1
    }

    pub fn genesis_hash(&self) -> Digest256 {
        self.active[0]
    }

    pub fn tip_block(&self) -> &Arc<Block> {
        &self.index[&self.tip()].block
    }

    pub fn block(&self, hash: &Digest256) -> Option<&Arc<Block>> {
        self.index.get(hash).map(|e| &e.block)
    }

    pub fn height_of(&self, hash: &Digest256) -> Option<u64> {
        self.index.get(hash).map(|e| e.height)
    }

    /// Order in which the block was connected (genesis is 0).
    pub fn arrival_of(&self, hash: &Digest256) -> Option<u64> {
        self.index.get(hash).map(|e| e.arrival)
    }

    pub fn is_active(&self, hash: &Digest256) -> bool {
        self.index.get(hash).is_some_and(|e| self.active.get(e.height as usize) == Some(hash))
    }

    /// Whether the block was ever seen: connected, pending or rejected.
    pub fn is_known(&self, hash: &Digest256) -> bool {
        self.index.contains_key(hash) || self.pending_hashes.contains(hash) || self.invalid.contains_key(hash)
    }

    pub fn invalid_reason(&self, hash: &Digest256) -> Option<&BlockError> {
        self.invalid.get(hash)
    }

    pub fn active_hash_at(&self, height: u64) -> Option<Digest256> {
        self.active.get(height as usize).copied()
    }

    /// Active chain hashes indexed by height.
    pub fn active_chain(&self) -> &[Digest256] {
        &self.active
    }

    pub fn active_blocks(&self) -> impl Iterator<Item = &Arc<Block>> + '_ {
        self.active.iter().map(|h| &self.index[h].block)
    }

    pub fn utxo(&self) -> &UtxoSet {
        &self.utxo
    }

    pub fn block_count(&self) -> usize {
        self.index.len()
    }

    pub fn pending_count(&self) -> usize {
        self.pending_hashes.len()
    }

    /// Connected blocks off the active chain, ordered by (height, arrival).
    pub fn stale_blocks(&self) -> Vec<Digest256> {
        let mut stale: Vec<(u64, u64, Digest256)> = self
            .index
            .iter()
            .filter(|(h, e)| self.active.get(e.height as usize) != Some(h))
            .map(|(h, e)| (e.height, e.arrival, *h))
            .collect();
        stale.sort();
        stale.into_iter().map(|(_, _, h)| h).collect()
    }

    /// Hash of the ancestor of `from` (inclusive) at `height`.
    fn ancestor(&self, from: &Digest256, height: u64) -> Digest256 {
        let mut cur = *from;
        loop {
            let e = &self.index[&cur];
            debug_assert!(e.height >= height);
            if e.height == height {
                return cur;
            }
            if self.active.get(e.height as usize) == Some(&cur) {
                return self.active[height as usize];
            }
            cur = e.block.header.prev_hash;
        }
    }

    /// Median of the timestamps of `parent` and up to ten of its ancestors.
    pub fn median_time_past(&self, parent: &Digest256) -> u64 {
        let mut times = Vec::with_capacity(MEDIAN_TIME_SPAN);
        let mut cur = *parent;
        while times.len() < MEDIAN_TIME_SPAN {
            let Some(e) = self.index.get(&cur) else { break };
            times.push(e.block.header.timestamp);
            if e.height == 0 {
                break;
            }
            cur = e.block.header.prev_hash;
        }
        times.sort_unstable();
        times.get(times.len() / 2).copied().unwrap_or(0)
    }

    /// Target a child of `parent` must carry.
    ///
    /// At each multiple of the retarget interval the window timespan runs from the
    /// block before the window to its last block. The first window has no block
    /// before it, so its `interval - 1` gaps are scaled up to `interval`.
    pub fn scheduled_target(&self, parent: &Digest256) -> Result<Target, BlockError> {
        let pe = self.index.get(parent).ok_or(BlockError::UnknownParent(*parent))?;
        let height = pe.height + 1;
        if !self.params.is_retarget_height(height) {
            return Ok(pe.block.header.target);
        }
        let interval = self.params.retarget_interval;
        let last = pe.block.header.timestamp as i64;
        let timespan = if height > interval {
            let before = self.ancestor(parent, height - interval - 1);
            last - self.index[&before].block.header.timestamp as i64
        } else {
            let first = self.index[&self.active[0]].block.header.timestamp as i64;
            (last - first) * interval as i64 / (interval as i64 - 1).max(1)
        };
        // timestamps may run backwards; treat that as the fastest possible window
        Ok(retarget(pe.block.header.target, timespan.max(1), &self.params).expect("positive timespan"))
    }

    /// Structure, Merkle root and proof of work. Returns the txids.
    fn check_context_free(block: &Block, hash: &Digest256) -> Result<Vec<Digest256>, BlockError> {
        if block.coinbase().is_none() {
            return Err(BlockError::NoCoinbase);
        }
        for (index, tx) in block.transactions.iter().enumerate() {
            if index > 0 && tx.is_coinbase {
                return Err(BlockError::BadCoinbase("second coinbase"));
            }
            tx.check_structure().map_err(|source| BlockError::BadTransaction { index, source })?;
        }
        let ids: Vec<Digest256> = block.transactions.iter().map(txid).collect();
        if merkle_root(&ids).map_err(|_| BlockError::NoCoinbase)? != block.header.merkle_root {
            return Err(BlockError::BadMerkleRoot);
        }
        if !block.header.target.is_met_by(hash) {
            return Err(BlockError::BadPoW);
        }
        Ok(ids)
    }

    fn check_contextual(&self, block: &Block, height: u64) -> Result<(), BlockError> {
        let parent = &block.header.prev_hash;
        let expected = self.scheduled_target(parent)?;
        if block.header.target != expected {
            return Err(BlockError::WrongTarget { expected, actual: block.header.target });
        }
        let median = self.median_time_past(parent);
        if block.header.timestamp <= median {
            return Err(BlockError::BadTimestamp { timestamp: block.header.timestamp, median });
        }
        if block.coinbase().and_then(committed_height) != Some(height) {
            return Err(BlockError::BadCoinbase("missing or wrong height commitment"));
        }
        Ok(())
    }

    /// Transaction checks against `utxo`, the state right after the parent. Returns fees.
    fn check_body(&self, block: &Block, utxo: &UtxoSet, height: u64) -> Result<Amount, BlockError> {
        let mut view = UtxoOverlay::new(utxo);
        let mut fees = Amount::ZERO;
        for (index, tx) in block.transactions.iter().enumerate().skip(1) {
            if let Some(input) = tx.inputs.iter().find(|i| view.is_spent(&i.outpoint)) {
                return Err(BlockError::DoubleSpendInBlock(input.outpoint));
            }
            let fee = validate_transaction_with(tx, &view, height, &*self.sigs)
                .map_err(|source| BlockError::BadTransaction { index, source })?;
            fees = fees
                .checked_add(fee)
                .ok_or(BlockError::BadTransaction { index, source: LedgerError::AmountOverflow })?;
            view.apply(tx, height);
        }
        let coinbase = &block.transactions[0];
        let claimed = coinbase.output_total().map_err(|_| BlockError::BadCoinbase("output overflow"))?;
        let allowed = reward_at_height(height).checked_add(fees).ok_or(BlockError::BadCoinbase("fee overflow"))?;
        if claimed > allowed {
            return Err(BlockError::ExcessCoinbase { claimed, allowed });
        }
        Ok(fees)
    }

    /// UTXO set right after `hash`, which must be connected. Side-chain blocks on
    /// the way are checked.
    fn utxo_at(&self, hash: &Digest256) -> Result<UtxoSet, BlockError> {
        let mut branch = Vec::new();
        let mut cur = *hash;
        while !self.is_active(&cur) {
            branch.push(cur);
            cur = self.index[&cur].block.header.prev_hash;
        }
        let mut utxo = self.utxo.clone();
        for h in self.active[self.index[&cur].height as usize + 1..].iter().rev() {
            utxo.undo(self.index[h].undo.clone().expect("active blocks keep undo data"));
        }
        for h in branch.iter().rev() {
            let e = &self.index[h];
            self.check_body(&e.block, &utxo, e.height).map_err(|_| BlockError::InvalidAncestor(*h))?;
            apply_block_to_utxo(&e.block, &mut utxo);
        }
        Ok(utxo)
    }

    /// Full check of `block` as a child of its parent, against that fork's UTXO state.
    /// Returns the fees it collects.
    pub fn validate_block(&self, block: &Block) -> Result<Amount, BlockError> {
        let parent = block.header.prev_hash;
        if self.invalid.contains_key(&parent) {
            return Err(BlockError::InvalidAncestor(parent));
        }
        let height = self.index.get(&parent).ok_or(BlockError::UnknownParent(parent))?.height + 1;
        Self::check_context_free(block, &block.hash())?;
        self.check_contextual(block, height)?;
        if parent == self.tip() {
            self.check_body(block, &self.utxo, height)
        } else {
            self.check_body(block, &self.utxo_at(&parent)?, height)
        }
    }

    /// Hands a block to the node. The first event concerns `block`; any further
    /// events concern pending descendants it unblocked.
    ///
    /// Fork choice: the greatest height wins; at equal height the tip connected
    /// first stays active.
    pub fn connect_block(&mut self, block: impl Into<Arc<Block>>) -> Vec<ChainEvent> {
        let block = block.into();
        let hash = block.hash();
        if self.index.contains_key(&hash) || self.pending_hashes.contains(&hash) {
            return vec![ChainEvent::AlreadyKnown { hash }];
        }
        if let Some(reason) = self.invalid.get(&hash) {
            return vec![ChainEvent::RejectedInvalid { hash, reason: reason.clone() }];
        }
        let mut events = Vec::new();
        let parent = block.header.prev_hash;
        match Self::check_context_free(&block, &hash) {
            Err(reason) => self.reject(hash, reason, &mut events),
            Ok(_) if self.invalid.contains_key(&parent) => {
                self.reject(hash, BlockError::InvalidAncestor(parent), &mut events)
            }
            Ok(_) if !self.index.contains_key(&parent) => {
                self.pending.entry(parent).or_default().push(block);
                self.pending_hashes.insert(hash);
                return vec![ChainEvent::StoredPendingParent { hash, parent }];
            }
            Ok(ids) => self.attach(block, hash, &ids, &mut events),
        }
        self.drain_pending(hash, &mut events);
        events
    }

    fn reject(&mut self, hash: Digest256, reason: BlockError, events: &mut Vec<ChainEvent>) {
        self.invalid.insert(hash, reason.clone());
        events.push(ChainEvent::RejectedInvalid { hash, reason });
    }

    fn drain_pending(&mut self, root: Digest256, events: &mut Vec<ChainEvent>) {
        let mut queue = VecDeque::from([root]);
        while let Some(parent) = queue.pop_front() {
            let Some(children) = self.pending.remove(&parent) else { continue };
            for child in children {
                let hash = child.hash();
                self.pending_hashes.remove(&hash);
                if self.invalid.contains_key(&parent) {
                    self.reject(hash, BlockError::InvalidAncestor(parent), events);
                } else {
                    let ids: Vec<Digest256> = child.transactions.iter().map(txid).collect();
                    self.attach(child, hash, &ids, events);
                }
                queue.push_back(hash);
            }
        }
    }

    /// Connects a block whose parent is in the index.
    fn attach(&mut self, block: Arc<Block>, hash: Digest256, ids: &[Digest256], events: &mut Vec<ChainEvent>) {
        let parent = block.header.prev_hash;
        let height = self.index[&parent].height + 1;
        if let Err(reason) = self.check_contextual(&block, height) {
            return self.reject(hash, reason, events);
        }
        let arrival = self.arrivals;
        self.arrivals += 1;

        if parent == self.tip() {
            match self.check_body(&block, &self.utxo, height) {
                Ok(_) => {
                    let undo = self.utxo.apply_with_txids(&block.transactions, ids);
                    self.index.insert(hash, Entry { block, height, arrival, undo: Some(undo) });
                    self.active.push(hash);
                    events.push(ChainEvent::ExtendedActiveChain { hash, height });
                }
                Err(reason) => self.reject(hash, reason, events),
            }
            return;
        }

        self.index.insert(hash, Entry { block, height, arrival, undo: None });
        if height > self.height() {
            self.reorg_to(hash, events);
        } else {
            events.push(ChainEvent::CreatedSideChain { hash, height });
        }
    }

    fn reorg_to(&mut self, new_tip: Digest256, events: &mut Vec<ChainEvent>) {
        let old_tip = self.tip();
        let old_height = self.height();
        let mut branch = Vec::new();
        let mut cur = new_tip;
        while !self.is_active(&cur) {
            branch.push(cur);
            cur = self.index[&cur].block.header.prev_hash;
        }
        let fork = cur;

        let mut rolled_back = Vec::new();
        while self.tip() != fork {
            let h = self.active.pop().unwrap();
            let undo = self.index.get_mut(&h).unwrap().undo.take().expect("active blocks keep undo data");
            self.utxo.undo(undo);
            rolled_back.push(h);
        }

        for (applied, h) in branch.iter().rev().enumerate() {
            let (block, height) = {
                let e = &self.index[h];
                (Arc::clone(&e.block), e.height)
            };
            if let Err(reason) = self.check_body(&block, &self.utxo, height) {
                self.invalidate_subtree(*h, reason.clone());
                let reason = if *h == new_tip { reason } else { BlockError::InvalidAncestor(*h) };
                events.push(ChainEvent::RejectedInvalid { hash: new_tip, reason });
                if self.height() > old_height {
                    // the valid part of the branch is still longer than the old chain
                    let tip = self.tip();
                    events.push(ChainEvent::TriggeredReorg { old_tip, new_tip: tip, rolled_back });
                } else {
                    for _ in 0..applied {
                        let h = self.active.pop().unwrap();
                        let undo = self.index.get_mut(&h).unwrap().undo.take().unwrap();
                        self.utxo.undo(undo);
                    }
                    for h in rolled_back.iter().rev() {
                        let undo = apply_block_to_utxo(&self.index[h].block, &mut self.utxo);
                        self.index.get_mut(h).unwrap().undo = Some(undo);
                        self.active.push(*h);
                    }
                }
                return;
            }
            let undo = apply_block_to_utxo(&block, &mut self.utxo);
            self.index.get_mut(h).unwrap().undo = Some(undo);
            self.active.push(*h);
        }
        events.push(ChainEvent::TriggeredReorg { old_tip, new_tip, rolled_back });
    }

    /// Moves `root` and every connected descendant from the index to the invalid set.
    fn invalidate_subtree(&mut self, root: Digest256, reason: BlockError) {
        let root_height = self.index[&root].height;
        let doomed: Vec<Digest256> = self
            .index
            .iter()
            .filter(|(h, e)| e.height > root_height && self.ancestor(h, root_height) == root)
            .map(|(h, _)| *h)
            .collect();
        for h in doomed {
            self.index.remove(&h);
            self.invalid.insert(h, BlockError::InvalidAncestor(root));
        }
        self.index.remove(&root);
        self.invalid.insert(root, reason);
    }

    /// Block skeleton on `parent` with the given transactions (assumed valid there)
    /// and a coinbase claiming the subsidy plus `fees`. Nonce 0, not yet mined.
    #[allow(clippy::too_many_arguments)]
    pub fn assemble_block(
        &self,
        parent: &Digest256,
        transactions: Vec<Transaction>,
        fees: Amount,
        payout: LockingScript,
        now: u64,
        extra_nonce: u64,
    ) -> Result<Block, BlockError> {
        let height = self.index.get(parent).ok_or(BlockError::UnknownParent(*parent))?.height + 1;
        let value = reward_at_height(height).checked_add(fees).ok_or(BlockError::BadCoinbase("fee overflow"))?;
        let mut txs = Vec::with_capacity(transactions.len() + 1);
        txs.push(coinbase_transaction(height, extra_nonce, payout, value));
        txs.extend(transactions);
        let ids: Vec<Digest256> = txs.iter().map(txid).collect();
        let header = BlockHeader {
            version: 1,
            prev_hash: *parent,
            merkle_root: merkle_root(&ids).expect("coinbase present"),
            timestamp: now.max(self.median_time_past(parent) + 1),
            target: self.scheduled_target(parent)?,
            nonce: 0,
        };
        Ok(Block { header, transactions: txs })
    }

    /// Template on the active tip: mempool transactions by fee (descending, then
    /// txid ascending), skipping any that conflict with one already chosen or do not
    /// validate; coinbase claims subsidy plus the chosen fees.
    pub fn build_template(&self, mempool: &[Transaction], payout: LockingScript, now: u64) -> Block {
        let height = self.height() + 1;
        let mut candidates: Vec<(Amount, Digest256, &Transaction)> = mempool
            .iter()
            .filter(|tx| !tx.is_coinbase)
            .filter_map(|tx| tx_fee(tx, &self.utxo).ok().map(|fee| (fee, txid(tx), tx)))
            .collect();
        candidates.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));

        let mut view = UtxoOverlay::new(&self.utxo);
        let mut chosen = Vec::new();
        let mut fees = Amount::ZERO;
        for (_, _, tx) in candidates {
            if tx.inputs.iter().any(|i| view.is_spent(&i.outpoint)) {
                continue;
            }
            let Ok(fee) = validate_transaction_with(tx, &view, height, &*self.sigs) else { continue };
            let Some(total) = fees.checked_add(fee) else { continue };
            fees = total;
            view.apply(tx, height);
            chosen.push(tx.clone());
        }
        self.assemble_block(&self.tip(), chosen, fees, payout, now, 0).expect("tip is connected")
    }
}
