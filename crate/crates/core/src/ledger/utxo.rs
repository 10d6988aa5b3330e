use rustc_hash::{FxHashMap, FxHashSet};

use super::amount::Amount;
use super::transaction::{txid, OutPoint, Transaction, TxOutput};
use crate::hashing::Digest256;

/// An unspent output together with the height of the block that created it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UtxoEntry {
    pub output: TxOutput,
    pub height: u64,
    pub is_coinbase: bool,
}

/// Read access to unspent outputs.
pub trait UtxoSource {
    fn lookup(&self, outpoint: &OutPoint) -> Option<&UtxoEntry>;
}

/// Everything needed to undo one block's effect on a [`UtxoSet`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BlockUndo {
    pub spent: Vec<(OutPoint, UtxoEntry)>,
    pub created: Vec<OutPoint>,
    pub previous_height: Option<u64>,
}

/// The ledger state after some prefix of a chain.
///
/// `height` is that of the last applied block; `None` before genesis.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UtxoSet {
    entries: FxHashMap<OutPoint, UtxoEntry>,
    height: Option<u64>,
}

impl UtxoSource for UtxoSet {
    fn lookup(&self, outpoint: &OutPoint) -> Option<&UtxoEntry> {
        self.entries.get(outpoint)
    }
}

impl UtxoSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn height(&self) -> Option<u64> {
        self.height
    }

    /// Height the next applied block will have.
    pub fn next_height(&self) -> u64 {
        self.height.map_or(0, |h| h + 1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, outpoint: &OutPoint) -> bool {
        self.entries.contains_key(outpoint)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&OutPoint, &UtxoEntry)> {
        self.entries.iter()
    }

    /// Inserts an entry directly, bypassing block application (fixtures and tests).
    pub fn insert(&mut self, outpoint: OutPoint, entry: UtxoEntry) -> Option<UtxoEntry> {
        self.entries.insert(outpoint, entry)
    }

    pub fn total_value(&self) -> Amount {
        Amount::checked_sum(self.entries.values().map(|e| e.output.amount)).expect("UTXO total within MAX_MONEY")
    }

    /// Applies a block's transactions in order, assuming they were validated.
    ///
    /// Spent outpoints are removed, spendable outputs inserted, data outputs skipped.
    pub fn apply_transactions(&mut self, txs: &[Transaction]) -> BlockUndo {
        let ids: Vec<_> = txs.iter().map(txid).collect();
        self.apply_with_txids(txs, &ids)
    }

    /// [`UtxoSet::apply_transactions`] with the txids already computed (`ids[i]` is `txid(&txs[i])`).
    pub fn apply_with_txids(&mut self, txs: &[Transaction], ids: &[Digest256]) -> BlockUndo {
        debug_assert_eq!(txs.len(), ids.len());
        let height = self.next_height();
        let mut undo = BlockUndo { previous_height: self.height, ..BlockUndo::default() };
        for (tx, &id) in txs.iter().zip(ids) {
            for input in &tx.inputs {
                if let Some(entry) = self.entries.remove(&input.outpoint) {
                    undo.spent.push((input.outpoint, entry));
                }
            }
            for (index, output) in tx.outputs.iter().enumerate() {
                if output.script.is_unspendable() {
                    continue;
                }
                let outpoint = OutPoint::new(id, index as u32);
                let entry = UtxoEntry { output: output.clone(), height, is_coinbase: tx.is_coinbase };
                self.entries.insert(outpoint, entry);
                undo.created.push(outpoint);
            }
        }
        self.height = Some(height);
        undo
    }

    pub fn undo(&mut self, undo: BlockUndo) {
        for outpoint in undo.created.iter().rev() {
            self.entries.remove(outpoint);
        }
        for (outpoint, entry) in undo.spent.into_iter().rev() {
            self.entries.insert(outpoint, entry);
        }
        self.height = undo.previous_height;
    }
}

/// A [`UtxoSource`] layered over a base set, used while validating a block whose
/// later transactions may spend earlier ones.
pub struct UtxoOverlay<'a> {
    base: &'a UtxoSet,
    added: FxHashMap<OutPoint, UtxoEntry>,
    spent: FxHashSet<OutPoint>,
}

impl<'a> UtxoOverlay<'a> {
    pub fn new(base: &'a UtxoSet) -> Self {
        UtxoOverlay { base, added: FxHashMap::default(), spent: FxHashSet::default() }
    }

    /// Whether `outpoint` was consumed by a transaction already applied to the overlay.
    pub fn is_spent(&self, outpoint: &OutPoint) -> bool {
        self.spent.contains(outpoint)
    }

    pub fn apply(&mut self, tx: &Transaction, height: u64) {
        for input in &tx.inputs {
            self.added.remove(&input.outpoint);
            self.spent.insert(input.outpoint);
        }
        let id = txid(tx);
        for (index, output) in tx.outputs.iter().enumerate() {
            if !output.script.is_unspendable() {
                let entry = UtxoEntry { output: output.clone(), height, is_coinbase: tx.is_coinbase };
                self.added.insert(OutPoint::new(id, index as u32), entry);
            }
        }
    }
}

impl UtxoSource for UtxoOverlay<'_> {
    fn lookup(&self, outpoint: &OutPoint) -> Option<&UtxoEntry> {
        if let Some(entry) = self.added.get(outpoint) {
            return Some(entry);
        }
        if self.spent.contains(outpoint) {
            return None;
        }
        self.base.lookup(outpoint)
    }
}
