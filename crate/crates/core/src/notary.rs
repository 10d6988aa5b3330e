//! Proof of existence: a block whose coinbase commits to a document digest.

use serde::Serialize;

use crate::consensus::{Block, ChainState};
use crate::hashing::{double_sha256, Digest256};
use crate::ledger::{embed_document, LockingScript};

pub fn document_digest(contents: &[u8]) -> Digest256 {
    double_sha256(contents)
}

/// Unmined block on the active tip whose coinbase also carries `digest` in a data output.
pub fn notarization_template(chain: &ChainState, digest: &Digest256, payout: LockingScript, now: u64) -> Block {
    let mut block = chain.build_template(&[], payout, now);
    block.transactions[0].outputs.push(embed_document(digest));
    block.header.merkle_root = block.compute_merkle_root().expect("coinbase present");
    block
}

/// Where a digest was found.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Attestation {
    pub height: u64,
    pub timestamp: u64,
    pub block: Digest256,
}

/// First block of the active chain with an output embedding `digest`.
pub fn locate_document(chain: &ChainState, digest: &Digest256) -> Option<Attestation> {
    let wanted = embed_document(digest).script;
    chain.active_blocks().enumerate().find_map(|(height, block)| {
        block
            .transactions
            .iter()
            .any(|tx| tx.outputs.iter().any(|o| o.script == wanted))
            .then(|| Attestation { height: height as u64, timestamp: block.header.timestamp, block: block.hash() })
    })
}
