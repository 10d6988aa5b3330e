//! Blocks, proof of work, difficulty retargeting, block validation and fork choice.

mod block;
mod chain;
mod store;
mod target;


use thiserror::Error;

pub use block::{
    check_pow, coinbase_transaction, committed_height, genesis_message, header_hash, make_genesis,
    make_genesis_with, mine_block, Block, BlockHeader, GenesisSpec, GENESIS_MESSAGE, GENESIS_TIMESTAMP, HEADER_LEN,
};
pub use chain::{apply_block_to_utxo, ChainEvent, ChainState, MEDIAN_TIME_SPAN};
pub use store::{append_block, load_chain, read_chain, write_chain};
pub use target::{retarget, ChainParams, Target};

use crate::codec::DecodeError;
use crate::hashing::Digest256;
use crate::ledger::{Amount, LedgerError, OutPoint};

/// Why a block was refused.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BlockError {
    #[error("header hash above target")]
    BadPoW,
    #[error("target {actual} differs from scheduled {expected}")]
    WrongTarget { expected: Target, actual: Target },
    #[error("merkle root does not match the transactions")]
    BadMerkleRoot,
    #[error("coinbase claims {claimed}, allowed {allowed}")]
    ExcessCoinbase { claimed: Amount, allowed: Amount },
    #[error("outpoint {0:?} spent twice in the block")]
    DoubleSpendInBlock(OutPoint),
    #[error("transaction {index}: {source}")]
    BadTransaction { index: usize, source: LedgerError },
    #[error("timestamp {timestamp} not after median time past {median}")]
    BadTimestamp { timestamp: u64, median: u64 },
    #[error("block has no coinbase in first position")]
    NoCoinbase,
    #[error("bad coinbase: {0}")]
    BadCoinbase(&'static str),
    #[error("parent {0} unknown")]
    UnknownParent(Digest256),
    #[error("descends from invalid block {0}")]
    InvalidAncestor(Digest256),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConsensusError {
    #[error("retarget timespan must be positive, got {0}")]
    NonPositiveTimespan(i64),
    #[error("nonce range exhausted")]
    Exhausted,
    #[error("genesis message of {0} bytes exceeds the data limit")]
    MessageTooLong(usize),
    #[error("genesis block must have a zero parent hash and valid proof of work")]
    BadGenesis,
    #[error("chain file: {0}")]
    Decode(#[from] DecodeError),
    #[error("chain file: {0}")]
    Io(String),
    #[error("block {hash}: {source}")]
    Rejected { hash: Digest256, source: BlockError },
}

impl From<std::io::Error> for ConsensusError {
    fn from(e: std::io::Error) -> Self {
        ConsensusError::Io(e.to_string())
    }
}
