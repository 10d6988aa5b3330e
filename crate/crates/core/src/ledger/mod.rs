//! Amounts, the subsidy schedule, transactions, locking scripts and the UTXO set.

mod amount;
mod emission;
mod script;
mod transaction;
mod utxo;
mod validation;


use thiserror::Error;

pub use amount::{Amount, COIN, MAX_MONEY};
pub use emission::{
    annualized_issuance, cumulative_supply, epoch_of, final_supply, reward_at_height, IssuanceRate,
    BLOCKS_PER_YEAR, HALVING_INTERVAL, INITIAL_REWARD, LAST_EPOCH,
};
pub use script::{LockingScript, MAX_EMBED_LEN, MAX_MULTISIG_KEYS};
pub use transaction::{signing_digest, txid, OutPoint, Transaction, TxInput, TxOutput, Witness};
pub use utxo::{BlockUndo, UtxoEntry, UtxoOverlay, UtxoSet, UtxoSource};
pub use validation::{
    embed_document, tx_fee, validate_transaction, validate_transaction_with, DirectCheck, SigCache, SignatureCheck,
    COINBASE_MATURITY,
};

use crate::ecc::EccError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LedgerError {
    #[error("input {0:?} does not refer to an unspent output")]
    UnknownInput(OutPoint),
    #[error("outpoint {0:?} spent twice in one transaction")]
    DoubleSpendWithinTx(OutPoint),
    #[error("input {input}: signature does not verify")]
    BadSignature { input: usize },
    #[error("input {input}: witness key does not match the locking script")]
    KeyMismatch { input: usize },
    #[error("input {input}: expected {expected} witnesses, got {actual}")]
    WrongWitnessCount { input: usize, expected: usize, actual: usize },
    #[error("input {input}: {valid} of {required} required signatures")]
    ThresholdNotMet { input: usize, valid: usize, required: usize },
    #[error("output locked until height {unlock_height}, spent at {height}")]
    ImmatureHeightLock { unlock_height: u64, height: u64 },
    #[error("coinbase output from height {created} spent at {height}")]
    ImmatureCoinbase { created: u64, height: u64 },
    #[error("output {0:?} carries data and cannot be spent")]
    UnspendableOutput(OutPoint),
    #[error("outputs exceed inputs")]
    NegativeFee,
    #[error("amount overflow")]
    AmountOverflow,
    #[error("input index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("invalid script: {0}")]
    InvalidScript(&'static str),
    #[error("malformed transaction: {0}")]
    Malformed(&'static str),
    #[error(transparent)]
    Key(#[from] EccError),
}
