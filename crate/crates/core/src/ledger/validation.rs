use std::collections::HashSet;
use std::sync::Mutex;

use super::amount::Amount;
use super::script::LockingScript;
use super::transaction::{signing_digest, Transaction, TxOutput, Witness};
use super::utxo::UtxoSource;
use super::LedgerError;
use crate::ecc::{verify, PublicKey, Signature};
use crate::hashing::{hash160, Digest256};

/// Blocks a coinbase output must wait before it can be spent.
pub const COINBASE_MATURITY: u64 = 100;

/// Input total minus output total of a non-coinbase transaction.
pub fn tx_fee<U: UtxoSource>(tx: &Transaction, utxo: &U) -> Result<Amount, LedgerError> {
    let mut total_in = Amount::ZERO;
    for input in &tx.inputs {
        let entry = utxo.lookup(&input.outpoint).ok_or(LedgerError::UnknownInput(input.outpoint))?;
        total_in = total_in.checked_add(entry.output.amount).ok_or(LedgerError::AmountOverflow)?;
    }
    total_in.checked_sub(tx.output_total()?).ok_or(LedgerError::NegativeFee)
}

/// Signature verification as seen by script evaluation.
pub trait SignatureCheck {
    fn check(&self, key: &PublicKey, digest: &Digest256, sig: &Signature) -> bool;
}

/// Verifies every signature from scratch.
pub struct DirectCheck;

impl SignatureCheck for DirectCheck {
    fn check(&self, key: &PublicKey, digest: &Digest256, sig: &Signature) -> bool {
        verify(key, digest, sig)
    }
}

/// Remembers (key, digest, signature) triples that verified, so a transaction seen
/// on several forks or by several nodes is verified once.
#[derive(Default)]
pub struct SigCache {
    valid: Mutex<HashSet<([u8; 65], [u8; 32], [u8; 64])>>,
}

impl SigCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.valid.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl SignatureCheck for SigCache {
    fn check(&self, key: &PublicKey, digest: &Digest256, sig: &Signature) -> bool {
        let entry = (key.to_bytes(), *digest.as_bytes(), sig.to_bytes());
        if self.valid.lock().unwrap().contains(&entry) {
            return true;
        }
        let ok = verify(key, digest, sig);
        if ok {
            self.valid.lock().unwrap().insert(entry);
        }
        ok
    }
}

/// Checks a spend against `utxo` for inclusion in a block at `height`; returns the fee.
pub fn validate_transaction<U: UtxoSource>(tx: &Transaction, utxo: &U, height: u64) -> Result<Amount, LedgerError> {
    validate_transaction_with(tx, utxo, height, &DirectCheck)
}

/// [`validate_transaction`] with a caller-supplied signature checker.
pub fn validate_transaction_with<U: UtxoSource, C: SignatureCheck>(
    tx: &Transaction,
    utxo: &U,
    height: u64,
    sigs: &C,
) -> Result<Amount, LedgerError> {
    if tx.is_coinbase {
        return Err(LedgerError::Malformed("coinbase is not a spend"));
    }
    tx.check_structure()?;

    let mut seen = HashSet::with_capacity(tx.inputs.len());
    for input in &tx.inputs {
        if !seen.insert(input.outpoint) {
            return Err(LedgerError::DoubleSpendWithinTx(input.outpoint));
        }
    }

    let digest = signing_digest(tx, 0)?;
    for (index, input) in tx.inputs.iter().enumerate() {
        let entry = utxo.lookup(&input.outpoint).ok_or(LedgerError::UnknownInput(input.outpoint))?;
        if entry.is_coinbase && height < entry.height + COINBASE_MATURITY {
            return Err(LedgerError::ImmatureCoinbase { created: entry.height, height });
        }
        if entry.output.script.is_unspendable() {
            return Err(LedgerError::UnspendableOutput(input.outpoint));
        }
        check_witnesses(&entry.output.script, &input.witnesses, &digest, height, index, sigs)?;
    }

    tx_fee(tx, utxo)
}

fn check_witnesses<C: SignatureCheck>(
    script: &LockingScript,
    witnesses: &[Witness],
    digest: &Digest256,
    height: u64,
    input: usize,
    sigs: &C,
) -> Result<(), LedgerError> {
    match script {
        LockingScript::PayToPubKeyHash(payload) => {
            let [w] = witnesses else {
                return Err(LedgerError::WrongWitnessCount { input, expected: 1, actual: witnesses.len() });
            };
            if hash160(&w.key.to_bytes()) != *payload {
                return Err(LedgerError::KeyMismatch { input });
            }
            if !sigs.check(&w.key, digest, &w.sig) {
                return Err(LedgerError::BadSignature { input });
            }
            Ok(())
        }
        LockingScript::MultiSig { required, keys } => {
            let mut signed = HashSet::new();
            for w in witnesses {
                if !keys.contains(&w.key) {
                    return Err(LedgerError::KeyMismatch { input });
                }
                if !sigs.check(&w.key, digest, &w.sig) {
                    return Err(LedgerError::BadSignature { input });
                }
                signed.insert(w.key.to_bytes());
            }
            if signed.len() < *required as usize {
                return Err(LedgerError::ThresholdNotMet { input, valid: signed.len(), required: *required as usize });
            }
            Ok(())
        }
        LockingScript::HeightLock { unlock_height, inner } => {
            if height < *unlock_height {
                return Err(LedgerError::ImmatureHeightLock { unlock_height: *unlock_height, height });
            }
            check_witnesses(inner, witnesses, digest, height, input, sigs)
        }
        LockingScript::DataEmbed(_) => Err(LedgerError::InvalidScript("data output as spend condition")),
    }
}

/// A zero-value output committing to a document digest (proof of existence).
pub fn embed_document(doc_digest: &Digest256) -> TxOutput {
    TxOutput::new(Amount::ZERO, LockingScript::DataEmbed(doc_digest.as_bytes().to_vec()))
}
