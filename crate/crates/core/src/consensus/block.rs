//! Headers, blocks, coinbase construction and nonce search.
//!
//! Header layout (116 bytes):
//!
//! ```text
//! version u32 LE | prev_hash [32] | merkle_root [32] | timestamp u64 LE | target [32] BE | nonce u64 LE
//! ```
//!
//! A block is the header followed by `tx count u32 LE` and, per transaction,
//! `len u32 LE | canonical transaction bytes`.

use super::target::Target;
use super::{BlockError, ConsensusError};
use crate::codec::{DecodeError, Reader};
use crate::hashing::{double_sha256, hash160, merkle_root, Digest256};
use crate::ledger::{reward_at_height, txid, Amount, LockingScript, Transaction, TxOutput, MAX_EMBED_LEN};

pub const HEADER_LEN: usize = 116;
const NONCE_OFFSET: usize = HEADER_LEN - 8;

/// The sentence carried by the default genesis block.
pub const GENESIS_MESSAGE: &str = "The Times 03/Jan/2009 Chancellor on brink of second bailout for banks";
pub const GENESIS_TIMESTAMP: u64 = 1_231_006_505;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BlockHeader {
    pub version: u32,
    pub prev_hash: Digest256,
    pub merkle_root: Digest256,
    pub timestamp: u64,
    pub target: Target,
    pub nonce: u64,
}

impl BlockHeader {
    pub fn serialize(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[0..4].copy_from_slice(&self.version.to_le_bytes());
        out[4..36].copy_from_slice(self.prev_hash.as_bytes());
        out[36..68].copy_from_slice(self.merkle_root.as_bytes());
        out[68..76].copy_from_slice(&self.timestamp.to_le_bytes());
        out[76..108].copy_from_slice(&self.target.to_be_bytes());
        out[108..116].copy_from_slice(&self.nonce.to_le_bytes());
        out
    }

    pub fn deserialize(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut r = Reader::new(bytes);
        let header = Self::decode_from(&mut r)?;
        r.finish()?;
        Ok(header)
    }

    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let version = r.u32()?;
        let prev_hash = Digest256(r.array()?);
        let merkle_root = Digest256(r.array()?);
        let timestamp = r.u64()?;
        let target = Target::from_be_bytes(&r.array()?).ok_or_else(|| r.invalid("zero target"))?;
        let nonce = r.u64()?;
        Ok(BlockHeader { version, prev_hash, merkle_root, timestamp, target, nonce })
    }
}

/// Double SHA-256 of the 116-byte header.
pub fn header_hash(h: &BlockHeader) -> Digest256 {
    double_sha256(&h.serialize())
}

pub fn check_pow(h: &BlockHeader) -> bool {
    h.target.is_met_by(&header_hash(h))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub header: BlockHeader,
    pub transactions: Vec<Transaction>,
}

impl Block {
    pub fn hash(&self) -> Digest256 {
        header_hash(&self.header)
    }

    pub fn compute_merkle_root(&self) -> Result<Digest256, BlockError> {
        let ids: Vec<Digest256> = self.transactions.iter().map(txid).collect();
        merkle_root(&ids).map_err(|_| BlockError::NoCoinbase)
    }

    pub fn coinbase(&self) -> Option<&Transaction> {
        self.transactions.first().filter(|tx| tx.is_coinbase)
    }

    /// Rewrites the coinbase extra-nonce and refreshes the Merkle root.
    ///
    /// Used when a nonce range is exhausted. Only meaningful for coinbases built by
    /// [`coinbase_transaction`].
    pub fn set_extra_nonce(&mut self, extra_nonce: u64) -> Result<(), BlockError> {
        let cb = self.transactions.first_mut().filter(|tx| tx.is_coinbase).ok_or(BlockError::NoCoinbase)?;
        let commitment = cb
            .outputs
            .iter_mut()
            .find_map(|o| match &mut o.script {
                LockingScript::DataEmbed(data) if data.len() == 16 => Some(data),
                _ => None,
            })
            .ok_or(BlockError::BadCoinbase("no height commitment"))?;
        commitment[8..16].copy_from_slice(&extra_nonce.to_le_bytes());
        self.header.merkle_root = self.compute_merkle_root()?;
        Ok(())
    }

    pub fn serialize(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 4 + 128 * self.transactions.len());
        out.extend_from_slice(&self.header.serialize());
        out.extend_from_slice(&(self.transactions.len() as u32).to_le_bytes());
        for tx in &self.transactions {
            let bytes = tx.serialize();
            out.extend_from_slice(&(bytes.len() as u32).to_le_bytes());
            out.extend_from_slice(&bytes);
        }
        out
    }

    pub fn deserialize(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut r = Reader::new(bytes);
        let header = BlockHeader::decode_from(&mut r)?;
        let count = r.u32()?;
        let mut transactions = Vec::new();
        for _ in 0..count {
            let len = r.u32()? as usize;
            let body = r.take(len)?;
            transactions.push(Transaction::deserialize(body)?);
        }
        r.finish()?;
        Ok(Block { header, transactions })
    }
}

/// Coinbase for a block at `height` (≥ 1): `value` paid to `payout`, plus a zero-value
/// data output `height u64 LE | extra_nonce u64 LE`.
///
/// The height commitment keeps coinbase txids distinct along a chain, so no two
/// unspent outputs ever share an outpoint.
pub fn coinbase_transaction(height: u64, extra_nonce: u64, payout: LockingScript, value: Amount) -> Transaction {
    let mut commitment = Vec::with_capacity(16);
    commitment.extend_from_slice(&height.to_le_bytes());
    commitment.extend_from_slice(&extra_nonce.to_le_bytes());
    Transaction::coinbase(vec![
        TxOutput::new(value, payout),
        TxOutput::new(Amount::ZERO, LockingScript::DataEmbed(commitment)),
    ])
}

/// Height committed to by a coinbase built with [`coinbase_transaction`].
pub fn committed_height(coinbase: &Transaction) -> Option<u64> {
    coinbase.outputs.iter().find_map(|o| match &o.script {
        LockingScript::DataEmbed(data) if data.len() == 16 => Some(u64::from_le_bytes(data[..8].try_into().unwrap())),
        _ => None,
    })
}

/// Inputs to [`make_genesis_with`].
#[derive(Clone, Debug)]
pub struct GenesisSpec {
    pub payout: LockingScript,
    pub timestamp: u64,
    pub target: Target,
}

impl Default for GenesisSpec {
    fn default() -> Self {
        GenesisSpec {
            payout: LockingScript::PayToPubKeyHash(hash160(b"genesis")),
            timestamp: GENESIS_TIMESTAMP,
            target: Target::from_leading_zero_bits(8).unwrap(),
        }
    }
}

/// Genesis with the default payout, timestamp and an 8-bit target.
pub fn make_genesis(message: &[u8]) -> Result<Block, ConsensusError> {
    make_genesis_with(message, &GenesisSpec::default())
}

/// Height-0 block whose coinbase pays the height-0 reward and, for a non-empty
/// message, carries it in a data output. The nonce is searched from 0.
pub fn make_genesis_with(message: &[u8], spec: &GenesisSpec) -> Result<Block, ConsensusError> {
    if message.len() > MAX_EMBED_LEN {
        return Err(ConsensusError::MessageTooLong(message.len()));
    }
    let mut outputs = vec![TxOutput::new(reward_at_height(0), spec.payout.clone())];
    if !message.is_empty() {
        outputs.push(TxOutput::new(Amount::ZERO, LockingScript::DataEmbed(message.to_vec())));
    }
    let transactions = vec![Transaction::coinbase(outputs)];
    let merkle = merkle_root(&[txid(&transactions[0])]).expect("one leaf");
    let header = BlockHeader {
        version: 1,
        prev_hash: Digest256::ZERO,
        merkle_root: merkle,
        timestamp: spec.timestamp,
        target: spec.target,
        nonce: 0,
    };
    mine_block(Block { header, transactions }, 0, u64::MAX)
}

/// The genesis message, if the block carries one.
pub fn genesis_message(genesis: &Block) -> Option<&[u8]> {
    genesis.coinbase()?.outputs.iter().find_map(|o| match &o.script {
        LockingScript::DataEmbed(data) => Some(data.as_slice()),
        _ => None,
    })
}

/// Tries nonces `nonce_start, nonce_start + 1, ...` (at most `nonce_budget` of them)
/// and returns the template with the first one meeting its target.
pub fn mine_block(mut template: Block, nonce_start: u64, nonce_budget: u64) -> Result<Block, ConsensusError> {
    let mut bytes = template.header.serialize();
    let target = template.header.target;
    let mut nonce = nonce_start;
    for _ in 0..nonce_budget {
        bytes[NONCE_OFFSET..].copy_from_slice(&nonce.to_le_bytes());
        if target.is_met_by(&double_sha256(&bytes)) {
            template.header.nonce = nonce;
            return Ok(template);
        }
        nonce = nonce.wrapping_add(1);
    }
    Err(ConsensusError::Exhausted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample_header() -> BlockHeader {
        BlockHeader {
            version: 1,
            prev_hash: crate::hashing::sha256(b"prev"),
            merkle_root: crate::hashing::sha256(b"root"),
            timestamp: 1_700_000_000,
            target: Target::from_leading_zero_bits(8).unwrap(),
            nonce: 42,
        }
    }

    #[test]
    fn header_golden() {
        // independent Python encoder of the same layout
        let h = sample_header();
        let bytes = h.serialize();
        assert_eq!(bytes.len(), HEADER_LEN);
        assert_eq!(BlockHeader::deserialize(&bytes).unwrap(), h);
        assert_eq!(header_hash(&h).to_hex(), "14afd30c51789658ebf092af29db7ce8816e6c2d423728cc9c079c9d14a7d81f");
    }

    #[test]
    fn nonce_changes_hash() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut seen = std::collections::HashSet::new();
        let mut h = sample_header();
        for _ in 0..1000 {
            h.nonce = rng.random();
            seen.insert(header_hash(&h));
        }
        assert_eq!(seen.len(), 1000);
    }

    #[test]
    fn max_target_accepts_anything() {
        let mut h = sample_header();
        h.target = Target::MAX;
        assert!(check_pow(&h));
        let block = Block { header: h, transactions: vec![] };
        assert_eq!(mine_block(block.clone(), 7, 1).unwrap().header.nonce, 7);
        assert!(matches!(mine_block(block, 7, 0), Err(ConsensusError::Exhausted)));
    }

    #[test]
    fn acceptance_rate_eight_bits() {
        let mut h = sample_header();
        let trials = 100_000u64;
        let mut hits = 0u64;
        for nonce in 0..trials {
            h.nonce = nonce;
            hits += check_pow(&h) as u64;
        }
        let p = 1.0 / 256.0;
        let mean = trials as f64 * p;
        let sd = (trials as f64 * p * (1.0 - p)).sqrt();
        assert!((hits as f64 - mean).abs() <= 3.0 * sd, "{hits} hits");
    }

    #[test]
    fn sixteen_bit_search_cost() {
        let mut total = 0u64;
        for run in 0..50u64 {
            let mut h = sample_header();
            h.target = Target::from_leading_zero_bits(16).unwrap();
            h.timestamp += run;
            let mined = mine_block(Block { header: h, transactions: vec![] }, 0, u64::MAX).unwrap();
            assert!(check_pow(&mined.header));
            total += mined.header.nonce + 1;
        }
        let mean = total as f64 / 50.0;
        assert!((8192.0..=524_288.0).contains(&mean), "{mean}");
    }

    #[test]
    fn genesis() {
        let g = make_genesis(GENESIS_MESSAGE.as_bytes()).unwrap();
        assert_eq!(genesis_message(&g), Some(GENESIS_MESSAGE.as_bytes()));
        assert_eq!(g.header.prev_hash, Digest256::ZERO);
        assert!(check_pow(&g.header));
        assert_eq!(g.coinbase().unwrap().outputs[0].amount, reward_at_height(0));
        assert_eq!(g.compute_merkle_root().unwrap(), g.header.merkle_root);
        assert_eq!(make_genesis(GENESIS_MESSAGE.as_bytes()).unwrap().hash(), g.hash());

        let empty = make_genesis(b"").unwrap();
        assert_eq!(empty.coinbase().unwrap().outputs.len(), 1);
        assert_eq!(genesis_message(&empty), None);
        assert!(matches!(make_genesis(&[b'x'; 81]), Err(ConsensusError::MessageTooLong(81))));
    }

    #[test]
    fn block_round_trip_and_extra_nonce() {
        let cb = coinbase_transaction(5, 0, LockingScript::PayToPubKeyHash(hash160(b"m")), reward_at_height(5));
        assert_eq!(committed_height(&cb), Some(5));
        let merkle = merkle_root(&[txid(&cb)]).unwrap();
        let mut block = Block { header: BlockHeader { merkle_root: merkle, ..sample_header() }, transactions: vec![cb] };
        assert_eq!(Block::deserialize(&block.serialize()).unwrap(), block);
        let before = block.header.merkle_root;
        block.set_extra_nonce(9).unwrap();
        assert_ne!(block.header.merkle_root, before);
        assert_eq!(block.header.merkle_root, block.compute_merkle_root().unwrap());
        assert_eq!(committed_height(&block.transactions[0]), Some(5));
    }
}
