//! Append-only chain file: a sequence of `len u32 LE | block bytes` records, genesis first.

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use super::block::Block;
use super::chain::{ChainEvent, ChainState};
use super::target::ChainParams;
use super::ConsensusError;
use crate::codec::DecodeError;

fn write_record(w: &mut impl Write, block: &Block) -> std::io::Result<()> {
    let bytes = block.serialize();
    w.write_all(&(bytes.len() as u32).to_le_bytes())?;
    w.write_all(&bytes)
}

/// Creates (or truncates) `path` with the given blocks.
pub fn write_chain<'a>(path: &Path, blocks: impl IntoIterator<Item = &'a Block>) -> Result<(), ConsensusError> {
    let mut w = BufWriter::new(File::create(path)?);
    for block in blocks {
        write_record(&mut w, block)?;
    }
    w.flush()?;
    Ok(())
}

pub fn append_block(path: &Path, block: &Block) -> Result<(), ConsensusError> {
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    write_record(&mut f, block)?;
    Ok(())
}

pub fn read_chain(path: &Path) -> Result<Vec<Block>, ConsensusError> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    let mut blocks = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let len_bytes = bytes.get(pos..pos + 4).ok_or(DecodeError::UnexpectedEnd(pos))?;
        let len = u32::from_le_bytes(len_bytes.try_into().unwrap()) as usize;
        pos += 4;
        let body = bytes.get(pos..pos + len).ok_or(DecodeError::UnexpectedEnd(pos))?;
        blocks.push(Block::deserialize(body)?);
        pos += len;
    }
    Ok(blocks)
}

/// Rebuilds a [`ChainState`] by connecting every stored block in file order.
/// Any block the chain refuses aborts the load.
pub fn load_chain(path: &Path, params: ChainParams) -> Result<ChainState, ConsensusError> {
    let mut blocks = read_chain(path)?.into_iter();
    let genesis = blocks.next().ok_or(ConsensusError::BadGenesis)?;
    let mut chain = ChainState::new(genesis, params)?;
    for block in blocks {
        for event in chain.connect_block(block) {
            if let ChainEvent::RejectedInvalid { hash, reason } = event {
                return Err(ConsensusError::Rejected { hash, source: reason });
            }
        }
    }
    Ok(chain)
}
