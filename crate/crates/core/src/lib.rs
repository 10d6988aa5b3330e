mod codec;
pub mod consensus;
pub mod ecc;
pub mod hashing;
pub mod ledger;
pub mod netsim;
pub mod notary;
pub mod u256;

pub use codec::DecodeError;
