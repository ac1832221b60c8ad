//! Emulated quantum meet-in-the-middle attacks on reduced-scale Feistel
//! ciphers, with a modeled quantum cost ledger.

pub mod attack;
pub mod cost;
pub mod differential;
pub mod error;
pub mod feistel;
pub mod quantum;

pub use error::{Error, Result};
pub use feistel::{Block, CipherSpec, EncryptionOracle, RoundFunctions};
pub use quantum::{ClawMode, CostLedger};
