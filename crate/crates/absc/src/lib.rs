//! Construction and optimization of nested array-based spatially coupled
//! LDPC codes.
//!
//! The crate builds array-based parity-check matrices as grids of
//! circulants, edge-spreads them into terminated spatially coupled codes,
//! counts the 6-cycles behind the dominant absorbing sets both by brute
//! force and by an exact line-counting scheme, searches spreading matrices
//! and terminal lifts that remove those cycles, and evaluates the resulting
//! codes with belief propagation over an AWGN channel.
//!
//! See the `examples/` directory for one runnable program per capability,
//! and the `absc` binary for the batch pipeline.

pub mod ab;
pub mod alc;
pub mod census;
pub mod cli;
pub mod coupling;
pub mod gf2;
pub mod lift;
pub mod optimize;
pub mod sim;

use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("alist format error: {0}")]
    Alist(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
