//! Desk-scale simulator of mode-division-multiplexed (MDM) photonic
//! weight banks: transfer-matrix field propagation, mode-selective
//! couplers, asymmetric Mach-Zehnder test structures, microring weight
//! banks with balanced-photodiode readout, intermodal mixing with its
//! calibration/compensation, and small recurrent networks built from
//! those parts.
//!
//! Everything is deterministic: randomized constructions (mixing
//! matrices, probe noise) derive from a single seed via ChaCha12.

pub mod config;
pub mod core;
pub mod coupler;
pub mod error;
pub mod io;
mod linalg;
pub mod mrr;
pub mod mzi;
pub mod network;
pub mod runner;
pub mod weightbank;

pub use crate::core::{Channel, ChannelGrid, ComplexField, TransferMatrix};
pub use crate::error::{Error, Result};
