//! Core algorithms for depth- and swap-optimal qubit layout synthesis.
//!
//! Everything in this crate is pure and `no_std` (it needs `alloc`). Process
//! management, file formats and the command line live in the `qlayout` crate.
//!
//! The pipeline, bottom-up:
//!
//! - [`circuit`] and [`qasm`]: gate lists, dependency DAG, longest dependency chain.
//! - [`arch`]: undirected coupling graphs.
//! - [`features`]: the six-number circuit description used by the predictor.
//! - [`augment`]: chunking large circuits into training samples and AllKNN cleaning.
//! - [`regressor`]: CART regression trees.
//! - [`encode`]: QF_BV satisfiability scripts for "is there a mapping with depth
//!   at most `T_B` and at most `S_B` swaps".
//! - [`search`]: prediction-seeded bound search with dynamic variable sizing.
//! - [`model`] and [`solution`]: solver output parsing, decoding and an
//!   independent solution validator.

#![no_std]

extern crate alloc;

pub mod arch;
pub mod augment;
pub mod circuit;
pub mod encode;
pub mod features;
pub mod model;
pub mod qasm;
pub mod regressor;
pub mod search;
pub mod solution;

pub use arch::CouplingGraph;
pub use circuit::{Circuit, DependencyDag, Gate};
pub use features::FeatureVector;
pub use regressor::RegressionTree;
pub use solution::MappingSolution;

/// Number of bits needed to write `v` in binary (`bit_length(0) == 0`).
pub fn bit_length(v: u64) -> u32 {
    u64::BITS - v.leading_zeros()
}
