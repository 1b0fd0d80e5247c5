//! Command-line pipeline around `qlayout-core`: solver processes, file
//! formats, corpus building and benchmarking.

pub mod bench;
pub mod corpus;
pub mod io;
pub mod solver;

pub use qlayout_core as core;
