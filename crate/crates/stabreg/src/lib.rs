//! File formats, parallel scanning and the `stabreg` command line on top of
//! `stabreg-core`.

pub mod cli;
pub mod export;
pub mod method_file;
pub mod parallel;

pub use stabreg_core as core;
