//! Top-down tree transducers with origin semantics.
//!
//! The crate runs transducers with origin tracking, measures how far two
//! computations drift apart (origin distance and output delay), and decides
//! k-origin inclusion, equivalence and uniformization by a deterministic
//! transducer. The decision procedures run an alternating safety automaton
//! over finite traces; bounded brute-force oracles cross-check them.
//!
//! Module map:
//!
//! * [`trees`]: ranked trees, addresses and the prefix algebra.
//! * [`textio`]: the `.tdtt` format, tree literals and DOT export.
//! * [`transducer`]: configurations, runs and origin mappings.
//! * [`measures`]: origin gap, delay and the brute-force oracles.
//! * [`oit`]: annotated output information trees and their operations.
//! * [`arena`]: the safety automaton over traces and the game arena.
//! * [`decision`]: inclusion, equivalence and uniformization.
//! * [`fixtures`]: the bundled example transducers.
//! * [`cli`]: the command-line front end used by the `tdtt` binary.

pub mod trees;
pub mod textio;
pub mod transducer;
pub mod measures;
pub mod oit;
pub mod arena;
pub mod decision;
pub mod fixtures;
pub mod cli;
