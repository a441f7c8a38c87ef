//! Reactive synthesis: parity automata and AIGER safety specifications are turned
//! into two-player games, solved, and the winning strategies are emitted as AIGER
//! controllers that can be independently model-checked.

pub mod aiger;
pub mod arena;
pub mod bench;
pub mod gen;
pub mod hoa;
pub mod pipeline;
pub mod solver;
pub mod synthesis;
pub mod verify;
