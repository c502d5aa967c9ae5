//! Emptiness checking for timed automata and timed pushdown automata.
//!
//! Runs are abstracted as timed-constraint words (TCWs), TCWs are built by
//! tree terms of bounded width, and emptiness reduces to saturating a tree
//! automaton that accepts exactly the terms of realizable runs.

pub mod model;
pub mod tcw;
pub mod treeterm;
pub mod avalid;
pub mod asys;
pub mod engine;
pub mod oracle;
pub mod mazegen;
