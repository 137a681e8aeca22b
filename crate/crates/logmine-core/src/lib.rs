//! Core pipeline for mining block-structured process models from event logs
//! and compiling them into checkable temporal-logic specifications.
//!
//! The crate is `no_std` (with `alloc`) and purely algorithmic: event-log
//! ingestion from concrete file formats, subprocess handling and the CLI live
//! in the companion `logmine` crate.
//!
//! Pipeline stages, each usable on its own:
//!
//! ```text
//! EventLog --discover--> ProcessTree --extract--> PatternExpr
//!          --generate--> LogicalSpec --lower--> FOL --emit--> TPTP
//!                                             \--decide_sat--> Verdict
//! ```

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod event;
pub mod fol;
pub mod miner;
pub mod pattern;
pub mod pltl;
pub mod reasoner;
pub mod specgen;
pub mod tptp;
pub mod tree;
pub mod verdict;

pub use event::{Event, EventLog, Trace};
pub use fol::{lower, FolFormula};
pub use miner::{build_dfg, discover, DirectlyFollowsGraph};
pub use pattern::{extract, PatternExpr, PatternKind};
pub use pltl::TemporalFormula;
pub use specgen::{generate, LogicalSpec};
pub use tree::{tree_metrics, ProcessTree, TreeMetrics};
pub use verdict::{Engine, SzsStatus, Verdict};
