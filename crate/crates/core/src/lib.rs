//! Mutation-driven test-suite analytics.
//!
//! A test suite is treated as a set of constraints on the space of program
//! variants near the implemented program. Mutation runs probe that space:
//! the kill matrix records which variants each test rejects, survivor counts
//! bound the remaining freedom, and log-count metrics summarize how tightly
//! (and how evenly) the suite pins the implementation down.
//!
//! Module map:
//!
//! - [`mutagen`] - deterministic mutant enumeration, composition, patching
//! - [`toylang`] - the bundled toy language (lexer, parser, interpreter)
//! - [`harness`] - test discovery and sandboxed execution with deadlines
//! - [`store`] - single-file, append-only session store with resume
//! - [`matrix`] - kill-matrix model and survivor-set queries
//! - [`entropy`] - survivor entropy, entropy loss, information weights,
//!   tightness indexes, fuzzy-macrostate entropy
//! - [`graphlab`] - mutation graph and surviving-subgraph component stats
//! - [`spacelab`] - exact brute-force oracle over tiny program spaces
//! - [`interchange`] - versioned JSON interchange documents
//! - [`analysis`] - report and curve assembly over session data
//! - [`canon`] - canonical JSON emission

pub mod analysis;
pub mod canon;
pub mod entropy;
pub mod graphlab;
pub mod harness;
pub mod interchange;
pub mod matrix;
pub mod mutagen;
pub mod spacelab;
pub mod store;
pub mod toylang;
