//! Distributed Markov chains.
//!
//! A distributed Markov chain is a network of probabilistic transition
//! systems that synchronize deterministically: every local state of every
//! agent enables exactly one action. This crate provides
//!
//! * the model structure, validation and its JSON format ([`model`]);
//! * the interleaved semantics and the global Markov chain ([`semantics`]);
//! * Mazurkiewicz traces and Foata normal forms ([`trace`]);
//! * cylinder probabilities and the trajectory-to-path map ([`measure`]);
//! * per-agent bounded LTL with probability thresholds ([`logic`]);
//! * a sequential probability ratio test model checker ([`smc`]);
//! * benchmark model builders ([`benchmarks`]) and random models ([`random`]).

pub mod benchmarks;
pub mod logic;
pub mod measure;
pub mod model;
pub mod prob;
pub mod random;
pub mod semantics;
pub mod smc;
pub mod trace;

pub use model::{ActionId, AgentId, DmcModel, GlobalState, LocalState, ModelBuilder, ModelError, UState};
pub use prob::{Prob, Weight};
