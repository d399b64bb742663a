//! A computability-logic (CL9) engine.
//!
//! Knowledgebases and queries are written as annotated formulas
//! ([`formula`]), provability is decided by backward search over
//! hyperformulas ([`hyper`], [`prover`]), proofs are executed as winning
//! strategies ([`runtime`], [`executor`]) and agents exchange queries and
//! moves over a line-based protocol ([`agentd`]).

pub mod agentd;
pub mod executor;
pub mod formula;
pub mod hyper;
pub mod prover;
pub mod runtime;
