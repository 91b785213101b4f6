//! AWhile: a small while language with arrays, its sequential, speculative
//! and ideal semantics, IFC analyses, speculative load hardening passes and a
//! bounded checker for speculative security properties.

pub mod check;
pub mod cli;
pub mod fixtures;
pub mod flow;
pub mod harden;
pub mod ideal;
pub mod ifc;
pub mod label;
pub mod lang;
pub mod machine;
pub mod seq;
pub mod speculative;
pub mod state;
