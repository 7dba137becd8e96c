//! Interactive fault localization for answer-set programs.
//!
//! The pipeline is: [`parser`] reads a program and a failing test case,
//! [`instrument`] builds the debugging program and grounds it with
//! [`ground`], [`solver`] decides coherence, and [`diagnosis`] minimizes a
//! reason of incoherence, ranks user queries and maps the result back to
//! source rules.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod ast;
pub mod diagnosis;
pub mod ground;
pub mod instrument;
pub mod parser;
pub mod solver;

pub use ast::{Atom, Literal, Program, Rule, RuleId, Substitution, Term};
pub use ground::{ground, AtomId, GroundMode, GroundOptions, GroundProgram};
pub use parser::{parse_atom, parse_program, parse_test_case, TestCase};
