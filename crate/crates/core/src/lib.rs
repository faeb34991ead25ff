//! Core of the logos verifier: a typed, many-sorted first-order logic DSL.
//!
//! Programs declare sorts, functions, constants, a knowledge base, rules,
//! verifications and an optional optimization block. This crate owns every
//! pure stage of the pipeline:
//!
//! - [`parser`]: expression strings to surface [`term::Term`]s
//! - [`model`]: the program data model and its canonical form
//! - [`typecheck`]: symbol table, sort resolution, scoping, typed programs
//! - [`normalize`]: logic-preserving simplification and prenex conversion
//! - [`smtlib`]: SMT-LIB2 script emission and solver output parsing
//! - [`finite`]: an exhaustive finite-domain model enumerator
//! - [`engine`]: backend-agnostic verification and differential comparison
//! - [`metrics`]: confusion-matrix metrics for labeled corpora
//!
//! The crate is `no_std` and only needs `alloc`; process management, file
//! formats and the command line live in the `logos` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod diagnostic;
pub mod engine;
pub mod finite;
#[cfg(test)]
mod fixtures;
pub mod metrics;
pub mod model;
pub mod normalize;
pub mod num;
pub mod parser;
pub mod query;
pub mod semantics;
pub mod smtlib;

pub mod term;
pub mod typecheck;
pub mod typed;
pub mod verdict;

pub use diagnostic::{Category, Diagnostic, SourceSpan};
pub use model::{canonicalize, Program};
pub use parser::parse_expression;
pub use term::Term;
pub use typecheck::{check_program, check_term, SymbolTable};
pub use typed::{Sort, TypedProgram, TypedTerm};
pub use verdict::{Status, Verdict};
