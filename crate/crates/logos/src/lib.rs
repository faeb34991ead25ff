//! Everything around the pure `logos-core` pipeline that touches the
//! outside world: JSON documents, solver processes, the HTTP reviser,
//! labeled corpora and report formats.

pub mod corpus;
pub mod emit;
pub mod json;
pub mod repair;
pub mod report;
pub mod settings;
pub mod solver;

pub use json::parse_program;
pub use settings::{BackendChoice, Settings};
