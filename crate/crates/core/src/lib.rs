//! Translate a textual SCADE subset into B abstract machines.
//!
//! The crate holds the whole pipeline: a frontend for the SCADE subset, a B
//! machine model with an ASCII emitter, the translator between the two, an
//! interpreter for each language, a lock-step harness comparing them, and an
//! explicit-state invariant checker for the generated machines.

pub mod b_interp;
pub mod bmachine;
pub mod checker;
pub mod cli;
pub mod fixtures;
pub mod translator;
pub mod frontend;
pub mod harness;
pub mod scade_interp;
pub mod value;

pub use value::Value;
