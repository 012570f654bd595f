//! B abstract machine model: syntax tree, emitter, reader and validator.

pub mod ast;
pub mod emit;
pub mod parse;
pub mod validate;

pub use ast::*;
pub use emit::{emit_expr, emit_machine, emit_machine_unicode, emit_pred, emit_subst, Emitter, Flavor};
pub use parse::{parse_expr, parse_machine, parse_pred, parse_subst, token_diff, tokens_equal, BParseError};
pub use validate::validate_machine;
