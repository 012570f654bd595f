//! Lexer, parser, typechecker and scheduler for the textual SCADE subset.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod schedule;
pub mod typecheck;
pub mod types;

use ast::{Expr, ExprKind, Span};
use std::fmt;

pub use parser::parse_program;
pub use printer::print_program;
pub use schedule::{dependency_order, Unit};
pub use typecheck::{typecheck, NodeInfo, Ports, Role, TypedProgram};
pub use types::{IntKind, Ty, TypeEnv};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrontendError {
    pub span: Span,
    pub message: String,
}

impl FrontendError {
    pub fn new(span: Span, message: impl Into<String>) -> Self {
        FrontendError {
            span,
            message: message.into(),
        }
    }
}

impl fmt::Display for FrontendError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.span.line, self.span.col, self.message)
    }
}

impl std::error::Error for FrontendError {}

/// Parse, typecheck and check every block for instantaneous cycles.
pub fn compile(src: &str) -> Result<TypedProgram, FrontendError> {
    let tp = typecheck(parse_program(src)?)?;
    for node in &tp.program.nodes {
        schedule::check_block(&node.body)?;
    }
    Ok(tp)
}

/// Pre-order walk over an expression and all its sub-expressions.
pub fn visit_expr(e: &Expr, f: &mut dyn FnMut(&Expr)) {
    f(e);
    match &e.kind {
        ExprKind::Unary(_, x) | ExprKind::Field(x, _) => visit_expr(x, f),
        ExprKind::Binary(_, l, r) | ExprKind::Index(l, r) => {
            visit_expr(l, f);
            visit_expr(r, f);
        }
        ExprKind::If(c, t, e2) => {
            visit_expr(c, f);
            visit_expr(t, f);
            visit_expr(e2, f);
        }
        ExprKind::Case(s, arms, d) => {
            visit_expr(s, f);
            for (_, b) in arms {
                visit_expr(b, f);
            }
            if let Some(d) = d {
                visit_expr(d, f);
            }
        }
        ExprKind::Fby(fb) => {
            visit_expr(&fb.input, f);
            visit_expr(&fb.init, f);
        }
        ExprKind::Make(_, args) | ExprKind::Array(args) => {
            for a in args {
                visit_expr(a, f);
            }
        }
        ExprKind::Hof(h) => {
            if let Some(c) = &h.cond {
                visit_expr(c, f);
            }
            for d in &h.defaults {
                visit_expr(d, f);
            }
            for a in &h.args {
                visit_expr(a, f);
            }
        }
        _ => {}
    }
}
