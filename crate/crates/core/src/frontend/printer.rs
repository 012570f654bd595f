//! Canonical pretty-printer. Its output parses back to an equal tree.

use super::ast::*;
use std::fmt::Write;

pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    if let Some(m) = &p.pragmas.machine {
        let _ = writeln!(out, "--@machine {m}");
    }
    for (a, v) in &p.pragmas.state_vars {
        let _ = writeln!(out, "--@state-var {a} {v}");
    }
    for (inv, _) in &p.pragmas.invariants {
        let _ = writeln!(out, "--@invariant {inv}");
    }
    for t in &p.types {
        let def = match &t.def {
            TypeDef::Enum(ms) => format!("enum {{{}}}", ms.join(", ")),
            TypeDef::Struct(fs) => {
                let fields: Vec<String> = fs
                    .iter()
                    .map(|(f, ty)| format!("{f}: {}", print_type(ty)))
                    .collect();
                format!("{{{}}}", fields.join(", "))
            }
            TypeDef::Alias(ty) => print_type(ty),
        };
        let _ = writeln!(out, "type {} = {def};", t.name);
    }
    for c in &p.consts {
        let _ = writeln!(
            out,
            "const {}: {} = {};",
            c.name,
            print_type(&c.ty),
            print_expr(&c.value)
        );
    }
    for n in &p.nodes {
        out.push('\n');
        print_node(&mut out, n);
    }
    out
}

pub fn print_type(t: &TypeExpr) -> String {
    match t {
        TypeExpr::Base(b) => b.keyword().to_string(),
        TypeExpr::Named(n, _) => n.clone(),
        TypeExpr::Array(elem, size) => format!("{}^{}", print_type(elem), print_size(size)),
    }
}

fn print_size(s: &SizeExpr) -> String {
    match s {
        SizeExpr::Lit(v) => v.to_string(),
        SizeExpr::Const(n, _) => n.clone(),
    }
}

fn signature(decls: &[VarDecl]) -> String {
    decls
        .iter()
        .map(|d| format!("{}: {}", d.name, print_type(&d.ty)))
        .collect::<Vec<_>>()
        .join("; ")
}

fn print_node(out: &mut String, n: &NodeDecl) {
    let kw = if n.is_function { "function" } else { "node" };
    let _ = write!(
        out,
        "{kw} {}({}) returns ({})",
        n.name,
        signature(&n.inputs),
        signature(&n.outputs)
    );
    if n.body.locals.is_empty() && n.body.items.is_empty() {
        out.push_str(";\n");
        return;
    }
    out.push('\n');
    print_block(out, &n.body, 0);
    out.push_str(";\n");
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn print_block(out: &mut String, b: &Block, level: usize) {
    if !b.locals.is_empty() {
        indent(out, level);
        out.push_str("var\n");
        for d in &b.locals {
            indent(out, level + 1);
            let _ = writeln!(out, "{}: {};", d.name, print_type(&d.ty));
        }
    }
    indent(out, level);
    out.push_str("let\n");
    for item in &b.items {
        print_item(out, item, level + 1);
    }
    indent(out, level);
    out.push_str("tel");
}

fn print_item(out: &mut String, item: &BodyItem, level: usize) {
    match item {
        BodyItem::Equation(eq) => {
            indent(out, level);
            let lhs: Vec<&str> = eq.lhs.iter().map(|l| l.name().unwrap_or("_")).collect();
            let _ = writeln!(out, "{} = {};", lhs.join(", "), print_expr(&eq.rhs));
        }
        BodyItem::Activate(a) => print_activate(out, a, level),
        BodyItem::Automaton(sm) => {
            indent(out, level);
            let _ = writeln!(out, "automaton {}", sm.name);
            for st in &sm.states {
                indent(out, level + 1);
                if st.initial {
                    out.push_str("initial ");
                }
                let _ = writeln!(out, "state {}", st.name);
                if !st.unless.is_empty() {
                    indent(out, level + 2);
                    out.push_str("unless\n");
                    for t in &st.unless {
                        indent(out, level + 3);
                        let _ = writeln!(
                            out,
                            "if {} restart {};",
                            print_expr(&t.cond),
                            t.target
                        );
                    }
                }
                if !st.body.locals.is_empty() || !st.body.items.is_empty() {
                    print_block(out, &st.body, level + 2);
                    out.push('\n');
                }
            }
            indent(out, level);
            out.push_str("returns .. ;\n");
        }
    }
}

fn print_activate(out: &mut String, a: &Activate, level: usize) {
    indent(out, level);
    out.push_str("activate ");
    if let Some(n) = &a.name {
        out.push_str(n);
        out.push(' ');
    }
    let _ = writeln!(out, "if {} then", print_expr(&a.cond));
    print_branch(out, &a.then_branch, level + 1);
    indent(out, level);
    out.push_str("else\n");
    print_branch(out, &a.else_branch, level + 1);
    indent(out, level);
    out.push_str("returns .. ;\n");
}

fn print_branch(out: &mut String, b: &Block, level: usize) {
    if let ([BodyItem::Activate(nested)], true) = (b.items.as_slice(), b.locals.is_empty()) {
        print_activate(out, nested, level);
    } else {
        print_block(out, b, level);
        out.push('\n');
    }
}

fn prec(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::If(..) => 0,
        ExprKind::Binary(op, ..) => match op {
            BinOp::Or => 1,
            BinOp::And => 2,
            o if o.is_comparison() => 4,
            BinOp::Add | BinOp::Sub => 5,
            _ => 6,
        },
        ExprKind::Unary(UnOp::Not, _) => 3,
        ExprKind::Unary(UnOp::Neg, _) => 7,
        ExprKind::Int(v) if *v < 0 => 7,
        _ => 8,
    }
}

pub fn print_expr(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, 0);
    s
}

fn write_expr(out: &mut String, e: &Expr, min: u8) {
    let p = prec(e);
    if p < min {
        out.push('(');
        write_expr(out, e, 0);
        out.push(')');
        return;
    }
    match &e.kind {
        ExprKind::Int(v) => {
            let _ = write!(out, "{v}");
        }
        ExprKind::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        ExprKind::Ident(n) | ExprKind::Var(n) | ExprKind::Const(n) | ExprKind::Member(n) => {
            out.push_str(n)
        }
        ExprKind::Unary(UnOp::Not, x) => {
            out.push_str("not ");
            write_expr(out, x, 3);
        }
        ExprKind::Unary(UnOp::Neg, x) => {
            out.push('-');
            write_expr(out, x, 7);
        }
        ExprKind::Binary(op, l, r) => {
            let (lmin, rmin) = if op.is_comparison() { (5, 5) } else { (p, p + 1) };
            write_expr(out, l, lmin);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(out, r, rmin);
        }
        ExprKind::If(c, t, f) => {
            out.push_str("if ");
            write_expr(out, c, 0);
            out.push_str(" then ");
            write_expr(out, t, 0);
            out.push_str(" else ");
            write_expr(out, f, 0);
        }
        ExprKind::Case(s, arms, default) => {
            out.push_str("(case ");
            write_expr(out, s, 0);
            out.push_str(" of");
            for (pat, body) in arms {
                out.push_str(" | ");
                match pat {
                    Pattern::Int(v) => {
                        let _ = write!(out, "{v}");
                    }
                    Pattern::Bool(b) => {
                        let _ = write!(out, "{b}");
                    }
                    Pattern::Member(m) => out.push_str(m),
                }
                out.push_str(" : ");
                write_expr(out, body, 0);
            }
            if let Some(d) = default {
                out.push_str(" | _ : ");
                write_expr(out, d, 0);
            }
            out.push(')');
        }
        ExprKind::Fby(f) => {
            out.push_str("fby(");
            write_expr(out, &f.input, 0);
            let _ = write!(out, "; {}; ", print_size(&f.depth));
            write_expr(out, &f.init, 0);
            out.push(')');
        }
        ExprKind::Make(ty, args) => {
            let _ = write!(out, "(make {ty})");
            write_args(out, args);
        }
        ExprKind::Field(x, f) => {
            write_expr(out, x, 8);
            let _ = write!(out, ".{f}");
        }
        ExprKind::Index(x, i) => {
            write_expr(out, x, 8);
            out.push('[');
            write_expr(out, i, 0);
            out.push(']');
        }
        ExprKind::Array(cells) => {
            out.push('[');
            for (k, c) in cells.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                write_expr(out, c, 0);
            }
            out.push(']');
        }
        ExprKind::Hof(h) => {
            let _ = write!(out, "({}", h.kind.keyword());
            if h.kind.family() == HofFamily::MapFold {
                let _ = write!(out, " {}", h.accs);
            }
            let _ = write!(out, " {} <<{}>>", h.op, print_size(&h.size));
            if let Some(c) = &h.cond {
                out.push_str(" if ");
                write_expr(out, c, 1);
            }
            if !h.defaults.is_empty() {
                out.push_str(" default ");
                write_args(out, &h.defaults);
            }
            out.push(')');
            write_args(out, &h.args);
        }
    }
}

fn write_args(out: &mut String, args: &[Expr]) {
    out.push('(');
    for (k, a) in args.iter().enumerate() {
        if k > 0 {
            out.push_str(", ");
        }
        write_expr(out, a, 0);
    }
    out.push(')');
}

#[cfg(test)]
mod tests {
    use super::super::parser::parse_program;
    use super::*;

    fn round_trip(src: &str) {
        let a = parse_program(src).unwrap();
        let printed = print_program(&a);
        let b = parse_program(&printed).unwrap_or_else(|e| panic!("{e}\n{printed}"));
        assert_eq!(a, b, "{printed}");
    }

    #[test]
    fn expressions_keep_their_shape() {
        round_trip(
            "node n(a: int32; b: bool) returns (c: int32)
             let c = -(a - (a - 1)) * (if b then 1 else 2) + (case a of | 1 : 2 | -3 : 4 | _ : 5) - -a; tel",
        );
    }

    #[test]
    fn nested_activate_and_automaton() {
        round_trip(
            "type E = enum {P, Q};
             node n(x: int32) returns (y: int32)
             let
               activate A if x = 0 then let y = 1; tel
               else activate if x = 1 then var t: int32; let t = 2; y = t; tel else let y = 3; tel returns .. ;
               returns .. ;
             tel
             node m(x: int32) returns (y: int32)
             let automaton S initial state I unless if x > 0 restart J; state J let y = 1; tel returns .. ; tel",
        );
    }
}
