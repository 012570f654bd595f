//! Pretty printer for machines, substitutions, predicates and expressions.
//!
//! Output uses four-space indentation and the minimal parenthesisation that
//! the parser in this module reads back to the same tree.

use super::ast::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Flavor {
    #[default]
    Ascii,
    Unicode,
}

struct Syms {
    and: &'static str,
    or: &'static str,
    implies: &'static str,
    not: &'static str,
    member: &'static str,
    not_member: &'static str,
    ne: &'static str,
    le: &'static str,
    ge: &'static str,
    total_fun: &'static str,
    maplet: &'static str,
    forall: &'static str,
    returns: &'static str,
    parallel: &'static str,
    product: &'static str,
}

const ASCII: Syms = Syms {
    and: "&",
    or: "or",
    implies: "=>",
    not: "not",
    member: ":",
    not_member: "/:",
    ne: "/=",
    le: "<=",
    ge: ">=",
    total_fun: "-->",
    maplet: "|->",
    forall: "!",
    returns: "<--",
    parallel: "||",
    product: "*",
};

const UNICODE: Syms = Syms {
    and: "∧",
    or: "∨",
    implies: "⇒",
    not: "¬",
    member: "∈",
    not_member: "∉",
    ne: "≠",
    le: "≤",
    ge: "≥",
    total_fun: "→",
    maplet: "↦",
    forall: "∀",
    returns: "←",
    parallel: "∥",
    product: "×",
};

const INDENT: &str = "    ";

pub struct Emitter {
    syms: &'static Syms,
}

impl Emitter {
    pub fn new(flavor: Flavor) -> Self {
        Emitter {
            syms: match flavor {
                Flavor::Ascii => &ASCII,
                Flavor::Unicode => &UNICODE,
            },
        }
    }

    pub fn machine(&self, m: &Machine) -> String {
        let mut out = String::new();
        out.push_str("MACHINE\n");
        out.push_str(&format!("{INDENT}{}\n", m.name));
        if !m.sets.is_empty() {
            out.push_str("\nSETS\n");
            let decls: Vec<String> = m
                .sets
                .iter()
                .map(|(n, ms)| format!("{INDENT}{n} = {{{}}}", ms.join(", ")))
                .collect();
            out.push_str(&decls.join(";\n"));
            out.push('\n');
        }
        if !m.constants.is_empty() {
            out.push_str(&format!("\nCONSTANTS\n{INDENT}{}\n", m.constants.join(", ")));
        }
        if !m.properties.is_empty() {
            out.push_str("\nPROPERTIES\n");
            out.push_str(&self.conjunct_lines(&m.properties, INDENT));
            out.push('\n');
        }
        if !m.variables.is_empty() {
            out.push_str(&format!("\nVARIABLES\n{INDENT}{}\n", m.variables.join(", ")));
        }
        if !m.invariant.is_empty() {
            out.push_str("\nINVARIANT\n");
            out.push_str(&self.conjunct_lines(&m.invariant, INDENT));
            out.push('\n');
        }
        if !m.variables.is_empty() || m.initialisation != Subst::Skip {
            out.push_str("\nINITIALISATION\n");
            self.subst_into(&mut out, &m.initialisation, 1);
            out.push('\n');
        }
        if !m.operations.is_empty() {
            out.push_str("\nOPERATIONS\n");
            let ops: Vec<String> = m.operations.iter().map(|o| self.operation(o)).collect();
            out.push_str(&ops.join(";\n\n"));
            out.push('\n');
        }
        out.push_str("END\n");
        out
    }

    fn conjunct_lines(&self, ps: &[Pred], indent: &str) -> String {
        ps.iter()
            .map(|p| format!("{indent}{}", self.pred_at(p, PredCtx::AndOperand)))
            .collect::<Vec<_>>()
            .join(&format!(" {}\n", self.syms.and))
    }

    pub fn operation(&self, o: &Operation) -> String {
        let mut out = String::from(INDENT);
        if !o.outputs.is_empty() {
            out.push_str(&format!("{} {} ", o.outputs.join(", "), self.syms.returns));
        }
        out.push_str(&o.name);
        if !o.params.is_empty() {
            out.push_str(&format!("({})", o.params.join(", ")));
        }
        out.push_str(" =\n");
        let inner = format!("{INDENT}{INDENT}");
        if o.pre.is_empty() {
            out.push_str(&format!("{INDENT}BEGIN\n"));
        } else {
            out.push_str(&format!("{INDENT}PRE\n"));
            out.push_str(&self.conjunct_lines(&o.pre, &inner));
            out.push_str(&format!("\n{INDENT}THEN\n"));
        }
        self.subst_into(&mut out, &o.body, 2);
        out.push_str(&format!("\n{INDENT}END"));
        out
    }

    pub fn subst(&self, s: &Subst) -> String {
        let mut out = String::new();
        self.subst_into(&mut out, s, 0);
        out
    }

    fn subst_into(&self, out: &mut String, s: &Subst, depth: usize) {
        let pad = INDENT.repeat(depth);
        match s {
            Subst::Skip => out.push_str(&format!("{pad}skip")),
            Subst::Assign(lv, e) => {
                out.push_str(&format!("{pad}{} := {}", self.lvalue(lv), self.expr(e)));
            }
            Subst::Seq(items) => {
                for (k, item) in items.iter().enumerate() {
                    if k > 0 {
                        out.push_str(";\n");
                    }
                    if matches!(item, Subst::Seq(_)) {
                        self.block_into(out, item, depth);
                    } else {
                        self.subst_into(out, item, depth);
                    }
                }
            }
            Subst::Parallel(items) => {
                for (k, item) in items.iter().enumerate() {
                    if k > 0 {
                        out.push_str(&format!(" {}\n", self.syms.parallel));
                    }
                    if matches!(item, Subst::Seq(_) | Subst::Parallel(_)) {
                        self.block_into(out, item, depth);
                    } else {
                        self.subst_into(out, item, depth);
                    }
                }
            }
            Subst::If {
                branches,
                else_branch,
            } => {
                for (k, (c, body)) in branches.iter().enumerate() {
                    let kw = if k == 0 { "IF" } else { "ELSIF" };
                    if k == 0 {
                        out.push_str(&pad);
                    } else {
                        out.push_str(&format!("\n{pad}"));
                    }
                    out.push_str(&format!("{kw} {} THEN\n", self.pred(c)));
                    self.subst_into(out, body, depth + 1);
                }
                if let Some(e) = else_branch {
                    out.push_str(&format!("\n{pad}ELSE\n"));
                    self.subst_into(out, e, depth + 1);
                }
                out.push_str(&format!("\n{pad}END"));
            }
            Subst::Case {
                scrutinee,
                arms,
                else_branch,
            } => {
                let arm_pad = INDENT.repeat(depth + 1);
                out.push_str(&format!("{pad}CASE {} OF\n", self.expr(scrutinee)));
                for (k, (lits, body)) in arms.iter().enumerate() {
                    let kw = if k == 0 { "EITHER" } else { "OR" };
                    let lits: Vec<String> = lits.iter().map(|l| self.expr(l)).collect();
                    out.push_str(&format!("{arm_pad}{kw} {} THEN\n", lits.join(", ")));
                    self.subst_into(out, body, depth + 2);
                    out.push('\n');
                }
                if let Some(e) = else_branch {
                    out.push_str(&format!("{arm_pad}ELSE\n"));
                    self.subst_into(out, e, depth + 2);
                    out.push('\n');
                }
                out.push_str(&format!("{arm_pad}END\n{pad}END"));
            }
            Subst::While {
                cond,
                body,
                invariant,
                variant,
            } => {
                let inner = INDENT.repeat(depth + 1);
                out.push_str(&format!("{pad}WHILE {} DO\n", self.pred(cond)));
                self.subst_into(out, body, depth + 1);
                if let Some(inv) = invariant {
                    out.push_str(&format!("\n{pad}INVARIANT\n{inner}{}", self.pred(inv)));
                }
                if let Some(v) = variant {
                    out.push_str(&format!("\n{pad}VARIANT\n{inner}{}", self.expr(v)));
                }
                out.push_str(&format!("\n{pad}END"));
            }
            Subst::Var { names, body } => {
                out.push_str(&format!("{pad}VAR {} IN\n", names.join(", ")));
                self.subst_into(out, body, depth + 1);
                out.push_str(&format!("\n{pad}END"));
            }
            Subst::OpCall { outputs, op, args } => {
                out.push_str(&pad);
                if !outputs.is_empty() {
                    out.push_str(&format!("{} {} ", outputs.join(", "), self.syms.returns));
                }
                out.push_str(op);
                if !args.is_empty() {
                    let args: Vec<String> = args.iter().map(|a| self.expr(a)).collect();
                    out.push_str(&format!("({})", args.join(", ")));
                }
            }
        }
    }

    fn block_into(&self, out: &mut String, s: &Subst, depth: usize) {
        let pad = INDENT.repeat(depth);
        out.push_str(&format!("{pad}BEGIN\n"));
        self.subst_into(out, s, depth + 1);
        out.push_str(&format!("\n{pad}END"));
    }

    pub fn lvalue(&self, lv: &LValue) -> String {
        let mut s = lv.root.clone();
        for a in &lv.path {
            match a {
                Access::Index(i) => s.push_str(&format!("({})", self.expr(i))),
                Access::Field(f) => s.push_str(&format!("'{f}")),
            }
        }
        s
    }

    pub fn pred(&self, p: &Pred) -> String {
        self.pred_at(p, PredCtx::Top)
    }

    fn pred_at(&self, p: &Pred, ctx: PredCtx) -> String {
        let needs_parens = match (p, ctx) {
            (_, PredCtx::Top) => false,
            (Pred::Implies(..), _) => true,
            (Pred::Or(..), PredCtx::AndOperand | PredCtx::AndRight) => true,
            (Pred::And(..), PredCtx::OrOperand | PredCtx::OrRight | PredCtx::AndRight) => true,
            (Pred::Or(..), PredCtx::OrRight) => true,
            _ => false,
        };
        let s = self.pred_raw(p);
        if needs_parens {
            format!("({s})")
        } else {
            s
        }
    }

    fn pred_raw(&self, p: &Pred) -> String {
        let y = self.syms;
        match p {
            Pred::True => "btrue".into(),
            Pred::False => "bfalse".into(),
            Pred::And(a, b) => format!(
                "{} {} {}",
                self.pred_at(a, PredCtx::AndOperand),
                y.and,
                self.pred_at(b, PredCtx::AndRight)
            ),
            Pred::Or(a, b) => format!(
                "{} {} {}",
                self.pred_at(a, PredCtx::OrOperand),
                y.or,
                self.pred_at(b, PredCtx::OrRight)
            ),
            Pred::Implies(a, b) => format!(
                "{} {} {}",
                self.pred_at(a, PredCtx::ImpliesOperand),
                y.implies,
                self.pred_at(b, PredCtx::ImpliesOperand)
            ),
            Pred::Not(a) => format!("{}({})", y.not, self.pred(a)),
            Pred::Cmp(op, a, b) => {
                let sym = match op {
                    CmpOp::Eq => "=",
                    CmpOp::Ne => y.ne,
                    CmpOp::Lt => "<",
                    CmpOp::Le => y.le,
                    CmpOp::Gt => ">",
                    CmpOp::Ge => y.ge,
                };
                format!("{} {sym} {}", self.expr(a), self.expr(b))
            }
            Pred::Member(a, s) => format!("{} {} {}", self.expr(a), y.member, self.expr(s)),
            Pred::NotMember(a, s) => {
                format!("{} {} {}", self.expr(a), y.not_member, self.expr(s))
            }
            Pred::Forall {
                var,
                lo,
                hi,
                guard,
                body,
            } => {
                let dom = BExpr::interval(lo.clone(), hi.clone());
                let mut lhs = format!("{var} {} {}", y.member, self.expr(&dom));
                if let Some(g) = guard {
                    lhs = format!("{lhs} {} {}", y.and, self.pred_at(g, PredCtx::AndRight));
                }
                format!(
                    "{}{var}.({lhs} {} {})",
                    y.forall,
                    y.implies,
                    self.pred_at(body, PredCtx::ImpliesOperand)
                )
            }
        }
    }

    pub fn expr(&self, e: &BExpr) -> String {
        self.expr_at(e, 0)
    }

    fn expr_at(&self, e: &BExpr, min: u8) -> String {
        let s = self.expr_raw(e);
        if level(e) < min {
            format!("({s})")
        } else {
            s
        }
    }

    fn bound(&self, e: &BExpr) -> String {
        let simple = level(e) >= 6 && !matches!(e, BExpr::Int(n) if *n < 0);
        if simple {
            self.expr_raw(e)
        } else {
            format!("({})", self.expr_raw(e))
        }
    }

    fn expr_raw(&self, e: &BExpr) -> String {
        let y = self.syms;
        match e {
            BExpr::Int(n) => n.to_string(),
            BExpr::Bool(true) => "TRUE".into(),
            BExpr::Bool(false) => "FALSE".into(),
            BExpr::Ident(s) => s.clone(),
            BExpr::Neg(x) => match **x {
                BExpr::Int(_) => format!("-({})", self.expr(x)),
                _ => format!("-{}", self.expr_at(x, 6)),
            },
            BExpr::Arith(op, a, b) => {
                let (sym, lv) = match op {
                    ArithOp::Add => ("+", 3),
                    ArithOp::Sub => ("-", 3),
                    ArithOp::Mul => ("*", 4),
                    ArithOp::Div => ("/", 4),
                    ArithOp::Mod => ("mod", 4),
                };
                let rhs = match (op, &**b) {
                    (ArithOp::Mul, BExpr::Maplets(_)) => format!("({})", self.expr(b)),
                    _ => self.expr_at(b, lv + 1),
                };
                format!("{} {sym} {rhs}", self.expr_at(a, lv))
            }
            BExpr::Apply(f, i) => format!("{}({})", self.expr_at(f, 6), self.expr(i)),
            BExpr::Field(r, f) => format!("{}'{f}", self.expr_at(r, 6)),
            BExpr::Rec(fs) => {
                let fs: Vec<String> = fs.iter().map(|(n, v)| format!("{n}: {}", self.expr(v))).collect();
                format!("rec({})", fs.join(", "))
            }
            BExpr::Struct(fs) => {
                let fs: Vec<String> = fs.iter().map(|(n, v)| format!("{n}: {}", self.expr(v))).collect();
                format!("struct({})", fs.join(", "))
            }
            BExpr::Maplets(ms) => {
                let ms: Vec<String> = ms
                    .iter()
                    .map(|(k, v)| format!("{} {} {}", self.expr_at(k, 3), y.maplet, self.expr_at(v, 3)))
                    .collect();
                format!("{{{}}}", ms.join(", "))
            }
            BExpr::ConstFunction { lo, hi, value } => format!(
                "({}..{}) {} {{{}}}",
                self.bound(lo),
                self.bound(hi),
                y.product,
                self.expr(value)
            ),
            BExpr::Interval(lo, hi) => format!("{}..{}", self.bound(lo), self.bound(hi)),
            BExpr::TotalFun(a, b) => {
                format!("{} {} {}", self.expr_at(a, 2), y.total_fun, self.expr_at(b, 2))
            }
            BExpr::BoolOf(p) => format!("bool({})", self.pred(p)),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum PredCtx {
    Top,
    AndOperand,
    AndRight,
    OrOperand,
    OrRight,
    ImpliesOperand,
}

/// Binding strength of an expression's outermost operator.
fn level(e: &BExpr) -> u8 {
    match e {
        BExpr::TotalFun(..) => 1,
        BExpr::Interval(..) => 2,
        BExpr::Arith(ArithOp::Add | ArithOp::Sub, ..) => 3,
        BExpr::Arith(..) | BExpr::ConstFunction { .. } => 4,
        BExpr::Neg(_) => 5,
        BExpr::Int(n) if *n < 0 => 5,
        BExpr::Apply(..) | BExpr::Field(..) => 6,
        _ => 7,
    }
}

pub fn emit_machine(m: &Machine) -> String {
    Emitter::new(Flavor::Ascii).machine(m)
}

pub fn emit_machine_unicode(m: &Machine) -> String {
    Emitter::new(Flavor::Unicode).machine(m)
}

pub fn emit_pred(p: &Pred) -> String {
    Emitter::new(Flavor::Ascii).pred(p)
}

pub fn emit_expr(e: &BExpr) -> String {
    Emitter::new(Flavor::Ascii).expr(e)
}

pub fn emit_subst(s: &Subst) -> String {
    Emitter::new(Flavor::Ascii).subst(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> BExpr {
        BExpr::ident(s)
    }

    #[test]
    fn interval_bounds_are_parenthesised_when_compound() {
        let e = BExpr::total_fun(
            BExpr::interval(BExpr::Int(0), BExpr::sub(id("MAX_SIZE"), BExpr::Int(1))),
            id("uint8_t"),
        );
        assert_eq!(emit_expr(&e), "0..(MAX_SIZE - 1) --> uint8_t");
    }

    #[test]
    fn implication_inside_conjunction_gets_parentheses() {
        let p = Pred::and(
            Pred::member(id("x"), id("BOOL")),
            Pred::implies(Pred::eq(id("a"), id("b")), Pred::eq(id("c"), id("d"))),
        );
        assert_eq!(emit_pred(&p), "x : BOOL & (a = b => c = d)");
    }

    #[test]
    fn arithmetic_keeps_left_associativity() {
        let e = BExpr::sub(id("a"), BExpr::sub(id("b"), id("c")));
        assert_eq!(emit_expr(&e), "a - (b - c)");
        let e = BExpr::sub(BExpr::sub(id("a"), id("b")), id("c"));
        assert_eq!(emit_expr(&e), "a - b - c");
    }

    #[test]
    fn forall_and_const_function() {
        let p = Pred::Forall {
            var: "i".into(),
            lo: BExpr::Int(0),
            hi: BExpr::sub(id("idx"), BExpr::Int(1)),
            guard: None,
            body: Box::new(Pred::eq(BExpr::apply(id("v"), id("i")), BExpr::Int(0))),
        };
        assert_eq!(emit_pred(&p), "!i.(i : 0..(idx - 1) => v(i) = 0)");
        let e = BExpr::ConstFunction {
            lo: Box::new(BExpr::Int(0)),
            hi: Box::new(BExpr::Int(4)),
            value: Box::new(BExpr::Int(7)),
        };
        assert_eq!(emit_expr(&e), "(0..4) * {7}");
    }

    #[test]
    fn unicode_flavor_swaps_symbols() {
        let p = Pred::and(
            Pred::member(id("s"), BExpr::total_fun(id("A"), id("B"))),
            Pred::Cmp(CmpOp::Ne, id("a"), id("b")),
        );
        assert_eq!(Emitter::new(Flavor::Unicode).pred(&p), "s ∈ A → B ∧ a ≠ b");
    }

    #[test]
    fn case_layout() {
        let s = Subst::Case {
            scrutinee: id("st"),
            arms: vec![
                (vec![id("A")], Subst::assign("x", BExpr::Int(1))),
                (vec![id("B"), id("C")], Subst::Skip),
            ],
            else_branch: None,
        };
        assert_eq!(
            emit_subst(&s),
            "CASE st OF\n    EITHER A THEN\n        x := 1\n    OR B, C THEN\n        skip\n    END\nEND"
        );
    }
}
