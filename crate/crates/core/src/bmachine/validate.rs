//! Structural well-formedness checks on a machine.

use super::ast::*;
use super::emit::Emitter;
use std::collections::{BTreeSet, HashSet};

const BUILTINS: &[&str] = &["BOOL", "INTEGER", "NATURAL", "NATURAL1", "NAT", "NAT1", "INT", "MAXINT", "MININT"];

struct Scope<'m> {
    global: HashSet<&'m str>,
    diags: Vec<String>,
    emitter: Emitter,
}

/// Returns one message per problem found; an empty list means well formed.
pub fn validate_machine(m: &Machine) -> Vec<String> {
    let mut diags = Vec::new();
    let mut names: Vec<(&str, &str)> = Vec::new();
    for (s, members) in &m.sets {
        names.push((s, "set"));
        for x in members {
            names.push((x, "set member"));
        }
    }
    names.extend(m.constants.iter().map(|c| (c.as_str(), "constant")));
    names.extend(m.variables.iter().map(|v| (v.as_str(), "variable")));
    names.extend(m.operations.iter().map(|o| (o.name.as_str(), "operation")));
    let mut seen: HashSet<&str> = HashSet::new();
    for (n, what) in &names {
        if BUILTINS.contains(n) {
            diags.push(format!("{what} `{n}` shadows a predefined set"));
        }
        if !seen.insert(n) {
            diags.push(format!("duplicate name: {n}"));
        }
    }

    let mut scope = Scope {
        global: names.iter().map(|(n, _)| *n).chain(BUILTINS.iter().copied()).collect(),
        diags,
        emitter: Emitter::new(Default::default()),
    };

    for c in &m.constants {
        if !m.properties.iter().any(|p| defines(p, c)) {
            scope.diags.push(format!("constant not valued in PROPERTIES: {c}"));
        }
    }
    for v in &m.variables {
        let n = m.invariant.iter().filter(|p| types_var(p, v)).count();
        if n == 0 {
            scope.diags.push(format!("variable not typed in INVARIANT: {v}"));
        } else if n > 1 {
            scope.diags.push(format!("variable typed more than once: {v}"));
        }
    }
    let mut written = Vec::new();
    m.initialisation.written_roots(&mut written);
    for v in &m.variables {
        if !written.contains(v) {
            scope.diags.push(format!("variable not initialised: {v}"));
        }
    }

    let none: Vec<String> = Vec::new();
    for p in &m.properties {
        scope.pred(p, &none, "PROPERTIES");
    }
    for p in &m.invariant {
        scope.pred(p, &none, "INVARIANT");
    }
    scope.subst(&m.initialisation, &none, "INITIALISATION", m, false);

    for o in &m.operations {
        let ctx = format!("operation {}", o.name);
        let mut local: Vec<String> = o.params.clone();
        local.extend(o.outputs.iter().cloned());
        for p in &o.params {
            if !o.pre.iter().any(|c| types_var(c, p)) {
                scope.diags.push(format!("{ctx}: parameter not typed: {p}"));
            }
        }
        for c in &o.pre {
            scope.pred(c, &local, &ctx);
        }
        let mut w = Vec::new();
        o.body.written_roots(&mut w);
        for p in &o.params {
            if w.contains(p) {
                scope.diags.push(format!("{ctx}: parameter is assigned: {p}"));
            }
        }
        scope.subst(&o.body, &local, &ctx, m, true);
    }
    scope.diags
}

fn types_var(p: &Pred, v: &str) -> bool {
    matches!(p, Pred::Member(BExpr::Ident(x), _) if x == v)
}

fn defines(p: &Pred, c: &str) -> bool {
    matches!(p, Pred::Cmp(CmpOp::Eq, BExpr::Ident(x), _) if x == c)
}

impl Scope<'_> {
    fn known(&self, name: &str, local: &[String]) -> bool {
        self.global.contains(name) || local.iter().any(|l| l == name)
    }

    fn expr(&mut self, e: &BExpr, local: &[String], ctx: &str) {
        match e {
            BExpr::Int(_) | BExpr::Bool(_) => {}
            BExpr::Ident(s) => {
                if !self.known(s, local) {
                    self.diags.push(format!("{ctx}: unknown identifier: {s}"));
                }
            }
            BExpr::Neg(x) | BExpr::Field(x, _) => self.expr(x, local, ctx),
            BExpr::Arith(_, a, b)
            | BExpr::Apply(a, b)
            | BExpr::Interval(a, b)
            | BExpr::TotalFun(a, b) => {
                self.expr(a, local, ctx);
                self.expr(b, local, ctx);
            }
            BExpr::Rec(fs) | BExpr::Struct(fs) => {
                for (_, v) in fs {
                    self.expr(v, local, ctx);
                }
            }
            BExpr::Maplets(ms) => {
                for (k, v) in ms {
                    self.expr(k, local, ctx);
                    self.expr(v, local, ctx);
                }
            }
            BExpr::ConstFunction { lo, hi, value } => {
                self.expr(lo, local, ctx);
                self.expr(hi, local, ctx);
                self.expr(value, local, ctx);
            }
            BExpr::BoolOf(p) => self.pred(p, local, ctx),
        }
    }

    fn pred(&mut self, p: &Pred, local: &[String], ctx: &str) {
        match p {
            Pred::True | Pred::False => {}
            Pred::And(a, b) | Pred::Or(a, b) | Pred::Implies(a, b) => {
                self.pred(a, local, ctx);
                self.pred(b, local, ctx);
            }
            Pred::Not(a) => self.pred(a, local, ctx),
            Pred::Cmp(_, a, b) | Pred::Member(a, b) | Pred::NotMember(a, b) => {
                self.expr(a, local, ctx);
                self.expr(b, local, ctx);
            }
            Pred::Forall {
                var,
                lo,
                hi,
                guard,
                body,
            } => {
                self.expr(lo, local, ctx);
                self.expr(hi, local, ctx);
                let mut inner = local.to_vec();
                inner.push(var.clone());
                if let Some(g) = guard {
                    self.pred(g, &inner, ctx);
                }
                self.pred(body, &inner, ctx);
            }
        }
    }

    fn subst(&mut self, s: &Subst, local: &[String], ctx: &str, m: &Machine, in_op: bool) {
        match s {
            Subst::Skip => {}
            Subst::Assign(lv, e) => {
                if !self.known(&lv.root, local) {
                    self.diags.push(format!("{ctx}: assignment to unknown variable: {}", lv.root));
                } else if m.constants.contains(&lv.root) {
                    self.diags.push(format!("{ctx}: assignment to constant: {}", lv.root));
                }
                for a in &lv.path {
                    if let Access::Index(i) = a {
                        self.expr(i, local, ctx);
                    }
                }
                self.expr(e, local, ctx);
            }
            Subst::Seq(xs) => {
                for x in xs {
                    self.subst(x, local, ctx, m, in_op);
                }
            }
            Subst::Parallel(xs) => {
                let mut all: BTreeSet<String> = BTreeSet::new();
                for x in xs {
                    let mut w = Vec::new();
                    x.written_roots(&mut w);
                    for v in w {
                        if !all.insert(v.clone()) {
                            self.diags.push(format!("{ctx}: parallel branches both write {v}"));
                        }
                    }
                    self.subst(x, local, ctx, m, in_op);
                }
            }
            Subst::If {
                branches,
                else_branch,
            } => {
                for (c, b) in branches {
                    self.pred(c, local, ctx);
                    self.subst(b, local, ctx, m, in_op);
                }
                if let Some(e) = else_branch {
                    self.subst(e, local, ctx, m, in_op);
                }
            }
            Subst::Case {
                scrutinee,
                arms,
                else_branch,
            } => {
                self.expr(scrutinee, local, ctx);
                let mut seen = HashSet::new();
                for (lits, b) in arms {
                    for l in lits {
                        if !matches!(l, BExpr::Int(_) | BExpr::Bool(_) | BExpr::Ident(_)) {
                            self.diags.push(format!(
                                "{ctx}: CASE label is not a literal: {}",
                                self.emitter.expr(l)
                            ));
                        } else if !seen.insert(l.clone()) {
                            self.diags.push(format!("{ctx}: duplicate CASE label: {}", self.emitter.expr(l)));
                        }
                        self.expr(l, local, ctx);
                    }
                    self.subst(b, local, ctx, m, in_op);
                }
                if let Some(e) = else_branch {
                    self.subst(e, local, ctx, m, in_op);
                }
            }
            Subst::While {
                cond,
                body,
                invariant,
                variant,
            } => {
                self.pred(cond, local, ctx);
                self.subst(body, local, ctx, m, in_op);
                match invariant {
                    Some(i) => self.pred(i, local, ctx),
                    None => self.diags.push(format!("{ctx}: WHILE loop without INVARIANT")),
                }
                match variant {
                    Some(v) => self.expr(v, local, ctx),
                    None => self.diags.push(format!("{ctx}: WHILE loop without VARIANT")),
                }
            }
            Subst::Var { names, body } => {
                let mut inner = local.to_vec();
                for n in names {
                    if self.known(n, local) {
                        self.diags.push(format!("{ctx}: VAR shadows existing name: {n}"));
                    }
                    inner.push(n.clone());
                }
                self.subst(body, &inner, ctx, m, in_op);
            }
            Subst::OpCall { outputs, op, args } => {
                match m.operation(op) {
                    None => self.diags.push(format!("{ctx}: call to unknown operation: {op}")),
                    Some(o) => {
                        if !in_op {
                            self.diags.push(format!("{ctx}: operation call outside an operation: {op}"));
                        }
                        if o.params.len() != args.len() || o.outputs.len() != outputs.len() {
                            self.diags.push(format!("{ctx}: call to {op} has the wrong arity"));
                        }
                    }
                }
                for o in outputs {
                    if !self.known(o, local) {
                        self.diags.push(format!("{ctx}: assignment to unknown variable: {o}"));
                    }
                }
                for a in args {
                    self.expr(a, local, ctx);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse::parse_machine;
    use super::*;

    #[test]
    fn reports_missing_initialisation() {
        let m = parse_machine(
            "MACHINE m SETS S = {A, B} VARIABLES sm_state, x
             INVARIANT sm_state : S & x : BOOL INITIALISATION x := TRUE END",
        )
        .unwrap();
        assert_eq!(validate_machine(&m), ["variable not initialised: sm_state"]);
    }

    #[test]
    fn reports_while_without_variant_and_parallel_conflicts() {
        let m = parse_machine(
            "MACHINE m VARIABLES x INVARIANT x : NAT INITIALISATION x := 0
             OPERATIONS op = BEGIN
               WHILE x < 3 DO x := x + 1 INVARIANT x : NAT END;
               x := 1 || x := 2
             END END",
        )
        .unwrap();
        let d = validate_machine(&m);
        assert!(d.iter().any(|s| s == "operation op: WHILE loop without VARIANT"), "{d:?}");
        assert!(d.iter().any(|s| s.contains("parallel branches both write x")), "{d:?}");
    }

    #[test]
    fn clean_machine_has_no_diagnostics() {
        let m = parse_machine(
            "MACHINE m CONSTANTS N PROPERTIES N = 3 VARIABLES v
             INVARIANT v : 0..(N - 1) --> BOOL
             INITIALISATION v := (0..(N - 1)) * {FALSE}
             OPERATIONS r <-- get(i) = PRE i : 0..(N - 1) THEN
               VAR t IN t := v(i); r := t END
             END END",
        )
        .unwrap();
        assert_eq!(validate_machine(&m), Vec::<String>::new());
    }
}
