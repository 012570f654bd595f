//! Removal of the intermediate locals that graphical editors introduce.
//!
//! A local defined by a plain expression is substituted into its readers when
//! it is read once or its definition is atomic. A local defined by `fby` or an
//! iterator and copied once into another variable is renamed to that variable.
//! Both rewrites repeat until nothing changes.

use crate::frontend::ast::*;
use crate::frontend::visit_expr;
use std::collections::{BTreeSet, HashMap};

pub fn simplify(body: &mut Block) {
    loop {
        let uses = count_uses(body);
        let mut in_hof = BTreeSet::new();
        hof_operands(body, &mut in_hof);
        if let Some((name, rhs)) = take_inlinable(body, &uses, &in_hof) {
            substitute_block(body, &name, &rhs);
            continue;
        }
        if coalesce(body, &uses) {
            continue;
        }
        break;
    }
}

pub fn is_atomic(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::Int(_) | ExprKind::Bool(_) | ExprKind::Var(_) | ExprKind::Const(_) | ExprKind::Member(_) => true,
        ExprKind::Unary(UnOp::Neg, x) => matches!(x.kind, ExprKind::Int(_)),
        _ => false,
    }
}

fn is_stateful(e: &Expr) -> bool {
    let mut found = false;
    visit_expr(e, &mut |x| {
        if matches!(x.kind, ExprKind::Fby(_) | ExprKind::Hof(_)) {
            found = true;
        }
    });
    found
}

fn for_each_expr(b: &Block, f: &mut dyn FnMut(&Expr)) {
    for item in &b.items {
        match item {
            BodyItem::Equation(eq) => f(&eq.rhs),
            BodyItem::Activate(a) => {
                f(&a.cond);
                for_each_expr(&a.then_branch, f);
                for_each_expr(&a.else_branch, f);
            }
            BodyItem::Automaton(sm) => {
                for st in &sm.states {
                    for t in &st.unless {
                        f(&t.cond);
                    }
                    for_each_expr(&st.body, f);
                }
            }
        }
    }
}

fn count_uses(b: &Block) -> HashMap<String, usize> {
    let mut uses = HashMap::new();
    for_each_expr(b, &mut |e| {
        visit_expr(e, &mut |x| {
            if let ExprKind::Var(n) = &x.kind {
                *uses.entry(n.clone()).or_insert(0) += 1;
            }
        })
    });
    uses
}

/// Variables read by some iterator argument, condition or default.
fn hof_operands(b: &Block, out: &mut BTreeSet<String>) {
    for_each_expr(b, &mut |e| {
        visit_expr(e, &mut |x| {
            if let ExprKind::Hof(h) = &x.kind {
                for sub in h.args.iter().chain(&h.defaults).chain(h.cond.as_ref()) {
                    crate::frontend::schedule::free_vars(sub, out);
                }
            }
        })
    });
}

fn take_inlinable(
    b: &mut Block,
    uses: &HashMap<String, usize>,
    in_hof: &BTreeSet<String>,
) -> Option<(String, Expr)> {
    let pos = b.items.iter().position(|item| {
        let BodyItem::Equation(eq) = item else {
            return false;
        };
        let [Lhs::Var(name)] = eq.lhs.as_slice() else {
            return false;
        };
        if !b.locals.iter().any(|l| &l.name == name) || is_stateful(&eq.rhs) {
            return false;
        }
        let n = uses.get(name).copied().unwrap_or(0);
        is_atomic(&eq.rhs) || (n <= 1 && !in_hof.contains(name))
    });
    if let Some(k) = pos {
        let BodyItem::Equation(eq) = b.items.remove(k) else {
            unreachable!()
        };
        let name = eq.lhs[0].name().unwrap().to_string();
        b.locals.retain(|l| l.name != name);
        return Some((name, eq.rhs));
    }
    for item in &mut b.items {
        let found = match item {
            BodyItem::Equation(_) => None,
            BodyItem::Activate(a) => take_inlinable(&mut a.then_branch, uses, in_hof)
                .or_else(|| take_inlinable(&mut a.else_branch, uses, in_hof)),
            BodyItem::Automaton(sm) => sm
                .states
                .iter_mut()
                .find_map(|st| take_inlinable(&mut st.body, uses, in_hof)),
        };
        if found.is_some() {
            return found;
        }
    }
    None
}

fn substitute_expr(e: &mut Expr, name: &str, by: &Expr) {
    if matches!(&e.kind, ExprKind::Var(n) if n == name) {
        *e = by.clone();
        return;
    }
    match &mut e.kind {
        ExprKind::Unary(_, x) | ExprKind::Field(x, _) => substitute_expr(x, name, by),
        ExprKind::Binary(_, l, r) | ExprKind::Index(l, r) => {
            substitute_expr(l, name, by);
            substitute_expr(r, name, by);
        }
        ExprKind::If(c, t, f) => {
            substitute_expr(c, name, by);
            substitute_expr(t, name, by);
            substitute_expr(f, name, by);
        }
        ExprKind::Case(s, arms, d) => {
            substitute_expr(s, name, by);
            for (_, x) in arms {
                substitute_expr(x, name, by);
            }
            if let Some(d) = d {
                substitute_expr(d, name, by);
            }
        }
        ExprKind::Fby(f) => substitute_expr(&mut f.input, name, by),
        ExprKind::Make(_, xs) | ExprKind::Array(xs) => xs.iter_mut().for_each(|x| substitute_expr(x, name, by)),
        ExprKind::Hof(h) => {
            for x in h.args.iter_mut().chain(h.defaults.iter_mut()).chain(h.cond.as_mut()) {
                substitute_expr(x, name, by);
            }
        }
        _ => {}
    }
}

fn substitute_block(b: &mut Block, name: &str, by: &Expr) {
    for item in &mut b.items {
        match item {
            BodyItem::Equation(eq) => substitute_expr(&mut eq.rhs, name, by),
            BodyItem::Activate(a) => {
                substitute_expr(&mut a.cond, name, by);
                substitute_block(&mut a.then_branch, name, by);
                substitute_block(&mut a.else_branch, name, by);
            }
            BodyItem::Automaton(sm) => {
                for st in &mut sm.states {
                    for t in &mut st.unless {
                        substitute_expr(&mut t.cond, name, by);
                    }
                    substitute_block(&mut st.body, name, by);
                }
            }
        }
    }
}

/// Rewrites `L = fby(..); y = L;` into `y = fby(..);` for a local `L` read once.
fn coalesce(b: &mut Block, uses: &HashMap<String, usize>) -> bool {
    let mut hit = None;
    for (k, item) in b.items.iter().enumerate() {
        let BodyItem::Equation(eq) = item else { continue };
        let (ExprKind::Var(src), [Lhs::Var(dst)]) = (&eq.rhs.kind, eq.lhs.as_slice()) else {
            continue;
        };
        if uses.get(src) != Some(&1) || !b.locals.iter().any(|l| &l.name == src) {
            continue;
        }
        let producer = b.items.iter().position(|it| {
            matches!(it, BodyItem::Equation(p)
                if matches!(p.rhs.kind, ExprKind::Fby(_) | ExprKind::Hof(_))
                    && p.lhs.iter().any(|l| l.name() == Some(src)))
        });
        if let Some(p) = producer {
            hit = Some((k, p, src.clone(), dst.clone()));
            break;
        }
    }
    if let Some((k, p, src, dst)) = hit {
        if let BodyItem::Equation(eq) = &mut b.items[p] {
            for l in &mut eq.lhs {
                if l.name() == Some(&src) {
                    *l = Lhs::Var(dst.clone());
                }
            }
        }
        b.items.remove(k);
        b.locals.retain(|l| l.name != src);
        return true;
    }
    for item in &mut b.items {
        let done = match item {
            BodyItem::Equation(_) => false,
            BodyItem::Activate(a) => coalesce(&mut a.then_branch, uses) || coalesce(&mut a.else_branch, uses),
            BodyItem::Automaton(sm) => sm.states.iter_mut().any(|st| coalesce(&mut st.body, uses)),
        };
        if done {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::compile;
    use crate::frontend::printer::print_program;

    fn simplified(src: &str) -> String {
        let tp = compile(src).unwrap();
        let mut prog = tp.program.clone();
        let node = prog.nodes.last_mut().unwrap();
        simplify(&mut node.body);
        print_program(&prog)
    }

    #[test]
    fn chains_of_copies_collapse() {
        let out = simplified(
            "node n(a: int32) returns (y: int32)
             var L1: int32; L2: int32;
             let y = L1; L1 = L2 + 1; L2 = a; tel",
        );
        assert!(out.contains("y = a + 1;"), "{out}");
        assert!(!out.contains("L1"), "{out}");
    }

    #[test]
    fn fby_local_is_renamed_to_its_reader() {
        let out = simplified(
            "node n(a: int32) returns (y: int32)
             var L: int32; M: int32;
             let M = a; L = fby(M; 2; 0); y = L; tel",
        );
        assert!(out.contains("y = fby(a; 2; 0);"), "{out}");
    }

    #[test]
    fn compound_operands_are_not_pushed_into_iterators() {
        let out = simplified(
            "function f(x: int32) returns (y: int32) let y = x; tel
             node n(a: int32^2) returns (v: int32^2)
             var L: int32^2;
             let L = if a[0] > 0 then a else a; v = (map f <<2>>)(L); tel",
        );
        assert!(out.contains("L = if"), "{out}");
    }

    #[test]
    fn locals_read_twice_survive() {
        let out = simplified(
            "node n(a: int32) returns (y: int32; z: int32)
             var L: int32;
             let L = a * 2; y = L; z = L + 1; tel",
        );
        assert!(out.contains("L = a * 2;"), "{out}");
    }
}
