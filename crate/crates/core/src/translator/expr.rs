//! Expressions, predicates and assignments.
//!
//! Conditional expressions have no B counterpart. In an assignment the first
//! one found is lifted into an `IF` or `CASE` substitution around copies of
//! the assignment; inside a predicate it becomes a disjunction of guarded
//! cases.

use super::names::mangle;
use super::TranslateError;
use crate::bmachine::*;
use crate::frontend::ast::{BinOp, Expr, ExprKind, Pattern, UnOp};
use crate::frontend::types::{ArraySize, Ty, TypeEnv};
use crate::value::Value;
use std::collections::HashMap;
use std::rc::Rc;

type TResult<T> = Result<T, TranslateError>;

/// Substitution applied to SCADE variables; unmapped ones keep their mangled name.
#[derive(Debug, Clone, Default)]
pub struct Renaming {
    map: HashMap<String, BExpr>,
    fields: Rc<HashMap<String, Vec<String>>>,
}

impl Renaming {
    pub fn new(env: &TypeEnv) -> Self {
        let fields = env
            .structs
            .iter()
            .map(|(name, fs)| (name.clone(), fs.iter().map(|(f, _)| f.clone()).collect()))
            .collect();
        Renaming {
            map: HashMap::new(),
            fields: Rc::new(fields),
        }
    }

    pub fn bind(&mut self, scade: impl Into<String>, to: BExpr) {
        self.map.insert(scade.into(), to);
    }

    pub fn var(&self, name: &str) -> BExpr {
        self.map
            .get(name)
            .cloned()
            .unwrap_or_else(|| BExpr::Ident(mangle(name)))
    }
}

pub fn contains_conditional(e: &Expr) -> bool {
    let mut found = false;
    crate::frontend::visit_expr(e, &mut |x| {
        if matches!(x.kind, ExprKind::If(..) | ExprKind::Case(..)) {
            found = true;
        }
    });
    found
}

pub fn pattern_expr(p: &Pattern) -> BExpr {
    match p {
        Pattern::Int(v) => BExpr::Int(*v),
        Pattern::Bool(b) => BExpr::Bool(*b),
        Pattern::Member(m) => BExpr::Ident(mangle(m)),
    }
}

pub fn value_expr(v: &Value) -> BExpr {
    match v {
        Value::Int(x) => BExpr::Int(*x),
        Value::Bool(b) => BExpr::Bool(*b),
        Value::Enum { member, .. } => BExpr::Ident(mangle(member)),
        Value::Array(cells) => BExpr::Maplets(
            cells
                .iter()
                .enumerate()
                .map(|(i, c)| (BExpr::Int(i as i64), value_expr(c)))
                .collect(),
        ),
        Value::Record(fields) => BExpr::Rec(fields.iter().map(|(f, x)| (mangle(f), value_expr(x))).collect()),
    }
}

/// Upper bound `n - 1` of an index range, symbolic when the size was.
pub fn last_index(size: &ArraySize) -> BExpr {
    match &size.sym {
        Some(c) => BExpr::sub(BExpr::Ident(mangle(c)), BExpr::Int(1)),
        None => BExpr::Int(size.len - 1),
    }
}

pub fn b_type(ty: &Ty) -> BExpr {
    match ty {
        Ty::Int(Some(k)) => BExpr::ident(k.b_name()),
        Ty::Int(None) => BExpr::ident("INTEGER"),
        Ty::Bool => BExpr::ident("BOOL"),
        Ty::Enum(n) | Ty::Struct(n) => BExpr::Ident(mangle(n)),
        Ty::Array(elem, size) => BExpr::total_fun(BExpr::interval(BExpr::Int(0), last_index(size)), b_type(elem)),
    }
}

/// `struct(f1: T1, ...)` for a record type.
pub fn struct_type(env: &TypeEnv, name: &str) -> BExpr {
    let fields = env.struct_fields(name).unwrap_or(&[]);
    BExpr::Struct(fields.iter().map(|(f, t)| (mangle(f), b_type(t))).collect())
}

fn unsupported(e: &Expr, what: &str) -> TranslateError {
    TranslateError::Unsupported(format!("{}: {what}", e.span))
}

pub fn expr(e: &Expr, r: &Renaming) -> TResult<BExpr> {
    Ok(match &e.kind {
        ExprKind::Int(v) => BExpr::Int(*v),
        ExprKind::Bool(b) => BExpr::Bool(*b),
        ExprKind::Var(n) | ExprKind::Ident(n) => r.var(n),
        ExprKind::Const(n) | ExprKind::Member(n) => BExpr::Ident(mangle(n)),
        ExprKind::Unary(UnOp::Neg, x) => match expr(x, r)? {
            BExpr::Int(v) => BExpr::Int(-v),
            other => BExpr::Neg(Box::new(other)),
        },
        ExprKind::Unary(UnOp::Not, _) => BExpr::BoolOf(Box::new(pred(e, r)?)),
        ExprKind::Binary(op, a, b) if op.is_arith() => {
            let aop = match op {
                BinOp::Add => ArithOp::Add,
                BinOp::Sub => ArithOp::Sub,
                BinOp::Mul => ArithOp::Mul,
                BinOp::Div => ArithOp::Div,
                _ => ArithOp::Mod,
            };
            BExpr::arith(aop, expr(a, r)?, expr(b, r)?)
        }
        ExprKind::Binary(..) => BExpr::BoolOf(Box::new(pred(e, r)?)),
        ExprKind::Make(ty, args) => {
            let names = r
                .fields
                .get(ty)
                .ok_or_else(|| unsupported(e, &format!("unknown record type {ty}")))?;
            BExpr::Rec(
                names
                    .iter()
                    .zip(args)
                    .map(|(n, a)| Ok((mangle(n), expr(a, r)?)))
                    .collect::<TResult<_>>()?,
            )
        }
        ExprKind::Field(x, f) => BExpr::Field(Box::new(expr(x, r)?), mangle(f)),
        ExprKind::Index(a, i) => BExpr::apply(expr(a, r)?, expr(i, r)?),
        ExprKind::Array(cells) => BExpr::Maplets(
            cells
                .iter()
                .enumerate()
                .map(|(i, c)| Ok((BExpr::Int(i as i64), expr(c, r)?)))
                .collect::<TResult<_>>()?,
        ),
        ExprKind::If(..) | ExprKind::Case(..) => return Err(unsupported(e, "conditional in a value position")),
        ExprKind::Fby(_) => return Err(unsupported(e, "fby must be the whole right-hand side")),
        ExprKind::Hof(_) => return Err(unsupported(e, "iterator must be the whole right-hand side")),
    })
}

fn cmp_op(op: BinOp) -> CmpOp {
    match op {
        BinOp::Eq => CmpOp::Eq,
        BinOp::Ne => CmpOp::Ne,
        BinOp::Lt => CmpOp::Lt,
        BinOp::Le => CmpOp::Le,
        BinOp::Gt => CmpOp::Gt,
        _ => CmpOp::Ge,
    }
}

pub fn pred(e: &Expr, r: &Renaming) -> TResult<Pred> {
    if let Some(sp) = split(e) {
        return split_pred(sp, r);
    }
    Ok(match &e.kind {
        ExprKind::Bool(true) => Pred::True,
        ExprKind::Bool(false) => Pred::False,
        ExprKind::Unary(UnOp::Not, x) => Pred::not(pred(x, r)?),
        ExprKind::Binary(BinOp::And, a, b) => Pred::And(Box::new(pred(a, r)?), Box::new(pred(b, r)?)),
        ExprKind::Binary(BinOp::Or, a, b) => Pred::or(pred(a, r)?, pred(b, r)?),
        ExprKind::Binary(op, a, b) if op.is_comparison() => Pred::Cmp(cmp_op(*op), expr(a, r)?, expr(b, r)?),
        _ => Pred::eq(expr(e, r)?, BExpr::Bool(true)),
    })
}

fn split_pred(sp: Split, r: &Renaming) -> TResult<Pred> {
    match sp.head {
        Head::If(c) => {
            let c = pred(&c, r)?;
            let t = pred(&sp.alts[0], r)?;
            let f = pred(&sp.alts[1], r)?;
            Ok(Pred::or(
                Pred::And(Box::new(c.clone()), Box::new(t)),
                Pred::And(Box::new(Pred::not(c)), Box::new(f)),
            ))
        }
        Head::Case(scrut, pats) => {
            let s = expr(&scrut, r)?;
            let mut disj: Option<Pred> = None;
            let mut push = |p: Pred| {
                disj = Some(match disj.take() {
                    None => p,
                    Some(d) => Pred::or(d, p),
                })
            };
            for (p, alt) in pats.iter().zip(&sp.alts) {
                push(Pred::And(
                    Box::new(Pred::eq(s.clone(), pattern_expr(p))),
                    Box::new(pred(alt, r)?),
                ));
            }
            if sp.alts.len() > pats.len() {
                let mut guard = Pred::True;
                for p in &pats {
                    guard = Pred::and(guard, Pred::Cmp(CmpOp::Ne, s.clone(), pattern_expr(p)));
                }
                push(Pred::and(guard, pred(sp.alts.last().unwrap(), r)?));
            }
            Ok(disj.unwrap_or(Pred::False))
        }
    }
}

/// `lv := e`, lifting conditionals of `e` into substitutions.
pub fn assign(lv: LValue, e: &Expr, r: &Renaming) -> TResult<Subst> {
    let Some(sp) = split(e) else {
        return Ok(Subst::Assign(lv, expr(e, r)?));
    };
    match sp.head {
        Head::If(c) => {
            let mut alts = sp.alts.into_iter();
            let t = assign(lv.clone(), &alts.next().unwrap(), r)?;
            let f = assign(lv, &alts.next().unwrap(), r)?;
            Ok(Subst::If {
                branches: vec![(pred(&c, r)?, t)],
                else_branch: Some(Box::new(f)),
            })
        }
        Head::Case(scrut, pats) => {
            let mut arms: Vec<(Vec<BExpr>, Subst)> = Vec::new();
            let mut alts = sp.alts.into_iter();
            for p in &pats {
                let alt = alts.next().unwrap();
                let label = pattern_expr(p);
                if arms.iter().any(|(ls, _)| ls.contains(&label)) {
                    continue;
                }
                arms.push((vec![label], assign(lv.clone(), &alt, r)?));
            }
            let else_branch = match alts.next() {
                Some(d) => Some(Box::new(assign(lv, &d, r)?)),
                None => None,
            };
            Ok(Subst::Case {
                scrutinee: expr(&scrut, r)?,
                arms,
                else_branch,
            })
        }
    }
}

enum Head {
    If(Expr),
    Case(Expr, Vec<Pattern>),
}

/// The first conditional of an expression and the expression rebuilt once
/// per alternative (for `Case`, the default comes last when present).
struct Split {
    head: Head,
    alts: Vec<Expr>,
}

fn children_mut(e: &mut Expr) -> Vec<&mut Expr> {
    match &mut e.kind {
        ExprKind::Unary(_, x) | ExprKind::Field(x, _) => vec![&mut **x],
        ExprKind::Binary(_, a, b) | ExprKind::Index(a, b) => vec![&mut **a, &mut **b],
        ExprKind::If(c, t, f) => vec![&mut **c, &mut **t, &mut **f],
        ExprKind::Case(s, arms, d) => {
            let mut v: Vec<&mut Expr> = vec![&mut **s];
            v.extend(arms.iter_mut().map(|(_, x)| x));
            if let Some(d) = d {
                v.push(&mut **d);
            }
            v
        }
        ExprKind::Make(_, xs) | ExprKind::Array(xs) => xs.iter_mut().collect(),
        _ => Vec::new(),
    }
}

fn split(e: &Expr) -> Option<Split> {
    match &e.kind {
        ExprKind::If(c, t, f) => {
            return Some(Split {
                head: Head::If((**c).clone()),
                alts: vec![(**t).clone(), (**f).clone()],
            })
        }
        ExprKind::Case(s, arms, d) if !contains_conditional(s) => {
            let mut alts: Vec<Expr> = arms.iter().map(|(_, x)| x.clone()).collect();
            alts.extend(d.as_deref().cloned());
            return Some(Split {
                head: Head::Case((**s).clone(), arms.iter().map(|(p, _)| p.clone()).collect()),
                alts,
            });
        }
        _ => {}
    }
    let mut probe = e.clone();
    let kids: Vec<Expr> = children_mut(&mut probe).into_iter().map(|c| c.clone()).collect();
    for (k, child) in kids.iter().enumerate() {
        if let Some(sp) = split(child) {
            let alts = sp
                .alts
                .into_iter()
                .map(|alt| {
                    let mut whole = e.clone();
                    *children_mut(&mut whole).remove(k) = alt;
                    whole
                })
                .collect();
            return Some(Split { head: sp.head, alts });
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::compile;
    use crate::frontend::ast::BodyItem;

    fn rhs(src: &str) -> (Expr, Renaming) {
        let tp = compile(src).unwrap();
        let node = tp.program.nodes.last().unwrap();
        let BodyItem::Equation(eq) = &node.body.items[0] else { panic!() };
        (eq.rhs.clone(), Renaming::new(&tp.env))
    }

    #[test]
    fn if_expression_lifts_into_if_substitution() {
        let (e, r) = rhs("node n(c: bool; a: int32; b: int32) returns (y: int32) let y = if c then a else b; tel");
        let s = assign(LValue::var("y"), &e, &r).unwrap();
        assert_eq!(emit_subst(&s).split_whitespace().collect::<Vec<_>>().join(" "),
            "IF c = TRUE THEN y := a ELSE y := b END");
    }

    #[test]
    fn case_with_default_becomes_case_else() {
        let (e, r) = rhs(
            "node n(k: int32; a: int32; b: int32; d: int32) returns (y: int32)
             let y = (case k of | 1: a | 2: b | _: d) + 1; tel",
        );
        let s = assign(LValue::var("y"), &e, &r).unwrap();
        let text = emit_subst(&s).split_whitespace().collect::<Vec<_>>().join(" ");
        assert_eq!(
            text,
            "CASE k OF EITHER 1 THEN y := a + 1 OR 2 THEN y := b + 1 ELSE y := d + 1 END END"
        );
    }

    #[test]
    fn conditional_inside_predicate_becomes_disjunction() {
        let (e, r) = rhs("node n(c: bool; a: int32) returns (y: bool) let y = (if c then a else 0) > 3; tel");
        let p = pred(&e, &r).unwrap();
        assert_eq!(emit_pred(&p), "(c = TRUE & a > 3) or (not(c = TRUE) & 0 > 3)");
    }

    #[test]
    fn records_fields_and_indexing() {
        let (e, r) = rhs(
            "type S = {f: int32, g: bool};
             node n(a: int32^3; s: S) returns (y: S) let y = make_s(a[1], s.g); tel"
                .replace("make_s", "(make S)")
                .as_str(),
        );
        let b = expr(&e, &r).unwrap();
        assert_eq!(emit_expr(&b), "rec(f: a(1), g: s'g)");
    }
}
