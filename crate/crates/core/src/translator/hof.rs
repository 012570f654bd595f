//! Iterators as `WHILE` loops with a synthesized `INVARIANT` and `VARIANT`.

use super::expr::{self, b_type, contains_conditional, Renaming};
use super::names::{mangle, NameSet};
use super::simplify::simplify;
use super::{NodeCx, TResult, TranslateError, Translator};
use crate::bmachine::*;
use crate::frontend::ast::*;

/// Right-hand side of each operator output when the operator is a list of
/// plain equations over its inputs.
pub(super) fn inline_body(decl: &NodeDecl) -> Option<Vec<Expr>> {
    let mut body = decl.body.clone();
    simplify(&mut body);
    if !body.locals.is_empty() {
        return None;
    }
    let outs: Vec<&str> = decl.outputs.iter().map(|o| o.name.as_str()).collect();
    let mut rhs: Vec<Option<Expr>> = vec![None; outs.len()];
    for item in &body.items {
        let BodyItem::Equation(eq) = item else { return None };
        let [Lhs::Var(n)] = eq.lhs.as_slice() else { return None };
        let k = outs.iter().position(|o| o == n)?;
        let mut bad = false;
        crate::frontend::visit_expr(&eq.rhs, &mut |x| match &x.kind {
            ExprKind::Fby(_) | ExprKind::Hof(_) => bad = true,
            ExprKind::Var(v) if outs.contains(&v.as_str()) => bad = true,
            _ => {}
        });
        if bad || rhs[k].is_some() {
            return None;
        }
        rhs[k] = Some(eq.rhs.clone());
    }
    rhs.into_iter().collect()
}

fn simple_operand(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::Var(_) | ExprKind::Const(_) | ExprKind::Member(_) | ExprKind::Int(_) | ExprKind::Bool(_) => true,
        ExprKind::Field(x, _) => simple_operand(x),
        ExprKind::Index(x, i) => simple_operand(x) && simple_operand(i),
        _ => false,
    }
}

/// Moves compound operands into temporaries assigned before the loop.
struct Hoist<'s> {
    scope: &'s mut NameSet,
    locals: &'s mut Vec<String>,
    prelude: Vec<Subst>,
    renaming: &'s Renaming,
}

impl Hoist<'_> {
    fn operand(&mut self, e: &Expr, hoist: bool) -> TResult<BExpr> {
        if !hoist {
            return expr::expr(e, self.renaming);
        }
        let t = self.scope.fresh("tmp");
        self.locals.push(t.clone());
        self.prelude.push(expr::assign(LValue::var(&t), e, self.renaming)?);
        Ok(BExpr::Ident(t))
    }
}

fn forall(i: &str, idx: &str, guard: Option<&str>, body: Pred) -> Pred {
    Pred::Forall {
        var: i.to_string(),
        lo: BExpr::Int(0),
        hi: BExpr::sub(BExpr::ident(idx), BExpr::Int(1)),
        guard: guard.map(|c| Box::new(Pred::eq(BExpr::ident(c), BExpr::Bool(true)))),
        body: Box::new(body),
    }
}

impl Translator<'_> {
    pub(super) fn hof(&mut self, cx: &NodeCx, lhs: &[Lhs], h: &HofApp) -> TResult<Subst> {
        let tp = self.tp;
        let (op_decl, _) = tp
            .node(&h.op)
            .ok_or_else(|| TranslateError::Unsupported(format!("unknown operator {}", h.op)))?;
        let (op_in, op_out) = tp.signature(&h.op).expect("operator signature");
        let kind = h.kind;
        let a = h.accs;
        let w = usize::from(kind.is_while());
        let ix = usize::from(kind.indexed());
        let m = op_out.len() - w - a;
        let lead = kind.leading_results();

        let size = match &h.size {
            SizeExpr::Lit(n) => BExpr::Int(*n),
            SizeExpr::Const(c, _) => BExpr::Ident(mangle(c)),
        };
        let last = match &h.size {
            SizeExpr::Lit(n) => BExpr::Int(n - 1),
            SizeExpr::Const(c, _) => BExpr::sub(BExpr::Ident(mangle(c)), BExpr::Int(1)),
        };

        let mut scope = cx.scope.clone();
        let idx = scope.fresh("idx");
        let accs: Vec<String> = if a == 1 {
            vec![scope.fresh("acc")]
        } else {
            (1..=a).map(|k| scope.fresh(&format!("acc{k}"))).collect()
        };
        let cond = (w == 1).then(|| scope.fresh("cond"));
        let mut locals: Vec<String> = std::iter::once(idx.clone())
            .chain(accs.iter().cloned())
            .chain(cond.iter().cloned())
            .collect();

        let mut hoist = Hoist {
            scope: &mut scope,
            locals: &mut locals,
            prelude: Vec::new(),
            renaming: &cx.renaming,
        };
        let arrays: Vec<BExpr> = h.args[a..]
            .iter()
            .map(|e| hoist.operand(e, !simple_operand(e)))
            .collect::<TResult<_>>()?;
        let acc_init: Vec<BExpr> = h.args[..a]
            .iter()
            .map(|e| hoist.operand(e, contains_conditional(e)))
            .collect::<TResult<_>>()?;
        let cond_init = match &h.cond {
            Some(c) => Some(hoist.operand(c, contains_conditional(c))?),
            None => None,
        };
        let defaults: Vec<BExpr> = h
            .defaults
            .iter()
            .map(|e| hoist.operand(e, contains_conditional(e)))
            .collect::<TResult<_>>()?;
        let prelude = hoist.prelude;

        let targets: Vec<Option<String>> = (0..m)
            .map(|j| lhs.get(lead + a + j).and_then(|l| l.name()).map(mangle))
            .collect();

        let mut body_parts: Vec<Subst> = Vec::new();
        let inline = inline_body(op_decl);
        let mut invariant_eqs: Option<Vec<Pred>> = None;
        match &inline {
            Some(rhs) => {
                let bind = |at: BExpr| {
                    let mut r = cx.renaming.clone();
                    if ix == 1 {
                        r.bind(op_in[0].0.clone(), at.clone());
                    }
                    for (k, acc) in accs.iter().enumerate() {
                        r.bind(op_in[ix + k].0.clone(), BExpr::ident(acc));
                    }
                    for (k, arr) in arrays.iter().enumerate() {
                        r.bind(op_in[ix + a + k].0.clone(), BExpr::apply(arr.clone(), at.clone()));
                    }
                    r
                };
                let r = bind(BExpr::ident(&idx));
                let mut assigns = Vec::new();
                if let Some(c) = &cond {
                    assigns.push(expr::assign(LValue::var(c), &rhs[0], &r)?);
                }
                for (k, acc) in accs.iter().enumerate() {
                    assigns.push(expr::assign(LValue::var(acc), &rhs[w + k], &r)?);
                }
                for (j, t) in targets.iter().enumerate() {
                    if let Some(v) = t {
                        assigns.push(expr::assign(LValue::apply(v, BExpr::ident(&idx)), &rhs[w + a + j], &r)?);
                    }
                }
                body_parts.push(Subst::parallel(assigns));
                let pure = targets
                    .iter()
                    .enumerate()
                    .all(|(j, t)| t.is_none() || !contains_conditional(&rhs[w + a + j]));
                if kind.family() == HofFamily::Map && pure {
                    let i = scope.fresh("i");
                    let ri = bind(BExpr::ident(&i));
                    let eqs = targets
                        .iter()
                        .enumerate()
                        .filter_map(|(j, t)| t.as_ref().map(|v| (j, v)))
                        .map(|(j, v)| {
                            Ok(Pred::eq(
                                BExpr::apply(BExpr::ident(v), BExpr::ident(&i)),
                                expr::expr(&rhs[w + a + j], &ri)?,
                            ))
                        })
                        .collect::<TResult<Vec<_>>>()?;
                    if !eqs.is_empty() {
                        invariant_eqs = Some(vec![forall(&i, &idx, cond.as_deref(), Pred::conj(eqs))]);
                    }
                }
            }
            None => {
                let op_name = self.aux_operation(&h.op)?;
                self.warnings.push(format!(
                    "operator {} is not a list of plain equations; emitted as operation {op_name} and called inside the loop",
                    h.op
                ));
                let mut outs: Vec<String> = cond.iter().cloned().chain(accs.iter().cloned()).collect();
                let mut copies = Vec::new();
                for t in &targets {
                    let r = scope.fresh("res");
                    locals.push(r.clone());
                    outs.push(r.clone());
                    if let Some(v) = t {
                        copies.push(Subst::Assign(LValue::apply(v, BExpr::ident(&idx)), BExpr::Ident(r)));
                    }
                }
                let mut args: Vec<BExpr> = Vec::new();
                if ix == 1 {
                    args.push(BExpr::ident(&idx));
                }
                args.extend(accs.iter().map(BExpr::ident));
                args.extend(arrays.iter().map(|arr| BExpr::apply(arr.clone(), BExpr::ident(&idx))));
                body_parts.push(Subst::OpCall {
                    outputs: outs,
                    op: op_name,
                    args,
                });
                body_parts.extend(copies);
            }
        }
        body_parts.push(Subst::assign(&idx, BExpr::add(BExpr::ident(&idx), BExpr::Int(1))));

        let typing = |j: usize, at: BExpr| Pred::member(at, b_type(&op_out[j].1));
        let mut inv: Vec<Pred> = Vec::new();
        if kind.family() != HofFamily::Map {
            for (k, acc) in accs.iter().enumerate() {
                inv.push(typing(w + k, BExpr::ident(acc)));
            }
        }
        if kind.family() != HofFamily::Fold {
            match invariant_eqs {
                Some(eqs) => inv.extend(eqs),
                None => {
                    let i = scope.fresh("i");
                    let cells: Vec<Pred> = targets
                        .iter()
                        .enumerate()
                        .filter_map(|(j, t)| {
                            t.as_ref()
                                .map(|v| typing(w + a + j, BExpr::apply(BExpr::ident(v), BExpr::ident(&i))))
                        })
                        .collect();
                    if !cells.is_empty() {
                        inv.push(forall(&i, &idx, cond.as_deref(), Pred::conj(cells)));
                    }
                }
            }
        }
        if inv.is_empty() {
            inv.push(Pred::member(BExpr::ident(&idx), BExpr::interval(BExpr::Int(0), size.clone())));
        }

        let mut guard = Pred::Cmp(CmpOp::Lt, BExpr::ident(&idx), size.clone());
        if let Some(c) = &cond {
            guard = Pred::And(Box::new(guard), Box::new(Pred::eq(BExpr::ident(c), BExpr::Bool(true))));
        }
        let lp = Subst::While {
            cond: guard,
            body: Box::new(Subst::seq(body_parts)),
            invariant: Some(Pred::conj(inv)),
            variant: Some(BExpr::sub(size, BExpr::ident(&idx))),
        };

        let mut steps = prelude;
        steps.push(Subst::assign(&idx, BExpr::Int(0)));
        for (acc, init) in accs.iter().zip(acc_init) {
            steps.push(Subst::assign(acc, init));
        }
        if let (Some(c), Some(init)) = (&cond, cond_init) {
            steps.push(Subst::assign(c, init));
        }
        if w == 1 {
            for (t, d) in targets.iter().zip(&defaults) {
                if let Some(v) = t {
                    steps.push(Subst::assign(
                        v,
                        BExpr::ConstFunction {
                            lo: Box::new(BExpr::Int(0)),
                            hi: Box::new(last.clone()),
                            value: Box::new(d.clone()),
                        },
                    ));
                }
            }
        }
        steps.push(lp);
        if w == 1 {
            if let Some(x) = lhs.first().and_then(|l| l.name()) {
                steps.push(Subst::assign(mangle(x), BExpr::ident(&idx)));
            }
            if lead == 2 {
                if let (Some(x), Some(c)) = (lhs.get(1).and_then(|l| l.name()), &cond) {
                    steps.push(Subst::assign(mangle(x), BExpr::ident(c)));
                }
            }
        }
        for (k, acc) in accs.iter().enumerate() {
            if let Some(x) = lhs.get(lead + k).and_then(|l| l.name()) {
                steps.push(Subst::assign(mangle(x), BExpr::ident(acc)));
            }
        }
        Ok(Subst::Var {
            names: locals,
            body: Box::new(Subst::seq(steps)),
        })
    }
}
