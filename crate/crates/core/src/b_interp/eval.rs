//! Evaluation of expressions, predicates and the set expressions used as types.

use super::{BError, BResult};
use crate::bmachine::*;
use crate::value::Value;
use std::collections::{BTreeMap, HashMap};

pub(super) type Env = BTreeMap<String, Value>;

/// Meaning of a constant fixed by PROPERTIES.
#[derive(Debug, Clone)]
pub(super) enum Def {
    Value(Value),
    Set(BExpr),
}

/// Constants, enumerated sets and their members.
#[derive(Debug, Clone, Default)]
pub(super) struct Statics {
    pub defs: HashMap<String, Def>,
    pub sets: HashMap<String, Vec<String>>,
    pub member_of: HashMap<String, String>,
}

fn is_set_expr(e: &BExpr, st: &Statics) -> bool {
    match e {
        BExpr::Interval(..) | BExpr::TotalFun(..) | BExpr::Struct(_) => true,
        BExpr::Ident(n) => {
            matches!(n.as_str(), "BOOL" | "INTEGER" | "NAT" | "NATURAL")
                || st.sets.contains_key(n)
                || matches!(st.defs.get(n), Some(Def::Set(_)))
        }
        _ => false,
    }
}

impl Statics {
    /// Reads the `c = e` conjuncts of PROPERTIES as definitions and checks
    /// the remaining ones.
    pub fn new(m: &Machine) -> BResult<Statics> {
        let mut st = Statics::default();
        for (s, members) in &m.sets {
            for x in members {
                st.member_of.insert(x.clone(), s.clone());
            }
            st.sets.insert(s.clone(), members.clone());
        }
        let mut pending: Vec<&Pred> = m.properties.iter().collect();
        loop {
            let before = pending.len();
            let mut rest = Vec::new();
            for p in pending {
                if let Pred::Cmp(CmpOp::Eq, BExpr::Ident(c), e) = p {
                    if m.constants.contains(c) && !st.defs.contains_key(c) {
                        if is_set_expr(e, &st) {
                            st.defs.insert(c.clone(), Def::Set(e.clone()));
                            continue;
                        }
                        if let Ok(v) = st.expr(e, &Env::new()) {
                            st.defs.insert(c.clone(), Def::Value(v));
                            continue;
                        }
                    }
                }
                rest.push(p);
            }
            pending = rest;
            if pending.len() == before {
                break;
            }
        }
        for c in &m.constants {
            if !st.defs.contains_key(c) {
                return Err(BError::Properties(format!("constant `{c}` has no defining property")));
            }
        }
        for p in pending {
            if !st.pred(p, &Env::new())? {
                return Err(BError::Properties(emit_pred(p)));
            }
        }
        Ok(st)
    }

    pub fn pred(&self, p: &Pred, env: &Env) -> BResult<bool> {
        Ok(match p {
            Pred::True => true,
            Pred::False => false,
            Pred::And(a, b) => self.pred(a, env)? && self.pred(b, env)?,
            Pred::Or(a, b) => self.pred(a, env)? || self.pred(b, env)?,
            Pred::Not(a) => !self.pred(a, env)?,
            Pred::Implies(a, b) => !self.pred(a, env)? || self.pred(b, env)?,
            Pred::Cmp(op, a, b) => {
                let (x, y) = (self.expr(a, env)?, self.expr(b, env)?);
                match op {
                    CmpOp::Eq => x == y,
                    CmpOp::Ne => x != y,
                    _ => {
                        let (x, y) = (int(&x)?, int(&y)?);
                        match op {
                            CmpOp::Lt => x < y,
                            CmpOp::Le => x <= y,
                            CmpOp::Gt => x > y,
                            _ => x >= y,
                        }
                    }
                }
            }
            Pred::Member(a, s) => self.member(&self.expr(a, env)?, s, env)?,
            Pred::NotMember(a, s) => !self.member(&self.expr(a, env)?, s, env)?,
            Pred::Forall { var, lo, hi, guard, body } => {
                let (lo, hi) = (int(&self.expr(lo, env)?)?, int(&self.expr(hi, env)?)?);
                let mut inner = env.clone();
                for i in lo..=hi {
                    inner.insert(var.clone(), Value::Int(i));
                    let applies = match guard {
                        Some(g) => self.pred(g, &inner)?,
                        None => true,
                    };
                    if applies && !self.pred(body, &inner)? {
                        return Ok(false);
                    }
                }
                true
            }
        })
    }

    /// Whether `v` belongs to the set denoted by `s`.
    pub fn member(&self, v: &Value, s: &BExpr, env: &Env) -> BResult<bool> {
        Ok(match s {
            BExpr::Interval(lo, hi) => {
                let (lo, hi) = (int(&self.expr(lo, env)?)?, int(&self.expr(hi, env)?)?);
                matches!(v, Value::Int(x) if lo <= *x && *x <= hi)
            }
            BExpr::TotalFun(dom, ran) => {
                let BExpr::Interval(lo, hi) = dom.as_ref() else {
                    return Err(BError::Unsupported(format!("function domain {}", emit_expr(dom))));
                };
                let (lo, hi) = (int(&self.expr(lo, env)?)?, int(&self.expr(hi, env)?)?);
                match v {
                    Value::Array(cells) if lo == 0 && cells.len() as i64 == hi + 1 => {
                        for c in cells {
                            if !self.member(c, ran, env)? {
                                return Ok(false);
                            }
                        }
                        true
                    }
                    Value::Array(cells) => cells.is_empty() && hi < lo,
                    _ => false,
                }
            }
            BExpr::Struct(fields) => match v {
                Value::Record(rec) if rec.len() == fields.len() => {
                    for ((f, t), (g, x)) in fields.iter().zip(rec) {
                        if f != g || !self.member(x, t, env)? {
                            return Ok(false);
                        }
                    }
                    true
                }
                _ => false,
            },
            BExpr::Ident(n) => match n.as_str() {
                "BOOL" => matches!(v, Value::Bool(_)),
                "INTEGER" => matches!(v, Value::Int(_)),
                "NAT" | "NATURAL" => matches!(v, Value::Int(x) if *x >= 0),
                _ => {
                    if let Some(ms) = self.sets.get(n) {
                        matches!(v, Value::Enum { set, member } if set == n && ms.contains(member))
                    } else if let Some(Def::Set(e)) = self.defs.get(n) {
                        self.member(v, e, env)?
                    } else {
                        return Err(BError::Unsupported(format!("`{n}` is not a set")));
                    }
                }
            },
            other => return Err(BError::Unsupported(format!("set expression {}", emit_expr(other)))),
        })
    }

    /// Members of a finite set in ascending order, or `None` when the set is
    /// infinite or has more than `cap` elements.
    pub fn enumerate(&self, s: &BExpr, cap: usize) -> BResult<Option<Vec<Value>>> {
        let env = Env::new();
        Ok(match s {
            BExpr::Interval(lo, hi) => {
                let (lo, hi) = (int(&self.expr(lo, &env)?)?, int(&self.expr(hi, &env)?)?);
                if hi < lo {
                    Some(Vec::new())
                } else if (hi - lo) as u128 + 1 > cap as u128 {
                    None
                } else {
                    Some((lo..=hi).map(Value::Int).collect())
                }
            }
            BExpr::TotalFun(dom, ran) => {
                let Some(idx) = self.enumerate(dom, cap)? else { return Ok(None) };
                let Some(cells) = self.enumerate(ran, cap)? else { return Ok(None) };
                product(&vec![cells; idx.len()], cap).map(|rows| rows.into_iter().map(Value::Array).collect())
            }
            BExpr::Struct(fields) => {
                let mut axes = Vec::new();
                for (_, t) in fields {
                    let Some(xs) = self.enumerate(t, cap)? else { return Ok(None) };
                    axes.push(xs);
                }
                product(&axes, cap).map(|rows| {
                    rows.into_iter()
                        .map(|r| Value::Record(fields.iter().map(|(f, _)| f.clone()).zip(r).collect()))
                        .collect()
                })
            }
            BExpr::Ident(n) => match n.as_str() {
                "BOOL" => Some(vec![Value::Bool(false), Value::Bool(true)]),
                "INTEGER" | "NAT" | "NATURAL" => None,
                _ => {
                    if let Some(ms) = self.sets.get(n) {
                        Some(ms.iter().map(|m| Value::member(n.clone(), m.clone())).collect())
                    } else if let Some(Def::Set(e)) = self.defs.get(n) {
                        self.enumerate(e, cap)?
                    } else {
                        return Err(BError::Unsupported(format!("`{n}` is not a set")));
                    }
                }
            },
            _ => None,
        })
    }

    pub fn expr(&self, e: &BExpr, env: &Env) -> BResult<Value> {
        Ok(match e {
            BExpr::Int(v) => Value::Int(*v),
            BExpr::Bool(b) => Value::Bool(*b),
            BExpr::Ident(n) => {
                if let Some(v) = env.get(n) {
                    v.clone()
                } else if let Some(set) = self.member_of.get(n) {
                    Value::member(set.clone(), n.clone())
                } else {
                    match self.defs.get(n) {
                        Some(Def::Value(v)) => v.clone(),
                        Some(Def::Set(_)) => return Err(BError::Unsupported(format!("set `{n}` used as a value"))),
                        None => return Err(BError::Unbound(n.clone())),
                    }
                }
            }
            BExpr::Neg(x) => Value::Int(int(&self.expr(x, env)?)?.checked_neg().ok_or(BError::Overflow)?),
            BExpr::Arith(op, a, b) => {
                let (x, y) = (int(&self.expr(a, env)?)?, int(&self.expr(b, env)?)?);
                let r = match op {
                    ArithOp::Add => x.checked_add(y),
                    ArithOp::Sub => x.checked_sub(y),
                    ArithOp::Mul => x.checked_mul(y),
                    ArithOp::Div | ArithOp::Mod if y == 0 => return Err(BError::DivisionByZero),
                    ArithOp::Div => x.checked_div(y),
                    ArithOp::Mod => x.checked_rem(y),
                };
                Value::Int(r.ok_or(BError::Overflow)?)
            }
            BExpr::Apply(f, i) => {
                let f = self.expr(f, env)?;
                let i = int(&self.expr(i, env)?)?;
                apply(&f, i)?.clone()
            }
            BExpr::Field(x, f) => {
                let v = self.expr(x, env)?;
                v.field(f).cloned().ok_or_else(|| BError::Type(format!("no field `{f}` in {}", v.to_b_string())))?
            }
            BExpr::Rec(fields) => Value::Record(
                fields
                    .iter()
                    .map(|(f, x)| Ok((f.clone(), self.expr(x, env)?)))
                    .collect::<BResult<_>>()?,
            ),
            BExpr::Maplets(ms) => {
                let mut cells: Vec<Option<Value>> = vec![None; ms.len()];
                for (k, v) in ms {
                    let k = int(&self.expr(k, env)?)?;
                    let slot = usize::try_from(k)
                        .ok()
                        .and_then(|k| cells.get_mut(k))
                        .ok_or_else(|| BError::Unsupported("maplets must cover 0..n-1".into()))?;
                    *slot = Some(self.expr(v, env)?);
                }
                let cells: Option<Vec<Value>> = cells.into_iter().collect();
                Value::Array(cells.ok_or_else(|| BError::Unsupported("maplets must cover 0..n-1".into()))?)
            }
            BExpr::ConstFunction { lo, hi, value } => {
                let (lo, hi) = (int(&self.expr(lo, env)?)?, int(&self.expr(hi, env)?)?);
                if lo != 0 {
                    return Err(BError::Unsupported("function domains start at 0".into()));
                }
                let v = self.expr(value, env)?;
                Value::Array(vec![v; (hi + 1).max(0) as usize])
            }
            BExpr::BoolOf(p) => Value::Bool(self.pred(p, env)?),
            BExpr::Interval(..) | BExpr::TotalFun(..) | BExpr::Struct(_) => {
                return Err(BError::Unsupported(format!("set {} used as a value", emit_expr(e))))
            }
        })
    }
}

/// Cartesian product, first axis slowest; `None` past `cap` rows.
pub(crate) fn product(axes: &[Vec<Value>], cap: usize) -> Option<Vec<Vec<Value>>> {
    let mut rows = vec![Vec::new()];
    for axis in axes {
        if rows.len().checked_mul(axis.len())? > cap {
            return None;
        }
        rows = rows
            .iter()
            .flat_map(|r| {
                axis.iter().map(move |x| {
                    let mut r = r.clone();
                    r.push(x.clone());
                    r
                })
            })
            .collect();
    }
    Some(rows)
}

pub(super) fn int(v: &Value) -> BResult<i64> {
    v.as_int().ok_or_else(|| BError::Type(format!("expected an integer, found {}", v.to_b_string())))
}

pub(super) fn apply(f: &Value, i: i64) -> BResult<&Value> {
    let cells = f
        .as_array()
        .ok_or_else(|| BError::Type(format!("{} is not a function", f.to_b_string())))?;
    usize::try_from(i)
        .ok()
        .and_then(|k| cells.get(k))
        .ok_or(BError::Domain { index: i, len: cells.len() })
}
