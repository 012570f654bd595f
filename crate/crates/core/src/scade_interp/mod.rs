//! Cycle-based reference interpreter for the SCADE subset.
//!
//! A cycle evaluates the node body in dependency order. `fby` yields the head
//! of its buffer and then shifts in the current input. An automaton first
//! tries the `unless` transitions of its active state in order; the first one
//! that holds moves the automaton and the target state's body runs in the
//! same cycle.

mod hof;

pub use self::hof::{eval_hof, HofResult, HofShape};

use crate::frontend::ast::*;
use crate::frontend::typecheck::resolve_size;
use crate::frontend::{dependency_order, NodeInfo, Ty, TypedProgram, Unit};
use crate::value::Value;
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("missing input `{0}`")]
    MissingInput(String),
    #[error("unknown input `{0}`")]
    UnknownInput(String),
    #[error("value {value} of `{var}` is outside {ty}")]
    Range { var: String, value: Value, ty: String },
    #[error("arithmetic overflow")]
    Overflow,
    #[error("division by zero")]
    DivisionByZero,
    #[error("index {index} outside an array of length {len}")]
    IndexOutOfBounds { index: i64, len: usize },
    #[error("no case arm matches {0}")]
    NoMatchingCase(Value),
    #[error("`{0}` is read before it is defined")]
    Undefined(String),
    #[error("iteration {index}: {source}")]
    InIteration { index: usize, source: Box<EvalError> },
}

/// Coarse classification used to compare failures across interpreters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Range,
    DivisionByZero,
    Index,
    Other,
}

impl EvalError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            EvalError::MissingInput(_) | EvalError::UnknownInput(_) => ErrorKind::Input,
            EvalError::Range { .. } | EvalError::Overflow => ErrorKind::Range,
            EvalError::DivisionByZero => ErrorKind::DivisionByZero,
            EvalError::IndexOutOfBounds { .. } => ErrorKind::Index,
            EvalError::InIteration { source, .. } => source.kind(),
            _ => ErrorKind::Other,
        }
    }
}

type EResult<T> = Result<T, EvalError>;

/// Memory of a node between cycles.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct NodeState {
    /// Buffer of each `fby` instance, oldest value first.
    pub fby: BTreeMap<usize, Vec<Value>>,
    /// Active state of each automaton.
    pub automata: BTreeMap<String, String>,
}

pub type Io = BTreeMap<String, Value>;

/// Executes one node of a typed program.
pub struct Simulator<'a> {
    tp: &'a TypedProgram,
    node: &'a NodeDecl,
    info: &'a NodeInfo,
}

impl<'a> Simulator<'a> {
    pub fn new(tp: &'a TypedProgram, node: &str) -> Option<Self> {
        let (node, info) = tp.node(node)?;
        Some(Simulator { tp, node, info })
    }

    /// Simulator for the program's main node.
    pub fn main(tp: &'a TypedProgram) -> Option<Self> {
        Simulator::new(tp, tp.main_node()?)
    }

    pub fn node(&self) -> &NodeDecl {
        self.node
    }

    pub fn init_state(&self) -> NodeState {
        let fby = self
            .info
            .fbys
            .iter()
            .map(|f| (f.id, vec![f.init.clone(); f.depth]))
            .collect();
        let mut automata = BTreeMap::new();
        collect_initial(&self.node.body, &mut automata);
        NodeState { fby, automata }
    }

    pub fn step(&self, state: &NodeState, inputs: &Io) -> EResult<(Io, NodeState)> {
        for k in inputs.keys() {
            if !self.node.inputs.iter().any(|p| &p.name == k) {
                return Err(EvalError::UnknownInput(k.clone()));
            }
        }
        let mut frame = Frame {
            tp: self.tp,
            info: self.info,
            vars: HashMap::new(),
            state: state.clone(),
        };
        for p in &self.node.inputs {
            let v = inputs
                .get(&p.name)
                .ok_or_else(|| EvalError::MissingInput(p.name.clone()))?;
            frame.write(&p.name, v.clone())?;
        }
        frame.block(&self.node.body)?;
        let mut outputs = Io::new();
        for o in &self.node.outputs {
            outputs.insert(o.name.clone(), frame.read(&o.name)?);
        }
        Ok((outputs, frame.state))
    }

    /// Runs `trace` from the initial state and returns every cycle's outputs.
    pub fn run(&self, trace: &[Io]) -> EResult<Vec<(Io, NodeState)>> {
        let mut state = self.init_state();
        let mut out = Vec::with_capacity(trace.len());
        for inputs in trace {
            let (o, s) = self.step(&state, inputs)?;
            state = s.clone();
            out.push((o, s));
        }
        Ok(out)
    }
}

fn collect_initial(b: &Block, out: &mut BTreeMap<String, String>) {
    for item in &b.items {
        match item {
            BodyItem::Equation(_) => {}
            BodyItem::Activate(a) => {
                collect_initial(&a.then_branch, out);
                collect_initial(&a.else_branch, out);
            }
            BodyItem::Automaton(sm) => {
                out.insert(sm.name.clone(), sm.initial().name.clone());
                sm.states.iter().for_each(|st| collect_initial(&st.body, out));
            }
        }
    }
}

struct Frame<'a> {
    tp: &'a TypedProgram,
    info: &'a NodeInfo,
    vars: HashMap<String, Value>,
    state: NodeState,
}

impl<'a> Frame<'a> {
    fn read(&self, name: &str) -> EResult<Value> {
        self.vars
            .get(name)
            .cloned()
            .ok_or_else(|| EvalError::Undefined(name.to_string()))
    }

    fn write(&mut self, name: &str, v: Value) -> EResult<()> {
        if let Some(var) = self.info.vars.get(name) {
            check(name, &var.ty, &v, self.tp)?;
        }
        self.vars.insert(name.to_string(), v);
        Ok(())
    }

    fn block(&mut self, b: &Block) -> EResult<()> {
        let order = dependency_order(b).expect("program was checked for cycles");
        for unit in order {
            match (unit, &b.items[unit.index()]) {
                (Unit::FbyRead(_), BodyItem::Equation(eq)) => {
                    let ExprKind::Fby(f) = &eq.rhs.kind else { unreachable!() };
                    let head = self.state.fby[&f.id][0].clone();
                    self.write_lhs(&eq.lhs[0], head)?;
                }
                (Unit::FbyShift(_), BodyItem::Equation(eq)) => {
                    let ExprKind::Fby(f) = &eq.rhs.kind else { unreachable!() };
                    let v = self.expr(&f.input)?;
                    let buf = self.state.fby.get_mut(&f.id).expect("fby buffer");
                    buf.remove(0);
                    buf.push(v);
                }
                (_, BodyItem::Equation(eq)) => {
                    if let ExprKind::Hof(h) = &eq.rhs.kind {
                        let values = self.hof(h)?;
                        for (l, v) in eq.lhs.iter().zip(values) {
                            self.write_lhs(l, v)?;
                        }
                    } else {
                        let v = self.expr(&eq.rhs)?;
                        self.write_lhs(&eq.lhs[0], v)?;
                    }
                }
                (_, BodyItem::Activate(a)) => {
                    let branch = if truth(&self.expr(&a.cond)?) {
                        &a.then_branch
                    } else {
                        &a.else_branch
                    };
                    self.block(branch)?;
                }
                (_, BodyItem::Automaton(sm)) => self.automaton(sm)?,
            }
        }
        Ok(())
    }

    fn write_lhs(&mut self, l: &Lhs, v: Value) -> EResult<()> {
        match l.name() {
            Some(n) => self.write(n, v),
            None => Ok(()),
        }
    }

    fn automaton(&mut self, sm: &Automaton) -> EResult<()> {
        let current = self.state.automata[&sm.name].clone();
        let state = sm
            .states
            .iter()
            .find(|s| s.name == current)
            .expect("active state exists");
        for t in &state.unless {
            if truth(&self.expr(&t.cond)?) {
                let target = sm
                    .states
                    .iter()
                    .find(|s| s.name == t.target)
                    .expect("transition target exists");
                self.state.automata.insert(sm.name.clone(), target.name.clone());
                return self.block(&target.body);
            }
        }
        self.block(&state.body)
    }

    fn hof(&mut self, h: &HofApp) -> EResult<Vec<Value>> {
        let tp = self.tp;
        let (op_decl, op_info) = tp.node(&h.op).expect("operator exists");
        let size = resolve_size(&h.size, &tp.env).expect("size resolved").len as usize;
        let w = usize::from(h.kind.is_while());
        let m = op_decl.outputs.len() - w - h.accs;
        let init_cond = match &h.cond {
            Some(c) => Some(truth(&self.expr(c)?)),
            None => None,
        };
        let defaults = h.defaults.iter().map(|d| self.expr(d)).collect::<EResult<Vec<_>>>()?;
        let mut args = h.args.iter().map(|a| self.expr(a)).collect::<EResult<Vec<_>>>()?;
        let arrays: Vec<Vec<Value>> = args
            .split_off(h.accs)
            .into_iter()
            .map(|a| match a {
                Value::Array(cells) => cells,
                other => vec![other],
            })
            .collect();
        let shape = HofShape {
            kind: h.kind,
            accs: h.accs,
            size,
            outputs: m,
        };
        let mut call = |xs: &[Value]| call_operator(tp, op_decl, op_info, xs);
        let r = eval_hof(shape, init_cond, &defaults, args, &arrays, &mut call)?;
        Ok(r.into_lhs(h.kind))
    }

    fn expr(&self, e: &Expr) -> EResult<Value> {
        let env = &self.tp.env;
        Ok(match &e.kind {
            ExprKind::Int(v) => Value::Int(*v),
            ExprKind::Bool(b) => Value::Bool(*b),
            ExprKind::Var(n) | ExprKind::Ident(n) => self.read(n)?,
            ExprKind::Const(n) => env.constant(n).expect("constant exists").value.clone(),
            ExprKind::Member(m) => Value::member(env.enum_of_member(m).unwrap_or_default(), m.clone()),
            ExprKind::Unary(UnOp::Neg, x) => match self.expr(x)? {
                Value::Int(v) => Value::Int(v.checked_neg().ok_or(EvalError::Overflow)?),
                other => other,
            },
            ExprKind::Unary(UnOp::Not, x) => Value::Bool(!truth(&self.expr(x)?)),
            ExprKind::Binary(BinOp::And, l, r) => Value::Bool(truth(&self.expr(l)?) && truth(&self.expr(r)?)),
            ExprKind::Binary(BinOp::Or, l, r) => Value::Bool(truth(&self.expr(l)?) || truth(&self.expr(r)?)),
            ExprKind::Binary(op, l, r) => binary(*op, self.expr(l)?, self.expr(r)?)?,
            ExprKind::If(c, t, f) => {
                if truth(&self.expr(c)?) {
                    self.expr(t)?
                } else {
                    self.expr(f)?
                }
            }
            ExprKind::Case(s, arms, default) => {
                let v = self.expr(s)?;
                match arms.iter().find(|(p, _)| pattern_matches(p, &v)) {
                    Some((_, x)) => self.expr(x)?,
                    None => match default {
                        Some(d) => self.expr(d)?,
                        None => return Err(EvalError::NoMatchingCase(v)),
                    },
                }
            }
            ExprKind::Make(s, args) => {
                let fields = env.struct_fields(s).expect("struct exists");
                let mut rec = Vec::with_capacity(fields.len());
                for ((f, _), a) in fields.iter().zip(args) {
                    rec.push((f.clone(), self.expr(a)?));
                }
                Value::Record(rec)
            }
            ExprKind::Field(x, f) => {
                let v = self.expr(x)?;
                v.field(f).cloned().expect("field exists")
            }
            ExprKind::Index(a, i) => {
                let arr = self.expr(a)?;
                let i = self.expr(i)?.as_int().expect("integer index");
                let cells = arr.as_array().expect("array value");
                usize::try_from(i)
                    .ok()
                    .and_then(|k| cells.get(k))
                    .cloned()
                    .ok_or(EvalError::IndexOutOfBounds { index: i, len: cells.len() })?
            }
            ExprKind::Array(xs) => Value::Array(xs.iter().map(|x| self.expr(x)).collect::<EResult<_>>()?),
            ExprKind::Fby(_) | ExprKind::Hof(_) => unreachable!("stateful operators are whole equations"),
        })
    }
}

/// Calls a stateless node on positional arguments.
fn call_operator(tp: &TypedProgram, decl: &NodeDecl, info: &NodeInfo, args: &[Value]) -> EResult<Vec<Value>> {
    let mut frame = Frame {
        tp,
        info,
        vars: HashMap::new(),
        state: NodeState::default(),
    };
    for (p, v) in decl.inputs.iter().zip(args) {
        frame.write(&p.name, v.clone())?;
    }
    frame.block(&decl.body)?;
    decl.outputs.iter().map(|o| frame.read(&o.name)).collect()
}

fn check(name: &str, ty: &Ty, v: &Value, tp: &TypedProgram) -> EResult<()> {
    if ty.admits(v, &tp.env) {
        Ok(())
    } else {
        Err(EvalError::Range {
            var: name.to_string(),
            value: v.clone(),
            ty: ty.to_string(),
        })
    }
}

fn truth(v: &Value) -> bool {
    v.as_bool().expect("boolean value")
}

fn pattern_matches(p: &Pattern, v: &Value) -> bool {
    match (p, v) {
        (Pattern::Int(a), Value::Int(b)) => a == b,
        (Pattern::Bool(a), Value::Bool(b)) => a == b,
        (Pattern::Member(a), Value::Enum { member, .. }) => a == member,
        _ => false,
    }
}

/// Integer arithmetic truncates toward zero; `mod` takes the sign of the
/// dividend.
pub fn arith(op: BinOp, a: i64, b: i64) -> EResult<i64> {
    let r = match op {
        BinOp::Add => a.checked_add(b),
        BinOp::Sub => a.checked_sub(b),
        BinOp::Mul => a.checked_mul(b),
        BinOp::Div | BinOp::Mod if b == 0 => return Err(EvalError::DivisionByZero),
        BinOp::Div => a.checked_div(b),
        BinOp::Mod => a.checked_rem(b),
        _ => unreachable!("not an arithmetic operator"),
    };
    r.ok_or(EvalError::Overflow)
}

fn binary(op: BinOp, l: Value, r: Value) -> EResult<Value> {
    Ok(match op {
        BinOp::Eq => Value::Bool(l == r),
        BinOp::Ne => Value::Bool(l != r),
        BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
            let (a, b) = (l.as_int().expect("integer"), r.as_int().expect("integer"));
            Value::Bool(match op {
                BinOp::Lt => a < b,
                BinOp::Le => a <= b,
                BinOp::Gt => a > b,
                _ => a >= b,
            })
        }
        _ => Value::Int(arith(op, l.as_int().expect("integer"), r.as_int().expect("integer"))?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::frontend::compile;

    fn arr(v: &[i64]) -> Value {
        Value::Array(v.iter().map(|&x| Value::Int(x)).collect())
    }

    fn io(pairs: &[(&str, Value)]) -> Io {
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    #[test]
    fn compute_sum_cycles() {
        let tp = compile(fixtures::COMPUTE_SUM).unwrap();
        let sim = Simulator::main(&tp).unwrap();
        let s0 = sim.init_state();
        assert_eq!(s0.fby[&0], vec![Value::Int(0); 3]);
        assert_eq!(s0.automata["STATE"], "init");

        let (o1, s1) = sim.step(&s0, &io(&[("input", arr(&[0; 5])), ("fby_in", Value::Int(0))])).unwrap();
        assert_eq!(o1["output"], arr(&[0; 5]));
        assert_eq!(o1["strucDemo"].to_string(), "{fby_data:0,move:Stop}");
        assert_eq!(s1.automata["STATE"], "stateA");

        let (o2, s2) = sim.step(&s1, &io(&[("input", arr(&[1, 2, 3, 4, 5])), ("fby_in", Value::Int(1))])).unwrap();
        assert_eq!(o2["output"], arr(&[1, 4, 9, 16, 25]));
        assert_eq!(o2["fby_out"], Value::Int(0));
        assert_eq!(o2["strucDemo"].to_string(), "{fby_data:1,move:Forward}");
        assert_eq!(s2.fby[&0], vec![Value::Int(0), Value::Int(0), Value::Int(1)]);
        assert_eq!(s2.automata["STATE"], "stateB");
    }

    #[test]
    fn strong_transition_runs_the_target_body() {
        let tp = compile(fixtures::PROTOCOL_V1).unwrap();
        let sim = Simulator::main(&tp).unwrap();
        let ev = |e: &str| io(&[("input_event", Value::member("INPUT_EVENT", e))]);
        let (o, s) = sim.step(&sim.init_state(), &ev("ConnectRequest")).unwrap();
        assert_eq!(o["process_enable"], Value::Bool(false));
        let (o, s) = sim.step(&s, &ev("ConnectAck")).unwrap();
        assert_eq!(o["process_enable"], Value::Bool(true));
        assert_eq!(s.automata["PRO_STATE"], "Enable");
    }

    #[test]
    fn writes_out_of_range_fail() {
        let tp = compile("node n(x: uint8) returns (y: uint8) let y = x + 250; tel").unwrap();
        let sim = Simulator::main(&tp).unwrap();
        let err = sim.step(&sim.init_state(), &io(&[("x", Value::Int(10))])).unwrap_err();
        assert_eq!(err.kind(), ErrorKind::Range);
        let err = sim.step(&sim.init_state(), &io(&[])).unwrap_err();
        assert_eq!(err, EvalError::MissingInput("x".into()));
    }

    #[test]
    fn division_truncates_and_rejects_zero() {
        assert_eq!(arith(BinOp::Div, -7, 2), Ok(-3));
        assert_eq!(arith(BinOp::Mod, -7, 2), Ok(-1));
        assert_eq!(arith(BinOp::Div, 1, 0), Err(EvalError::DivisionByZero));
    }

    #[test]
    fn fby_delays_by_its_depth() {
        let tp = compile("node n(x: int32) returns (y: int32) let y = fby(x; 2; 9); tel").unwrap();
        let sim = Simulator::main(&tp).unwrap();
        let trace: Vec<Io> = (1..=4).map(|k| io(&[("x", Value::Int(k))])).collect();
        let ys: Vec<_> = sim.run(&trace).unwrap().into_iter().map(|(o, _)| o["y"].clone()).collect();
        assert_eq!(ys, vec![Value::Int(9), Value::Int(9), Value::Int(1), Value::Int(2)]);
    }
}
