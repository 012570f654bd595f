//! Animator for the generated machines.
//!
//! Operations run with their precondition checked, `||` branches checked for
//! disjoint writes, and every `WHILE` instrumented: the loop invariant is
//! evaluated on entry and after each iteration, and the variant must stay a
//! natural number that strictly decreases.

mod eval;

pub(crate) use self::eval::product;
use self::eval::{apply, int, Env, Statics};
use crate::bmachine::*;
use crate::scade_interp::ErrorKind;
use crate::value::Value;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BError {
    #[error("PROPERTIES do not hold: {0}")]
    Properties(String),
    #[error("no operation `{0}`")]
    UnknownOperation(String),
    #[error("`{op}` takes {expected} argument(s), got {found}")]
    Arity { op: String, expected: usize, found: usize },
    #[error("precondition conjunct {index} violated: {text}")]
    PreViolation { index: usize, text: String },
    #[error("invariant conjunct {index} violated: {text}")]
    InvariantViolation { index: usize, text: String },
    #[error("loop variant {text} did not decrease at iteration {iteration} ({before} -> {after})")]
    VariantNonDecrease { iteration: usize, text: String, before: i64, after: i64 },
    #[error("loop variant {text} is negative ({value}) at iteration {iteration}")]
    VariantNegative { iteration: usize, text: String, value: i64 },
    #[error("arithmetic overflow")]
    Overflow,
    #[error("division by zero")]
    DivisionByZero,
    #[error("application outside the domain: index {index} of a function on 0..{len}-1")]
    Domain { index: i64, len: usize },
    #[error("parallel branches both write `{0}`")]
    NonDisjointParallel(String),
    #[error("no CASE branch for {0}")]
    NoCaseBranch(String),
    #[error("`{0}` is read before it is assigned")]
    Unbound(String),
    #[error("type error: {0}")]
    Type(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl BError {
    /// Classification shared with the SCADE interpreter.
    pub fn kind(&self) -> ErrorKind {
        match self {
            BError::PreViolation { .. } | BError::Arity { .. } => ErrorKind::Input,
            BError::InvariantViolation { .. } | BError::Overflow => ErrorKind::Range,
            BError::DivisionByZero => ErrorKind::DivisionByZero,
            BError::Domain { .. } => ErrorKind::Index,
            _ => ErrorKind::Other,
        }
    }
}

type BResult<T> = Result<T, BError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiagnosticKind {
    LoopInvariant,
    MachineInvariant,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    /// Operation, iteration or conjunct concerned.
    pub location: String,
    pub text: String,
}

/// Valuation of the machine variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BState(pub BTreeMap<String, Value>);

impl BState {
    pub fn get(&self, name: &str) -> Option<&Value> {
        self.0.get(name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvokeResult {
    pub outputs: BTreeMap<String, Value>,
    pub state: BState,
    pub diagnostics: Vec<Diagnostic>,
}

/// What to do when the machine invariant fails after an operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvariantMode {
    /// Fail the call.
    Enforce,
    /// Return the state and record a diagnostic.
    Report,
}

pub struct Animator<'m> {
    machine: &'m Machine,
    statics: Statics,
}

impl<'m> Animator<'m> {
    pub fn new(machine: &'m Machine) -> BResult<Self> {
        Ok(Animator {
            machine,
            statics: Statics::new(machine)?,
        })
    }

    pub fn machine(&self) -> &Machine {
        self.machine
    }

    /// Runs INITIALISATION and checks the invariant.
    pub fn init(&self) -> BResult<BState> {
        let state = self.initial_state()?;
        if let Some((index, text)) = self.check_invariant(&state)? {
            return Err(BError::InvariantViolation { index, text });
        }
        Ok(state)
    }

    /// Runs INITIALISATION without checking the invariant.
    pub fn initial_state(&self) -> BResult<BState> {
        let mut run = Run::new(self);
        let mut env = Env::new();
        run.exec(&self.machine.initialisation, &mut env)?;
        let state = BState(
            self.machine
                .variables
                .iter()
                .map(|v| Ok((v.clone(), env.get(v).cloned().ok_or_else(|| BError::Unbound(v.clone()))?)))
                .collect::<BResult<_>>()?,
        );
        Ok(state)
    }

    /// Elements of a finite set expression, `None` if infinite or larger than `cap`.
    pub fn enumerate(&self, set: &BExpr, cap: usize) -> BResult<Option<Vec<Value>>> {
        self.statics.enumerate(set, cap)
    }

    /// First failing conjunct of the invariant, if any.
    pub fn check_invariant(&self, state: &BState) -> BResult<Option<(usize, String)>> {
        for (k, p) in self.machine.invariant.iter().enumerate() {
            if !self.statics.pred(p, &state.0)? {
                return Ok(Some((k, emit_pred(p))));
            }
        }
        Ok(None)
    }

    /// Whether the precondition of `op` holds for `args`.
    pub fn pre_holds(&self, state: &BState, op: &str, args: &[Value]) -> BResult<bool> {
        let o = self.op(op)?;
        let env = self.bind(o, state, args)?;
        for p in &o.pre {
            if !self.statics.pred(p, &env)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn invoke(&self, state: &BState, op: &str, args: &[Value], mode: InvariantMode) -> BResult<InvokeResult> {
        let o = self.op(op)?;
        let mut run = Run::new(self);
        let mut env = self.bind(o, state, args)?;
        run.body(o, &mut env)?;
        let outputs = o
            .outputs
            .iter()
            .map(|n| Ok((n.clone(), env.get(n).cloned().ok_or_else(|| BError::Unbound(n.clone()))?)))
            .collect::<BResult<_>>()?;
        let new_state = BState(self.machine.variables.iter().map(|v| (v.clone(), env[v].clone())).collect());
        let mut diagnostics = run.diagnostics;
        if let Some((index, text)) = self.check_invariant(&new_state)? {
            match mode {
                InvariantMode::Enforce => return Err(BError::InvariantViolation { index, text }),
                InvariantMode::Report => diagnostics.push(Diagnostic {
                    kind: DiagnosticKind::MachineInvariant,
                    location: format!("{op}, conjunct {index}"),
                    text,
                }),
            }
        }
        Ok(InvokeResult {
            outputs,
            state: new_state,
            diagnostics,
        })
    }

    fn op(&self, name: &str) -> BResult<&'m Operation> {
        self.machine
            .operation(name)
            .ok_or_else(|| BError::UnknownOperation(name.to_string()))
    }

    fn bind(&self, o: &Operation, state: &BState, args: &[Value]) -> BResult<Env> {
        if args.len() != o.params.len() {
            return Err(BError::Arity {
                op: o.name.clone(),
                expected: o.params.len(),
                found: args.len(),
            });
        }
        let mut env = state.0.clone();
        for (p, v) in o.params.iter().zip(args) {
            env.insert(p.clone(), v.clone());
        }
        Ok(env)
    }
}

struct Run<'a, 'm> {
    anim: &'a Animator<'m>,
    diagnostics: Vec<Diagnostic>,
}

impl<'a, 'm> Run<'a, 'm> {
    fn new(anim: &'a Animator<'m>) -> Self {
        Run {
            anim,
            diagnostics: Vec::new(),
        }
    }

    fn st(&self) -> &Statics {
        &self.anim.statics
    }

    /// Checks the precondition and executes the body of `o` in `env`.
    fn body(&mut self, o: &Operation, env: &mut Env) -> BResult<()> {
        for (index, p) in o.pre.iter().enumerate() {
            if !self.st().pred(p, env)? {
                return Err(BError::PreViolation {
                    index,
                    text: emit_pred(p),
                });
            }
        }
        for out in &o.outputs {
            env.remove(out);
        }
        self.exec(&o.body, env)
    }

    fn exec(&mut self, s: &Subst, env: &mut Env) -> BResult<()> {
        match s {
            Subst::Skip => {}
            Subst::Assign(lv, e) => {
                let v = self.st().expr(e, env)?;
                self.assign(lv, v, env)?;
            }
            Subst::Seq(xs) => {
                for x in xs {
                    self.exec(x, env)?;
                }
            }
            Subst::Parallel(xs) => {
                let mut merged = env.clone();
                let mut owners: BTreeMap<String, usize> = BTreeMap::new();
                for (k, x) in xs.iter().enumerate() {
                    let mut roots = Vec::new();
                    x.written_roots(&mut roots);
                    let mut branch = env.clone();
                    self.exec(x, &mut branch)?;
                    for r in roots {
                        if owners.insert(r.clone(), k).is_some() {
                            return Err(BError::NonDisjointParallel(r));
                        }
                        match branch.get(&r) {
                            Some(v) => merged.insert(r, v.clone()),
                            None => merged.remove(&r),
                        };
                    }
                }
                *env = merged;
            }
            Subst::If { branches, else_branch } => {
                for (c, b) in branches {
                    if self.st().pred(c, env)? {
                        return self.exec(b, env);
                    }
                }
                if let Some(e) = else_branch {
                    self.exec(e, env)?;
                }
            }
            Subst::Case { scrutinee, arms, else_branch } => {
                let v = self.st().expr(scrutinee, env)?;
                for (labels, b) in arms {
                    for l in labels {
                        if self.st().expr(l, env)? == v {
                            return self.exec(b, env);
                        }
                    }
                }
                match else_branch {
                    Some(e) => self.exec(e, env)?,
                    None => return Err(BError::NoCaseBranch(v.to_b_string())),
                }
            }
            Subst::While { cond, body, invariant, variant } => self.exec_while(cond, body, invariant.as_ref(), variant.as_ref(), env)?,
            Subst::Var { names, body } => {
                let saved: Vec<(String, Option<Value>)> = names.iter().map(|n| (n.clone(), env.remove(n))).collect();
                let r = self.exec(body, env);
                for (n, old) in saved {
                    match old {
                        Some(v) => env.insert(n, v),
                        None => env.remove(&n),
                    };
                }
                r?;
            }
            Subst::OpCall { outputs, op, args } => {
                let o = self.anim.op(op)?;
                let vals = args.iter().map(|a| self.st().expr(a, env)).collect::<BResult<Vec<_>>>()?;
                let mut inner: Env = self
                    .anim
                    .machine
                    .variables
                    .iter()
                    .filter_map(|v| env.get(v).map(|x| (v.clone(), x.clone())))
                    .collect();
                if vals.len() != o.params.len() {
                    return Err(BError::Arity {
                        op: op.clone(),
                        expected: o.params.len(),
                        found: vals.len(),
                    });
                }
                for (p, v) in o.params.iter().zip(vals) {
                    inner.insert(p.clone(), v);
                }
                self.body(o, &mut inner)?;
                for v in &self.anim.machine.variables {
                    if let Some(x) = inner.get(v) {
                        env.insert(v.clone(), x.clone());
                    }
                }
                for (dst, src) in outputs.iter().zip(&o.outputs) {
                    let v = inner.get(src).cloned().ok_or_else(|| BError::Unbound(src.clone()))?;
                    env.insert(dst.clone(), v);
                }
            }
        }
        Ok(())
    }

    fn exec_while(
        &mut self,
        cond: &Pred,
        body: &Subst,
        invariant: Option<&Pred>,
        variant: Option<&BExpr>,
        env: &mut Env,
    ) -> BResult<()> {
        let text = variant.map(emit_expr).unwrap_or_default();
        let mut previous: Option<i64> = None;
        let mut iteration = 0;
        loop {
            if let Some(inv) = invariant {
                if !self.st().pred(inv, env)? {
                    self.diagnostics.push(Diagnostic {
                        kind: DiagnosticKind::LoopInvariant,
                        location: format!("iteration {iteration}"),
                        text: emit_pred(inv),
                    });
                }
            }
            let running = self.st().pred(cond, env)?;
            if let Some(var) = variant {
                let value = int(&self.st().expr(var, env)?)?;
                if let Some(before) = previous {
                    if value >= before {
                        return Err(BError::VariantNonDecrease { iteration, text, before, after: value });
                    }
                }
                if running && value < 0 {
                    return Err(BError::VariantNegative { iteration, text, value });
                }
                previous = Some(value);
            }
            if !running {
                return Ok(());
            }
            if variant.is_none() && iteration > 1_000_000 {
                return Err(BError::Unsupported("WHILE without VARIANT does not terminate".into()));
            }
            self.exec(body, env)?;
            iteration += 1;
        }
    }

    fn assign(&mut self, lv: &LValue, v: Value, env: &mut Env) -> BResult<()> {
        if lv.path.is_empty() {
            env.insert(lv.root.clone(), v);
            return Ok(());
        }
        let mut indices = Vec::with_capacity(lv.path.len());
        for a in &lv.path {
            indices.push(match a {
                Access::Index(i) => Some(int(&self.st().expr(i, env)?)?),
                Access::Field(_) => None,
            });
        }
        let root = env.get_mut(&lv.root).ok_or_else(|| BError::Unbound(lv.root.clone()))?;
        let mut slot = root;
        for (a, i) in lv.path.iter().zip(indices) {
            slot = match (a, i) {
                (Access::Index(_), Some(i)) => {
                    apply(slot, i)?;
                    match slot {
                        Value::Array(cells) => &mut cells[i as usize],
                        _ => unreachable!(),
                    }
                }
                (Access::Field(f), _) => match slot {
                    Value::Record(fields) => fields
                        .iter_mut()
                        .find(|(n, _)| n == f)
                        .map(|(_, x)| x)
                        .ok_or_else(|| BError::Type(format!("no field `{f}`")))?,
                    other => return Err(BError::Type(format!("{} is not a record", other.to_b_string()))),
                },
                _ => unreachable!(),
            };
        }
        *slot = v;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn machine(src: &str) -> Machine {
        parse_machine(src).unwrap()
    }

    fn arr(v: &[i64]) -> Value {
        Value::Array(v.iter().map(|&x| Value::Int(x)).collect())
    }

    #[test]
    fn compute_sum_golden_runs() {
        let m = machine(fixtures::COMPUTE_SUM_MCH);
        let a = Animator::new(&m).unwrap();
        let s0 = a.init().unwrap();
        assert_eq!(s0.get("store"), Some(&arr(&[0, 0, 0])));
        assert_eq!(s0.get("sm_state"), Some(&Value::member("STATE", "init")));
        let r1 = a.invoke(&s0, "ComputeSum", &[arr(&[0; 5]), Value::Int(0)], InvariantMode::Enforce).unwrap();
        let r2 = a.invoke(&r1.state, "ComputeSum", &[arr(&[1, 2, 3, 4, 5]), Value::Int(1)], InvariantMode::Enforce).unwrap();
        let r3 = a
            .invoke(&r2.state, "ComputeSum", &[arr(&[6, 7, 8, 9, 10]), Value::Int(2)], InvariantMode::Enforce)
            .unwrap();
        assert_eq!(r3.outputs["output"], arr(&[36, 49, 64, 81, 100]));
        assert_eq!(r3.outputs["fby_out"], Value::Int(0));
        assert_eq!(r3.outputs["strucDemo"].to_b_string(), "rec(fby_data: 2, move: Reverse)");
        assert_eq!(r3.state.get("store"), Some(&arr(&[0, 1, 2])));
        assert_eq!(r3.state.get("sm_state"), Some(&Value::member("STATE", "stateA")));
        assert!(r3.diagnostics.is_empty());
    }

    #[test]
    fn precondition_rejects_out_of_range_input() {
        let m = machine(fixtures::COMPUTE_SUM_MCH);
        let a = Animator::new(&m).unwrap();
        let s0 = a.init().unwrap();
        let err = a.invoke(&s0, "ComputeSum", &[arr(&[0; 5]), Value::Int(300)], InvariantMode::Enforce).unwrap_err();
        assert!(matches!(err, BError::PreViolation { index: 1, .. }), "{err}");
    }

    #[test]
    fn invariant_violation_is_reported_or_enforced() {
        let m = machine(fixtures::PROTOCOL_V1_MCH);
        let a = Animator::new(&m).unwrap();
        let mut s = a.init().unwrap();
        assert_eq!(s.get("connection_state"), Some(&Value::member("CON_STATE", "Disconnected")));
        for e in ["ConnectRequest", "ConnectAck"] {
            s = a.invoke(&s, "HandleEvent", &[Value::member("INPUT_EVENT", e)], InvariantMode::Enforce).unwrap().state;
        }
        let ev = [Value::member("INPUT_EVENT", "DisconnectRequest")];
        let r = a.invoke(&s, "HandleEvent", &ev, InvariantMode::Report).unwrap();
        assert_eq!(r.outputs["process_enable"], Value::Bool(false));
        assert_eq!(r.state.get("process_state"), Some(&Value::member("PRO_STATE", "Enable")));
        let (k, text) = a.check_invariant(&r.state).unwrap().unwrap();
        assert_eq!((k, text.as_str()), (2, "process_state = Enable => connection_state = Connected"));
        assert_eq!(r.diagnostics[0].kind, DiagnosticKind::MachineInvariant);
        assert!(matches!(
            a.invoke(&s, "HandleEvent", &ev, InvariantMode::Enforce),
            Err(BError::InvariantViolation { index: 2, .. })
        ));
    }

    #[test]
    fn bad_initialisation_is_rejected() {
        let m = machine("MACHINE m VARIABLES x INVARIANT x : 0..1 INITIALISATION x := 5 END");
        let err = Animator::new(&m).unwrap().init().unwrap_err();
        assert!(matches!(err, BError::InvariantViolation { index: 0, .. }));
    }

    #[test]
    fn loop_annotations_are_checked() {
        let m = machine(
            "MACHINE m OPERATIONS r <-- run = BEGIN VAR i IN i := 0;
               WHILE i < 3 DO i := i + 1 INVARIANT i < 2 VARIANT 3 - i END; r := i END END END",
        );
        let a = Animator::new(&m).unwrap();
        let res = a.invoke(&a.init().unwrap(), "run", &[], InvariantMode::Enforce).unwrap();
        assert_eq!(res.outputs["r"], Value::Int(3));
        assert_eq!(res.diagnostics.len(), 2);

        let m = machine(
            "MACHINE m OPERATIONS r <-- run = BEGIN VAR i IN i := 0;
               WHILE i < 3 DO i := i + 1 INVARIANT TRUE = TRUE VARIANT 5 END; r := i END END END",
        );
        let a = Animator::new(&m).unwrap();
        let err = a.invoke(&a.init().unwrap(), "run", &[], InvariantMode::Enforce).unwrap_err();
        assert!(matches!(err, BError::VariantNonDecrease { iteration: 1, .. }), "{err}");
    }

    #[test]
    fn parallel_writes_must_be_disjoint() {
        let m = machine("MACHINE m VARIABLES x INVARIANT x : INTEGER INITIALISATION x := 1 || x := 2 END");
        let err = Animator::new(&m).unwrap().init().unwrap_err();
        assert_eq!(err, BError::NonDisjointParallel("x".into()));
    }

    #[test]
    fn override_changes_one_cell() {
        let m = machine(
            "MACHINE m VARIABLES f INVARIANT f : 0..3 --> INTEGER
             INITIALISATION f := (0..3) * {7}
             OPERATIONS set(i) = PRE i : 0..3 THEN f(i) := 0 END END",
        );
        let a = Animator::new(&m).unwrap();
        let r = a.invoke(&a.init().unwrap(), "set", &[Value::Int(2)], InvariantMode::Enforce).unwrap();
        assert_eq!(r.state.get("f"), Some(&arr(&[7, 7, 0, 7])));
    }
}
