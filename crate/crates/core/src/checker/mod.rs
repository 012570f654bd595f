//! Explicit-state invariant checking of a machine.
//!
//! States are explored breadth first from INITIALISATION. Every operation that
//! can change a machine variable is fired with every argument tuple drawn from
//! the parameter domains. The first reachable state that breaks the invariant
//! yields a shortest counterexample.

use crate::b_interp::{product, Animator, BError, BState, InvariantMode};
use crate::bmachine::{BExpr, Machine, Operation, Pred, Subst};
use crate::value::Value;
use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use thiserror::Error;

/// Largest number of argument tuples enumerated for one operation.
pub const TUPLE_CAP: usize = 1 << 20;

#[derive(Debug, Error)]
pub enum CheckError {
    #[error(transparent)]
    Machine(#[from] BError),
    #[error("parameter `{param}` of `{op}` has no typing conjunct in its precondition")]
    Untyped { op: String, param: String },
    #[error("parameter `{param}` of `{op}` ranges over a set that is infinite or too large; bound it with --domain {param}=LO..HI")]
    Unbounded { op: String, param: String },
    #[error("`{op}` has more than {TUPLE_CAP} argument tuples")]
    TooManyTuples { op: String },
    #[error("bad domain override `{0}`: expected NAME=LO..HI")]
    BadOverride(String),
    #[error("domain override names unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("INITIALISATION failed: {0}")]
    Init(BError),
    #[error("`{op}` failed at depth {depth}: {source}")]
    Step {
        op: String,
        depth: usize,
        source: BError,
    },
}

/// Integer bounds replacing the declared range of a parameter, or of each
/// cell when the parameter is an array.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Overrides(pub BTreeMap<String, (i64, i64)>);

impl Overrides {
    /// Adds one `name=lo..hi` entry.
    pub fn add(&mut self, spec: &str) -> Result<(), CheckError> {
        let bad = || CheckError::BadOverride(spec.to_string());
        let (name, range) = spec.split_once('=').ok_or_else(bad)?;
        let (lo, hi) = range.split_once("..").ok_or_else(bad)?;
        let lo = lo.trim().parse().map_err(|_| bad())?;
        let hi = hi.trim().parse().map_err(|_| bad())?;
        self.0.insert(name.trim().to_string(), (lo, hi));
        Ok(())
    }
}

/// Argument tuples per explored operation, in declaration order.
#[derive(Debug, Clone)]
pub struct Domains {
    pub ops: Vec<(String, Vec<Vec<Value>>)>,
}

impl Domains {
    /// Enumerates the domains of every state-changing operation.
    pub fn derive(anim: &Animator, overrides: &Overrides) -> Result<Domains, CheckError> {
        let m = anim.machine();
        let mut used = vec![false; overrides.0.len()];
        let mut ops = Vec::new();
        for o in &m.operations {
            if !changes_state(m, o) {
                continue;
            }
            let mut axes = Vec::new();
            for p in &o.params {
                let set = param_set(o, p).ok_or_else(|| CheckError::Untyped {
                    op: o.name.clone(),
                    param: p.clone(),
                })?;
                let set = match overrides.0.iter().position(|(n, _)| n == p) {
                    Some(k) => {
                        used[k] = true;
                        let (lo, hi) = overrides.0[p];
                        narrow(set, lo, hi)
                    }
                    None => set.clone(),
                };
                let xs = anim.enumerate(&set, TUPLE_CAP)?.ok_or_else(|| CheckError::Unbounded {
                    op: o.name.clone(),
                    param: p.clone(),
                })?;
                axes.push(xs);
            }
            let tuples = product(&axes, TUPLE_CAP).ok_or_else(|| CheckError::TooManyTuples { op: o.name.clone() })?;
            ops.push((o.name.clone(), tuples));
        }
        if let Some(k) = used.iter().position(|u| !u) {
            let name = overrides.0.keys().nth(k).cloned().unwrap_or_default();
            return Err(CheckError::UnknownParameter(name));
        }
        Ok(Domains { ops })
    }
}

fn param_set<'o>(o: &'o Operation, p: &str) -> Option<&'o BExpr> {
    o.pre.iter().find_map(|c| match c {
        Pred::Member(BExpr::Ident(n), s) if n == p => Some(s),
        _ => None,
    })
}

fn narrow(set: &BExpr, lo: i64, hi: i64) -> BExpr {
    match set {
        BExpr::TotalFun(dom, ran) => BExpr::total_fun((**dom).clone(), narrow(ran, lo, hi)),
        _ => BExpr::interval(BExpr::Int(lo), BExpr::Int(hi)),
    }
}

/// Whether `o` may write a machine variable, directly or through a call.
fn changes_state(m: &Machine, o: &Operation) -> bool {
    fn calls(s: &Subst, out: &mut Vec<String>) {
        match s {
            Subst::OpCall { op, .. } => out.push(op.clone()),
            Subst::Seq(xs) | Subst::Parallel(xs) => xs.iter().for_each(|x| calls(x, out)),
            Subst::If { branches, else_branch } => {
                branches.iter().for_each(|(_, b)| calls(b, out));
                else_branch.iter().for_each(|e| calls(e, out));
            }
            Subst::Case { arms, else_branch, .. } => {
                arms.iter().for_each(|(_, b)| calls(b, out));
                else_branch.iter().for_each(|e| calls(e, out));
            }
            Subst::While { body, .. } | Subst::Var { body, .. } => calls(body, out),
            Subst::Skip | Subst::Assign(..) => {}
        }
    }
    let mut seen = vec![o.name.clone()];
    let mut todo = vec![o];
    while let Some(o) = todo.pop() {
        let mut written = Vec::new();
        o.body.written_roots(&mut written);
        if written.iter().any(|w| m.variables.contains(w)) {
            return true;
        }
        let mut callees = Vec::new();
        calls(&o.body, &mut callees);
        for c in callees {
            if !seen.contains(&c) {
                if let Some(callee) = m.operation(&c) {
                    todo.push(callee);
                }
                seen.push(c);
            }
        }
    }
    false
}

/// One fired operation and the state it leads to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub op: String,
    pub args: Vec<(String, Value)>,
    pub outputs: Vec<(String, Value)>,
    pub state: BState,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub initial: BState,
    pub steps: Vec<Step>,
    /// Index and text of the first failing invariant conjunct.
    pub conjunct: (usize, String),
}

impl Counterexample {
    pub fn final_state(&self) -> &BState {
        self.steps.last().map(|s| &s.state).unwrap_or(&self.initial)
    }

    /// Numbered transition list.
    pub fn table(&self) -> String {
        let mut rows = vec![("0".to_string(), "INITIALISATION".to_string())];
        for (k, s) in self.steps.iter().enumerate() {
            let args = s
                .args
                .iter()
                .map(|(n, v)| format!("{n}={}", v.to_b_string()))
                .collect::<Vec<_>>()
                .join(", ");
            let mut call = format!("{}({args})", s.op);
            if !s.outputs.is_empty() {
                let outs = s.outputs.iter().map(|(_, v)| v.to_b_string()).collect::<Vec<_>>();
                call.push_str(&format!(" -> {}", outs.join(", ")));
            }
            rows.push(((k + 1).to_string(), call));
        }
        let mut out = String::from("Position  Transition\n");
        for (p, t) in rows {
            out.push_str(&format!("{p:<9} {t}\n"));
        }
        let state = self.final_state();
        let prev = self.steps.len().checked_sub(2).map(|k| &self.steps[k].state).unwrap_or(&self.initial);
        let width = state.0.keys().map(|k| k.len()).max().unwrap_or(0).max(8);
        let rows: Vec<(&String, String, String)> = state
            .0
            .iter()
            .map(|(name, v)| {
                let before = match self.steps.is_empty() {
                    true => "-".to_string(),
                    false => prev.get(name).map(|x| x.to_b_string()).unwrap_or_default(),
                };
                (name, v.to_b_string(), before)
            })
            .collect();
        let vw = rows.iter().map(|r| r.1.len()).max().unwrap_or(0).max(5);
        out.push_str(&format!("\n{:<width$}  {:<vw$}  Previous\n", "Variable", "Value"));
        for (name, v, before) in rows {
            out.push_str(&format!("{name:<width$}  {v:<vw$}  {before}\n"));
        }
        out.push_str(&format!("\nviolated: {}\n", self.conjunct.1));
        out
    }

    /// One `op=.. name=value ..` line per step, replayable by hand.
    pub fn trace_lines(&self) -> String {
        self.steps
            .iter()
            .map(|s| {
                let mut parts = vec![format!("op={}", s.op)];
                parts.extend(s.args.iter().map(|(n, v)| format!("{n}={v}")));
                parts.join(" ") + "\n"
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Verified { states: usize, transitions: usize },
    Violation(Counterexample),
    BoundExceeded { states: usize, bound: usize },
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Verified { states, transitions } => {
                write!(f, "invariant holds: {states} state(s), {transitions} transition(s) explored")
            }
            Outcome::Violation(c) => write!(
                f,
                "invariant violated after {} step(s): {}",
                c.steps.len(),
                c.conjunct.1
            ),
            Outcome::BoundExceeded { states, bound } => {
                write!(f, "state bound {bound} reached after {states} state(s); result inconclusive")
            }
        }
    }
}

/// Breadth-first exploration up to `max_states` distinct states.
pub fn explore(anim: &Animator, domains: &Domains, max_states: usize) -> Result<Outcome, CheckError> {
    let m = anim.machine();
    let init = anim.initial_state().map_err(CheckError::Init)?;
    if let Some(c) = anim.check_invariant(&init)? {
        return Ok(Outcome::Violation(Counterexample {
            initial: init,
            steps: Vec::new(),
            conjunct: c,
        }));
    }
    let mut states = vec![init.clone()];
    let mut index: HashMap<BState, usize> = HashMap::from([(init, 0)]);
    let mut parent: Vec<Option<(usize, Step)>> = vec![None];
    let mut depth = vec![0usize];
    let mut queue = VecDeque::from([0usize]);
    let mut transitions = 0;
    while let Some(cur) = queue.pop_front() {
        for (op, tuples) in &domains.ops {
            let params = &m.operation(op).expect("domain of a known operation").params;
            for args in tuples {
                let from = &states[cur];
                if !anim.pre_holds(from, op, args)? {
                    continue;
                }
                let r = anim
                    .invoke(from, op, args, InvariantMode::Report)
                    .map_err(|source| CheckError::Step {
                        op: op.clone(),
                        depth: depth[cur] + 1,
                        source,
                    })?;
                transitions += 1;
                if index.contains_key(&r.state) {
                    continue;
                }
                if states.len() >= max_states {
                    return Ok(Outcome::BoundExceeded {
                        states: states.len(),
                        bound: max_states,
                    });
                }
                let step = Step {
                    op: op.clone(),
                    args: params.iter().cloned().zip(args.iter().cloned()).collect(),
                    outputs: r.outputs.into_iter().collect(),
                    state: r.state.clone(),
                };
                let id = states.len();
                index.insert(r.state.clone(), id);
                states.push(r.state);
                parent.push(Some((cur, step)));
                depth.push(depth[cur] + 1);
                if let Some(c) = anim.check_invariant(&states[id])? {
                    return Ok(Outcome::Violation(unwind(&states, &parent, id, c)));
                }
                queue.push_back(id);
            }
        }
    }
    Ok(Outcome::Verified {
        states: states.len(),
        transitions,
    })
}

fn unwind(states: &[BState], parent: &[Option<(usize, Step)>], mut at: usize, conjunct: (usize, String)) -> Counterexample {
    let mut steps = Vec::new();
    while let Some((p, s)) = &parent[at] {
        steps.push(s.clone());
        at = *p;
    }
    steps.reverse();
    Counterexample {
        initial: states[0].clone(),
        steps,
        conjunct,
    }
}

/// Re-executes a counterexample and confirms it ends in a violating state.
pub fn replay(anim: &Animator, cex: &Counterexample) -> Result<bool, CheckError> {
    let mut state = anim.initial_state().map_err(CheckError::Init)?;
    if state != cex.initial {
        return Ok(false);
    }
    for s in &cex.steps {
        let args: Vec<Value> = s.args.iter().map(|(_, v)| v.clone()).collect();
        let r = anim.invoke(&state, &s.op, &args, InvariantMode::Report)?;
        if r.state != s.state || r.outputs.into_iter().collect::<Vec<_>>() != s.outputs {
            return Ok(false);
        }
        state = r.state;
    }
    Ok(anim.check_invariant(&state)?.is_some())
}

/// Convenience wrapper over [`Domains::derive`] and [`explore`].
pub fn check(machine: &Machine, overrides: &Overrides, max_states: usize) -> Result<Outcome, CheckError> {
    let anim = Animator::new(machine)?;
    let domains = Domains::derive(&anim, overrides)?;
    explore(&anim, &domains, max_states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bmachine::parse_machine;
    use crate::fixtures;
    use crate::frontend::compile;
    use crate::translator::translate;

    fn protocol(src: &str) -> Machine {
        translate(&compile(src).unwrap()).unwrap().machine
    }

    #[test]
    fn first_protocol_breaks_the_safety_invariant() {
        let m = protocol(fixtures::PROTOCOL_V1);
        let Outcome::Violation(c) = check(&m, &Overrides::default(), 1000).unwrap() else {
            panic!("expected a violation")
        };
        let ops: Vec<String> = c.steps.iter().map(|s| s.args[0].1.to_b_string()).collect();
        assert_eq!(ops, ["ConnectRequest", "ConnectAck", "DisconnectRequest"]);
        let outs: Vec<String> = c.steps.iter().map(|s| s.outputs[0].1.to_b_string()).collect();
        assert_eq!(outs, ["FALSE", "TRUE", "FALSE"]);
        let last = c.final_state();
        assert_eq!(last.get("connection_state").unwrap().to_b_string(), "Disconnecting");
        assert_eq!(last.get("process_state").unwrap().to_b_string(), "Enable");
        assert!(c.conjunct.1.starts_with("process_state = Enable"), "{}", c.conjunct.1);
        let anim = Animator::new(&m).unwrap();
        assert!(replay(&anim, &c).unwrap());
        let t = c.table();
        assert!(t.contains("3         HandleEvent(input_event=DisconnectRequest) -> FALSE"), "{t}");
        assert_eq!(c.trace_lines().lines().count(), 3);
    }

    #[test]
    fn repaired_protocol_is_verified() {
        let m = protocol(fixtures::PROTOCOL_V2);
        let r = check(&m, &Overrides::default(), 1000).unwrap();
        assert!(matches!(r, Outcome::Verified { states: 4, .. }), "{r}");
    }

    #[test]
    fn state_bound_is_reported() {
        let m = protocol(fixtures::PROTOCOL_V2);
        let r = check(&m, &Overrides::default(), 2).unwrap();
        assert_eq!(r, Outcome::BoundExceeded { states: 2, bound: 2 });
    }

    #[test]
    fn golden_machines_check_like_translated_ones() {
        let m = parse_machine(fixtures::PROTOCOL_V1_MCH).unwrap();
        assert!(matches!(check(&m, &Overrides::default(), 100).unwrap(), Outcome::Violation(_)));
    }

    #[test]
    fn wide_parameters_need_a_bound() {
        let m = translate(&compile(fixtures::COMPUTE_SUM).unwrap()).unwrap().machine;
        let e = check(&m, &Overrides::default(), 10).unwrap_err();
        assert!(matches!(e, CheckError::Unbounded { .. } | CheckError::TooManyTuples { .. }), "{e}");
        let mut o = Overrides::default();
        o.add("input=0..1").unwrap();
        o.add("fby_in=0..1").unwrap();
        let r = check(&m, &o, 50).unwrap();
        assert!(matches!(r, Outcome::BoundExceeded { .. } | Outcome::Verified { .. }), "{r}");
        assert!(Overrides::default().add("x=1").is_err());
    }

    #[test]
    fn violated_initialisation_is_a_zero_step_counterexample() {
        let src = "MACHINE M\nVARIABLES x\nINVARIANT x : 0..3 & x > 0\nINITIALISATION x := 0\n\
                   OPERATIONS\nbump = BEGIN x := x + 1 END\nEND";
        let m = parse_machine(src).unwrap();
        let Outcome::Violation(c) = check(&m, &Overrides::default(), 10).unwrap() else { panic!() };
        assert!(c.steps.is_empty());
        assert_eq!(c.conjunct.0, 1);
    }
}
