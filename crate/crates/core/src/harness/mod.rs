//! Lock-step comparison of a SCADE node with its translated machine.
//!
//! Each cycle feeds the same inputs to both interpreters and compares the
//! outputs, then the buffers and automaton states through the binding
//! produced by the translator. The run stops at the first mismatch.

pub mod trace;

pub use self::trace::{format_line, parse_value, Provenance, Trace, TraceError};

use crate::b_interp::{Animator, BError, BState, Diagnostic, DiagnosticKind, InvariantMode};
use crate::bmachine::{Access, BExpr, Machine, Subst};
use crate::scade_interp::{ErrorKind, EvalError, Io, NodeState, Simulator};
use crate::translator::Binding;
use crate::value::Value;
use std::fmt;

/// What one side shows after a cycle, in SCADE naming. State entries are
/// keyed by buffer variable and automaton name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation {
    pub outputs: Io,
    pub state: Io,
}

impl Observation {
    pub fn of_scade(outputs: Io, state: &NodeState, binding: &Binding) -> Observation {
        let mut obs = Io::new();
        for (id, store) in &binding.fby {
            obs.insert(store.clone(), Value::Array(state.fby[id].clone()));
        }
        for (sm, _) in &binding.automata {
            obs.insert(sm.clone(), Value::member(sm.clone(), state.automata[sm].clone()));
        }
        Observation { outputs, state: obs }
    }

    pub fn of_b(outputs: &Io, state: &BState, binding: &Binding) -> Observation {
        let outs = binding
            .outputs
            .iter()
            .filter_map(|(s, b)| outputs.get(b).map(|v| (s.clone(), binding.to_scade(v))))
            .collect();
        let mut obs = Io::new();
        for (_, store) in &binding.fby {
            if let Some(v) = state.get(store) {
                obs.insert(store.clone(), binding.to_scade(v));
            }
        }
        for (sm, var) in &binding.automata {
            if let Some(v) = state.get(var) {
                obs.insert(sm.clone(), binding.to_scade(v));
            }
        }
        Observation { outputs: outs, state: obs }
    }

    /// `out=.. | state=..` in trace notation.
    pub fn render(&self) -> String {
        if self.state.is_empty() {
            format_line(&self.outputs)
        } else {
            format!("{} | {}", format_line(&self.outputs), format_line(&self.state))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivergenceKind {
    Output,
    State,
    /// One side failed, or both failed differently.
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Divergence {
    /// 1-based.
    pub cycle: usize,
    pub kind: DivergenceKind,
    pub name: String,
    pub scade: String,
    pub b: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DiffReport {
    pub cycles_compared: usize,
    pub divergence: Option<Divergence>,
    /// Loop annotation failures seen on the B side, with their cycle.
    pub diagnostics: Vec<(usize, Diagnostic)>,
    /// Machine invariant breaches on the B side. They do not stop the run.
    pub invariant_breaches: Vec<(usize, Diagnostic)>,
    /// Both sides failed alike at this cycle, which ended the run.
    pub common_error: Option<(usize, String)>,
}

impl DiffReport {
    pub fn is_equivalent(&self) -> bool {
        self.divergence.is_none()
    }
}

impl fmt::Display for DiffReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.divergence {
            None => write!(f, "equivalent, {} cycle(s) compared", self.cycles_compared)?,
            Some(d) => write!(
                f,
                "divergent at cycle {} ({}) on `{}`: scade {} vs b {}",
                d.cycle,
                match d.kind {
                    DivergenceKind::Output => "output",
                    DivergenceKind::State => "state",
                    DivergenceKind::Error => "error",
                },
                d.name,
                d.scade,
                d.b
            )?,
        }
        if let Some((c, e)) = &self.common_error {
            write!(f, "; both sides stopped at cycle {c}: {e}")?;
        }
        if !self.diagnostics.is_empty() {
            write!(f, "; {} loop diagnostic(s)", self.diagnostics.len())?;
        }
        if let Some((c, d)) = self.invariant_breaches.first() {
            write!(f, "; machine invariant first broken at cycle {c}: {}", d.text)?;
        }
        Ok(())
    }
}

fn scade_kind(e: &EvalError, sim: &Simulator) -> ErrorKind {
    match e {
        EvalError::Range { var, .. } if sim.node().inputs.iter().any(|p| &p.name == var) => ErrorKind::Input,
        other => other.kind(),
    }
}

/// One B cycle: arguments are taken from `inputs` in parameter order. A
/// broken machine invariant is returned as a diagnostic.
pub fn b_step(anim: &Animator, binding: &Binding, state: &BState, inputs: &Io) -> Result<(Observation, BState, Vec<Diagnostic>), BError> {
    let args = binding
        .inputs
        .iter()
        .map(|(s, _)| inputs.get(s).map(|v| binding.to_b(v)))
        .collect::<Option<Vec<_>>>()
        .ok_or(BError::Arity {
            op: binding.operation.clone(),
            expected: binding.inputs.len(),
            found: inputs.len(),
        })?;
    let r = anim.invoke(state, &binding.operation, &args, InvariantMode::Report)?;
    Ok((Observation::of_b(&r.outputs, &r.state, binding), r.state, r.diagnostics))
}

pub fn run_lockstep(sim: &Simulator, anim: &Animator, binding: &Binding, trace: &[Io]) -> DiffReport {
    let mut report = DiffReport::default();
    let mut s_state = sim.init_state();
    let mut b_state = match anim.init() {
        Ok(s) => s,
        Err(e) => {
            report.divergence = Some(Divergence {
                cycle: 0,
                kind: DivergenceKind::Error,
                name: "INITIALISATION".into(),
                scade: "ok".into(),
                b: e.to_string(),
            });
            return report;
        }
    };
    let initial = Observation::of_scade(Io::new(), &s_state, binding);
    let b_initial = Observation::of_b(&Io::new(), &b_state, binding);
    if let Some(d) = first_mismatch(0, &initial, &b_initial) {
        report.divergence = Some(d);
        return report;
    }
    for (k, inputs) in trace.iter().enumerate() {
        let cycle = k + 1;
        let s = sim.step(&s_state, inputs);
        let b = b_step(anim, binding, &b_state, inputs);
        report.cycles_compared = cycle;
        match (s, b) {
            (Ok((outs, ns)), Ok((b_obs, nb, diags))) => {
                for d in diags {
                    match d.kind {
                        DiagnosticKind::MachineInvariant => report.invariant_breaches.push((cycle, d)),
                        DiagnosticKind::LoopInvariant => report.diagnostics.push((cycle, d)),
                    }
                }
                let s_obs = Observation::of_scade(outs, &ns, binding);
                if let Some(d) = first_mismatch(cycle, &s_obs, &b_obs) {
                    report.divergence = Some(d);
                    return report;
                }
                s_state = ns;
                b_state = nb;
            }
            (Err(se), Err(be)) if scade_kind(&se, sim) == be.kind() => {
                report.common_error = Some((cycle, se.to_string()));
                return report;
            }
            (s, b) => {
                let show = |r: Result<String, String>| r.unwrap_or_else(|e| format!("error: {e}"));
                report.divergence = Some(Divergence {
                    cycle,
                    kind: DivergenceKind::Error,
                    name: binding.operation.clone(),
                    scade: show(s.map(|_| "ok".into()).map_err(|e| e.to_string())),
                    b: show(b.map(|_| "ok".into()).map_err(|e| e.to_string())),
                });
                return report;
            }
        }
    }
    report
}

fn first_mismatch(cycle: usize, s: &Observation, b: &Observation) -> Option<Divergence> {
    let sides = [(DivergenceKind::Output, &s.outputs, &b.outputs), (DivergenceKind::State, &s.state, &b.state)];
    for (kind, sv, bv) in sides {
        let names = sv.keys().chain(bv.keys().filter(|k| !sv.contains_key(*k)));
        for name in names {
            let (x, y) = (sv.get(name), bv.get(name));
            if x != y {
                let show = |v: Option<&Value>| v.map(|v| v.to_string()).unwrap_or_else(|| "<missing>".into());
                return Some(Divergence {
                    cycle,
                    kind,
                    name: name.clone(),
                    scade: show(x),
                    b: show(y),
                });
            }
        }
    }
    None
}

/// Removes the first `store(cell) := store(cell + 1)` from every operation.
/// Returns whether one was found.
pub fn drop_fby_shift(machine: &mut Machine, store: &str, cell: i64) -> bool {
    fn is_shift(s: &Subst, store: &str, cell: i64) -> bool {
        let Subst::Assign(lv, BExpr::Apply(f, i)) = s else { return false };
        lv.root == store
            && matches!(lv.path.as_slice(), [Access::Index(BExpr::Int(c))] if *c == cell)
            && matches!(f.as_ref(), BExpr::Ident(n) if n == store)
            && matches!(i.as_ref(), BExpr::Int(c) if *c == cell + 1)
    }
    fn walk(s: &mut Subst, store: &str, cell: i64) -> bool {
        match s {
            Subst::Seq(xs) | Subst::Parallel(xs) => {
                if let Some(k) = xs.iter().position(|x| is_shift(x, store, cell)) {
                    xs.remove(k);
                    return true;
                }
                xs.iter_mut().any(|x| walk(x, store, cell))
            }
            Subst::If { branches, else_branch } => {
                branches.iter_mut().any(|(_, b)| walk(b, store, cell))
                    || else_branch.as_mut().is_some_and(|e| walk(e, store, cell))
            }
            Subst::Case { arms, else_branch, .. } => {
                arms.iter_mut().any(|(_, b)| walk(b, store, cell))
                    || else_branch.as_mut().is_some_and(|e| walk(e, store, cell))
            }
            Subst::While { body, .. } | Subst::Var { body, .. } => walk(body, store, cell),
            _ => false,
        }
    }
    machine.operations.iter_mut().any(|o| walk(&mut o.body, store, cell))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::frontend::compile;
    use crate::translator::translate;

    fn compute_sum_run() -> (crate::frontend::TypedProgram, Trace) {
        let tp = compile(fixtures::COMPUTE_SUM).unwrap();
        let (inputs, _) = tp.signature("ComputeSum").unwrap();
        let t = Trace::parse(fixtures::COMPUTE_SUM_TRACE, &inputs, &tp.env).unwrap();
        (tp, t)
    }

    #[test]
    fn compute_sum_is_equivalent() {
        let (tp, t) = compute_sum_run();
        let tr = translate(&tp).unwrap();
        let sim = Simulator::main(&tp).unwrap();
        let anim = Animator::new(&tr.machine).unwrap();
        let r = run_lockstep(&sim, &anim, &tr.binding, &t.cycles);
        assert!(r.is_equivalent(), "{r}");
        assert_eq!(r.cycles_compared, 5);
        assert!(r.diagnostics.is_empty());
        let r = run_lockstep(&sim, &anim, &tr.binding, &[]);
        assert_eq!((r.is_equivalent(), r.cycles_compared), (true, 0));
    }

    #[test]
    fn dropped_shift_is_caught() {
        let (tp, t) = compute_sum_run();
        let mut tr = translate(&tp).unwrap();
        assert!(drop_fby_shift(&mut tr.machine, "store", 1));
        let sim = Simulator::main(&tp).unwrap();
        let anim = Animator::new(&tr.machine).unwrap();
        let r = run_lockstep(&sim, &anim, &tr.binding, &t.cycles);
        let d = r.divergence.unwrap();
        assert_eq!((d.cycle, d.kind, d.name.as_str()), (3, DivergenceKind::State, "store"));
    }

    #[test]
    fn matching_failures_end_the_run_quietly() {
        let tp = compile("node n(x: uint8) returns (y: uint8) let y = x / (x - x); tel").unwrap();
        let tr = translate(&tp).unwrap();
        let sim = Simulator::main(&tp).unwrap();
        let anim = Animator::new(&tr.machine).unwrap();
        let cycle: Io = [("x".to_string(), Value::Int(1))].into();
        let r = run_lockstep(&sim, &anim, &tr.binding, &[cycle]);
        assert!(r.is_equivalent(), "{r}");
        assert_eq!(r.common_error.unwrap().0, 1);
    }

    #[test]
    fn broken_machine_invariant_is_reported_not_divergent() {
        let tp = compile(fixtures::PROTOCOL_V1).unwrap();
        let tr = translate(&tp).unwrap();
        let sim = Simulator::main(&tp).unwrap();
        let anim = Animator::new(&tr.machine).unwrap();
        let (inputs, _) = tp.signature("HandleEvent").unwrap();
        let text = "input_event=ConnectRequest\ninput_event=ConnectAck\ninput_event=DisconnectRequest\n";
        let t = Trace::parse(text, &inputs, &tp.env).unwrap();
        let r = run_lockstep(&sim, &anim, &tr.binding, &t.cycles);
        assert!(r.is_equivalent(), "{r}");
        assert_eq!(r.invariant_breaches.len(), 1);
        assert_eq!(r.invariant_breaches[0].0, 3);
        assert!(r.to_string().contains("machine invariant first broken at cycle 3"), "{r}");
    }
}
