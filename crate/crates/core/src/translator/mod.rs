//! Translation of a typed SCADE program into one B abstract machine.
//!
//! The driven node becomes one operation. Its `fby` buffers and automata
//! become machine variables, iterators become `WHILE` loops, and operators
//! that cannot be inlined into a loop become extra operations.

pub mod expr;
mod hof;
pub mod names;
pub mod simplify;

use self::expr::{assign, b_type, pred, struct_type, value_expr, Renaming};
use self::names::{mangle, rename_value, unmangle, NameSet};
use crate::bmachine::*;
use crate::frontend::ast::*;
use crate::frontend::schedule::dependency_order;
use crate::frontend::types::IntKind;
use crate::frontend::{NodeInfo, TypedProgram, Unit};
use crate::value::Value;
use std::collections::{BTreeSet, HashMap};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error("the program declares no node")]
    NoNode,
    #[error("{line}:{col}: invalid invariant pragma: {message}")]
    Pragma { line: u32, col: u32, message: String },
    #[error("state variable `{0}` clashes with another name")]
    StateVarClash(String),
    #[error("unsupported construct: {0}")]
    Unsupported(String),
    #[error("generated machine is ill-formed: {}", .0.join("; "))]
    IllFormed(Vec<String>),
}

pub(crate) type TResult<T> = Result<T, TranslateError>;

/// Correspondence between the translated node and the machine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binding {
    pub node: String,
    pub operation: String,
    /// (SCADE name, B name), in declaration order.
    pub inputs: Vec<(String, String)>,
    pub outputs: Vec<(String, String)>,
    /// (fby instance id, buffer variable)
    pub fby: Vec<(usize, String)>,
    /// (automaton, state variable)
    pub automata: Vec<(String, String)>,
}

impl Binding {
    /// Renames enum members and record fields to their B spelling.
    pub fn to_b(&self, v: &Value) -> Value {
        rename_value(v, &mangle)
    }

    /// Inverse of [`Binding::to_b`].
    pub fn to_scade(&self, v: &Value) -> Value {
        rename_value(v, &unmangle)
    }
}

#[derive(Debug, Clone)]
pub struct Translation {
    pub machine: Machine,
    pub binding: Binding,
    /// Non-fatal remarks, such as operators emitted as separate operations.
    pub warnings: Vec<String>,
}

pub fn translate(tp: &TypedProgram) -> TResult<Translation> {
    let main = tp.main_node().ok_or(TranslateError::NoNode)?;
    translate_node(tp, main)
}

pub fn translate_node(tp: &TypedProgram, node: &str) -> TResult<Translation> {
    let (_, info) = tp
        .node(node)
        .ok_or_else(|| TranslateError::Unsupported(format!("unknown node {node}")))?;
    let mut tr = Translator::new(tp);
    tr.allocate_state(info)?;
    let op = tr.operation(node, &mangle(node))?;
    let machine = tr.assemble(node, info, op)?;
    let diags = validate_machine(&machine);
    if !diags.is_empty() {
        return Err(TranslateError::IllFormed(diags));
    }
    let (inputs, outputs) = tp.signature(node).expect("node signature");
    let pair = |v: Vec<(String, crate::frontend::Ty)>| v.into_iter().map(|(n, _)| (n.clone(), mangle(&n))).collect();
    let binding = Binding {
        node: node.to_string(),
        operation: mangle(node),
        inputs: pair(inputs),
        outputs: pair(outputs),
        fby: tr.stores.iter().map(|(id, s)| (*id, s.clone())).collect(),
        automata: tr.sm_vars.clone(),
    };
    Ok(Translation {
        machine,
        binding,
        warnings: tr.warnings,
    })
}

pub(crate) struct Translator<'a> {
    tp: &'a TypedProgram,
    globals: NameSet,
    /// (fby id, buffer variable), by id.
    stores: Vec<(usize, String)>,
    sm_vars: Vec<(String, String)>,
    aux: Vec<Operation>,
    aux_names: HashMap<String, String>,
    warnings: Vec<String>,
}

pub(crate) struct NodeCx {
    scope: NameSet,
    renaming: Renaming,
    stores: HashMap<usize, String>,
}

impl<'a> Translator<'a> {
    fn new(tp: &'a TypedProgram) -> Self {
        let mut globals = NameSet::default();
        let env = &tp.env;
        for (e, ms) in env.enums.iter().chain(&env.automata) {
            globals.insert(mangle(e));
            ms.iter().for_each(|m| globals.insert(mangle(m)));
        }
        env.structs.iter().for_each(|(s, _)| globals.insert(mangle(s)));
        env.consts.iter().for_each(|c| globals.insert(mangle(&c.name)));
        for n in &tp.nodes {
            globals.insert(mangle(&n.name));
            n.vars.keys().for_each(|v| globals.insert(mangle(v)));
        }
        Translator {
            tp,
            globals,
            stores: Vec::new(),
            sm_vars: Vec::new(),
            aux: Vec::new(),
            aux_names: HashMap::new(),
            warnings: Vec::new(),
        }
    }

    fn allocate_state(&mut self, info: &NodeInfo) -> TResult<()> {
        let mut fbys: Vec<_> = info.fbys.iter().collect();
        fbys.sort_by_key(|f| f.id);
        for f in &fbys {
            let base = if fbys.len() == 1 {
                "store".to_string()
            } else {
                format!("store_{}", f.id)
            };
            let name = self.globals.fresh(&base);
            self.stores.push((f.id, name));
        }
        for sm in &info.automata {
            let pragma = self
                .tp
                .program
                .pragmas
                .state_vars
                .iter()
                .find(|(a, _)| a == sm)
                .map(|(_, v)| v.clone());
            let var = match pragma {
                Some(v) if self.globals.contains(&v) => return Err(TranslateError::StateVarClash(v)),
                Some(v) => {
                    self.globals.insert(v.clone());
                    v
                }
                None => self.globals.fresh(&format!("{}_state", sm.to_lowercase())),
            };
            self.sm_vars.push((sm.clone(), var));
        }
        Ok(())
    }

    fn aux_operation(&mut self, op: &str) -> TResult<String> {
        if let Some(n) = self.aux_names.get(op) {
            return Ok(n.clone());
        }
        let name = mangle(op);
        self.aux_names.insert(op.to_string(), name.clone());
        let operation = self.operation(op, &name)?;
        self.aux.push(operation);
        Ok(name)
    }

    /// One B operation computing a cycle of `node`.
    fn operation(&mut self, node: &str, name: &str) -> TResult<Operation> {
        let tp = self.tp;
        let (decl, info) = tp.node(node).expect("node exists");
        let mut body = decl.body.clone();
        simplify::simplify(&mut body);
        let cx = NodeCx {
            scope: self.globals.clone(),
            renaming: Renaming::new(&tp.env),
            stores: self.stores.iter().cloned().collect(),
        };

        let mut written = BTreeSet::new();
        element_targets(&body, &mut written);
        let mut prologue = Vec::new();
        if decl.outputs.iter().any(|o| written.contains(&o.name)) {
            for o in &decl.outputs {
                let v = tp.env.default_value(&info.vars[&o.name].ty);
                prologue.push(Subst::assign(mangle(&o.name), value_expr(&v)));
            }
        }
        let mut locals = Vec::new();
        collect_locals(&body, &mut locals);
        let mut inner: Vec<Subst> = locals
            .iter()
            .filter(|l| written.contains(*l))
            .map(|l| Subst::assign(mangle(l), value_expr(&tp.env.default_value(&info.vars[l].ty))))
            .collect();
        inner.push(self.block(&cx, &body)?);
        let main = if locals.is_empty() {
            Subst::seq(inner)
        } else {
            Subst::Var {
                names: locals.iter().map(|l| mangle(l)).collect(),
                body: Box::new(Subst::seq(inner)),
            }
        };
        prologue.push(main);

        let pre = decl
            .inputs
            .iter()
            .map(|p| Pred::member(BExpr::Ident(mangle(&p.name)), b_type(&info.vars[&p.name].ty)))
            .collect();
        Ok(Operation {
            name: name.to_string(),
            outputs: decl.outputs.iter().map(|o| mangle(&o.name)).collect(),
            params: decl.inputs.iter().map(|p| mangle(&p.name)).collect(),
            pre,
            body: Subst::seq(prologue),
        })
    }

    fn block(&mut self, cx: &NodeCx, b: &Block) -> TResult<Subst> {
        let order = dependency_order(b).map_err(|e| TranslateError::Unsupported(e.to_string()))?;
        let mut out = Vec::new();
        for unit in order {
            let item = &b.items[unit.index()];
            let s = match (unit, item) {
                (Unit::FbyRead(_), BodyItem::Equation(eq)) => {
                    let ExprKind::Fby(f) = &eq.rhs.kind else { unreachable!() };
                    let target = mangle(eq.lhs[0].name().expect("fby target"));
                    Subst::assign(target, BExpr::apply(BExpr::Ident(self.store(cx, f.id)?), BExpr::Int(0)))
                }
                (Unit::FbyShift(_), BodyItem::Equation(eq)) => {
                    let ExprKind::Fby(f) = &eq.rhs.kind else { unreachable!() };
                    let store = self.store(cx, f.id)?;
                    let n = self
                        .tp
                        .nodes
                        .iter()
                        .flat_map(|n| &n.fbys)
                        .find(|x| x.id == f.id)
                        .map(|x| x.depth as i64)
                        .expect("fby info");
                    let cell = |k: i64| BExpr::apply(BExpr::ident(&store), BExpr::Int(k));
                    let mut steps: Vec<Subst> = (0..n - 1)
                        .map(|k| Subst::Assign(LValue::apply(&store, BExpr::Int(k)), cell(k + 1)))
                        .collect();
                    steps.push(assign(LValue::apply(&store, BExpr::Int(n - 1)), &f.input, &cx.renaming)?);
                    Subst::seq(steps)
                }
                (_, BodyItem::Equation(eq)) => match &eq.rhs.kind {
                    ExprKind::Hof(h) => self.hof(cx, &eq.lhs, h)?,
                    _ => {
                        let target = mangle(eq.lhs[0].name().expect("single target"));
                        assign(LValue::var(target), &eq.rhs, &cx.renaming)?
                    }
                },
                (_, BodyItem::Activate(a)) => {
                    let then_s = self.block(cx, &a.then_branch)?;
                    let else_s = self.block(cx, &a.else_branch)?;
                    Subst::If {
                        branches: vec![(pred(&a.cond, &cx.renaming)?, then_s)],
                        else_branch: (else_s != Subst::Skip).then(|| Box::new(else_s)),
                    }
                }
                (_, BodyItem::Automaton(sm)) => self.automaton(cx, sm)?,
            };
            out.push(s);
        }
        Ok(Subst::seq(out))
    }

    fn store(&self, cx: &NodeCx, id: usize) -> TResult<String> {
        cx.stores
            .get(&id)
            .cloned()
            .ok_or_else(|| TranslateError::Unsupported("fby inside an iterated operator".into()))
    }

    fn automaton(&mut self, cx: &NodeCx, sm: &Automaton) -> TResult<Subst> {
        let var = self
            .sm_vars
            .iter()
            .find(|(a, _)| *a == sm.name)
            .map(|(_, v)| v.clone())
            .ok_or_else(|| TranslateError::Unsupported("automaton inside an iterated operator".into()))?;
        let mut arms = Vec::new();
        for st in &sm.states {
            let own = self.block(cx, &st.body)?;
            let arm = if st.unless.is_empty() {
                own
            } else {
                let mut branches = Vec::new();
                for t in &st.unless {
                    let target = sm
                        .states
                        .iter()
                        .find(|s| s.name == t.target)
                        .ok_or_else(|| TranslateError::Unsupported(format!("unknown state {}", t.target)))?;
                    let enter = Subst::assign(&var, BExpr::Ident(mangle(&t.target)));
                    let body = self.block(cx, &target.body)?;
                    branches.push((pred(&t.cond, &cx.renaming)?, Subst::seq(vec![enter, body])));
                }
                Subst::If {
                    branches,
                    else_branch: (own != Subst::Skip).then(|| Box::new(own)),
                }
            };
            arms.push((vec![BExpr::Ident(mangle(&st.name))], arm));
        }
        Ok(Subst::Case {
            scrutinee: BExpr::ident(&var),
            arms,
            else_branch: None,
        })
    }

    fn assemble(&mut self, node: &str, info: &NodeInfo, op: Operation) -> TResult<Machine> {
        let tp = self.tp;
        let env = &tp.env;
        let fby_of = |id: usize| info.fbys.iter().find(|f| f.id == id).expect("fby info");

        let mut variables: Vec<String> = self.stores.iter().map(|(_, s)| s.clone()).collect();
        variables.extend(self.sm_vars.iter().map(|(_, v)| v.clone()));

        let mut invariant = Vec::new();
        let mut init = Vec::new();
        for (sm, var) in &self.sm_vars {
            invariant.push(Pred::member(BExpr::ident(var), BExpr::Ident(mangle(sm))));
            let states = env.enum_members(sm).unwrap_or(&[]);
            let initial = tp
                .node(node)
                .and_then(|(decl, _)| find_automaton(&decl.body, sm))
                .map(|a| a.initial().name.clone())
                .or_else(|| states.first().cloned())
                .unwrap_or_default();
            init.push(Subst::assign(var, BExpr::Ident(mangle(&initial))));
        }
        for (id, store) in &self.stores {
            let f = fby_of(*id);
            let dom = BExpr::interval(BExpr::Int(0), BExpr::Int(f.depth as i64 - 1));
            invariant.push(Pred::member(BExpr::ident(store), BExpr::total_fun(dom, b_type(&f.ty))));
            init.push(Subst::assign(store, value_expr(&Value::Array(vec![f.init.clone(); f.depth]))));
        }
        for (text, span) in &tp.program.pragmas.invariants {
            let p = parse_pred(text).map_err(|e| TranslateError::Pragma {
                line: span.line,
                col: span.col,
                message: e.to_string(),
            })?;
            invariant.extend(p.conjuncts());
        }

        let mut operations = vec![op];
        operations.append(&mut self.aux);
        let mut machine = Machine {
            name: tp
                .program
                .pragmas
                .machine
                .clone()
                .unwrap_or_else(|| format!("{node}_mch")),
            sets: Vec::new(),
            constants: Vec::new(),
            properties: Vec::new(),
            variables,
            invariant,
            initialisation: Subst::parallel(init),
            operations,
        };

        let mut seen = BTreeSet::new();
        machine_idents(&machine, &mut seen);
        let mut structs: Vec<&str> = Vec::new();
        loop {
            let before = structs.len();
            for (s, _) in &env.structs {
                if seen.contains(&mangle(s)) && !structs.contains(&s.as_str()) {
                    structs.push(s);
                    expr_idents(&struct_type(env, s), &mut seen);
                }
            }
            if structs.len() == before {
                break;
            }
        }
        let consts: Vec<_> = env.consts.iter().filter(|c| seen.contains(&mangle(&c.name))).collect();
        for c in &consts {
            expr_idents(&value_expr(&c.value), &mut seen);
        }
        for k in IntKind::DECLARATION_ORDER {
            if seen.contains(k.b_name()) {
                let (lo, hi) = k.range();
                machine.constants.push(k.b_name().to_string());
                machine.properties.push(Pred::eq(
                    BExpr::ident(k.b_name()),
                    BExpr::interval(BExpr::Int(lo), BExpr::Int(hi)),
                ));
            }
        }
        for s in structs {
            machine.constants.push(mangle(s));
            machine.properties.push(Pred::eq(BExpr::Ident(mangle(s)), struct_type(env, s)));
        }
        for c in consts {
            machine.constants.push(mangle(&c.name));
            machine.properties.push(Pred::eq(BExpr::Ident(mangle(&c.name)), value_expr(&c.value)));
        }
        for (e, members) in &env.enums {
            if seen.contains(&mangle(e)) || members.iter().any(|m| seen.contains(&mangle(m))) {
                machine.sets.push((mangle(e), members.iter().map(|m| mangle(m)).collect()));
            }
        }
        for (sm, _) in &self.sm_vars {
            let states = env.enum_members(sm).unwrap_or(&[]);
            machine.sets.push((mangle(sm), states.iter().map(|m| mangle(m)).collect()));
        }
        Ok(machine)
    }
}

fn find_automaton<'b>(b: &'b Block, name: &str) -> Option<&'b Automaton> {
    for item in &b.items {
        let found = match item {
            BodyItem::Equation(_) => None,
            BodyItem::Activate(a) => find_automaton(&a.then_branch, name).or_else(|| find_automaton(&a.else_branch, name)),
            BodyItem::Automaton(sm) if sm.name == name => Some(sm),
            BodyItem::Automaton(sm) => sm.states.iter().find_map(|st| find_automaton(&st.body, name)),
        };
        if found.is_some() {
            return found;
        }
    }
    None
}

/// Variables written cell by cell by a non-`w` iterator.
fn element_targets(b: &Block, out: &mut BTreeSet<String>) {
    for item in &b.items {
        match item {
            BodyItem::Equation(eq) => {
                if let ExprKind::Hof(h) = &eq.rhs.kind {
                    if !h.kind.is_while() {
                        let skip = h.kind.leading_results() + h.accs;
                        out.extend(eq.lhs.iter().skip(skip).filter_map(|l| l.name().map(String::from)));
                    }
                }
            }
            BodyItem::Activate(a) => {
                element_targets(&a.then_branch, out);
                element_targets(&a.else_branch, out);
            }
            BodyItem::Automaton(sm) => sm.states.iter().for_each(|st| element_targets(&st.body, out)),
        }
    }
}

fn collect_locals(b: &Block, out: &mut Vec<String>) {
    out.extend(b.locals.iter().map(|l| l.name.clone()));
    for item in &b.items {
        match item {
            BodyItem::Equation(_) => {}
            BodyItem::Activate(a) => {
                collect_locals(&a.then_branch, out);
                collect_locals(&a.else_branch, out);
            }
            BodyItem::Automaton(sm) => sm.states.iter().for_each(|st| collect_locals(&st.body, out)),
        }
    }
}

fn expr_idents(e: &BExpr, out: &mut BTreeSet<String>) {
    match e {
        BExpr::Int(_) | BExpr::Bool(_) => {}
        BExpr::Ident(s) => {
            out.insert(s.clone());
        }
        BExpr::Neg(x) | BExpr::Field(x, _) => expr_idents(x, out),
        BExpr::Arith(_, a, b) | BExpr::Apply(a, b) | BExpr::Interval(a, b) | BExpr::TotalFun(a, b) => {
            expr_idents(a, out);
            expr_idents(b, out);
        }
        BExpr::Rec(fs) | BExpr::Struct(fs) => fs.iter().for_each(|(_, x)| expr_idents(x, out)),
        BExpr::Maplets(ms) => ms.iter().for_each(|(k, v)| {
            expr_idents(k, out);
            expr_idents(v, out);
        }),
        BExpr::ConstFunction { lo, hi, value } => {
            expr_idents(lo, out);
            expr_idents(hi, out);
            expr_idents(value, out);
        }
        BExpr::BoolOf(p) => pred_idents(p, out),
    }
}

fn pred_idents(p: &Pred, out: &mut BTreeSet<String>) {
    match p {
        Pred::True | Pred::False => {}
        Pred::And(a, b) | Pred::Or(a, b) | Pred::Implies(a, b) => {
            pred_idents(a, out);
            pred_idents(b, out);
        }
        Pred::Not(a) => pred_idents(a, out),
        Pred::Cmp(_, a, b) | Pred::Member(a, b) | Pred::NotMember(a, b) => {
            expr_idents(a, out);
            expr_idents(b, out);
        }
        Pred::Forall { lo, hi, guard, body, .. } => {
            expr_idents(lo, out);
            expr_idents(hi, out);
            if let Some(g) = guard {
                pred_idents(g, out);
            }
            pred_idents(body, out);
        }
    }
}

fn subst_idents(s: &Subst, out: &mut BTreeSet<String>) {
    match s {
        Subst::Skip => {}
        Subst::Assign(lv, e) => {
            for a in &lv.path {
                if let Access::Index(i) = a {
                    expr_idents(i, out);
                }
            }
            expr_idents(e, out);
        }
        Subst::Seq(xs) | Subst::Parallel(xs) => xs.iter().for_each(|x| subst_idents(x, out)),
        Subst::If { branches, else_branch } => {
            for (c, b) in branches {
                pred_idents(c, out);
                subst_idents(b, out);
            }
            if let Some(e) = else_branch {
                subst_idents(e, out);
            }
        }
        Subst::Case { scrutinee, arms, else_branch } => {
            expr_idents(scrutinee, out);
            for (ls, b) in arms {
                ls.iter().for_each(|l| expr_idents(l, out));
                subst_idents(b, out);
            }
            if let Some(e) = else_branch {
                subst_idents(e, out);
            }
        }
        Subst::While { cond, body, invariant, variant } => {
            pred_idents(cond, out);
            subst_idents(body, out);
            if let Some(i) = invariant {
                pred_idents(i, out);
            }
            if let Some(v) = variant {
                expr_idents(v, out);
            }
        }
        Subst::Var { body, .. } => subst_idents(body, out),
        Subst::OpCall { args, .. } => args.iter().for_each(|a| expr_idents(a, out)),
    }
}

fn machine_idents(m: &Machine, out: &mut BTreeSet<String>) {
    m.invariant.iter().for_each(|p| pred_idents(p, out));
    subst_idents(&m.initialisation, out);
    for op in &m.operations {
        op.pre.iter().for_each(|p| pred_idents(p, out));
        subst_idents(&op.body, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::CORPUS;
    use crate::frontend::compile;

    fn machine_text(src: &str) -> String {
        emit_machine(&translate(&compile(src).unwrap()).unwrap().machine)
    }

    #[test]
    fn corpus_matches_goldens() {
        for (name, src, golden) in CORPUS {
            if let Some(d) = token_diff(golden, &machine_text(src)) {
                panic!("{name}: {d}");
            }
        }
    }

    #[test]
    fn two_buffers_get_distinct_names() {
        let text = machine_text(
            "node n(x: int32) returns (y: int32; z: int32)
             let y = fby(x; 1; 7); z = fby(y; 2; 0); tel",
        );
        assert!(text.contains("store_0, store_1"), "{text}");
        assert!(text.contains("store_0 := {0 |-> 7}"), "{text}");
        assert!(text.contains("y := store_0(0);\n        store_0(0) := x"), "{text}");
    }

    #[test]
    fn user_names_colliding_with_b_keywords_are_renamed() {
        let text = machine_text("node n(skip: int32) returns (y: int32) let y = skip; tel");
        assert!(text.contains("y <-- n(skip_)"), "{text}");
    }

    #[test]
    fn automaton_without_pragma_gets_lowercase_state_var() {
        let text = machine_text(
            "node n(x: bool) returns (y: bool)
             let automaton SM initial state A unless if x restart B;
               let y = false; tel
               state B let y = true; tel returns .. ; tel",
        );
        assert!(text.contains("sm_state : SM"), "{text}");
        assert!(text.contains("IF x = TRUE THEN\n                    sm_state := B;\n                    y := TRUE"), "{text}");
    }

    #[test]
    fn bad_invariant_pragma_reports_position() {
        let src = "--@invariant x = = 1\nnode n(x: int32) returns (y: int32) let y = x; tel";
        let err = translate(&compile(src).unwrap()).unwrap_err();
        assert!(matches!(err, TranslateError::Pragma { line: 1, .. }), "{err}");
    }
}
