//! Name resolution, typing and the structural checks of the subset.

use super::ast::*;
use super::types::*;
use super::FrontendError;
use crate::value::Value;
use std::collections::{BTreeSet, HashMap, HashSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Input,
    Output,
    Local,
}

#[derive(Debug, Clone)]
pub struct VarInfo {
    pub ty: Ty,
    pub role: Role,
}

#[derive(Debug, Clone)]
pub struct FbyInfo {
    pub id: usize,
    /// Variable receiving the delayed flow.
    pub target: String,
    pub ty: Ty,
    pub depth: usize,
    pub init: Value,
}

#[derive(Debug, Clone)]
pub struct NodeInfo {
    pub name: String,
    pub vars: HashMap<String, VarInfo>,
    pub fbys: Vec<FbyInfo>,
    /// Automata in pre-order.
    pub automata: Vec<String>,
    /// Used as the operator of some higher-order application.
    pub used_as_op: bool,
}

impl NodeInfo {
    pub fn var_ty(&self, name: &str) -> Option<&Ty> {
        self.vars.get(name).map(|v| &v.ty)
    }

    pub fn is_stateless(&self) -> bool {
        self.fbys.is_empty() && self.automata.is_empty()
    }
}

/// Named, typed inputs or outputs of a node.
pub type Ports = Vec<(String, Ty)>;

#[derive(Debug, Clone)]
pub struct TypedProgram {
    pub program: Program,
    pub env: TypeEnv,
    pub nodes: Vec<NodeInfo>,
}

impl TypedProgram {
    pub fn node(&self, name: &str) -> Option<(&NodeDecl, &NodeInfo)> {
        let decl = self.program.node(name)?;
        let info = self.nodes.iter().find(|n| n.name == name)?;
        Some((decl, info))
    }

    /// The node driven by default: the last one that is not an iterator operator.
    pub fn main_node(&self) -> Option<&str> {
        self.nodes
            .iter()
            .rev()
            .find(|n| !n.used_as_op)
            .or(self.nodes.last())
            .map(|n| n.name.as_str())
    }

    /// Type of a resolved expression in the scope of `node`.
    pub fn type_of(&self, node: &str, e: &Expr) -> Ty {
        let info = self
            .nodes
            .iter()
            .find(|n| n.name == node)
            .expect("unknown node");
        let mut ck = Checker::for_env(&self.env, &self.program);
        ck.vars = info.vars.clone();
        ck.visible = info.vars.keys().cloned().collect();
        let mut e = e.clone();
        ck.expr(&mut e).expect("expression was typechecked")
    }

    pub fn signature(&self, node: &str) -> Option<(Ports, Ports)> {
        let (decl, info) = self.node(node)?;
        let pick = |ds: &[VarDecl]| {
            ds.iter()
                .map(|d| (d.name.clone(), info.vars[&d.name].ty.clone()))
                .collect()
        };
        Some((pick(&decl.inputs), pick(&decl.outputs)))
    }
}

type TResult<T> = Result<T, FrontendError>;

fn err<T>(span: Span, msg: impl Into<String>) -> TResult<T> {
    Err(FrontendError::new(span, msg))
}

pub fn typecheck(mut program: Program) -> TResult<TypedProgram> {
    let env = build_env(&program)?;
    let node_names: Vec<String> = program.nodes.iter().map(|n| n.name.clone()).collect();
    let mut seen = HashSet::new();
    for n in &program.nodes {
        if !seen.insert(n.name.clone()) {
            return err(n.span, format!("duplicate node `{}`", n.name));
        }
        if env.enum_of_member(&n.name).is_some() || env.constant(&n.name).is_some() {
            return err(n.span, format!("node name `{}` is already declared", n.name));
        }
    }
    let snapshot = program.clone();
    let mut infos = Vec::new();
    for node in program.nodes.iter_mut() {
        let mut ck = Checker::for_env(&env, &snapshot);
        infos.push(ck.node(node)?);
    }
    let mut env = env;
    let mut automata_seen: HashSet<String> = HashSet::new();
    for node in &program.nodes {
        collect_automata(&node.body, &mut |sm| {
            if !automata_seen.insert(sm.name.clone()) {
                return err(sm.span, format!("duplicate automaton `{}`", sm.name));
            }
            for st in &sm.states {
                let clash = env.enum_of_member(&st.name).is_some()
                    || env.constant(&st.name).is_some()
                    || env.automata.iter().any(|(_, ss)| ss.contains(&st.name))
                    || node_names.contains(&st.name);
                if clash {
                    return err(st.span, format!("state name `{}` is already declared", st.name));
                }
            }
            env.automata.push((
                sm.name.clone(),
                sm.states.iter().map(|s| s.name.clone()).collect(),
            ));
            Ok(())
        })?;
    }
    for (name, _) in &env.automata {
        let clash = env.enum_members(name).is_some() && env.enums.iter().any(|(e, _)| e == name)
            || env.struct_fields(name).is_some()
            || env.aliases.contains_key(name);
        if clash {
            return err(Span::default(), format!("automaton name `{name}` clashes with a type"));
        }
    }
    for node in &program.nodes {
        let mut used_ops = Vec::new();
        collect_ops(&node.body, &mut used_ops);
        for op in used_ops {
            if let Some(i) = infos.iter().position(|n| n.name == op) {
                infos[i].used_as_op = true;
            }
        }
    }
    check_op_recursion(&program)?;
    Ok(TypedProgram {
        program,
        env,
        nodes: infos,
    })
}

fn collect_automata(
    b: &Block,
    f: &mut dyn FnMut(&Automaton) -> TResult<()>,
) -> TResult<()> {
    for item in &b.items {
        match item {
            BodyItem::Equation(_) => {}
            BodyItem::Activate(a) => {
                collect_automata(&a.then_branch, f)?;
                collect_automata(&a.else_branch, f)?;
            }
            BodyItem::Automaton(sm) => {
                f(sm)?;
                for st in &sm.states {
                    collect_automata(&st.body, f)?;
                }
            }
        }
    }
    Ok(())
}

fn collect_ops(b: &Block, out: &mut Vec<String>) {
    for item in &b.items {
        match item {
            BodyItem::Equation(eq) => {
                if let ExprKind::Hof(h) = &eq.rhs.kind {
                    out.push(h.op.clone());
                }
            }
            BodyItem::Activate(a) => {
                collect_ops(&a.then_branch, out);
                collect_ops(&a.else_branch, out);
            }
            BodyItem::Automaton(sm) => {
                for st in &sm.states {
                    collect_ops(&st.body, out);
                }
            }
        }
    }
}

fn check_op_recursion(p: &Program) -> TResult<()> {
    let graph: HashMap<&str, Vec<String>> = p
        .nodes
        .iter()
        .map(|n| {
            let mut ops = Vec::new();
            collect_ops(&n.body, &mut ops);
            (n.name.as_str(), ops)
        })
        .collect();
    fn visit<'a>(
        n: &'a str,
        g: &'a HashMap<&str, Vec<String>>,
        stack: &mut Vec<&'a str>,
        done: &mut HashSet<&'a str>,
    ) -> Option<Vec<String>> {
        if done.contains(n) {
            return None;
        }
        if let Some(pos) = stack.iter().position(|s| *s == n) {
            return Some(stack[pos..].iter().map(|s| s.to_string()).collect());
        }
        stack.push(n);
        for m in g.get(n).into_iter().flatten() {
            if let Some((k, _)) = g.get_key_value(m.as_str()) {
                if let Some(c) = visit(k, g, stack, done) {
                    return Some(c);
                }
            }
        }
        stack.pop();
        done.insert(n);
        None
    }
    let mut done = HashSet::new();
    for n in &p.nodes {
        if let Some(cycle) = visit(&n.name, &graph, &mut Vec::new(), &mut done) {
            return err(
                n.span,
                format!("recursive operator application through {}", cycle.join(" -> ")),
            );
        }
    }
    Ok(())
}

fn build_env(p: &Program) -> TResult<TypeEnv> {
    let mut env = TypeEnv::default();
    let mut names: HashSet<String> = HashSet::new();
    let mut members: HashSet<String> = HashSet::new();
    for t in &p.types {
        if !names.insert(t.name.clone()) {
            return err(t.span, format!("duplicate type `{}`", t.name));
        }
        if let TypeDef::Enum(ms) = &t.def {
            for m in ms {
                if !members.insert(m.clone()) {
                    return err(t.span, format!("duplicate enumeration member `{m}`"));
                }
            }
            env.add_enum(&t.name, ms);
        }
    }
    for m in &members {
        if names.contains(m) {
            return err(Span::default(), format!("enumeration member `{m}` clashes with a type"));
        }
    }
    // Constants come first so array sizes in types can refer to them.
    for c in &p.consts {
        if names.contains(&c.name) || members.contains(&c.name) || env.constant(&c.name).is_some() {
            return err(c.span, format!("duplicate declaration `{}`", c.name));
        }
        let ty = resolve_type(&c.ty, p, &env, &mut Vec::new())?;
        let ck = Checker::for_env(&env, p);
        let mut value_expr = c.value.clone();
        let value = ck
            .const_value(&mut value_expr)?
            .ok_or_else(|| FrontendError::new(c.value.span, "constant value must be a literal"))?;
        ck.check_literal_fits(&ty, &value, c.value.span)?;
        env.consts.push(ConstInfo {
            name: c.name.clone(),
            ty,
            value,
        });
        // Struct constants need resolved struct types; resolve lazily below.
    }
    for t in &p.types {
        match &t.def {
            TypeDef::Enum(_) => {}
            TypeDef::Struct(fields) => {
                let mut seen = HashSet::new();
                let mut out = Vec::new();
                for (f, te) in fields {
                    if !seen.insert(f) {
                        return err(t.span, format!("duplicate field `{f}` in `{}`", t.name));
                    }
                    out.push((f.clone(), resolve_type(te, p, &env, &mut vec![t.name.clone()])?));
                }
                env.structs.push((t.name.clone(), out));
            }
            TypeDef::Alias(te) => {
                let ty = resolve_type(te, p, &env, &mut vec![t.name.clone()])?;
                env.aliases.insert(t.name.clone(), ty);
            }
        }
    }
    Ok(env)
}

pub fn resolve_size(s: &SizeExpr, env: &TypeEnv) -> TResult<ArraySize> {
    match s {
        SizeExpr::Lit(v) => Ok(ArraySize { len: *v, sym: None }),
        SizeExpr::Const(n, span) => match env.constant(n) {
            Some(ConstInfo {
                value: Value::Int(v),
                ..
            }) => Ok(ArraySize {
                len: *v,
                sym: Some(n.clone()),
            }),
            Some(_) => err(*span, format!("size `{n}` is not an integer constant")),
            None => err(*span, format!("unknown constant `{n}`")),
        },
    }
}

fn resolve_type(
    t: &TypeExpr,
    p: &Program,
    env: &TypeEnv,
    visiting: &mut Vec<String>,
) -> TResult<Ty> {
    match t {
        TypeExpr::Base(BaseType::Bool) => Ok(Ty::Bool),
        TypeExpr::Base(b) => Ok(Ty::Int(Some(match b {
            BaseType::Uint8 => IntKind::U8,
            BaseType::Uint16 => IntKind::U16,
            BaseType::Uint32 => IntKind::U32,
            BaseType::Int8 => IntKind::I8,
            BaseType::Int16 => IntKind::I16,
            _ => IntKind::I32,
        }))),
        TypeExpr::Array(elem, size) => {
            let sz = resolve_size(size, env)?;
            if sz.len < 1 {
                let span = match size {
                    SizeExpr::Const(_, s) => *s,
                    SizeExpr::Lit(_) => Span::default(),
                };
                return err(span, format!("array size must be at least 1, found {}", sz.len));
            }
            Ok(Ty::Array(Box::new(resolve_type(elem, p, env, visiting)?), sz))
        }
        TypeExpr::Named(n, span) => {
            let Some(decl) = p.types.iter().find(|d| &d.name == n) else {
                return err(*span, format!("unknown type `{n}`"));
            };
            if visiting.contains(n) && !matches!(decl.def, TypeDef::Enum(_)) {
                return err(*span, format!("recursive type `{n}`"));
            }
            match &decl.def {
                TypeDef::Enum(_) => Ok(Ty::Enum(n.clone())),
                TypeDef::Struct(fields) => {
                    visiting.push(n.clone());
                    for (_, fty) in fields {
                        resolve_type(fty, p, env, visiting)?;
                    }
                    visiting.pop();
                    Ok(Ty::Struct(n.clone()))
                }
                TypeDef::Alias(inner) => {
                    visiting.push(n.clone());
                    let r = resolve_type(inner, p, env, visiting);
                    visiting.pop();
                    r
                }
            }
        }
    }
}

fn unify(a: &Ty, b: &Ty) -> Option<Ty> {
    match (a, b) {
        (Ty::Int(x), Ty::Int(y)) => Some(Ty::Int(x.or(*y))),
        (Ty::Array(ea, sa), Ty::Array(eb, sb)) if sa.len == sb.len => {
            let sym = sa.sym.clone().or(sb.sym.clone());
            Some(Ty::Array(
                Box::new(unify(ea, eb)?),
                ArraySize { len: sa.len, sym },
            ))
        }
        _ if a == b => Some(a.clone()),
        _ => None,
    }
}

struct Checker<'a> {
    env: &'a TypeEnv,
    program: &'a Program,
    vars: HashMap<String, VarInfo>,
    visible: HashSet<String>,
    fbys: Vec<FbyInfo>,
    automata: Vec<String>,
    stateless: bool,
    tmp_counter: usize,
}

impl<'a> Checker<'a> {
    fn for_env(env: &'a TypeEnv, program: &'a Program) -> Self {
        Checker {
            env,
            program,
            vars: HashMap::new(),
            visible: HashSet::new(),
            fbys: Vec::new(),
            automata: Vec::new(),
            stateless: false,
            tmp_counter: 0,
        }
    }

    fn resolve(&self, t: &TypeExpr) -> TResult<Ty> {
        resolve_type(t, self.program, self.env, &mut Vec::new())
    }

    fn declare(&mut self, d: &VarDecl, role: Role) -> TResult<()> {
        if self.vars.contains_key(&d.name) {
            return err(d.span, format!("duplicate variable `{}`", d.name));
        }
        if self.env.constant(&d.name).is_some() || self.env.enum_of_member(&d.name).is_some() {
            return err(
                d.span,
                format!("variable `{}` shadows a constant or enumeration member", d.name),
            );
        }
        let ty = self.resolve(&d.ty)?;
        self.vars.insert(d.name.clone(), VarInfo { ty, role });
        Ok(())
    }

    fn declare_block_locals(&mut self, b: &Block) -> TResult<()> {
        for d in &b.locals {
            self.declare(d, Role::Local)?;
        }
        for item in &b.items {
            match item {
                BodyItem::Equation(_) => {}
                BodyItem::Activate(a) => {
                    self.declare_block_locals(&a.then_branch)?;
                    self.declare_block_locals(&a.else_branch)?;
                }
                BodyItem::Automaton(sm) => {
                    for st in &sm.states {
                        self.declare_block_locals(&st.body)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn node(&mut self, node: &mut NodeDecl) -> TResult<NodeInfo> {
        for d in &node.inputs {
            self.declare(d, Role::Input)?;
        }
        for d in &node.outputs {
            self.declare(d, Role::Output)?;
        }
        self.declare_block_locals(&node.body)?;
        self.stateless = node.is_function;
        self.visible = node
            .inputs
            .iter()
            .chain(&node.outputs)
            .map(|d| d.name.clone())
            .collect();
        self.block(&mut node.body)?;
        let defined = self.block_defs(&node.body)?;
        for d in &node.inputs {
            if defined.contains(&d.name) {
                return err(d.span, format!("input `{}` cannot be defined", d.name));
            }
        }
        for d in &node.outputs {
            if !defined.contains(&d.name) {
                return err(d.span, format!("output `{}` is never defined", d.name));
            }
        }
        if node.is_function && !(self.fbys.is_empty() && self.automata.is_empty()) {
            return err(
                node.span,
                format!("function `{}` cannot hold state (fby or automaton)", node.name),
            );
        }
        self.fbys.sort_by_key(|f| f.id);
        Ok(NodeInfo {
            name: node.name.clone(),
            vars: self.vars.clone(),
            fbys: std::mem::take(&mut self.fbys),
            automata: std::mem::take(&mut self.automata),
            used_as_op: false,
        })
    }

    fn block(&mut self, b: &mut Block) -> TResult<()> {
        for d in &b.locals {
            self.visible.insert(d.name.clone());
        }
        let mut i = 0;
        while i < b.items.len() {
            let mut extracted = Vec::new();
            match &mut b.items[i] {
                BodyItem::Equation(eq) => {
                    self.equation(eq)?;
                    self.extract_nested_fby(eq, &mut extracted)?;
                }
                BodyItem::Activate(a) => {
                    let ct = self.expr(&mut a.cond)?;
                    self.expect(&Ty::Bool, &ct, a.cond.span)?;
                    self.block(&mut a.then_branch)?;
                    self.block(&mut a.else_branch)?;
                }
                BodyItem::Automaton(sm) => self.automaton(sm)?,
            }
            let n = extracted.len();
            for (decl, eq) in extracted.into_iter().rev() {
                b.locals.push(decl);
                b.items.insert(i, BodyItem::Equation(eq));
            }
            i += n + 1;
        }
        for d in &b.locals {
            self.visible.remove(&d.name);
        }
        Ok(())
    }

    fn automaton(&mut self, sm: &mut Automaton) -> TResult<()> {
        let initials = sm.states.iter().filter(|s| s.initial).count();
        if initials != 1 {
            return err(
                sm.span,
                format!(
                    "automaton `{}` must have exactly one initial state, found {initials}",
                    sm.name
                ),
            );
        }
        if self.stateless {
            return err(sm.span, "automata are not allowed in a function");
        }
        let names: Vec<String> = sm.states.iter().map(|s| s.name.clone()).collect();
        let mut seen = HashSet::new();
        for st in &sm.states {
            if !seen.insert(&st.name) {
                return err(st.span, format!("duplicate state `{}`", st.name));
            }
        }
        self.automata.push(sm.name.clone());
        for st in sm.states.iter_mut() {
            for t in st.unless.iter_mut() {
                if !names.contains(&t.target) {
                    return err(
                        t.span,
                        format!("unknown state `{}` in automaton `{}`", t.target, sm.name),
                    );
                }
                let ct = self.expr(&mut t.cond)?;
                self.expect(&Ty::Bool, &ct, t.cond.span)?;
            }
            self.block(&mut st.body)?;
        }
        Ok(())
    }

    fn expect(&self, want: &Ty, got: &Ty, span: Span) -> TResult<Ty> {
        unify(want, got)
            .ok_or_else(|| FrontendError::new(span, format!("type mismatch: expected {want}, found {got}")))
    }

    fn equation(&mut self, eq: &mut Equation) -> TResult<()> {
        for l in &eq.lhs {
            if let Lhs::Var(n) = l {
                match self.vars.get(n) {
                    None => return err(eq.span, format!("unknown variable `{n}`")),
                    Some(_) if !self.visible.contains(n) => {
                        return err(eq.span, format!("variable `{n}` is not in scope here"))
                    }
                    Some(VarInfo {
                        role: Role::Input, ..
                    }) => return err(eq.span, format!("input `{n}` cannot be defined")),
                    _ => {}
                }
            }
        }
        if let ExprKind::Hof(_) = eq.rhs.kind {
            return self.hof_equation(eq);
        }
        if eq.lhs.len() != 1 || eq.lhs[0] == Lhs::Wildcard {
            return err(
                eq.span,
                "only higher-order applications produce several results or accept `_`",
            );
        }
        let target = eq.lhs[0].name().unwrap().to_string();
        let want = self.vars[&target].ty.clone();
        if let ExprKind::Fby(f) = &mut eq.rhs.kind {
            let span = eq.rhs.span;
            let info = self.fby(f, &want, span)?;
            self.fbys.push(FbyInfo { target, ..info });
            return Ok(());
        }
        let got = self.expr(&mut eq.rhs)?;
        self.expect(&want, &got, eq.rhs.span)?;
        self.check_literals(&want, &eq.rhs)?;
        Ok(())
    }

    fn fby(&mut self, f: &mut Fby, want: &Ty, span: Span) -> TResult<FbyInfo> {
        if self.stateless {
            return err(span, "fby is not allowed in a function or iterator operator");
        }
        let depth = resolve_size(&f.depth, self.env)?.len;
        if depth < 1 {
            return err(span, format!("fby depth must be at least 1, found {depth}"));
        }
        let it = self.expr(&mut f.input)?;
        self.expect(want, &it, f.input.span)?;
        self.check_literals(want, &f.input)?;
        let init_ty = self.expr(&mut f.init)?;
        self.expect(want, &init_ty, f.init.span)?;
        let init = self
            .const_value(&mut f.init)?
            .ok_or_else(|| FrontendError::new(f.init.span, "fby initial value must be a literal"))?;
        self.check_literal_fits(want, &init, f.init.span)?;
        Ok(FbyInfo {
            id: f.id,
            target: String::new(),
            ty: want.clone(),
            depth: depth as usize,
            init,
        })
    }

    /// Moves every fby that is not the whole right-hand side into its own equation.
    fn extract_nested_fby(
        &mut self,
        eq: &mut Equation,
        out: &mut Vec<(VarDecl, Equation)>,
    ) -> TResult<()> {
        let top_is_fby = matches!(eq.rhs.kind, ExprKind::Fby(_));
        let mut found = Vec::new();
        if top_is_fby {
            if let ExprKind::Fby(f) = &mut eq.rhs.kind {
                take_fbys(&mut f.input, &mut found);
            }
        } else {
            take_fbys(&mut eq.rhs, &mut found);
        }
        for (slot, fby_expr) in found {
            let name = self.fresh("fby_tmp");
            *slot_mut(&mut eq.rhs, &slot) = Expr::new(ExprKind::Var(name.clone()), fby_expr.span);
            let mut fexpr = fby_expr;
            let ty = match &mut fexpr.kind {
                ExprKind::Fby(f) => {
                    let mut scratch = (**f).clone();
                    let ti = self.expr(&mut scratch.input)?;
                    let tinit = self.expr(&mut scratch.init)?;
                    match unify(&ti, &tinit) {
                        Some(Ty::Int(None)) => Ty::Int(Some(IntKind::I32)),
                        Some(t) => t,
                        None => {
                            return err(fexpr.span, format!("type mismatch: expected {ti}, found {tinit}"))
                        }
                    }
                }
                _ => unreachable!(),
            };
            self.vars.insert(
                name.clone(),
                VarInfo {
                    ty: ty.clone(),
                    role: Role::Local,
                },
            );
            self.visible.insert(name.clone());
            let mut new_eq = Equation {
                lhs: vec![Lhs::Var(name.clone())],
                rhs: fexpr,
                span: eq.span,
            };
            let mut nested = Vec::new();
            self.extract_nested_fby(&mut new_eq, &mut nested)?;
            if let ExprKind::Fby(f) = &mut new_eq.rhs.kind {
                let info = self.fby(f, &ty, new_eq.rhs.span)?;
                self.fbys.push(FbyInfo {
                    target: name.clone(),
                    ..info
                });
            }
            out.extend(nested);
            out.push((
                VarDecl {
                    name,
                    ty: ty_to_expr(&ty),
                    span: eq.span,
                },
                new_eq,
            ));
        }
        Ok(())
    }

    fn fresh(&mut self, base: &str) -> String {
        loop {
            let n = format!("{base}{}", self.tmp_counter);
            self.tmp_counter += 1;
            let taken = self.vars.contains_key(&n)
                || self.env.constant(&n).is_some()
                || self.env.enum_of_member(&n).is_some();
            if !taken {
                return n;
            }
        }
    }

    fn hof_equation(&mut self, eq: &mut Equation) -> TResult<()> {
        let ExprKind::Hof(h) = &mut eq.rhs.kind else {
            unreachable!()
        };
        let span = h.span;
        let Some(op) = self.program.node(&h.op) else {
            return err(span, format!("unknown operator `{}`", h.op));
        };
        if has_state(&op.body) {
            return err(
                span,
                format!("operator `{}` holds state and cannot be iterated", h.op),
            );
        }
        let op_in: Vec<Ty> = op
            .inputs
            .iter()
            .map(|d| self.resolve(&d.ty))
            .collect::<TResult<_>>()?;
        let op_out: Vec<Ty> = op
            .outputs
            .iter()
            .map(|d| self.resolve(&d.ty))
            .collect::<TResult<_>>()?;
        let kind = h.kind;
        let a = h.accs;
        if kind.family() == HofFamily::MapFold && a == 0 {
            return err(span, "mapfold needs at least one accumulator");
        }
        let size = resolve_size(&h.size, self.env)?;
        if size.len < 1 {
            return err(span, format!("iteration size must be at least 1, found {}", size.len));
        }
        if h.args.len() < a {
            return err(
                span,
                format!("`{}` expects {a} accumulator argument(s) before the arrays", kind.keyword()),
            );
        }
        let n = h.args.len() - a;
        let ix = usize::from(kind.indexed());
        let w = usize::from(kind.is_while());
        if op_in.len() != ix + a + n {
            return err(
                span,
                format!(
                    "arity mismatch: `{}` takes {} input(s) but `{}` passes {}",
                    h.op,
                    op_in.len(),
                    kind.keyword(),
                    ix + a + n
                ),
            );
        }
        if op_out.len() < w + a {
            return err(
                span,
                format!("arity mismatch: `{}` must return at least {} value(s)", h.op, w + a),
            );
        }
        let m = op_out.len() - w - a;
        if kind.family() == HofFamily::Fold && m != 0 {
            return err(
                span,
                format!("arity mismatch: `{}` must return exactly {} value(s)", h.op, w + a),
            );
        }
        if ix == 1 && !op_in[0].is_int() {
            return err(span, format!("`{}` must take an integer index first", h.op));
        }
        if w == 1 {
            if op_out[0] != Ty::Bool {
                return err(span, format!("`{}` must return its continuation flag first", h.op));
            }
            let Some(c) = h.cond.as_mut() else {
                return err(span, format!("`{}` requires `if <condition>`", kind.keyword()));
            };
            let ct = self.expr(c)?;
            self.expect(&Ty::Bool, &ct, c.span)?;
            let want_defaults = if kind.family() == HofFamily::Fold { 0 } else { m };
            if h.defaults.len() != want_defaults {
                return err(
                    span,
                    format!(
                        "`{}` expects {want_defaults} default value(s), found {}",
                        kind.keyword(),
                        h.defaults.len()
                    ),
                );
            }
            for (j, d) in h.defaults.iter_mut().enumerate() {
                let dt = self.expr(d)?;
                let want = &op_out[w + a + j];
                self.expect(want, &dt, d.span)?;
                self.check_literals(want, d)?;
            }
        } else if h.cond.is_some() || !h.defaults.is_empty() {
            return err(
                span,
                format!("`{}` takes no condition or default values", kind.keyword()),
            );
        }
        for j in 0..a {
            let at = self.expr(&mut h.args[j])?;
            let want_in = &op_in[ix + j];
            self.expect(want_in, &at, h.args[j].span)?;
            self.expect(want_in, &op_out[w + j], span)?;
            self.check_literals(want_in, &h.args[j])?;
        }
        for j in 0..n {
            let arg = &mut h.args[a + j];
            let at = self.expr(arg)?;
            match &at {
                Ty::Array(elem, sz) if sz.len == size.len => {
                    self.expect(&op_in[ix + a + j], elem, arg.span)?;
                }
                Ty::Array(_, sz) => {
                    return err(
                        arg.span,
                        format!(
                            "size mismatch: array argument has {} cells, iteration size is {}",
                            sz.len, size.len
                        ),
                    )
                }
                other => return err(arg.span, format!("expected an array argument, found {other}")),
            }
        }
        let mut results: Vec<Ty> = Vec::new();
        if w == 1 {
            results.push(Ty::Int(None));
            if kind.family() == HofFamily::MapFold {
                results.push(Ty::Bool);
            }
        }
        results.extend(op_out[w..w + a].iter().cloned());
        for t in &op_out[w + a..] {
            results.push(Ty::Array(Box::new(t.clone()), size.clone()));
        }
        if eq.lhs.len() != results.len() {
            return err(
                eq.span,
                format!(
                    "arity mismatch: `{}` produces {} result(s), {} bound",
                    kind.keyword(),
                    results.len(),
                    eq.lhs.len()
                ),
            );
        }
        for (l, rt) in eq.lhs.iter().zip(&results) {
            if let Lhs::Var(v) = l {
                let vt = self.vars[v].ty.clone();
                self.expect(&vt, rt, eq.span)?;
            }
        }
        Ok(())
    }

    fn check_literal_fits(&self, want: &Ty, v: &Value, span: Span) -> TResult<()> {
        if want.admits(v, self.env) {
            return Ok(());
        }
        match (want, v) {
            (Ty::Int(Some(k)), Value::Int(x)) => {
                let (lo, hi) = k.range();
                err(span, format!("literal {x} out of range {lo}..{hi} for {want}"))
            }
            _ => err(span, format!("value {v} does not fit {want}")),
        }
    }

    /// Range-checks integer literals flowing directly into a typed slot.
    fn check_literals(&self, want: &Ty, e: &Expr) -> TResult<()> {
        match (&e.kind, want) {
            (ExprKind::Int(_), Ty::Int(Some(_))) | (ExprKind::Unary(UnOp::Neg, _), Ty::Int(Some(_))) => {
                if let Some(v) = self.literal_int(e) {
                    self.check_literal_fits(want, &Value::Int(v), e.span)?;
                }
                Ok(())
            }
            (ExprKind::If(_, t, f), _) => {
                self.check_literals(want, t)?;
                self.check_literals(want, f)
            }
            (ExprKind::Case(_, arms, d), _) => {
                for (_, body) in arms {
                    self.check_literals(want, body)?;
                }
                if let Some(d) = d {
                    self.check_literals(want, d)?;
                }
                Ok(())
            }
            (ExprKind::Array(cells), Ty::Array(elem, _)) => {
                for c in cells {
                    self.check_literals(elem, c)?;
                }
                Ok(())
            }
            (ExprKind::Make(_, args), Ty::Struct(s)) => {
                if let Some(fields) = self.env.struct_fields(s) {
                    for (a, (_, ft)) in args.iter().zip(fields) {
                        self.check_literals(ft, a)?;
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn literal_int(&self, e: &Expr) -> Option<i64> {
        match &e.kind {
            ExprKind::Int(v) => Some(*v),
            ExprKind::Unary(UnOp::Neg, x) => self.literal_int(x).map(|v| -v),
            _ => None,
        }
    }

    /// Evaluates a compile-time constant expression.
    fn const_value(&self, e: &mut Expr) -> TResult<Option<Value>> {
        let span = e.span;
        Ok(match &mut e.kind {
            ExprKind::Int(v) => Some(Value::Int(*v)),
            ExprKind::Bool(b) => Some(Value::Bool(*b)),
            ExprKind::Ident(n) | ExprKind::Const(n) | ExprKind::Member(n) => {
                if let Some(c) = self.env.constant(n) {
                    let v = c.value.clone();
                    e.kind = ExprKind::Const(n.clone());
                    Some(v)
                } else if let Some(set) = self.env.enum_of_member(n) {
                    let v = Value::member(set, n.clone());
                    e.kind = ExprKind::Member(n.clone());
                    Some(v)
                } else {
                    return err(span, format!("unknown identifier `{n}`"));
                }
            }
            ExprKind::Unary(UnOp::Neg, x) => match self.const_value(x)? {
                Some(Value::Int(v)) => Some(Value::Int(-v)),
                _ => None,
            },
            ExprKind::Array(cells) => {
                let mut out = Vec::new();
                for c in cells.iter_mut() {
                    match self.const_value(c)? {
                        Some(v) => out.push(v),
                        None => return Ok(None),
                    }
                }
                Some(Value::Array(out))
            }
            ExprKind::Make(ty, args) => {
                let Some(fields) = self.env.struct_fields(ty) else {
                    return Ok(None);
                };
                let fields = fields.to_vec();
                let mut out = Vec::new();
                for ((f, _), a) in fields.iter().zip(args.iter_mut()) {
                    match self.const_value(a)? {
                        Some(v) => out.push((f.clone(), v)),
                        None => return Ok(None),
                    }
                }
                Some(Value::Record(out))
            }
            _ => None,
        })
    }

    /// Resolves identifiers in place and returns the expression type.
    fn expr(&mut self, e: &mut Expr) -> TResult<Ty> {
        let span = e.span;
        match &mut e.kind {
            ExprKind::Int(_) => Ok(Ty::Int(None)),
            ExprKind::Bool(_) => Ok(Ty::Bool),
            ExprKind::Ident(n) | ExprKind::Var(n) | ExprKind::Const(n) | ExprKind::Member(n) => {
                let n = n.clone();
                if let Some(v) = self.vars.get(&n) {
                    if !self.visible.contains(&n) {
                        return err(span, format!("variable `{n}` is not in scope here"));
                    }
                    let ty = v.ty.clone();
                    e.kind = ExprKind::Var(n);
                    Ok(ty)
                } else if let Some(c) = self.env.constant(&n) {
                    let ty = c.ty.clone();
                    e.kind = ExprKind::Const(n);
                    Ok(ty)
                } else if let Some(set) = self.env.enum_of_member(&n) {
                    let ty = Ty::Enum(set.to_string());
                    e.kind = ExprKind::Member(n);
                    Ok(ty)
                } else {
                    err(span, format!("unknown identifier `{n}`"))
                }
            }
            ExprKind::Unary(UnOp::Neg, x) => {
                let t = self.expr(x)?;
                if !t.is_int() {
                    return err(span, format!("type mismatch: expected integer, found {t}"));
                }
                Ok(t)
            }
            ExprKind::Unary(UnOp::Not, x) => {
                let t = self.expr(x)?;
                self.expect(&Ty::Bool, &t, x.span)
            }
            ExprKind::Binary(op, l, r) => {
                let op = *op;
                let lt = self.expr(l)?;
                let rt = self.expr(r)?;
                if op.is_arith() || matches!(op, BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge) {
                    for (t, s) in [(&lt, l.span), (&rt, r.span)] {
                        if !t.is_int() {
                            return err(s, format!("type mismatch: expected integer, found {t}"));
                        }
                    }
                    if op.is_arith() {
                        Ok(unify(&lt, &rt).unwrap())
                    } else {
                        Ok(Ty::Bool)
                    }
                } else if matches!(op, BinOp::And | BinOp::Or) {
                    self.expect(&Ty::Bool, &lt, l.span)?;
                    self.expect(&Ty::Bool, &rt, r.span)?;
                    Ok(Ty::Bool)
                } else {
                    self.expect(&lt, &rt, r.span)?;
                    Ok(Ty::Bool)
                }
            }
            ExprKind::If(c, t, f) => {
                let ct = self.expr(c)?;
                self.expect(&Ty::Bool, &ct, c.span)?;
                let tt = self.expr(t)?;
                let ft = self.expr(f)?;
                self.expect(&tt, &ft, f.span)
            }
            ExprKind::Case(s, arms, default) => {
                let st = self.expr(s)?;
                let mut seen = Vec::new();
                let mut result: Option<Ty> = None;
                for (pat, body) in arms.iter_mut() {
                    let ok = match (pat as &Pattern, &st) {
                        (Pattern::Int(_), Ty::Int(_)) | (Pattern::Bool(_), Ty::Bool) => true,
                        (Pattern::Member(m), Ty::Enum(set)) => {
                            self.env.enum_of_member(m) == Some(set.as_str())
                        }
                        _ => false,
                    };
                    if !ok {
                        return err(body.span, format!("pattern does not match scrutinee type {st}"));
                    }
                    if seen.contains(pat) {
                        return err(body.span, "duplicate case pattern");
                    }
                    seen.push(pat.clone());
                    let bt = self.expr(body)?;
                    result = Some(match result {
                        None => bt,
                        Some(r) => self.expect(&r, &bt, body.span)?,
                    });
                }
                match default {
                    Some(d) => {
                        let dt = self.expr(d)?;
                        result = Some(match result {
                            None => dt,
                            Some(r) => self.expect(&r, &dt, d.span)?,
                        });
                    }
                    None => {
                        let exhaustive = match &st {
                            Ty::Bool => seen.len() == 2,
                            Ty::Enum(set) => {
                                self.env.enum_members(set).map(|m| m.len()) == Some(seen.len())
                            }
                            _ => false,
                        };
                        if !exhaustive {
                            return err(span, "case without `_` arm must cover every value");
                        }
                    }
                }
                result.ok_or_else(|| FrontendError::new(span, "case needs at least one arm"))
            }
            ExprKind::Fby(f) => {
                if self.stateless {
                    return err(span, "fby is not allowed in a function or iterator operator");
                }
                let it = self.expr(&mut f.input)?;
                let nt = self.expr(&mut f.init)?;
                self.expect(&it, &nt, f.init.span)
            }
            ExprKind::Make(ty, args) => {
                let ty = ty.clone();
                let Some(fields) = self.env.struct_fields(&ty) else {
                    return err(span, format!("`{ty}` is not a structure type"));
                };
                let fields = fields.to_vec();
                if fields.len() != args.len() {
                    return err(
                        span,
                        format!("`{ty}` has {} field(s), {} given", fields.len(), args.len()),
                    );
                }
                for ((_, ft), a) in fields.iter().zip(args.iter_mut()) {
                    let at = self.expr(a)?;
                    self.expect(ft, &at, a.span)?;
                    self.check_literals(ft, a)?;
                }
                Ok(Ty::Struct(ty))
            }
            ExprKind::Field(x, f) => {
                let xt = self.expr(x)?;
                let Ty::Struct(s) = &xt else {
                    return err(span, format!("field access on non-structure type {xt}"));
                };
                self.env
                    .struct_fields(s)
                    .and_then(|fs| fs.iter().find(|(n, _)| n == f))
                    .map(|(_, t)| t.clone())
                    .ok_or_else(|| FrontendError::new(span, format!("`{s}` has no field `{f}`")))
            }
            ExprKind::Index(x, i) => {
                let xt = self.expr(x)?;
                let it = self.expr(i)?;
                if !it.is_int() {
                    return err(i.span, format!("array index must be an integer, found {it}"));
                }
                match xt {
                    Ty::Array(elem, _) => Ok(*elem),
                    other => err(span, format!("indexing a non-array value of type {other}")),
                }
            }
            ExprKind::Array(cells) => {
                let mut t: Option<Ty> = None;
                let len = cells.len() as i64;
                for c in cells.iter_mut() {
                    let ct = self.expr(c)?;
                    t = Some(match t {
                        None => ct,
                        Some(prev) => self.expect(&prev, &ct, c.span)?,
                    });
                }
                Ok(Ty::Array(
                    Box::new(t.unwrap_or(Ty::Int(None))),
                    ArraySize { len, sym: None },
                ))
            }
            ExprKind::Hof(_) => err(
                span,
                "a higher-order application must be the whole right-hand side of an equation",
            ),
        }
    }

    /// Variables (declared outside `b`) defined by `b`, after checking that
    /// each is defined once and that every local of `b` is defined.
    fn block_defs(&self, b: &Block) -> TResult<BTreeSet<String>> {
        let mut defs: BTreeSet<String> = BTreeSet::new();
        for item in &b.items {
            let (item_defs, span) = match item {
                BodyItem::Equation(eq) => (
                    eq.lhs.iter().filter_map(|l| l.name().map(String::from)).collect(),
                    eq.span,
                ),
                BodyItem::Activate(a) => {
                    let t = self.block_defs(&a.then_branch)?;
                    let e = self.block_defs(&a.else_branch)?;
                    if t != e {
                        let diff: Vec<String> = t.symmetric_difference(&e).cloned().collect();
                        return err(
                            a.span,
                            format!(
                                "activate branches must define the same variables; differing: {}",
                                diff.join(", ")
                            ),
                        );
                    }
                    (t, a.span)
                }
                BodyItem::Automaton(sm) => {
                    let mut first: Option<BTreeSet<String>> = None;
                    for st in &sm.states {
                        let d = self.block_defs(&st.body)?;
                        if let Some(f) = &first {
                            if *f != d {
                                let diff: Vec<String> = f.symmetric_difference(&d).cloned().collect();
                                return err(
                                    st.span,
                                    format!(
                                        "every state of `{}` must define the same variables; differing: {}",
                                        sm.name,
                                        diff.join(", ")
                                    ),
                                );
                            }
                        } else {
                            first = Some(d);
                        }
                    }
                    (first.unwrap_or_default(), sm.span)
                }
            };
            for d in item_defs {
                if !defs.insert(d.clone()) {
                    return err(span, format!("variable `{d}` is defined more than once"));
                }
            }
        }
        for l in &b.locals {
            if !defs.remove(&l.name) {
                return err(l.span, format!("local `{}` is never defined", l.name));
            }
        }
        Ok(defs)
    }
}

fn has_state(b: &Block) -> bool {
    b.items.iter().any(|item| match item {
        BodyItem::Equation(eq) => expr_has_fby(&eq.rhs),
        BodyItem::Activate(a) => has_state(&a.then_branch) || has_state(&a.else_branch),
        BodyItem::Automaton(_) => true,
    })
}

fn expr_has_fby(e: &Expr) -> bool {
    let mut found = false;
    super::visit_expr(e, &mut |x| {
        if matches!(x.kind, ExprKind::Fby(_)) {
            found = true;
        }
    });
    found
}

/// Path from an expression root to a child, as child indices.
type Slot = Vec<usize>;

fn children_mut(e: &mut Expr) -> Vec<&mut Expr> {
    match &mut e.kind {
        ExprKind::Unary(_, x) | ExprKind::Field(x, _) => vec![x],
        ExprKind::Binary(_, l, r) | ExprKind::Index(l, r) => vec![l, r],
        ExprKind::If(c, t, f) => vec![c, t, f],
        ExprKind::Case(s, arms, d) => {
            let mut v: Vec<&mut Expr> = vec![s];
            v.extend(arms.iter_mut().map(|(_, b)| b));
            if let Some(d) = d {
                v.push(d);
            }
            v
        }
        ExprKind::Fby(f) => vec![&mut f.input, &mut f.init],
        ExprKind::Make(_, args) | ExprKind::Array(args) => args.iter_mut().collect(),
        ExprKind::Hof(h) => {
            let mut v: Vec<&mut Expr> = h.cond.iter_mut().collect();
            v.extend(h.defaults.iter_mut());
            v.extend(h.args.iter_mut());
            v
        }
        _ => Vec::new(),
    }
}

fn slot_mut<'e>(e: &'e mut Expr, slot: &[usize]) -> &'e mut Expr {
    match slot.split_first() {
        None => e,
        Some((i, rest)) => {
            let mut kids = children_mut(e);
            let child = kids.swap_remove(*i);
            slot_mut(child, rest)
        }
    }
}

/// Collects outermost fby sub-expressions of `e` (excluding `e` itself).
fn take_fbys(e: &mut Expr, out: &mut Vec<(Slot, Expr)>) {
    fn go(e: &mut Expr, path: &mut Vec<usize>, out: &mut Vec<(Slot, Expr)>) {
        for (i, c) in children_mut(e).into_iter().enumerate() {
            path.push(i);
            if matches!(c.kind, ExprKind::Fby(_)) {
                out.push((path.clone(), c.clone()));
            } else {
                go(c, path, out);
            }
            path.pop();
        }
    }
    if matches!(e.kind, ExprKind::Fby(_)) {
        out.push((Vec::new(), e.clone()));
        return;
    }
    go(e, &mut Vec::new(), out);
}

fn ty_to_expr(t: &Ty) -> TypeExpr {
    match t {
        Ty::Int(k) => TypeExpr::Base(match k.unwrap_or(IntKind::I32) {
            IntKind::U8 => BaseType::Uint8,
            IntKind::U16 => BaseType::Uint16,
            IntKind::U32 => BaseType::Uint32,
            IntKind::I8 => BaseType::Int8,
            IntKind::I16 => BaseType::Int16,
            IntKind::I32 => BaseType::Int32,
        }),
        Ty::Bool => TypeExpr::Base(BaseType::Bool),
        Ty::Enum(n) | Ty::Struct(n) => TypeExpr::Named(n.clone(), Span::default()),
        Ty::Array(e, s) => TypeExpr::Array(
            Box::new(ty_to_expr(e)),
            match &s.sym {
                Some(c) => SizeExpr::Const(c.clone(), Span::default()),
                None => SizeExpr::Lit(s.len),
            },
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::super::parser::parse_program;
    use super::*;

    fn check(src: &str) -> TResult<TypedProgram> {
        typecheck(parse_program(src).unwrap())
    }

    fn check_err(src: &str) -> String {
        check(src).unwrap_err().message
    }

    #[test]
    fn constant_is_typed() {
        let tp = check("const MAX_SIZE: uint8 = 5;").unwrap();
        let c = tp.env.constant("MAX_SIZE").unwrap();
        assert_eq!(c.ty, Ty::Int(Some(IntKind::U8)));
        assert_eq!(c.value, Value::Int(5));
    }

    #[test]
    fn out_of_range_literal() {
        let m = check_err("const C: uint8 = 256;");
        assert!(m.contains("out of range 0..255"), "{m}");
        let m = check_err("node n() returns (y: uint8) let y = 256; tel");
        assert!(m.contains("out of range 0..255"), "{m}");
    }

    #[test]
    fn map_size_mismatch() {
        let m = check_err(
            "function sq(x: uint8) returns (y: uint8) let y = x; tel
             node n(a: uint8^4) returns (b: uint8^5) let b = (map sq <<5>>)(a); tel",
        );
        assert!(m.contains("size mismatch"), "{m}");
    }

    #[test]
    fn map_arity_mismatch() {
        let m = check_err(
            "function add(x: uint8; y: uint8) returns (z: uint8) let z = x + y; tel
             node n(a: uint8^5) returns (b: uint8^5) let b = (map add <<5>>)(a); tel",
        );
        assert!(m.contains("arity mismatch"), "{m}");
    }

    #[test]
    fn unknown_identifier_and_duplicates() {
        assert!(check_err("node n() returns (y: int32) let y = z; tel").contains("unknown identifier `z`"));
        assert!(check_err("type E = enum {A}; type F = enum {A};").contains("duplicate enumeration member"));
        assert!(check_err("node n() returns (y: int32; y: int32) let y = 1; tel").contains("duplicate variable"));
    }

    #[test]
    fn single_assignment() {
        let m = check_err("node n() returns (y: int32) let y = 1; y = 2; tel");
        assert!(m.contains("more than once"), "{m}");
        let m = check_err("node n() returns (y: int32) let tel");
        assert!(m.contains("never defined"), "{m}");
    }

    #[test]
    fn activate_branches_must_agree() {
        let m = check_err(
            "node n(c: bool) returns (y: int32; z: int32)
             let z = 0; activate if c then let y = 1; tel else let tel returns .. ; tel",
        );
        assert!(m.contains("same variables"), "{m}");
    }

    #[test]
    fn nested_fby_is_extracted() {
        let tp = check("node n(x: int32) returns (y: int32) let y = 1 + fby(x; 2; 0); tel").unwrap();
        let node = &tp.program.nodes[0];
        assert_eq!(node.body.locals[0].name, "fby_tmp0");
        assert_eq!(node.body.items.len(), 2);
        let info = &tp.nodes[0];
        assert_eq!(info.fbys.len(), 1);
        assert_eq!(info.fbys[0].target, "fby_tmp0");
        assert_eq!(info.fbys[0].depth, 2);
    }

    #[test]
    fn fby_init_must_fit() {
        let m = check_err("node n(x: uint8) returns (y: uint8) let y = fby(x; 1; 300); tel");
        assert!(m.contains("out of range"), "{m}");
        let m = check_err("node n(x: uint8) returns (y: uint8) let y = fby(x; 0; 1); tel");
        assert!(m.contains("at least 1"), "{m}");
    }

    #[test]
    fn iterator_operator_must_be_stateless() {
        let m = check_err(
            "node f(x: int32) returns (y: int32) let y = fby(x; 1; 0); tel
             node n(a: int32^2) returns (b: int32^2) let b = (map f <<2>>)(a); tel",
        );
        assert!(m.contains("holds state"), "{m}");
    }

    #[test]
    fn hof_only_at_top_level() {
        let m = check_err(
            "function f(x: int32) returns (y: int32) let y = x; tel
             node n(a: int32^2) returns (b: int32) let b = 1 + (fold f <<2>>)(0, a); tel",
        );
        assert!(m.contains("whole right-hand side"), "{m}");
    }

    #[test]
    fn automaton_needs_one_initial_state() {
        let m = check_err("node n(x: bool) returns () let automaton A state S returns .. ; tel");
        assert!(m.contains("exactly one initial"), "{m}");
    }
}
