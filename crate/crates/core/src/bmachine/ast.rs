//! Abstract syntax of the B abstract machines produced by the translator.

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Machine {
    pub name: String,
    /// Enumerated sets: name and members in order.
    pub sets: Vec<(String, Vec<String>)>,
    pub constants: Vec<String>,
    /// Conjuncts of PROPERTIES.
    pub properties: Vec<Pred>,
    pub variables: Vec<String>,
    /// Conjuncts of INVARIANT.
    pub invariant: Vec<Pred>,
    pub initialisation: Subst,
    pub operations: Vec<Operation>,
}

impl Machine {
    pub fn operation(&self, name: &str) -> Option<&Operation> {
        self.operations.iter().find(|o| o.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Operation {
    pub name: String,
    pub outputs: Vec<String>,
    pub params: Vec<String>,
    /// Conjuncts of the precondition; empty means `BEGIN .. END`.
    pub pre: Vec<Pred>,
    pub body: Subst,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Subst {
    #[default]
    Skip,
    Assign(LValue, BExpr),
    Seq(Vec<Subst>),
    Parallel(Vec<Subst>),
    If {
        branches: Vec<(Pred, Subst)>,
        else_branch: Option<Box<Subst>>,
    },
    Case {
        scrutinee: BExpr,
        arms: Vec<(Vec<BExpr>, Subst)>,
        else_branch: Option<Box<Subst>>,
    },
    While {
        cond: Pred,
        body: Box<Subst>,
        invariant: Option<Pred>,
        variant: Option<BExpr>,
    },
    Var {
        names: Vec<String>,
        body: Box<Subst>,
    },
    OpCall {
        outputs: Vec<String>,
        op: String,
        args: Vec<BExpr>,
    },
}

impl Subst {
    pub fn assign(name: impl Into<String>, e: BExpr) -> Subst {
        Subst::Assign(LValue::var(name), e)
    }

    /// Flattened sequence that collapses empty and singleton cases.
    pub fn seq(items: Vec<Subst>) -> Subst {
        let mut items: Vec<Subst> = items
            .into_iter()
            .flat_map(|s| match s {
                Subst::Seq(inner) => inner,
                Subst::Skip => Vec::new(),
                other => vec![other],
            })
            .collect();
        match items.len() {
            0 => Subst::Skip,
            1 => items.pop().unwrap(),
            _ => Subst::Seq(items),
        }
    }

    pub fn parallel(mut items: Vec<Subst>) -> Subst {
        match items.len() {
            0 => Subst::Skip,
            1 => items.pop().unwrap(),
            _ => Subst::Parallel(items),
        }
    }

    /// Roots of every variable this substitution may write.
    pub fn written_roots(&self, out: &mut Vec<String>) {
        match self {
            Subst::Skip => {}
            Subst::Assign(lv, _) => {
                if !out.contains(&lv.root) {
                    out.push(lv.root.clone());
                }
            }
            Subst::Seq(xs) | Subst::Parallel(xs) => xs.iter().for_each(|s| s.written_roots(out)),
            Subst::If {
                branches,
                else_branch,
            } => {
                branches.iter().for_each(|(_, s)| s.written_roots(out));
                if let Some(e) = else_branch {
                    e.written_roots(out);
                }
            }
            Subst::Case {
                arms, else_branch, ..
            } => {
                arms.iter().for_each(|(_, s)| s.written_roots(out));
                if let Some(e) = else_branch {
                    e.written_roots(out);
                }
            }
            Subst::While { body, .. } => body.written_roots(out),
            Subst::Var { names, body } => {
                let mut inner = Vec::new();
                body.written_roots(&mut inner);
                for r in inner {
                    if !names.contains(&r) && !out.contains(&r) {
                        out.push(r);
                    }
                }
            }
            Subst::OpCall { outputs, .. } => {
                for o in outputs {
                    if !out.contains(o) {
                        out.push(o.clone());
                    }
                }
            }
        }
    }
}

/// Assignment target: a variable, possibly followed by applications and
/// field selections (`v(i)`, `r'f`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LValue {
    pub root: String,
    pub path: Vec<Access>,
}

impl LValue {
    pub fn var(name: impl Into<String>) -> Self {
        LValue {
            root: name.into(),
            path: Vec::new(),
        }
    }

    pub fn apply(name: impl Into<String>, index: BExpr) -> Self {
        LValue {
            root: name.into(),
            path: vec![Access::Index(index)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Access {
    Index(BExpr),
    Field(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Pred {
    True,
    False,
    And(Box<Pred>, Box<Pred>),
    Or(Box<Pred>, Box<Pred>),
    Not(Box<Pred>),
    Implies(Box<Pred>, Box<Pred>),
    Cmp(CmpOp, BExpr, BExpr),
    Member(BExpr, BExpr),
    NotMember(BExpr, BExpr),
    /// `!var.((var : lo..hi [& guard]) => body)`
    Forall {
        var: String,
        lo: BExpr,
        hi: BExpr,
        guard: Option<Box<Pred>>,
        body: Box<Pred>,
    },
}

#[allow(clippy::should_implement_trait)]
impl Pred {
    pub fn and(a: Pred, b: Pred) -> Pred {
        match (a, b) {
            (Pred::True, x) | (x, Pred::True) => x,
            (a, b) => Pred::And(Box::new(a), Box::new(b)),
        }
    }

    pub fn or(a: Pred, b: Pred) -> Pred {
        Pred::Or(Box::new(a), Box::new(b))
    }

    pub fn not(a: Pred) -> Pred {
        Pred::Not(Box::new(a))
    }

    pub fn implies(a: Pred, b: Pred) -> Pred {
        Pred::Implies(Box::new(a), Box::new(b))
    }

    pub fn eq(a: BExpr, b: BExpr) -> Pred {
        Pred::Cmp(CmpOp::Eq, a, b)
    }

    pub fn member(a: BExpr, set: BExpr) -> Pred {
        Pred::Member(a, set)
    }

    pub fn conj(items: Vec<Pred>) -> Pred {
        items.into_iter().fold(Pred::True, Pred::and)
    }

    /// Flattens a left-nested conjunction.
    pub fn conjuncts(self) -> Vec<Pred> {
        match self {
            Pred::And(a, b) => {
                let mut v = a.conjuncts();
                v.extend(b.conjuncts());
                v
            }
            Pred::True => Vec::new(),
            p => vec![p],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BExpr {
    Int(i64),
    Bool(bool),
    Ident(String),
    Neg(Box<BExpr>),
    Arith(ArithOp, Box<BExpr>, Box<BExpr>),
    Apply(Box<BExpr>, Box<BExpr>),
    Field(Box<BExpr>, String),
    Rec(Vec<(String, BExpr)>),
    Maplets(Vec<(BExpr, BExpr)>),
    /// `(lo..hi) * {value}`
    ConstFunction {
        lo: Box<BExpr>,
        hi: Box<BExpr>,
        value: Box<BExpr>,
    },
    Interval(Box<BExpr>, Box<BExpr>),
    TotalFun(Box<BExpr>, Box<BExpr>),
    Struct(Vec<(String, BExpr)>),
    BoolOf(Box<Pred>),
}

#[allow(clippy::should_implement_trait)]
impl BExpr {
    pub fn ident(s: impl Into<String>) -> BExpr {
        BExpr::Ident(s.into())
    }

    pub fn arith(op: ArithOp, a: BExpr, b: BExpr) -> BExpr {
        BExpr::Arith(op, Box::new(a), Box::new(b))
    }

    pub fn add(a: BExpr, b: BExpr) -> BExpr {
        BExpr::arith(ArithOp::Add, a, b)
    }

    pub fn sub(a: BExpr, b: BExpr) -> BExpr {
        BExpr::arith(ArithOp::Sub, a, b)
    }

    pub fn apply(f: BExpr, i: BExpr) -> BExpr {
        BExpr::Apply(Box::new(f), Box::new(i))
    }

    pub fn interval(lo: BExpr, hi: BExpr) -> BExpr {
        BExpr::Interval(Box::new(lo), Box::new(hi))
    }

    pub fn total_fun(dom: BExpr, ran: BExpr) -> BExpr {
        BExpr::TotalFun(Box::new(dom), Box::new(ran))
    }
}
