//! Syntax tree of the SCADE subset.
//!
//! Spans never take part in equality, so two trees parsed from differently
//! formatted text compare equal when their structure matches.

use std::fmt;

#[derive(Debug, Clone, Copy, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn new(line: u32, col: u32) -> Self {
        Span { line, col }
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl Eq for Span {}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    pub types: Vec<TypeDecl>,
    pub consts: Vec<ConstDecl>,
    pub nodes: Vec<NodeDecl>,
    pub pragmas: Pragmas,
}

impl Program {
    pub fn node(&self, name: &str) -> Option<&NodeDecl> {
        self.nodes.iter().find(|n| n.name == name)
    }
}

/// Directives carried in `--@` comment lines.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Pragmas {
    pub machine: Option<String>,
    /// (automaton name, B variable name)
    pub state_vars: Vec<(String, String)>,
    /// Raw B predicates to conjoin to the machine invariant.
    pub invariants: Vec<(String, Span)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDecl {
    pub name: String,
    pub def: TypeDef,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeDef {
    Enum(Vec<String>),
    Struct(Vec<(String, TypeExpr)>),
    Alias(TypeExpr),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaseType {
    Uint8,
    Uint16,
    Uint32,
    Int8,
    Int16,
    Int32,
    Bool,
}

impl BaseType {
    pub const ALL: [BaseType; 7] = [
        BaseType::Uint8,
        BaseType::Uint16,
        BaseType::Uint32,
        BaseType::Int8,
        BaseType::Int16,
        BaseType::Int32,
        BaseType::Bool,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            BaseType::Uint8 => "uint8",
            BaseType::Uint16 => "uint16",
            BaseType::Uint32 => "uint32",
            BaseType::Int8 => "int8",
            BaseType::Int16 => "int16",
            BaseType::Int32 => "int32",
            BaseType::Bool => "bool",
        }
    }

    pub fn from_keyword(s: &str) -> Option<BaseType> {
        BaseType::ALL.into_iter().find(|b| b.keyword() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeExpr {
    Base(BaseType),
    Named(String, Span),
    Array(Box<TypeExpr>, SizeExpr),
}

/// Compile-time size: literal or the name of an integer constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SizeExpr {
    Lit(i64),
    Const(String, Span),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstDecl {
    pub name: String,
    pub ty: TypeExpr,
    pub value: Expr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub ty: TypeExpr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeDecl {
    pub name: String,
    /// Declared with `function` rather than `node`.
    pub is_function: bool,
    pub inputs: Vec<VarDecl>,
    pub outputs: Vec<VarDecl>,
    pub body: Block,
    pub span: Span,
}

impl NodeDecl {
    pub fn locals(&self) -> &[VarDecl] {
        &self.body.locals
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Block {
    pub locals: Vec<VarDecl>,
    pub items: Vec<BodyItem>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BodyItem {
    Equation(Equation),
    Activate(Activate),
    Automaton(Automaton),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equation {
    pub lhs: Vec<Lhs>,
    pub rhs: Expr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Lhs {
    Var(String),
    Wildcard,
}

impl Lhs {
    pub fn name(&self) -> Option<&str> {
        match self {
            Lhs::Var(n) => Some(n),
            Lhs::Wildcard => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Activate {
    pub name: Option<String>,
    pub cond: Expr,
    pub then_branch: Block,
    pub else_branch: Block,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Automaton {
    pub name: String,
    pub states: Vec<StateDecl>,
    pub span: Span,
}

impl Automaton {
    pub fn initial(&self) -> &StateDecl {
        self.states
            .iter()
            .find(|s| s.initial)
            .unwrap_or(&self.states[0])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateDecl {
    pub name: String,
    pub initial: bool,
    pub unless: Vec<Transition>,
    pub body: Block,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub cond: Expr,
    pub target: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Int(i64),
    Bool(bool),
    /// Unresolved name, as produced by the parser.
    Ident(String),
    /// Resolved by the typechecker.
    Var(String),
    Const(String),
    Member(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    Case(Box<Expr>, Vec<(Pattern, Expr)>, Option<Box<Expr>>),
    Fby(Box<Fby>),
    Make(String, Vec<Expr>),
    Field(Box<Expr>, String),
    Index(Box<Expr>, Box<Expr>),
    Array(Vec<Expr>),
    Hof(Box<HofApp>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "mod",
            BinOp::Eq => "=",
            BinOp::Ne => "<>",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "and",
            BinOp::Or => "or",
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge
        )
    }

    pub fn is_arith(self) -> bool {
        matches!(
            self,
            BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pattern {
    Int(i64),
    Bool(bool),
    Member(String),
}

/// `fby(input; depth; init)`. `id` numbers the instances of a node in
/// pre-order and links the buffer to its B counterpart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fby {
    pub id: usize,
    pub input: Expr,
    pub depth: SizeExpr,
    pub init: Expr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HofKind {
    Map,
    Mapi,
    Mapw,
    Mapwi,
    Fold,
    Foldi,
    Foldw,
    Foldwi,
    Mapfold,
    Mapfoldi,
    Mapfoldw,
    Mapfoldwi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HofFamily {
    Map,
    Fold,
    MapFold,
}

impl HofKind {
    pub const ALL: [HofKind; 12] = [
        HofKind::Map,
        HofKind::Mapi,
        HofKind::Mapw,
        HofKind::Mapwi,
        HofKind::Fold,
        HofKind::Foldi,
        HofKind::Foldw,
        HofKind::Foldwi,
        HofKind::Mapfold,
        HofKind::Mapfoldi,
        HofKind::Mapfoldw,
        HofKind::Mapfoldwi,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            HofKind::Map => "map",
            HofKind::Mapi => "mapi",
            HofKind::Mapw => "mapw",
            HofKind::Mapwi => "mapwi",
            HofKind::Fold => "fold",
            HofKind::Foldi => "foldi",
            HofKind::Foldw => "foldw",
            HofKind::Foldwi => "foldwi",
            HofKind::Mapfold => "mapfold",
            HofKind::Mapfoldi => "mapfoldi",
            HofKind::Mapfoldw => "mapfoldw",
            HofKind::Mapfoldwi => "mapfoldwi",
        }
    }

    pub fn from_keyword(s: &str) -> Option<HofKind> {
        HofKind::ALL.into_iter().find(|k| k.keyword() == s)
    }

    pub fn family(self) -> HofFamily {
        use HofKind::*;
        match self {
            Map | Mapi | Mapw | Mapwi => HofFamily::Map,
            Fold | Foldi | Foldw | Foldwi => HofFamily::Fold,
            Mapfold | Mapfoldi | Mapfoldw | Mapfoldwi => HofFamily::MapFold,
        }
    }

    pub fn indexed(self) -> bool {
        use HofKind::*;
        matches!(self, Mapi | Mapwi | Foldi | Foldwi | Mapfoldi | Mapfoldwi)
    }

    pub fn is_while(self) -> bool {
        use HofKind::*;
        matches!(self, Mapw | Mapwi | Foldw | Foldwi | Mapfoldw | Mapfoldwi)
    }

    /// Number of results bound on the left-hand side before the accumulators.
    pub fn leading_results(self) -> usize {
        match (self.is_while(), self.family()) {
            (false, _) => 0,
            (true, HofFamily::MapFold) => 2,
            (true, _) => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HofApp {
    pub kind: HofKind,
    /// Accumulator count: 0 for the map family, 1 for folds, explicit for mapfold.
    pub accs: usize,
    pub op: String,
    pub size: SizeExpr,
    pub cond: Option<Expr>,
    pub defaults: Vec<Expr>,
    pub args: Vec<Expr>,
    pub span: Span,
}

/// Words that cannot be used as identifiers.
pub const RESERVED: &[&str] = &[
    "type", "const", "node", "function", "returns", "var", "let", "tel", "automaton", "initial",
    "state", "unless", "restart", "activate", "if", "then", "else", "case", "of", "fby", "make",
    "and", "or", "not", "mod", "true", "false", "enum", "default", "uint8", "uint16", "uint32",
    "int8", "int16", "int32", "bool", "map", "mapi", "mapw", "mapwi", "fold", "foldi", "foldw",
    "foldwi", "mapfold", "mapfoldi", "mapfoldw", "mapfoldwi",
];

pub fn is_reserved(s: &str) -> bool {
    RESERVED.contains(&s)
}
