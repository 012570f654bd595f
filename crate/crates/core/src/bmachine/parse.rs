//! Reader for the machine subset the emitter produces, in either flavor.

use super::ast::*;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for BParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for BParseError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BTok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for BTok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BTok::Ident(s) => write!(f, "{s}"),
            BTok::Int(n) => write!(f, "{n}"),
            BTok::Sym(s) => write!(f, "{s}"),
            BTok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: BTok,
    line: usize,
    col: usize,
}

const SYMS: &[&str] = &[
    "-->", "<--", "|->", ":=", "..", "/=", "/:", "<=", ">=", "=>", "||", "&", ":", "=", "<", ">",
    "+", "-", "*", "/", "(", ")", "{", "}", ",", ";", "'", "!", ".",
];

const UNICODE_SYMS: &[(char, &str)] = &[
    ('∧', "&"),
    ('⇒', "=>"),
    ('∈', ":"),
    ('∉', "/:"),
    ('≠', "/="),
    ('≤', "<="),
    ('≥', ">="),
    ('→', "-->"),
    ('↦', "|->"),
    ('∀', "!"),
    ('←', "<--"),
    ('∥', "||"),
    ('×', "*"),
];

fn tokenize(src: &str) -> Result<Vec<Token>, BParseError> {
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let mut out = Vec::new();
    let err = |line, col, m: String| BParseError {
        line,
        col,
        message: m,
    };
    while i < chars.len() {
        let c = chars[i];
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i, &mut col);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            let (l0, c0) = (line, col);
            i += 2;
            col += 2;
            loop {
                if i + 1 >= chars.len() {
                    return Err(err(l0, c0, "unterminated comment".into()));
                }
                if chars[i] == '*' && chars[i + 1] == '/' {
                    i += 2;
                    col += 2;
                    break;
                }
                if chars[i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                i += 1;
            }
            continue;
        }
        let (l0, c0) = (line, col);
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                advance(1, &mut i, &mut col);
            }
            let text: String = chars[start..i].iter().collect();
            let n = text
                .parse::<i64>()
                .map_err(|_| err(l0, c0, format!("integer literal {text} too large")))?;
            out.push(Token {
                tok: BTok::Int(n),
                line: l0,
                col: c0,
            });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                advance(1, &mut i, &mut col);
            }
            out.push(Token {
                tok: BTok::Ident(chars[start..i].iter().collect()),
                line: l0,
                col: c0,
            });
            continue;
        }
        if c == '∨' {
            advance(1, &mut i, &mut col);
            out.push(Token {
                tok: BTok::Ident("or".into()),
                line: l0,
                col: c0,
            });
            continue;
        }
        if c == '¬' {
            advance(1, &mut i, &mut col);
            out.push(Token {
                tok: BTok::Ident("not".into()),
                line: l0,
                col: c0,
            });
            continue;
        }
        if let Some((_, s)) = UNICODE_SYMS.iter().find(|(u, _)| *u == c) {
            advance(1, &mut i, &mut col);
            out.push(Token {
                tok: BTok::Sym(s),
                line: l0,
                col: c0,
            });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        match SYMS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                advance(s.len(), &mut i, &mut col);
                out.push(Token {
                    tok: BTok::Sym(s),
                    line: l0,
                    col: c0,
                });
            }
            None => return Err(err(l0, c0, format!("unexpected character `{c}`"))),
        }
    }
    out.push(Token {
        tok: BTok::Eof,
        line,
        col,
    });
    Ok(out)
}

/// Token texts of a machine, ignoring layout and comments.
pub fn token_stream(src: &str) -> Result<Vec<String>, BParseError> {
    Ok(tokenize(src)?
        .into_iter()
        .filter(|t| t.tok != BTok::Eof)
        .map(|t| t.tok.to_string())
        .collect())
}

/// Compares two texts token by token. Returns a description of the first
/// difference, or `None` when they agree.
pub fn token_diff(expected: &str, actual: &str) -> Option<String> {
    let a = match token_stream(expected) {
        Ok(t) => t,
        Err(e) => return Some(format!("expected text does not tokenize: {e}")),
    };
    let b = match token_stream(actual) {
        Ok(t) => t,
        Err(e) => return Some(format!("actual text does not tokenize: {e}")),
    };
    for k in 0..a.len().max(b.len()) {
        let (x, y) = (a.get(k), b.get(k));
        if x != y {
            let ctx = |t: &[String]| t[k.saturating_sub(5)..t.len().min(k + 5)].join(" ");
            return Some(format!(
                "token {k}: expected {:?}, found {:?}\n  expected: ... {} ...\n  actual:   ... {} ...",
                x.map(String::as_str).unwrap_or("<end>"),
                y.map(String::as_str).unwrap_or("<end>"),
                ctx(&a),
                ctx(&b)
            ));
        }
    }
    None
}

pub fn tokens_equal(a: &str, b: &str) -> bool {
    token_diff(a, b).is_none()
}

const CLAUSES: &[&str] = &[
    "SETS",
    "CONSTANTS",
    "PROPERTIES",
    "VARIABLES",
    "INVARIANT",
    "INITIALISATION",
    "OPERATIONS",
    "END",
];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, BParseError>;

impl Parser {
    fn new(src: &str) -> PResult<Self> {
        Ok(Parser {
            toks: tokenize(src)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &BTok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &BTok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> BTok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let t = &self.toks[self.pos];
        Err(BParseError {
            line: t.line,
            col: t.col,
            message: msg.into(),
        })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), BTok::Sym(x) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), BTok::Ident(x) if x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, s: &str) -> bool {
        if self.is_kw(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.error(format!("expected `{s}`, found `{}`", self.peek()))
        }
    }

    fn expect_kw(&mut self, s: &str) -> PResult<()> {
        if self.eat_kw(s) {
            Ok(())
        } else {
            self.error(format!("expected `{s}`, found `{}`", self.peek()))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            BTok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            t => self.error(format!("expected identifier, found `{t}`")),
        }
    }

    fn ident_list(&mut self) -> PResult<Vec<String>> {
        let mut v = vec![self.ident()?];
        while self.eat_sym(",") {
            v.push(self.ident()?);
        }
        Ok(v)
    }

    fn machine(&mut self) -> PResult<Machine> {
        self.expect_kw("MACHINE")?;
        let mut m = Machine {
            name: self.ident()?,
            ..Machine::default()
        };
        loop {
            let kw = match self.peek() {
                BTok::Ident(k) if CLAUSES.contains(&k.as_str()) => k.clone(),
                t => return self.error(format!("expected a clause keyword, found `{t}`")),
            };
            self.bump();
            match kw.as_str() {
                "SETS" => loop {
                    let name = self.ident()?;
                    self.expect_sym("=")?;
                    self.expect_sym("{")?;
                    let members = self.ident_list()?;
                    self.expect_sym("}")?;
                    m.sets.push((name, members));
                    if !self.eat_sym(";") {
                        break;
                    }
                },
                "CONSTANTS" => m.constants = self.ident_list()?,
                "PROPERTIES" => m.properties = self.pred()?.conjuncts(),
                "VARIABLES" => m.variables = self.ident_list()?,
                "INVARIANT" => m.invariant = self.pred()?.conjuncts(),
                "INITIALISATION" => m.initialisation = self.subst()?,
                "OPERATIONS" => loop {
                    m.operations.push(self.operation()?);
                    if !self.eat_sym(";") {
                        break;
                    }
                },
                _ => {
                    if *self.peek() != BTok::Eof {
                        return self.error(format!("unexpected `{}` after END", self.peek()));
                    }
                    return Ok(m);
                }
            }
        }
    }

    fn operation(&mut self) -> PResult<Operation> {
        let first = self.ident_list()?;
        let (outputs, name) = if self.eat_sym("<--") {
            (first, self.ident()?)
        } else if first.len() == 1 {
            (Vec::new(), first.into_iter().next().unwrap())
        } else {
            return self.error("expected `<--` after operation outputs");
        };
        let params = if self.eat_sym("(") {
            let p = self.ident_list()?;
            self.expect_sym(")")?;
            p
        } else {
            Vec::new()
        };
        self.expect_sym("=")?;
        let (pre, body) = if self.eat_kw("PRE") {
            let p = self.pred()?.conjuncts();
            self.expect_kw("THEN")?;
            let b = self.subst()?;
            self.expect_kw("END")?;
            (p, b)
        } else if self.eat_kw("BEGIN") {
            let b = self.subst()?;
            self.expect_kw("END")?;
            (Vec::new(), b)
        } else {
            (Vec::new(), self.subst_atom()?)
        };
        Ok(Operation {
            name,
            outputs,
            params,
            pre,
            body,
        })
    }

    fn subst(&mut self) -> PResult<Subst> {
        let mut items = vec![self.subst_par()?];
        while self.eat_sym(";") {
            items.push(self.subst_par()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Subst::Seq(items)
        })
    }

    fn subst_par(&mut self) -> PResult<Subst> {
        let mut items = vec![self.subst_atom()?];
        while self.eat_sym("||") {
            items.push(self.subst_atom()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Subst::Parallel(items)
        })
    }

    fn subst_atom(&mut self) -> PResult<Subst> {
        if self.eat_kw("skip") {
            return Ok(Subst::Skip);
        }
        if self.eat_kw("BEGIN") {
            let s = self.subst()?;
            self.expect_kw("END")?;
            return Ok(s);
        }
        if self.eat_kw("IF") {
            let mut branches = Vec::new();
            loop {
                let c = self.pred()?;
                self.expect_kw("THEN")?;
                branches.push((c, self.subst()?));
                if !self.eat_kw("ELSIF") {
                    break;
                }
            }
            let else_branch = if self.eat_kw("ELSE") {
                Some(Box::new(self.subst()?))
            } else {
                None
            };
            self.expect_kw("END")?;
            return Ok(Subst::If {
                branches,
                else_branch,
            });
        }
        if self.eat_kw("CASE") {
            let scrutinee = self.expr()?;
            self.expect_kw("OF")?;
            self.expect_kw("EITHER")?;
            let mut arms = Vec::new();
            loop {
                let mut lits = vec![self.expr()?];
                while self.eat_sym(",") {
                    lits.push(self.expr()?);
                }
                self.expect_kw("THEN")?;
                arms.push((lits, self.subst()?));
                if !self.eat_kw("OR") {
                    break;
                }
            }
            let else_branch = if self.eat_kw("ELSE") {
                Some(Box::new(self.subst()?))
            } else {
                None
            };
            self.expect_kw("END")?;
            self.expect_kw("END")?;
            return Ok(Subst::Case {
                scrutinee,
                arms,
                else_branch,
            });
        }
        if self.eat_kw("WHILE") {
            let cond = self.pred()?;
            self.expect_kw("DO")?;
            let body = Box::new(self.subst()?);
            let invariant = if self.eat_kw("INVARIANT") {
                Some(self.pred()?)
            } else {
                None
            };
            let variant = if self.eat_kw("VARIANT") {
                Some(self.expr()?)
            } else {
                None
            };
            self.expect_kw("END")?;
            return Ok(Subst::While {
                cond,
                body,
                invariant,
                variant,
            });
        }
        if self.eat_kw("VAR") {
            let names = self.ident_list()?;
            self.expect_kw("IN")?;
            let body = Box::new(self.subst()?);
            self.expect_kw("END")?;
            return Ok(Subst::Var { names, body });
        }
        self.assign_or_call()
    }

    fn assign_or_call(&mut self) -> PResult<Subst> {
        let first = self.ident()?;
        if self.is_sym(",") || self.is_sym("<--") {
            let mut outputs = vec![first];
            while self.eat_sym(",") {
                outputs.push(self.ident()?);
            }
            self.expect_sym("<--")?;
            let op = self.ident()?;
            let args = self.call_args()?;
            return Ok(Subst::OpCall { outputs, op, args });
        }
        let mut path = Vec::new();
        let mut call_args: Option<Vec<BExpr>> = None;
        loop {
            if self.is_sym("(") {
                let args = self.call_args()?;
                if path.is_empty() && call_args.is_none() && !self.is_sym(":=") && !self.is_sym("(") && !self.is_sym("'") {
                    call_args = Some(args);
                    break;
                }
                if args.len() != 1 {
                    return self.error("expected a single index");
                }
                path.push(Access::Index(args.into_iter().next().unwrap()));
            } else if self.eat_sym("'") {
                path.push(Access::Field(self.ident()?));
            } else {
                break;
            }
        }
        if let Some(args) = call_args {
            return Ok(Subst::OpCall {
                outputs: Vec::new(),
                op: first,
                args,
            });
        }
        if self.eat_sym(":=") {
            let e = self.expr()?;
            return Ok(Subst::Assign(LValue { root: first, path }, e));
        }
        if path.is_empty() {
            return Ok(Subst::OpCall {
                outputs: Vec::new(),
                op: first,
                args: Vec::new(),
            });
        }
        self.error(format!("expected `:=`, found `{}`", self.peek()))
    }

    fn call_args(&mut self) -> PResult<Vec<BExpr>> {
        if !self.eat_sym("(") {
            return Ok(Vec::new());
        }
        let mut args = vec![self.expr()?];
        while self.eat_sym(",") {
            args.push(self.expr()?);
        }
        self.expect_sym(")")?;
        Ok(args)
    }

    pub fn pred(&mut self) -> PResult<Pred> {
        let mut lhs = self.pred_andor()?;
        while self.eat_sym("=>") {
            let rhs = self.pred_andor()?;
            lhs = Pred::implies(lhs, rhs);
        }
        Ok(lhs)
    }

    fn pred_andor(&mut self) -> PResult<Pred> {
        let mut lhs = self.pred_atom()?;
        loop {
            if self.eat_sym("&") {
                let rhs = self.pred_atom()?;
                lhs = Pred::And(Box::new(lhs), Box::new(rhs));
            } else if self.eat_kw("or") {
                let rhs = self.pred_atom()?;
                lhs = Pred::or(lhs, rhs);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn pred_atom(&mut self) -> PResult<Pred> {
        if self.eat_kw("btrue") {
            return Ok(Pred::True);
        }
        if self.eat_kw("bfalse") {
            return Ok(Pred::False);
        }
        if self.is_kw("not") && *self.peek_at(1) == BTok::Sym("(") {
            self.bump();
            self.bump();
            let p = self.pred()?;
            self.expect_sym(")")?;
            return Ok(Pred::not(p));
        }
        if self.eat_sym("!") {
            return self.forall();
        }
        if self.is_sym("(") {
            let save = self.pos;
            self.bump();
            if let Ok(p) = self.pred() {
                if self.eat_sym(")") && !self.continues_expr() {
                    return Ok(p);
                }
            }
            self.pos = save;
        }
        let a = self.expr()?;
        let sym = match self.peek() {
            BTok::Sym(s) => *s,
            t => return self.error(format!("expected a comparison, found `{t}`")),
        };
        let mk: fn(BExpr, BExpr) -> Pred = match sym {
            "=" => |a, b| Pred::Cmp(CmpOp::Eq, a, b),
            "/=" => |a, b| Pred::Cmp(CmpOp::Ne, a, b),
            "<" => |a, b| Pred::Cmp(CmpOp::Lt, a, b),
            "<=" => |a, b| Pred::Cmp(CmpOp::Le, a, b),
            ">" => |a, b| Pred::Cmp(CmpOp::Gt, a, b),
            ">=" => |a, b| Pred::Cmp(CmpOp::Ge, a, b),
            ":" => Pred::Member,
            "/:" => Pred::NotMember,
            _ => return self.error(format!("expected a comparison, found `{sym}`")),
        };
        self.bump();
        let b = self.expr()?;
        Ok(mk(a, b))
    }

    fn continues_expr(&self) -> bool {
        matches!(
            self.peek(),
            BTok::Sym(
                "=" | "/=" | "<" | "<=" | ">" | ">=" | ":" | "/:" | "+" | "-" | "*" | "/" | ".." | "-->"
                    | "(" | "'"
            )
        ) || self.is_kw("mod")
    }

    fn forall(&mut self) -> PResult<Pred> {
        let var = self.ident()?;
        self.expect_sym(".")?;
        self.expect_sym("(")?;
        let p = self.pred()?;
        self.expect_sym(")")?;
        let bad = || format!("unsupported quantifier shape over `{var}`");
        let Pred::Implies(lhs, body) = p else {
            return self.error(bad());
        };
        let (dom, guard) = match *lhs {
            Pred::And(a, g) => (*a, Some(g)),
            other => (other, None),
        };
        match dom {
            Pred::Member(BExpr::Ident(v), BExpr::Interval(lo, hi)) if v == var => Ok(Pred::Forall {
                var,
                lo: *lo,
                hi: *hi,
                guard,
                body,
            }),
            _ => self.error(bad()),
        }
    }

    pub fn expr(&mut self) -> PResult<BExpr> {
        let a = self.expr_interval()?;
        if self.eat_sym("-->") {
            let b = self.expr_interval()?;
            return Ok(BExpr::total_fun(a, b));
        }
        Ok(a)
    }

    fn expr_interval(&mut self) -> PResult<BExpr> {
        let a = self.expr_add()?;
        if self.eat_sym("..") {
            let b = self.expr_add()?;
            return Ok(BExpr::interval(a, b));
        }
        Ok(a)
    }

    fn expr_add(&mut self) -> PResult<BExpr> {
        let mut lhs = self.expr_mul()?;
        loop {
            let op = if self.eat_sym("+") {
                ArithOp::Add
            } else if self.eat_sym("-") {
                ArithOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.expr_mul()?;
            lhs = BExpr::arith(op, lhs, rhs);
        }
    }

    fn expr_mul(&mut self) -> PResult<BExpr> {
        let mut lhs = self.expr_unary()?;
        loop {
            let op = if self.eat_sym("*") {
                ArithOp::Mul
            } else if self.eat_sym("/") {
                ArithOp::Div
            } else if self.eat_kw("mod") {
                ArithOp::Mod
            } else {
                return Ok(lhs);
            };
            if op == ArithOp::Mul && self.is_sym("{") {
                if let BExpr::Interval(lo, hi) = lhs {
                    self.bump();
                    let value = self.expr()?;
                    self.expect_sym("}")?;
                    lhs = BExpr::ConstFunction { lo, hi, value: Box::new(value) };
                    continue;
                }
            }
            let rhs = self.expr_unary()?;
            lhs = BExpr::arith(op, lhs, rhs);
        }
    }

    fn expr_unary(&mut self) -> PResult<BExpr> {
        if self.eat_sym("-") {
            let postfix = matches!(self.peek_at(1), BTok::Sym("(" | "'"));
            if let (BTok::Int(n), false) = (self.peek().clone(), postfix) {
                self.bump();
                return Ok(BExpr::Int(-n));
            }
            let e = self.expr_unary()?;
            return Ok(BExpr::Neg(Box::new(e)));
        }
        self.expr_postfix()
    }

    fn expr_postfix(&mut self) -> PResult<BExpr> {
        let mut e = self.expr_primary()?;
        loop {
            if self.eat_sym("(") {
                let i = self.expr()?;
                self.expect_sym(")")?;
                e = BExpr::apply(e, i);
            } else if self.eat_sym("'") {
                e = BExpr::Field(Box::new(e), self.ident()?);
            } else {
                return Ok(e);
            }
        }
    }

    fn fields(&mut self) -> PResult<Vec<(String, BExpr)>> {
        self.expect_sym("(")?;
        let mut fs = Vec::new();
        loop {
            let n = self.ident()?;
            self.expect_sym(":")?;
            fs.push((n, self.expr()?));
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym(")")?;
        Ok(fs)
    }

    fn expr_primary(&mut self) -> PResult<BExpr> {
        match self.peek().clone() {
            BTok::Int(n) => {
                self.bump();
                Ok(BExpr::Int(n))
            }
            BTok::Ident(s) => {
                self.bump();
                match s.as_str() {
                    "TRUE" => Ok(BExpr::Bool(true)),
                    "FALSE" => Ok(BExpr::Bool(false)),
                    "rec" if self.is_sym("(") => Ok(BExpr::Rec(self.fields()?)),
                    "struct" if self.is_sym("(") => Ok(BExpr::Struct(self.fields()?)),
                    "bool" if self.is_sym("(") => {
                        self.bump();
                        let p = self.pred()?;
                        self.expect_sym(")")?;
                        Ok(BExpr::BoolOf(Box::new(p)))
                    }
                    _ => Ok(BExpr::Ident(s)),
                }
            }
            BTok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            BTok::Sym("{") => {
                self.bump();
                let mut ms = Vec::new();
                loop {
                    let k = self.expr_add()?;
                    self.expect_sym("|->")?;
                    let v = self.expr_add()?;
                    ms.push((k, v));
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.expect_sym("}")?;
                Ok(BExpr::Maplets(ms))
            }
            t => self.error(format!("expected an expression, found `{t}`")),
        }
    }

    fn finish<T>(&mut self, v: T) -> PResult<T> {
        if *self.peek() != BTok::Eof {
            return self.error(format!("unexpected `{}`", self.peek()));
        }
        Ok(v)
    }
}

pub fn parse_machine(src: &str) -> Result<Machine, BParseError> {
    let mut p = Parser::new(src)?;
    p.machine()
}

pub fn parse_pred(src: &str) -> Result<Pred, BParseError> {
    let mut p = Parser::new(src)?;
    let v = p.pred()?;
    p.finish(v)
}

pub fn parse_expr(src: &str) -> Result<BExpr, BParseError> {
    let mut p = Parser::new(src)?;
    let v = p.expr()?;
    p.finish(v)
}

pub fn parse_subst(src: &str) -> Result<Subst, BParseError> {
    let mut p = Parser::new(src)?;
    let v = p.subst()?;
    p.finish(v)
}

#[cfg(test)]
mod tests {
    use super::super::emit::*;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parenthesised_predicate_vs_expression() {
        assert_eq!(
            parse_pred("(a + 1) = b").unwrap(),
            Pred::eq(BExpr::add(BExpr::ident("a"), BExpr::Int(1)), BExpr::ident("b"))
        );
        let p = parse_pred("(x = 1 or y = 2) & z : BOOL").unwrap();
        assert!(matches!(p, Pred::And(..)));
    }

    #[test]
    fn comments_and_layout_are_ignored_by_token_compare() {
        assert!(tokens_equal("a := 1 // set a\n; b := 2", "a:=1;\n   b := 2"));
        let d = token_diff("x := 1", "x := 2").unwrap();
        assert!(d.contains("expected \"1\", found \"2\""), "{d}");
    }

    #[test]
    fn op_call_forms() {
        assert_eq!(
            parse_subst("a, b <-- op(x, 1)").unwrap(),
            Subst::OpCall {
                outputs: vec!["a".into(), "b".into()],
                op: "op".into(),
                args: vec![BExpr::ident("x"), BExpr::Int(1)]
            }
        );
        assert_eq!(
            parse_subst("v(i) := 3").unwrap(),
            Subst::Assign(LValue::apply("v", BExpr::ident("i")), BExpr::Int(3))
        );
    }

    #[test]
    fn unicode_machine_reads_back() {
        let src = "MACHINE m VARIABLES x INVARIANT x ∈ 0..3 ∧ (x ≠ 2 ∨ x ≥ 0) INITIALISATION x := 0 END";
        let m = parse_machine(src).unwrap();
        assert_eq!(m.invariant.len(), 2);
        assert!(tokens_equal(&emit_machine(&m), &emit_machine(&parse_machine(&emit_machine_unicode(&m)).unwrap())));
    }

    fn ident() -> impl Strategy<Value = String> {
        prop::sample::select(vec!["a", "b", "idx", "store", "v", "MAX_SIZE"]).prop_map(String::from)
    }

    fn expr() -> impl Strategy<Value = BExpr> {
        let leaf = prop_oneof![
            (-3i64..300).prop_map(BExpr::Int),
            any::<bool>().prop_map(BExpr::Bool),
            ident().prop_map(BExpr::Ident),
        ];
        leaf.prop_recursive(4, 24, 3, |inner| {
            let ops = prop::sample::select(vec![
                ArithOp::Add,
                ArithOp::Sub,
                ArithOp::Mul,
                ArithOp::Div,
                ArithOp::Mod,
            ]);
            prop_oneof![
                (ops, inner.clone(), inner.clone()).prop_map(|(o, a, b)| BExpr::arith(o, a, b)),
                inner.clone().prop_map(|e| BExpr::Neg(Box::new(e))),
                (ident(), inner.clone()).prop_map(|(f, i)| BExpr::apply(BExpr::Ident(f), i)),
                (inner.clone(), ident()).prop_map(|(r, f)| BExpr::Field(Box::new(r), f)),
                prop::collection::vec((ident(), inner.clone()), 1..3).prop_map(BExpr::Rec),
                prop::collection::vec((inner.clone(), inner.clone()), 1..3).prop_map(BExpr::Maplets),
                (inner.clone(), inner.clone(), inner.clone()).prop_map(|(l, h, v)| BExpr::ConstFunction {
                    lo: Box::new(l),
                    hi: Box::new(h),
                    value: Box::new(v)
                }),
                (inner.clone(), inner.clone(), ident()).prop_map(|(l, h, t)| BExpr::total_fun(
                    BExpr::interval(l, h),
                    BExpr::Ident(t)
                )),
            ]
        })
    }

    fn pred() -> impl Strategy<Value = Pred> {
        let cmp = prop::sample::select(vec![
            CmpOp::Eq,
            CmpOp::Ne,
            CmpOp::Lt,
            CmpOp::Le,
            CmpOp::Gt,
            CmpOp::Ge,
        ]);
        let leaf = prop_oneof![
            (cmp, expr(), expr()).prop_map(|(o, a, b)| Pred::Cmp(o, a, b)),
            (expr(), expr()).prop_map(|(a, b)| Pred::Member(a, b)),
            Just(Pred::True),
        ];
        leaf.prop_recursive(3, 16, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Pred::And(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Pred::or(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Pred::implies(a, b)),
                inner.clone().prop_map(Pred::not),
                (expr(), expr(), prop::option::of(inner.clone()), inner.clone()).prop_map(|(lo, hi, g, b)| {
                    Pred::Forall {
                        var: "i".into(),
                        lo,
                        hi,
                        guard: g.map(Box::new),
                        body: Box::new(b),
                    }
                }),
                inner.clone().prop_map(|p| Pred::eq(BExpr::ident("x"), BExpr::BoolOf(Box::new(p)))),
            ]
        })
    }

    proptest! {
        #[test]
        fn expressions_round_trip(e in expr()) {
            let text = emit_expr(&e);
            prop_assert_eq!(parse_expr(&text).unwrap(), e, "{}", text);
        }

        #[test]
        fn predicates_round_trip(p in pred()) {
            let text = emit_pred(&p);
            prop_assert_eq!(parse_pred(&text).unwrap(), p, "{}", text);
        }

        #[test]
        fn unicode_predicates_round_trip(p in pred()) {
            let text = Emitter::new(Flavor::Unicode).pred(&p);
            prop_assert_eq!(parse_pred(&text).unwrap(), p, "{}", text);
        }
    }
}
