use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::FrontendError;

pub fn parse_program(src: &str) -> Result<Program, FrontendError> {
    let tokens = lex(src)?;
    let mut p = Parser {
        toks: tokens,
        pos: 0,
        fby_counter: 0,
    };
    p.program()
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    fby_counter: usize,
}

type PResult<T> = Result<T, FrontendError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, s: &str) -> bool {
        if self.is_kw(s) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn unexpected(&self, expected: &[&str]) -> FrontendError {
        let found = self.peek().describe();
        let msg = match expected {
            [one] => format!("expected {one}, found {found}"),
            many => format!("expected one of {}, found {found}", many.join(", ")),
        };
        FrontendError::new(self.span(), msg)
    }

    fn expect_sym(&mut self, s: &'static str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.unexpected(&[&format!("`{s}`")]))
        }
    }

    fn expect_kw(&mut self, s: &str) -> PResult<()> {
        if self.eat_kw(s) {
            Ok(())
        } else {
            Err(self.unexpected(&[&format!("`{s}`")]))
        }
    }

    fn ident(&mut self) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_reserved(&s) && s != "_" => {
                let span = self.span();
                self.advance();
                Ok((s, span))
            }
            _ => Err(self.unexpected(&["identifier"])),
        }
    }

    fn int(&mut self) -> PResult<i64> {
        match *self.peek() {
            Tok::Int(v) => {
                self.advance();
                Ok(v)
            }
            _ => Err(self.unexpected(&["integer"])),
        }
    }

    fn program(&mut self) -> PResult<Program> {
        let mut prog = Program::default();
        loop {
            let span = self.span();
            match self.peek().clone() {
                Tok::Eof => break,
                Tok::Pragma(text) => {
                    self.advance();
                    pragma(&mut prog.pragmas, &text, span)?;
                }
                Tok::Ident(kw) if kw == "type" => {
                    self.advance();
                    loop {
                        prog.types.push(self.type_decl()?);
                        let next_is_decl = matches!(self.peek(), Tok::Ident(s) if !is_reserved(s))
                            && matches!(self.peek_at(1), Tok::Sym("="));
                        if !next_is_decl {
                            break;
                        }
                    }
                }
                Tok::Ident(kw) if kw == "const" => {
                    self.advance();
                    loop {
                        prog.consts.push(self.const_decl()?);
                        let next_is_decl = matches!(self.peek(), Tok::Ident(s) if !is_reserved(s))
                            && matches!(self.peek_at(1), Tok::Sym(":"));
                        if !next_is_decl {
                            break;
                        }
                    }
                }
                Tok::Ident(kw) if kw == "node" || kw == "function" => {
                    let node = self.node_decl()?;
                    prog.nodes.push(node);
                }
                _ => return Err(self.unexpected(&["`type`", "`const`", "`node`", "`function`"])),
            }
        }
        Ok(prog)
    }

    fn type_decl(&mut self) -> PResult<TypeDecl> {
        let (name, span) = self.ident()?;
        self.expect_sym("=")?;
        let def = if self.eat_kw("enum") {
            self.expect_sym("{")?;
            let mut members = vec![self.ident()?.0];
            while self.eat_sym(",") {
                members.push(self.ident()?.0);
            }
            self.expect_sym("}")?;
            TypeDef::Enum(members)
        } else if self.eat_sym("{") {
            let mut fields = Vec::new();
            loop {
                let (f, _) = self.ident()?;
                self.expect_sym(":")?;
                fields.push((f, self.type_expr()?));
                if !self.eat_sym(",") {
                    break;
                }
            }
            self.expect_sym("}")?;
            TypeDef::Struct(fields)
        } else {
            TypeDef::Alias(self.type_expr()?)
        };
        self.expect_sym(";")?;
        Ok(TypeDecl { name, def, span })
    }

    fn const_decl(&mut self) -> PResult<ConstDecl> {
        let (name, span) = self.ident()?;
        self.expect_sym(":")?;
        let ty = self.type_expr()?;
        self.expect_sym("=")?;
        let value = self.expr()?;
        self.expect_sym(";")?;
        Ok(ConstDecl {
            name,
            ty,
            value,
            span,
        })
    }

    fn type_expr(&mut self) -> PResult<TypeExpr> {
        let mut ty = match self.peek().clone() {
            Tok::Ident(s) => {
                if let Some(b) = BaseType::from_keyword(&s) {
                    self.advance();
                    TypeExpr::Base(b)
                } else {
                    let (n, span) = self.ident()?;
                    TypeExpr::Named(n, span)
                }
            }
            _ => return Err(self.unexpected(&["type"])),
        };
        while self.eat_sym("^") {
            ty = TypeExpr::Array(Box::new(ty), self.size_expr()?);
        }
        Ok(ty)
    }

    fn size_expr(&mut self) -> PResult<SizeExpr> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.advance();
                Ok(SizeExpr::Lit(v))
            }
            Tok::Ident(_) => {
                let (n, span) = self.ident()?;
                Ok(SizeExpr::Const(n, span))
            }
            _ => Err(self.unexpected(&["integer", "constant name"])),
        }
    }

    /// `a, b : T; c : U` inside a signature; stops at `)`.
    fn signature(&mut self) -> PResult<Vec<VarDecl>> {
        let mut out = Vec::new();
        while !self.is_sym(")") {
            let mut names = vec![self.ident()?];
            while self.eat_sym(",") {
                names.push(self.ident()?);
            }
            self.expect_sym(":")?;
            let ty = self.type_expr()?;
            for (name, span) in names {
                out.push(VarDecl {
                    name,
                    ty: ty.clone(),
                    span,
                });
            }
            if !self.eat_sym(";") {
                break;
            }
        }
        Ok(out)
    }

    /// Declarations after `var`, each terminated by `;`.
    fn var_decls(&mut self) -> PResult<Vec<VarDecl>> {
        let mut out = Vec::new();
        while !self.is_kw("let") {
            let mut names = vec![self.ident()?];
            while self.eat_sym(",") {
                names.push(self.ident()?);
            }
            self.expect_sym(":")?;
            let ty = self.type_expr()?;
            self.expect_sym(";")?;
            for (name, span) in names {
                out.push(VarDecl {
                    name,
                    ty: ty.clone(),
                    span,
                });
            }
        }
        Ok(out)
    }

    fn node_decl(&mut self) -> PResult<NodeDecl> {
        let span = self.span();
        let is_function = self.is_kw("function");
        self.advance();
        self.fby_counter = 0;
        let (name, _) = self.ident()?;
        self.expect_sym("(")?;
        let inputs = self.signature()?;
        self.expect_sym(")")?;
        self.expect_kw("returns")?;
        self.expect_sym("(")?;
        let outputs = self.signature()?;
        self.expect_sym(")")?;
        let body = if self.eat_sym(";") && !(self.is_kw("var") || self.is_kw("let")) {
            Block::default()
        } else {
            let b = self.block()?;
            self.eat_sym(";");
            b
        };
        Ok(NodeDecl {
            name,
            is_function,
            inputs,
            outputs,
            body,
            span,
        })
    }

    /// `[var decls] let items tel`
    fn block(&mut self) -> PResult<Block> {
        let locals = if self.eat_kw("var") {
            self.var_decls()?
        } else {
            Vec::new()
        };
        self.expect_kw("let")?;
        let mut items = Vec::new();
        while !self.is_kw("tel") {
            items.push(self.body_item()?);
        }
        self.expect_kw("tel")?;
        Ok(Block { locals, items })
    }

    fn body_item(&mut self) -> PResult<BodyItem> {
        if self.is_kw("automaton") {
            return Ok(BodyItem::Automaton(self.automaton()?));
        }
        if self.is_kw("activate") {
            return Ok(BodyItem::Activate(self.activate()?));
        }
        if let Tok::Pragma(_) = self.peek() {
            return Err(FrontendError::new(
                self.span(),
                "pragmas are only allowed between declarations",
            ));
        }
        let span = self.span();
        let mut lhs = vec![self.lhs()?];
        while self.eat_sym(",") {
            lhs.push(self.lhs()?);
        }
        self.expect_sym("=")?;
        let rhs = self.expr()?;
        self.expect_sym(";")?;
        Ok(BodyItem::Equation(Equation { lhs, rhs, span }))
    }

    fn lhs(&mut self) -> PResult<Lhs> {
        if self.is_kw("_") {
            self.advance();
            return Ok(Lhs::Wildcard);
        }
        Ok(Lhs::Var(self.ident()?.0))
    }

    fn automaton(&mut self) -> PResult<Automaton> {
        let span = self.span();
        self.expect_kw("automaton")?;
        let (name, _) = self.ident()?;
        let mut states = Vec::new();
        while self.is_kw("state") || self.is_kw("initial") {
            states.push(self.state()?);
        }
        if states.is_empty() {
            return Err(self.unexpected(&["`state`", "`initial`"]));
        }
        self.expect_kw("returns")?;
        self.expect_sym("..")?;
        self.expect_sym(";")?;
        Ok(Automaton { name, states, span })
    }

    fn state(&mut self) -> PResult<StateDecl> {
        let span = self.span();
        let initial = self.eat_kw("initial");
        self.expect_kw("state")?;
        let (name, _) = self.ident()?;
        let mut unless = Vec::new();
        if self.eat_kw("unless") {
            loop {
                let tspan = self.span();
                self.expect_kw("if")?;
                let cond = self.expr()?;
                self.expect_kw("restart")?;
                let (target, _) = self.ident()?;
                self.expect_sym(";")?;
                unless.push(Transition {
                    cond,
                    target,
                    span: tspan,
                });
                if !self.is_kw("if") {
                    break;
                }
            }
        }
        let body = if self.is_kw("var") || self.is_kw("let") {
            self.block()?
        } else {
            Block::default()
        };
        Ok(StateDecl {
            name,
            initial,
            unless,
            body,
            span,
        })
    }

    fn activate(&mut self) -> PResult<Activate> {
        let span = self.span();
        self.expect_kw("activate")?;
        let name = match self.peek() {
            Tok::Ident(s) if !is_reserved(s) => Some(self.ident()?.0),
            _ => None,
        };
        self.expect_kw("if")?;
        let cond = self.expr()?;
        self.expect_kw("then")?;
        let then_branch = self.branch()?;
        self.expect_kw("else")?;
        let else_branch = self.branch()?;
        self.expect_kw("returns")?;
        self.expect_sym("..")?;
        self.expect_sym(";")?;
        Ok(Activate {
            name,
            cond,
            then_branch,
            else_branch,
            span,
        })
    }

    fn branch(&mut self) -> PResult<Block> {
        if self.is_kw("activate") {
            let nested = self.activate()?;
            return Ok(Block {
                locals: Vec::new(),
                items: vec![BodyItem::Activate(nested)],
            });
        }
        self.block()
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        if self.is_kw("if") {
            let span = self.span();
            self.advance();
            let c = self.expr()?;
            self.expect_kw("then")?;
            let t = self.expr()?;
            self.expect_kw("else")?;
            let e = self.expr()?;
            return Ok(Expr::new(
                ExprKind::If(Box::new(c), Box::new(t), Box::new(e)),
                span,
            ));
        }
        self.or_expr()
    }

    fn or_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.and_expr()?;
        while self.is_kw("or") {
            let span = self.span();
            self.advance();
            let rhs = self.and_expr()?;
            lhs = Expr::new(ExprKind::Binary(BinOp::Or, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.not_expr()?;
        while self.is_kw("and") {
            let span = self.span();
            self.advance();
            let rhs = self.not_expr()?;
            lhs = Expr::new(ExprKind::Binary(BinOp::And, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> PResult<Expr> {
        if self.is_kw("not") {
            let span = self.span();
            self.advance();
            let e = self.not_expr()?;
            return Ok(Expr::new(ExprKind::Unary(UnOp::Not, Box::new(e)), span));
        }
        self.cmp_expr()
    }

    fn cmp_expr(&mut self) -> PResult<Expr> {
        let lhs = self.add_expr()?;
        let op = match self.peek() {
            Tok::Sym("=") => BinOp::Eq,
            Tok::Sym("<>") => BinOp::Ne,
            Tok::Sym("<") => BinOp::Lt,
            Tok::Sym("<=") => BinOp::Le,
            Tok::Sym(">") => BinOp::Gt,
            Tok::Sym(">=") => BinOp::Ge,
            _ => return Ok(lhs),
        };
        let span = self.span();
        self.advance();
        let rhs = self.add_expr()?;
        Ok(Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span))
    }

    fn add_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.mul_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("+") => BinOp::Add,
                Tok::Sym("-") if matches!(self.peek_at(1), Tok::Sym(">")) => {
                    return Err(FrontendError::new(self.span(), "`->` is not supported; use fby(x; 1; init)"));
                }
                Tok::Sym("-") => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let span = self.span();
            self.advance();
            let rhs = self.mul_expr()?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
    }

    fn mul_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("*") => BinOp::Mul,
                Tok::Sym("/") => BinOp::Div,
                Tok::Ident(s) if s == "mod" => BinOp::Mod,
                _ => return Ok(lhs),
            };
            let span = self.span();
            self.advance();
            let rhs = self.unary_expr()?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
    }

    fn unary_expr(&mut self) -> PResult<Expr> {
        if self.is_sym("-") {
            let span = self.span();
            self.advance();
            let e = self.unary_expr()?;
            return Ok(Expr::new(ExprKind::Unary(UnOp::Neg, Box::new(e)), span));
        }
        self.postfix_expr()
    }

    fn postfix_expr(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        loop {
            let span = self.span();
            if self.eat_sym(".") {
                let (f, _) = self.ident()?;
                e = Expr::new(ExprKind::Field(Box::new(e), f), span);
            } else if self.eat_sym("[") {
                let i = self.expr()?;
                self.expect_sym("]")?;
                e = Expr::new(ExprKind::Index(Box::new(e), Box::new(i)), span);
            } else {
                return Ok(e);
            }
        }
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        self.expect_sym("(")?;
        let mut out = Vec::new();
        if !self.is_sym(")") {
            out.push(self.expr()?);
            while self.eat_sym(",") {
                out.push(self.expr()?);
            }
        }
        self.expect_sym(")")?;
        Ok(out)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.advance();
                Ok(Expr::new(ExprKind::Int(v), span))
            }
            Tok::Sym("[") => {
                self.advance();
                let mut cells = vec![self.expr()?];
                while self.eat_sym(",") {
                    cells.push(self.expr()?);
                }
                self.expect_sym("]")?;
                Ok(Expr::new(ExprKind::Array(cells), span))
            }
            Tok::Sym("(") => self.paren(),
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.advance();
                Ok(Expr::new(ExprKind::Bool(s == "true"), span))
            }
            Tok::Ident(s) if s == "pre" && matches!(self.peek_at(1), Tok::Ident(_) | Tok::Sym("(")) => {
                Err(FrontendError::new(span, "`pre` is not supported; use fby(x; 1; init)"))
            }
            Tok::Ident(s) if s == "fby" => {
                self.advance();
                let id = self.fby_counter;
                self.fby_counter += 1;
                self.expect_sym("(")?;
                let input = self.expr()?;
                self.expect_sym(";")?;
                let depth = self.size_expr()?;
                self.expect_sym(";")?;
                let init = self.expr()?;
                self.expect_sym(")")?;
                Ok(Expr::new(
                    ExprKind::Fby(Box::new(Fby {
                        id,
                        input,
                        depth,
                        init,
                    })),
                    span,
                ))
            }
            Tok::Ident(_) => {
                let (n, _) = self.ident()?;
                Ok(Expr::new(ExprKind::Ident(n), span))
            }
            _ => Err(self.unexpected(&["expression"])),
        }
    }

    fn paren(&mut self) -> PResult<Expr> {
        let span = self.span();
        self.expect_sym("(")?;
        if self.eat_kw("case") {
            let scrut = self.expr()?;
            self.expect_kw("of")?;
            let mut arms = Vec::new();
            let mut default = None;
            while self.eat_sym("|") {
                if self.is_kw("_") {
                    self.advance();
                    self.expect_sym(":")?;
                    default = Some(Box::new(self.expr()?));
                    break;
                }
                let pat = self.pattern()?;
                self.expect_sym(":")?;
                arms.push((pat, self.expr()?));
            }
            self.expect_sym(")")?;
            return Ok(Expr::new(ExprKind::Case(Box::new(scrut), arms, default), span));
        }
        if self.eat_kw("make") {
            let (ty, _) = self.ident()?;
            self.expect_sym(")")?;
            let args = self.args()?;
            return Ok(Expr::new(ExprKind::Make(ty, args), span));
        }
        if let Tok::Ident(s) = self.peek() {
            if let Some(kind) = HofKind::from_keyword(s) {
                self.advance();
                return self.hof(kind, span);
            }
        }
        let e = self.expr()?;
        self.expect_sym(")")?;
        Ok(e)
    }

    fn hof(&mut self, kind: HofKind, span: Span) -> PResult<Expr> {
        let accs = match kind.family() {
            HofFamily::Map => 0,
            HofFamily::Fold => 1,
            HofFamily::MapFold => match *self.peek() {
                Tok::Int(_) => self.int()? as usize,
                _ => 1,
            },
        };
        let (op, _) = self.ident()?;
        self.expect_sym("<<")?;
        let size = self.size_expr()?;
        self.expect_sym(">>")?;
        let cond = if self.eat_kw("if") {
            Some(self.or_expr()?)
        } else {
            None
        };
        let defaults = if self.eat_kw("default") {
            self.args()?
        } else {
            Vec::new()
        };
        self.expect_sym(")")?;
        let args = self.args()?;
        Ok(Expr::new(
            ExprKind::Hof(Box::new(HofApp {
                kind,
                accs,
                op,
                size,
                cond,
                defaults,
                args,
                span,
            })),
            span,
        ))
    }

    fn pattern(&mut self) -> PResult<Pattern> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.advance();
                Ok(Pattern::Int(v))
            }
            Tok::Sym("-") => {
                self.advance();
                Ok(Pattern::Int(-self.int()?))
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.advance();
                Ok(Pattern::Bool(s == "true"))
            }
            Tok::Ident(_) => Ok(Pattern::Member(self.ident()?.0)),
            _ => Err(self.unexpected(&["pattern"])),
        }
    }
}

fn pragma(p: &mut Pragmas, text: &str, span: Span) -> PResult<()> {
    let (head, rest) = match text.split_once(char::is_whitespace) {
        Some((h, r)) => (h, r.trim()),
        None => (text, ""),
    };
    match head {
        "machine" if !rest.is_empty() && !rest.contains(char::is_whitespace) => {
            p.machine = Some(rest.to_string());
        }
        "state-var" => {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(FrontendError::new(
                    span,
                    "`--@state-var` expects an automaton name and a variable name",
                ));
            }
            p.state_vars
                .push((parts[0].to_string(), parts[1].to_string()));
        }
        "invariant" if !rest.is_empty() => p.invariants.push((rest.to_string(), span)),
        _ => {
            return Err(FrontendError::new(
                span,
                format!("unknown or malformed pragma `--@{text}`"),
            ))
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_node() {
        let p = parse_program("node n() returns ();").unwrap();
        assert_eq!(p.nodes.len(), 1);
        assert!(p.nodes[0].body.items.is_empty());
        assert!(p.nodes[0].inputs.is_empty() && p.nodes[0].outputs.is_empty());
    }

    #[test]
    fn precedence() {
        let p = parse_program("node n(a: int32) returns (b: bool) let b = a + 1 * 2 > 3 and not a = 0; tel")
            .unwrap();
        let BodyItem::Equation(eq) = &p.nodes[0].body.items[0] else {
            panic!()
        };
        let ExprKind::Binary(BinOp::And, l, r) = &eq.rhs.kind else {
            panic!("{:?}", eq.rhs)
        };
        assert!(matches!(l.kind, ExprKind::Binary(BinOp::Gt, _, _)));
        assert!(matches!(r.kind, ExprKind::Unary(UnOp::Not, _)));
    }

    #[test]
    fn hof_forms() {
        let src = "node n(a: int32^3) returns (i: int32; c: bool; s: int32; v: int32^3)
            let i, c, s, v = (mapfoldw 1 f <<3>> if true default (0))(0, a); tel";
        let p = parse_program(src).unwrap();
        let BodyItem::Equation(eq) = &p.nodes[0].body.items[0] else {
            panic!()
        };
        let ExprKind::Hof(h) = &eq.rhs.kind else { panic!() };
        assert_eq!(h.kind, HofKind::Mapfoldw);
        assert_eq!(h.accs, 1);
        assert_eq!(h.defaults.len(), 1);
        assert_eq!(h.args.len(), 2);
    }

    #[test]
    fn fby_ids_are_preorder() {
        let p = parse_program("node n(x: int32) returns (y: int32) let y = fby(fby(x; 1; 0); 2; 0); tel")
            .unwrap();
        let BodyItem::Equation(eq) = &p.nodes[0].body.items[0] else {
            panic!()
        };
        let ExprKind::Fby(outer) = &eq.rhs.kind else { panic!() };
        let ExprKind::Fby(inner) = &outer.input.kind else { panic!() };
        assert_eq!((outer.id, inner.id), (0, 1));
    }

    #[test]
    fn syntax_error_reports_position_and_expectation() {
        let err = parse_program("node n() returns ()\nlet x = ; tel").unwrap_err();
        assert_eq!((err.span.line, err.span.col), (2, 9));
        assert!(err.message.contains("expected expression"), "{}", err.message);
    }

    #[test]
    fn pragmas_are_collected() {
        let p = parse_program("--@machine M\n--@state-var A a_var\n--@invariant x = 1\n").unwrap();
        assert_eq!(p.pragmas.machine.as_deref(), Some("M"));
        assert_eq!(p.pragmas.state_vars, vec![("A".into(), "a_var".into())]);
        assert_eq!(p.pragmas.invariants[0].0, "x = 1");
    }

    #[test]
    fn pre_and_arrow_are_rejected_by_name() {
        let err = parse_program("node n(x: int32) returns (y: int32) let y = pre x; tel").unwrap_err();
        assert!(err.message.contains("`pre` is not supported"), "{}", err.message);
        let err = parse_program("node n(x: int32) returns (y: int32) let y = 0 -> x; tel").unwrap_err();
        assert!(err.message.contains("`->` is not supported"), "{}", err.message);
        assert!(parse_program("node n(pre: int32) returns (y: int32) let y = pre + 1; tel").is_ok());
    }
}
