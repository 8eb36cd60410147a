//! Recursive-descent parser. Errors are collected rather than returned on
//! the first one: a failed statement skips to the next `;` or closing brace,
//! a failed declaration to the next declaration keyword.

use std::collections::HashMap;

use super::ast::*;
use super::lexer::{lex, type_name, Tok};
use super::Diagnostic;

/// `in` and `out` are only special in port lists and loop headers.
pub const KEYWORDS: &[&str] = &[
    "param",
    "const",
    "bus",
    "proc",
    "network",
    "clocked",
    "unclocked",
    "sim",
    "var",
    "func",
    "if",
    "elif",
    "else",
    "for",
    "as",
    "assert",
    "true",
    "false",
];

const DECL_START: &[&str] = &["param", "const", "bus", "proc", "network"];

/// Binding power of binary operators; higher binds tighter.
pub fn precedence(op: BinaryOp) -> u8 {
    use BinaryOp::*;
    match op {
        Or => 1,
        And => 2,
        Eq | Ne | Lt | Le | Gt | Ge => 3,
        BitOr => 4,
        BitXor => 5,
        BitAnd => 6,
        Shl | Shr => 7,
        Add | Sub => 8,
        Mul | Div | Rem => 9,
    }
}

/// Level of `as`; unary operators bind tighter still.
pub const CAST_PREC: u8 = 10;

fn binary_op(sym: &str) -> Option<BinaryOp> {
    use BinaryOp::*;
    Some(match sym {
        "||" => Or,
        "&&" => And,
        "==" => Eq,
        "!=" => Ne,
        "<" => Lt,
        "<=" => Le,
        ">" => Gt,
        ">=" => Ge,
        "|" => BitOr,
        "^" => BitXor,
        "&" => BitAnd,
        "<<" => Shl,
        ">>" => Shr,
        "+" => Add,
        "-" => Sub,
        "*" => Mul,
        "/" => Div,
        "%" => Rem,
        _ => return None,
    })
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
    diags: Vec<Diagnostic>,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn tok(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].1
    }

    fn advance(&mut self) {
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
    }

    fn describe(&self) -> String {
        match self.tok() {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int { .. } => "a number".into(),
            Tok::Str(_) => "a string".into(),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn unexpected<T>(&self, wanted: &str) -> PResult<T> {
        Err(Diagnostic::error(
            self.pos(),
            format!("expected {wanted}, found {}", self.describe()),
        ))
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.tok(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.tok(), Tok::Ident(x) if x == k)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        let hit = self.is_sym(s);
        if hit {
            self.advance();
        }
        hit
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        let hit = self.is_kw(k);
        if hit {
            self.advance();
        }
        hit
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.unexpected(&format!("`{s}`"))
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<()> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            self.unexpected(&format!("`{k}`"))
        }
    }

    fn ident(&mut self) -> PResult<Ident> {
        let pos = self.pos();
        match self.tok() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) && type_name(s).is_none() => {
                let name = s.clone();
                self.advance();
                Ok(Ident { name, pos })
            }
            _ => self.unexpected("an identifier"),
        }
    }

    // ---- recovery ----

    /// Skips past the next `;` at the current nesting level, or up to (not
    /// past) a `}` closing the current block.
    fn sync_stmt(&mut self) {
        let mut depth = 0i32;
        loop {
            match self.tok() {
                Tok::Eof => return,
                Tok::Sym("{") => depth += 1,
                Tok::Sym("}") => {
                    if depth == 0 {
                        return;
                    }
                    depth -= 1;
                    if depth == 0 {
                        self.advance();
                        return;
                    }
                }
                Tok::Sym(";") if depth == 0 => {
                    self.advance();
                    return;
                }
                _ => {}
            }
            self.advance();
        }
    }

    /// Skips to the next token that starts a declaration outside any braces
    /// opened after the error.
    fn sync_decl(&mut self) {
        let start = self.i;
        let mut depth = 0i32;
        loop {
            match self.tok() {
                Tok::Eof => return,
                Tok::Ident(k)
                    if depth <= 0 && self.i > start && DECL_START.contains(&k.as_str()) =>
                {
                    return
                }
                Tok::Sym("{") => depth += 1,
                Tok::Sym("}") => depth -= 1,
                _ => {}
            }
            self.advance();
        }
    }

    // ---- declarations ----

    fn unit(&mut self) -> SourceUnit {
        let mut decls = Vec::new();
        while *self.tok() != Tok::Eof {
            match self.decl() {
                Ok(d) => decls.push(d),
                Err(d) => {
                    self.diags.push(d);
                    self.sync_decl();
                }
            }
        }
        SourceUnit { decls }
    }

    fn decl(&mut self) -> PResult<Decl> {
        let pos = self.pos();
        let kind = if self.eat_kw("param") || self.is_kw("const") {
            let is_param = !self.eat_kw("const");
            let name = self.ident()?;
            self.expect_sym("=")?;
            let value = self.expr()?;
            self.expect_sym(";")?;
            if is_param {
                DeclKind::Param { name, value }
            } else {
                DeclKind::Const { name, value }
            }
        } else if self.eat_kw("bus") {
            DeclKind::Bus(self.bus_decl()?)
        } else if self.eat_kw("proc") {
            self.proc_decl()?
        } else if self.eat_kw("network") {
            let name = self.ident()?;
            self.expect_sym("{")?;
            let items = self.net_items()?;
            DeclKind::Network(NetworkDecl { name, items })
        } else {
            return self.unexpected("a declaration (`param`, `const`, `bus`, `proc` or `network`)");
        };
        Ok(Decl { kind, pos })
    }

    fn bus_decl(&mut self) -> PResult<BusDecl> {
        let name = self.ident()?;
        let clocked = if self.eat_kw("clocked") {
            true
        } else if self.eat_kw("unclocked") {
            false
        } else {
            return self.unexpected("`clocked` or `unclocked`");
        };
        self.expect_sym("{")?;
        let mut fields = Vec::new();
        while !self.eat_sym("}") {
            let r = (|| {
                let name = self.ident()?;
                self.expect_sym(":")?;
                let ty = self.type_expr()?;
                let init = if self.eat_sym("=") {
                    Some(self.expr()?)
                } else {
                    None
                };
                self.expect_sym(";")?;
                Ok(FieldDecl { name, ty, init })
            })();
            match r {
                Ok(f) => fields.push(f),
                Err(d) => self.recover(d)?,
            }
        }
        Ok(BusDecl {
            name,
            clocked,
            fields,
        })
    }

    /// Records `d` and resynchronises inside a block; gives up at the end
    /// of input.
    fn recover(&mut self, d: Diagnostic) -> PResult<()> {
        self.diags.push(d);
        self.sync_stmt();
        if *self.tok() == Tok::Eof {
            return self.unexpected("`}`");
        }
        Ok(())
    }

    fn proc_decl(&mut self) -> PResult<DeclKind> {
        let name = self.ident()?;
        if self.eat_sym("=") {
            let cpos = self.pos();
            let kind = match self.tok() {
                Tok::Ident(k) if k == "bram" => {
                    self.advance();
                    self.expect_sym("(")?;
                    let depth = self.expr()?;
                    self.expect_sym(",")?;
                    let width = self.expr()?;
                    self.expect_sym(",")?;
                    let dual = match self.tok() {
                        Tok::Ident(k) if k == "single" => false,
                        Tok::Ident(k) if k == "dual" => true,
                        _ => return self.unexpected("`single` or `dual`"),
                    };
                    self.advance();
                    self.expect_sym(")")?;
                    ComponentKind::Bram { depth, width, dual }
                }
                Tok::Ident(k) if k == "register" => {
                    self.advance();
                    self.expect_sym("(")?;
                    let shape = self.ident()?;
                    self.expect_sym(")")?;
                    ComponentKind::Register { shape }
                }
                _ => {
                    return Err(Diagnostic::error(
                        cpos,
                        format!(
                            "expected a component (`bram` or `register`), found {}",
                            self.describe()
                        ),
                    ))
                }
            };
            self.expect_sym(";")?;
            return Ok(DeclKind::Component(ComponentDecl { name, kind }));
        }
        let mode = if self.eat_kw("clocked") {
            ProcMode::Clocked
        } else if self.eat_kw("unclocked") {
            ProcMode::Unclocked
        } else if self.eat_kw("sim") {
            ProcMode::Sim
        } else {
            return self.unexpected("`clocked`, `unclocked` or `sim`");
        };
        self.expect_sym("(")?;
        let mut ports = Vec::new();
        if !self.eat_sym(")") {
            loop {
                let dir = if self.eat_kw("in") {
                    Direction::In
                } else if self.eat_kw("out") {
                    Direction::Out
                } else {
                    return self.unexpected("`in` or `out`");
                };
                let name = self.ident()?;
                self.expect_sym(":")?;
                let shape = self.ident()?;
                ports.push(PortDecl { dir, name, shape });
                if self.eat_sym(")") {
                    break;
                }
                self.expect_sym(",")?;
            }
        }
        let body = if self.eat_sym(";") {
            None
        } else {
            self.expect_sym("{")?;
            Some(self.proc_items()?)
        };
        Ok(DeclKind::Proc(ProcDecl {
            name,
            mode,
            ports,
            body,
        }))
    }

    fn proc_items(&mut self) -> PResult<Vec<ProcItem>> {
        let mut items = Vec::new();
        while !self.eat_sym("}") {
            let r = if self.eat_kw("var") {
                (|| {
                    let name = self.ident()?;
                    self.expect_sym(":")?;
                    let ty = self.type_expr()?;
                    let len = if self.eat_sym("[") {
                        let e = self.expr()?;
                        self.expect_sym("]")?;
                        Some(e)
                    } else {
                        None
                    };
                    let init = if self.eat_sym("=") {
                        Some(self.expr()?)
                    } else {
                        None
                    };
                    self.expect_sym(";")?;
                    Ok(ProcItem::Var(VarDecl {
                        name,
                        ty,
                        len,
                        init,
                    }))
                })()
            } else if self.eat_kw("func") {
                (|| {
                    let name = self.ident()?;
                    self.expect_sym("{")?;
                    let body = self.block_rest()?;
                    Ok(ProcItem::Func(FuncDecl { name, body }))
                })()
            } else {
                self.stmt().map(ProcItem::Stmt)
            };
            match r {
                Ok(item) => items.push(item),
                Err(d) => self.recover(d)?,
            }
        }
        Ok(items)
    }

    fn net_items(&mut self) -> PResult<Vec<NetItem>> {
        let mut items = Vec::new();
        while !self.eat_sym("}") {
            match self.net_item() {
                Ok(item) => items.push(item),
                Err(d) => self.recover(d)?,
            }
        }
        Ok(items)
    }

    fn net_item(&mut self) -> PResult<NetItem> {
        let pos = self.pos();
        let kind = if self.eat_kw("bus") {
            let name = self.ident()?;
            let len = if self.eat_sym("[") {
                let e = self.expr()?;
                self.expect_sym("]")?;
                Some(e)
            } else {
                None
            };
            self.expect_sym(":")?;
            let shape = self.ident()?;
            self.expect_sym(";")?;
            NetItemKind::Bus { name, len, shape }
        } else if self.eat_kw("for") {
            let (var, start, end) = self.for_header()?;
            self.expect_sym("{")?;
            let items = self.net_items()?;
            NetItemKind::For {
                var,
                start,
                end,
                items,
            }
        } else {
            let first = self.ident()?;
            let (name, proc) = if self.is_sym("(") {
                (None, first)
            } else {
                let index = if self.eat_sym("[") {
                    let e = self.expr()?;
                    self.expect_sym("]")?;
                    Some(e)
                } else {
                    None
                };
                self.expect_sym("=")?;
                (Some((first, index)), self.ident()?)
            };
            self.expect_sym("(")?;
            let mut bindings = Vec::new();
            if !self.eat_sym(")") {
                loop {
                    let port = self.ident()?;
                    self.expect_sym("=")?;
                    let bname = self.ident()?;
                    let index = if self.eat_sym("[") {
                        let e = self.expr()?;
                        self.expect_sym("]")?;
                        Some(e)
                    } else {
                        None
                    };
                    bindings.push(Binding {
                        port,
                        bus: BusRef { name: bname, index },
                    });
                    if self.eat_sym(")") {
                        break;
                    }
                    self.expect_sym(",")?;
                }
            }
            self.expect_sym(";")?;
            NetItemKind::Inst {
                name,
                proc,
                bindings,
            }
        };
        Ok(NetItem { kind, pos })
    }

    fn for_header(&mut self) -> PResult<(Ident, Expr, Expr)> {
        let var = self.ident()?;
        self.expect_kw("in")?;
        let start = self.expr()?;
        self.expect_sym("..")?;
        let end = self.expr()?;
        Ok((var, start, end))
    }

    fn type_expr(&mut self) -> PResult<TypeExpr> {
        let pos = self.pos();
        let kind = match self.tok().clone() {
            Tok::Ident(s) if s == "bool" => {
                self.advance();
                TypeKind::Bool
            }
            Tok::Ident(s) if s == "u" || s == "i" => {
                self.advance();
                self.expect_sym("(")?;
                let width = self.expr()?;
                self.expect_sym(")")?;
                TypeKind::Sized {
                    signed: s == "i",
                    width: Box::new(width),
                }
            }
            Tok::Ident(s) => match type_name(&s) {
                Some((signed, width)) => {
                    self.advance();
                    TypeKind::Fixed { signed, width }
                }
                None => return self.unexpected("a type"),
            },
            _ => return self.unexpected("a type"),
        };
        Ok(TypeExpr { kind, pos })
    }

    // ---- statements ----

    /// Statements up to and including the closing `}`.
    fn block_rest(&mut self) -> PResult<Vec<Stmt>> {
        let mut out = Vec::new();
        while !self.eat_sym("}") {
            match self.stmt() {
                Ok(s) => out.push(s),
                Err(d) => self.recover(d)?,
            }
        }
        Ok(out)
    }

    fn block(&mut self) -> PResult<Vec<Stmt>> {
        self.expect_sym("{")?;
        self.block_rest()
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let pos = self.pos();
        let kind = if self.eat_kw("if") {
            let mut arms = vec![(self.expr()?, self.block()?)];
            let mut otherwise = None;
            loop {
                if self.eat_kw("elif") {
                    arms.push((self.expr()?, self.block()?));
                } else if self.eat_kw("else") {
                    otherwise = Some(self.block()?);
                    break;
                } else {
                    break;
                }
            }
            StmtKind::If { arms, otherwise }
        } else if self.eat_kw("for") {
            let (var, start, end) = self.for_header()?;
            let body = self.block()?;
            StmtKind::For {
                var,
                start,
                end,
                body,
            }
        } else if self.eat_kw("assert") {
            let cond = self.expr()?;
            self.expect_sym(",")?;
            let message = match self.tok() {
                Tok::Str(s) => s.clone(),
                _ => return self.unexpected("a message string"),
            };
            self.advance();
            self.expect_sym(";")?;
            StmtKind::Assert { cond, message }
        } else {
            let name = self.ident()?;
            if self.eat_sym("(") {
                self.expect_sym(")")?;
                self.expect_sym(";")?;
                StmtKind::Call(name)
            } else {
                let target = if self.eat_sym(".") {
                    Target::Field(name.name, self.ident()?.name)
                } else if self.eat_sym("[") {
                    let e = self.expr()?;
                    self.expect_sym("]")?;
                    Target::Elem(name.name, e)
                } else {
                    Target::Var(name.name)
                };
                self.expect_sym(":=")?;
                let value = self.expr()?;
                self.expect_sym(";")?;
                StmtKind::Assign { target, value }
            }
        };
        Ok(Stmt { kind, pos })
    }

    // ---- expressions ----

    pub fn expr(&mut self) -> PResult<Expr> {
        self.binary(1)
    }

    fn binary(&mut self, min: u8) -> PResult<Expr> {
        let mut lhs = self.cast()?;
        loop {
            let op = match self.tok() {
                Tok::Sym(s) => binary_op(s),
                _ => None,
            };
            let Some(op) = op else { break };
            let prec = precedence(op);
            if prec < min {
                break;
            }
            let pos = self.pos();
            self.advance();
            let rhs = self.binary(prec + 1)?;
            lhs = Expr {
                kind: ExprKind::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
                pos,
            };
        }
        Ok(lhs)
    }

    fn cast(&mut self) -> PResult<Expr> {
        let mut e = self.unary()?;
        while self.is_kw("as") {
            let pos = self.pos();
            self.advance();
            let ty = self.type_expr()?;
            e = Expr {
                kind: ExprKind::Cast {
                    expr: Box::new(e),
                    ty,
                },
                pos,
            };
        }
        Ok(e)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        let op = if self.eat_sym("!") {
            Some(UnaryOp::Not)
        } else if self.eat_sym("-") {
            Some(UnaryOp::Neg)
        } else {
            None
        };
        if let Some(op) = op {
            let operand = self.unary()?;
            return Ok(Expr {
                kind: ExprKind::Unary {
                    op,
                    operand: Box::new(operand),
                },
                pos,
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        let kind = match self.tok().clone() {
            Tok::Int { value, suffix } => {
                self.advance();
                ExprKind::Int { value, suffix }
            }
            Tok::Ident(k) if k == "true" || k == "false" => {
                self.advance();
                ExprKind::Bool(k == "true")
            }
            Tok::Sym("(") => {
                self.advance();
                let e = self.expr()?;
                self.expect_sym(")")?;
                return Ok(e);
            }
            Tok::Ident(_) => {
                let name = self.ident()?.name;
                if self.eat_sym(".") {
                    ExprKind::Field {
                        port: name,
                        field: self.ident()?.name,
                    }
                } else if self.eat_sym("[") {
                    let index = self.expr()?;
                    self.expect_sym("]")?;
                    ExprKind::Index {
                        name,
                        index: Box::new(index),
                    }
                } else if self.eat_sym("(") {
                    let mut args = Vec::new();
                    if !self.eat_sym(")") {
                        loop {
                            args.push(self.expr()?);
                            if self.eat_sym(")") {
                                break;
                            }
                            self.expect_sym(",")?;
                        }
                    }
                    ExprKind::Call { func: name, args }
                } else {
                    ExprKind::Name(name)
                }
            }
            _ => return self.unexpected("an expression"),
        };
        Ok(Expr { kind, pos })
    }
}

/// Parses a source unit. Fails with every lexical, syntax and duplicate
/// declaration error found.
pub fn parse(src: &str) -> Result<SourceUnit, Vec<Diagnostic>> {
    let (toks, mut diags) = lex(src);
    let mut p = Parser {
        toks,
        i: 0,
        diags: Vec::new(),
    };
    let unit = p.unit();
    diags.append(&mut p.diags);
    check_declarations(&unit, &p.toks.last().unwrap().1, &mut diags);
    if diags.is_empty() {
        Ok(unit)
    } else {
        diags.sort_by_key(|d| (d.line, d.column));
        Err(diags)
    }
}

fn dup(seen: &mut HashMap<String, Pos>, id: &Ident, what: &str, diags: &mut Vec<Diagnostic>) {
    if let Some(first) = seen.get(&id.name) {
        diags.push(Diagnostic::error(
            id.pos,
            format!("duplicate {what} `{}` (first declared at {first})", id.name),
        ));
    } else {
        seen.insert(id.name.clone(), id.pos);
    }
}

fn check_declarations(unit: &SourceUnit, eof: &Pos, diags: &mut Vec<Diagnostic>) {
    let mut values = HashMap::new();
    let mut shapes = HashMap::new();
    let mut procs = HashMap::new();
    let mut networks = 0;
    for d in &unit.decls {
        match &d.kind {
            DeclKind::Param { name, .. } | DeclKind::Const { name, .. } => {
                dup(&mut values, name, "constant", diags)
            }
            DeclKind::Bus(b) => {
                dup(&mut shapes, &b.name, "bus shape", diags);
                let mut fields = HashMap::new();
                for f in &b.fields {
                    dup(&mut fields, &f.name, "field", diags);
                }
            }
            DeclKind::Proc(p) => {
                dup(&mut procs, &p.name, "process", diags);
                let mut ports = HashMap::new();
                for port in &p.ports {
                    dup(&mut ports, &port.name, "port", diags);
                }
                let mut vars = HashMap::new();
                let mut funcs = HashMap::new();
                for item in p.body.iter().flatten() {
                    match item {
                        ProcItem::Var(v) => dup(&mut vars, &v.name, "variable", diags),
                        ProcItem::Func(f) => dup(&mut funcs, &f.name, "function", diags),
                        ProcItem::Stmt(_) => {}
                    }
                }
            }
            DeclKind::Component(c) => dup(&mut procs, &c.name, "process", diags),
            DeclKind::Network(n) => {
                networks += 1;
                if networks > 1 {
                    diags.push(Diagnostic::error(
                        n.name.pos,
                        "only one network may be declared",
                    ));
                }
            }
        }
    }
    if networks == 0 {
        diags.push(Diagnostic::error(*eof, "no network declared"));
    }
}
