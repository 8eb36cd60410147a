//! A parser for the CSP_M subset the generator emits, with name resolution
//! and a small evaluator for deterministic processes.
//!
//! Declarations start in column 0; indented lines continue the previous one.

use std::collections::{HashMap, HashSet};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    pub pos: Pos,
    pub message: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.pos, self.message)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(i64),
    Ident(String),
    Sym(&'static str),
}

const SYMBOLS: &[&str] = &[
    "[FD=", "[T=", "[F=", "|~|", "[|", "|]", "{|", "|}", "->", "[]", "|||", "==", "!=", "<=", ">=",
    "..", "=", "(", ")", "{", "}", ",", ":", "!", "?", ".", "@", ";", "\\", "<", ">", "+", "-",
    "*", "/", "%",
];

const KEYWORDS: &[&str] = &[
    "channel", "nametype", "assert", "if", "then", "else", "let", "within", "and", "or", "not",
    "true", "false",
];

const BUILTINS: &[&str] = &[
    "SKIP", "STOP", "Events", "diff", "union", "inter", "card", "member", "empty",
];

fn lex(src: &str) -> Result<Vec<(Tok, Pos, bool)>, SyntaxError> {
    // The flag marks tokens that start a declaration (column 1).
    let mut out = Vec::new();
    for (ln, line) in src.lines().enumerate() {
        let b = line.as_bytes();
        let mut i = 0;
        while i < b.len() {
            let pos = Pos {
                line: ln + 1,
                col: i + 1,
            };
            let c = b[i];
            if c == b' ' || c == b'\t' || c == b'\r' {
                i += 1;
                continue;
            }
            if line[i..].starts_with("--") {
                break;
            }
            let first = i == 0;
            if c.is_ascii_digit() {
                let s = i;
                while i < b.len() && b[i].is_ascii_digit() {
                    i += 1;
                }
                let v = line[s..i].parse().map_err(|_| SyntaxError {
                    pos,
                    message: "integer too large".into(),
                })?;
                out.push((Tok::Int(v), pos, first));
                continue;
            }
            if c.is_ascii_alphabetic() {
                let s = i;
                while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_' || b[i] == b'\'')
                {
                    i += 1;
                }
                out.push((Tok::Ident(line[s..i].to_string()), pos, first));
                continue;
            }
            match SYMBOLS.iter().find(|s| line[i..].starts_with(**s)) {
                Some(s) => {
                    out.push((Tok::Sym(s), pos, first));
                    i += s.len();
                }
                None => {
                    return Err(SyntaxError {
                        pos,
                        message: format!("unexpected character `{}`", c as char),
                    })
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Name(String, Pos),
    Call(String, Pos, Vec<Expr>),
    Not(Box<Expr>),
    Neg(Box<Expr>),
    Binary(&'static str, Box<Expr>, Box<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    /// `op var : set @ body`
    Replicated(&'static str, String, Box<Expr>, Box<Expr>),
    Prefix(Event, Box<Expr>),
    Parallel(Box<Expr>, Box<Expr>, Box<Expr>),
    Hide(Box<Expr>, Box<Expr>),
    Range(Box<Expr>, Box<Expr>),
    Set(Vec<Expr>),
    Channels(Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventPart {
    Out(Expr),
    In(String, Option<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub channel: String,
    pub pos: Pos,
    pub parts: Vec<EventPart>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decl {
    Channel {
        names: Vec<String>,
        ty: Option<Expr>,
    },
    Nametype {
        name: String,
        ty: Expr,
    },
    Def {
        name: String,
        params: Vec<String>,
        body: Expr,
    },
    Assert {
        spec: Expr,
        model: &'static str,
        imp: Expr,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Module {
    pub decls: Vec<(Decl, Pos)>,
}

struct Parser {
    toks: Vec<(Tok, Pos, bool)>,
    i: usize,
    /// Index of the first token of the next declaration.
    end: usize,
}

type PResult<T> = Result<T, SyntaxError>;

impl Parser {
    fn pos(&self) -> Pos {
        self.toks
            .get(self.i.min(self.end.saturating_sub(1)))
            .map_or(Pos { line: 0, col: 0 }, |t| t.1)
    }

    fn peek(&self) -> Option<&Tok> {
        if self.i < self.end {
            Some(&self.toks[self.i].0)
        } else {
            None
        }
    }

    fn err<T>(&self, message: impl Into<String>) -> PResult<T> {
        Err(SyntaxError {
            pos: self.pos(),
            message: message.into(),
        })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(x)) if *x == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(x)) if x == k)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`"))
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<()> {
        if self.is_kw(k) {
            self.i += 1;
            Ok(())
        } else {
            self.err(format!("expected `{k}`"))
        }
    }

    fn ident(&mut self) -> PResult<(String, Pos)> {
        let pos = self.pos();
        match self.peek() {
            Some(Tok::Ident(s)) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.i += 1;
                Ok((s, pos))
            }
            _ => self.err("expected an identifier"),
        }
    }

    fn decl(&mut self) -> PResult<Decl> {
        if self.is_kw("channel") {
            self.i += 1;
            let mut names = vec![self.ident()?.0];
            while self.eat_sym(",") {
                names.push(self.ident()?.0);
            }
            let ty = if self.eat_sym(":") {
                Some(self.expr()?)
            } else {
                None
            };
            return Ok(Decl::Channel { names, ty });
        }
        if self.is_kw("nametype") {
            self.i += 1;
            let name = self.ident()?.0;
            self.expect_sym("=")?;
            return Ok(Decl::Nametype {
                name,
                ty: self.expr()?,
            });
        }
        if self.is_kw("assert") {
            self.i += 1;
            let spec = self.expr()?;
            let model = match self.peek() {
                Some(Tok::Sym(s @ ("[T=" | "[F=" | "[FD="))) => *s,
                _ => return self.err("expected a refinement operator"),
            };
            self.i += 1;
            let imp = self.expr()?;
            return Ok(Decl::Assert { spec, model, imp });
        }
        let name = self.ident()?.0;
        let mut params = Vec::new();
        if self.eat_sym("(") {
            if !self.is_sym(")") {
                params.push(self.ident()?.0);
                while self.eat_sym(",") {
                    params.push(self.ident()?.0);
                }
            }
            self.expect_sym(")")?;
        }
        self.expect_sym("=")?;
        Ok(Decl::Def {
            name,
            params,
            body: self.expr()?,
        })
    }

    fn expr(&mut self) -> PResult<Expr> {
        if self.is_kw("if") {
            self.i += 1;
            let c = self.expr()?;
            self.expect_kw("then")?;
            let t = self.expr()?;
            self.expect_kw("else")?;
            let e = self.expr()?;
            return Ok(Expr::If(Box::new(c), Box::new(t), Box::new(e)));
        }
        for op in ["|~|", "[]", "|||"] {
            if self.is_sym(op) {
                let op = if op == "|~|" {
                    "|~|"
                } else if op == "[]" {
                    "[]"
                } else {
                    "|||"
                };
                self.i += 1;
                let var = self.ident()?.0;
                self.expect_sym(":")?;
                let set = self.or()?;
                self.expect_sym("@")?;
                let body = self.expr()?;
                return Ok(Expr::Replicated(op, var, Box::new(set), Box::new(body)));
            }
        }
        self.hide()
    }

    fn hide(&mut self) -> PResult<Expr> {
        let mut e = self.par()?;
        while self.eat_sym("\\") {
            let r = self.par()?;
            e = Expr::Hide(Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn par(&mut self) -> PResult<Expr> {
        let mut e = self.choice()?;
        loop {
            if self.eat_sym("[|") {
                let sync = self.expr()?;
                self.expect_sym("|]")?;
                let r = self.choice()?;
                e = Expr::Parallel(Box::new(e), Box::new(sync), Box::new(r));
            } else if self.eat_sym("|||") {
                let r = self.choice()?;
                e = Expr::Binary("|||", Box::new(e), Box::new(r));
            } else {
                return Ok(e);
            }
        }
    }

    fn choice(&mut self) -> PResult<Expr> {
        let mut e = self.seq()?;
        loop {
            let op = if self.eat_sym("[]") {
                "[]"
            } else if self.eat_sym("|~|") {
                "|~|"
            } else {
                return Ok(e);
            };
            let r = self.seq_or_nested()?;
            e = Expr::Binary(op, Box::new(e), Box::new(r));
        }
    }

    fn seq_or_nested(&mut self) -> PResult<Expr> {
        if self.is_kw("if") || self.is_sym("|~|") || self.is_sym("[]") {
            self.expr()
        } else {
            self.seq()
        }
    }

    fn seq(&mut self) -> PResult<Expr> {
        let mut e = self.prefix()?;
        while self.eat_sym(";") {
            let r = if self.is_kw("if") {
                self.expr()?
            } else {
                self.prefix()?
            };
            e = Expr::Binary(";", Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn prefix(&mut self) -> PResult<Expr> {
        let start = self.i;
        if let Some(Tok::Ident(_)) = self.peek() {
            if let Ok((channel, pos)) = self.ident() {
                let mut parts = Vec::new();
                loop {
                    if self.eat_sym("!") || self.eat_sym(".") {
                        parts.push(EventPart::Out(self.atom()?));
                    } else if self.eat_sym("?") {
                        let v = self.ident()?.0;
                        let set = if self.eat_sym(":") {
                            Some(self.atom()?)
                        } else {
                            None
                        };
                        parts.push(EventPart::In(v, set));
                    } else {
                        break;
                    }
                }
                if self.eat_sym("->") {
                    let then = if self.is_kw("if") {
                        self.expr()?
                    } else {
                        self.prefix()?
                    };
                    return Ok(Expr::Prefix(
                        Event {
                            channel,
                            pos,
                            parts,
                        },
                        Box::new(then),
                    ));
                }
                if !parts.is_empty() {
                    return self.err("expected `->` after event");
                }
            }
            self.i = start;
        }
        self.or()
    }

    fn or(&mut self) -> PResult<Expr> {
        let mut e = self.and()?;
        while self.is_kw("or") {
            self.i += 1;
            e = Expr::Binary("or", Box::new(e), Box::new(self.and()?));
        }
        Ok(e)
    }

    fn and(&mut self) -> PResult<Expr> {
        let mut e = self.not()?;
        while self.is_kw("and") {
            self.i += 1;
            e = Expr::Binary("and", Box::new(e), Box::new(self.not()?));
        }
        Ok(e)
    }

    fn not(&mut self) -> PResult<Expr> {
        if self.is_kw("not") {
            self.i += 1;
            return Ok(Expr::Not(Box::new(self.not()?)));
        }
        self.cmp()
    }

    fn cmp(&mut self) -> PResult<Expr> {
        let e = self.sum()?;
        for op in ["==", "!=", "<=", ">=", "<", ">"] {
            if self.is_sym(op) {
                let op = *SYMBOLS.iter().find(|s| **s == op).unwrap();
                self.i += 1;
                return Ok(Expr::Binary(op, Box::new(e), Box::new(self.sum()?)));
            }
        }
        Ok(e)
    }

    fn sum(&mut self) -> PResult<Expr> {
        let mut e = self.product()?;
        loop {
            let op = if self.eat_sym("+") {
                "+"
            } else if self.eat_sym("-") {
                "-"
            } else {
                return Ok(e);
            };
            e = Expr::Binary(op, Box::new(e), Box::new(self.product()?));
        }
    }

    fn product(&mut self) -> PResult<Expr> {
        let mut e = self.unary()?;
        loop {
            let op = if self.eat_sym("*") {
                "*"
            } else if self.eat_sym("/") {
                "/"
            } else if self.eat_sym("%") {
                "%"
            } else {
                return Ok(e);
            };
            e = Expr::Binary(op, Box::new(e), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat_sym("-") {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::Int(v)) => {
                self.i += 1;
                Ok(Expr::Int(v))
            }
            Some(Tok::Ident(s)) if s == "true" || s == "false" => {
                self.i += 1;
                Ok(Expr::Bool(s == "true"))
            }
            Some(Tok::Ident(_)) => {
                let (name, pos) = self.ident()?;
                if self.eat_sym("(") {
                    let mut args = Vec::new();
                    if !self.is_sym(")") {
                        args.push(self.expr()?);
                        while self.eat_sym(",") {
                            args.push(self.expr()?);
                        }
                    }
                    self.expect_sym(")")?;
                    return Ok(Expr::Call(name, pos, args));
                }
                Ok(Expr::Name(name, pos))
            }
            Some(Tok::Sym("(")) => {
                self.i += 1;
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Some(Tok::Sym("{|")) => {
                self.i += 1;
                let mut items = vec![self.expr()?];
                while self.eat_sym(",") {
                    items.push(self.expr()?);
                }
                self.expect_sym("|}")?;
                Ok(Expr::Channels(items))
            }
            Some(Tok::Sym("{")) => {
                self.i += 1;
                if self.eat_sym("}") {
                    return Ok(Expr::Set(Vec::new()));
                }
                let first = self.sum()?;
                if self.eat_sym("..") {
                    let hi = self.sum()?;
                    self.expect_sym("}")?;
                    return Ok(Expr::Range(Box::new(first), Box::new(hi)));
                }
                let mut items = vec![first];
                while self.eat_sym(",") {
                    items.push(self.sum()?);
                }
                self.expect_sym("}")?;
                Ok(Expr::Set(items))
            }
            _ => Err(SyntaxError {
                pos,
                message: "expected an expression".into(),
            }),
        }
    }
}

/// Parses `src` and resolves every name. Returns all errors found, one per
/// declaration at most.
pub fn parse(src: &str) -> Result<Module, Vec<SyntaxError>> {
    let toks = lex(src).map_err(|e| vec![e])?;
    let starts: Vec<usize> = toks
        .iter()
        .enumerate()
        .filter(|(_, t)| t.2)
        .map(|(i, _)| i)
        .collect();
    if let Some(t) = toks.first() {
        if !t.2 {
            return Err(vec![SyntaxError {
                pos: t.1,
                message: "declaration must start in column 1".into(),
            }]);
        }
    }
    let mut errors = Vec::new();
    let mut decls = Vec::new();
    for (k, &s) in starts.iter().enumerate() {
        let end = starts.get(k + 1).copied().unwrap_or(toks.len());
        let mut p = Parser {
            toks: toks.clone(),
            i: s,
            end,
        };
        match p.decl() {
            Ok(d) if p.i == end => decls.push((d, toks[s].1)),
            Ok(_) => errors.push(SyntaxError {
                pos: p.pos(),
                message: "unexpected trailing tokens".into(),
            }),
            Err(e) => errors.push(e),
        }
    }
    let module = Module { decls };
    errors.extend(resolve(&module));
    if errors.is_empty() {
        Ok(module)
    } else {
        Err(errors)
    }
}

fn resolve(m: &Module) -> Vec<SyntaxError> {
    let mut globals: HashSet<&str> = BUILTINS.iter().copied().collect();
    let mut channels = HashSet::new();
    let mut errors = Vec::new();
    for (d, pos) in &m.decls {
        let names: Vec<&str> = match d {
            Decl::Channel { names, .. } => {
                channels.extend(names.iter().map(String::as_str));
                names.iter().map(String::as_str).collect()
            }
            Decl::Nametype { name, .. } | Decl::Def { name, .. } => vec![name.as_str()],
            Decl::Assert { .. } => vec![],
        };
        for n in names {
            if !globals.insert(n) {
                errors.push(SyntaxError {
                    pos: *pos,
                    message: format!("`{n}` defined twice"),
                });
            }
        }
    }
    for (d, _) in &m.decls {
        let mut scope: Vec<String> = Vec::new();
        let mut check =
            |e: &Expr, scope: &mut Vec<String>| walk(e, &globals, &channels, scope, &mut errors);
        match d {
            Decl::Channel { ty: Some(t), .. } => check(t, &mut scope),
            Decl::Channel { .. } => {}
            Decl::Nametype { ty, .. } => check(ty, &mut scope),
            Decl::Def { params, body, .. } => {
                scope.extend(params.iter().cloned());
                check(body, &mut scope);
            }
            Decl::Assert { spec, imp, .. } => {
                check(spec, &mut scope);
                check(imp, &mut scope);
            }
        }
    }
    errors
}

fn walk(
    e: &Expr,
    globals: &HashSet<&str>,
    channels: &HashSet<&str>,
    scope: &mut Vec<String>,
    errors: &mut Vec<SyntaxError>,
) {
    let known = |n: &str, scope: &Vec<String>| globals.contains(n) || scope.iter().any(|s| s == n);
    match e {
        Expr::Int(_) | Expr::Bool(_) => {}
        Expr::Name(n, pos) => {
            if !known(n, scope) {
                errors.push(SyntaxError {
                    pos: *pos,
                    message: format!("unknown name `{n}`"),
                });
            }
        }
        Expr::Call(n, pos, args) => {
            if !known(n, scope) {
                errors.push(SyntaxError {
                    pos: *pos,
                    message: format!("unknown name `{n}`"),
                });
            }
            for a in args {
                walk(a, globals, channels, scope, errors);
            }
        }
        Expr::Not(a) | Expr::Neg(a) => walk(a, globals, channels, scope, errors),
        Expr::Binary(_, a, b) | Expr::Hide(a, b) | Expr::Range(a, b) => {
            walk(a, globals, channels, scope, errors);
            walk(b, globals, channels, scope, errors);
        }
        Expr::If(a, b, c) | Expr::Parallel(a, b, c) => {
            for x in [a, b, c] {
                walk(x, globals, channels, scope, errors);
            }
        }
        Expr::Replicated(_, v, set, body) => {
            walk(set, globals, channels, scope, errors);
            scope.push(v.clone());
            walk(body, globals, channels, scope, errors);
            scope.pop();
        }
        Expr::Prefix(ev, then) => {
            if !channels.contains(ev.channel.as_str()) {
                errors.push(SyntaxError {
                    pos: ev.pos,
                    message: format!("`{}` is not a channel", ev.channel),
                });
            }
            let before = scope.len();
            for p in &ev.parts {
                match p {
                    EventPart::Out(x) => walk(x, globals, channels, scope, errors),
                    EventPart::In(v, set) => {
                        if let Some(s) = set {
                            walk(s, globals, channels, scope, errors);
                        }
                        scope.push(v.clone());
                    }
                }
            }
            walk(then, globals, channels, scope, errors);
            scope.truncate(before);
        }
        Expr::Set(items) | Expr::Channels(items) => {
            for x in items {
                walk(x, globals, channels, scope, errors);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Val {
    Int(i64),
    Bool(bool),
}

/// Runs a deterministic process (prefixes with output-only events, `if`,
/// `;`, `SKIP` and calls to definitions) and returns its events in order.
/// Fails on anything that would need a choice, or after `fuel` steps.
pub fn run_deterministic(
    m: &Module,
    entry: &str,
    args: &[i64],
    fuel: usize,
) -> Result<Vec<String>, String> {
    let defs: HashMap<&str, (&Vec<String>, &Expr)> = m
        .decls
        .iter()
        .filter_map(|(d, _)| match d {
            Decl::Def { name, params, body } => Some((name.as_str(), (params, body))),
            _ => None,
        })
        .collect();
    let mut events = Vec::new();
    let mut fuel = fuel;
    let env: HashMap<String, Val> = HashMap::new();
    let call = Expr::Call(
        entry.into(),
        Pos { line: 0, col: 0 },
        args.iter().map(|v| Expr::Int(*v)).collect(),
    );
    proc_run(&defs, &call, &env, &mut events, &mut fuel)?;
    Ok(events)
}

type Defs<'a> = HashMap<&'a str, (&'a Vec<String>, &'a Expr)>;

fn value(defs: &Defs<'_>, e: &Expr, env: &HashMap<String, Val>) -> Result<Val, String> {
    let int = |v: Val| match v {
        Val::Int(i) => Ok(i),
        Val::Bool(_) => Err("expected an integer".to_string()),
    };
    Ok(match e {
        Expr::Int(v) => Val::Int(*v),
        Expr::Bool(b) => Val::Bool(*b),
        Expr::Name(n, _) => match env.get(n) {
            Some(v) => v.clone(),
            None => match defs.get(n.as_str()) {
                Some((p, body)) if p.is_empty() => value(defs, body, &HashMap::new())?,
                _ => return Err(format!("`{n}` is not a value")),
            },
        },
        Expr::Neg(a) => Val::Int(-int(value(defs, a, env)?)?),
        Expr::Not(a) => Val::Bool(value(defs, a, env)? == Val::Bool(false)),
        Expr::Binary(op, a, b) => {
            let (x, y) = (value(defs, a, env)?, value(defs, b, env)?);
            match *op {
                "==" => Val::Bool(x == y),
                "!=" => Val::Bool(x != y),
                "and" => Val::Bool(x == Val::Bool(true) && y == Val::Bool(true)),
                "or" => Val::Bool(x == Val::Bool(true) || y == Val::Bool(true)),
                _ => {
                    let (x, y) = (int(x)?, int(y)?);
                    match *op {
                        "+" => Val::Int(x + y),
                        "-" => Val::Int(x - y),
                        "*" => Val::Int(x * y),
                        "<" => Val::Bool(x < y),
                        "<=" => Val::Bool(x <= y),
                        ">" => Val::Bool(x > y),
                        ">=" => Val::Bool(x >= y),
                        "/" if y != 0 => Val::Int(x / y),
                        "%" if y != 0 => Val::Int(x % y),
                        _ => return Err(format!("cannot evaluate `{op}`")),
                    }
                }
            }
        }
        _ => return Err("unsupported value expression".into()),
    })
}

/// Returns `true` if the process terminated with SKIP.
fn proc_run(
    defs: &Defs<'_>,
    e: &Expr,
    env: &HashMap<String, Val>,
    events: &mut Vec<String>,
    fuel: &mut usize,
) -> Result<bool, String> {
    if *fuel == 0 {
        return Err("out of fuel".into());
    }
    *fuel -= 1;
    match e {
        Expr::Name(n, _) if n == "SKIP" => Ok(true),
        Expr::Name(n, _) if n == "STOP" => Ok(false),
        Expr::Name(n, p) => proc_run(
            defs,
            &Expr::Call(n.clone(), *p, Vec::new()),
            env,
            events,
            fuel,
        ),
        Expr::Call(n, _, args) => {
            let (params, body) = defs
                .get(n.as_str())
                .ok_or_else(|| format!("unknown process `{n}`"))?;
            if params.len() != args.len() {
                return Err(format!("`{n}` takes {} arguments", params.len()));
            }
            let mut inner = HashMap::new();
            for (p, a) in params.iter().zip(args) {
                inner.insert(p.clone(), value(defs, a, env)?);
            }
            proc_run(defs, body, &inner, events, fuel)
        }
        Expr::If(c, t, f) => match value(defs, c, env)? {
            Val::Bool(true) => proc_run(defs, t, env, events, fuel),
            Val::Bool(false) => proc_run(defs, f, env, events, fuel),
            Val::Int(_) => Err("condition is not boolean".into()),
        },
        Expr::Binary(";", a, b) => {
            if proc_run(defs, a, env, events, fuel)? {
                proc_run(defs, b, env, events, fuel)
            } else {
                Ok(false)
            }
        }
        Expr::Prefix(ev, then) => {
            let mut name = ev.channel.clone();
            for p in &ev.parts {
                match p {
                    EventPart::Out(x) => match value(defs, x, env)? {
                        Val::Int(v) => name.push_str(&format!(".{v}")),
                        Val::Bool(b) => name.push_str(&format!(".{b}")),
                    },
                    EventPart::In(..) => return Err("input events are not deterministic".into()),
                }
            }
            events.push(name);
            proc_run(defs, then, env, events, fuel)
        }
        _ => Err("process is not deterministic".into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_runs_a_clock() {
        let src =
            "channel tock\nN = 3\nCLOCK(n) = if n == 0 then SKIP\n  else tock -> CLOCK(n - 1)\n";
        let m = parse(src).unwrap();
        let ev = run_deterministic(&m, "CLOCK", &[3], 100).unwrap();
        assert_eq!(ev, ["tock", "tock", "tock"]);
    }

    #[test]
    fn reports_positions() {
        let errs = parse("channel a : {0..3}\nP = b -> SKIP\n").unwrap_err();
        assert_eq!(errs[0].pos, Pos { line: 2, col: 5 });
        let errs = parse("P = (SKIP\n").unwrap_err();
        assert!(errs[0].message.contains(')'), "{errs:?}");
        let errs = parse("  P = SKIP\n").unwrap_err();
        assert_eq!(errs[0].pos.col, 3);
    }

    #[test]
    fn binders_are_scoped() {
        let ok = "channel c : {0..1}\nS = {0, 1}\nP = (|~| v : S @ c!v -> SKIP) ; c?x:S -> SKIP\n";
        assert!(parse(ok).is_ok(), "{:?}", parse(ok));
        assert!(parse("channel c : {0..1}\nP = (c?x -> SKIP) ; c!x -> SKIP\n").is_err());
    }
}
