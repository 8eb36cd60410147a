//! Syntax tree of an IL source unit. Every node records where it starts.

use std::fmt;

pub use crate::types::{BinaryOp, UnaryOp};

/// 1-based line and column (in characters).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeKind {
    Bool,
    /// `u8`, `i16`
    Fixed {
        signed: bool,
        width: u32,
    },
    /// `u(expr)`, `i(expr)`
    Sized {
        signed: bool,
        width: Box<Expr>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeExpr {
    pub kind: TypeKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    /// Decimal or hex literal, optionally suffixed with a type (`15u4`).
    Int {
        value: u128,
        suffix: Option<(bool, u32)>,
    },
    Bool(bool),
    Name(String),
    Field {
        port: String,
        field: String,
    },
    Index {
        name: String,
        index: Box<Expr>,
    },
    /// Constant-only builtin such as `clog2(x)`.
    Call {
        func: String,
        args: Vec<Expr>,
    },
    Unary {
        op: UnaryOp,
        operand: Box<Expr>,
    },
    Binary {
        op: BinaryOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Cast {
        expr: Box<Expr>,
        ty: TypeExpr,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    Var(String),
    Elem(String, Expr),
    Field(String, String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    Assign {
        target: Target,
        value: Expr,
    },
    If {
        arms: Vec<(Expr, Vec<Stmt>)>,
        otherwise: Option<Vec<Stmt>>,
    },
    For {
        var: Ident,
        start: Expr,
        end: Expr,
        body: Vec<Stmt>,
    },
    Call(Ident),
    Assert {
        cond: Expr,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDecl {
    pub name: Ident,
    pub ty: TypeExpr,
    pub init: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BusDecl {
    pub name: Ident,
    pub clocked: bool,
    pub fields: Vec<FieldDecl>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProcMode {
    Clocked,
    Unclocked,
    /// Clocked and left out of generated hardware.
    Sim,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    In,
    Out,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PortDecl {
    pub dir: Direction,
    pub name: Ident,
    pub shape: Ident,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDecl {
    pub name: Ident,
    pub ty: TypeExpr,
    pub len: Option<Expr>,
    pub init: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuncDecl {
    pub name: Ident,
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProcItem {
    Var(VarDecl),
    Func(FuncDecl),
    Stmt(Stmt),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcDecl {
    pub name: Ident,
    pub mode: ProcMode,
    pub ports: Vec<PortDecl>,
    /// `None` for a host-driven simulation process.
    pub body: Option<Vec<ProcItem>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ComponentKind {
    Bram {
        depth: Expr,
        width: Expr,
        dual: bool,
    },
    Register {
        shape: Ident,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentDecl {
    pub name: Ident,
    pub kind: ComponentKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BusRef {
    pub name: Ident,
    pub index: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binding {
    pub port: Ident,
    pub bus: BusRef,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NetItemKind {
    Bus {
        name: Ident,
        len: Option<Expr>,
        shape: Ident,
    },
    /// `name = Proc(...)`, `name[i] = Proc(...)` or `Proc(...)`.
    Inst {
        name: Option<(Ident, Option<Expr>)>,
        proc: Ident,
        bindings: Vec<Binding>,
    },
    For {
        var: Ident,
        start: Expr,
        end: Expr,
        items: Vec<NetItem>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetItem {
    pub kind: NetItemKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkDecl {
    pub name: Ident,
    pub items: Vec<NetItem>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DeclKind {
    /// Overridable at lowering time.
    Param {
        name: Ident,
        value: Expr,
    },
    Const {
        name: Ident,
        value: Expr,
    },
    Bus(BusDecl),
    Proc(ProcDecl),
    Component(ComponentDecl),
    Network(NetworkDecl),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decl {
    pub kind: DeclKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SourceUnit {
    pub decls: Vec<Decl>,
}

impl DeclKind {
    pub fn name(&self) -> &Ident {
        match self {
            DeclKind::Param { name, .. } | DeclKind::Const { name, .. } => name,
            DeclKind::Bus(b) => &b.name,
            DeclKind::Proc(p) => &p.name,
            DeclKind::Component(c) => &c.name,
            DeclKind::Network(n) => &n.name,
        }
    }
}

impl SourceUnit {
    pub fn network(&self) -> Option<&NetworkDecl> {
        self.decls.iter().find_map(|d| match &d.kind {
            DeclKind::Network(n) => Some(n),
            _ => None,
        })
    }

    /// A copy with every position reset, for comparing trees structurally.
    pub fn without_positions(&self) -> SourceUnit {
        let mut u = self.clone();
        u.visit_positions(&mut |p| *p = Pos::default());
        u
    }

    /// Calls `f` on every position in the tree.
    pub fn visit_positions(&mut self, f: &mut dyn FnMut(&mut Pos)) {
        for d in &mut self.decls {
            f(&mut d.pos);
            match &mut d.kind {
                DeclKind::Param { name, value } | DeclKind::Const { name, value } => {
                    f(&mut name.pos);
                    expr_positions(value, f);
                }
                DeclKind::Bus(b) => {
                    f(&mut b.name.pos);
                    for fd in &mut b.fields {
                        f(&mut fd.name.pos);
                        type_positions(&mut fd.ty, f);
                        if let Some(e) = &mut fd.init {
                            expr_positions(e, f);
                        }
                    }
                }
                DeclKind::Proc(p) => {
                    f(&mut p.name.pos);
                    for port in &mut p.ports {
                        f(&mut port.name.pos);
                        f(&mut port.shape.pos);
                    }
                    for item in p.body.iter_mut().flatten() {
                        match item {
                            ProcItem::Var(v) => {
                                f(&mut v.name.pos);
                                type_positions(&mut v.ty, f);
                                for e in v.len.iter_mut().chain(v.init.iter_mut()) {
                                    expr_positions(e, f);
                                }
                            }
                            ProcItem::Func(fd) => {
                                f(&mut fd.name.pos);
                                stmts_positions(&mut fd.body, f);
                            }
                            ProcItem::Stmt(s) => stmt_positions(s, f),
                        }
                    }
                }
                DeclKind::Component(c) => {
                    f(&mut c.name.pos);
                    match &mut c.kind {
                        ComponentKind::Bram { depth, width, .. } => {
                            expr_positions(depth, f);
                            expr_positions(width, f);
                        }
                        ComponentKind::Register { shape } => f(&mut shape.pos),
                    }
                }
                DeclKind::Network(n) => {
                    f(&mut n.name.pos);
                    net_positions(&mut n.items, f);
                }
            }
        }
    }
}

fn net_positions(items: &mut [NetItem], f: &mut dyn FnMut(&mut Pos)) {
    for item in items {
        f(&mut item.pos);
        match &mut item.kind {
            NetItemKind::Bus { name, len, shape } => {
                f(&mut name.pos);
                f(&mut shape.pos);
                if let Some(e) = len {
                    expr_positions(e, f);
                }
            }
            NetItemKind::Inst {
                name,
                proc,
                bindings,
            } => {
                if let Some((n, idx)) = name {
                    f(&mut n.pos);
                    if let Some(e) = idx {
                        expr_positions(e, f);
                    }
                }
                f(&mut proc.pos);
                for b in bindings {
                    f(&mut b.port.pos);
                    f(&mut b.bus.name.pos);
                    if let Some(e) = &mut b.bus.index {
                        expr_positions(e, f);
                    }
                }
            }
            NetItemKind::For {
                var,
                start,
                end,
                items,
            } => {
                f(&mut var.pos);
                expr_positions(start, f);
                expr_positions(end, f);
                net_positions(items, f);
            }
        }
    }
}

fn stmts_positions(stmts: &mut [Stmt], f: &mut dyn FnMut(&mut Pos)) {
    for s in stmts {
        stmt_positions(s, f);
    }
}

fn stmt_positions(s: &mut Stmt, f: &mut dyn FnMut(&mut Pos)) {
    f(&mut s.pos);
    match &mut s.kind {
        StmtKind::Assign { target, value } => {
            if let Target::Elem(_, e) = target {
                expr_positions(e, f);
            }
            expr_positions(value, f);
        }
        StmtKind::If { arms, otherwise } => {
            for (c, body) in arms {
                expr_positions(c, f);
                stmts_positions(body, f);
            }
            if let Some(body) = otherwise {
                stmts_positions(body, f);
            }
        }
        StmtKind::For {
            var,
            start,
            end,
            body,
        } => {
            f(&mut var.pos);
            expr_positions(start, f);
            expr_positions(end, f);
            stmts_positions(body, f);
        }
        StmtKind::Call(name) => f(&mut name.pos),
        StmtKind::Assert { cond, .. } => expr_positions(cond, f),
    }
}

fn type_positions(t: &mut TypeExpr, f: &mut dyn FnMut(&mut Pos)) {
    f(&mut t.pos);
    if let TypeKind::Sized { width, .. } = &mut t.kind {
        expr_positions(width, f);
    }
}

fn expr_positions(e: &mut Expr, f: &mut dyn FnMut(&mut Pos)) {
    f(&mut e.pos);
    match &mut e.kind {
        ExprKind::Int { .. } | ExprKind::Bool(_) | ExprKind::Name(_) | ExprKind::Field { .. } => {}
        ExprKind::Index { index, .. } => expr_positions(index, f),
        ExprKind::Call { args, .. } => {
            for a in args {
                expr_positions(a, f);
            }
        }
        ExprKind::Unary { operand, .. } => expr_positions(operand, f),
        ExprKind::Binary { lhs, rhs, .. } => {
            expr_positions(lhs, f);
            expr_positions(rhs, f);
        }
        ExprKind::Cast { expr, ty } => {
            expr_positions(expr, f);
            type_positions(ty, f);
        }
    }
}
