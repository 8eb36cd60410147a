//! The restricted statement language for synthesizable process bodies.
//!
//! Names are resolved against the owning [`ProcessDef`](crate::model::ProcessDef)
//! when the process is added to a network.

use crate::types::{BinaryOp, ScalarType, UnaryOp, Value};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(Value),
    /// A scalar variable or loop counter.
    Var(String),
    /// Element of an array variable.
    Index(String, Box<Expr>),
    /// Current value of a field on an input bus.
    Field {
        port: String,
        field: String,
    },
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Cast(ScalarType, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Stmt {
    AssignVar {
        name: String,
        index: Option<Expr>,
        value: Expr,
    },
    AssignField {
        port: String,
        field: String,
        value: Expr,
    },
    If {
        cond: Expr,
        then_branch: Vec<Stmt>,
        else_branch: Vec<Stmt>,
    },
    /// Counts `var` from `start` up to but excluding `end`.
    For {
        var: String,
        start: i64,
        end: i64,
        body: Vec<Stmt>,
    },
    Call(String),
    /// Simulation-time check; a failing condition aborts the simulation.
    Assert {
        cond: Expr,
        message: String,
    },
    Nop,
}

/// A named subroutine local to one process. Inlined at elaboration.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Function {
    pub name: String,
    pub body: Vec<Stmt>,
}

impl Expr {
    pub fn lit(ty: ScalarType, v: i128) -> Expr {
        Expr::Const(Value::from_i128(ty, v))
    }

    pub fn bool(b: bool) -> Expr {
        Expr::Const(Value::bool(b))
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn field(port: &str, field: &str) -> Expr {
        Expr::Field {
            port: port.to_string(),
            field: field.to_string(),
        }
    }

    pub fn index(name: &str, idx: Expr) -> Expr {
        Expr::Index(name.to_string(), Box::new(idx))
    }

    pub fn bin(op: BinaryOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn not(a: Expr) -> Expr {
        Expr::Unary(UnaryOp::Not, Box::new(a))
    }

    pub fn cast(ty: ScalarType, a: Expr) -> Expr {
        Expr::Cast(ty, Box::new(a))
    }

    pub fn add(self, b: Expr) -> Expr {
        Expr::bin(BinaryOp::Add, self, b)
    }

    pub fn sub(self, b: Expr) -> Expr {
        Expr::bin(BinaryOp::Sub, self, b)
    }

    pub fn mul(self, b: Expr) -> Expr {
        Expr::bin(BinaryOp::Mul, self, b)
    }

    pub fn eq(self, b: Expr) -> Expr {
        Expr::bin(BinaryOp::Eq, self, b)
    }

    pub fn ne(self, b: Expr) -> Expr {
        Expr::bin(BinaryOp::Ne, self, b)
    }

    pub fn lt(self, b: Expr) -> Expr {
        Expr::bin(BinaryOp::Lt, self, b)
    }

    pub fn and(self, b: Expr) -> Expr {
        Expr::bin(BinaryOp::And, self, b)
    }

    pub fn or(self, b: Expr) -> Expr {
        Expr::bin(BinaryOp::Or, self, b)
    }
}

impl Stmt {
    pub fn set(name: &str, value: Expr) -> Stmt {
        Stmt::AssignVar {
            name: name.to_string(),
            index: None,
            value,
        }
    }

    pub fn set_index(name: &str, index: Expr, value: Expr) -> Stmt {
        Stmt::AssignVar {
            name: name.to_string(),
            index: Some(index),
            value,
        }
    }

    pub fn write(port: &str, field: &str, value: Expr) -> Stmt {
        Stmt::AssignField {
            port: port.to_string(),
            field: field.to_string(),
            value,
        }
    }

    pub fn when(cond: Expr, then_branch: Vec<Stmt>) -> Stmt {
        Stmt::If {
            cond,
            then_branch,
            else_branch: Vec::new(),
        }
    }

    pub fn if_else(cond: Expr, then_branch: Vec<Stmt>, else_branch: Vec<Stmt>) -> Stmt {
        Stmt::If {
            cond,
            then_branch,
            else_branch,
        }
    }

    pub fn assert(cond: Expr, message: &str) -> Stmt {
        Stmt::Assert {
            cond,
            message: message.to_string(),
        }
    }
}
