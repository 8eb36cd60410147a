//! Elaboration of process bodies: name resolution, type checking, function
//! inlining, static bound checks and lowering to a slot-addressed form the
//! simulator can execute without lookups.

use std::collections::{BTreeSet, HashSet};

use crate::error::ModelError;
use crate::ir::{Expr, Stmt};
use crate::model::{Body, ProcessDef};
use crate::types::{bits_for, BinaryOp, Kind, ScalarType, UnaryOp, Value, ValueType};

#[derive(Debug, Clone, PartialEq)]
pub enum CExpr {
    Const(u64),
    Var(u32),
    Elem {
        base: u32,
        len: u32,
        index: Box<CExpr>,
    },
    Field {
        port: u32,
        field: u32,
    },
    Unary {
        op: UnaryOp,
        ty: ScalarType,
        a: Box<CExpr>,
    },
    /// `ty` is the operand type.
    Binary {
        op: BinaryOp,
        ty: ScalarType,
        a: Box<CExpr>,
        b: Box<CExpr>,
    },
    Cast {
        from: ScalarType,
        to: ScalarType,
        a: Box<CExpr>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum CStmt {
    SetVar {
        slot: u32,
        value: CExpr,
    },
    SetElem {
        base: u32,
        len: u32,
        index: CExpr,
        value: CExpr,
    },
    SetField {
        port: u32,
        field: u32,
        value: CExpr,
    },
    If {
        cond: CExpr,
        then_branch: Vec<CStmt>,
        else_branch: Vec<CStmt>,
    },
    For {
        slot: u32,
        start: u64,
        end: u64,
        body: Vec<CStmt>,
    },
    Assert {
        cond: CExpr,
        message: u32,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarSlot {
    pub name: String,
    pub ty: ValueType,
    pub offset: u32,
    pub initial: Option<Value>,
    /// Never assigned by the body.
    pub constant: bool,
    /// Loop counters carry their `start..end` range.
    pub loop_range: Option<(i64, i64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompiledBody {
    pub stmts: Vec<CStmt>,
    pub vars: Vec<VarSlot>,
    pub slot_count: usize,
    /// `(input port, field)` pairs read by the body, sorted.
    pub reads: Vec<(usize, usize)>,
    /// `(output port, field)` pairs assigned by the body, sorted.
    pub writes: Vec<(usize, usize)>,
    /// The body after inlining local functions.
    pub inlined: Vec<Stmt>,
    pub messages: Vec<String>,
}

impl CompiledBody {
    pub fn var(&self, name: &str) -> Option<&VarSlot> {
        self.vars
            .iter()
            .find(|v| v.name == name && v.loop_range.is_none())
    }

    /// Initial contents of the variable store.
    pub fn initial_store(&self) -> Vec<u64> {
        let mut store = vec![0; self.slot_count];
        for v in &self.vars {
            if let Some(init) = v.initial {
                for i in 0..v.ty.slots() {
                    store[v.offset as usize + i] = init.bits;
                }
            }
        }
        store
    }
}

/// Elaborates the IR body of `def`.
pub fn compile(def: &ProcessDef) -> Result<CompiledBody, ModelError> {
    let Body::Ir(stmts) = &def.body else {
        return Err(ModelError::Body {
            process: def.name.clone(),
            message: "no statement body to elaborate".into(),
        });
    };
    let inlined = inline(def, stmts, &mut Vec::new())?;

    let mut c = Compiler {
        def,
        vars: Vec::new(),
        scope: Vec::new(),
        slot_count: 0,
        reads: BTreeSet::new(),
        writes: BTreeSet::new(),
        assigned: HashSet::new(),
        messages: Vec::new(),
    };
    let mut names = HashSet::new();
    for v in &def.variables {
        if !names.insert(v.name.as_str()) {
            return Err(ModelError::DuplicateName(v.name.clone()));
        }
        if let Some(init) = v.initial {
            if init.ty != v.ty.scalar {
                return Err(c.mismatch(
                    &format!("initial value of `{}`", v.name),
                    v.ty.scalar,
                    init.ty,
                ));
            }
        }
        let idx = c.alloc(&v.name, v.ty, v.initial, None);
        c.scope.push((v.name.clone(), idx));
    }
    let stmts = c.block(&inlined)?;
    for v in &mut c.vars {
        v.constant = v.loop_range.is_none() && !c.assigned.contains(&v.name);
    }
    Ok(CompiledBody {
        stmts,
        vars: c.vars,
        slot_count: c.slot_count,
        reads: c.reads.into_iter().collect(),
        writes: c.writes.into_iter().collect(),
        inlined,
        messages: c.messages,
    })
}

fn inline(
    def: &ProcessDef,
    stmts: &[Stmt],
    stack: &mut Vec<String>,
) -> Result<Vec<Stmt>, ModelError> {
    let mut out = Vec::with_capacity(stmts.len());
    for s in stmts {
        match s {
            Stmt::Call(name) => {
                let f = def
                    .functions
                    .iter()
                    .find(|f| &f.name == name)
                    .ok_or_else(|| ModelError::UnknownFunction {
                        process: def.name.clone(),
                        name: name.clone(),
                    })?;
                if stack.contains(name) {
                    return Err(ModelError::RecursiveFunction {
                        process: def.name.clone(),
                        name: name.clone(),
                    });
                }
                stack.push(name.clone());
                out.extend(inline(def, &f.body, stack)?);
                stack.pop();
            }
            Stmt::If {
                cond,
                then_branch,
                else_branch,
            } => out.push(Stmt::If {
                cond: cond.clone(),
                then_branch: inline(def, then_branch, stack)?,
                else_branch: inline(def, else_branch, stack)?,
            }),
            Stmt::For {
                var,
                start,
                end,
                body,
            } => out.push(Stmt::For {
                var: var.clone(),
                start: *start,
                end: *end,
                body: inline(def, body, stack)?,
            }),
            other => out.push(other.clone()),
        }
    }
    Ok(out)
}

/// Unsigned value interval used to prove array indices in range.
#[derive(Debug, Clone, Copy)]
struct Range {
    lo: u128,
    hi: u128,
}

impl Range {
    fn full(ty: ScalarType) -> Option<Range> {
        match ty.kind {
            Kind::Signed => None,
            _ => Some(Range {
                lo: 0,
                hi: ty.max_value() as u128,
            }),
        }
    }
}

struct Typed {
    expr: CExpr,
    ty: ScalarType,
    range: Option<Range>,
}

struct Compiler<'a> {
    def: &'a ProcessDef,
    vars: Vec<VarSlot>,
    scope: Vec<(String, usize)>,
    slot_count: usize,
    reads: BTreeSet<(usize, usize)>,
    writes: BTreeSet<(usize, usize)>,
    assigned: HashSet<String>,
    messages: Vec<String>,
}

impl Compiler<'_> {
    fn alloc(
        &mut self,
        name: &str,
        ty: ValueType,
        initial: Option<Value>,
        loop_range: Option<(i64, i64)>,
    ) -> usize {
        let idx = self.vars.len();
        self.vars.push(VarSlot {
            name: name.to_string(),
            ty,
            offset: self.slot_count as u32,
            initial,
            constant: false,
            loop_range,
        });
        self.slot_count += ty.slots();
        idx
    }

    fn lookup(&self, name: &str) -> Result<&VarSlot, ModelError> {
        self.scope
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|&(_, i)| &self.vars[i])
            .ok_or_else(|| ModelError::UnknownVariable {
                process: self.def.name.clone(),
                name: name.to_string(),
            })
    }

    fn mismatch(&self, context: &str, expected: impl ToString, found: impl ToString) -> ModelError {
        ModelError::TypeMismatch {
            process: self.def.name.clone(),
            context: context.to_string(),
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    fn block(&mut self, stmts: &[Stmt]) -> Result<Vec<CStmt>, ModelError> {
        let mut out = Vec::with_capacity(stmts.len());
        for s in stmts {
            if let Some(c) = self.stmt(s)? {
                out.push(c);
            }
        }
        Ok(out)
    }

    fn stmt(&mut self, s: &Stmt) -> Result<Option<CStmt>, ModelError> {
        Ok(Some(match s {
            Stmt::Nop => return Ok(None),
            Stmt::Call(name) => {
                return Err(ModelError::UnknownFunction {
                    process: self.def.name.clone(),
                    name: name.clone(),
                })
            }
            Stmt::AssignVar { name, index, value } => {
                let slot = self.lookup(name)?.clone();
                if slot.loop_range.is_some() {
                    return Err(ModelError::Body {
                        process: self.def.name.clone(),
                        message: format!("loop counter `{name}` cannot be assigned"),
                    });
                }
                self.assigned.insert(name.clone());
                let value =
                    self.expect(value, slot.ty.scalar, &format!("assignment to `{name}`"))?;
                match (index, slot.ty.array_len) {
                    (None, None) => CStmt::SetVar {
                        slot: slot.offset,
                        value,
                    },
                    (Some(idx), Some(len)) => CStmt::SetElem {
                        base: slot.offset,
                        len,
                        index: self.index_expr(name, idx, len)?,
                        value,
                    },
                    (None, Some(_)) => {
                        return Err(self.mismatch(
                            &format!("assignment to `{name}`"),
                            "element index",
                            "whole array",
                        ))
                    }
                    (Some(_), None) => {
                        return Err(self.mismatch(&format!("indexing `{name}`"), "array", slot.ty))
                    }
                }
            }
            Stmt::AssignField { port, field, value } => {
                let Some(p) = self.def.output_index(port) else {
                    return Err(if self.def.input_index(port).is_some() {
                        ModelError::WriteToInput {
                            process: self.def.name.clone(),
                            port: port.clone(),
                        }
                    } else {
                        ModelError::UnknownPort {
                            process: self.def.name.clone(),
                            port: port.clone(),
                        }
                    });
                };
                let shape = &self.def.outputs[p].shape;
                let f = shape
                    .field_index(field)
                    .ok_or_else(|| ModelError::UnknownField {
                        process: self.def.name.clone(),
                        port: port.clone(),
                        field: field.clone(),
                    })?;
                let ty = shape.fields[f].ty;
                let value = self.expect(value, ty, &format!("assignment to `{port}.{field}`"))?;
                self.writes.insert((p, f));
                CStmt::SetField {
                    port: p as u32,
                    field: f as u32,
                    value,
                }
            }
            Stmt::If {
                cond,
                then_branch,
                else_branch,
            } => CStmt::If {
                cond: self.expect(cond, ScalarType::BOOL, "if condition")?,
                then_branch: self.block(then_branch)?,
                else_branch: self.block(else_branch)?,
            },
            Stmt::For {
                var,
                start,
                end,
                body,
            } => {
                if *start < 0 || end < start {
                    return Err(ModelError::InvalidLoop {
                        process: self.def.name.clone(),
                        var: var.clone(),
                        start: *start,
                        end: *end,
                    });
                }
                if self.scope.iter().any(|(n, _)| n == var) {
                    return Err(ModelError::DuplicateName(var.clone()));
                }
                let ty = ScalarType::u(bits_for((*end - 1).max(0) as u64));
                let idx = self.alloc(var, ty.into(), None, Some((*start, *end)));
                let slot = self.vars[idx].offset;
                self.scope.push((var.clone(), idx));
                let body = self.block(body);
                self.scope.pop();
                CStmt::For {
                    slot,
                    start: *start as u64,
                    end: *end as u64,
                    body: body?,
                }
            }
            Stmt::Assert { cond, message } => {
                let cond = self.expect(cond, ScalarType::BOOL, "assertion")?;
                self.messages.push(message.clone());
                CStmt::Assert {
                    cond,
                    message: (self.messages.len() - 1) as u32,
                }
            }
        }))
    }

    fn expect(&mut self, e: &Expr, ty: ScalarType, context: &str) -> Result<CExpr, ModelError> {
        let t = self.expr(e)?;
        if t.ty != ty {
            return Err(self.mismatch(context, ty, t.ty));
        }
        Ok(t.expr)
    }

    fn index_expr(&mut self, array: &str, idx: &Expr, len: u32) -> Result<CExpr, ModelError> {
        let t = self.expr(idx)?;
        if t.ty.kind != Kind::Unsigned {
            return Err(self.mismatch(&format!("index into `{array}`"), "unsigned integer", t.ty));
        }
        match t.range {
            Some(r) if r.hi < len as u128 => Ok(t.expr),
            _ => Err(ModelError::UnprovenIndex {
                process: self.def.name.clone(),
                array: array.to_string(),
                len,
            }),
        }
    }

    fn expr(&mut self, e: &Expr) -> Result<Typed, ModelError> {
        match e {
            Expr::Const(v) => {
                let r = match v.ty.kind {
                    Kind::Signed => None,
                    _ => Some(Range {
                        lo: v.bits as u128,
                        hi: v.bits as u128,
                    }),
                };
                Ok(Typed {
                    expr: CExpr::Const(v.bits),
                    ty: v.ty,
                    range: r,
                })
            }
            Expr::Var(name) => {
                let slot = self.lookup(name)?.clone();
                if slot.ty.array_len.is_some() {
                    return Err(self.mismatch(&format!("reading `{name}`"), "scalar", slot.ty));
                }
                let range = match slot.loop_range {
                    Some((s, e)) => Some(Range {
                        lo: s as u128,
                        hi: (e - 1).max(s) as u128,
                    }),
                    None => Range::full(slot.ty.scalar),
                };
                Ok(Typed {
                    expr: CExpr::Var(slot.offset),
                    ty: slot.ty.scalar,
                    range,
                })
            }
            Expr::Index(name, idx) => {
                let slot = self.lookup(name)?.clone();
                let Some(len) = slot.ty.array_len else {
                    return Err(self.mismatch(&format!("indexing `{name}`"), "array", slot.ty));
                };
                let index = self.index_expr(name, idx, len)?;
                Ok(Typed {
                    expr: CExpr::Elem {
                        base: slot.offset,
                        len,
                        index: Box::new(index),
                    },
                    ty: slot.ty.scalar,
                    range: Range::full(slot.ty.scalar),
                })
            }
            Expr::Field { port, field } => {
                let Some(p) = self.def.input_index(port) else {
                    return Err(if self.def.output_index(port).is_some() {
                        ModelError::ReadFromOutput {
                            process: self.def.name.clone(),
                            port: port.clone(),
                        }
                    } else {
                        ModelError::UnknownPort {
                            process: self.def.name.clone(),
                            port: port.clone(),
                        }
                    });
                };
                let shape = &self.def.inputs[p].shape;
                let f = shape
                    .field_index(field)
                    .ok_or_else(|| ModelError::UnknownField {
                        process: self.def.name.clone(),
                        port: port.clone(),
                        field: field.clone(),
                    })?;
                let ty = shape.fields[f].ty;
                self.reads.insert((p, f));
                Ok(Typed {
                    expr: CExpr::Field {
                        port: p as u32,
                        field: f as u32,
                    },
                    ty,
                    range: Range::full(ty),
                })
            }
            Expr::Unary(op, a) => {
                let a = self.expr(a)?;
                if *op == UnaryOp::Neg && a.ty.is_bool() {
                    return Err(self.mismatch("negation", "integer", a.ty));
                }
                Ok(Typed {
                    range: Range::full(a.ty),
                    ty: a.ty,
                    expr: CExpr::Unary {
                        op: *op,
                        ty: a.ty,
                        a: Box::new(a.expr),
                    },
                })
            }
            Expr::Binary(op, a, b) => self.binary(*op, a, b),
            Expr::Cast(to, a) => {
                let a = self.expr(a)?;
                let range = match (a.range, to.kind) {
                    (Some(r), Kind::Unsigned) if r.hi <= to.max_value() as u128 => Some(r),
                    (Some(r), Kind::Bool) => Some(Range {
                        lo: 0,
                        hi: r.hi.min(1),
                    }),
                    _ => Range::full(*to),
                };
                Ok(Typed {
                    expr: CExpr::Cast {
                        from: a.ty,
                        to: *to,
                        a: Box::new(a.expr),
                    },
                    ty: *to,
                    range,
                })
            }
        }
    }

    fn binary(&mut self, op: BinaryOp, a: &Expr, b: &Expr) -> Result<Typed, ModelError> {
        let a = self.expr(a)?;
        let b = self.expr(b)?;
        let ctx = format!("operator `{}`", op.symbol());
        if op.is_shift() {
            if !a.ty.is_integer() || !b.ty.is_integer() {
                return Err(self.mismatch(
                    &ctx,
                    "integer operands",
                    format!("{} and {}", a.ty, b.ty),
                ));
            }
        } else if a.ty != b.ty {
            return Err(self.mismatch(&ctx, a.ty, b.ty));
        }
        let ty = a.ty;
        let result = match op {
            BinaryOp::And | BinaryOp::Or => {
                if !ty.is_bool() {
                    return Err(self.mismatch(&ctx, "bool", ty));
                }
                ScalarType::BOOL
            }
            BinaryOp::Eq | BinaryOp::Ne => ScalarType::BOOL,
            BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => {
                if ty.is_bool() {
                    return Err(self.mismatch(&ctx, "integer", ty));
                }
                ScalarType::BOOL
            }
            BinaryOp::BitAnd | BinaryOp::BitOr | BinaryOp::BitXor => ty,
            _ => {
                if ty.is_bool() {
                    return Err(self.mismatch(&ctx, "integer", ty));
                }
                ty
            }
        };
        let range = match (op, a.range, b.range) {
            (BinaryOp::Add, Some(x), Some(y)) if x.hi + y.hi <= ty.max_value() as u128 => {
                Some(Range {
                    lo: x.lo + y.lo,
                    hi: x.hi + y.hi,
                })
            }
            (BinaryOp::Sub, Some(x), Some(y)) if x.lo >= y.hi => Some(Range {
                lo: x.lo - y.hi,
                hi: x.hi - y.lo,
            }),
            (BinaryOp::Mul, Some(x), Some(y))
                if x.hi
                    .checked_mul(y.hi)
                    .is_some_and(|m| m <= ty.max_value() as u128) =>
            {
                Some(Range {
                    lo: x.lo * y.lo,
                    hi: x.hi * y.hi,
                })
            }
            (BinaryOp::BitAnd, Some(x), Some(y)) => Some(Range {
                lo: 0,
                hi: x.hi.min(y.hi),
            }),
            (BinaryOp::Rem, Some(_), Some(y)) if y.lo > 0 && y.lo == y.hi => Some(Range {
                lo: 0,
                hi: y.hi - 1,
            }),
            (BinaryOp::Div | BinaryOp::Shr, Some(x), Some(_)) if ty.kind == Kind::Unsigned => {
                Some(Range { lo: 0, hi: x.hi })
            }
            _ => Range::full(result),
        };
        Ok(Typed {
            expr: CExpr::Binary {
                op,
                ty,
                a: Box::new(a.expr),
                b: Box::new(b.expr),
            },
            ty: result,
            range,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::Expr;
    use crate::model::{declare_bus_shape, FieldSpec};
    use crate::types::ValueType;

    fn u(w: u8) -> ScalarType {
        ScalarType::u(w)
    }

    #[test]
    fn unreassigned_variables_become_constants() {
        let def = ProcessDef::new("P", true)
            .var("k", u(8), Some(3))
            .var("acc", u(8), Some(0))
            .body(vec![Stmt::set("acc", Expr::var("acc").add(Expr::var("k")))]);
        let c = compile(&def).unwrap();
        assert!(c.var("k").unwrap().constant);
        assert!(!c.var("acc").unwrap().constant);
    }

    #[test]
    fn functions_are_inlined() {
        let def = ProcessDef::new("P", true)
            .var("x", u(4), None)
            .function(
                "bump",
                vec![Stmt::set("x", Expr::var("x").add(Expr::lit(u(4), 1)))],
            )
            .function(
                "twice",
                vec![Stmt::Call("bump".into()), Stmt::Call("bump".into())],
            )
            .body(vec![Stmt::Call("twice".into())]);
        let c = compile(&def).unwrap();
        assert_eq!(c.inlined.len(), 2);
        assert!(c
            .inlined
            .iter()
            .all(|s| matches!(s, Stmt::AssignVar { .. })));
    }

    #[test]
    fn recursion_rejected() {
        let def = ProcessDef::new("P", true)
            .function("f", vec![Stmt::Call("g".into())])
            .function("g", vec![Stmt::Call("f".into())])
            .body(vec![Stmt::Call("f".into())]);
        assert!(matches!(
            compile(&def),
            Err(ModelError::RecursiveFunction { .. })
        ));
    }

    #[test]
    fn index_bounds_are_proven_or_rejected() {
        let arr = ValueType::array(u(8), 4).unwrap();
        let ok = ProcessDef::new("P", true)
            .var("a", arr, None)
            .body(vec![Stmt::For {
                var: "i".into(),
                start: 0,
                end: 4,
                body: vec![Stmt::set_index("a", Expr::var("i"), Expr::lit(u(8), 1))],
            }]);
        assert!(compile(&ok).is_ok());

        let by_width = ProcessDef::new("P", true)
            .var("a", arr, None)
            .var("j", u(2), None)
            .body(vec![Stmt::set_index(
                "a",
                Expr::var("j"),
                Expr::lit(u(8), 1),
            )]);
        assert!(compile(&by_width).is_ok());

        let bad = ProcessDef::new("P", true)
            .var("a", arr, None)
            .var("j", u(3), None)
            .body(vec![Stmt::set_index(
                "a",
                Expr::var("j"),
                Expr::lit(u(8), 1),
            )]);
        assert!(matches!(
            compile(&bad),
            Err(ModelError::UnprovenIndex { .. })
        ));

        let overrun = ProcessDef::new("P", true)
            .var("a", arr, None)
            .body(vec![Stmt::For {
                var: "i".into(),
                start: 0,
                end: 4,
                body: vec![Stmt::set_index(
                    "a",
                    Expr::var("i").add(Expr::lit(u(2), 1)),
                    Expr::lit(u(8), 0),
                )],
            }]);
        // u2 addition wraps, so the index stays in 0..4.
        assert!(compile(&overrun).is_ok());
    }

    #[test]
    fn port_direction_enforced() {
        let s = declare_bus_shape("S", vec![FieldSpec::new("v", u(4))], true, true).unwrap();
        let write_input = ProcessDef::new("P", true)
            .input("i", &s)
            .body(vec![Stmt::write("i", "v", Expr::lit(u(4), 0))]);
        assert!(matches!(
            compile(&write_input),
            Err(ModelError::WriteToInput { .. })
        ));
        let read_output = ProcessDef::new("P", true)
            .output("o", &s)
            .var("x", u(4), None)
            .body(vec![Stmt::set("x", Expr::field("o", "v"))]);
        assert!(matches!(
            compile(&read_output),
            Err(ModelError::ReadFromOutput { .. })
        ));
    }

    #[test]
    fn width_mismatch_is_a_type_error() {
        let s = declare_bus_shape("S", vec![FieldSpec::new("v", u(4))], true, true).unwrap();
        let def = ProcessDef::new("P", true)
            .output("o", &s)
            .var("x", u(8), None)
            .body(vec![Stmt::write("o", "v", Expr::var("x"))]);
        assert!(matches!(
            compile(&def),
            Err(ModelError::TypeMismatch { .. })
        ));
        let cast = ProcessDef::new("P", true)
            .output("o", &s)
            .var("x", u(8), None)
            .body(vec![Stmt::write(
                "o",
                "v",
                Expr::cast(u(4), Expr::var("x")),
            )]);
        assert!(compile(&cast).is_ok());
    }

    #[test]
    fn reads_and_writes_collected() {
        let s = declare_bus_shape(
            "S",
            vec![FieldSpec::new("a", u(4)), FieldSpec::new("b", u(4))],
            true,
            true,
        )
        .unwrap();
        let def = ProcessDef::new("P", true)
            .input("i", &s)
            .output("o", &s)
            .body(vec![Stmt::write("o", "b", Expr::field("i", "a"))]);
        let c = compile(&def).unwrap();
        assert_eq!(c.reads, vec![(0, 0)]);
        assert_eq!(c.writes, vec![(0, 1)]);
    }
}
