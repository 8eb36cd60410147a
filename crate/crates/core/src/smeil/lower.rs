//! Lowering of a parsed unit to a [`Network`].
//!
//! Integer literals without a suffix take their type from context: the
//! other operand, the assignment target, or the cast they appear in.
//! Constants and parameters behave like such literals.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use super::ast::*;
use super::Diagnostic;
use crate::components::{make_bram, make_register, BramPorts, BramSpec};
use crate::ir;
use crate::model::{declare_bus_shape, BusId, BusShape, FieldSpec, Network, ProcessDef};
use crate::types::{bits_for, clog2, Kind, ScalarType, ValueType};

type LResult<T> = Result<T, Diagnostic>;

/// Upper bound on network-level loop iterations, against runaway bounds.
const MAX_INSTANCES: i128 = 1 << 16;

fn err<T>(pos: Pos, message: impl Into<String>) -> LResult<T> {
    Err(Diagnostic::error(pos, message))
}

fn fold(op: BinaryOp, a: i128, b: i128, pos: Pos) -> LResult<i128> {
    use BinaryOp::*;
    let overflow = || Diagnostic::error(pos, format!("constant overflow in `{}`", op.symbol()));
    Ok(match op {
        Add => a.checked_add(b).ok_or_else(overflow)?,
        Sub => a.checked_sub(b).ok_or_else(overflow)?,
        Mul => a.checked_mul(b).ok_or_else(overflow)?,
        Div | Rem if b == 0 => return err(pos, "division by zero in a constant"),
        Div => a.checked_div(b).ok_or_else(overflow)?,
        Rem => a.checked_rem(b).ok_or_else(overflow)?,
        Shl | Shr if !(0..127).contains(&b) => {
            return err(pos, format!("shift amount {b} out of range"))
        }
        Shl => a.checked_mul(1i128 << b).ok_or_else(overflow)?,
        Shr => a >> b,
        BitAnd => a & b,
        BitOr => a | b,
        BitXor => a ^ b,
        Eq => (a == b) as i128,
        Ne => (a != b) as i128,
        Lt => (a < b) as i128,
        Le => (a <= b) as i128,
        Gt => (a > b) as i128,
        Ge => (a >= b) as i128,
        And => (a != 0 && b != 0) as i128,
        Or => (a != 0 || b != 0) as i128,
    })
}

fn builtin(func: &str, args: &[i128], pos: Pos) -> LResult<i128> {
    let arity = match func {
        "clog2" | "bits" => 1,
        "min" | "max" => 2,
        _ => {
            return err(
                pos,
                format!("unknown function `{func}` (constants support clog2, bits, min, max)"),
            )
        }
    };
    if args.len() != arity {
        return err(
            pos,
            format!("`{func}` takes {arity} argument(s), got {}", args.len()),
        );
    }
    Ok(match func {
        "clog2" if args[0] < 1 || args[0] > u64::MAX as i128 => {
            return err(pos, "`clog2` needs an argument of at least 1")
        }
        "clog2" => clog2(args[0] as u64) as i128,
        "bits" if args[0] < 0 || args[0] > u64::MAX as i128 => {
            return err(pos, "`bits` needs a non-negative argument")
        }
        "bits" => bits_for(args[0] as u64) as i128,
        "min" => args[0].min(args[1]),
        _ => args[0].max(args[1]),
    })
}

/// Evaluates an elaboration-time integer expression. `lookup` resolves
/// names; `context` prefixes the error for names that are not constants.
fn const_eval(e: &Expr, lookup: &dyn Fn(&str) -> Option<i128>, context: &str) -> LResult<i128> {
    match &e.kind {
        ExprKind::Int { value, .. } => {
            i128::try_from(*value).or_else(|_| err(e.pos, "literal is too large"))
        }
        ExprKind::Bool(b) => Ok(*b as i128),
        ExprKind::Name(n) => lookup(n).ok_or_else(|| {
            Diagnostic::error(e.pos, format!("{context}: `{n}` is not a known constant"))
        }),
        ExprKind::Call { func, args } => {
            let vals = args
                .iter()
                .map(|a| const_eval(a, lookup, context))
                .collect::<LResult<Vec<_>>>()?;
            builtin(func, &vals, e.pos)
        }
        ExprKind::Unary { op, operand } => {
            let v = const_eval(operand, lookup, context)?;
            Ok(match op {
                UnaryOp::Neg => -v,
                UnaryOp::Not => (v == 0) as i128,
            })
        }
        ExprKind::Binary { op, lhs, rhs } => {
            let a = const_eval(lhs, lookup, context)?;
            let b = const_eval(rhs, lookup, context)?;
            fold(*op, a, b, e.pos)
        }
        ExprKind::Field { .. } | ExprKind::Index { .. } | ExprKind::Cast { .. } => {
            err(e.pos, format!("{context}: expected a constant expression"))
        }
    }
}

fn scalar_type(t: &TypeExpr, lookup: &dyn Fn(&str) -> Option<i128>) -> LResult<ScalarType> {
    let (signed, width) = match &t.kind {
        TypeKind::Bool => return Ok(ScalarType::BOOL),
        TypeKind::Fixed { signed, width } => (*signed, *width as i128),
        TypeKind::Sized { signed, width } => (*signed, const_eval(width, lookup, "type width")?),
    };
    if !(1..=64).contains(&width) {
        return err(
            t.pos,
            format!("width {width} out of range (integers take 1 to 64 bits)"),
        );
    }
    let kind = if signed { Kind::Signed } else { Kind::Unsigned };
    Ok(ScalarType {
        kind,
        width: width as u8,
    })
}

fn literal(v: i128, ty: ScalarType, pos: Pos) -> LResult<ir::Expr> {
    if ty.is_bool() {
        return err(pos, "expected bool, found an integer literal");
    }
    if !ty.fits(v) {
        return err(pos, format!("literal {v} does not fit {ty}"));
    }
    Ok(ir::Expr::lit(ty, v))
}

/// An expression before its literal type is known.
enum Lx {
    Int(i128),
    Typed(ir::Expr, ScalarType),
}

struct BodyCx<'a> {
    consts: &'a HashMap<String, i128>,
    vars: HashMap<String, ValueType>,
    inputs: HashMap<String, Arc<BusShape>>,
    outputs: HashMap<String, Arc<BusShape>>,
    funcs: HashSet<String>,
    loops: Vec<(String, ScalarType)>,
}

impl BodyCx<'_> {
    fn is_runtime(&self, n: &str) -> bool {
        self.loops.iter().any(|(l, _)| l == n) || self.vars.contains_key(n)
    }

    fn constant(&self, n: &str) -> Option<i128> {
        if self.is_runtime(n) {
            None
        } else {
            self.consts.get(n).copied()
        }
    }

    fn const_eval(&self, e: &Expr, context: &str) -> LResult<i128> {
        const_eval(e, &|n| self.constant(n), context)
    }

    fn field_type(shape: &BusShape, port: &str, field: &str, pos: Pos) -> LResult<ScalarType> {
        match shape.field_index(field) {
            Some(i) => Ok(shape.fields[i].ty),
            None => err(
                pos,
                format!(
                    "port `{port}` (bus shape `{}`) has no field `{field}`",
                    shape.name
                ),
            ),
        }
    }

    fn index(&self, name: &str, index: &Expr, pos: Pos) -> LResult<(ir::Expr, ScalarType)> {
        let Some(vt) = self.vars.get(name).copied() else {
            return err(pos, format!("unresolved name `{name}`"));
        };
        if vt.array_len.is_none() {
            return err(pos, format!("`{name}` is not an array"));
        }
        let idx = match self.infer(index)? {
            Lx::Int(v) if v < 0 => return err(index.pos, "array index must not be negative"),
            Lx::Int(v) => ir::Expr::lit(ScalarType::u(bits_for(v as u64)), v),
            Lx::Typed(e, t) if t.kind == Kind::Unsigned => e,
            Lx::Typed(_, t) => {
                return err(
                    index.pos,
                    format!("array index must be unsigned, found {t}"),
                )
            }
        };
        Ok((idx, vt.scalar))
    }

    fn infer(&self, e: &Expr) -> LResult<Lx> {
        let pos = e.pos;
        Ok(match &e.kind {
            ExprKind::Int { value, suffix } => {
                let v = i128::try_from(*value).or_else(|_| err(pos, "literal is too large"))?;
                match suffix {
                    None => Lx::Int(v),
                    Some((signed, w)) => {
                        if !(1..=64).contains(w) {
                            return err(
                                pos,
                                format!("width {w} out of range (integers take 1 to 64 bits)"),
                            );
                        }
                        let ty = if *signed {
                            ScalarType::i(*w as u8)
                        } else {
                            ScalarType::u(*w as u8)
                        };
                        Lx::Typed(literal(v, ty, pos)?, ty)
                    }
                }
            }
            ExprKind::Bool(b) => Lx::Typed(ir::Expr::bool(*b), ScalarType::BOOL),
            ExprKind::Name(n) => {
                if let Some((_, t)) = self.loops.iter().rev().find(|(l, _)| l == n) {
                    Lx::Typed(ir::Expr::var(n), *t)
                } else if let Some(vt) = self.vars.get(n) {
                    if vt.array_len.is_some() {
                        return err(pos, format!("array `{n}` must be indexed"));
                    }
                    Lx::Typed(ir::Expr::var(n), vt.scalar)
                } else if let Some(v) = self.consts.get(n) {
                    Lx::Int(*v)
                } else {
                    return err(pos, format!("unresolved name `{n}`"));
                }
            }
            ExprKind::Field { port, field } => {
                if let Some(shape) = self.inputs.get(port) {
                    Lx::Typed(
                        ir::Expr::field(port, field),
                        Self::field_type(shape, port, field, pos)?,
                    )
                } else if self.outputs.contains_key(port) {
                    return err(pos, format!("cannot read output port `{port}`"));
                } else {
                    return err(pos, format!("unresolved port `{port}`"));
                }
            }
            ExprKind::Index { name, index } => {
                let (idx, t) = self.index(name, index, pos)?;
                Lx::Typed(ir::Expr::index(name, idx), t)
            }
            ExprKind::Call { .. } => Lx::Int(self.const_eval(e, "function argument")?),
            ExprKind::Unary { op, operand } => match (op, self.infer(operand)?) {
                (UnaryOp::Neg, Lx::Int(v)) => Lx::Int(-v),
                (UnaryOp::Not, Lx::Int(_)) => {
                    return err(
                        pos,
                        "cannot infer the width of `!` applied to a literal; add a suffix",
                    )
                }
                (UnaryOp::Neg, Lx::Typed(_, t)) if t.is_bool() => {
                    return err(pos, "cannot negate a bool")
                }
                (op, Lx::Typed(x, t)) => Lx::Typed(ir::Expr::Unary(*op, Box::new(x)), t),
            },
            ExprKind::Binary { op, lhs, rhs } => self.binary(*op, lhs, rhs, pos)?,
            ExprKind::Cast { expr, ty } => {
                let to = scalar_type(ty, &|n| self.constant(n))?;
                match self.infer(expr)? {
                    Lx::Int(v) => Lx::Typed(ir::Expr::lit(to, v), to),
                    Lx::Typed(x, _) => Lx::Typed(ir::Expr::cast(to, x), to),
                }
            }
        })
    }

    fn binary(&self, op: BinaryOp, lhs: &Expr, rhs: &Expr, pos: Pos) -> LResult<Lx> {
        let a = self.infer(lhs)?;
        let b = self.infer(rhs)?;
        let sym = op.symbol();
        if let (Lx::Int(x), Lx::Int(y)) = (&a, &b) {
            let v = fold(op, *x, *y, pos)?;
            return Ok(if op.is_comparison() || op.is_logical() {
                Lx::Typed(ir::Expr::bool(v != 0), ScalarType::BOOL)
            } else {
                Lx::Int(v)
            });
        }
        if op.is_shift() {
            let Lx::Typed(ea, ta) = a else {
                return err(
                    lhs.pos,
                    "cannot infer the width of a shifted literal; add a suffix",
                );
            };
            if !ta.is_integer() {
                return err(
                    pos,
                    format!("operator `{sym}` needs integer operands, found {ta}"),
                );
            }
            let eb = match b {
                Lx::Int(v) if v < 0 => return err(rhs.pos, "shift amount must not be negative"),
                Lx::Int(v) => ir::Expr::lit(ScalarType::u(bits_for(v as u64)), v),
                Lx::Typed(eb, tb) if tb.is_integer() => eb,
                Lx::Typed(_, tb) => {
                    return err(
                        rhs.pos,
                        format!("shift amount must be an integer, found {tb}"),
                    )
                }
            };
            return Ok(Lx::Typed(ir::Expr::bin(op, ea, eb), ta));
        }
        let (ea, eb, ty) = match (a, b) {
            (Lx::Typed(ea, ta), Lx::Int(v)) => (ea, literal(v, ta, rhs.pos)?, ta),
            (Lx::Int(v), Lx::Typed(eb, tb)) => (literal(v, tb, lhs.pos)?, eb, tb),
            (Lx::Typed(ea, ta), Lx::Typed(eb, tb)) => {
                if ta != tb {
                    return err(
                        pos,
                        format!(
                            "operator `{sym}`: operand types differ ({ta} and {tb}); add a cast"
                        ),
                    );
                }
                (ea, eb, ta)
            }
            (Lx::Int(_), Lx::Int(_)) => unreachable!(),
        };
        let result = if op.is_logical() {
            if !ty.is_bool() {
                return err(
                    pos,
                    format!("operator `{sym}` needs bool operands, found {ty}"),
                );
            }
            ScalarType::BOOL
        } else if matches!(op, BinaryOp::Eq | BinaryOp::Ne) {
            ScalarType::BOOL
        } else if op.is_comparison() {
            if ty.is_bool() {
                return err(
                    pos,
                    format!("operator `{sym}` needs integer operands, found bool"),
                );
            }
            ScalarType::BOOL
        } else if matches!(op, BinaryOp::BitAnd | BinaryOp::BitOr | BinaryOp::BitXor) {
            ty
        } else {
            if ty.is_bool() {
                return err(
                    pos,
                    format!("operator `{sym}` needs integer operands, found bool"),
                );
            }
            ty
        };
        Ok(Lx::Typed(ir::Expr::bin(op, ea, eb), result))
    }

    fn value(&self, e: &Expr, ty: ScalarType, context: &str) -> LResult<ir::Expr> {
        match self.infer(e)? {
            Lx::Int(v) => literal(v, ty, e.pos),
            Lx::Typed(x, t) if t == ty => Ok(x),
            Lx::Typed(_, t) => err(
                e.pos,
                format!("type mismatch in {context}: expected {ty}, found {t}; add a cast"),
            ),
        }
    }

    fn block(&mut self, stmts: &[Stmt], diags: &mut Vec<Diagnostic>) -> Vec<ir::Stmt> {
        let mut out = Vec::new();
        for s in stmts {
            match self.stmt(s, diags) {
                Ok(st) => out.push(st),
                Err(d) => diags.push(d),
            }
        }
        out
    }

    fn stmt(&mut self, s: &Stmt, diags: &mut Vec<Diagnostic>) -> LResult<ir::Stmt> {
        let pos = s.pos;
        Ok(match &s.kind {
            StmtKind::Assign { target, value } => match target {
                Target::Var(n) => {
                    if self.loops.iter().any(|(l, _)| l == n) {
                        return err(pos, format!("loop counter `{n}` cannot be assigned"));
                    }
                    match self.vars.get(n).copied() {
                        Some(vt) if vt.array_len.is_some() => {
                            return err(
                                pos,
                                format!("array `{n}` must be assigned element by element"),
                            )
                        }
                        Some(vt) => ir::Stmt::set(
                            n,
                            self.value(value, vt.scalar, &format!("assignment to `{n}`"))?,
                        ),
                        None if self.consts.contains_key(n) => {
                            return err(pos, format!("cannot assign constant `{n}`"))
                        }
                        None => return err(pos, format!("unresolved name `{n}`")),
                    }
                }
                Target::Elem(n, idx) => {
                    let (i, t) = self.index(n, idx, pos)?;
                    ir::Stmt::set_index(
                        n,
                        i,
                        self.value(value, t, &format!("assignment to `{n}[..]`"))?,
                    )
                }
                Target::Field(p, f) => {
                    let Some(shape) = self.outputs.get(p) else {
                        if self.inputs.contains_key(p) {
                            return err(pos, format!("cannot write input port `{p}`"));
                        }
                        return err(pos, format!("unresolved port `{p}`"));
                    };
                    let t = Self::field_type(shape, p, f, pos)?;
                    ir::Stmt::write(
                        p,
                        f,
                        self.value(value, t, &format!("assignment to `{p}.{f}`"))?,
                    )
                }
            },
            StmtKind::If { arms, otherwise } => {
                let mut tail = match otherwise {
                    Some(b) => self.block(b, diags),
                    None => Vec::new(),
                };
                for (cond, body) in arms.iter().rev() {
                    let c = self.value(cond, ScalarType::BOOL, "condition");
                    let then = self.block(body, diags);
                    tail = vec![ir::Stmt::if_else(c?, then, tail)];
                }
                tail.pop().expect("at least one arm")
            }
            StmtKind::For {
                var,
                start,
                end,
                body,
            } => {
                let a = self.const_eval(start, "non-constant loop bound")?;
                let b = self.const_eval(end, "non-constant loop bound")?;
                if a < 0 || b < a || b > i64::MAX as i128 {
                    return err(pos, format!("invalid loop range {a}..{b}"));
                }
                if self.is_runtime(&var.name) {
                    return err(
                        var.pos,
                        format!("loop counter `{}` shadows another name", var.name),
                    );
                }
                let ty = ScalarType::u(bits_for((b - 1).max(0) as u64));
                self.loops.push((var.name.clone(), ty));
                let body = self.block(body, diags);
                self.loops.pop();
                ir::Stmt::For {
                    var: var.name.clone(),
                    start: a as i64,
                    end: b as i64,
                    body,
                }
            }
            StmtKind::Call(f) => {
                if !self.funcs.contains(&f.name) {
                    return err(f.pos, format!("unresolved function `{}`", f.name));
                }
                ir::Stmt::Call(f.name.clone())
            }
            StmtKind::Assert { cond, message } => {
                ir::Stmt::assert(self.value(cond, ScalarType::BOOL, "assertion")?, message)
            }
        })
    }
}

struct Lowerer {
    consts: HashMap<String, i128>,
    shapes: HashMap<String, Arc<BusShape>>,
    procs: HashMap<String, Arc<ProcessDef>>,
    diags: Vec<Diagnostic>,
}

impl Lowerer {
    fn lookup(&self) -> impl Fn(&str) -> Option<i128> + '_ {
        |n| self.consts.get(n).copied()
    }

    fn bus(&mut self, b: &BusDecl) -> LResult<Arc<BusShape>> {
        let mut fields = Vec::new();
        for f in &b.fields {
            let ty = scalar_type(&f.ty, &self.lookup())?;
            let spec = match &f.init {
                Some(e) => {
                    let v = const_eval(e, &self.lookup(), "initial value")?;
                    if !ty.fits(v) || (ty.is_bool() && !(0..=1).contains(&v)) {
                        return err(e.pos, format!("initial value {v} does not fit {ty}"));
                    }
                    FieldSpec::with_initial(&f.name.name, ty, v)
                }
                None => FieldSpec::new(&f.name.name, ty),
            };
            fields.push(spec);
        }
        declare_bus_shape(&b.name.name, fields, b.clocked, true)
            .map_err(|e| Diagnostic::error(b.name.pos, e.to_string()))
    }

    fn shape(&self, id: &Ident) -> LResult<Arc<BusShape>> {
        self.shapes
            .get(&id.name)
            .cloned()
            .ok_or_else(|| Diagnostic::error(id.pos, format!("unresolved bus shape `{}`", id.name)))
    }

    fn proc(&mut self, p: &ProcDecl) -> LResult<ProcessDef> {
        let mut def = match (&p.mode, &p.body) {
            (ProcMode::Sim, None) => ProcessDef::simulation(&p.name.name),
            (ProcMode::Sim, Some(_)) => ProcessDef::new(&p.name.name, true).ignored(),
            (_, None) => {
                return err(
                    p.name.pos,
                    format!(
                        "process `{}` needs a body; only `sim` processes may omit it",
                        p.name.name
                    ),
                )
            }
            (mode, Some(_)) => ProcessDef::new(&p.name.name, *mode == ProcMode::Clocked),
        };
        let mut inputs = HashMap::new();
        let mut outputs = HashMap::new();
        for port in &p.ports {
            let shape = self.shape(&port.shape)?;
            match port.dir {
                Direction::In => {
                    def = def.input(&port.name.name, &shape);
                    inputs.insert(port.name.name.clone(), shape);
                }
                Direction::Out => {
                    def = def.output(&port.name.name, &shape);
                    outputs.insert(port.name.name.clone(), shape);
                }
            }
        }
        let Some(items) = &p.body else { return Ok(def) };

        let mut cx = BodyCx {
            consts: &self.consts,
            vars: HashMap::new(),
            inputs,
            outputs,
            funcs: HashSet::new(),
            loops: Vec::new(),
        };
        let before = self.diags.len();
        for item in items {
            match item {
                ProcItem::Var(v) => {
                    let r = (|| {
                        let lookup = |n: &str| self.consts.get(n).copied();
                        let scalar = scalar_type(&v.ty, &lookup)?;
                        let ty = match &v.len {
                            Some(n) => {
                                let len = const_eval(n, &lookup, "array length")?;
                                if !(1..=u32::MAX as i128).contains(&len) {
                                    return err(n.pos, format!("array length {len} out of range"));
                                }
                                ValueType::array(scalar, len as u32)
                                    .map_err(|e| Diagnostic::error(n.pos, e.to_string()))?
                            }
                            None => ValueType::scalar(scalar),
                        };
                        let init = match &v.init {
                            Some(e) => {
                                let x = const_eval(e, &lookup, "initial value")?;
                                if !scalar.fits(x) || (scalar.is_bool() && !(0..=1).contains(&x)) {
                                    return err(
                                        e.pos,
                                        format!("initial value {x} does not fit {scalar}"),
                                    );
                                }
                                Some(x)
                            }
                            None => None,
                        };
                        Ok((ty, init))
                    })();
                    match r {
                        Ok((ty, init)) => {
                            cx.vars.insert(v.name.name.clone(), ty);
                            def = def.var(&v.name.name, ty, init);
                        }
                        Err(d) => self.diags.push(d),
                    }
                }
                ProcItem::Func(f) => {
                    cx.funcs.insert(f.name.name.clone());
                }
                ProcItem::Stmt(_) => {}
            }
        }
        let mut diags = Vec::new();
        let mut body = Vec::new();
        for item in items {
            match item {
                ProcItem::Func(f) => {
                    let b = cx.block(&f.body, &mut diags);
                    def = def.function(&f.name.name, b);
                }
                ProcItem::Stmt(s) => body.extend(cx.block(std::slice::from_ref(s), &mut diags)),
                ProcItem::Var(_) => {}
            }
        }
        self.diags.extend(diags);
        let def = def.body(body);
        if self.diags.len() == before {
            // Remaining checks (index ranges, recursion) belong to the elaborator.
            crate::elab::compile(&def).map_err(|e| Diagnostic::error(p.name.pos, e.to_string()))?;
        }
        Ok(def)
    }

    fn component(&self, c: &ComponentDecl) -> LResult<ProcessDef> {
        match &c.kind {
            ComponentKind::Bram { depth, width, dual } => {
                let d = const_eval(depth, &self.lookup(), "memory depth")?;
                let w = const_eval(width, &self.lookup(), "memory width")?;
                if !(1..=u32::MAX as i128).contains(&d) {
                    return err(depth.pos, format!("memory depth {d} out of range"));
                }
                if !(1..=64).contains(&w) {
                    return err(width.pos, format!("memory width {w} out of range"));
                }
                let ports = if *dual {
                    BramPorts::TrueDual
                } else {
                    BramPorts::Single
                };
                let spec = BramSpec::new(d as u32, w as u8, ports)
                    .map_err(|e| Diagnostic::error(c.name.pos, e.to_string()))?;
                Ok(make_bram(&c.name.name, &spec).0)
            }
            ComponentKind::Register { shape } => {
                Ok(make_register(&c.name.name, &self.shape(shape)?))
            }
        }
    }
}

enum BusEntry {
    Single(BusId),
    Array(Vec<BusId>),
}

struct NetCx<'a> {
    lw: &'a Lowerer,
    net: Network,
    buses: HashMap<String, BusEntry>,
    bus_names: HashSet<String>,
    instances: HashSet<String>,
    scope: Vec<(String, i128)>,
    budget: i128,
}

impl NetCx<'_> {
    fn eval(&self, e: &Expr, context: &str) -> LResult<i128> {
        let lookup = |n: &str| {
            self.scope
                .iter()
                .rev()
                .find(|(s, _)| s == n)
                .map(|(_, v)| *v)
                .or_else(|| self.lw.consts.get(n).copied())
        };
        const_eval(e, &lookup, context)
    }

    fn items(&mut self, items: &[NetItem], nested: bool, diags: &mut Vec<Diagnostic>) {
        for item in items {
            if let Err(d) = self.item(item, nested, diags) {
                diags.push(d);
            }
        }
    }

    fn item(&mut self, item: &NetItem, nested: bool, diags: &mut Vec<Diagnostic>) -> LResult<()> {
        match &item.kind {
            NetItemKind::Bus { name, len, shape } => {
                if nested {
                    return err(
                        item.pos,
                        "bus instances must be declared at network level, not inside a loop",
                    );
                }
                let shape = self.lw.shape(shape)?;
                if self.buses.contains_key(&name.name) {
                    return err(name.pos, format!("duplicate bus `{}`", name.name));
                }
                let names: Vec<String> = match len {
                    None => vec![name.name.clone()],
                    Some(n) => {
                        let k = self.eval(n, "bus array length")?;
                        if !(1..=MAX_INSTANCES).contains(&k) {
                            return err(n.pos, format!("bus array length {k} out of range"));
                        }
                        (0..k).map(|i| format!("{}{i}", name.name)).collect()
                    }
                };
                if let Some(clash) = names.iter().find(|n| self.bus_names.contains(*n)) {
                    return err(name.pos, format!("bus name `{clash}` is already taken"));
                }
                let ids: Vec<BusId> = names
                    .iter()
                    .map(|n| {
                        self.bus_names.insert(n.clone());
                        self.net.instantiate_bus_named(&shape, n)
                    })
                    .collect();
                let entry = if len.is_some() {
                    BusEntry::Array(ids)
                } else {
                    BusEntry::Single(ids[0])
                };
                self.buses.insert(name.name.clone(), entry);
                Ok(())
            }
            NetItemKind::For {
                var,
                start,
                end,
                items,
            } => {
                let a = self.eval(start, "non-constant loop bound")?;
                let b = self.eval(end, "non-constant loop bound")?;
                if b - a > self.budget {
                    return err(item.pos, "loop instantiates too many processes");
                }
                for k in a..b {
                    self.budget -= 1;
                    self.scope.push((var.name.clone(), k));
                    self.items(items, true, diags);
                    self.scope.pop();
                }
                Ok(())
            }
            NetItemKind::Inst {
                name,
                proc,
                bindings,
            } => {
                let def = self.lw.procs.get(&proc.name).cloned().ok_or_else(|| {
                    Diagnostic::error(proc.pos, format!("unresolved process `{}`", proc.name))
                })?;
                let inst = match name {
                    None => proc.name.clone(),
                    Some((n, None)) => n.name.clone(),
                    Some((n, Some(i))) => {
                        let k = self.eval(i, "instance index")?;
                        if k < 0 {
                            return err(i.pos, "instance index must not be negative");
                        }
                        format!("{}{k}", n.name)
                    }
                };
                if !self.instances.insert(inst.clone()) {
                    return err(item.pos, format!("duplicate instance `{inst}`"));
                }
                let mut ins: Vec<Option<BusId>> = vec![None; def.inputs.len()];
                let mut outs: Vec<Option<BusId>> = vec![None; def.outputs.len()];
                for b in bindings {
                    let slot = if let Some(i) = def.input_index(&b.port.name) {
                        &mut ins[i]
                    } else if let Some(i) = def.output_index(&b.port.name) {
                        &mut outs[i]
                    } else {
                        return err(
                            b.port.pos,
                            format!("process `{}` has no port `{}`", proc.name, b.port.name),
                        );
                    };
                    if slot.is_some() {
                        return err(b.port.pos, format!("port `{}` is bound twice", b.port.name));
                    }
                    let bus = match (self.buses.get(&b.bus.name.name), &b.bus.index) {
                        (None, _) => {
                            return err(
                                b.bus.name.pos,
                                format!("unresolved bus `{}`", b.bus.name.name),
                            )
                        }
                        (Some(BusEntry::Single(id)), None) => *id,
                        (Some(BusEntry::Single(_)), Some(i)) => {
                            return err(i.pos, format!("bus `{}` is not an array", b.bus.name.name))
                        }
                        (Some(BusEntry::Array(_)), None) => {
                            return err(
                                b.bus.name.pos,
                                format!("bus array `{}` must be indexed", b.bus.name.name),
                            )
                        }
                        (Some(BusEntry::Array(ids)), Some(i)) => {
                            let k = self.eval(i, "bus index")?;
                            match usize::try_from(k).ok().and_then(|k| ids.get(k)) {
                                Some(id) => *id,
                                None => {
                                    return err(
                                        i.pos,
                                        format!(
                                            "index {k} out of range for bus array `{}` of {}",
                                            b.bus.name.name,
                                            ids.len()
                                        ),
                                    )
                                }
                            }
                        }
                    };
                    *slot = Some(bus);
                }
                let unbound = def
                    .inputs
                    .iter()
                    .zip(&ins)
                    .chain(def.outputs.iter().zip(&outs))
                    .find(|(_, b)| b.is_none());
                if let Some((port, _)) = unbound {
                    return err(
                        item.pos,
                        format!("port `{}` of `{}` is not bound", port.name, proc.name),
                    );
                }
                let ins: Vec<BusId> = ins.into_iter().flatten().collect();
                let outs: Vec<BusId> = outs.into_iter().flatten().collect();
                self.net
                    .add_process_named(&inst, def, &ins, &outs)
                    .map_err(|e| Diagnostic::error(item.pos, e.to_string()))?;
                Ok(())
            }
        }
    }
}

/// Lowers with parameter overrides, given as `(name, value)` pairs.
pub fn lower_with(
    unit: &SourceUnit,
    overrides: &[(&str, i128)],
) -> Result<Network, Vec<Diagnostic>> {
    let mut lw = Lowerer {
        consts: HashMap::new(),
        shapes: HashMap::new(),
        procs: HashMap::new(),
        diags: Vec::new(),
    };
    let anchor = unit
        .decls
        .first()
        .map_or(Pos { line: 1, col: 1 }, |d| d.pos);
    for (name, _) in overrides {
        let known = unit
            .decls
            .iter()
            .any(|d| matches!(&d.kind, DeclKind::Param { name: n, .. } if n.name == *name));
        if !known {
            lw.diags.push(Diagnostic::error(
                anchor,
                format!("unknown parameter `{name}`"),
            ));
        }
    }
    for d in &unit.decls {
        let r = match &d.kind {
            DeclKind::Param { name, value } => {
                let v = match overrides.iter().rev().find(|(n, _)| *n == name.name) {
                    Some((_, v)) => Ok(*v),
                    None => const_eval(value, &lw.lookup(), "parameter value"),
                };
                v.map(|v| {
                    lw.consts.insert(name.name.clone(), v);
                })
            }
            DeclKind::Const { name, value } => {
                let v = const_eval(value, &lw.lookup(), "constant value");
                v.map(|v| {
                    lw.consts.insert(name.name.clone(), v);
                })
            }
            DeclKind::Bus(b) => lw.bus(b).map(|s| {
                lw.shapes.insert(b.name.name.clone(), s);
            }),
            DeclKind::Proc(p) => lw.proc(p).map(|def| {
                lw.procs.insert(p.name.name.clone(), Arc::new(def));
            }),
            DeclKind::Component(c) => lw.component(c).map(|def| {
                lw.procs.insert(c.name.name.clone(), Arc::new(def));
            }),
            DeclKind::Network(_) => Ok(()),
        };
        if let Err(e) = r {
            lw.diags.push(e);
        }
    }
    let Some(decl) = unit.network() else {
        lw.diags
            .push(Diagnostic::error(anchor, "no network declared"));
        return Err(lw.diags);
    };
    let mut diags = std::mem::take(&mut lw.diags);
    let mut cx = NetCx {
        lw: &lw,
        net: Network::new(&decl.name.name),
        buses: HashMap::new(),
        bus_names: HashSet::new(),
        instances: HashSet::new(),
        scope: Vec::new(),
        budget: MAX_INSTANCES,
    };
    cx.items(&decl.items, false, &mut diags);
    if diags.is_empty() {
        Ok(cx.net)
    } else {
        diags.sort_by_key(|d| (d.line, d.column));
        Err(diags)
    }
}

pub fn lower(unit: &SourceUnit) -> Result<Network, Vec<Diagnostic>> {
    lower_with(unit, &[])
}

/// Values of the unit's parameters after applying `overrides`, in
/// declaration order.
pub fn parameters(
    unit: &SourceUnit,
    overrides: &[(&str, i128)],
) -> Result<Vec<(String, i128)>, Vec<Diagnostic>> {
    let mut consts = HashMap::new();
    let mut out = Vec::new();
    let mut diags = Vec::new();
    for d in &unit.decls {
        let (name, value, is_param) = match &d.kind {
            DeclKind::Param { name, value } => (name, value, true),
            DeclKind::Const { name, value } => (name, value, false),
            _ => continue,
        };
        let v = match overrides
            .iter()
            .rev()
            .find(|(n, _)| is_param && *n == name.name)
        {
            Some((_, v)) => Ok(*v),
            None => const_eval(value, &|n| consts.get(n).copied(), "parameter value"),
        };
        match v {
            Ok(v) => {
                consts.insert(name.name.clone(), v);
                if is_param {
                    out.push((name.name.clone(), v));
                }
            }
            Err(e) => diags.push(e),
        }
    }
    if diags.is_empty() {
        Ok(out)
    } else {
        Err(diags)
    }
}
