//! Canonical pretty-printer. Parentheses are inserted only where operator
//! precedence requires them, so printing and reparsing gives back the tree.

use std::fmt::Write;

use super::ast::*;
use super::parser::{precedence, CAST_PREC};

const INDENT: &str = "    ";

pub fn print(unit: &SourceUnit) -> String {
    let mut out = String::new();
    for (i, d) in unit.decls.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        decl(&mut out, d);
    }
    out
}

fn decl(out: &mut String, d: &Decl) {
    match &d.kind {
        DeclKind::Param { name, value } => {
            let _ = writeln!(out, "param {} = {};", name.name, expr(value));
        }
        DeclKind::Const { name, value } => {
            let _ = writeln!(out, "const {} = {};", name.name, expr(value));
        }
        DeclKind::Bus(b) => {
            let mode = if b.clocked { "clocked" } else { "unclocked" };
            let _ = writeln!(out, "bus {} {mode} {{", b.name.name);
            for f in &b.fields {
                let _ = write!(out, "{INDENT}{}: {}", f.name.name, ty(&f.ty));
                if let Some(e) = &f.init {
                    let _ = write!(out, " = {}", expr(e));
                }
                out.push_str(";\n");
            }
            out.push_str("}\n");
        }
        DeclKind::Proc(p) => {
            let mode = match p.mode {
                ProcMode::Clocked => "clocked",
                ProcMode::Unclocked => "unclocked",
                ProcMode::Sim => "sim",
            };
            let ports: Vec<String> = p
                .ports
                .iter()
                .map(|port| {
                    let dir = if port.dir == Direction::In {
                        "in"
                    } else {
                        "out"
                    };
                    format!("{dir} {}: {}", port.name.name, port.shape.name)
                })
                .collect();
            let _ = write!(out, "proc {} {mode} ({})", p.name.name, ports.join(", "));
            match &p.body {
                None => out.push_str(";\n"),
                Some(items) => {
                    out.push_str(" {\n");
                    for item in items {
                        match item {
                            ProcItem::Var(v) => {
                                let _ = write!(out, "{INDENT}var {}: {}", v.name.name, ty(&v.ty));
                                if let Some(n) = &v.len {
                                    let _ = write!(out, "[{}]", expr(n));
                                }
                                if let Some(e) = &v.init {
                                    let _ = write!(out, " = {}", expr(e));
                                }
                                out.push_str(";\n");
                            }
                            ProcItem::Func(f) => {
                                let _ = write!(out, "{INDENT}func {} ", f.name.name);
                                block(out, &f.body, 1);
                                out.push('\n');
                            }
                            ProcItem::Stmt(s) => stmt(out, s, 1),
                        }
                    }
                    out.push_str("}\n");
                }
            }
        }
        DeclKind::Component(c) => {
            let body = match &c.kind {
                ComponentKind::Bram { depth, width, dual } => format!(
                    "bram({}, {}, {})",
                    expr(depth),
                    expr(width),
                    if *dual { "dual" } else { "single" }
                ),
                ComponentKind::Register { shape } => format!("register({})", shape.name),
            };
            let _ = writeln!(out, "proc {} = {body};", c.name.name);
        }
        DeclKind::Network(n) => {
            let _ = writeln!(out, "network {} {{", n.name.name);
            net_items(out, &n.items, 1);
            out.push_str("}\n");
        }
    }
}

fn net_items(out: &mut String, items: &[NetItem], depth: usize) {
    let pad = INDENT.repeat(depth);
    for item in items {
        match &item.kind {
            NetItemKind::Bus { name, len, shape } => {
                let _ = write!(out, "{pad}bus {}", name.name);
                if let Some(n) = len {
                    let _ = write!(out, "[{}]", expr(n));
                }
                let _ = writeln!(out, ": {};", shape.name);
            }
            NetItemKind::Inst {
                name,
                proc,
                bindings,
            } => {
                out.push_str(&pad);
                if let Some((n, idx)) = name {
                    out.push_str(&n.name);
                    if let Some(i) = idx {
                        let _ = write!(out, "[{}]", expr(i));
                    }
                    out.push_str(" = ");
                }
                let binds: Vec<String> = bindings
                    .iter()
                    .map(|b| match &b.bus.index {
                        Some(i) => format!("{} = {}[{}]", b.port.name, b.bus.name.name, expr(i)),
                        None => format!("{} = {}", b.port.name, b.bus.name.name),
                    })
                    .collect();
                let _ = writeln!(out, "{}({});", proc.name, binds.join(", "));
            }
            NetItemKind::For {
                var,
                start,
                end,
                items,
            } => {
                let _ = writeln!(
                    out,
                    "{pad}for {} in {}..{} {{",
                    var.name,
                    expr(start),
                    expr(end)
                );
                net_items(out, items, depth + 1);
                let _ = writeln!(out, "{pad}}}");
            }
        }
    }
}

/// Writes `{ ... }` without a trailing newline.
fn block(out: &mut String, stmts: &[Stmt], depth: usize) {
    out.push_str("{\n");
    for s in stmts {
        stmt(out, s, depth + 1);
    }
    out.push_str(&INDENT.repeat(depth));
    out.push('}');
}

fn stmt(out: &mut String, s: &Stmt, depth: usize) {
    let pad = INDENT.repeat(depth);
    out.push_str(&pad);
    match &s.kind {
        StmtKind::Assign { target, value } => {
            match target {
                Target::Var(n) => out.push_str(n),
                Target::Elem(n, i) => {
                    let _ = write!(out, "{n}[{}]", expr(i));
                }
                Target::Field(p, f) => {
                    let _ = write!(out, "{p}.{f}");
                }
            }
            let _ = writeln!(out, " := {};", expr(value));
        }
        StmtKind::If { arms, otherwise } => {
            for (i, (cond, body)) in arms.iter().enumerate() {
                let kw = if i == 0 { "if" } else { " elif" };
                let _ = write!(out, "{kw} {} ", expr(cond));
                block(out, body, depth);
            }
            if let Some(body) = otherwise {
                out.push_str(" else ");
                block(out, body, depth);
            }
            out.push('\n');
        }
        StmtKind::For {
            var,
            start,
            end,
            body,
        } => {
            let _ = write!(out, "for {} in {}..{} ", var.name, expr(start), expr(end));
            block(out, body, depth);
            out.push('\n');
        }
        StmtKind::Call(name) => {
            let _ = writeln!(out, "{}();", name.name);
        }
        StmtKind::Assert { cond, message } => {
            let _ = writeln!(out, "assert {}, {};", expr(cond), quote(message));
        }
    }
}

fn quote(s: &str) -> String {
    let mut q = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => q.push_str("\\\""),
            '\\' => q.push_str("\\\\"),
            '\n' => q.push_str("\\n"),
            '\t' => q.push_str("\\t"),
            c => q.push(c),
        }
    }
    q.push('"');
    q
}

pub fn ty(t: &TypeExpr) -> String {
    match &t.kind {
        TypeKind::Bool => "bool".into(),
        TypeKind::Fixed { signed, width } => format!("{}{width}", if *signed { 'i' } else { 'u' }),
        TypeKind::Sized { signed, width } => {
            format!("{}({})", if *signed { 'i' } else { 'u' }, expr(width))
        }
    }
}

fn level(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Binary { op, .. } => precedence(*op),
        ExprKind::Cast { .. } => CAST_PREC,
        _ => u8::MAX,
    }
}

fn wrapped(e: &Expr, parens: bool) -> String {
    if parens {
        format!("({})", expr(e))
    } else {
        expr(e)
    }
}

pub fn expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Int { value, suffix } => match suffix {
            Some((signed, w)) => format!("{value}{}{w}", if *signed { 'i' } else { 'u' }),
            None => value.to_string(),
        },
        ExprKind::Bool(b) => b.to_string(),
        ExprKind::Name(n) => n.clone(),
        ExprKind::Field { port, field } => format!("{port}.{field}"),
        ExprKind::Index { name, index } => format!("{name}[{}]", expr(index)),
        ExprKind::Call { func, args } => {
            let a: Vec<String> = args.iter().map(expr).collect();
            format!("{func}({})", a.join(", "))
        }
        ExprKind::Unary { op, operand } => {
            let sym = if *op == UnaryOp::Not { "!" } else { "-" };
            format!("{sym}{}", wrapped(operand, level(operand) <= CAST_PREC))
        }
        ExprKind::Binary { op, lhs, rhs } => {
            let p = precedence(*op);
            format!(
                "{} {} {}",
                wrapped(lhs, level(lhs) < p),
                op.symbol(),
                wrapped(rhs, level(rhs) <= p)
            )
        }
        ExprKind::Cast { expr: inner, ty: t } => {
            format!("{} as {}", wrapped(inner, level(inner) < CAST_PREC), ty(t))
        }
    }
}
