//! Entity emission for a single process instance.

use std::collections::HashMap;
use std::fmt::Write;

use super::names::Namer;
use super::package::{array_type_name, scalar_type};
use crate::components::BramSpec;
use crate::elab::{CExpr, CStmt, CompiledBody, VarSlot};
use crate::model::{Network, ProcessInstance};
use crate::types::{BinaryOp, Kind, ScalarType, UnaryOp, ValueType};

/// One entity port bound to a bus field.
#[derive(Debug, Clone)]
pub struct EntityPort {
    pub name: String,
    pub ty: ScalarType,
    pub output: bool,
    /// `(port index, field index)` on the process.
    pub binding: (usize, usize),
}

#[derive(Debug, Clone)]
pub struct EmittedEntity {
    pub name: String,
    pub ports: Vec<EntityPort>,
    pub source: String,
}

pub fn literal(ty: ScalarType, bits: u64) -> String {
    let bits = ty.wrap(bits);
    match ty.kind {
        Kind::Bool => if bits != 0 { "'1'" } else { "'0'" }.into(),
        Kind::Unsigned if bits < 1 << 30 => format!("to_unsigned({bits}, {})", ty.width),
        Kind::Signed if ty.to_i128(bits).unsigned_abs() < 1 << 30 => {
            format!("to_signed({}, {})", ty.to_i128(bits), ty.width)
        }
        _ => {
            let digits: String = (0..ty.width)
                .rev()
                .map(|i| if bits >> i & 1 == 1 { '1' } else { '0' })
                .collect();
            let q = if ty.kind == Kind::Signed {
                "signed"
            } else {
                "unsigned"
            };
            format!("{q}'(\"{digits}\")")
        }
    }
}

fn value_type(ty: &ValueType) -> String {
    match ty.array_len {
        Some(n) => array_type_name(ty.scalar, n),
        None => scalar_type(ty.scalar),
    }
}

fn initial_of(v: &VarSlot) -> String {
    let bits = v.initial.map_or(0, |i| i.bits);
    let lit = literal(v.ty.scalar, bits);
    match v.ty.array_len {
        Some(_) => format!("(others => {lit})"),
        None => lit,
    }
}

fn header(out: &mut String) {
    out.push_str("library ieee;\nuse ieee.std_logic_1164.all;\nuse ieee.numeric_std.all;\nuse work.sme_types.all;\n\n");
}

fn entity_decl(out: &mut String, name: &str, ports: &[EntityPort]) {
    let _ = writeln!(out, "entity {name} is\n  port (\n    CLK : in std_logic;");
    let _ = write!(out, "    RST : in std_logic");
    for p in ports {
        let dir = if p.output { "out" } else { "in" };
        let _ = write!(out, ";\n    {} : {dir} {}", p.name, scalar_type(p.ty));
    }
    let _ = writeln!(out, "\n  );\nend entity {name};\n");
}

fn entity_ports(
    net: &Network,
    inst: &ProcessInstance,
    body: &CompiledBody,
    namer: &mut Namer,
) -> Vec<EntityPort> {
    let mut ports = Vec::new();
    for &(p, f) in &body.reads {
        let port = &inst.def.inputs[p];
        let spec = &port.shape.fields[f];
        ports.push(EntityPort {
            name: namer.fresh(&format!("{}_{}", port.name, spec.name)),
            ty: spec.ty,
            output: false,
            binding: (p, f),
        });
    }
    for &(p, f) in &inst.writes {
        let port = &inst.def.outputs[p];
        let spec = &port.shape.fields[f];
        ports.push(EntityPort {
            name: namer.fresh(&format!("{}_{}", port.name, spec.name)),
            ty: spec.ty,
            output: true,
            binding: (p, f),
        });
    }
    let _ = net;
    ports
}

fn field_initial(inst: &ProcessInstance, p: usize, f: usize) -> String {
    let spec = &inst.def.outputs[p].shape.fields[f];
    literal(spec.ty, spec.initial.map_or(0, |v| v.bits))
}

/// Translates compiled statements. Reads of input fields, variables and
/// loop counters resolve through the name tables; writes go to `out_names`
/// with either `<=` (signals) or `:=` (variables).
struct Translator<'a> {
    body: &'a CompiledBody,
    vars: HashMap<u32, (&'a VarSlot, String)>,
    inputs: HashMap<(u32, u32), (ScalarType, String)>,
    outputs: HashMap<(u32, u32), String>,
    output_types: HashMap<(u32, u32), ScalarType>,
    output_assign: &'static str,
    /// Assertions become comments in combinational processes, where they
    /// would also fire on transient values.
    checked_asserts: bool,
}

impl<'a> Translator<'a> {
    fn expr_type(&self, e: &CExpr) -> Option<ScalarType> {
        match e {
            CExpr::Const(_) => None,
            CExpr::Var(s) => Some(self.vars[s].0.ty.scalar),
            CExpr::Elem { base, .. } => Some(self.vars[base].0.ty.scalar),
            CExpr::Field { port, field } => Some(self.inputs[&(*port, *field)].0),
            CExpr::Unary { ty, .. } => Some(*ty),
            CExpr::Binary { op, ty, .. } => Some(if op.is_comparison() || op.is_logical() {
                ScalarType::BOOL
            } else {
                *ty
            }),
            CExpr::Cast { to, .. } => Some(*to),
        }
    }

    fn loop_var(&self, e: &CExpr) -> Option<&str> {
        match e {
            CExpr::Var(s) if self.vars[s].0.loop_range.is_some() => Some(&self.vars[s].1),
            _ => None,
        }
    }

    /// An integer-valued index expression.
    fn index(&self, e: &CExpr) -> String {
        if let CExpr::Const(v) = e {
            return v.to_string();
        }
        if let Some(name) = self.loop_var(e) {
            return name.to_string();
        }
        format!("to_integer({})", self.value(e, ScalarType::u(64)))
    }

    /// A boolean-valued VHDL expression for a bool IR expression.
    fn cond(&self, e: &CExpr) -> String {
        match e {
            CExpr::Const(v) => if *v != 0 { "true" } else { "false" }.into(),
            CExpr::Binary { op, ty, a, b } if op.is_comparison() => {
                let sym = match op {
                    BinaryOp::Eq => "=",
                    BinaryOp::Ne => "/=",
                    BinaryOp::Lt => "<",
                    BinaryOp::Le => "<=",
                    BinaryOp::Gt => ">",
                    _ => ">=",
                };
                format!("{} {sym} {}", self.value(a, *ty), self.value(b, *ty))
            }
            CExpr::Binary {
                op: op @ (BinaryOp::And | BinaryOp::Or),
                a,
                b,
                ..
            } => {
                let word = if *op == BinaryOp::And { "and" } else { "or" };
                format!("({}) {word} ({})", self.cond(a), self.cond(b))
            }
            CExpr::Unary {
                op: UnaryOp::Not,
                ty,
                a,
            } if ty.is_bool() => format!("not ({})", self.cond(a)),
            _ => format!("{} = '1'", self.value(e, ScalarType::BOOL)),
        }
    }

    /// A VHDL expression of the mapped type of `ty`. `ty` only matters for
    /// literals, whose type comes from context.
    fn value(&self, e: &CExpr, ty: ScalarType) -> String {
        match e {
            CExpr::Const(v) => literal(ty, *v),
            CExpr::Var(s) => {
                let (slot, name) = &self.vars[s];
                if slot.loop_range.is_some() {
                    let t = slot.ty.scalar;
                    match t.kind {
                        Kind::Signed => format!("to_signed({name}, {})", t.width),
                        _ => format!("to_unsigned({name}, {})", t.width),
                    }
                } else {
                    name.clone()
                }
            }
            CExpr::Elem { base, index, .. } => {
                format!("{}({})", self.vars[base].1, self.index(index))
            }
            CExpr::Field { port, field } => self.inputs[&(*port, *field)].1.clone(),
            CExpr::Unary { op, ty, a } => {
                let a = self.value(a, *ty);
                match (op, ty.kind) {
                    (UnaryOp::Not, _) => format!("(not {a})"),
                    (UnaryOp::Neg, Kind::Signed) => format!("(-{a})"),
                    (UnaryOp::Neg, _) => format!("(0 - {a})"),
                }
            }
            CExpr::Binary { op, ty, a, b } => {
                if op.is_comparison() || op.is_logical() {
                    if op.is_logical() && ty.is_bool() {
                        let word = if *op == BinaryOp::And { "and" } else { "or" };
                        return format!("({} {word} {})", self.value(a, *ty), self.value(b, *ty));
                    }
                    return format!("to_sl({})", self.cond(e));
                }
                if op.is_shift() {
                    let amount = match &**b {
                        CExpr::Const(v) => (*v).min(127).to_string(),
                        other => match self.loop_var(other) {
                            Some(n) => n.to_string(),
                            None => {
                                let bt = self.expr_type(other).unwrap_or(ScalarType::u(64));
                                format!("shamt({})", self.value(other, bt))
                            }
                        },
                    };
                    let f = if *op == BinaryOp::Shl {
                        "shift_left"
                    } else {
                        "shift_right"
                    };
                    return format!("{f}({}, {amount})", self.value(a, *ty));
                }
                let (x, y) = (self.value(a, *ty), self.value(b, *ty));
                match op {
                    BinaryOp::Mul => format!("mul_wrap({x}, {y})"),
                    _ => {
                        let sym = match op {
                            BinaryOp::Add => "+",
                            BinaryOp::Sub => "-",
                            BinaryOp::Div => "/",
                            BinaryOp::Rem => "rem",
                            BinaryOp::BitAnd => "and",
                            BinaryOp::BitOr => "or",
                            _ => "xor",
                        };
                        format!("({x} {sym} {y})")
                    }
                }
            }
            CExpr::Cast { from, to, a } => {
                let x = self.value(a, *from);
                match (from.kind, to.kind) {
                    (_, Kind::Bool) if from.is_bool() => x,
                    (Kind::Signed, Kind::Bool) => format!("to_sl(unsigned({x}))"),
                    (_, Kind::Bool) => format!("to_sl({x})"),
                    (Kind::Bool, Kind::Unsigned) => format!("to_u({x}, {})", to.width),
                    (Kind::Bool, _) => format!("to_s({x}, {})", to.width),
                    (Kind::Unsigned, Kind::Unsigned) if from.width == to.width => x,
                    (Kind::Unsigned, Kind::Unsigned) => format!("resize({x}, {})", to.width),
                    (Kind::Unsigned, _) => format!("signed(resize({x}, {}))", to.width),
                    (Kind::Signed, Kind::Signed) if from.width == to.width => x,
                    (Kind::Signed, Kind::Signed) => format!("wrap_s({x}, {})", to.width),
                    (Kind::Signed, _) => format!("unsigned(wrap_s({x}, {}))", to.width),
                }
            }
        }
    }

    fn stmts(&self, out: &mut String, stmts: &[CStmt], depth: usize) {
        if stmts.is_empty() {
            let _ = writeln!(out, "{}null;", "  ".repeat(depth));
        }
        for s in stmts {
            self.stmt(out, s, depth);
        }
    }

    fn stmt(&self, out: &mut String, s: &CStmt, depth: usize) {
        let pad = "  ".repeat(depth);
        match s {
            CStmt::SetVar { slot, value } => {
                let (v, name) = &self.vars[slot];
                let _ = writeln!(out, "{pad}{name} := {};", self.value(value, v.ty.scalar));
            }
            CStmt::SetElem {
                base, index, value, ..
            } => {
                let (v, name) = &self.vars[base];
                let _ = writeln!(
                    out,
                    "{pad}{name}({}) := {};",
                    self.index(index),
                    self.value(value, v.ty.scalar)
                );
            }
            CStmt::SetField { port, field, value } => {
                let name = &self.outputs[&(*port, *field)];
                let ty = self.field_type(*port, *field);
                let _ = writeln!(
                    out,
                    "{pad}{name} {} {};",
                    self.output_assign,
                    self.value(value, ty)
                );
            }
            CStmt::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let _ = writeln!(out, "{pad}if {} then", self.cond(cond));
                self.stmts(out, then_branch, depth + 1);
                let mut rest = else_branch;
                loop {
                    match rest.as_slice() {
                        [] => break,
                        [CStmt::If {
                            cond,
                            then_branch,
                            else_branch,
                        }] => {
                            let _ = writeln!(out, "{pad}elsif {} then", self.cond(cond));
                            self.stmts(out, then_branch, depth + 1);
                            rest = else_branch;
                        }
                        other => {
                            let _ = writeln!(out, "{pad}else");
                            self.stmts(out, other, depth + 1);
                            break;
                        }
                    }
                }
                let _ = writeln!(out, "{pad}end if;");
            }
            CStmt::For {
                slot,
                start,
                end,
                body,
            } => {
                let name = &self.vars[slot].1;
                let (lo, hi) = (*start as i64, *end as i64 - 1);
                let _ = writeln!(out, "{pad}for {name} in {lo} to {hi} loop");
                self.stmts(out, body, depth + 1);
                let _ = writeln!(out, "{pad}end loop;");
            }
            CStmt::Assert { cond, message } => {
                let msg = self.body.messages[*message as usize].replace('"', "\"\"");
                if self.checked_asserts {
                    let _ = writeln!(
                        out,
                        "{pad}assert {} report \"{msg}\" severity failure;",
                        self.cond(cond)
                    );
                } else {
                    let _ = writeln!(out, "{pad}-- assert {}: {msg}", self.cond(cond));
                }
            }
        }
    }

    fn field_type(&self, port: u32, field: u32) -> ScalarType {
        self.output_types[&(port, field)]
    }
}

/// Emits the entity for `inst`. `arrays` must already contain every array
/// type the process uses; `reserved` lists package-level names.
pub fn emit_entity(
    net: &Network,
    inst: &ProcessInstance,
    entity: &str,
    reserved: &[String],
) -> EmittedEntity {
    let body = inst.compiled.as_deref().expect("synthesizable process");
    let mut namer = Namer::new();
    for r in reserved {
        namer.reserve(r);
    }
    namer.reserve(entity);
    let ports = entity_ports(net, inst, body, &mut namer);
    let source = match &inst.def.component {
        Some(crate::model::ComponentKind::Bram(spec)) => bram(inst, entity, &ports, spec),
        None => generic(net, inst, body, entity, &ports, &mut namer),
    };
    EmittedEntity {
        name: entity.to_string(),
        ports,
        source,
    }
}

fn generic(
    net: &Network,
    inst: &ProcessInstance,
    body: &CompiledBody,
    entity: &str,
    ports: &[EntityPort],
    namer: &mut Namer,
) -> String {
    let drives_unclocked = inst
        .writes
        .iter()
        .any(|&(p, _)| !net.bus(inst.outputs[p]).clocked());
    let single = inst.clocked() && !drives_unclocked;

    let mut vars = HashMap::new();
    for v in &body.vars {
        vars.insert(v.offset, (v, namer.fresh(&v.name)));
    }
    let mut inputs = HashMap::new();
    let mut outputs = HashMap::new();
    let mut output_types = HashMap::new();
    for p in ports {
        let key = (p.binding.0 as u32, p.binding.1 as u32);
        if p.output {
            let name = if single {
                p.name.clone()
            } else {
                namer.fresh(&format!("{}_v", p.name))
            };
            outputs.insert(key, name);
            output_types.insert(key, p.ty);
        } else {
            inputs.insert(key, (p.ty, p.name.clone()));
        }
    }
    let tr = Translator {
        body,
        vars,
        inputs,
        outputs,
        output_types,
        output_assign: if single { "<=" } else { ":=" },
        checked_asserts: single,
    };

    let by_offset = |v: &VarSlot| tr.vars[&v.offset].1.clone();
    let constants: Vec<&VarSlot> = body
        .vars
        .iter()
        .filter(|v| v.loop_range.is_none() && v.constant)
        .collect();
    let state: Vec<&VarSlot> = body
        .vars
        .iter()
        .filter(|v| v.loop_range.is_none() && !v.constant)
        .collect();

    let mut out = String::new();
    let _ = writeln!(out, "-- Process {}", inst.name);
    header(&mut out);
    entity_decl(&mut out, entity, ports);
    let _ = writeln!(out, "architecture rtl of {entity} is");
    for v in &constants {
        let _ = writeln!(
            out,
            "  constant {} : {} := {};",
            by_offset(v),
            value_type(&v.ty),
            initial_of(v)
        );
    }

    if single {
        let _ = writeln!(out, "begin\n\n  p_main: process (CLK)");
        for v in &state {
            let _ = writeln!(
                out,
                "    variable {} : {} := {};",
                by_offset(v),
                value_type(&v.ty),
                initial_of(v)
            );
        }
        out.push_str("  begin\n    if rising_edge(CLK) then\n      if RST = '1' then\n");
        for v in &state {
            let _ = writeln!(out, "        {} := {};", by_offset(v), initial_of(v));
        }
        for p in ports.iter().filter(|p| p.output) {
            let _ = writeln!(
                out,
                "        {} <= {};",
                p.name,
                field_initial(inst, p.binding.0, p.binding.1)
            );
        }
        out.push_str("      else\n");
        tr.stmts(&mut out, &body.stmts, 4);
        out.push_str(
            "      end if;\n    end if;\n  end process p_main;\n\nend architecture rtl;\n",
        );
        return out;
    }

    // Registered state and output latches, next-state logic in `comb`.
    struct Reg {
        cur: String,
        next: String,
        ty: String,
        init: String,
    }
    let mut regs = Vec::new();
    for v in &state {
        let base = by_offset(v);
        regs.push(Reg {
            cur: namer.fresh(&format!("r_{base}")),
            next: namer.fresh(&format!("n_{base}")),
            ty: value_type(&v.ty),
            init: initial_of(v),
        });
    }
    let outs: Vec<&EntityPort> = ports.iter().filter(|p| p.output).collect();
    for p in &outs {
        regs.push(Reg {
            cur: namer.fresh(&format!("r_{}", p.name)),
            next: namer.fresh(&format!("n_{}", p.name)),
            ty: scalar_type(p.ty),
            init: field_initial(inst, p.binding.0, p.binding.1),
        });
    }
    for r in &regs {
        let _ = writeln!(out, "  signal {} : {} := {};", r.cur, r.ty, r.init);
        let _ = writeln!(out, "  signal {} : {};", r.next, r.ty);
    }
    out.push_str("begin\n\n");

    let mut sens: Vec<&str> = ports
        .iter()
        .filter(|p| !p.output)
        .map(|p| p.name.as_str())
        .collect();
    sens.extend(regs.iter().map(|r| r.cur.as_str()));
    if sens.is_empty() {
        sens.push("CLK");
    }
    let _ = writeln!(out, "  p_comb: process ({})", sens.join(", "));
    let locals: Vec<(String, String)> = state
        .iter()
        .map(|v| (by_offset(v), value_type(&v.ty)))
        .chain(outs.iter().map(|p| {
            let key = (p.binding.0 as u32, p.binding.1 as u32);
            (tr.outputs[&key].clone(), scalar_type(p.ty))
        }))
        .collect();
    for (name, ty) in &locals {
        let _ = writeln!(out, "    variable {name} : {ty};");
    }
    out.push_str("  begin\n");
    for ((name, _), r) in locals.iter().zip(&regs) {
        let _ = writeln!(out, "    {name} := {};", r.cur);
    }
    tr.stmts(&mut out, &body.stmts, 2);
    for ((name, _), r) in locals.iter().zip(&regs) {
        let _ = writeln!(out, "    {} <= {name};", r.next);
    }
    out.push_str("  end process p_comb;\n\n");

    out.push_str(
        "  p_regs: process (CLK)\n  begin\n    if rising_edge(CLK) then\n      if RST = '1' then\n",
    );
    for r in &regs {
        let _ = writeln!(out, "        {} <= {};", r.cur, r.init);
    }
    out.push_str("      else\n");
    for r in &regs {
        let _ = writeln!(out, "        {} <= {};", r.cur, r.next);
    }
    out.push_str("      end if;\n    end if;\n  end process p_regs;\n\n");

    let out_regs = &regs[state.len()..];
    for (p, r) in outs.iter().zip(out_regs) {
        let clocked = net.bus(inst.outputs[p.binding.0]).clocked();
        let src = if clocked { &r.cur } else { &r.next };
        let _ = writeln!(out, "  {} <= {src};", p.name);
    }
    out.push_str("\nend architecture rtl;\n");
    out
}

fn bram(inst: &ProcessInstance, entity: &str, ports: &[EntityPort], spec: &BramSpec) -> String {
    let find = |output: bool, p: usize, f: usize| {
        ports
            .iter()
            .find(|x| x.output == output && x.binding == (p, f))
            .map(|x| x.name.as_str())
            .expect("memory port bound")
    };
    let aw = spec.addr_width();
    let padded = 1u64 << aw;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "-- Block RAM {}: {} x {} bits",
        inst.name, spec.depth, spec.width
    );
    header(&mut out);
    entity_decl(&mut out, entity, ports);
    let _ = writeln!(out, "architecture rtl of {entity} is");
    let _ = writeln!(
        out,
        "  type mem_array_t is array (0 to {}) of unsigned({} downto 0);",
        padded - 1,
        spec.width - 1
    );
    out.push_str("  signal mem_array : mem_array_t := (others => (others => '0'));\nbegin\n\n");
    out.push_str(
        "  p_ram: process (CLK)\n  begin\n    if rising_edge(CLK) then\n      if RST = '1' then\n",
    );
    let n = spec.port_count();
    for i in 0..n {
        let _ = writeln!(
            out,
            "        {} <= {};",
            find(true, i, 0),
            field_initial(inst, i, 0)
        );
    }
    out.push_str("      else\n");
    for (i, s) in spec.port_suffixes().iter().enumerate() {
        let (en, addr) = (find(false, i, 0), find(false, i, 2));
        let _ = writeln!(out, "        if {en} = '1' then");
        if (spec.depth as u64) < padded {
            let _ = writeln!(
                out,
                "          assert to_integer({addr}) < {} report \"address out of range on port req{s}\" severity failure;",
                spec.depth
            );
        }
        let _ = writeln!(
            out,
            "          {} <= mem_array(to_integer({addr}));",
            find(true, i, 0)
        );
        out.push_str("        end if;\n");
    }
    let writing = |i: usize| {
        format!(
            "{} = '1' and {} = '1'",
            find(false, i, 0),
            find(false, i, 1)
        )
    };
    if n == 2 {
        let _ = writeln!(out, "        if {} and {} then", writing(0), writing(1));
        let _ = writeln!(
            out,
            "          assert {} /= {} report \"write collision between ports\" severity failure;",
            find(false, 0, 2),
            find(false, 1, 2)
        );
        out.push_str("        end if;\n");
    }
    for i in 0..n {
        let _ = writeln!(out, "        if {} then", writing(i));
        let _ = writeln!(
            out,
            "          mem_array(to_integer({})) <= {};",
            find(false, i, 2),
            find(false, i, 3)
        );
        out.push_str("        end if;\n");
    }
    out.push_str("      end if;\n    end if;\n  end process p_ram;\n\nend architecture rtl;\n");
    out
}
