//! VHDL generation.
//!
//! Each synthesizable process becomes one entity. Process variables and
//! output fields are registered; fields on unclocked buses are driven
//! combinationally from the register contents and the current inputs, and
//! clocked processes read unclocked buses through a one-cycle register in
//! the toplevel. With that arrangement every signal holds, during clock
//! period `c` after reset, the value the simulator records in trace row `c`,
//! which is what the generated testbench checks.

pub mod lint;
mod names;
mod package;
mod process;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write;

use thiserror::Error;

pub use names::{sanitize, Namer};
pub use package::{array_type_name, scalar_type};
pub use process::literal;

use crate::model::{FieldRef, Network};
use crate::types::{Kind, ScalarType};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VhdlError {
    #[error("process `{0}` has no synthesizable body; mark it ignored")]
    HostNotIgnored(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    In,
    Out,
}

/// A toplevel port and the trace column it corresponds to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopPort {
    pub name: String,
    pub column: String,
    pub direction: Direction,
    pub ty: ScalarType,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmittedDesign {
    /// File name to contents.
    pub files: BTreeMap<String, String>,
    pub toplevel: String,
    pub testbench: String,
    pub toplevel_ports: Vec<TopPort>,
    pub warnings: Vec<String>,
}

pub const PACKAGE_FILE: &str = "sme_types.vhdl";
pub const TOPLEVEL_FILE: &str = "toplevel.vhdl";
pub const TESTBENCH_FILE: &str = "testbench.vhdl";

fn field_literal(net: &Network, f: FieldRef) -> String {
    let spec = net.field_spec(f);
    literal(spec.ty, spec.initial.map_or(0, |v| v.bits))
}

pub fn emit_design(net: &Network) -> Result<EmittedDesign, VhdlError> {
    let synth: Vec<_> = net.processes.iter().filter(|p| !p.ignore()).collect();
    if let Some(p) = synth.iter().find(|p| p.compiled.is_none()) {
        return Err(VhdlError::HostNotIgnored(p.name.clone()));
    }

    let mut arrays = BTreeSet::new();
    for p in &synth {
        if p.def.component.is_some() {
            continue;
        }
        for v in &p.compiled.as_ref().unwrap().vars {
            if let Some(n) = v.ty.array_len {
                arrays.insert((v.ty.scalar, n));
            }
        }
    }
    let reserved: Vec<String> = arrays.iter().map(|&(t, n)| array_type_name(t, n)).collect();

    let mut global = Namer::new();
    for r in &reserved {
        global.reserve(r);
    }
    let mut warnings = Vec::new();
    let mut files = BTreeMap::new();
    files.insert(PACKAGE_FILE.to_string(), package::emit_package(&arrays));

    let mut entities = Vec::new();
    for p in &synth {
        let name = global.fresh(&p.name);
        let e = process::emit_entity(net, p, &name, &reserved);
        files.insert(format!("{name}.vhdl"), e.source.clone());
        entities.push((p, e));
    }
    let top = global.fresh(&format!("{}_top", net.name));
    let tb = global.fresh(&format!("{}_tb", net.name));

    // Field classification.
    let read_by_design: BTreeSet<FieldRef> = synth
        .iter()
        .flat_map(|p| net.fields_read_by(p.id))
        .collect();
    let mut top_ports = Vec::new();
    let mut signals = Vec::new();
    let mut names: HashMap<FieldRef, String> = HashMap::new();
    for f in net.fields() {
        let owner_ignored = net.owner(f).map_or(true, |p| net.process(p).ignore());
        let bus = net.bus(f.bus);
        let read_by_ignored = bus.readers.iter().any(|&p| net.process(p).ignore());
        let raw = format!("{}_{}", bus.name, bus.shape.fields[f.field].name);
        let column = net.field_name(f);
        let ty = net.field_spec(f).ty;
        if owner_ignored {
            if read_by_design.contains(&f) {
                let name = global.fresh(&raw);
                names.insert(f, name.clone());
                top_ports.push(TopPort {
                    name,
                    column,
                    direction: Direction::In,
                    ty,
                });
            }
        } else if !read_by_design.contains(&f) && read_by_ignored {
            let name = global.fresh(&raw);
            names.insert(f, name.clone());
            top_ports.push(TopPort {
                name,
                column,
                direction: Direction::Out,
                ty,
            });
        } else {
            let name = global.fresh(&raw);
            names.insert(f, name.clone());
            signals.push(f);
        }
    }
    // Registered copies of unclocked fields read by clocked processes.
    let mut delayed: BTreeMap<FieldRef, String> = BTreeMap::new();
    for p in synth.iter().filter(|p| p.clocked()) {
        for f in net.fields_read_by(p.id) {
            if !net.bus(f.bus).clocked() && !delayed.contains_key(&f) {
                let name = global.fresh(&format!("{}_q", names[&f]));
                delayed.insert(f, name);
            }
        }
    }
    if net.processes.iter().all(|p| !p.ignore()) {
        warnings.push(format!(
            "network `{}` has no ignored processes; the toplevel only has CLK and RST ports",
            net.name
        ));
    }

    let mut s = String::new();
    let _ = writeln!(s, "-- Toplevel for network {}", net.name);
    s.push_str("library ieee;\nuse ieee.std_logic_1164.all;\nuse ieee.numeric_std.all;\nuse work.sme_types.all;\n\n");
    let _ = writeln!(s, "entity {top} is\n  port (\n    CLK : in std_logic;");
    let _ = write!(s, "    RST : in std_logic");
    for p in &top_ports {
        let dir = if p.direction == Direction::In {
            "in"
        } else {
            "out"
        };
        let _ = write!(s, ";\n    {} : {dir} {}", p.name, scalar_type(p.ty));
    }
    let _ = writeln!(s, "\n  );\nend entity {top};\n");
    let _ = writeln!(s, "architecture rtl of {top} is");
    for f in &signals {
        let _ = writeln!(
            s,
            "  signal {} : {} := {};",
            names[f],
            scalar_type(net.field_spec(*f).ty),
            field_literal(net, *f)
        );
    }
    for (f, name) in &delayed {
        let _ = writeln!(
            s,
            "  signal {name} : {} := {};",
            scalar_type(net.field_spec(*f).ty),
            field_literal(net, *f)
        );
    }
    s.push_str("begin\n");
    for (p, e) in &entities {
        let label = global.fresh(&format!("u_{}", e.name));
        let _ = writeln!(s, "\n  {label}: entity work.{}\n    port map (", e.name);
        let _ = write!(s, "      CLK => CLK,\n      RST => RST");
        for port in &e.ports {
            let (pi, fi) = port.binding;
            let f = if port.output {
                FieldRef {
                    bus: p.outputs[pi],
                    field: fi,
                }
            } else {
                FieldRef {
                    bus: p.inputs[pi],
                    field: fi,
                }
            };
            let target = match delayed.get(&f) {
                Some(d) if !port.output && p.clocked() => d,
                _ => &names[&f],
            };
            let _ = write!(s, ",\n      {} => {target}", port.name);
        }
        s.push_str("\n    );\n");
    }
    if !delayed.is_empty() {
        s.push_str("\n  p_delay: process (CLK)\n  begin\n    if rising_edge(CLK) then\n      if RST = '1' then\n");
        for (f, name) in &delayed {
            let _ = writeln!(s, "        {name} <= {};", field_literal(net, *f));
        }
        s.push_str("      else\n");
        for (f, name) in &delayed {
            let _ = writeln!(s, "        {name} <= {};", names[f]);
        }
        s.push_str("      end if;\n    end if;\n  end process p_delay;\n");
    }
    s.push_str("\nend architecture rtl;\n");
    files.insert(TOPLEVEL_FILE.to_string(), s);

    let columns: Vec<String> = net.fields().map(|f| net.field_name(f)).collect();
    files.insert(
        TESTBENCH_FILE.to_string(),
        testbench(&top, &tb, &top_ports, &columns),
    );

    Ok(EmittedDesign {
        files,
        toplevel: top,
        testbench: tb,
        toplevel_ports: top_ports,
        warnings,
    })
}

fn from_word(ty: ScalarType, cell: &str) -> String {
    match ty.kind {
        Kind::Bool => format!("to_sl({cell})"),
        Kind::Unsigned => format!("resize({cell}, {})", ty.width),
        Kind::Signed => format!("signed(resize({cell}, {}))", ty.width),
    }
}

/// A testbench that replays a trace CSV: each row drives the toplevel inputs
/// for one clock period and checks the outputs before the next rising edge.
/// `U` cells are neither driven nor checked.
fn testbench(top: &str, tb: &str, ports: &[TopPort], columns: &[String]) -> String {
    let ncols = columns.len().max(1);
    let col = |p: &TopPort| {
        columns
            .iter()
            .position(|c| *c == p.column)
            .expect("port column")
    };
    let mut s = String::new();
    s.push_str("library ieee;\nuse ieee.std_logic_1164.all;\nuse ieee.numeric_std.all;\nuse std.textio.all;\nuse work.sme_types.all;\n\n");
    let _ = writeln!(
        s,
        "entity {tb} is\n  generic (TRACE : string := \"trace.csv\");\nend entity {tb};\n"
    );
    let _ = writeln!(s, "architecture sim of {tb} is");
    s.push_str("  constant PERIOD : time := 10 ns;\n");
    s.push_str("  signal CLK : std_logic := '0';\n  signal RST : std_logic := '1';\n");
    s.push_str("  signal finished : boolean := false;\n");
    for p in ports {
        let _ = writeln!(
            s,
            "  signal {} : {} := {};",
            p.name,
            scalar_type(p.ty),
            literal(p.ty, 0)
        );
    }
    s.push_str("begin\n\n");
    let _ = write!(
        s,
        "  u_dut: entity work.{top}\n    port map (\n      CLK => CLK,\n      RST => RST"
    );
    for p in ports {
        let _ = write!(s, ",\n      {0} => {0}", p.name);
    }
    s.push_str("\n    );\n\n");
    s.push_str(
        "  p_clock: process
  begin
    while not finished loop
      CLK <= '0';
      wait for PERIOD / 2;
      CLK <= '1';
      wait for PERIOD / 2;
    end loop;
    wait;
  end process p_clock;

  p_stimulus: process
    file f : text open read_mode is TRACE;
    variable l : line;
",
    );
    let _ = writeln!(s, "    variable row : trace_row(0 to {});", ncols - 1);
    let _ = writeln!(
        s,
        "    variable defined : trace_defined(0 to {});",
        ncols - 1
    );
    s.push_str(
        "    variable cycle : natural := 0;
    variable failures : natural := 0;
  begin
    if not endfile(f) then
      readline(f, l);
    end if;
    RST <= '1';
    wait until rising_edge(CLK);
    RST <= '0';
    while not endfile(f) loop
      readline(f, l);
      parse_row(l, row, defined);
",
    );
    for p in ports.iter().filter(|p| p.direction == Direction::In) {
        let i = col(p);
        let _ = writeln!(
            s,
            "      if defined({i}) then\n        {} <= {};\n      end if;",
            p.name,
            from_word(p.ty, &format!("row({i})"))
        );
    }
    s.push_str("      wait until falling_edge(CLK);\n");
    for p in ports.iter().filter(|p| p.direction == Direction::Out) {
        let i = col(p);
        let _ = writeln!(
            s,
            "      if defined({i}) and {} /= {} then\n        report \"cycle \" & integer'image(cycle) & \": {} expected \" & to_dec(row({i})) severity error;\n        failures := failures + 1;\n      end if;",
            p.name,
            from_word(p.ty, &format!("row({i})")),
            p.column
        );
    }
    s.push_str(
        "      wait until rising_edge(CLK);
      cycle := cycle + 1;
    end loop;
    report \"replayed \" & integer'image(cycle) & \" cycles, \" & integer'image(failures) & \" mismatches\" severity note;
    finished <= true;
    wait;
  end process p_stimulus;

end architecture sim;
",
    );
    s
}

#[cfg(test)]
mod tests;
