//! Process generators for common hardware structures.

use std::sync::Arc;

use crate::error::ModelError;
use crate::ir::{Expr, Stmt};
use crate::model::{declare_bus_shape, BusShape, ComponentKind, FieldSpec, ProcessDef};
use crate::types::{clog2, ScalarType, ValueType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BramPorts {
    Single,
    TrueDual,
}

/// Block RAM with one cycle of read latency and read-first behaviour.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BramSpec {
    pub depth: u32,
    pub width: u8,
    pub ports: BramPorts,
}

impl BramSpec {
    pub fn new(depth: u32, width: u8, ports: BramPorts) -> Result<Self, ModelError> {
        if depth == 0 {
            return Err(ModelError::InvalidArrayLength);
        }
        ScalarType::unsigned(width)?;
        Ok(BramSpec {
            depth,
            width,
            ports,
        })
    }

    pub fn read_latency(&self) -> u32 {
        1
    }

    pub fn addr_width(&self) -> u8 {
        clog2(self.depth as u64)
    }

    pub fn port_count(&self) -> usize {
        match self.ports {
            BramPorts::Single => 1,
            BramPorts::TrueDual => 2,
        }
    }

    /// Port name suffixes: `""` for a single port, `_a` / `_b` otherwise.
    pub fn port_suffixes(&self) -> &'static [&'static str] {
        match self.ports {
            BramPorts::Single => &[""],
            BramPorts::TrueDual => &["_a", "_b"],
        }
    }
}

#[derive(Debug, Clone)]
pub struct BramShapes {
    /// `{enable, write_enable, addr, write_data}`
    pub request: Arc<BusShape>,
    /// `{read_data}`
    pub response: Arc<BusShape>,
}

pub fn bram_shapes(spec: &BramSpec) -> BramShapes {
    let request = declare_bus_shape(
        "BramRequest",
        vec![
            FieldSpec::new("enable", ScalarType::BOOL),
            FieldSpec::new("write_enable", ScalarType::BOOL),
            FieldSpec::new("addr", ScalarType::u(spec.addr_width())),
            FieldSpec::new("write_data", ScalarType::u(spec.width)),
        ],
        true,
        true,
    )
    .expect("valid request shape");
    let response = declare_bus_shape(
        "BramResponse",
        vec![FieldSpec::new("read_data", ScalarType::u(spec.width))],
        true,
        true,
    )
    .expect("valid response shape");
    BramShapes { request, response }
}

/// Builds the memory process. Ports are `req`/`resp` for a single-port
/// memory and `req_a`, `req_b`, `resp_a`, `resp_b` for a dual-port one.
/// Inputs are the request buses, outputs the response buses, in port order.
pub fn make_bram(name: &str, spec: &BramSpec) -> (ProcessDef, BramShapes) {
    let shapes = bram_shapes(spec);
    let aw = spec.addr_width();
    let padded = 1u32 << aw;
    let mut def = ProcessDef::new(name, true).var(
        "mem",
        ValueType::array(ScalarType::u(spec.width), padded).expect("non-empty memory"),
        None,
    );
    let suffixes = spec.port_suffixes();
    for s in suffixes {
        def = def.input(&format!("req{s}"), &shapes.request);
    }
    for s in suffixes {
        def = def.output(&format!("resp{s}"), &shapes.response);
    }

    let f = |s: &str, field: &str| Expr::field(&format!("req{s}"), field);
    let mut body = Vec::new();
    for s in suffixes {
        let mut read = Vec::new();
        if spec.depth < padded {
            read.push(Stmt::assert(
                f(s, "addr").lt(Expr::lit(ScalarType::u(aw), spec.depth as i128)),
                &format!("address out of range on port req{s}"),
            ));
        }
        read.push(Stmt::write(
            &format!("resp{s}"),
            "read_data",
            Expr::index("mem", f(s, "addr")),
        ));
        body.push(Stmt::when(f(s, "enable"), read));
    }
    let writing = |s: &str| f(s, "enable").and(f(s, "write_enable"));
    if spec.ports == BramPorts::TrueDual {
        body.push(Stmt::when(
            writing("_a").and(writing("_b")),
            vec![Stmt::assert(
                f("_a", "addr").ne(f("_b", "addr")),
                "write collision between ports",
            )],
        ));
    }
    // All reads above happen before any write, so a read of an address
    // written in the same cycle returns the old word.
    for s in suffixes {
        body.push(Stmt::when(
            writing(s),
            vec![Stmt::set_index("mem", f(s, "addr"), f(s, "write_data"))],
        ));
    }
    def = def.body(body);
    def.component = Some(ComponentKind::Bram(spec.clone()));
    (def, shapes)
}

/// Clocked pass-through delaying every field of `shape` by one cycle.
pub fn make_register(name: &str, shape: &Arc<BusShape>) -> ProcessDef {
    let body = shape
        .fields
        .iter()
        .map(|fs| Stmt::write("o", &fs.name, Expr::field("i", &fs.name)))
        .collect();
    ProcessDef::new(name, true)
        .input("i", shape)
        .output("o", shape)
        .body(body)
}
