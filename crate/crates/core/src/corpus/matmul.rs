//! Pipelined matrix multiplication C = A * B over three block RAMs.
//!
//! `AccessGenerator` streams one (A, B) address pair per cycle, row-major
//! over C with the inner dimension fastest. Data passes through a register
//! stage, `Multiplier` and `Accumulator`, while a register chain carries the
//! C address alongside. `Accumulator` writes its sum whenever the C address
//! changes or the stream ends.

use std::cell::RefCell;
use std::rc::Rc;
use std::sync::Arc;

use crate::components::{make_bram, make_register, BramPorts, BramSpec};
use crate::error::ModelError;
use crate::ir::{Expr, Stmt};
use crate::model::{declare_bus_shape, BusShape, FieldSpec, Network, ProcessDef};
use crate::sim::{Driver, HostIo, SimConfig, SimError, SimReport, Simulator, Step};
use crate::types::ScalarType;

use super::HOST;

/// Cycles between the last address pair and `MatrixMetaC.valid` being
/// visible; C is fully written by then.
pub const DRAIN: u64 = 5;
const META: ScalarType = ScalarType {
    kind: crate::types::Kind::Unsigned,
    width: 16,
};

fn f(port: &str, field: &str) -> Expr {
    Expr::field(port, field)
}

fn w(port: &str, field: &str, e: Expr) -> Stmt {
    Stmt::write(port, field, e)
}

fn m(v: i128) -> Expr {
    Expr::lit(META, v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatrixMeta {
    pub valid: bool,
    pub base: u64,
    pub stride: u64,
    pub height: u64,
    pub width: u64,
}

impl MatrixMeta {
    /// Dense row-major matrix at address 0.
    pub fn dense(height: u64, width: u64) -> Self {
        MatrixMeta {
            valid: true,
            base: 0,
            stride: width,
            height,
            width,
        }
    }
}

pub fn matrix_meta_shape() -> Arc<BusShape> {
    declare_bus_shape(
        "MatrixMeta",
        ["valid", "base", "stride", "height", "width"]
            .iter()
            .map(|n| {
                FieldSpec::new(
                    n,
                    if *n == "valid" {
                        ScalarType::BOOL
                    } else {
                        META
                    },
                )
            })
            .collect(),
        true,
        true,
    )
    .expect("valid meta shape")
}

fn dims_error(message: &str) -> ModelError {
    ModelError::Body {
        process: "AccessGenerator".into(),
        message: message.into(),
    }
}

/// A is `rows x inner`, B is `inner x cols`; elements are `width` bits.
pub fn build_matmul(rows: u32, inner: u32, cols: u32, width: u8) -> Result<Network, ModelError> {
    if rows == 0 || inner == 0 || cols == 0 {
        return Err(dims_error("matrix dimensions must be at least 1"));
    }
    if [rows * inner, inner * cols, rows * cols]
        .iter()
        .any(|&d| d > u16::MAX as u32)
    {
        return Err(dims_error("matrices exceed the 16-bit address space"));
    }
    let spec_a = BramSpec::new(rows * inner, width, BramPorts::TrueDual)?;
    let spec_b = BramSpec::new(inner * cols, width, BramPorts::TrueDual)?;
    let spec_c = BramSpec::new(rows * cols, width, BramPorts::TrueDual)?;
    let (ram_a, sa) = make_bram("RamA", &spec_a);
    let (ram_b, sb) = make_bram("RamB", &spec_b);
    let (ram_c, sc) = make_bram("RamC", &spec_c);
    let meta = matrix_meta_shape();
    let aw_c = ScalarType::u(spec_c.addr_width());
    let data_ty = ScalarType::unsigned(width)?;
    let addr = declare_bus_shape(
        "CAddr",
        vec![
            FieldSpec::new("valid", ScalarType::BOOL),
            FieldSpec::new("addr", aw_c),
        ],
        true,
        true,
    )?;
    let product = declare_bus_shape(
        "Product",
        vec![FieldSpec::new("value", data_ty)],
        true,
        true,
    )?;

    let both_valid = f("ma", "valid").and(f("mb", "valid"));
    let fits = |p: &str, depth: u32| {
        f(p, "base")
            .add(f(p, "height").sub(m(1)).mul(f(p, "stride")))
            .add(f(p, "width"))
            .lt(m(depth as i128 + 1))
    };
    let start = vec![
        Stmt::assert(f("ma", "width").eq(f("mb", "height")), "dimension mismatch"),
        Stmt::assert(
            f("ma", "height")
                .ne(m(0))
                .and(f("ma", "width").ne(m(0)))
                .and(f("mb", "width").ne(m(0))),
            "empty matrix",
        ),
        Stmt::assert(fits("ma", spec_a.depth), "matrix A exceeds its memory"),
        Stmt::assert(fits("mb", spec_b.depth), "matrix B exceeds its memory"),
        Stmt::assert(
            f("ma", "height")
                .mul(f("mb", "width"))
                .lt(m(spec_c.depth as i128 + 1)),
            "matrix C exceeds its memory",
        ),
        Stmt::set("running", Expr::bool(true)),
        Stmt::set("i", m(0)),
        Stmt::set("j", m(0)),
        Stmt::set("k", m(0)),
        w("mc", "valid", Expr::bool(false)),
    ];
    let advance = Stmt::if_else(
        Expr::var("k").eq(f("ma", "width").sub(m(1))),
        vec![
            Stmt::set("k", m(0)),
            Stmt::if_else(
                Expr::var("j").eq(f("mb", "width").sub(m(1))),
                vec![
                    Stmt::set("j", m(0)),
                    Stmt::if_else(
                        Expr::var("i").eq(f("ma", "height").sub(m(1))),
                        vec![
                            Stmt::set("running", Expr::bool(false)),
                            Stmt::set("finished", Expr::bool(true)),
                            Stmt::set("drain", Expr::lit(ScalarType::u(4), DRAIN as i128)),
                        ],
                        vec![Stmt::set("i", Expr::var("i").add(m(1)))],
                    ),
                ],
                vec![Stmt::set("j", Expr::var("j").add(m(1)))],
            ),
        ],
        vec![Stmt::set("k", Expr::var("k").add(m(1)))],
    );
    let emit = vec![
        w(
            "ra",
            "addr",
            Expr::cast(
                ScalarType::u(spec_a.addr_width()),
                f("ma", "base")
                    .add(Expr::var("i").mul(f("ma", "stride")))
                    .add(Expr::var("k")),
            ),
        ),
        w(
            "rb",
            "addr",
            Expr::cast(
                ScalarType::u(spec_b.addr_width()),
                f("mb", "base")
                    .add(Expr::var("k").mul(f("mb", "stride")))
                    .add(Expr::var("j")),
            ),
        ),
        w(
            "addr",
            "addr",
            Expr::cast(
                aw_c,
                Expr::var("i").mul(f("mb", "width")).add(Expr::var("j")),
            ),
        ),
        advance,
    ];
    let drain = vec![Stmt::when(
        Expr::var("drain").ne(Expr::lit(ScalarType::u(4), 0)),
        vec![
            Stmt::set(
                "drain",
                Expr::var("drain").sub(Expr::lit(ScalarType::u(4), 1)),
            ),
            Stmt::when(
                Expr::var("drain").eq(Expr::lit(ScalarType::u(4), 0)),
                vec![
                    w("mc", "valid", Expr::bool(true)),
                    w("mc", "base", m(0)),
                    w("mc", "stride", f("mb", "width")),
                    w("mc", "height", f("ma", "height")),
                    w("mc", "width", f("mb", "width")),
                ],
            ),
        ],
    )];
    let access = ProcessDef::new("AccessGenerator", true)
        .input("ma", &meta)
        .input("mb", &meta)
        .output("mc", &meta)
        .output("ra", &sa.request)
        .output("rb", &sb.request)
        .output("addr", &addr)
        .var("running", ScalarType::BOOL, None)
        .var("finished", ScalarType::BOOL, None)
        .var("i", META, None)
        .var("j", META, None)
        .var("k", META, None)
        .var("drain", ScalarType::u(4), None)
        .body(vec![
            Stmt::when(
                Expr::not(both_valid.clone()),
                vec![Stmt::set("finished", Expr::bool(false))],
            ),
            Stmt::when(
                Expr::not(Expr::var("running"))
                    .and(Expr::not(Expr::var("finished")))
                    .and(both_valid),
                start,
            ),
            w("ra", "enable", Expr::var("running")),
            w("ra", "write_enable", Expr::bool(false)),
            w("rb", "enable", Expr::var("running")),
            w("rb", "write_enable", Expr::bool(false)),
            w("addr", "valid", Expr::var("running")),
            Stmt::if_else(Expr::var("running"), emit, drain),
        ]);

    let multiplier = ProcessDef::new("Multiplier", true)
        .input("a", &sa.response)
        .input("b", &sb.response)
        .output("product", &product)
        .body(vec![w(
            "product",
            "value",
            f("a", "read_data").mul(f("b", "read_data")),
        )]);

    let changed = Expr::not(f("addr", "valid")).or(f("addr", "addr").ne(Expr::var("cur")));
    let accumulator = ProcessDef::new("Accumulator", true)
        .input("product", &product)
        .input("addr", &addr)
        .output("rc", &sc.request)
        .var("acc", data_ty, None)
        .var("cur", aw_c, None)
        .var("cur_valid", ScalarType::BOOL, None)
        .body(vec![
            w("rc", "enable", Expr::bool(false)),
            w("rc", "write_enable", Expr::bool(false)),
            Stmt::when(
                Expr::var("cur_valid").and(changed),
                vec![
                    w("rc", "enable", Expr::bool(true)),
                    w("rc", "write_enable", Expr::bool(true)),
                    w("rc", "addr", Expr::var("cur")),
                    w("rc", "write_data", Expr::var("acc")),
                ],
            ),
            Stmt::when(
                f("addr", "valid"),
                vec![
                    Stmt::if_else(
                        Expr::var("cur_valid").and(f("addr", "addr").eq(Expr::var("cur"))),
                        vec![Stmt::set(
                            "acc",
                            Expr::var("acc").add(f("product", "value")),
                        )],
                        vec![Stmt::set("acc", f("product", "value"))],
                    ),
                    Stmt::set("cur", f("addr", "addr")),
                ],
            ),
            Stmt::set("cur_valid", f("addr", "valid")),
        ]);

    let mut net = Network::new("matmul");
    let meta_a = net.instantiate_bus_named(&meta, "MatrixMetaA");
    let meta_b = net.instantiate_bus_named(&meta, "MatrixMetaB");
    let meta_c = net.instantiate_bus_named(&meta, "MatrixMetaC");
    let mut ports = Vec::new();
    for (name, s) in [("A", &sa), ("B", &sb), ("C", &sc)] {
        let req = net.instantiate_bus_named(&s.request, &format!("{name}portA"));
        let resp = net.instantiate_bus_named(&s.response, &format!("{name}portAData"));
        let ireq = net.instantiate_bus_named(&s.request, &format!("Ram{name}ReqB"));
        let iresp = net.instantiate_bus_named(&s.response, &format!("Ram{name}RespB"));
        ports.push((req, resp, ireq, iresp));
    }
    let data_a = net.instantiate_bus_named(&sa.response, "DataA");
    let data_b = net.instantiate_bus_named(&sb.response, "DataB");
    let addrs: Vec<_> = (0..4)
        .map(|i| net.instantiate_bus_named(&addr, &format!("CAddr{i}")))
        .collect();
    let product_bus = net.instantiate_bus_named(&product, "Product");

    for (ram, p) in [ram_a, ram_b, ram_c].into_iter().zip(&ports) {
        net.add_process(ram, &[p.0, p.2], &[p.1, p.3])?;
    }
    net.add_process(
        access,
        &[meta_a, meta_b],
        &[meta_c, ports[0].2, ports[1].2, addrs[0]],
    )?;
    net.add_process_named(
        "Reg0",
        make_register("Reg", &sa.response),
        &[ports[0].3],
        &[data_a],
    )?;
    net.add_process_named(
        "Reg1",
        make_register("Reg", &sb.response),
        &[ports[1].3],
        &[data_b],
    )?;
    for i in 0..3 {
        net.add_process_named(
            &format!("Reg{}", i + 2),
            make_register("Reg", &addr),
            &[addrs[i]],
            &[addrs[i + 1]],
        )?;
    }
    net.add_process(multiplier, &[data_a, data_b], &[product_bus])?;
    net.add_process(accumulator, &[product_bus, addrs[3]], &[ports[2].2])?;

    let mut host = ProcessDef::simulation(HOST)
        .output("meta_a", &meta)
        .output("meta_b", &meta);
    for (name, s) in [("a", &sa), ("b", &sb), ("c", &sc)] {
        host = host.output(&format!("port_{name}"), &s.request);
    }
    host = host.input("meta_c", &meta);
    for (name, s) in [("a", &sa), ("b", &sb), ("c", &sc)] {
        host = host.input(&format!("data_{name}"), &s.response);
    }
    net.add_process(
        host,
        &[meta_c, ports[0].1, ports[1].1, ports[2].1],
        &[meta_a, meta_b, ports[0].0, ports[1].0, ports[2].0],
    )?;
    Ok(net)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MatmulResult {
    /// Row-major contents of C.
    pub c: Vec<u64>,
    /// Cycle in which both input metas were first visible.
    pub start: u64,
    /// Cycle in which `MatrixMetaC.valid` was first visible.
    pub done: u64,
    /// `MatrixMetaC` as reported by the network.
    pub meta_c: Option<MatrixMeta>,
}

impl MatmulResult {
    pub fn compute_cycles(&self) -> u64 {
        self.done - self.start
    }
}

/// Loads A and B through their exposed ports, raises both metas, waits for
/// `MatrixMetaC.valid` and reads C back.
pub struct MatmulDriver {
    a: Vec<u64>,
    b: Vec<u64>,
    meta_a: MatrixMeta,
    meta_b: MatrixMeta,
    c_len: u64,
    result: Rc<RefCell<MatmulResult>>,
}

impl MatmulDriver {
    pub fn new(
        rows: u64,
        inner: u64,
        cols: u64,
        a: Vec<u64>,
        b: Vec<u64>,
    ) -> (Self, Rc<RefCell<MatmulResult>>) {
        Self::with_meta(
            MatrixMeta::dense(rows, inner),
            MatrixMeta::dense(inner, cols),
            rows * cols,
            a,
            b,
        )
    }

    pub fn with_meta(
        meta_a: MatrixMeta,
        meta_b: MatrixMeta,
        c_len: u64,
        a: Vec<u64>,
        b: Vec<u64>,
    ) -> (Self, Rc<RefCell<MatmulResult>>) {
        let result = Rc::new(RefCell::new(MatmulResult::default()));
        (
            MatmulDriver {
                a,
                b,
                meta_a,
                meta_b,
                c_len,
                result: result.clone(),
            },
            result,
        )
    }

    fn load(io: &mut HostIo<'_>, port: &str, words: &[u64], c: u64) -> Result<(), SimError> {
        match words.get(c as usize) {
            Some(&v) => {
                io.put(&format!("{port}.enable"), 1)?;
                io.put(&format!("{port}.write_enable"), 1)?;
                io.put(&format!("{port}.addr"), c)?;
                io.put(&format!("{port}.write_data"), v)
            }
            None => io.put(&format!("{port}.enable"), 0),
        }
    }

    fn put_meta(io: &mut HostIo<'_>, port: &str, meta: &MatrixMeta) -> Result<(), SimError> {
        io.put(&format!("{port}.valid"), meta.valid as u64)?;
        io.put(&format!("{port}.base"), meta.base)?;
        io.put(&format!("{port}.stride"), meta.stride)?;
        io.put(&format!("{port}.height"), meta.height)?;
        io.put(&format!("{port}.width"), meta.width)
    }
}

impl Driver for MatmulDriver {
    fn step(&mut self, io: &mut HostIo<'_>) -> Result<Step, SimError> {
        let c = io.cycle();
        let load = self.a.len().max(self.b.len()) as u64;
        if c < load {
            Self::load(io, "port_a", &self.a, c)?;
            Self::load(io, "port_b", &self.b, c)?;
            return Ok(Step::Continue);
        }
        if c == load {
            io.put("port_a.enable", 0)?;
            io.put("port_b.enable", 0)?;
            Self::put_meta(io, "meta_a", &self.meta_a)?;
            Self::put_meta(io, "meta_b", &self.meta_b)?;
            self.result.borrow_mut().start = c + 1;
            return Ok(Step::Continue);
        }
        let mut r = self.result.borrow_mut();
        if r.meta_c.is_none() {
            if io.take("meta_c.valid")? == 1 {
                r.done = c;
                r.meta_c = Some(MatrixMeta {
                    valid: true,
                    base: io.take("meta_c.base")?,
                    stride: io.take("meta_c.stride")?,
                    height: io.take("meta_c.height")?,
                    width: io.take("meta_c.width")?,
                });
            } else {
                return Ok(Step::Continue);
            }
        }
        // A read driven in cycle c appears on the data bus in cycle c + 2.
        let k = c - r.done;
        if k < self.c_len {
            io.put("port_c.enable", 1)?;
            io.put("port_c.write_enable", 0)?;
            io.put("port_c.addr", k)?;
        } else {
            io.put("port_c.enable", 0)?;
        }
        if k >= 2 {
            r.c.push(io.take("data_c.read_data")?);
            if r.c.len() as u64 == self.c_len {
                return Ok(Step::Done);
            }
        }
        Ok(Step::Continue)
    }
}

#[derive(Debug, Clone)]
pub struct MatmulRun {
    pub result: MatmulResult,
    pub report: SimReport,
}

/// Multiplies `a` (`rows x inner`) by `b` (`inner x cols`), both row-major.
pub fn run_matmul(
    rows: u32,
    inner: u32,
    cols: u32,
    width: u8,
    a: &[u64],
    b: &[u64],
    parallel: bool,
) -> Result<MatmulRun, SimError> {
    let net = build_matmul(rows, inner, cols, width)
        .map_err(|e| SimError::InvalidNetwork(vec![e.to_string()]))?;
    let host = net.process_by_name(HOST).expect("matmul host");
    let (d, result) = MatmulDriver::new(
        rows as u64,
        inner as u64,
        cols as u64,
        a.to_vec(),
        b.to_vec(),
    );
    let report = Simulator::new(
        &net,
        SimConfig::until_drivers_done(),
        [(host, Box::new(d) as Box<dyn Driver>)],
    )?
    .parallel(parallel)
    .run()?;
    let result = result.borrow().clone();
    Ok(MatmulRun { result, report })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_product() {
        let r = run_matmul(1, 1, 1, 16, &[2], &[3], false).unwrap();
        assert_eq!(r.result.c, vec![6]);
        assert_eq!(r.result.compute_cycles(), 1 + DRAIN);
    }

    #[test]
    fn identity_times_b_is_b() {
        let b = [4, 9, 7, 1];
        let r = run_matmul(2, 2, 2, 16, &[1, 0, 0, 1], &b, false).unwrap();
        assert_eq!(r.result.c, b.to_vec());
        assert_eq!(r.result.meta_c, Some(MatrixMeta::dense(2, 2)));
    }

    #[test]
    fn rectangular_wraps_modulo_width() {
        // 1x3 * 3x2 over u8
        let a = [200, 3, 1];
        let b = [2, 1, 5, 0, 7, 255];
        let r = run_matmul(1, 3, 2, 8, &a, &b, false).unwrap();
        assert_eq!(r.result.c, vec![(400 + 15 + 7) % 256, (200 + 255) % 256]);
        assert_eq!(r.result.compute_cycles(), 6 + DRAIN);
    }

    #[test]
    fn mismatched_meta_fails_at_start() {
        let net = build_matmul(2, 2, 2, 16).unwrap();
        let host = net.process_by_name(HOST).unwrap();
        let (d, _) = MatmulDriver::with_meta(
            MatrixMeta::dense(2, 2),
            MatrixMeta::dense(1, 2),
            4,
            vec![0; 4],
            vec![0; 4],
        );
        let err = Simulator::new(
            &net,
            SimConfig::cycles(50),
            [(host, Box::new(d) as Box<dyn Driver>)],
        )
        .unwrap()
        .run()
        .unwrap_err();
        assert!(
            matches!(&err, SimError::AssertionFailed { message, .. } if message == "dimension mismatch"),
            "{err:?}"
        );
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(build_matmul(0, 2, 2, 16).is_err());
    }
}
