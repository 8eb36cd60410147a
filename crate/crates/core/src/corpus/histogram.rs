//! Streaming histogram over a block RAM with write forwarding.
//!
//! A pair visible on `Index`/`Value` in cycle t is read from memory in
//! cycle t+1, its sum is computed by `Adder` in cycle t+3 and written back
//! in cycle t+4. Up to three earlier sums can still be in flight when a
//! read happens, so `Adder` publishes its last three results and `Forward`
//! substitutes the newest one whose index matches.

use std::cell::RefCell;
use std::rc::Rc;
use std::sync::Arc;

use crate::components::{make_bram, BramPorts, BramSpec};
use crate::error::ModelError;
use crate::ir::{Expr, Stmt};
use crate::model::{declare_bus_shape, BusShape, FieldSpec, Network, ProcessDef};
use crate::sim::{Driver, HostIo, SimConfig, SimError, SimReport, Simulator, Step};
use crate::types::ScalarType;

use super::HOST;

/// Cycles from a pair becoming visible to its write landing in memory.
pub const WRITE_LATENCY: u64 = 4;
const WINDOW: usize = 3;

fn f(port: &str, field: &str) -> Expr {
    Expr::field(port, field)
}

fn w(port: &str, field: &str, e: Expr) -> Stmt {
    Stmt::write(port, field, e)
}

struct Shapes {
    index: Arc<BusShape>,
    value: Arc<BusShape>,
    pipe: Arc<BusShape>,
    data: Arc<BusShape>,
    inflight: Arc<BusShape>,
    fwd: Arc<BusShape>,
}

fn shapes(iw: u8, vw: u8) -> Result<Shapes, ModelError> {
    let (ity, vty) = (ScalarType::unsigned(iw)?, ScalarType::unsigned(vw)?);
    let mut inflight = Vec::new();
    for k in 1..=WINDOW {
        inflight.push(FieldSpec::new(&format!("valid{k}"), ScalarType::BOOL));
        inflight.push(FieldSpec::new(&format!("index{k}"), ity));
        inflight.push(FieldSpec::new(&format!("sum{k}"), vty));
    }
    let triple = || {
        vec![
            FieldSpec::new("valid", ScalarType::BOOL),
            FieldSpec::new("index", ity),
            FieldSpec::new("value", vty),
        ]
    };
    let mut fwd = triple();
    fwd.push(FieldSpec::new("old", vty));
    Ok(Shapes {
        index: declare_bus_shape(
            "Index",
            vec![
                FieldSpec::new("valid", ScalarType::BOOL),
                FieldSpec::new("index", ity),
            ],
            true,
            true,
        )?,
        value: declare_bus_shape("Value", vec![FieldSpec::new("value", vty)], true, true)?,
        pipe: declare_bus_shape("Pipe", triple(), false, true)?,
        data: declare_bus_shape("Data", vec![FieldSpec::new("read_data", vty)], false, true)?,
        inflight: declare_bus_shape("InFlight", inflight, false, true)?,
        fwd: declare_bus_shape("Fwd", fwd, false, true)?,
    })
}

/// Builds the histogram network. Top-level buses: `Index`, `Value` and the
/// `Mem` request port in, `MemData` out.
pub fn build_histogram(bins: u32, value_width: u8) -> Result<Network, ModelError> {
    if bins < 2 {
        return Err(ModelError::InvalidArrayLength);
    }
    let spec = BramSpec::new(bins, value_width, BramPorts::TrueDual)?;
    let iw = spec.addr_width();
    let s = shapes(iw, value_width)?;
    let ity = ScalarType::u(iw);
    let vty = ScalarType::u(value_width);
    let (ram, rs) = make_bram("RAM", &spec);

    let control = ProcessDef::new("Control", true)
        .input("mem", &rs.request)
        .input("index", &s.index)
        .input("resp", &rs.response)
        .output("req", &rs.request)
        .output("data", &s.data)
        .output("memdata", &rs.response)
        .body(vec![
            Stmt::if_else(
                f("mem", "enable"),
                ["enable", "write_enable", "addr", "write_data"]
                    .iter()
                    .map(|n| w("req", n, f("mem", n)))
                    .collect(),
                vec![
                    w("req", "enable", f("index", "valid")),
                    w("req", "write_enable", Expr::bool(false)),
                    w("req", "addr", f("index", "index")),
                    w("req", "write_data", Expr::lit(vty, 0)),
                ],
            ),
            w("data", "read_data", f("resp", "read_data")),
            w("memdata", "read_data", f("resp", "read_data")),
        ]);

    // Two-stage delay line so the pair meets its memory word.
    let mut pipe = ProcessDef::new("Pipe", true)
        .input("index", &s.index)
        .input("value", &s.value)
        .output("out", &s.pipe);
    for st in ["d1", "d2"] {
        pipe = pipe
            .var(&format!("{st}_valid"), ScalarType::BOOL, None)
            .var(&format!("{st}_index"), ity, None)
            .var(&format!("{st}_value"), vty, None);
    }
    let mut body = Vec::new();
    for n in ["valid", "index", "value"] {
        body.push(w("out", n, Expr::var(&format!("d2_{n}"))));
    }
    for n in ["valid", "index", "value"] {
        body.push(Stmt::set(&format!("d2_{n}"), Expr::var(&format!("d1_{n}"))));
    }
    body.push(Stmt::set("d1_valid", f("index", "valid")));
    body.push(Stmt::set("d1_index", f("index", "index")));
    body.push(Stmt::set("d1_value", f("value", "value")));
    let pipe = pipe.body(body);

    let mut fbody = vec![
        w("fwd", "valid", f("pipe", "valid")),
        w("fwd", "index", f("pipe", "index")),
        w("fwd", "value", f("pipe", "value")),
        w("fwd", "old", f("data", "read_data")),
    ];
    // Oldest first, so the newest matching sum is written last and wins.
    for k in (1..=WINDOW).rev() {
        fbody.push(Stmt::when(
            f("inflight", &format!("valid{k}"))
                .and(f("inflight", &format!("index{k}")).eq(f("pipe", "index"))),
            vec![w("fwd", "old", f("inflight", &format!("sum{k}")))],
        ));
    }
    let forward = ProcessDef::new("Forward", false)
        .input("data", &s.data)
        .input("pipe", &s.pipe)
        .input("inflight", &s.inflight)
        .output("fwd", &s.fwd)
        .body(fbody);

    let mut adder = ProcessDef::new("Adder", true)
        .input("fwd", &s.fwd)
        .output("req", &rs.request)
        .output("inflight", &s.inflight)
        .var("sum", vty, None);
    for k in 1..=WINDOW {
        adder = adder
            .var(&format!("valid{k}"), ScalarType::BOOL, None)
            .var(&format!("index{k}"), ity, None)
            .var(&format!("sum{k}"), vty, None);
    }
    let mut abody = vec![
        Stmt::set("sum", f("fwd", "old").add(f("fwd", "value"))),
        w("req", "enable", f("fwd", "valid")),
        w("req", "write_enable", f("fwd", "valid")),
        w("req", "addr", f("fwd", "index")),
        w("req", "write_data", Expr::var("sum")),
    ];
    for k in (2..=WINDOW).rev() {
        for n in ["valid", "index", "sum"] {
            abody.push(Stmt::set(
                &format!("{n}{k}"),
                Expr::var(&format!("{n}{}", k - 1)),
            ));
        }
    }
    abody.push(Stmt::set("valid1", f("fwd", "valid")));
    abody.push(Stmt::set("index1", f("fwd", "index")));
    abody.push(Stmt::set("sum1", Expr::var("sum")));
    for k in 1..=WINDOW {
        for n in ["valid", "index", "sum"] {
            let name = format!("{n}{k}");
            abody.push(w("inflight", &name, Expr::var(&name)));
        }
    }
    let adder = adder.body(abody);

    let mut net = Network::new("histogram");
    let index = net.instantiate_bus_named(&s.index, "Index");
    let value = net.instantiate_bus_named(&s.value, "Value");
    let mem = net.instantiate_bus_named(&rs.request, "Mem");
    let memdata = net.instantiate_bus_named(&rs.response, "MemData");
    let req_a = net.instantiate_bus_named(&rs.request, "RamReqA");
    let req_b = net.instantiate_bus_named(&rs.request, "RamReqB");
    let resp_a = net.instantiate_bus_named(&rs.response, "RamRespA");
    let resp_b = net.instantiate_bus_named(&rs.response, "RamRespB");
    let data = net.instantiate_bus_named(&s.data, "Data");
    let pipe_bus = net.instantiate_bus_named(&s.pipe, "PipeOut");
    let inflight = net.instantiate_bus_named(&s.inflight, "InFlight");
    let fwd = net.instantiate_bus_named(&s.fwd, "Fwd");

    net.add_process(control, &[mem, index, resp_a], &[req_a, data, memdata])?;
    net.add_process(ram, &[req_a, req_b], &[resp_a, resp_b])?;
    net.add_process(pipe, &[index, value], &[pipe_bus])?;
    net.add_process(forward, &[data, pipe_bus, inflight], &[fwd])?;
    net.add_process(adder, &[fwd], &[req_b, inflight])?;
    let host = ProcessDef::simulation(HOST)
        .output("index", &s.index)
        .output("value", &s.value)
        .output("mem", &rs.request)
        .input("memdata", &rs.response);
    net.add_process(host, &[memdata], &[index, value, mem])?;
    Ok(net)
}

/// Results collected by [`HistogramDriver`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HistogramResult {
    pub memory: Vec<u64>,
    /// Cycle in which the stream was complete and read-out began.
    pub readout_start: u64,
}

/// Streams `(index, value)` pairs one per cycle, waits for the pipeline to
/// drain, then reads every bin back through `Mem` and completes.
pub struct HistogramDriver {
    bins: u32,
    stream: Vec<(u64, u64)>,
    result: Rc<RefCell<HistogramResult>>,
}

/// A read driven on `Mem` in cycle c appears on `MemData` in cycle c + 4.
const READ_TURNAROUND: u64 = 4;

impl HistogramDriver {
    pub fn new(bins: u32, stream: Vec<(u64, u64)>) -> (Self, Rc<RefCell<HistogramResult>>) {
        let result = Rc::new(RefCell::new(HistogramResult::default()));
        (
            HistogramDriver {
                bins,
                stream,
                result: result.clone(),
            },
            result,
        )
    }
}

impl Driver for HistogramDriver {
    fn step(&mut self, io: &mut HostIo<'_>) -> Result<Step, SimError> {
        let c = io.cycle();
        let len = self.stream.len() as u64;
        // The last write lands in cycle len + WRITE_LATENCY; the first
        // read reaches the memory two cycles after it is driven.
        let start = len + WRITE_LATENCY;
        if let Some(&(index, value)) = self.stream.get(c as usize) {
            io.put("index.valid", 1)?;
            io.put("index.index", index)?;
            io.put("value.value", value)?;
            return Ok(Step::Continue);
        }
        io.put("index.valid", 0)?;
        if c < start {
            return Ok(Step::Continue);
        }
        let bins = self.bins as u64;
        let k = c - start;
        if k < bins {
            io.put("mem.enable", 1)?;
            io.put("mem.write_enable", 0)?;
            io.put("mem.addr", k)?;
        } else {
            io.put("mem.enable", 0)?;
        }
        if k >= READ_TURNAROUND {
            let data = io.take("memdata.read_data")?;
            let mut r = self.result.borrow_mut();
            r.readout_start = start;
            r.memory.push(data);
            if r.memory.len() as u64 == bins {
                return Ok(Step::Done);
            }
        }
        Ok(Step::Continue)
    }
}

#[derive(Debug, Clone)]
pub struct HistogramRun {
    pub result: HistogramResult,
    pub report: SimReport,
    /// Cycles in which the memory performed a pipeline write.
    pub write_cycles: Vec<u64>,
}

pub fn run_histogram(
    bins: u32,
    value_width: u8,
    stream: &[(u64, u64)],
    parallel: bool,
) -> Result<HistogramRun, SimError> {
    let net = build_histogram(bins, value_width)
        .map_err(|e| SimError::InvalidNetwork(vec![e.to_string()]))?;
    let host = net.process_by_name(HOST).expect("histogram host");
    let (d, result) = HistogramDriver::new(bins, stream.to_vec());
    let report = Simulator::new(
        &net,
        SimConfig::until_drivers_done(),
        [(host, Box::new(d) as Box<dyn Driver>)],
    )?
    .parallel(parallel)
    .run()?;
    let trace = report.trace.as_ref().expect("trace recorded");
    let en: Vec<_> = trace.column("RamReqB.enable").expect("column").collect();
    let write_cycles = en
        .iter()
        .enumerate()
        .filter(|(_, c)| **c == Some(1))
        .map(|(i, _)| i as u64)
        .collect();
    let result = result.borrow().clone();
    Ok(HistogramRun {
        result,
        report,
        write_cycles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oracle(bins: u32, width: u8, stream: &[(u64, u64)]) -> Vec<u64> {
        let mut m = vec![0u64; bins as usize];
        let mask = if width == 64 {
            u64::MAX
        } else {
            (1u64 << width) - 1
        };
        for &(i, v) in stream {
            m[i as usize] = m[i as usize].wrapping_add(v) & mask;
        }
        m
    }

    #[test]
    fn back_to_back_same_index() {
        let s = [(0, 5), (0, 3)];
        let r = run_histogram(4, 16, &s, false).unwrap();
        assert_eq!(r.result.memory, vec![8, 0, 0, 0]);
    }

    #[test]
    fn single_pair_and_empty_stream() {
        let r = run_histogram(4, 16, &[(1, 7)], false).unwrap();
        assert_eq!(r.result.memory, vec![0, 7, 0, 0]);
        let r = run_histogram(4, 16, &[], false).unwrap();
        assert_eq!(r.result.memory, vec![0; 4]);
    }

    #[test]
    fn every_hazard_distance_is_forwarded() {
        let s = [
            (2, 1),
            (2, 2),
            (3, 4),
            (2, 8),
            (1, 1),
            (3, 16),
            (2, 32),
            (2, 64),
            (1, 128),
        ];
        let r = run_histogram(4, 16, &s, false).unwrap();
        assert_eq!(r.result.memory, oracle(4, 16, &s));
        assert_eq!(r.write_cycles.len(), s.len());
        let first = r.write_cycles[0];
        assert!(r
            .write_cycles
            .iter()
            .enumerate()
            .all(|(i, &c)| c == first + i as u64));
    }

    #[test]
    fn sums_wrap_at_value_width() {
        let s = [(0, 200), (0, 100)];
        assert_eq!(
            run_histogram(2, 8, &s, false).unwrap().result.memory,
            vec![44, 0]
        );
    }

    #[test]
    fn index_beyond_bins_fails() {
        let err = run_histogram(5, 8, &[(6, 1)], false).unwrap_err();
        assert!(matches!(err, SimError::AssertionFailed { .. }), "{err:?}");
    }
}
