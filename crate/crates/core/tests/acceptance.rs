//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Reference results are computed here,
//! independently of the library's own helpers.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use sme_core::components::{make_bram, BramPorts, BramSpec};
use sme_core::corpus::matmul::DRAIN;
use sme_core::corpus::{
    build_counter, build_histogram, build_matmul, run_counter, run_histogram, run_matmul,
    MatmulDriver,
};
use sme_core::cspm::syntax::{parse as parse_csp, run_deterministic};
use sme_core::cspm::{collect_observed_ranges, emit_cspm, range_bits, ObservedRange};
use sme_core::graph::{validate_network, Issue};
use sme_core::ir::{Expr, Stmt};
use sme_core::model::BusShape;
use sme_core::sim::{driver, Driver, HostIo, Simulator, Step};
use sme_core::smeil::{self, ast::Pos, COUNTER_IL, HISTOGRAM_IL, MATMUL_IL};
use sme_core::trace::Cell;
use sme_core::vhdl::emit_design;
use sme_core::{
    declare_bus_shape, diff_traces, FieldSpec, Network, ProcessDef, ScalarType, SimConfig, Trace,
};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn fail(detail: impl Into<String>) -> Verdict {
    verdict(false, detail)
}

fn within(v: Verdict, took: Duration, limit: Option<Duration>) -> Verdict {
    match limit {
        Some(l) if v.pass && took > l => fail(format!(
            "{} but took {:.2} s (limit {} s)",
            v.detail,
            took.as_secs_f64(),
            l.as_secs()
        )),
        _ => v,
    }
}

// ---- random networks ----

struct Planted {
    net: Network,
    /// `(writer, reader)` process names per unclocked bus connection.
    unclocked_edges: Vec<(String, String)>,
}

fn shape(name: &str, clocked: bool) -> Arc<BusShape> {
    declare_bus_shape(
        name,
        vec![FieldSpec::with_initial("x", ScalarType::u(8), 0)],
        clocked,
        true,
    )
    .unwrap()
}

/// Up to ten processes in topological order. Unclocked buses only feed
/// later processes; clocked ones may feed any process. With `cycle`, a
/// ring of unclocked processes is wired back to front.
fn random_network(rng: &mut ChaCha8Rng, cycle: bool) -> Planted {
    let n = rng.gen_range(if cycle { 3..=10 } else { 2..=10 });
    let clocked_shape = shape("C", true);
    let unclocked_shape = shape("U", false);
    let mut clocked: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.4)).collect();
    let ring: Vec<usize> = if cycle {
        let k = rng.gen_range(2..=n.min(4));
        let mut ids: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = rng.gen_range(i..n);
            ids.swap(i, j);
        }
        ids.truncate(k);
        ids.sort_unstable();
        for &i in &ids {
            clocked[i] = false;
        }
        ids
    } else {
        vec![]
    };
    // Each process writes one bus; the bus is unclocked when its writer is.
    let mut inputs: Vec<Vec<usize>> = vec![vec![]; n];
    for r in 0..n {
        for w in 0..n {
            let allowed = if clocked[w] { w != r } else { w < r };
            if allowed && rng.gen_bool(0.3) {
                inputs[r].push(w);
            }
        }
    }
    if cycle {
        for (i, &w) in ring.iter().enumerate() {
            let r = ring[(i + 1) % ring.len()];
            if !inputs[r].contains(&w) {
                inputs[r].push(w);
            }
        }
    }
    let mut net = Network::new("random");
    let buses: Vec<_> = (0..n)
        .map(|i| {
            let s = if clocked[i] {
                &clocked_shape
            } else {
                &unclocked_shape
            };
            net.instantiate_bus_named(s, &format!("B{i}"))
        })
        .collect();
    let mut unclocked_edges = Vec::new();
    for p in 0..n {
        let mut def = ProcessDef::new(&format!("P{p}"), clocked[p]).output(
            "o",
            if clocked[p] {
                &clocked_shape
            } else {
                &unclocked_shape
            },
        );
        let mut sum = Expr::lit(ScalarType::u(8), p as i128);
        for (k, &w) in inputs[p].iter().enumerate() {
            let port = format!("i{k}");
            def = def.input(
                &port,
                if clocked[w] {
                    &clocked_shape
                } else {
                    &unclocked_shape
                },
            );
            sum = sum.add(Expr::field(&port, "x"));
            if !clocked[w] && !clocked[p] {
                unclocked_edges.push((format!("P{w}"), format!("P{p}")));
            }
        }
        let def = def.body(vec![Stmt::write("o", "x", sum)]);
        let ins: Vec<_> = inputs[p].iter().map(|&w| buses[w]).collect();
        net.add_process(def, &ins, &[buses[p]]).unwrap();
    }
    Planted {
        net,
        unclocked_edges,
    }
}

fn c1_scheduling(dags: &[Planted]) -> Verdict {
    const CYCLES: u64 = 20;
    for (i, d) in dags.iter().enumerate() {
        let report = match Simulator::new(
            &d.net,
            SimConfig::cycles(CYCLES).with_schedule(),
            Vec::<(_, Box<dyn Driver>)>::new(),
        )
        .and_then(|s| s.run())
        {
            Ok(r) => r,
            Err(e) => return fail(format!("network {i}: {e}")),
        };
        if report.triggers.iter().any(|&t| t != CYCLES) {
            return fail(format!("network {i}: trigger counts {:?}", report.triggers));
        }
        for (c, order) in report.schedule.unwrap().iter().enumerate() {
            let pos: HashMap<String, usize> = order
                .iter()
                .enumerate()
                .map(|(k, (p, _))| (d.net.process(*p).name.clone(), k))
                .collect();
            if pos.len() != d.net.processes.len() || order.len() != pos.len() {
                return fail(format!(
                    "network {i} cycle {c}: not every process triggered exactly once"
                ));
            }
            for (w, r) in &d.unclocked_edges {
                if pos[w] > pos[r] {
                    return fail(format!(
                        "network {i} cycle {c}: {r} triggered before its writer {w}"
                    ));
                }
            }
        }
    }
    verdict(
        true,
        format!("{} DAG networks x {CYCLES} cycles", dags.len()),
    )
}

fn c2_cycle_rejection(dags: &[Planted], rng: &mut ChaCha8Rng) -> Verdict {
    for (i, d) in dags.iter().enumerate() {
        let report = validate_network(&d.net);
        if !report.is_ok() {
            return fail(format!("false positive on DAG {i}: {:?}", report.errors));
        }
    }
    for i in 0..20 {
        let p = random_network(rng, true);
        let report = validate_network(&p.net);
        let paths: Vec<&Vec<String>> = report
            .errors
            .iter()
            .filter_map(|e| match e {
                Issue::UnclockedCycle { path } => Some(path),
                _ => None,
            })
            .collect();
        let Some(path) = paths.first() else {
            return fail(format!("cyclic network {i} accepted"));
        };
        // The reported path must be a closed walk over unclocked connections.
        let closed = path.len() >= 2
            && (0..path.len()).all(|k| {
                let (w, r) = (&path[k], &path[(k + 1) % path.len()]);
                p.unclocked_edges.iter().any(|(a, b)| a == w && b == r)
            });
        if !closed {
            return fail(format!(
                "cyclic network {i}: reported path {path:?} is not a cycle"
            ));
        }
        if Simulator::new(
            &p.net,
            SimConfig::cycles(1),
            Vec::<(_, Box<dyn Driver>)>::new(),
        )
        .is_ok()
        {
            return fail(format!("cyclic network {i} accepted by the simulator"));
        }
    }
    verdict(
        true,
        "20 cyclic networks rejected with their cycle path, 0 false positives on 100 DAGs",
    )
}

fn c3_determinism() -> Verdict {
    let stream: Vec<(u64, u64)> = (0..200)
        .map(|i| ((i * 7 % 5) as u64, (i * 13 % 251) as u64))
        .collect();
    let a: Vec<u64> = (0..12).map(|i| i * 3 + 1).collect();
    let b: Vec<u64> = (0..12).map(|i| 40 - i).collect();
    let runs: [(&str, Box<dyn Fn(bool) -> String>); 3] = [
        (
            "counter",
            Box::new(|p| {
                run_counter(3, 4, true, 60, p)
                    .unwrap()
                    .trace
                    .unwrap()
                    .to_csv_string()
            }),
        ),
        (
            "histogram",
            Box::new(|p| {
                run_histogram(8, 16, &stream, p)
                    .unwrap()
                    .report
                    .trace
                    .unwrap()
                    .to_csv_string()
            }),
        ),
        (
            "matmul",
            Box::new(|p| {
                run_matmul(3, 4, 3, 16, &a, &b, p)
                    .unwrap()
                    .report
                    .trace
                    .unwrap()
                    .to_csv_string()
            }),
        ),
    ];
    for (name, run) in &runs {
        let (s1, s2, par) = (run(false), run(false), run(true));
        if s1 != s2 || s1 != par {
            return fail(format!("{name}: traces differ between runs"));
        }
    }
    verdict(
        true,
        "counter, histogram, matmul: sequential x2 and parallel traces byte-identical",
    )
}

/// Hand-stepped counter: the host's `active` is visible one cycle after it
/// is driven, and LEDs one cycle after the counter writes it.
fn counter_oracle(n: u64, width: u32, active: bool, cycles: usize) -> Vec<u64> {
    let (mut count, mut value, mut leds) = (0u64, 0u64, 0u64);
    let mask = (1u64 << width) - 1;
    let mut visible = Vec::new();
    for c in 0..cycles {
        visible.push(leds);
        let active_visible = active && c >= 1;
        if active_visible {
            if count == n - 1 {
                count = 0;
                value = (value + 1) & mask;
                leds = value;
            } else {
                count += 1;
            }
        }
    }
    visible
}

fn c4_counter() -> Verdict {
    const CYCLES: usize = 101;
    let oracle = counter_oracle(3, 4, true, CYCLES);
    let closed = |d: u64| (0..CYCLES as u64).map(move |c| (c.saturating_sub(d) / 3) % 16);
    let Some(d) = (0..10).find(|&d| closed(d).eq(oracle.iter().copied())) else {
        return fail("no delay d makes the closed form match the hand-stepped oracle");
    };
    let values = |active| -> Vec<u64> {
        run_counter(3, 4, active, CYCLES as u64, false)
            .unwrap()
            .trace
            .unwrap()
            .column("LEDs.value")
            .unwrap()
            .map(|c| c.unwrap())
            .collect()
    };
    let on = values(true);
    if !closed(d).eq(on.iter().copied()) {
        return fail(format!(
            "simulated values diverge from floor(max(0, c - {d}) / 3) mod 16"
        ));
    }
    if values(false).iter().any(|&v| v != 0) {
        return fail("inactive counter changed its value");
    }
    verdict(
        true,
        format!("d = {d}; cycles 0..=100 match, inactive stays 0"),
    )
}

fn histogram_oracle(bins: usize, width: u32, stream: &[(u64, u64)]) -> Vec<u64> {
    let mut m = vec![0u64; bins];
    for &(i, v) in stream {
        m[i as usize] = (m[i as usize] + v) % (1u64 << width);
    }
    m
}

fn c5_histogram() -> Verdict {
    const BINS: u32 = 16;
    const PAIRS: usize = 1000;
    let results: Vec<Result<(u64, u64, usize), String>> = (0..200u64)
        .into_par_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let mut stream: Vec<(u64, u64)> = Vec::with_capacity(PAIRS);
            let mut dups = 0;
            for k in 0..PAIRS {
                let index = if k > 0 && rng.gen_bool(0.3) {
                    dups += 1;
                    stream[k - 1].0
                } else {
                    rng.gen_range(0..BINS as u64)
                };
                stream.push((index, rng.gen_range(0..1u64 << 32)));
            }
            let run =
                run_histogram(BINS, 32, &stream, false).map_err(|e| format!("seed {seed}: {e}"))?;
            if run.result.memory != histogram_oracle(BINS as usize, 32, &stream) {
                return Err(format!(
                    "seed {seed}: memory differs from the accumulation oracle"
                ));
            }
            // One pipeline write per pair, in consecutive cycles.
            let w = &run.write_cycles;
            if w.len() != PAIRS || w.windows(2).any(|p| p[1] != p[0] + 1) {
                return Err(format!(
                    "seed {seed}: pipeline writes are not one per cycle"
                ));
            }
            Ok((run.report.cycles_run - PAIRS as u64, w[0], dups))
        })
        .collect();
    let mut drains = Vec::new();
    let mut offsets = Vec::new();
    let mut dups = 0;
    for r in results {
        match r {
            Ok((drain, offset, d)) => {
                drains.push(drain);
                offsets.push(offset);
                dups += d;
            }
            Err(e) => return fail(e),
        }
    }
    drains.dedup();
    offsets.dedup();
    if drains.len() != 1 || offsets.len() != 1 {
        return fail(format!(
            "cycle count not 1000 + constant: drains {drains:?}, write offsets {offsets:?}"
        ));
    }
    verdict(
        true,
        format!("200 streams x 1000 pairs ({dups} forced duplicates); cycles = 1000 + {}, write i at cycle i + {}", drains[0], offsets[0]),
    )
}

fn matmul_oracle(m: usize, n: usize, k: usize, a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut c = vec![0u64; m * k];
    for i in 0..m {
        for j in 0..k {
            let mut s = 0u64;
            for x in 0..n {
                s += a[i * n + x] * b[x * k + j];
            }
            c[i * k + j] = s & 0xffff;
        }
    }
    c
}

fn c6_matmul() -> Verdict {
    let shapes: Vec<(usize, usize, usize)> = (1..=8)
        .flat_map(|m| (1..=8).flat_map(move |n| (1..=8).map(move |k| (m, n, k))))
        .collect();
    let results: Vec<Result<u64, String>> = shapes
        .par_iter()
        .map(|&(m, n, k)| {
            let net = build_matmul(m as u32, n as u32, k as u32, 16).map_err(|e| e.to_string())?;
            let host = net.process_by_name("Host").unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64((m * 100 + n * 10 + k) as u64);
            let mut worst = 0;
            for trial in 0..50 {
                let a: Vec<u64> = (0..m * n).map(|_| rng.gen_range(0..1 << 16)).collect();
                let b: Vec<u64> = (0..n * k).map(|_| rng.gen_range(0..1 << 16)).collect();
                let (d, result) =
                    MatmulDriver::new(m as u64, n as u64, k as u64, a.clone(), b.clone());
                let cfg = SimConfig::until_drivers_done().without_trace();
                Simulator::new(&net, cfg, [(host, Box::new(d) as Box<dyn Driver>)])
                    .and_then(|s| s.run())
                    .map_err(|e| format!("{m}x{n}x{k} trial {trial}: {e}"))?;
                let r = result.borrow();
                if r.c != matmul_oracle(m, n, k, &a, &b) {
                    return Err(format!(
                        "{m}x{n}x{k} trial {trial}: C differs from the triple-loop oracle"
                    ));
                }
                let over = r.compute_cycles() as i64 - (m * n * k) as i64;
                worst = worst.max(over as u64);
            }
            Ok(worst)
        })
        .collect();
    let mut worst = 0;
    for r in results {
        match r {
            Ok(w) => worst = worst.max(w),
            Err(e) => return fail(e),
        }
    }
    if worst > DRAIN {
        return fail(format!(
            "cycles exceed M*N*K + {DRAIN} by up to {}",
            worst - DRAIN
        ));
    }
    verdict(true, format!("512 shapes x 50 matrices match; cycles <= M*N*K + {worst} (pipeline depth {DRAIN}, c0 = 0)"))
}

struct BramOp {
    port: usize,
    en: bool,
    we: bool,
    addr: u64,
    data: u64,
}

/// Drives `ops` one cycle each and returns `read_data` per port per cycle.
fn run_bram(depth: u32, ports: BramPorts, schedule: Vec<Vec<BramOp>>) -> Vec<Vec<Cell>> {
    let spec = BramSpec::new(depth, 16, ports).unwrap();
    let (def, shapes) = make_bram("Ram", &spec);
    let n = spec.port_count();
    let mut net = Network::new("bram");
    let reqs: Vec<_> = (0..n)
        .map(|i| net.instantiate_bus_named(&shapes.request, &format!("Req{i}")))
        .collect();
    let resps: Vec<_> = (0..n)
        .map(|i| net.instantiate_bus_named(&shapes.response, &format!("Resp{i}")))
        .collect();
    net.add_process(def, &reqs, &resps).unwrap();
    let mut host = ProcessDef::simulation("Host");
    for i in 0..n {
        host = host.output(&format!("o{i}"), &shapes.request);
    }
    let pid = net.add_process(host, &[], &reqs).unwrap();
    let cycles = schedule.len() as u64 + 3;
    let d = driver(move |io: &mut HostIo<'_>| {
        let c = io.cycle() as usize;
        for p in 0..n {
            io.put(&format!("o{p}.enable"), 0)?;
        }
        for op in schedule.get(c).into_iter().flatten() {
            let o = format!("o{}", op.port);
            io.put(&format!("{o}.enable"), op.en as u64)?;
            io.put(&format!("{o}.write_enable"), op.we as u64)?;
            io.put(&format!("{o}.addr"), op.addr)?;
            io.put(&format!("{o}.write_data"), op.data)?;
        }
        Ok(Step::Continue)
    });
    let trace = Simulator::new(&net, SimConfig::cycles(cycles), [(pid, d)])
        .unwrap()
        .run()
        .unwrap()
        .trace
        .unwrap();
    (0..n)
        .map(|p| {
            trace
                .column(&format!("Resp{p}.read_data"))
                .unwrap()
                .collect()
        })
        .collect()
}

fn c7_bram() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    // Single port: random reads, writes and read-modify on few addresses.
    let depth = 37;
    let mut schedule = Vec::new();
    for _ in 0..10_000 {
        let addr = if rng.gen_bool(0.5) {
            rng.gen_range(0..4)
        } else {
            rng.gen_range(0..depth as u64)
        };
        schedule.push(vec![BramOp {
            port: 0,
            en: rng.gen_bool(0.9),
            we: rng.gen_bool(0.5),
            addr,
            data: rng.gen_range(0..1 << 16),
        }]);
    }
    let mut mem: HashMap<u64, u64> = HashMap::new();
    let mut expected: Vec<(usize, u64)> = Vec::new();
    let mut same_cycle = 0;
    for (c, ops) in schedule.iter().enumerate() {
        let op = &ops[0];
        if op.en {
            // Driven at c, seen by the memory at c + 1, answered at c + 2.
            expected.push((c + 2, *mem.get(&op.addr).unwrap_or(&0)));
            if op.we {
                same_cycle += 1;
                mem.insert(op.addr, op.data);
            }
        }
    }
    let got = run_bram(depth, BramPorts::Single, schedule);
    for &(c, v) in &expected {
        if got[0][c] != Some(v) {
            return fail(format!(
                "single port: cycle {c} read {:?}, oracle {v}",
                got[0][c]
            ));
        }
    }
    // Dual port: A reads the address B writes in the same cycle.
    let mut schedule = Vec::new();
    let mut mem: HashMap<u64, u64> = HashMap::new();
    let mut expected = Vec::new();
    for c in 0..2000 {
        let addr = rng.gen_range(0..8);
        let data = rng.gen_range(0..1 << 16);
        schedule.push(vec![
            BramOp {
                port: 0,
                en: true,
                we: false,
                addr,
                data: 0,
            },
            BramOp {
                port: 1,
                en: true,
                we: true,
                addr,
                data,
            },
        ]);
        expected.push((c + 2, *mem.get(&addr).unwrap_or(&0)));
        mem.insert(addr, data);
    }
    let got = run_bram(8, BramPorts::TrueDual, schedule);
    for &(c, v) in &expected {
        if got[0][c] != Some(v) {
            return fail(format!(
                "dual port: cycle {c} read {:?}, oracle {v}",
                got[0][c]
            ));
        }
    }
    verdict(
        true,
        format!("10000 single-port ops ({same_cycle} read+write in one cycle) and 2000 cross-port collisions return the old word"),
    )
}

fn c8_trace_roundtrip() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..1000 {
        let cols = rng.gen_range(1..8);
        let columns: Vec<String> = (0..cols)
            .map(|k| format!("Bus{}.f_{k}", rng.gen_range(0..3)))
            .collect();
        let mut t = Trace::new(columns);
        for _ in 0..rng.gen_range(0..30) {
            let row = (0..cols)
                .map(|_| match rng.gen_range(0..4) {
                    0 => None,
                    1 => Some(u64::MAX),
                    _ => Some(rng.gen_range(0..1000)),
                })
                .collect();
            t.push_row(row);
        }
        let text = t.to_csv_string();
        let back = match Trace::from_csv_str(&text) {
            Ok(b) => b,
            Err(e) => return fail(format!("trace {i}: {e}")),
        };
        if back.columns != t.columns || back.rows != t.rows || back.to_csv_string() != text {
            return fail(format!(
                "trace {i} ({} columns, {} rows): read(write(t)) != t",
                t.columns.len(),
                t.rows.len()
            ));
        }
        if !diff_traces(&t, &t)
            .map(|d| d.is_identical())
            .unwrap_or(false)
        {
            return fail(format!("trace {i}: diff with itself is not empty"));
        }
    }
    verdict(true, "1000 random traces round-trip; self-diff empty")
}

fn corpus() -> Vec<(&'static str, Network, Trace)> {
    let stream = [
        (1, 5),
        (1, 3),
        (0, 7),
        (1, 1),
        (3, 2),
        (3, 2),
        (2, 9),
        (1, 4),
    ];
    let a = [1, 2, 3, 4, 5, 6];
    let b = [7, 8, 9, 10, 11, 12];
    vec![
        (
            "counter",
            build_counter(3, 4).unwrap(),
            run_counter(3, 4, true, 12, false).unwrap().trace.unwrap(),
        ),
        (
            "histogram",
            build_histogram(4, 8).unwrap(),
            run_histogram(4, 8, &stream, false)
                .unwrap()
                .report
                .trace
                .unwrap(),
        ),
        (
            "matmul",
            build_matmul(2, 3, 2, 16).unwrap(),
            run_matmul(2, 3, 2, 16, &a, &b, false)
                .unwrap()
                .report
                .trace
                .unwrap(),
        ),
    ]
}

fn golden(example: &str, file: &str) -> Option<String> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(example)
        .join(file);
    std::fs::read_to_string(path).ok()
}

fn ghdl_installed() -> bool {
    std::process::Command::new("ghdl")
        .arg("--version")
        .output()
        .is_ok()
}

fn c9_vhdl() -> Verdict {
    let mut files = 0;
    for (name, net, trace) in corpus() {
        let design = match emit_design(&net) {
            Ok(d) => d,
            Err(e) => return fail(format!("{name}: {e}")),
        };
        for (file, text) in &design.files {
            if golden(name, &format!("vhdl/{file}")).as_deref() != Some(text.as_str()) {
                return fail(format!("{name}/{file} differs from its snapshot"));
            }
            files += 1;
        }
        if golden(name, "trace.csv").as_deref() != Some(trace.to_csv_string().as_str()) {
            return fail(format!("{name}/trace.csv differs from its snapshot"));
        }
    }
    let cosim = if ghdl_installed() {
        "GHDL found; run `smeforge vhdl` per example for co-simulation"
    } else {
        "co-simulation skipped, no VHDL simulator installed"
    };
    verdict(
        true,
        format!("{files} VHDL files and 3 traces match snapshots; {cosim}"),
    )
}

fn c10_cspm() -> Verdict {
    let r = ObservedRange::from_values("X.v", 0..=15).unwrap();
    if r.bits != 4 || range_bits(0, 15) != 4 {
        return fail(format!("values 0..15 give {} bits", r.bits));
    }
    for (name, net, trace) in corpus() {
        let (ranges, _) = collect_observed_ranges(&trace);
        for cycles in [1u64, 8, trace.cycles() as u64] {
            let out = match emit_cspm(&net, &ranges, cycles) {
                Ok(o) => o,
                Err(e) => return fail(format!("{name}: {e}")),
            };
            if emit_cspm(&net, &ranges, cycles).unwrap().text != out.text {
                return fail(format!("{name}: emission is not deterministic"));
            }
            let module = match parse_csp(&out.text) {
                Ok(m) => m,
                Err(e) => return fail(format!("{name}: syntax check failed: {e:?}")),
            };
            let tocks = run_deterministic(&module, "CLOCK", &[cycles as i64], 1_000_000)
                .unwrap_or_default();
            if tocks.len() as u64 != cycles || tocks.iter().any(|t| t != "tock") {
                return fail(format!(
                    "{name}: CLOCK({cycles}) performed {} events",
                    tocks.len()
                ));
            }
            if cycles == trace.cycles() as u64
                && golden(name, &format!("{name}.csp")).as_deref() != Some(out.text.as_str())
            {
                return fail(format!("{name}.csp differs from its snapshot"));
            }
        }
    }
    verdict(true, "0..15 -> 4 bits; 3 models deterministic, syntax-checked, CLOCK(n) = n tocks, snapshots match")
}

// ---- frontend ----

/// Random valid IL programs: a chain of processes over random bus shapes
/// with typed expressions, loops and branches.
fn random_program(rng: &mut ChaCha8Rng) -> String {
    let mut s = String::new();
    let widths: Vec<u32> = (0..rng.gen_range(1..4))
        .map(|_| rng.gen_range(4..=32))
        .collect();
    s.push_str(&format!(
        "param k = {};\nconst w = bits(k) + 1;\n\n",
        rng.gen_range(1..9)
    ));
    s.push_str("bus S clocked {\n    ok: bool;\n");
    for (i, w) in widths.iter().enumerate() {
        s.push_str(&format!("    f{i}: u{w} = {};\n", rng.gen_range(0..2)));
    }
    s.push_str("}\n\n");
    let procs = rng.gen_range(1..4);
    let field = |rng: &mut ChaCha8Rng| rng.gen_range(0..widths.len());
    let expr = |rng: &mut ChaCha8Rng, i: usize| -> String {
        let w = widths[i];
        let j = rng.gen_range(0..widths.len());
        let pick = rng.gen_range(0..6);
        match pick {
            0 => format!("a.f{i} + {}", rng.gen_range(0..(1u64 << w.min(20)))),
            1 => format!("(a.f{j} as u{w}) * 1 - t"),
            2 => format!("a.f{i} << 1 | a.f{i} >> k"),
            3 => format!(
                "(a.f{i} ^ t) & {}u{w}",
                rng.gen_range(0..(1u64 << w.min(20)))
            ),
            4 => format!("-(a.f{i} as i{}) as u{w}", w + 1),
            _ => format!("t % max(k, 2) + a.f{i}"),
        }
    };
    for p in 0..procs {
        let i = field(rng);
        let w = widths[i];
        s.push_str(&format!("proc P{p} clocked (in a: S, out b: S) {{\n"));
        s.push_str(&format!("    var t: u{w};\n    var m: u{w}[k + 1];\n"));
        s.push_str(&format!("    t := {};\n", expr(rng, i)));
        s.push_str(&"    for j in 0..k + 1 {\n        m[j] := t + 1;\n    }\n".to_string());
        s.push_str(&format!(
            "    if a.ok && t != 0 {{\n        b.f{i} := {};\n    }} elif !a.ok {{\n        b.f{i} := m[k];\n    }} else {{\n        b.ok := t > {} || false;\n    }}\n",
            expr(rng, i),
            rng.gen_range(0..(1u64 << w.min(20)))
        ));
        s.push_str("}\n\n");
    }
    s.push_str("proc Host sim (out o: S, in i: S);\n\nnetwork random {\n");
    s.push_str(&format!(
        "    bus L[{}]: S;\n    Host(o = L[0], i = L[{procs}]);\n",
        procs + 1
    ));
    for p in 0..procs {
        s.push_str(&format!("    P{p}(a = L[{p}], b = L[{}]);\n", p + 1));
    }
    s.push_str("}\n");
    s
}

fn positions_valid(src: &str, line: u32, col: u32) -> bool {
    let lines: Vec<&str> = src.split('\n').collect();
    line >= 1
        && (line as usize) <= lines.len()
        && col >= 1
        && (col as usize) <= lines[line as usize - 1].chars().count() + 1
}

fn c11_frontend() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut sources: Vec<String> = [COUNTER_IL, HISTOGRAM_IL, MATMUL_IL]
        .iter()
        .map(|s| s.to_string())
        .collect();
    sources.extend((0..100).map(|_| random_program(&mut rng)));
    for (i, src) in sources.iter().enumerate() {
        let unit = match smeil::parse(src) {
            Ok(u) => u,
            Err(d) => return fail(format!("program {i} does not parse: {}", d[0])),
        };
        if let Err(d) = smeil::lower(&unit) {
            return fail(format!("program {i} does not lower: {}\n{src}", d[0]));
        }
        let printed = smeil::print(&unit);
        match smeil::parse(&printed) {
            Ok(again) if again.without_positions() == unit.without_positions() => {}
            _ => return fail(format!("program {i}: print/parse is not a round trip")),
        }
        let mut bad = None;
        let mut unit = unit;
        unit.visit_positions(&mut |p: &mut Pos| {
            if !positions_valid(src, p.line, p.col) {
                bad = Some(*p);
            }
        });
        if let Some(p) = bad {
            return fail(format!("program {i}: node position {p} outside the source"));
        }
    }
    // Damaged sources: every diagnostic points into the text.
    let mut diagnostics = 0;
    for k in 0..300 {
        let src = &sources[k % sources.len()];
        let chars: Vec<char> = src.chars().collect();
        let cut = rng.gen_range(0..chars.len());
        let damaged: String = match k % 3 {
            0 => chars[..cut].iter().collect(),
            1 => chars
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != cut)
                .map(|(_, c)| c)
                .collect(),
            _ => chars
                .iter()
                .take(cut)
                .chain(['$', '{', '@'].iter())
                .chain(chars.iter().skip(cut))
                .collect(),
        };
        let diags = match smeil::parse(&damaged) {
            Ok(u) => smeil::lower(&u).err().unwrap_or_default(),
            Err(d) => d,
        };
        for d in &diags {
            if !positions_valid(&damaged, d.line, d.column) {
                return fail(format!(
                    "diagnostic at {}:{} outside the damaged source: {}",
                    d.line, d.column, d.message
                ));
            }
        }
        diagnostics += diags.len();
    }
    verdict(
        true,
        format!("3 corpus + 100 generated programs round-trip; {diagnostics} diagnostics on 300 damaged sources all positioned"),
    )
}

fn main() {
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut dags = Vec::new();
    let build_start = Instant::now();
    for _ in 0..100 {
        dags.push(random_network(&mut rng, false));
    }
    let build = build_start.elapsed();

    let secs = |s| Some(Duration::from_secs(s));
    type Check<'a> = Box<dyn FnOnce() -> Verdict + 'a>;
    let checks: Vec<(&str, Option<Duration>, Check)> = vec![
        (
            "scheduling conformance",
            secs(10),
            Box::new(|| c1_scheduling(&dags)),
        ),
        (
            "unclocked-cycle rejection",
            None,
            Box::new(|| c2_cycle_rejection(&dags, &mut rng)),
        ),
        ("determinism", None, Box::new(c3_determinism)),
        ("counter", secs(1), Box::new(c4_counter)),
        ("histogram", secs(30), Box::new(c5_histogram)),
        ("matrix multiplication", secs(60), Box::new(c6_matmul)),
        ("block RAM", None, Box::new(c7_bram)),
        ("trace round trip", None, Box::new(c8_trace_roundtrip)),
        ("VHDL emission", None, Box::new(c9_vhdl)),
        ("CSP_M emission", None, Box::new(c10_cspm)),
        ("frontend", None, Box::new(c11_frontend)),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in checks.into_iter().enumerate() {
        let start = Instant::now();
        let v = check();
        let mut took = start.elapsed();
        if i == 0 {
            took += build;
        }
        let v = within(v, took, limit);
        failed += !v.pass as usize;
        println!(
            "{} {:>2} {name}: {} ({:.2} s)",
            if v.pass { "PASS" } else { "FAIL" },
            i + 1,
            v.detail,
            took.as_secs_f64()
        );
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
