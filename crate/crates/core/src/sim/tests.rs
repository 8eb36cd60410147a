use std::sync::Arc;

use super::*;
use crate::ir::{Expr, Stmt};
use crate::model::{declare_bus_shape, BusShape, FieldSpec, ProcessDef};
use crate::types::{BinaryOp, ScalarType};

fn shape(name: &str, clocked: bool, init: bool) -> Arc<BusShape> {
    declare_bus_shape(
        name,
        vec![FieldSpec::new("x", ScalarType::u(8))],
        clocked,
        init,
    )
    .unwrap()
}

fn col(t: &Trace, name: &str) -> Vec<Option<u64>> {
    t.column(name).unwrap().collect()
}

fn u8c(v: i128) -> Expr {
    Expr::lit(ScalarType::u(8), v)
}

#[test]
fn last_write_wins_and_fields_latch() {
    let b = shape("B", true, true);
    let p = ProcessDef::new("P", true)
        .output("out", &b)
        .var("c", ScalarType::u(8), None)
        .body(vec![
            Stmt::when(
                Expr::var("c").eq(u8c(0)),
                vec![
                    Stmt::write("out", "x", u8c(1)),
                    Stmt::write("out", "x", u8c(2)),
                    Stmt::write("out", "x", u8c(3)),
                ],
            ),
            Stmt::set("c", Expr::var("c").add(u8c(1))),
        ]);
    let mut net = Network::new("n");
    let bus = net.instantiate_bus(&b);
    net.add_process(p, &[], &[bus]).unwrap();
    let r = run_simulation(&net, SimConfig::cycles(4), []).unwrap();
    let t = r.trace.unwrap();
    assert_eq!(col(&t, "B.x"), vec![Some(0), Some(3), Some(3), Some(3)]);
    assert_eq!(r.cycles_run, 4);
    assert_eq!(r.stop, StopReason::MaxCycles);
}

fn chain() -> Network {
    // Src (clocked) -> U (unclocked) -> Mid (unclocked) -> V (unclocked) -> Sink (clocked)
    let u = shape("U", false, false);
    let v = shape("V", false, false);
    let src = ProcessDef::new("Src", true)
        .output("o", &u)
        .var("n", ScalarType::u(8), Some(5))
        .body(vec![
            Stmt::write("o", "x", Expr::var("n")),
            Stmt::set("n", Expr::var("n").add(u8c(1))),
        ]);
    let mid = ProcessDef::new("Mid", false)
        .input("i", &u)
        .output("o", &v)
        .body(vec![Stmt::write(
            "o",
            "x",
            Expr::field("i", "x").mul(u8c(2)),
        )]);
    let sink = ProcessDef::new("Sink", true)
        .input("i", &v)
        .var("seen", ScalarType::u(8), None)
        .body(vec![Stmt::when(
            Expr::bool(true),
            vec![Stmt::set("seen", Expr::var("seen").add(u8c(1)))],
        )]);
    let mut net = Network::new("chain");
    let ub = net.instantiate_bus(&u);
    let vb = net.instantiate_bus(&v);
    // Registered out of dependency order on purpose.
    net.add_process(sink, &[vb], &[]).unwrap();
    net.add_process(mid, &[ub], &[vb]).unwrap();
    net.add_process(src, &[], &[ub]).unwrap();
    net
}

#[test]
fn unclocked_values_propagate_within_the_cycle() {
    let net = chain();
    let r = run_simulation(&net, SimConfig::cycles(3).with_schedule(), []).unwrap();
    let t = r.trace.unwrap();
    assert_eq!(col(&t, "U.x"), vec![Some(5), Some(6), Some(7)]);
    assert_eq!(col(&t, "V.x"), vec![Some(10), Some(12), Some(14)]);
    let order: Vec<&str> = r.schedule.unwrap()[0]
        .iter()
        .map(|(p, _)| net.process(*p).name.as_str())
        .collect();
    assert_eq!(order, ["Sink", "Src", "Mid"]);
    assert_eq!(r.triggers, vec![3, 3, 3]);
}

#[test]
fn parallel_scheduler_matches_sequential() {
    let net = chain();
    let a = run_simulation(&net, SimConfig::cycles(20), []).unwrap();
    let b = run_parallel(&net, SimConfig::cycles(20), []).unwrap();
    assert_eq!(
        a.trace.unwrap().to_csv_string(),
        b.trace.unwrap().to_csv_string()
    );
}

fn undefined_reader() -> Network {
    let b = shape("B", true, false);
    let w = ProcessDef::new("W", true)
        .output("o", &b)
        .body(vec![Stmt::write("o", "x", u8c(9))]);
    let r = ProcessDef::new("R", true)
        .input("i", &b)
        .var("v", ScalarType::u(8), None)
        .body(vec![Stmt::set("v", Expr::field("i", "x"))]);
    let mut net = Network::new("u");
    let bus = net.instantiate_bus(&b);
    net.add_process(w, &[], &[bus]).unwrap();
    net.add_process(r, &[bus], &[]).unwrap();
    net
}

#[test]
fn reading_undefined_field_is_an_error() {
    let net = undefined_reader();
    let err = run_simulation(&net, SimConfig::cycles(3), []).unwrap_err();
    assert_eq!(
        err,
        SimError::UndefinedRead {
            process: "R".into(),
            bus: "B".into(),
            field: "x".into(),
            cycle: 0
        }
    );
}

#[test]
fn lenient_mode_reads_zero_and_warns_once() {
    let net = undefined_reader();
    let mut sim = Simulator::new(&net, SimConfig::cycles(3).lenient(), []).unwrap();
    sim.step_cycle().unwrap();
    let r = net.process_by_name("R").unwrap();
    assert_eq!(sim.variable(r, "v").unwrap()[0].bits, 0);
    sim.step_cycle().unwrap();
    assert_eq!(sim.variable(r, "v").unwrap()[0].bits, 9);
    let report = sim.run().unwrap();
    assert_eq!(report.warnings.len(), 1, "{:?}", report.warnings);
}

#[test]
fn divide_by_zero_names_process_and_cycle() {
    let b = shape("B", true, true);
    let p = ProcessDef::new("Div", true)
        .output("o", &b)
        .var("d", ScalarType::u(8), Some(2))
        .body(vec![
            Stmt::set("d", Expr::var("d").sub(u8c(1))),
            Stmt::write("o", "x", Expr::bin(BinaryOp::Div, u8c(10), Expr::var("d"))),
        ]);
    let mut net = Network::new("d");
    let bus = net.instantiate_bus(&b);
    net.add_process(p, &[], &[bus]).unwrap();
    let err = run_simulation(&net, SimConfig::cycles(5), []).unwrap_err();
    assert_eq!(
        err,
        SimError::DivideByZero {
            process: "Div".into(),
            cycle: 1
        }
    );
}

#[test]
fn no_drivers_means_zero_cycles() {
    let net = chain();
    let r = run_simulation(&net, SimConfig::until_drivers_done(), []).unwrap();
    assert_eq!(r.cycles_run, 0);
    assert_eq!(r.stop, StopReason::DriversDone);
    assert_eq!(r.trace.unwrap().cycles(), 0);
}

#[test]
fn no_stop_condition_rejected() {
    let net = chain();
    let cfg = SimConfig {
        stop_when_drivers_done: false,
        ..SimConfig::default()
    };
    assert!(matches!(
        run_simulation(&net, cfg, []),
        Err(SimError::NoStopCondition)
    ));
}

fn driven() -> (Network, ProcessId) {
    let b = shape("B", true, false);
    let host = ProcessDef::simulation("Stim").output("o", &b);
    let mut net = Network::new("d");
    let bus = net.instantiate_bus(&b);
    let pid = net.add_process(host, &[], &[bus]).unwrap();
    (net, pid)
}

#[test]
fn driver_runs_once_per_cycle_until_done() {
    let (net, pid) = driven();
    let d = driver(|io: &mut HostIo<'_>| {
        let f = io.port_field("o", "x").unwrap();
        io.set(f, io.cycle() * 10 + 300)?;
        Ok(if io.cycle() == 2 {
            Step::Done
        } else {
            Step::Continue
        })
    });
    let r = run_simulation(&net, SimConfig::until_drivers_done(), [(pid, d)]).unwrap();
    assert_eq!(r.cycles_run, 3);
    // Wrapped to u8 and delayed one cycle by the clocked bus.
    assert_eq!(
        col(&r.trace.unwrap(), "B.x"),
        vec![None, Some(44), Some(54)]
    );
}

#[test]
fn missing_driver_and_forbidden_access() {
    let (net, pid) = driven();
    assert!(matches!(
        run_simulation(&net, SimConfig::cycles(1), []),
        Err(SimError::MissingDriver { .. })
    ));
    let d = driver(|io: &mut HostIo<'_>| {
        let f = io.port_field("o", "x").unwrap();
        io.read(f)?;
        Ok(Step::Done)
    });
    assert!(matches!(
        run_simulation(&net, SimConfig::cycles(1), [(pid, d)]),
        Err(SimError::DriverAccess { access: "read", .. })
    ));
}

#[test]
fn unclocked_cycle_rejected_before_running() {
    let u = shape("U", false, false);
    let v = shape("V", false, false);
    let a = ProcessDef::new("A", false)
        .input("i", &v)
        .output("o", &u)
        .body(vec![Stmt::write("o", "x", Expr::field("i", "x"))]);
    let b = ProcessDef::new("B", false)
        .input("i", &u)
        .output("o", &v)
        .body(vec![Stmt::write("o", "x", Expr::field("i", "x"))]);
    let mut net = Network::new("loop");
    let ub = net.instantiate_bus(&u);
    let vb = net.instantiate_bus(&v);
    net.add_process(a, &[vb], &[ub]).unwrap();
    net.add_process(b, &[ub], &[vb]).unwrap();
    assert!(matches!(
        run_simulation(&net, SimConfig::cycles(1), []),
        Err(SimError::InvalidNetwork(_))
    ));
}
