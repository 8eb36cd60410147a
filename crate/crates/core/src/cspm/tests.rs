use super::syntax::{parse, run_deterministic};
use super::*;
use crate::corpus::{build_histogram, run_counter, run_histogram};
use crate::ir::{Expr, Stmt};
use crate::model::{declare_bus_shape, FieldSpec, ProcessDef};

#[test]
fn widths_follow_the_shifted_range() {
    assert_eq!(range_bits(0, 15), 4);
    assert_eq!(range_bits(0, 0), 1);
    assert_eq!(range_bits(0, 9), 4);
    assert_eq!(range_bits(0, 16), 5);
    assert_eq!(range_bits(-8, 7), 4);
    assert_eq!(range_bits(3, 10), 3);
    let r = ObservedRange::from_values("a.b", 0..16).unwrap();
    assert_eq!((r.min, r.max, r.bits), (0, 15, 4));
    assert_eq!(r.values.unwrap().len(), 16);
}

#[test]
fn large_value_sets_collapse_to_the_interval() {
    let r = ObservedRange::from_values("a.b", 0..5000).unwrap();
    assert!(r.values.is_none());
    assert_eq!((r.min, r.max, r.bits), (0, 4999, 13));
    assert!(ObservedRange::from_values("a.b", []).is_none());
}

#[test]
fn undefined_columns_warn() {
    let mut t = Trace::new(vec!["A.x".into(), "A.y".into()]);
    t.push_row(vec![None, Some(3)]);
    t.push_row(vec![None, Some(250)]);
    let (ranges, warnings) = collect_observed_ranges(&t);
    assert_eq!(ranges.len(), 1);
    assert_eq!(ranges[0].column, "A.y");
    assert_eq!(warnings.len(), 1);
}

#[test]
fn signed_columns_are_read_as_signed() {
    let mut t = Trace::new(vec!["A.x".into()]);
    t.types = vec![Some(ScalarType::i(8))];
    t.push_row(vec![Some(0xf8)]);
    t.push_row(vec![Some(7)]);
    let (ranges, _) = collect_observed_ranges(&t);
    assert_eq!((ranges[0].min, ranges[0].max, ranges[0].bits), (-8, 7, 4));
}

const COUNTER_8: &str = "\
-- CSP_M model of network counter
-- The clock runs for 8 cycles. Channel value sets were observed in
-- simulation; a longer simulation may observe more values.

channel tock

-- LEDs.value: unsigned 0..2, 2 bits
nametype T_LEDs_value = {0..2}
channel LEDs_value : T_LEDs_value
OBS_LEDs_value = {0, 1, 2}

CYCLES = 8

CLOCK(n) = if n == 0 then SKIP else tock -> CLOCK(n - 1)

-- Process Counter
P_Counter(n) =
  if n == 0 then SKIP
  else ((|~| v : OBS_LEDs_value @ LEDs_value!v -> SKIP) ; tock -> P_Counter(n - 1))

SYSTEM = P_Counter(CYCLES) [| {tock} |] CLOCK(CYCLES)

SPEC_LEDs_value = (LEDs_value?x:OBS_LEDs_value -> SPEC_LEDs_value) [] SKIP
assert SPEC_LEDs_value [T= SYSTEM \\ diff(Events, {|LEDs_value|})
";

#[test]
fn counter_model_matches_reference() {
    let r = run_counter(3, 4, true, 8, false).unwrap();
    let (ranges, _) = collect_observed_ranges(r.trace.as_ref().unwrap());
    let net = crate::corpus::build_counter(3, 4).unwrap();
    let out = emit_cspm(&net, &ranges, 8).unwrap();
    assert_eq!(out.text, COUNTER_8);
    assert_eq!(out.assertions, 1);
    let m = parse(&out.text).unwrap();
    let ticks = run_deterministic(&m, "CLOCK", &[8], 1000).unwrap();
    assert_eq!(ticks.len(), 8);
    assert!(ticks.iter().all(|t| t == "tock"));
}

#[test]
fn histogram_model_parses() {
    let stream: Vec<(u64, u64)> = (0..40).map(|i| ((i * 7) % 16, i % 5)).collect();
    let run = run_histogram(16, 8, &stream, false).unwrap();
    let (ranges, _) = collect_observed_ranges(run.report.trace.as_ref().unwrap());
    let net = build_histogram(16, 8).unwrap();
    let out = emit_cspm(&net, &ranges, 30).unwrap();
    parse(&out.text).unwrap();
    assert!(out.channels.iter().any(|c| c == "Data_read_data"));
    assert_eq!(out.text, emit_cspm(&net, &ranges, 30).unwrap().text);
}

#[test]
fn errors_and_degenerate_networks() {
    let net = crate::corpus::build_counter(3, 4).unwrap();
    assert_eq!(
        emit_cspm(&net, &[], 8).unwrap_err(),
        CspmError::MissingRange("LEDs.value".into())
    );
    assert_eq!(emit_cspm(&net, &[], 0).unwrap_err(), CspmError::NoCycles);

    let shape =
        declare_bus_shape("B", vec![FieldSpec::new("x", ScalarType::u(4))], true, true).unwrap();
    let p = ProcessDef::new("Lonely", true)
        .output("o", &shape)
        .body(vec![Stmt::write("o", "x", Expr::lit(ScalarType::u(4), 1))]);
    let mut net = Network::new("solo");
    let b = net.instantiate_bus(&shape);
    net.add_process(p, &[], &[b]).unwrap();
    let out = emit_cspm(&net, &[], 3).unwrap();
    assert_eq!(out.assertions, 0);
    assert_eq!(out.warnings.len(), 1);
    let m = parse(&out.text).unwrap();
    assert_eq!(run_deterministic(&m, "CLOCK", &[3], 100).unwrap().len(), 3);
}
