use super::*;
use crate::corpus::{build_counter, build_histogram, build_matmul};
use crate::ir::{Expr, Stmt};
use crate::model::{declare_bus_shape, FieldSpec, ProcessDef};

fn lint_all(d: &EmittedDesign) {
    for (name, src) in &d.files {
        let problems = lint::check(src);
        assert!(problems.is_empty(), "{name}: {problems:#?}");
    }
}

#[test]
fn counter_design_layout() {
    let net = build_counter(3, 4).unwrap();
    let d = emit_design(&net).unwrap();
    let names: Vec<&str> = d.files.keys().map(String::as_str).collect();
    assert_eq!(
        names,
        [
            "Counter.vhdl",
            "sme_types.vhdl",
            "testbench.vhdl",
            "toplevel.vhdl"
        ]
    );
    assert_eq!(d.toplevel, "counter_top");
    let ports: Vec<(&str, Direction)> = d
        .toplevel_ports
        .iter()
        .map(|p| (p.name.as_str(), p.direction))
        .collect();
    assert_eq!(
        ports,
        [
            ("Control_active", Direction::In),
            ("LEDs_value", Direction::Out)
        ]
    );
    assert!(d.warnings.is_empty());
    let counter = &d.files["Counter.vhdl"];
    assert!(counter.contains("p_main: process (CLK)"));
    assert!(counter.contains("leds_value : out unsigned(3 downto 0)"));
    lint_all(&d);
}

#[test]
fn corpus_designs_are_structurally_sound() {
    for net in [
        build_counter(5, 8).unwrap(),
        build_histogram(16, 8).unwrap(),
        build_matmul(3, 4, 2, 16).unwrap(),
    ] {
        let d = emit_design(&net).unwrap();
        lint_all(&d);
        assert_eq!(d, emit_design(&net).unwrap());
    }
}

#[test]
fn histogram_uses_templates_and_delays() {
    let net = build_histogram(16, 8).unwrap();
    let d = emit_design(&net).unwrap();
    let ram = &d.files["RAM.vhdl"];
    assert!(ram.contains("type mem_array_t is array (0 to 15) of unsigned(7 downto 0);"));
    assert!(ram.contains("write collision between ports"));
    // Forward is unclocked and drives Fwd, which the clocked Adder reads.
    assert!(d.files["Forward.vhdl"].contains("p_comb: process"));
    assert!(d.files[TOPLEVEL_FILE].contains("p_delay: process (CLK)"));
}

#[test]
fn no_ignored_process_warns() {
    let shape =
        declare_bus_shape("B", vec![FieldSpec::new("x", ScalarType::u(4))], true, true).unwrap();
    let p = ProcessDef::new("P", true)
        .output("o", &shape)
        .body(vec![Stmt::write("o", "x", Expr::lit(ScalarType::u(4), 1))]);
    let mut net = Network::new("solo");
    let b = net.instantiate_bus(&shape);
    net.add_process(p, &[], &[b]).unwrap();
    let d = emit_design(&net).unwrap();
    assert_eq!(d.warnings.len(), 1);
    assert!(d.toplevel_ports.is_empty());
    assert!(d.files[TOPLEVEL_FILE].contains("    RST : in std_logic\n  );"));
    lint_all(&d);
}

#[test]
fn clashing_names_stay_distinct() {
    let shape = declare_bus_shape(
        "signal",
        vec![FieldSpec::new("in", ScalarType::BOOL)],
        true,
        true,
    )
    .unwrap();
    let a = ProcessDef::new("process", true)
        .output("out", &shape)
        .body(vec![Stmt::write("out", "in", Expr::bool(true))]);
    let b = ProcessDef::new("Process", true)
        .input("in", &shape)
        .var("end", ScalarType::BOOL, None)
        .body(vec![Stmt::set("end", Expr::field("in", "in"))]);
    let mut net = Network::new("entity");
    let bus = net.instantiate_bus(&shape);
    net.add_process(a, &[], &[bus]).unwrap();
    net.add_process(b, &[bus], &[]).unwrap();
    let d = emit_design(&net).unwrap();
    let lower: BTreeSet<String> = d.files.keys().map(|k| k.to_ascii_lowercase()).collect();
    assert_eq!(lower.len(), d.files.len());
    assert!(d.files.contains_key("process_2.vhdl"));
    assert!(d.files.contains_key("Process_3.vhdl"));
    lint_all(&d);
}

#[test]
fn literals() {
    assert_eq!(literal(ScalarType::u(4), 9), "to_unsigned(9, 4)");
    assert_eq!(literal(ScalarType::i(8), 0xfe), "to_signed(-2, 8)");
    assert_eq!(literal(ScalarType::BOOL, 1), "'1'");
    assert_eq!(
        literal(ScalarType::u(33), 1 << 32),
        "unsigned'(\"100000000000000000000000000000000\")"
    );
}
