//! Byte-exact snapshots of the generated VHDL, CSP_M and traces for the
//! example networks. Run with `UPDATE_GOLDEN=1` to rewrite them.

use std::path::{Path, PathBuf};

use sme_core::corpus::{
    build_counter, build_histogram, build_matmul, run_counter, run_histogram, run_matmul,
};
use sme_core::cspm::syntax::{parse, run_deterministic};
use sme_core::cspm::{collect_observed_ranges, emit_cspm};
use sme_core::vhdl::{emit_design, lint};
use sme_core::{Network, Trace};

fn golden_dir(example: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(example)
}

fn check(example: &str, file: &str, actual: &str) {
    let path = golden_dir(example).join(file);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("{}: {e}; rerun with UPDATE_GOLDEN=1", path.display()));
    if expected != actual {
        let line = expected
            .lines()
            .zip(actual.lines())
            .position(|(a, b)| a != b)
            .unwrap_or_else(|| expected.lines().count().min(actual.lines().count()));
        panic!(
            "{} differs from the snapshot at line {}",
            path.display(),
            line + 1
        );
    }
}

pub fn examples() -> Vec<(&'static str, Network, Trace)> {
    let counter = run_counter(3, 4, true, 12, false).unwrap().trace.unwrap();
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
    let histogram = run_histogram(4, 8, &stream, false)
        .unwrap()
        .report
        .trace
        .unwrap();
    let a = [1, 2, 3, 4, 5, 6];
    let b = [7, 8, 9, 10, 11, 12];
    let matmul = run_matmul(2, 3, 2, 16, &a, &b, false)
        .unwrap()
        .report
        .trace
        .unwrap();
    vec![
        ("counter", build_counter(3, 4).unwrap(), counter),
        ("histogram", build_histogram(4, 8).unwrap(), histogram),
        ("matmul", build_matmul(2, 3, 2, 16).unwrap(), matmul),
    ]
}

#[test]
fn vhdl_snapshots() {
    for (name, net, trace) in examples() {
        let design = emit_design(&net).unwrap();
        for (file, src) in &design.files {
            assert!(lint::check(src).is_empty(), "{name}/{file}");
            check(name, &format!("vhdl/{file}"), src);
        }
        check(name, "trace.csv", &trace.to_csv_string());
        // Every toplevel port has a trace column for the testbench to use.
        for p in &design.toplevel_ports {
            assert!(
                trace.column_index(&p.column).is_some(),
                "{name}: {}",
                p.column
            );
        }
    }
}

#[test]
fn cspm_snapshots() {
    for (name, net, trace) in examples() {
        let (ranges, _) = collect_observed_ranges(&trace);
        let cycles = trace.cycles() as u64;
        let out = emit_cspm(&net, &ranges, cycles).unwrap();
        let module = parse(&out.text).unwrap_or_else(|e| panic!("{name}: {e:?}"));
        let tocks = run_deterministic(&module, "CLOCK", &[cycles as i64], 100_000).unwrap();
        assert_eq!(tocks.len() as u64, cycles);
        assert_eq!(out.text, emit_cspm(&net, &ranges, cycles).unwrap().text);
        check(name, &format!("{name}.csp"), &out.text);
    }
}
