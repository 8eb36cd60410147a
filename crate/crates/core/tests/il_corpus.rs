//! The IL sources of the example networks elaborate to the same designs as
//! the Rust builders: identical VHDL and identical simulation traces.

use sme_core::corpus::{
    build_counter, build_histogram, build_matmul, counter_driver, HistogramDriver, MatmulDriver,
    HOST,
};
use sme_core::sim::{Driver, Simulator};
use sme_core::smeil::{compile, COUNTER_IL, HISTOGRAM_IL, MATMUL_IL};
use sme_core::vhdl::emit_design;
use sme_core::{Network, SimConfig};

fn trace_csv(net: &Network, cfg: SimConfig, driver: Box<dyn Driver + '_>) -> String {
    let host = net.process_by_name(HOST).unwrap();
    let report = Simulator::new(net, cfg, [(host, driver)])
        .unwrap()
        .run()
        .unwrap();
    report.trace.unwrap().to_csv_string()
}

fn same_vhdl(a: &Network, b: &Network) {
    let (a, b) = (emit_design(a).unwrap(), emit_design(b).unwrap());
    assert_eq!(a.files.len(), b.files.len());
    for ((fa, sa), (fb, sb)) in a.files.iter().zip(&b.files) {
        assert_eq!(fa, fb);
        assert!(sa == sb, "{fa} differs");
    }
}

#[test]
fn counter_matches_builder() {
    for (n, width) in [(3, 4), (1, 2), (5, 8)] {
        let il = compile(COUNTER_IL, &[("n", n), ("width", width)]).unwrap();
        let rs = build_counter(n as u64, width as u8).unwrap();
        same_vhdl(&il, &rs);
        let cfg = || SimConfig::cycles(20);
        assert_eq!(
            trace_csv(&il, cfg(), counter_driver(true)),
            trace_csv(&rs, cfg(), counter_driver(true))
        );
    }
}

#[test]
fn histogram_matches_builder() {
    let stream = vec![
        (1, 5),
        (1, 3),
        (0, 7),
        (1, 1),
        (3, 2),
        (3, 2),
        (2, 9),
        (1, 4),
    ];
    for (bins, width) in [(4u32, 8u8), (6, 5)] {
        let il = compile(
            HISTOGRAM_IL,
            &[("bins", bins as i128), ("width", width as i128)],
        )
        .unwrap();
        let rs = build_histogram(bins, width).unwrap();
        same_vhdl(&il, &rs);
        let run = |net: &Network| {
            let (d, result) = HistogramDriver::new(bins, stream.clone());
            let csv = trace_csv(net, SimConfig::until_drivers_done(), Box::new(d));
            let memory = result.borrow().memory.clone();
            (csv, memory)
        };
        assert_eq!(run(&il), run(&rs));
    }
}

#[test]
fn matmul_matches_builder() {
    for (rows, inner, cols) in [(2u32, 3u32, 2u32), (3, 1, 4)] {
        let over = [
            ("rows", rows as i128),
            ("inner", inner as i128),
            ("cols", cols as i128),
        ];
        let il = compile(MATMUL_IL, &over).unwrap();
        let rs = build_matmul(rows, inner, cols, 16).unwrap();
        same_vhdl(&il, &rs);
        let a: Vec<u64> = (1..=(rows * inner) as u64).collect();
        let b: Vec<u64> = (7..7 + (inner * cols) as u64).collect();
        let run = |net: &Network| {
            let (d, result) =
                MatmulDriver::new(rows as u64, inner as u64, cols as u64, a.clone(), b.clone());
            let csv = trace_csv(net, SimConfig::until_drivers_done(), Box::new(d));
            let c = result.borrow().c.clone();
            (csv, c)
        };
        assert_eq!(run(&il), run(&rs));
    }
}
