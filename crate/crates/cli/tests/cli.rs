use std::path::Path;
use std::process::{Command, Output};

const COUNTER: &str = include_str!("../../core/il/counter.sme");

fn smeforge(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smeforge"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn workspace() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("counter.sme"), COUNTER).unwrap();
    dir
}

#[test]
fn simulate_writes_one_row_per_cycle() {
    let dir = workspace();
    let o = smeforge(
        dir.path(),
        &[
            "simulate",
            "counter.sme",
            "--cycles",
            "20",
            "--trace",
            "out.csv",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
    assert_eq!(csv.lines().count(), 21);
}

#[test]
fn schedulers_agree_byte_for_byte() {
    let dir = workspace();
    for (s, f) in [("sequential", "a.csv"), ("parallel", "b.csv")] {
        let o = smeforge(
            dir.path(),
            &[
                "simulate",
                "counter.sme",
                "--cycles",
                "30",
                "--scheduler",
                s,
                "--trace",
                f,
            ],
        );
        assert_eq!(code(&o), 0);
    }
    let read = |f: &str| std::fs::read(dir.path().join(f)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
}

#[test]
fn stimulus_replays_a_trace() {
    let dir = workspace();
    let mut csv = String::from("Control.active,LEDs.value\n");
    for _ in 0..10 {
        csv.push_str("1,U\n");
    }
    std::fs::write(dir.path().join("stim.csv"), csv).unwrap();
    let o = smeforge(
        dir.path(),
        &[
            "simulate",
            "counter.sme",
            "--stimulus",
            "stim.csv",
            "--param",
            "n=2",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let values: Vec<String> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().to_string())
        .collect();
    assert_eq!(values, ["0", "0", "0", "1", "1", "2", "2", "3", "3", "4"]);
}

#[test]
fn trace_diff_reports_identity_and_mismatches() {
    let dir = workspace();
    smeforge(
        dir.path(),
        &[
            "simulate",
            "counter.sme",
            "--cycles",
            "5",
            "--trace",
            "a.csv",
        ],
    );
    let o = smeforge(dir.path(), &["trace-diff", "a.csv", "a.csv"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "identical");
    let a = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    std::fs::write(
        dir.path().join("b.csv"),
        a.replacen("0,0\n0,0\n", "0,0\n0,7\n", 1),
    )
    .unwrap();
    let o = smeforge(dir.path(), &["trace-diff", "a.csv", "b.csv"]);
    assert_eq!(code(&o), 1);
    assert!(
        stdout(&o).contains("cycle 1: LEDs.value expected 0 got 7"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn vhdl_and_cspm_outputs() {
    let dir = workspace();
    let o = smeforge(
        dir.path(),
        &[
            "vhdl",
            "counter.sme",
            "--cycles",
            "12",
            "--out",
            "v",
            "--no-cosim",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for f in [
        "Counter.vhdl",
        "sme_types.vhdl",
        "toplevel.vhdl",
        "testbench.vhdl",
        "trace.csv",
    ] {
        assert!(dir.path().join("v").join(f).exists(), "{f}");
    }
    let o = smeforge(dir.path(), &["cspm", "counter.sme", "--cycles", "8"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csp = std::fs::read_to_string(dir.path().join("counter.csp")).unwrap();
    assert_eq!(csp.matches("assert ").count(), 1);
}

#[test]
fn vhdl_rejects_a_trace_without_port_columns() {
    let dir = workspace();
    std::fs::write(dir.path().join("t.csv"), "Control.active\n0\n").unwrap();
    let o = smeforge(
        dir.path(),
        &["vhdl", "counter.sme", "--trace", "t.csv", "--no-cosim"],
    );
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("LEDs.value"), "{}", stderr(&o));
}

#[test]
fn examples_are_oracle_checked() {
    let dir = workspace();
    let o = smeforge(
        dir.path(),
        &["example", "histogram", "--pairs", "300", "--seed", "7"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("oracle match"));
    let o = smeforge(
        dir.path(),
        &["example", "matmul", "--seed", "1", "--out", "m"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(dir.path().join("m/matmul.sme").exists());
    let o = smeforge(dir.path(), &["example", "counter"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = smeforge(dir.path(), &["example", "fft"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn exit_codes_follow_the_failure_kind() {
    let dir = workspace();
    let write = |name: &str, text: &str| std::fs::write(dir.path().join(name), text).unwrap();
    write("syntax.sme", "bus B clocked { x: u8 }\n");
    write(
        "cycle.sme",
        "bus B unclocked { x: u8; }\n\
         proc P unclocked (in i: B, out o: B) { o.x := i.x; }\n\
         network n { bus X: B; bus Y: B; A = P(i = X, o = Y); C = P(i = Y, o = X); }\n",
    );
    write(
        "fail.sme",
        "bus B clocked { x: u8 = 0; }\n\
         proc P clocked (in i: B) { assert i.x != 0, \"zero\"; }\n\
         network n { bus X: B; P(i = X); }\n",
    );
    let o = smeforge(dir.path(), &["simulate", "syntax.sme", "--cycles", "2"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("syntax.sme:1:23"), "{}", stderr(&o));
    let o = smeforge(dir.path(), &["simulate", "cycle.sme", "--cycles", "2"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("A -> C -> A"), "{}", stderr(&o));
    let o = smeforge(dir.path(), &["simulate", "fail.sme", "--cycles", "2"]);
    assert_eq!(code(&o), 4);
    assert!(
        stderr(&o).contains("cycle 0") && stderr(&o).contains("`P`"),
        "{}",
        stderr(&o)
    );
    let o = smeforge(dir.path(), &["simulate", "absent.sme", "--cycles", "2"]);
    assert_eq!(code(&o), 5);
}
