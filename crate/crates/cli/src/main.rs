//! `smeforge`: simulate IL networks, generate VHDL and CSP_M, compare
//! traces and run the example networks.
//!
//! Exit codes: 0 success, 1 traces differ, 2 parse error, 3 validation
//! error, 4 simulation error, 5 I/O error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sme_core::corpus::{counter_driver, reference, HistogramDriver, MatmulDriver};
use sme_core::cspm::{collect_observed_ranges, emit_cspm};
use sme_core::graph::validate_network;
use sme_core::sim::stimulus::{constant_driver, replay_driver};
use sme_core::sim::{Driver, Simulator};
use sme_core::smeil::{self, Diagnostic};
use sme_core::trace::TraceError;
use sme_core::vhdl::{emit_design, PACKAGE_FILE, TESTBENCH_FILE, TOPLEVEL_FILE};
use sme_core::{diff_traces, Network, ProcessId, SimConfig, SimReport, Trace};

#[derive(Parser)]
#[command(
    name = "smeforge",
    version,
    about = "Synchronous message exchange networks: simulation and code generation"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate an IL network and write its trace.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        /// Trace output; standard output when omitted.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Generate VHDL, a testbench and its trace for an IL network.
    Vhdl {
        #[command(flatten)]
        run: RunArgs,
        /// Output directory.
        #[arg(long, short, default_value = "vhdl")]
        out: PathBuf,
        /// Use this trace for the testbench instead of simulating.
        #[arg(long, conflicts_with = "stimulus")]
        trace: Option<PathBuf>,
        /// Do not run an installed VHDL simulator.
        #[arg(long)]
        no_cosim: bool,
    },
    /// Generate a CSP_M model of an IL network.
    Cspm {
        #[command(flatten)]
        run: RunArgs,
        /// Output file; defaults to the input with a `.csp` extension.
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Take value ranges from this trace instead of simulating.
        #[arg(long, conflicts_with = "stimulus")]
        trace: Option<PathBuf>,
    },
    /// Compare two trace files cell by cell.
    TraceDiff {
        expected: PathBuf,
        actual: PathBuf,
        /// Mismatches to list.
        #[arg(long, default_value_t = 20)]
        max: usize,
    },
    /// Run one of the example networks from its IL source and check the
    /// result against a direct computation.
    Example {
        name: ExampleName,
        /// Stream length for `histogram`.
        #[arg(long, default_value_t = 1000)]
        pairs: usize,
        /// Cycles for `counter`.
        #[arg(long, default_value_t = 100)]
        cycles: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Override an IL parameter, as `name=value`.
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, i128)>,
        #[arg(long, value_enum, default_value_t = Scheduler::Sequential)]
        scheduler: Scheduler,
        /// Write the IL source and the trace here.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// IL source file.
    input: PathBuf,
    /// Cycles to simulate; defaults to the stimulus length.
    #[arg(long)]
    cycles: Option<u64>,
    /// Trace-format CSV replayed by every host process.
    #[arg(long)]
    stimulus: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Scheduler::Sequential)]
    scheduler: Scheduler,
    /// Read undefined fields as zero with a warning instead of failing.
    #[arg(long)]
    lenient: bool,
    /// Override an IL parameter, as `name=value`.
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, i128)>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Scheduler {
    Sequential,
    Parallel,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExampleName {
    Counter,
    Histogram,
    Matmul,
}

fn parse_param(s: &str) -> Result<(String, i128), String> {
    let (k, v) = s.split_once('=').ok_or("expected name=value")?;
    let v = v.trim().parse().map_err(|e| format!("`{v}`: {e}"))?;
    Ok((k.trim().to_string(), v))
}

enum Failure {
    Differ(String),
    Parse(String),
    Validation(String),
    Simulation(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Differ(_) => 1,
            Failure::Parse(_) => 2,
            Failure::Validation(_) => 3,
            Failure::Simulation(_) => 4,
            Failure::Io(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Differ(m)
            | Failure::Parse(m)
            | Failure::Validation(m)
            | Failure::Simulation(m)
            | Failure::Io(m) => m,
        }
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn io_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Outcome<String> {
    std::fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn write(path: &Path, text: &str) -> Outcome {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn diagnostics(path: &Path, diags: &[Diagnostic]) -> String {
    let lines: Vec<String> = diags
        .iter()
        .map(|d| format!("{}:{d}", path.display()))
        .collect();
    lines.join("\n")
}

fn read_trace(path: &Path) -> Outcome<Trace> {
    Trace::from_csv_str(&read(path)?).map_err(|e| match e {
        TraceError::Io(e) => io_err(path, e),
        e => Failure::Parse(format!("{}: {e}", path.display())),
    })
}

/// Parses, lowers and validates an IL source.
fn load(src: &str, path: &Path, params: &[(String, i128)]) -> Outcome<Network> {
    let unit = smeil::parse(src).map_err(|d| Failure::Parse(diagnostics(path, &d)))?;
    let overrides: Vec<(&str, i128)> = params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    let net = smeil::lower_with(&unit, &overrides)
        .map_err(|d| Failure::Validation(diagnostics(path, &d)))?;
    let report = validate_network(&net);
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if !report.is_ok() {
        let lines: Vec<String> = report
            .errors
            .iter()
            .map(|e| format!("error: {e}"))
            .collect();
        return Err(Failure::Validation(lines.join("\n")));
    }
    Ok(net)
}

fn simulate<'n>(
    net: &'n Network,
    cfg: SimConfig,
    drivers: Vec<(ProcessId, Box<dyn Driver + 'n>)>,
    scheduler: Scheduler,
) -> Outcome<SimReport> {
    let report = Simulator::new(net, cfg, drivers)
        .and_then(|s| s.parallel(scheduler == Scheduler::Parallel).run())
        .map_err(|e| Failure::Simulation(format!("simulation failed: {e}")))?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(report)
}

/// Loads `run.input` and simulates it with stimulus or constant drivers.
fn run_il(run: &RunArgs, default_cycles: Option<u64>) -> Outcome<(Network, Trace)> {
    let net = load(&read(&run.input)?, &run.input, &run.params)?;
    let stimulus = run.stimulus.as_deref().map(read_trace).transpose()?;
    let cycles = run
        .cycles
        .or(stimulus.as_ref().map(|t| t.cycles() as u64))
        .or(default_cycles)
        .ok_or_else(|| Failure::Validation("--cycles is required without --stimulus".into()))?;
    if cycles == 0 {
        return Err(Failure::Validation("--cycles must be at least 1".into()));
    }
    let trace = {
        let drivers: Vec<(ProcessId, Box<dyn Driver>)> = net
            .processes
            .iter()
            .filter(|p| p.is_host())
            .map(|p| {
                let d = match &stimulus {
                    Some(t) => replay_driver(t.clone()),
                    None => constant_driver(),
                };
                (p.id, d)
            })
            .collect();
        let mut cfg = SimConfig::cycles(cycles);
        if run.lenient {
            cfg = cfg.lenient();
        }
        let report = simulate(&net, cfg, drivers, run.scheduler)?;
        report.trace.expect("trace recorded")
    };
    Ok((net, trace))
}

fn cmd_simulate(run: &RunArgs, out: Option<&Path>) -> Outcome {
    let (_, trace) = run_il(run, None)?;
    let csv = trace.to_csv_string();
    match out {
        Some(p) => write(p, &csv)?,
        None => print!("{csv}"),
    }
    eprintln!("simulated {} cycles", trace.cycles());
    Ok(())
}

fn cmd_vhdl(run: &RunArgs, out: &Path, trace: Option<&Path>, no_cosim: bool) -> Outcome {
    let (net, trace) = match trace {
        Some(t) => (
            load(&read(&run.input)?, &run.input, &run.params)?,
            read_trace(t)?,
        ),
        None => run_il(run, Some(32))?,
    };
    let design = emit_design(&net).map_err(|e| Failure::Validation(e.to_string()))?;
    for p in &design.toplevel_ports {
        if trace.column_index(&p.column).is_none() {
            return Err(Failure::Validation(format!(
                "trace has no column `{}` for port `{}`",
                p.column, p.name
            )));
        }
    }
    for w in &design.warnings {
        eprintln!("warning: {w}");
    }
    for (file, text) in &design.files {
        write(&out.join(file), text)?;
    }
    write(&out.join("trace.csv"), &trace.to_csv_string())?;
    println!(
        "wrote {} files and trace.csv to {}",
        design.files.len(),
        out.display()
    );
    if no_cosim {
        return Ok(());
    }
    match cosimulate(out, &design.files, &design.testbench) {
        None => {
            println!("note: ghdl not found; skipping co-simulation");
            Ok(())
        }
        Some(Ok(0)) => {
            println!("co-simulation: 0 assertion failures");
            Ok(())
        }
        Some(Ok(n)) => Err(Failure::Simulation(format!(
            "co-simulation: {n} assertion failures"
        ))),
        Some(Err(e)) => Err(Failure::Simulation(format!("co-simulation failed: {e}"))),
    }
}

/// Runs the testbench under GHDL when it is installed. Returns the number
/// of assertion failures reported.
fn cosimulate(
    dir: &Path,
    files: &std::collections::BTreeMap<String, String>,
    tb: &str,
) -> Option<Result<usize, String>> {
    Command::new("ghdl").arg("--version").output().ok()?;
    let mut order = vec![PACKAGE_FILE.to_string()];
    order.extend(
        files
            .keys()
            .filter(|f| ![PACKAGE_FILE, TOPLEVEL_FILE, TESTBENCH_FILE].contains(&f.as_str()))
            .cloned(),
    );
    order.push(TOPLEVEL_FILE.into());
    order.push(TESTBENCH_FILE.into());
    let ghdl = |args: &[&str]| -> Result<String, String> {
        let out = Command::new("ghdl")
            .args(args)
            .current_dir(dir)
            .output()
            .map_err(|e| e.to_string())?;
        let text = String::from_utf8_lossy(&out.stdout).into_owned()
            + &String::from_utf8_lossy(&out.stderr);
        Ok(text)
    };
    let run = || -> Result<usize, String> {
        let mut analyse = vec!["-a", "--std=08"];
        analyse.extend(order.iter().map(String::as_str));
        let text = ghdl(&analyse)?;
        if text.contains("error") {
            return Err(text);
        }
        ghdl(&["-e", "--std=08", tb])?;
        let text = ghdl(&["-r", "--std=08", tb])?;
        Ok(text
            .lines()
            .filter(|l| l.contains("assertion error") || l.contains("(assertion error)"))
            .count())
    };
    Some(run())
}

fn cmd_cspm(run: &RunArgs, out: Option<&Path>, trace: Option<&Path>) -> Outcome {
    let (net, trace) = match trace {
        Some(t) => (
            load(&read(&run.input)?, &run.input, &run.params)?,
            read_trace(t)?,
        ),
        None => run_il(run, Some(8))?,
    };
    let cycles = run.cycles.unwrap_or(trace.cycles() as u64);
    let (ranges, warnings) = collect_observed_ranges(&trace);
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let model = emit_cspm(&net, &ranges, cycles).map_err(|e| Failure::Validation(e.to_string()))?;
    for w in &model.warnings {
        eprintln!("warning: {w}");
    }
    let path = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| run.input.with_extension("csp"));
    write(&path, &model.text)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_trace_diff(expected: &Path, actual: &Path, max: usize) -> Outcome {
    let (a, b) = (read_trace(expected)?, read_trace(actual)?);
    let diff = diff_traces(&a, &b).map_err(|e| Failure::Differ(e.to_string()))?;
    if diff.is_identical() {
        println!("identical");
        return Ok(());
    }
    let mut report = diff.summary();
    for m in diff.mismatches.iter().take(max) {
        let _ = write!(report, "\n  {m}");
    }
    if diff.mismatches.len() > max {
        let _ = write!(report, "\n  ... {} more", diff.mismatches.len() - max);
    }
    Err(Failure::Differ(report))
}

struct ExampleOpts<'a> {
    pairs: usize,
    cycles: u64,
    seed: u64,
    params: &'a [(String, i128)],
    scheduler: Scheduler,
    out: Option<&'a Path>,
}

fn cmd_example(name: ExampleName, o: &ExampleOpts) -> Outcome {
    let (label, src) = match name {
        ExampleName::Counter => ("counter", smeil::COUNTER_IL),
        ExampleName::Histogram => ("histogram", smeil::HISTOGRAM_IL),
        ExampleName::Matmul => ("matmul", smeil::MATMUL_IL),
    };
    let path = PathBuf::from(format!("{label}.sme"));
    let net = load(src, &path, o.params)?;
    let unit = smeil::parse(src).expect("bundled source parses");
    let overrides: Vec<(&str, i128)> = o.params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    let params = smeil::parameters(&unit, &overrides)
        .map_err(|d| Failure::Validation(diagnostics(&path, &d)))?;
    let param = |k: &str| {
        params
            .iter()
            .find(|(n, _)| n == k)
            .map(|(_, v)| *v)
            .expect("example parameter")
    };
    let host = net
        .process_by_name(sme_core::corpus::HOST)
        .expect("example host");
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed);

    let (summary, trace) = match name {
        ExampleName::Counter => {
            let (n, width) = (param("n") as u64, param("width") as u32);
            let report = simulate(
                &net,
                SimConfig::cycles(o.cycles),
                vec![(host, counter_driver(true))],
                o.scheduler,
            )?;
            let trace = report.trace.expect("trace");
            let mask = if width >= 64 {
                u64::MAX
            } else {
                (1u64 << width) - 1
            };
            // The value becomes visible one cycle after the counter updates it.
            for (c, v) in trace.column("LEDs.value").expect("column").enumerate() {
                let want = ((c as u64).saturating_sub(1) / n) & mask;
                if v != Some(want) {
                    return Err(Failure::Simulation(format!(
                        "cycle {c}: LEDs.value is {v:?}, expected {want}"
                    )));
                }
            }
            (
                format!("counter: {} cycles match the closed form", trace.cycles()),
                trace,
            )
        }
        ExampleName::Histogram => {
            let (bins, width) = (param("bins") as u64, param("width") as u8);
            let mask = if width >= 64 {
                u64::MAX
            } else {
                (1u64 << width) - 1
            };
            let mut stream: Vec<(u64, u64)> = Vec::with_capacity(o.pairs);
            for i in 0..o.pairs {
                let index = if i > 0 && rng.gen_bool(0.3) {
                    stream[i - 1].0
                } else {
                    rng.gen_range(0..bins)
                };
                stream.push((index, rng.gen::<u64>() & mask));
            }
            let (d, result) = HistogramDriver::new(bins as u32, stream.clone());
            let report = simulate(
                &net,
                SimConfig::until_drivers_done(),
                vec![(host, Box::new(d))],
                o.scheduler,
            )?;
            let got = result.borrow().memory.clone();
            let want = reference::histogram(bins as u32, width, &stream);
            if got != want {
                return Err(Failure::Simulation(format!(
                    "histogram: memory {got:?}, expected {want:?}"
                )));
            }
            let summary = format!(
                "histogram: {} pairs, {} cycles, oracle match",
                o.pairs, report.cycles_run
            );
            (summary, report.trace.expect("trace"))
        }
        ExampleName::Matmul => {
            let (rows, inner, cols) = (
                param("rows") as usize,
                param("inner") as usize,
                param("cols") as usize,
            );
            let width = param("width") as u8;
            let mask = if width >= 64 {
                u64::MAX
            } else {
                (1u64 << width) - 1
            };
            let a: Vec<u64> = (0..rows * inner).map(|_| rng.gen::<u64>() & mask).collect();
            let b: Vec<u64> = (0..inner * cols).map(|_| rng.gen::<u64>() & mask).collect();
            let (d, result) =
                MatmulDriver::new(rows as u64, inner as u64, cols as u64, a.clone(), b.clone());
            let report = simulate(
                &net,
                SimConfig::until_drivers_done(),
                vec![(host, Box::new(d))],
                o.scheduler,
            )?;
            let got = result.borrow().c.clone();
            let want = reference::matmul(rows, inner, cols, width, &a, &b);
            if got != want {
                return Err(Failure::Simulation(format!(
                    "matmul: C = {got:?}, expected {want:?}"
                )));
            }
            let summary = format!(
                "matmul: {rows}x{inner} * {inner}x{cols}, {} cycles, oracle match",
                report.cycles_run
            );
            (summary, report.trace.expect("trace"))
        }
    };
    if let Some(dir) = o.out {
        write(&dir.join(&path), src)?;
        write(&dir.join("trace.csv"), &trace.to_csv_string())?;
    }
    println!("{summary}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Cmd::Simulate { run, trace } => cmd_simulate(run, trace.as_deref()),
        Cmd::Vhdl {
            run,
            out,
            trace,
            no_cosim,
        } => cmd_vhdl(run, out, trace.as_deref(), *no_cosim),
        Cmd::Cspm { run, out, trace } => cmd_cspm(run, out.as_deref(), trace.as_deref()),
        Cmd::TraceDiff {
            expected,
            actual,
            max,
        } => cmd_trace_diff(expected, actual, *max),
        Cmd::Example {
            name,
            pairs,
            cycles,
            seed,
            params,
            scheduler,
            out,
        } => cmd_example(
            *name,
            &ExampleOpts {
                pairs: *pairs,
                cycles: *cycles,
                seed: *seed,
                params,
                scheduler: *scheduler,
                out: out.as_deref(),
            },
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Differ(m) => println!("{m}"),
                _ => eprintln!("{}", f.message()),
            }
            ExitCode::from(f.code())
        }
    }
}
