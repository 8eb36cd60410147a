//! Cycle-by-cycle execution of a [`Network`].
//!
//! Every bus field has three slots: the value readers see this cycle, a
//! staged value and a written flag. Writes only ever touch the staged slot;
//! propagation copies written fields to the visible slot and clears the
//! flag, so an unwritten field keeps (latches) its last value.

mod interp;
pub mod stimulus;

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{build_dependency_graph, validate_network, GraphError};
use crate::model::{BusId, FieldRef, Network, ProcessId};
use crate::trace::Trace;
use crate::types::Value;
use interp::{ExecError, Frame, Visible};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimConfig {
    pub max_cycles: Option<u64>,
    pub stop_when_drivers_done: bool,
    pub record_trace: bool,
    /// Reading an undefined field is an error; otherwise it reads as zero
    /// and a warning is logged.
    pub strict_undefined_read: bool,
    /// Keep the per-cycle trigger order in the report.
    pub record_schedule: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            max_cycles: None,
            stop_when_drivers_done: true,
            record_trace: true,
            strict_undefined_read: true,
            record_schedule: false,
        }
    }
}

impl SimConfig {
    /// Runs exactly `n` cycles unless an error occurs.
    pub fn cycles(n: u64) -> Self {
        SimConfig {
            max_cycles: Some(n),
            stop_when_drivers_done: false,
            ..SimConfig::default()
        }
    }

    pub fn until_drivers_done() -> Self {
        SimConfig::default()
    }

    pub fn with_max_cycles(mut self, n: u64) -> Self {
        self.max_cycles = Some(n);
        self
    }

    pub fn lenient(mut self) -> Self {
        self.strict_undefined_read = false;
        self
    }

    pub fn with_schedule(mut self) -> Self {
        self.record_schedule = true;
        self
    }

    pub fn without_trace(mut self) -> Self {
        self.record_trace = false;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("no stop condition configured")]
    NoStopCondition,
    #[error("invalid network: {}", .0.join("; "))]
    InvalidNetwork(Vec<String>),
    #[error("host process `{process}` has no driver")]
    MissingDriver { process: String },
    #[error("driver attached to `{process}`, which is not a host process")]
    NotHostProcess { process: String },
    #[error("cycle {cycle}: process `{process}` read undefined field `{bus}.{field}`")]
    UndefinedRead {
        process: String,
        bus: String,
        field: String,
        cycle: u64,
    },
    #[error("cycle {cycle}: process `{process}` divided by zero")]
    DivideByZero { process: String, cycle: u64 },
    #[error("cycle {cycle}: process `{process}` assertion failed: {message}")]
    AssertionFailed {
        process: String,
        message: String,
        cycle: u64,
    },
    #[error("cycle {cycle}: process `{process}` indexed out of bounds")]
    IndexOutOfBounds { process: String, cycle: u64 },
    #[error("cycle {cycle}: processes {stuck:?} could not be scheduled")]
    Deadlock { cycle: u64, stuck: Vec<String> },
    #[error("cycle {cycle}: driver `{process}` may not {access} `{field}`")]
    DriverAccess {
        process: String,
        field: String,
        access: &'static str,
        cycle: u64,
    },
    #[error("cycle {cycle}: driver `{process}`: {message}")]
    Driver {
        process: String,
        message: String,
        cycle: u64,
    },
}

impl SimError {
    /// Cycle at which a runtime error happened.
    pub fn cycle(&self) -> Option<u64> {
        match self {
            SimError::UndefinedRead { cycle, .. }
            | SimError::DivideByZero { cycle, .. }
            | SimError::AssertionFailed { cycle, .. }
            | SimError::IndexOutOfBounds { cycle, .. }
            | SimError::Deadlock { cycle, .. }
            | SimError::DriverAccess { cycle, .. }
            | SimError::Driver { cycle, .. } => Some(*cycle),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    /// Suspend until the next clock tick.
    Continue,
    /// The driver is finished; it will not be resumed again.
    Done,
}

/// Host behaviour of a simulation process. `step` is called once per cycle
/// until it returns [`Step::Done`].
pub trait Driver {
    fn step(&mut self, io: &mut HostIo<'_>) -> Result<Step, SimError>;
}

struct FnDriver<F>(F);

impl<F> Driver for FnDriver<F>
where
    F: FnMut(&mut HostIo<'_>) -> Result<Step, SimError>,
{
    fn step(&mut self, io: &mut HostIo<'_>) -> Result<Step, SimError> {
        (self.0)(io)
    }
}

/// Wraps a closure as a driver.
pub fn driver<'a, F>(f: F) -> Box<dyn Driver + 'a>
where
    F: FnMut(&mut HostIo<'_>) -> Result<Step, SimError> + 'a,
{
    Box::new(FnDriver(f))
}

/// Bus access for a driver during one cycle.
pub struct HostIo<'a> {
    net: &'a Network,
    process: ProcessId,
    cycle: u64,
    state: &'a mut FieldState,
    readable: &'a [bool],
    writable: &'a [bool],
    strict: bool,
    warnings: &'a mut Vec<String>,
}

impl<'a> HostIo<'a> {
    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn process(&self) -> ProcessId {
        self.process
    }

    pub fn network(&self) -> &Network {
        self.net
    }

    /// Field `name` of the bus bound to input or output port `port`.
    pub fn port_field(&self, port: &str, name: &str) -> Option<FieldRef> {
        let p = self.net.process(self.process);
        let bus = p
            .def
            .input_index(port)
            .map(|i| p.inputs[i])
            .or_else(|| p.def.output_index(port).map(|i| p.outputs[i]))?;
        self.net.field(bus, name)
    }

    /// Resolves `"port.field"` through [`port_field`](Self::port_field).
    pub fn resolve(&self, path: &str) -> Option<FieldRef> {
        let (port, field) = path.split_once('.')?;
        self.port_field(port, field)
    }

    fn error_access(&self, f: FieldRef, access: &'static str) -> SimError {
        SimError::DriverAccess {
            process: self.net.process(self.process).name.clone(),
            field: self.net.field_name(f),
            access,
            cycle: self.cycle,
        }
    }

    /// Visible value of an input field, including its defined flag.
    pub fn read(&self, f: FieldRef) -> Result<Value, SimError> {
        let slot = self.net.slot(f);
        if !self.readable[slot] {
            return Err(self.error_access(f, "read"));
        }
        let ty = self.net.field_spec(f).ty;
        Ok(if self.state.defined[slot] {
            Value::new(ty, self.state.current[slot])
        } else {
            Value::undefined(ty)
        })
    }

    /// Raw bits of an input field; undefined reads follow the strictness
    /// setting.
    pub fn get(&mut self, f: FieldRef) -> Result<u64, SimError> {
        let v = self.read(f)?;
        if !v.defined {
            let bus = self.net.bus(f.bus);
            let process = self.net.process(self.process).name.clone();
            if self.strict {
                return Err(SimError::UndefinedRead {
                    process,
                    bus: bus.name.clone(),
                    field: bus.shape.fields[f.field].name.clone(),
                    cycle: self.cycle,
                });
            }
            self.warnings.push(format!(
                "cycle {}: `{process}` read undefined `{}` as zero",
                self.cycle,
                self.net.field_name(f)
            ));
            return Ok(0);
        }
        Ok(v.bits)
    }

    pub fn get_signed(&mut self, f: FieldRef) -> Result<i128, SimError> {
        let bits = self.get(f)?;
        Ok(Value::new(self.net.field_spec(f).ty, bits).as_i128())
    }

    /// Stages a write to an owned field; the value is truncated to the
    /// field's width.
    pub fn set(&mut self, f: FieldRef, bits: u64) -> Result<(), SimError> {
        let slot = self.net.slot(f);
        if !self.writable[slot] {
            return Err(self.error_access(f, "write"));
        }
        let ty = self.net.field_spec(f).ty;
        self.state.stage(slot, ty.wrap(bits));
        Ok(())
    }

    /// Stages a write of a mathematical value, wrapped to the field type.
    pub fn set_value(&mut self, f: FieldRef, v: i128) -> Result<(), SimError> {
        let ty = self.net.field_spec(f).ty;
        self.set(f, ty.wrap_i128(v))
    }

    fn resolve_or_fail(&self, path: &str) -> Result<FieldRef, SimError> {
        self.resolve(path)
            .ok_or_else(|| self.fail(format!("no port field `{path}`")))
    }

    /// [`set`](Self::set) addressed by `"port.field"`.
    pub fn put(&mut self, path: &str, bits: u64) -> Result<(), SimError> {
        let f = self.resolve_or_fail(path)?;
        self.set(f, bits)
    }

    /// [`get`](Self::get) addressed by `"port.field"`.
    pub fn take(&mut self, path: &str) -> Result<u64, SimError> {
        let f = self.resolve_or_fail(path)?;
        self.get(f)
    }

    /// Error value for driver-level failures such as a failed check.
    pub fn fail(&self, message: impl Into<String>) -> SimError {
        SimError::Driver {
            process: self.net.process(self.process).name.clone(),
            message: message.into(),
            cycle: self.cycle,
        }
    }
}

#[derive(Debug, Clone)]
struct FieldState {
    current: Vec<u64>,
    defined: Vec<bool>,
    staged: Vec<u64>,
    written: Vec<bool>,
}

impl FieldState {
    fn new(net: &Network) -> Self {
        let n = net.field_count();
        let mut s = FieldState {
            current: vec![0; n],
            defined: vec![false; n],
            staged: vec![0; n],
            written: vec![false; n],
        };
        for f in net.fields() {
            if let Some(init) = net.field_spec(f).initial {
                let slot = net.slot(f);
                s.current[slot] = init.bits;
                s.staged[slot] = init.bits;
                s.defined[slot] = true;
            }
        }
        s
    }

    fn stage(&mut self, slot: usize, bits: u64) {
        self.staged[slot] = bits;
        self.written[slot] = true;
    }

    fn propagate(&mut self, slots: std::ops::Range<usize>) {
        for s in slots {
            if self.written[s] {
                self.current[s] = self.staged[s];
                self.defined[s] = true;
                self.written[s] = false;
            }
        }
    }
}

/// Why a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxCycles,
    DriversDone,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::MaxCycles => "cycle limit reached",
            StopReason::DriversDone => "all drivers completed",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SimReport {
    pub cycles_run: u64,
    pub stop: StopReason,
    pub trace: Option<Trace>,
    pub warnings: Vec<String>,
    /// Total triggers per process.
    pub triggers: Vec<u64>,
    /// Per cycle, the processes in trigger order with their wave index.
    pub schedule: Option<Vec<Vec<(ProcessId, usize)>>>,
}

struct ProcRt {
    store: Vec<u64>,
    in_base: Vec<u32>,
    out_base: Vec<u32>,
    writes: Vec<(u32, u64)>,
    lenient_reads: Vec<usize>,
}

/// Owns the evolving state of one simulation run.
pub struct Simulator<'n> {
    net: &'n Network,
    cfg: SimConfig,
    waves: Vec<Vec<ProcessId>>,
    /// Output bus ranges to propagate after each wave, unclocked only.
    wave_props: Vec<Vec<std::ops::Range<usize>>>,
    clocked_slots: Vec<std::ops::Range<usize>>,
    state: FieldState,
    procs: Vec<ProcRt>,
    drivers: Vec<Option<Box<dyn Driver + 'n>>>,
    done: Vec<bool>,
    readable: Vec<Vec<bool>>,
    writable: Vec<Vec<bool>>,
    cycle: u64,
    parallel: bool,
    trace: Option<Trace>,
    warnings: Vec<String>,
    warned: std::collections::BTreeSet<(usize, usize)>,
    triggers: Vec<u64>,
    schedule: Option<Vec<Vec<(ProcessId, usize)>>>,
}

impl<'n> Simulator<'n> {
    /// Validates `net` and prepares cycle 0. Every host process needs a
    /// driver in `drivers`.
    pub fn new<I>(net: &'n Network, cfg: SimConfig, drivers: I) -> Result<Self, SimError>
    where
        I: IntoIterator<Item = (ProcessId, Box<dyn Driver + 'n>)>,
    {
        if cfg.max_cycles.is_none() && !cfg.stop_when_drivers_done {
            return Err(SimError::NoStopCondition);
        }
        let report = validate_network(net);
        if !report.is_ok() {
            return Err(SimError::InvalidNetwork(
                report.errors.iter().map(|e| e.to_string()).collect(),
            ));
        }
        let graph = build_dependency_graph(net)
            .map_err(|e| SimError::InvalidNetwork(vec![e.to_string()]))?;
        let waves = graph.waves().map_err(|e| match e {
            GraphError::Deadlock(stuck) => SimError::Deadlock {
                cycle: 0,
                stuck: stuck.iter().map(|p| net.process(*p).name.clone()).collect(),
            },
            other => SimError::InvalidNetwork(vec![other.to_string()]),
        })?;

        let n = net.processes.len();
        let mut slots: Vec<Option<Box<dyn Driver + 'n>>> = (0..n).map(|_| None).collect();
        for (pid, d) in drivers {
            let p = net.process(pid);
            if !p.is_host() {
                return Err(SimError::NotHostProcess {
                    process: p.name.clone(),
                });
            }
            slots[pid.0] = Some(d);
        }
        for p in &net.processes {
            if p.is_host() && slots[p.id.0].is_none() {
                return Err(SimError::MissingDriver {
                    process: p.name.clone(),
                });
            }
        }

        let range = |b: BusId| {
            let bus = net.bus(b);
            bus.first_slot..bus.first_slot + bus.shape.fields.len()
        };
        let wave_props = waves
            .iter()
            .map(|wave| {
                let mut buses: Vec<BusId> = wave
                    .iter()
                    .flat_map(|p| net.process(*p).outputs.iter().copied())
                    .filter(|b| !net.bus(*b).clocked())
                    .collect();
                buses.sort();
                buses.dedup();
                buses.into_iter().map(range).collect()
            })
            .collect();
        let clocked_slots = net
            .buses
            .iter()
            .filter(|b| b.clocked())
            .map(|b| range(b.id))
            .collect();

        let fc = net.field_count();
        let mut readable = Vec::with_capacity(n);
        let mut writable = Vec::with_capacity(n);
        let mut procs = Vec::with_capacity(n);
        for p in &net.processes {
            let base = |b: &BusId| net.bus(*b).first_slot as u32;
            procs.push(ProcRt {
                store: p
                    .compiled
                    .as_ref()
                    .map(|c| c.initial_store())
                    .unwrap_or_default(),
                in_base: p.inputs.iter().map(base).collect(),
                out_base: p.outputs.iter().map(base).collect(),
                writes: Vec::new(),
                lenient_reads: Vec::new(),
            });
            let (mut r, mut w) = (Vec::new(), Vec::new());
            if p.is_host() {
                r = vec![false; fc];
                w = vec![false; fc];
                for f in net.fields_read_by(p.id) {
                    r[net.slot(f)] = true;
                }
                for f in p.owned_fields() {
                    w[net.slot(f)] = true;
                }
            }
            readable.push(r);
            writable.push(w);
        }

        Ok(Simulator {
            net,
            trace: cfg.record_trace.then(|| Trace::for_network(net)),
            schedule: cfg.record_schedule.then(Vec::new),
            cfg,
            waves,
            wave_props,
            clocked_slots,
            state: FieldState::new(net),
            procs,
            drivers: slots,
            done: vec![false; n],
            readable,
            writable,
            cycle: 0,
            parallel: false,
            warnings: Vec::new(),
            warned: Default::default(),
            triggers: vec![0; n],
        })
    }

    /// Uses the wave-parallel scheduler for IR processes.
    pub fn parallel(mut self, on: bool) -> Self {
        self.parallel = on;
        self
    }

    pub fn network(&self) -> &Network {
        self.net
    }

    /// Index of the next cycle to run.
    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn waves(&self) -> &[Vec<ProcessId>] {
        &self.waves
    }

    /// Value of a field as visible to readers in the last completed cycle.
    pub fn field(&self, f: FieldRef) -> Value {
        let slot = self.net.slot(f);
        let ty = self.net.field_spec(f).ty;
        if self.state.defined[slot] {
            Value::new(ty, self.state.current[slot])
        } else {
            Value::undefined(ty)
        }
    }

    /// Contents of variable `name` of an IR process, one entry per element.
    pub fn variable(&self, p: ProcessId, name: &str) -> Option<Vec<Value>> {
        let compiled = self.net.process(p).compiled.as_ref()?;
        let v = compiled.var(name)?;
        let ty = v.ty.scalar;
        let off = v.offset as usize;
        Some(
            self.procs[p.0].store[off..off + v.ty.slots()]
                .iter()
                .map(|&b| Value::new(ty, b))
                .collect(),
        )
    }

    pub fn live_drivers(&self) -> usize {
        self.drivers
            .iter()
            .enumerate()
            .filter(|(i, d)| d.is_some() && !self.done[*i])
            .count()
    }

    fn should_stop(&self) -> Option<StopReason> {
        if let Some(m) = self.cfg.max_cycles {
            if self.cycle >= m {
                return Some(StopReason::MaxCycles);
            }
        }
        if self.cfg.stop_when_drivers_done && self.live_drivers() == 0 {
            return Some(StopReason::DriversDone);
        }
        None
    }

    /// Runs until a stop condition holds.
    pub fn run(mut self) -> Result<SimReport, SimError> {
        let stop = loop {
            if let Some(reason) = self.should_stop() {
                break reason;
            }
            self.step_cycle()?;
        };
        Ok(self.into_report(stop))
    }

    fn into_report(self, stop: StopReason) -> SimReport {
        SimReport {
            cycles_run: self.cycle,
            stop,
            trace: self.trace,
            warnings: self.warnings,
            triggers: self.triggers,
            schedule: self.schedule,
        }
    }

    /// Executes one full clock cycle.
    pub fn step_cycle(&mut self) -> Result<(), SimError> {
        for r in &self.clocked_slots {
            self.state.propagate(r.clone());
        }
        let mut order = self.cfg.record_schedule.then(Vec::new);
        for w in 0..self.waves.len() {
            if self.parallel {
                self.run_wave_parallel(w)?;
            } else {
                self.run_wave_sequential(w)?;
            }
            for &p in &self.waves[w] {
                self.triggers[p.0] += 1;
                if let Some(o) = order.as_mut() {
                    o.push((p, w));
                }
            }
            for r in &self.wave_props[w] {
                self.state.propagate(r.clone());
            }
        }
        if let (Some(s), Some(o)) = (self.schedule.as_mut(), order) {
            s.push(o);
        }
        if let Some(t) = self.trace.as_mut() {
            t.push_row(
                (0..self.state.current.len())
                    .map(|s| self.state.defined[s].then_some(self.state.current[s]))
                    .collect(),
            );
        }
        self.cycle += 1;
        Ok(())
    }

    fn run_wave_sequential(&mut self, w: usize) -> Result<(), SimError> {
        for i in 0..self.waves[w].len() {
            let p = self.waves[w][i];
            if self.net.process(p).is_host() {
                self.resume_driver(p)?;
            } else {
                let res = {
                    let vis = Visible {
                        current: &self.state.current,
                        defined: &self.state.defined,
                        strict: self.cfg.strict_undefined_read,
                    };
                    exec_process(self.net, p, &mut self.procs[p.0], &vis)
                };
                res.map_err(|e| self.exec_error(p, e))?;
                self.commit(p);
            }
        }
        Ok(())
    }

    fn run_wave_parallel(&mut self, w: usize) -> Result<(), SimError> {
        let wave = self.waves[w].clone();
        let mut in_wave = vec![false; self.procs.len()];
        for &p in &wave {
            in_wave[p.0] = !self.net.process(p).is_host();
        }
        // Drivers need exclusive access to the staging area, so they run
        // before the IR processes of the wave. Neither can observe the
        // other's writes within the wave.
        let mut first_err: Option<(ProcessId, SimError)> = None;
        for &p in &wave {
            if self.net.process(p).is_host() {
                if let Err(e) = self.resume_driver(p) {
                    first_err = Some((p, e));
                    break;
                }
            }
        }
        let net = self.net;
        let vis = Visible {
            current: &self.state.current,
            defined: &self.state.defined,
            strict: self.cfg.strict_undefined_read,
        };
        let results: Vec<(ProcessId, Result<(), ExecError>)> = self
            .procs
            .par_iter_mut()
            .enumerate()
            .filter(|(i, _)| in_wave[*i])
            .map(|(i, rt)| (ProcessId(i), exec_process(net, ProcessId(i), rt, &vis)))
            .collect();
        for (p, r) in results {
            if let Err(e) = r {
                if first_err.as_ref().map_or(true, |(q, _)| p < *q) {
                    first_err = Some((p, self.exec_error(p, e)));
                }
            }
        }
        if let Some((_, e)) = first_err {
            return Err(e);
        }
        for &p in &wave {
            if in_wave[p.0] {
                self.commit(p);
            }
        }
        Ok(())
    }

    fn commit(&mut self, p: ProcessId) {
        let rt = &mut self.procs[p.0];
        for &(slot, bits) in &rt.writes {
            self.state.stage(slot as usize, bits);
        }
        rt.writes.clear();
        for slot in rt.lenient_reads.drain(..) {
            if self.warned.insert((p.0, slot)) {
                let f = self
                    .net
                    .fields()
                    .nth(slot)
                    .expect("slot within field count");
                self.warnings.push(format!(
                    "cycle {}: `{}` read undefined `{}` as zero",
                    self.cycle,
                    self.net.process(p).name,
                    self.net.field_name(f)
                ));
            }
        }
    }

    fn resume_driver(&mut self, p: ProcessId) -> Result<(), SimError> {
        if self.done[p.0] {
            return Ok(());
        }
        let mut d = self.drivers[p.0].take().expect("host process has a driver");
        let mut io = HostIo {
            net: self.net,
            process: p,
            cycle: self.cycle,
            state: &mut self.state,
            readable: &self.readable[p.0],
            writable: &self.writable[p.0],
            strict: self.cfg.strict_undefined_read,
            warnings: &mut self.warnings,
        };
        let r = d.step(&mut io);
        self.drivers[p.0] = Some(d);
        if r? == Step::Done {
            self.done[p.0] = true;
        }
        Ok(())
    }

    fn exec_error(&self, p: ProcessId, e: ExecError) -> SimError {
        let process = self.net.process(p).name.clone();
        let cycle = self.cycle;
        match e {
            ExecError::UndefinedRead(slot) => {
                let f = self
                    .net
                    .fields()
                    .nth(slot)
                    .expect("slot within field count");
                let bus = self.net.bus(f.bus);
                SimError::UndefinedRead {
                    process,
                    bus: bus.name.clone(),
                    field: bus.shape.fields[f.field].name.clone(),
                    cycle,
                }
            }
            ExecError::DivideByZero => SimError::DivideByZero { process, cycle },
            ExecError::OutOfBounds => SimError::IndexOutOfBounds { process, cycle },
            ExecError::Assertion(m) => SimError::AssertionFailed {
                message: self
                    .net
                    .process(p)
                    .compiled
                    .as_ref()
                    .expect("IR process")
                    .messages[m as usize]
                    .clone(),
                process,
                cycle,
            },
        }
    }
}

fn exec_process(
    net: &Network,
    p: ProcessId,
    rt: &mut ProcRt,
    vis: &Visible<'_>,
) -> Result<(), ExecError> {
    let body = net.process(p).compiled.as_ref().expect("IR process");
    rt.writes.clear();
    let mut frame = Frame {
        store: &mut rt.store,
        in_base: &rt.in_base,
        out_base: &rt.out_base,
        writes: &mut rt.writes,
        lenient_reads: &mut rt.lenient_reads,
    };
    interp::run(body, vis, &mut frame)
}

/// Runs `net` with the sequential reference scheduler.
pub fn run_simulation<'n, I>(
    net: &'n Network,
    cfg: SimConfig,
    drivers: I,
) -> Result<SimReport, SimError>
where
    I: IntoIterator<Item = (ProcessId, Box<dyn Driver + 'n>)>,
{
    Simulator::new(net, cfg, drivers)?.run()
}

/// Runs `net` executing independent IR processes of each wave concurrently.
/// Produces the same trace as [`run_simulation`].
pub fn run_parallel<'n, I>(
    net: &'n Network,
    cfg: SimConfig,
    drivers: I,
) -> Result<SimReport, SimError>
where
    I: IntoIterator<Item = (ProcessId, Box<dyn Driver + 'n>)>,
{
    Simulator::new(net, cfg, drivers)?.parallel(true).run()
}

/// Convenience for building the driver map by process name.
pub fn drivers_by_name<'n>(
    net: &Network,
    named: Vec<(&str, Box<dyn Driver + 'n>)>,
) -> BTreeMap<ProcessId, Box<dyn Driver + 'n>> {
    named
        .into_iter()
        .map(|(n, d)| {
            (
                net.process_by_name(n)
                    .unwrap_or_else(|| panic!("no process `{n}`")),
                d,
            )
        })
        .collect()
}

#[cfg(test)]
mod tests;
