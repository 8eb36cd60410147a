//! Bus shapes, process definitions and the network that ties them together.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::elab::{self, CompiledBody};
use crate::error::ModelError;
use crate::ir::{Function, Stmt};
use crate::types::{ScalarType, Value, ValueType};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    pub name: String,
    pub ty: ScalarType,
    pub initial: Option<Value>,
}

impl FieldSpec {
    pub fn new(name: &str, ty: ScalarType) -> Self {
        FieldSpec {
            name: name.to_string(),
            ty,
            initial: None,
        }
    }

    pub fn with_initial(name: &str, ty: ScalarType, initial: i128) -> Self {
        FieldSpec {
            name: name.to_string(),
            ty,
            initial: Some(Value::from_i128(ty, initial)),
        }
    }
}

/// A named bundle of typed fields. Shapes are templates; a network holds
/// any number of [`BusInstance`]s per shape.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BusShape {
    pub name: String,
    pub fields: Vec<FieldSpec>,
    pub clocked: bool,
    pub initialised: bool,
}

impl BusShape {
    pub fn field_index(&self, name: &str) -> Option<usize> {
        self.fields.iter().position(|f| f.name == name)
    }

    /// Same fields, types, initial values and propagation mode; the shape
    /// name is not compared.
    pub fn compatible_with(&self, other: &BusShape) -> bool {
        self.clocked == other.clocked && self.fields == other.fields
    }
}

pub fn declare_bus_shape(
    name: &str,
    fields: Vec<FieldSpec>,
    clocked: bool,
    initialised: bool,
) -> Result<Arc<BusShape>, ModelError> {
    if fields.is_empty() {
        return Err(ModelError::EmptyShape(name.to_string()));
    }
    let mut seen = HashSet::new();
    let mut fields = fields;
    for f in &mut fields {
        if !seen.insert(f.name.clone()) {
            return Err(ModelError::DuplicateField {
                shape: name.to_string(),
                field: f.name.clone(),
            });
        }
        // Re-validate the type in case it was built by hand.
        ScalarType::new(f.ty.kind, f.ty.width)?;
        if let Some(init) = f.initial {
            if init.ty != f.ty {
                return Err(ModelError::InitialTypeMismatch {
                    field: f.name.clone(),
                    expected: f.ty,
                    found: init.ty,
                });
            }
        } else if initialised {
            f.initial = Some(Value::zero(f.ty));
        }
    }
    Ok(Arc::new(BusShape {
        name: name.to_string(),
        fields,
        clocked,
        initialised,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BusId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProcessId(pub usize);

impl fmt::Display for ProcessId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A field of a particular bus instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldRef {
    pub bus: BusId,
    pub field: usize,
}

#[derive(Debug, Clone)]
pub struct BusInstance {
    pub id: BusId,
    pub name: String,
    pub shape: Arc<BusShape>,
    /// Owning process per field.
    pub writers: Vec<Option<ProcessId>>,
    /// Processes binding this bus as an input.
    pub readers: BTreeSet<ProcessId>,
    /// Processes binding this bus as an output.
    pub output_of: BTreeSet<ProcessId>,
    /// Index of this bus's first field in the network-wide field numbering.
    pub first_slot: usize,
}

impl BusInstance {
    pub fn is_zombie(&self) -> bool {
        self.readers.is_empty() && self.output_of.is_empty()
    }

    pub fn clocked(&self) -> bool {
        self.shape.clocked
    }
}

/// A bus-typed parameter of a process.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Port {
    pub name: String,
    pub shape: Arc<BusShape>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarDecl {
    pub name: String,
    pub ty: ValueType,
    /// Applied to every element; zero when absent.
    pub initial: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Body {
    Ir(Vec<Stmt>),
    /// Behaviour supplied at simulation time by a [`Driver`](crate::sim::Driver).
    /// `writes` lists the `(port, field)` pairs the host owns; `None` means
    /// every field of every output port.
    Host {
        writes: Option<Vec<(String, String)>>,
    },
}

/// Marker for processes generated by a component library, so that code
/// generators can substitute a hand-tuned template.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ComponentKind {
    Bram(crate::components::BramSpec),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProcessDef {
    pub name: String,
    pub clocked: bool,
    pub ignore: bool,
    pub inputs: Vec<Port>,
    pub outputs: Vec<Port>,
    pub variables: Vec<VarDecl>,
    pub body: Body,
    pub functions: Vec<Function>,
    pub component: Option<ComponentKind>,
}

impl ProcessDef {
    /// A synthesizable process with an empty body.
    pub fn new(name: &str, clocked: bool) -> Self {
        ProcessDef {
            name: name.to_string(),
            clocked,
            ignore: false,
            inputs: Vec::new(),
            outputs: Vec::new(),
            variables: Vec::new(),
            body: Body::Ir(Vec::new()),
            functions: Vec::new(),
            component: None,
        }
    }

    /// A clocked, ignored process driven by host code.
    pub fn simulation(name: &str) -> Self {
        ProcessDef {
            ignore: true,
            body: Body::Host { writes: None },
            ..ProcessDef::new(name, true)
        }
    }

    pub fn input(mut self, name: &str, shape: &Arc<BusShape>) -> Self {
        self.inputs.push(Port {
            name: name.to_string(),
            shape: shape.clone(),
        });
        self
    }

    pub fn output(mut self, name: &str, shape: &Arc<BusShape>) -> Self {
        self.outputs.push(Port {
            name: name.to_string(),
            shape: shape.clone(),
        });
        self
    }

    pub fn var(mut self, name: &str, ty: impl Into<ValueType>, initial: Option<i128>) -> Self {
        let ty = ty.into();
        self.variables.push(VarDecl {
            name: name.to_string(),
            ty,
            initial: initial.map(|v| Value::from_i128(ty.scalar, v)),
        });
        self
    }

    pub fn function(mut self, name: &str, body: Vec<Stmt>) -> Self {
        self.functions.push(Function {
            name: name.to_string(),
            body,
        });
        self
    }

    pub fn body(mut self, stmts: Vec<Stmt>) -> Self {
        self.body = Body::Ir(stmts);
        self
    }

    pub fn ignored(mut self) -> Self {
        self.ignore = true;
        self
    }

    pub fn is_host(&self) -> bool {
        matches!(self.body, Body::Host { .. })
    }

    pub fn input_index(&self, name: &str) -> Option<usize> {
        self.inputs.iter().position(|p| p.name == name)
    }

    pub fn output_index(&self, name: &str) -> Option<usize> {
        self.outputs.iter().position(|p| p.name == name)
    }
}

/// A registered process: a definition bound to concrete bus instances.
#[derive(Debug, Clone)]
pub struct ProcessInstance {
    pub id: ProcessId,
    pub name: String,
    pub def: Arc<ProcessDef>,
    pub inputs: Vec<BusId>,
    pub outputs: Vec<BusId>,
    /// Elaborated body; `None` for host processes.
    pub compiled: Option<Arc<CompiledBody>>,
    /// Fields this instance owns, as `(output port, field)` pairs.
    pub writes: Vec<(usize, usize)>,
}

impl ProcessInstance {
    pub fn clocked(&self) -> bool {
        self.def.clocked
    }

    pub fn ignore(&self) -> bool {
        self.def.ignore
    }

    pub fn is_host(&self) -> bool {
        self.compiled.is_none()
    }

    pub fn owned_fields(&self) -> impl Iterator<Item = FieldRef> + '_ {
        self.writes.iter().map(|&(p, f)| FieldRef {
            bus: self.outputs[p],
            field: f,
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct Network {
    pub name: String,
    pub buses: Vec<BusInstance>,
    pub processes: Vec<ProcessInstance>,
    field_count: usize,
}

impl Network {
    pub fn new(name: &str) -> Self {
        Network {
            name: name.to_string(),
            ..Default::default()
        }
    }

    /// Creates a bus instance named after its shape.
    pub fn instantiate_bus(&mut self, shape: &Arc<BusShape>) -> BusId {
        let name = shape.name.clone();
        self.instantiate_bus_named(shape, &name)
    }

    /// Creates a bus instance; a clashing name gets a numeric suffix.
    pub fn instantiate_bus_named(&mut self, shape: &Arc<BusShape>, name: &str) -> BusId {
        let name = unique_name(name, |n| self.buses.iter().any(|b| b.name == n));
        let id = BusId(self.buses.len());
        self.buses.push(BusInstance {
            id,
            name,
            shape: shape.clone(),
            writers: vec![None; shape.fields.len()],
            readers: BTreeSet::new(),
            output_of: BTreeSet::new(),
            first_slot: self.field_count,
        });
        self.field_count += shape.fields.len();
        id
    }

    pub fn add_process(
        &mut self,
        def: impl Into<Arc<ProcessDef>>,
        inputs: &[BusId],
        outputs: &[BusId],
    ) -> Result<ProcessId, ModelError> {
        let def = def.into();
        let name = def.name.clone();
        self.add_process_named(&name, def, inputs, outputs)
    }

    /// Registers a process instance, elaborating its body and recording
    /// field ownership. Nothing is registered if an error is returned.
    pub fn add_process_named(
        &mut self,
        name: &str,
        def: impl Into<Arc<ProcessDef>>,
        inputs: &[BusId],
        outputs: &[BusId],
    ) -> Result<ProcessId, ModelError> {
        let def: Arc<ProcessDef> = def.into();
        self.check_bindings(&def, "input", &def.inputs, inputs)?;
        self.check_bindings(&def, "output", &def.outputs, outputs)?;

        let (compiled, writes) = match &def.body {
            Body::Ir(_) => {
                let compiled = elab::compile(&def)?;
                let writes = compiled.writes.clone();
                (Some(Arc::new(compiled)), writes)
            }
            Body::Host { writes } => {
                if !def.ignore {
                    return Err(ModelError::Body {
                        process: def.name.clone(),
                        message: "host-driven bodies are only allowed on ignored processes".into(),
                    });
                }
                (None, host_writes(&def, writes.as_deref())?)
            }
        };

        let id = ProcessId(self.processes.len());
        let name = unique_name(name, |n| self.processes.iter().any(|p| p.name == n));

        // Ownership check before any mutation.
        let mut claimed = HashSet::new();
        for &(port, field) in &writes {
            let bus = &self.buses[outputs[port].0];
            if let Some(owner) = bus.writers[field] {
                return Err(ModelError::DoubleDriver {
                    bus: bus.name.clone(),
                    field: bus.shape.fields[field].name.clone(),
                    first: self.processes[owner.0].name.clone(),
                    second: name,
                });
            }
            if !claimed.insert((outputs[port], field)) {
                return Err(ModelError::DoubleDriver {
                    bus: bus.name.clone(),
                    field: bus.shape.fields[field].name.clone(),
                    first: name.clone(),
                    second: name,
                });
            }
        }
        for &(port, field) in &writes {
            self.buses[outputs[port].0].writers[field] = Some(id);
        }
        for b in inputs {
            self.buses[b.0].readers.insert(id);
        }
        for b in outputs {
            self.buses[b.0].output_of.insert(id);
        }
        self.processes.push(ProcessInstance {
            id,
            name,
            def,
            inputs: inputs.to_vec(),
            outputs: outputs.to_vec(),
            compiled,
            writes,
        });
        Ok(id)
    }

    fn check_bindings(
        &self,
        def: &ProcessDef,
        direction: &'static str,
        ports: &[Port],
        bound: &[BusId],
    ) -> Result<(), ModelError> {
        if ports.len() != bound.len() {
            return Err(ModelError::BindingCount {
                process: def.name.clone(),
                direction,
                expected: ports.len(),
                found: bound.len(),
            });
        }
        for (port, id) in ports.iter().zip(bound) {
            let bus = self.buses.get(id.0).ok_or(ModelError::UnknownBus(id.0))?;
            if !port.shape.compatible_with(&bus.shape) {
                return Err(ModelError::ShapeMismatch {
                    process: def.name.clone(),
                    port: port.name.clone(),
                    expected: port.shape.name.clone(),
                    found: bus.shape.name.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn bus(&self, id: BusId) -> &BusInstance {
        &self.buses[id.0]
    }

    pub fn process(&self, id: ProcessId) -> &ProcessInstance {
        &self.processes[id.0]
    }

    pub fn bus_by_name(&self, name: &str) -> Option<BusId> {
        self.buses.iter().find(|b| b.name == name).map(|b| b.id)
    }

    pub fn process_by_name(&self, name: &str) -> Option<ProcessId> {
        self.processes.iter().find(|p| p.name == name).map(|p| p.id)
    }

    pub fn field(&self, bus: BusId, name: &str) -> Option<FieldRef> {
        self.buses
            .get(bus.0)?
            .shape
            .field_index(name)
            .map(|field| FieldRef { bus, field })
    }

    /// Looks up `"bus.field"`.
    pub fn field_by_path(&self, path: &str) -> Option<FieldRef> {
        let (bus, field) = path.split_once('.')?;
        self.field(self.bus_by_name(bus)?, field)
    }

    pub fn field_spec(&self, f: FieldRef) -> &FieldSpec {
        &self.buses[f.bus.0].shape.fields[f.field]
    }

    pub fn field_name(&self, f: FieldRef) -> String {
        let bus = &self.buses[f.bus.0];
        format!("{}.{}", bus.name, bus.shape.fields[f.field].name)
    }

    pub fn owner(&self, f: FieldRef) -> Option<ProcessId> {
        self.buses[f.bus.0].writers[f.field]
    }

    /// Total number of bus fields across all instances.
    pub fn field_count(&self) -> usize {
        self.field_count
    }

    pub fn slot(&self, f: FieldRef) -> usize {
        self.buses[f.bus.0].first_slot + f.field
    }

    /// All fields in registration order (buses, then declaration order).
    pub fn fields(&self) -> impl Iterator<Item = FieldRef> + '_ {
        self.buses
            .iter()
            .flat_map(|b| (0..b.shape.fields.len()).map(move |field| FieldRef { bus: b.id, field }))
    }

    /// Fields read by the given instance, as bound bus fields.
    pub fn fields_read_by(&self, p: ProcessId) -> Vec<FieldRef> {
        let proc_ = &self.processes[p.0];
        match &proc_.compiled {
            Some(c) => c
                .reads
                .iter()
                .map(|&(port, field)| FieldRef {
                    bus: proc_.inputs[port],
                    field,
                })
                .collect(),
            None => proc_
                .inputs
                .iter()
                .flat_map(|&bus| {
                    (0..self.buses[bus.0].shape.fields.len())
                        .map(move |field| FieldRef { bus, field })
                })
                .collect(),
        }
    }
}

fn host_writes(
    def: &ProcessDef,
    declared: Option<&[(String, String)]>,
) -> Result<Vec<(usize, usize)>, ModelError> {
    match declared {
        None => Ok(def
            .outputs
            .iter()
            .enumerate()
            .flat_map(|(p, port)| (0..port.shape.fields.len()).map(move |f| (p, f)))
            .collect()),
        Some(list) => list
            .iter()
            .map(|(port, field)| {
                let p = def
                    .output_index(port)
                    .ok_or_else(|| ModelError::UnknownPort {
                        process: def.name.clone(),
                        port: port.clone(),
                    })?;
                let f = def.outputs[p].shape.field_index(field).ok_or_else(|| {
                    ModelError::UnknownField {
                        process: def.name.clone(),
                        port: port.clone(),
                        field: field.clone(),
                    }
                })?;
                Ok((p, f))
            })
            .collect(),
    }
}

fn unique_name(base: &str, taken: impl Fn(&str) -> bool) -> String {
    if !taken(base) {
        return base.to_string();
    }
    (1..)
        .map(|i| format!("{base}_{i}"))
        .find(|n| !taken(n))
        .expect("unbounded suffix search")
}
