//! Synchronous message exchange (SME) hardware models: a network model,
//! a cycle-accurate simulator, trace files, an intermediate language and
//! VHDL / CSP_M generators.

pub mod components;
pub mod corpus;
pub mod cspm;
pub mod elab;
pub mod error;
pub mod graph;
pub mod ir;
pub mod model;
pub mod sim;
pub mod smeil;
pub mod trace;
pub mod types;
pub mod vhdl;

pub use error::ModelError;
pub use model::{declare_bus_shape, BusId, FieldRef, FieldSpec, Network, ProcessDef, ProcessId};
pub use sim::{run_parallel, run_simulation, SimConfig, SimError, SimReport};
pub use trace::{diff_traces, Trace};
pub use types::{ScalarType, Value};
