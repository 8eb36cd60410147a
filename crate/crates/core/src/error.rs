use thiserror::Error;

use crate::types::ScalarType;

/// Errors raised while building or elaborating a network.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("width {0} out of range (integers take 1..=64 bits, bool exactly 1)")]
    InvalidWidth(u32),
    #[error("array length must be at least 1")]
    InvalidArrayLength,
    #[error("bus shape `{0}` must have at least one field")]
    EmptyShape(String),
    #[error("duplicate field `{field}` in bus shape `{shape}`")]
    DuplicateField { shape: String, field: String },
    #[error("initial value of `{field}` has type {found}, expected {expected}")]
    InitialTypeMismatch {
        field: String,
        expected: ScalarType,
        found: ScalarType,
    },
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("unknown bus instance #{0}")]
    UnknownBus(usize),
    #[error(
        "process `{process}`: port `{port}` expects a bus shaped like `{expected}`, got `{found}`"
    )]
    ShapeMismatch {
        process: String,
        port: String,
        expected: String,
        found: String,
    },
    #[error("process `{process}`: expected {expected} {direction} bindings, got {found}")]
    BindingCount {
        process: String,
        direction: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("process `{process}`: unknown port `{port}`")]
    UnknownPort { process: String, port: String },
    #[error("process `{process}`: bus `{port}` has no field `{field}`")]
    UnknownField {
        process: String,
        port: String,
        field: String,
    },
    #[error("process `{process}`: unknown variable `{name}`")]
    UnknownVariable { process: String, name: String },
    #[error("process `{process}`: unknown function `{name}`")]
    UnknownFunction { process: String, name: String },
    #[error("process `{process}`: function `{name}` is recursive")]
    RecursiveFunction { process: String, name: String },
    #[error("process `{process}`: cannot write input bus `{port}`")]
    WriteToInput { process: String, port: String },
    #[error("process `{process}`: cannot read output bus `{port}`")]
    ReadFromOutput { process: String, port: String },
    #[error("process `{process}`: {context}: expected {expected}, found {found}")]
    TypeMismatch {
        process: String,
        context: String,
        expected: String,
        found: String,
    },
    #[error("process `{process}`: index into `{array}` (length {len}) is not provably in range")]
    UnprovenIndex {
        process: String,
        array: String,
        len: u32,
    },
    #[error("process `{process}`: loop `{var}` has an invalid range {start}..{end}")]
    InvalidLoop {
        process: String,
        var: String,
        start: i64,
        end: i64,
    },
    #[error("process `{process}`: {message}")]
    Body { process: String, message: String },
    #[error("double driver: field `{bus}.{field}` is written by `{first}` and `{second}`")]
    DoubleDriver {
        bus: String,
        field: String,
        first: String,
        second: String,
    },
}
