//! A textual intermediate language for SME networks.
//!
//! [`parse`] turns source into a [`SourceUnit`], [`print`] turns it back
//! into canonical text and [`lower`] elaborates it into a [`Network`].

pub mod ast;
pub mod lexer;
pub mod lower;
pub mod parser;
pub mod printer;

use std::fmt;

use crate::model::Network;

pub use ast::{Pos, SourceUnit};
pub use lower::{lower, lower_with, parameters};
pub use parser::parse;
pub use printer::print;

/// IL sources of the corpus networks. Their parameters default to the
/// sizes used by the corpus tests.
pub const COUNTER_IL: &str = include_str!("../../il/counter.sme");
pub const HISTOGRAM_IL: &str = include_str!("../../il/histogram.sme");
pub const MATMUL_IL: &str = include_str!("../../il/matmul.sme");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    pub line: u32,
    pub column: u32,
}

impl Diagnostic {
    pub fn error(pos: Pos, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            message: message.into(),
            line: pos.line,
            column: pos.col,
        }
    }

    pub fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.column,
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {kind}: {}", self.line, self.column, self.message)
    }
}

/// Parses and lowers in one step.
pub fn compile(src: &str, overrides: &[(&str, i128)]) -> Result<Network, Vec<Diagnostic>> {
    lower_with(&parse(src)?, overrides)
}
