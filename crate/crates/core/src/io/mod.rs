//! Network files: a line-oriented text format (and a JSON mirror of the
//! same document), conversion to networks and credal specs, and result
//! serialization.
//!
//! ```text
//! # comments run to the end of the line
//! version 1
//! variable x { values: a, b }
//! variable y { values: lo, hi }
//! parents y: x
//! cpt x { 0.75, 0.25 }
//! cpt y { a: 0.1, 0.9; b: 0.8, 0.2 }
//! credal x { class: eps-contaminated; base: 0.75, 0.25; eps: 0.2 }
//! utility u { target: y; values: 0, 10 }
//! ```

mod document;
mod lexer;
mod model;
mod parser;
mod results;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use document::{
    CptDecl, CptRow, CredalClass, CredalDecl, CredalParam, NetworkDocument, ParamValue, ParentsDecl, UtilityDecl,
    VariableDecl, FORMAT_VERSION,
};
pub use model::CredalModel;
pub use parser::{load_model, load_model_json, model_from_document, parse_json_document, parse_network_file};
pub use results::{serialize_results, OutputFormat, QueryOutcome};

/// Tolerance for probability rows read from files; rows within it are
/// renormalized exactly.
pub const INPUT_SUM_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl Position {
    pub fn new(line: usize, column: usize) -> Self {
        Self { line, column }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParseErrorKind {
    /// Malformed text.
    Syntax,
    /// Well-formed text describing an invalid network.
    Semantic,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind:?} error at {position}: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub position: Position,
    pub message: String,
}

impl ParseError {
    pub fn syntax(position: Position, message: impl Into<String>) -> Self {
        Self {
            kind: ParseErrorKind::Syntax,
            position,
            message: message.into(),
        }
    }

    pub fn semantic(position: Position, message: impl Into<String>) -> Self {
        Self {
            kind: ParseErrorKind::Semantic,
            position,
            message: message.into(),
        }
    }

    pub fn position(&self) -> Position {
        self.position
    }
}
