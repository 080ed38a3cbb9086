//! Source-level front end: parameter files, the Sparks language and
//! instance files.

mod ast;
pub(crate) mod check;
mod instance;
mod lexer;
mod params;
mod parser;
mod pretty;

pub use ast::*;
pub use check::{check_program, max_word, operand_type, Ty};
pub use instance::{parse_instance, InputAssignment};
pub use params::{parse_params, ParamEnv};
pub use pretty::pretty_print;

use crate::prelude::*;
use crate::Pos;

/// Errors from parsing or checking source files.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FrontendError {
    #[error("{pos}: syntax error: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: undeclared variable `{name}`")]
    Undeclared { name: String, pos: Pos },
    #[error("{pos}: type error: {msg}")]
    Type { pos: Pos, msg: String },
    #[error("{pos}: dimension {dim} of `{name}` exceeds the largest word value {max}")]
    Dimension { name: String, dim: u64, max: u64, pos: Pos },
    #[error("params {pos}: {msg}")]
    Param { pos: Pos, msg: String },
    #[error("missing required parameter `{0}`")]
    MissingParam(String),
    #[error("instance {pos}: {msg}")]
    Instance { pos: Pos, msg: String },
}

/// Substitutes `$$expr$$` placeholders, parses, and type-checks a program.
pub fn parse_program(src: &str, params: &ParamEnv) -> Result<Program, FrontendError> {
    let text = params.substitute(src)?;
    let program = parser::parse(&text)?;
    check_program(&program, params.word())?;
    Ok(program)
}
