//! Lowering to assembly, memory layout, and static step bounds.

mod asm;
mod layout;
mod lower;
mod steps;

pub use asm::{parse_asm, Arg, AsmLine, AsmProgram, Bit, BitOp, Exec, Instr, PhaseSpan, SetOp, Table, Word, WordOp};
pub use layout::{MemoryMap, Shape, Slot, Value};
pub use steps::{count_steps, Cost, RegionBound, StepBound};

use crate::frontend::{parse_program, ParamEnv, Program};
use crate::prelude::*;
use crate::Error;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CompileError {
    #[error("asm line {line}: {msg}")]
    Asm { line: usize, msg: String },
    #[error("control can run past the last line; the program must end with `return`")]
    FallsOffEnd,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BoundError {
    #[error("while loop `{label}` (asm line {line}) needs a `bound.{label}` parameter")]
    MissingWhileBound { label: String, line: usize },
    #[error("asm line {line}: cannot analyze control flow: {msg}")]
    Structure { line: usize, msg: String },
    #[error("time window of `{region}`: {msg}")]
    Window { region: String, msg: String },
}

/// Lowers a checked program using the word size from `params`.
pub fn compile(program: &Program, params: &ParamEnv) -> Result<AsmProgram, CompileError> {
    lower::lower(program, params.word())
}

/// Parses, checks and lowers Sparks source in one go.
pub fn compile_source(src: &str, params: &ParamEnv) -> Result<AsmProgram, Error> {
    let program = parse_program(src, params)?;
    Ok(compile(&program, params)?)
}
