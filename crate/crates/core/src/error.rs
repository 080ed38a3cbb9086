use core::fmt;

use crate::compiler::{BoundError, CompileError};
use crate::frontend::FrontendError;
use crate::harness::HarnessError;
use crate::interpreter::RunError;
use crate::lpgen::LpError;

/// A 1-based line/column position in a source file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default, Hash)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl Pos {
    pub const fn new(line: u32, col: u32) -> Self {
        Pos { line, col }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Any error produced by the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
}
