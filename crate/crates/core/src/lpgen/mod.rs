//! The time-indexed LP of an assembly program.
//!
//! For a horizon `p` the model has
//!
//! * `B(c, t)`: memory cell `c` after step `t`, for `t = 0..=p`,
//! * `S(i, t)`: line `i` runs at step `t`, for `t` in the line's window,
//! * `A(i, t, k)`: auxiliary variables of the gadget of line `i`.
//!
//! The rows say that exactly one line runs per step, that control moves
//! from line to line as the instruction dictates, that the running line's
//! gadget computes its writes from the memory of the previous step, and
//! that a cell nobody writes keeps its value. `return` is absorbing: the
//! returning line keeps running until the horizon and keeps its output.
//!
//! Every gadget inequality carries `S(i, t)`, so an idle line's gadget is
//! slack for any memory values, and a running line's gadget pins its writes
//! once its reads are 0/1. Fixing the inputs therefore leaves exactly one
//! feasible point, the trace of the program.

mod circuit;
mod gadgets;
mod layout;
mod model;
pub mod soundness;
mod writer;

pub use circuit::{Circuit, CircuitBuilder, Clause, Evaluation, Gate, GateKind, Lit, Local};
pub use gadgets::gadget;
pub use layout::{Epoch, Var, VarId, VarLayout};
pub use model::{build_model, BitPoint, LpModel, LpOptions, ModelStats, Row, RowKind, Sense};
pub use writer::{column_name, parse_column_name, row_name, write_lp, write_mps, write_names};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("model would have {0} variables, more than ids can address")]
    TooManyVariables(u64),
    #[error("trace has {steps} steps and no return, shorter than the horizon {horizon}")]
    TraceTooShort { steps: usize, horizon: u32 },
    #[error("trace runs line {line} at step {t}, outside the line's time window")]
    OutsideWindow { line: usize, t: u32 },
    #[error("trace has {got} memory cells, model has {expected}")]
    TraceShape { expected: u32, got: u32 },
}
