//! Per-instance objective, input fixing, solution parsing and exact
//! verification.
//!
//! The objective for an input `x̄` is `sum_j c_j B(input_j, 0) + d w` with
//! `c_j = +1` where `x̄_j = 1` and `-1` where it is 0, and `w` the output bit
//! at the horizon. Over the input cube the first part peaks exactly at `x̄`
//! with value `m`, the number of ones in `x̄`, so an optimal 0/1 vertex runs
//! the program on `x̄` and has value `m + d w`.

mod solution;
mod verify;

pub use solution::{parse_solution, DenseAssignment, SolutionFormat, Values};
pub use verify::{
    finish, propagate, verify, verify_steps, ClassCount, PartialReport, TraceDiff, Undetermined, VerifyOptions, VerifyReport,
    Violation,
};

use crate::lpgen::{LpModel, Var, VarId};
use crate::prelude::*;
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HarnessError {
    #[error("d = {0} is outside [0, 1/2]")]
    DOutOfRange(Rational),
    #[error("model has {expected} input bits, got {got}")]
    InputLength { expected: usize, got: usize },
    #[error("solution line {line}: unknown variable `{name}`")]
    UnknownVariable { name: String, line: usize },
    #[error("solution line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("solution has no variable values")]
    EmptySolution,
}

/// Objective for one input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Objective {
    /// `(input cell, c_j)` with `c_j` in `{+1, -1}`.
    pub c: Vec<(u32, i8)>,
    pub d: Rational,
    /// Number of ones in the input.
    pub m: u64,
}

impl Objective {
    /// Optimal value when the program outputs `w`: `m + d w`.
    pub fn target(&self, w: bool) -> Rational {
        let base = Rational::from_integer(i128::from(self.m));
        if w {
            base + self.d
        } else {
            base
        }
    }

    /// Objective terms over model variables.
    pub fn terms(&self, model: &LpModel) -> Vec<(VarId, Rational)> {
        let mut terms: Vec<(VarId, Rational)> = self
            .c
            .iter()
            .map(|&(cell, c)| (model.id(Var::B { cell, t: 0 }).expect("input cell"), Rational::from_integer(i128::from(c))))
            .collect();
        if self.d != Rational::from_integer(0) {
            terms.push((model.output_var(), self.d));
        }
        terms
    }

    /// Installs the objective in `model`.
    pub fn apply(&self, model: &mut LpModel) {
        model.objective = self.terms(model);
    }
}

fn check_input(model: &LpModel, input: &[bool]) -> Result<(), HarnessError> {
    if input.len() != model.inputs.len() {
        return Err(HarnessError::InputLength { expected: model.inputs.len(), got: input.len() });
    }
    Ok(())
}

/// Builds the objective for input `input` and output weight `d`.
pub fn build_objective(model: &LpModel, input: &[bool], d: Rational) -> Result<Objective, HarnessError> {
    if d < Rational::from_integer(0) || d > Rational::new(1, 2) {
        return Err(HarnessError::DOutOfRange(d));
    }
    check_input(model, input)?;
    let c = model.inputs.iter().zip(input).map(|(&cell, &x)| (cell, if x { 1 } else { -1 })).collect();
    let m = input.iter().filter(|&&x| x).count() as u64;
    Ok(Objective { c, d, m })
}

/// Adds the rows `B(input_j, 0) = x̄_j`.
pub fn fix_inputs(model: &mut LpModel, input: &[bool]) -> Result<(), HarnessError> {
    check_input(model, input)?;
    model.fixed = Some(input.to_vec());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d_range() {
        let asm = crate::compiler::parse_asm("word 1\ndecl input bool x\ndecl bool w\nreturn w 1\n").unwrap();
        let params = crate::frontend::ParamEnv::new(1, 3);
        let model = crate::lpgen::build_model(&asm, &params, &Default::default()).unwrap();
        assert!(build_objective(&model, &[true], Rational::new(3, 4)).is_err());
        let o = build_objective(&model, &[true], Rational::new(1, 2)).unwrap();
        assert_eq!(o.target(true), Rational::new(3, 2));
        let o = build_objective(&model, &[false], Rational::from_integer(0)).unwrap();
        assert_eq!((o.m, o.c.clone()), (0, vec![(0, -1)]));
        assert!(build_objective(&model, &[], Rational::from_integer(0)).is_err());
    }
}
