//! Loading programs, parameters and instances from disk, and the error
//! classes that become exit codes.

use std::path::{Path, PathBuf};

use sparks_core::compiler::{compile, count_steps, parse_asm, AsmProgram, StepBound, Value};
use sparks_core::frontend::{parse_instance, parse_params, parse_program, ParamEnv, Program};
use sparks_core::harness::HarnessError;
use sparks_core::interpreter::{run, RunError, Trace};
use sparks_core::lpgen::{build_model, LpError, LpModel, LpOptions};
use sparks_core::{compiler::CompileError, Error, Rational};

use crate::files::{read_text, FileError};
use crate::solver::SolverError;

/// Exit codes of the command-line tool.
pub mod exit {
    pub const OK: u8 = 0;
    pub const OTHER: u8 = 1;
    pub const PARSE: u8 = 2;
    pub const BOUND: u8 = 3;
    pub const SOLVER: u8 = 4;
    pub const VERIFY: u8 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    File(#[from] FileError),
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: Error,
    },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn core(context: impl Into<String>, source: impl Into<Error>) -> Self {
        CliError::Core { context: context.into(), source: source.into() }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::File(_) | CliError::Usage(_) => exit::OTHER,
            CliError::Solver(_) => exit::SOLVER,
            CliError::Verification(_) => exit::VERIFY,
            CliError::Core { source, .. } => match source {
                Error::Frontend(_) | Error::Compile(CompileError::Asm { .. } | CompileError::FallsOffEnd) => exit::PARSE,
                Error::Bound(_) => exit::BOUND,
                Error::Run(RunError::BudgetExhausted { .. }) => exit::BOUND,
                Error::Run(RunError::Compile(_)) => exit::PARSE,
                Error::Run(_) => exit::OTHER,
                Error::Lp(LpError::TooManyVariables(_) | LpError::TraceTooShort { .. } | LpError::OutsideWindow { .. }) => {
                    exit::BOUND
                }
                Error::Lp(_) => exit::OTHER,
                Error::Harness(
                    HarnessError::UnknownVariable { .. } | HarnessError::Malformed { .. } | HarnessError::EmptySolution,
                ) => exit::PARSE,
                Error::Harness(_) => exit::OTHER,
            },
        }
    }
}

fn show(p: &Path) -> String {
    p.display().to_string()
}

/// A compiled program with its parameters.
#[derive(Debug, Clone)]
pub struct Session {
    /// Base name for artifacts.
    pub name: String,
    pub params: ParamEnv,
    /// `None` when the program was loaded from assembly.
    pub program: Option<Program>,
    pub asm: AsmProgram,
}

/// Parses `key=value` overrides.
pub fn parse_override(s: &str) -> Result<(String, u64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let v = v.trim().parse().map_err(|_| format!("`{v}` is not a non-negative integer"))?;
    Ok((k.trim().to_string(), v))
}

/// Parses `3`, `0.25` or `1/4`.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    if let Some((n, d)) = s.split_once('/') {
        let n: i128 = n.trim().parse().map_err(|_| format!("bad numerator in `{s}`"))?;
        let d: i128 = d.trim().parse().map_err(|_| format!("bad denominator in `{s}`"))?;
        if d == 0 {
            return Err(format!("zero denominator in `{s}`"));
        }
        return Ok(Rational::new(n, d));
    }
    sparks_core::rational::parse_decimal(s.trim()).map_err(|e| format!("`{s}`: {e}"))
}

impl Session {
    /// Loads `program` (Sparks source, or assembly when it ends in `.asm`)
    /// with the parameter file and overrides.
    pub fn load(program: &Path, params: &Path, overrides: &[(String, u64)]) -> Result<Self, CliError> {
        let mut env = parse_params(&read_text(params)?).map_err(|e| CliError::core(show(params), e))?;
        for (k, v) in overrides {
            env.set(k, *v);
        }
        let text = read_text(program)?;
        let (prog, asm) = if program.extension().is_some_and(|e| e == "asm") {
            (None, parse_asm(&text).map_err(|e| CliError::core(show(program), e))?)
        } else {
            let p = parse_program(&text, &env).map_err(|e| CliError::core(show(program), e))?;
            let asm = compile(&p, &env).map_err(|e| CliError::core(show(program), e))?;
            (Some(p), asm)
        };
        let name = params.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "model".into());
        Ok(Session { name, params: env, program: prog, asm })
    }

    /// Reads an instance file into input bits.
    pub fn instance(&self, path: &Path) -> Result<Vec<bool>, CliError> {
        let Some(program) = &self.program else {
            return Err(CliError::Usage("instances need the Sparks source, not an .asm file".into()));
        };
        let text = read_text(path)?;
        let inst = parse_instance(&text, program, self.params.word()).map_err(|e| CliError::core(show(path), e))?;
        Ok(inst.bits)
    }

    pub fn bounds(&self) -> Result<StepBound, CliError> {
        count_steps(&self.asm, &self.params).map_err(|e| CliError::core("step bound", e))
    }

    pub fn model(&self, prune: bool) -> Result<LpModel, CliError> {
        build_model(&self.asm, &self.params, &LpOptions { prune }).map_err(|e| CliError::core("model", e))
    }

    /// Runs the interpreter with the step budget `maxsteps`.
    pub fn run(&self, input: &[bool]) -> Result<Trace, CliError> {
        run(&self.asm, input, self.params.maxsteps() as usize).map_err(|e| CliError::core("run", e))
    }

    /// Values of the declared output variables, read with `bit`.
    pub fn outputs(&self, bit: impl Fn(u32) -> bool) -> Vec<(String, Value)> {
        self.params.outputs().iter().filter_map(|name| self.asm.memory.read(name, &bit).map(|v| (name.clone(), v))).collect()
    }

    /// Default path `<workdir>/<name>.<ext>`.
    pub fn artifact(&self, workdir: &Path, ext: &str) -> PathBuf {
        workdir.join(format!("{}.{ext}", self.name))
    }
}

/// Human-readable step bound report.
pub fn bound_report(asm: &AsmProgram, b: &StepBound, maxsteps: u32) -> String {
    let mut s = format!("lines: {}\nstep bound: {}\nhorizon (maxsteps): {}\n", asm.lines.len(), b.total, maxsteps);
    for r in &b.regions {
        let name = r.name.as_deref().unwrap_or("-");
        s.push_str(&format!(
            "region {name}: lines {}..{}, steps {}..{}, window {}..{}\n",
            r.first + 1,
            r.end,
            r.cost.min,
            r.cost.max,
            r.start,
            r.stop
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_and_rationals() {
        assert_eq!(parse_override("maxsteps=2000"), Ok(("maxsteps".into(), 2000)));
        assert!(parse_override("maxsteps").is_err());
        assert!(parse_override("W=-1").is_err());
        assert_eq!(parse_rational("1/4"), Ok(Rational::new(1, 4)));
        assert_eq!(parse_rational("0.5"), Ok(Rational::new(1, 2)));
        assert!(parse_rational("1/0").is_err());
    }
}
