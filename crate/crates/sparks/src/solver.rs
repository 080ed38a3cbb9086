//! Running an external LP solver.
//!
//! A solver is described by a command template. `{model}` is replaced by
//! the model path and `{solution}` by the path the solver should write its
//! solution to; without `{solution}` the solver's standard output is taken
//! as the solution. Examples:
//!
//! ```text
//! glpsol --lp {model} -o {solution}
//! cbc {model} solve solution {solution}
//! python3 tools/highs_solve.py {model} {solution}
//! ```
//!
//! The solver's standard output and error go to a log file next to the
//! solution.

use std::fs::{self, File};
use std::io;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitStatus, Stdio};
use std::time::{Duration, Instant};

use wait_timeout::ChildExt;

/// Environment variable holding the default command template.
pub const SOLVER_ENV: &str = "SPARKS_SOLVER_CMD";

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("no solver command: pass --solver-cmd or set {SOLVER_ENV}")]
    NoCommand,
    #[error("solver command template is empty or has unbalanced quotes: {0:?}")]
    BadTemplate(String),
    #[error("solver executable `{0}` not found")]
    Missing(String),
    #[error("cannot start `{program}`: {source}")]
    Spawn {
        program: String,
        #[source]
        source: io::Error,
    },
    #[error("solver timed out after {secs} s; log tail:\n{log}")]
    Timeout { secs: f64, log: String },
    #[error("solver exited with {status}; log tail:\n{log}")]
    Failed { status: ExitStatus, log: String },
    #[error("solver wrote no solution to {path}; log tail:\n{log}")]
    NoSolution { path: PathBuf, log: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

/// A finished solver run.
#[derive(Debug)]
pub struct SolverRun {
    /// The solution text.
    pub text: String,
    pub log: PathBuf,
    pub elapsed: Duration,
}

/// A solver command template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverCommand {
    pub template: String,
}

fn io_at(path: &Path) -> impl FnOnce(io::Error) -> SolverError + '_ {
    move |source| SolverError::Io { path: path.to_path_buf(), source }
}

/// Last few lines of the log, for error messages.
fn log_tail(path: &Path) -> String {
    let text = fs::read_to_string(path).unwrap_or_default();
    let lines: Vec<&str> = text.lines().collect();
    lines[lines.len().saturating_sub(15)..].join("\n")
}

impl SolverCommand {
    pub fn new(template: &str) -> Self {
        SolverCommand { template: template.to_string() }
    }

    /// The explicit template, or the one from the environment.
    pub fn resolve(explicit: Option<&str>) -> Result<Self, SolverError> {
        match explicit {
            Some(t) => Ok(Self::new(t)),
            None => std::env::var(SOLVER_ENV)
                .ok()
                .filter(|t| !t.trim().is_empty())
                .map(|t| Self::new(&t))
                .ok_or(SolverError::NoCommand),
        }
    }

    /// Program and arguments with the placeholders filled in.
    pub fn argv(&self, model: &Path, solution: &Path) -> Result<Vec<String>, SolverError> {
        let words = shlex::split(&self.template)
            .filter(|w| !w.is_empty())
            .ok_or_else(|| SolverError::BadTemplate(self.template.clone()))?;
        let (m, s) = (model.to_string_lossy(), solution.to_string_lossy());
        Ok(words.iter().map(|w| w.replace("{model}", &m).replace("{solution}", &s)).collect())
    }

    fn writes_solution(&self) -> bool {
        self.template.contains("{solution}")
    }

    /// Solves `model`. The solution is expected at `solution`; the log goes
    /// to `log`.
    pub fn invoke(&self, model: &Path, solution: &Path, log: &Path, timeout: Option<Duration>) -> Result<SolverRun, SolverError> {
        let argv = self.argv(model, solution)?;
        if self.writes_solution() && solution.exists() {
            fs::remove_file(solution).map_err(io_at(solution))?;
        }
        let out = File::create(log).map_err(io_at(log))?;
        let err = out.try_clone().map_err(io_at(log))?;
        let start = Instant::now();
        let mut child =
            Command::new(&argv[0]).args(&argv[1..]).stdin(Stdio::null()).stdout(out).stderr(err).spawn().map_err(|source| {
                match source.kind() {
                    io::ErrorKind::NotFound => SolverError::Missing(argv[0].clone()),
                    _ => SolverError::Spawn { program: argv[0].clone(), source },
                }
            })?;
        let status = match timeout {
            Some(limit) => match child.wait_timeout(limit).map_err(io_at(log))? {
                Some(status) => status,
                None => {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err(SolverError::Timeout { secs: limit.as_secs_f64(), log: log_tail(log) });
                }
            },
            None => child.wait().map_err(io_at(log))?,
        };
        let elapsed = start.elapsed();
        if !status.success() {
            return Err(SolverError::Failed { status, log: log_tail(log) });
        }
        let source = if self.writes_solution() { solution } else { log };
        let text = match fs::read_to_string(source) {
            Ok(t) if !t.trim().is_empty() => t,
            Ok(_) => return Err(SolverError::NoSolution { path: source.to_path_buf(), log: log_tail(log) }),
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                return Err(SolverError::NoSolution { path: source.to_path_buf(), log: log_tail(log) })
            }
            Err(e) => return Err(SolverError::Io { path: source.to_path_buf(), source: e }),
        };
        Ok(SolverRun { text, log: log.to_path_buf(), elapsed })
    }
}

/// Whether `program` can be found on `PATH` (or is an existing path).
pub fn on_path(program: &str) -> bool {
    let p = Path::new(program);
    if p.components().count() > 1 {
        return p.is_file();
    }
    std::env::var_os("PATH").is_some_and(|paths| std::env::split_paths(&paths).any(|d| d.join(program).is_file()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn placeholders_are_filled_per_word() {
        let c = SolverCommand::new("glpsol --lp {model} -o '{solution}'");
        let argv = c.argv(Path::new("a b.lp"), Path::new("out.sol")).unwrap();
        assert_eq!(argv, ["glpsol", "--lp", "a b.lp", "-o", "out.sol"]);
        assert!(SolverCommand::new("  ").argv(Path::new("m"), Path::new("s")).is_err());
        assert!(SolverCommand::new("x 'open").argv(Path::new("m"), Path::new("s")).is_err());
    }
}
