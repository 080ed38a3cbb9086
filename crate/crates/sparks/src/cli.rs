//! The `sparks` command line.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};

use sparks_core::harness::{
    build_objective, fix_inputs, parse_solution, propagate, DenseAssignment, Objective, VerifyOptions, VerifyReport,
};
use sparks_core::interpreter::Trace;
use sparks_core::lpgen::soundness::{catalogue, check_gadget};
use sparks_core::lpgen::{write_lp, write_mps, write_names, BitPoint, LpModel, Var};
use sparks_core::traceviz::{diff_traces, extract_trace, render_csv, render_memory_svg, render_svg, MemoryView, VizTrace};
use sparks_core::Rational;

use crate::check::{default_workers, verify_parallel};
use crate::files::{read_text, write_atomic, write_atomic_with, FmtSink};
use crate::pipeline::{bound_report, exit, parse_override, parse_rational, CliError, Session};
use crate::solver::{SolverCommand, SOLVER_ENV};

#[derive(Debug, Parser)]
#[command(name = "sparks", version, about = "Compile Sparks programs into time-indexed linear programs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile a program and report its step bound and phase windows.
    Compile {
        #[command(flatten)]
        program: ProgramArgs,
        /// Write the assembly listing to <workdir>/<name>.asm.
        #[arg(long)]
        emit_asm: bool,
    },
    /// Write the constraint set for all inputs of the program's size.
    Lp {
        #[command(flatten)]
        program: ProgramArgs,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Write the model with the objective of one instance.
    Inject {
        #[command(flatten)]
        program: ProgramArgs,
        #[command(flatten)]
        objective: ObjectiveArgs,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Run the interpreter on an instance; with --solve also solve and verify.
    Run {
        #[command(flatten)]
        program: ProgramArgs,
        #[command(flatten)]
        objective: ObjectiveArgs,
        /// Also write every memory snapshot to <name>.snapshots.csv.
        #[arg(long)]
        snapshots: bool,
        /// Solve the injected model and verify the solution.
        #[arg(long)]
        solve: bool,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Solve the injected model with an external solver and verify the result.
    Solve {
        #[command(flatten)]
        program: ProgramArgs,
        #[command(flatten)]
        objective: ObjectiveArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Plot the line-vs-time trace of a solution or of an interpreter run.
    Trace {
        #[command(flatten)]
        program: ProgramArgs,
        /// Instance to run the interpreter on.
        #[arg(short, long)]
        instance: Option<PathBuf>,
        /// Solver solution to read the trace from.
        #[arg(long)]
        solution: Option<PathBuf>,
        /// Trace CSV to compare against; differing steps are highlighted.
        #[arg(long)]
        compare: Option<PathBuf>,
        /// Value below which a line variable is flagged as not integral.
        #[arg(long, default_value = "0.99", value_parser = parse_rational)]
        threshold: Rational,
        /// Variables whose memory bits are plotted to <name>.memory.svg.
        #[arg(long, value_delimiter = ',')]
        memory: Vec<String>,
        /// Keep every line at every step (must match the solved model).
        #[arg(long)]
        no_phase: bool,
    },
    /// Exhaustive gadget checks; with a program, also per-line and instance checks.
    Check {
        /// Program to check line by line (default: the opcode suite).
        program: Option<PathBuf>,
        /// Parameter file (needed with a program).
        #[arg(short, long)]
        params: Option<PathBuf>,
        /// Override a parameter.
        #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_override)]
        set: Vec<(String, u64)>,
        /// Also check that the trace on this instance is the only feasible point.
        #[arg(short, long)]
        instance: Option<PathBuf>,
        /// Largest word size for the opcode suite.
        #[arg(long, default_value_t = 4)]
        max_word: u32,
        /// Largest array extent for the opcode suite.
        #[arg(long, default_value_t = 8)]
        max_extent: u32,
    },
}

#[derive(Debug, Args)]
pub struct ProgramArgs {
    /// Sparks source (.spk) or assembly listing (.asm).
    pub program: PathBuf,
    /// Parameter file.
    #[arg(short, long)]
    pub params: PathBuf,
    /// Override a parameter, e.g. --set maxsteps=2000.
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_override)]
    pub set: Vec<(String, u64)>,
    /// Directory for artifacts.
    #[arg(short, long, default_value = ".")]
    pub workdir: PathBuf,
    /// Base name of artifacts (default: the instance or parameter file name).
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Args)]
pub struct ObjectiveArgs {
    /// Instance file.
    #[arg(short, long)]
    pub instance: PathBuf,
    /// Fix the input variables to the instance (then d = 0 suffices).
    #[arg(short = 'f', long)]
    pub fix_inputs: bool,
    /// Weight of the output bit, in [0, 1/2] (default: `d` from the parameter file).
    #[arg(long, value_parser = parse_rational)]
    pub d: Option<Rational>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Lp,
    Mps,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Model file format.
    #[arg(long, value_enum, default_value = "lp")]
    pub format: Format,
    /// Model file (default: <workdir>/<name>.lp or .mps).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Keep every line at every step instead of pruning to phase windows.
    #[arg(long)]
    pub no_phase: bool,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Solver command with {model} and {solution} placeholders.
    #[arg(long, env = SOLVER_ENV)]
    pub solver_cmd: Option<String>,
    /// Solver time limit in seconds.
    #[arg(long, value_name = "SECONDS")]
    pub timeout: Option<f64>,
    /// Require an exactly 0/1 solution that satisfies every row without
    /// rounding.
    #[arg(long)]
    pub verify_exact: bool,
    /// Rounding tolerance for the integrality report.
    #[arg(long, default_value = "0.000001", value_parser = parse_rational)]
    pub tol: Rational,
    /// Read this solution file instead of running a solver.
    #[arg(long)]
    pub solution: Option<PathBuf>,
    /// Verifier threads (default: all cores).
    #[arg(long)]
    pub workers: Option<usize>,
}

/// Parses the arguments, runs the command and maps errors to exit codes.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::from(exit::OK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn stem(p: &Path) -> Option<String> {
    p.file_stem().map(|s| s.to_string_lossy().into_owned())
}

fn session(args: &ProgramArgs, instance: Option<&Path>) -> Result<Session, CliError> {
    let mut s = Session::load(&args.program, &args.params, &args.set)?;
    if let Some(n) = args.name.clone().or_else(|| instance.and_then(stem)) {
        s.name = n;
    }
    Ok(s)
}

fn say(text: &str) {
    print!("{text}");
}

fn line_text(model_asm: &sparks_core::compiler::AsmProgram, line: u32) -> String {
    let l = &model_asm.lines[line as usize];
    match &l.label {
        Some(label) => format!("{} ({label})", line + 1),
        None => format!("{}", line + 1),
    }
}

/// Runs one command.
pub fn execute(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Compile { program, emit_asm } => {
            let s = session(&program, None)?;
            if emit_asm {
                let path = s.artifact(&program.workdir, "asm");
                write_atomic(&path, s.asm.to_text().as_bytes())?;
                say(&format!("wrote {}\n", path.display()));
            }
            let b = s.bounds()?;
            say(&bound_report(&s.asm, &b, s.params.maxsteps()));
            Ok(())
        }
        Command::Lp { program, model } => {
            let s = session(&program, None)?;
            let m = s.model(!model.no_phase)?;
            write_model(&s, &m, &model, &program.workdir)?;
            Ok(())
        }
        Command::Inject { program, objective, model } => {
            let s = session(&program, Some(&objective.instance))?;
            let input = s.instance(&objective.instance)?;
            let mut m = s.model(!model.no_phase)?;
            let obj = inject(&s, &mut m, &input, &objective)?;
            write_model(&s, &m, &model, &program.workdir)?;
            say(&format!(
                "objective: m = {}, d = {}, optimum {} (w = 0) or {} (w = 1)\n",
                obj.m,
                obj.d,
                obj.target(false),
                obj.target(true)
            ));
            Ok(())
        }
        Command::Run { program, objective, snapshots, solve, solver, model } => {
            let s = session(&program, Some(&objective.instance))?;
            let input = s.instance(&objective.instance)?;
            let trace = s.run(&input)?;
            let mut report = run_report(&s, &trace);
            let horizon = s.params.maxsteps();
            let viz = VizTrace::from_run(&s.asm, &trace, horizon);
            if snapshots {
                let path = s.artifact(&program.workdir, "snapshots.csv");
                write_atomic_with(&path, |w| {
                    writeln!(
                        w,
                        "t,{}",
                        (0..trace.cell_count()).map(|c| s.asm.memory.cell_name(c)).collect::<Vec<_>>().join(",")
                    )?;
                    for t in 0..=trace.steps() {
                        let row: Vec<&str> = trace.state(t).iter().map(|&b| if b { "1" } else { "0" }).collect();
                        writeln!(w, "{t},{}", row.join(","))?;
                    }
                    Ok(())
                })?;
            }
            if solve {
                let outcome = solve_flow(&s, &input, &objective, &solver, &model, &program.workdir, Some(&trace))?;
                report.push_str(&outcome.text);
                write_atomic(&program.workdir.join("report.txt"), report.as_bytes())?;
                say(&report);
                return outcome.result;
            }
            write_atomic(&s.artifact(&program.workdir, "trace.csv"), render_csv(&viz).as_bytes())?;
            write_atomic(&program.workdir.join("report.txt"), report.as_bytes())?;
            say(&report);
            Ok(())
        }
        Command::Solve { program, objective, solver, model } => {
            let s = session(&program, Some(&objective.instance))?;
            let input = s.instance(&objective.instance)?;
            let trace = s.run(&input).ok();
            let outcome = solve_flow(&s, &input, &objective, &solver, &model, &program.workdir, trace.as_ref())?;
            write_atomic(&program.workdir.join("report.txt"), outcome.text.as_bytes())?;
            say(&outcome.text);
            outcome.result
        }
        Command::Trace { program, instance, solution, compare, threshold, memory, no_phase } => {
            trace_cmd(&program, instance.as_deref(), solution.as_deref(), compare.as_deref(), threshold, &memory, no_phase)
        }
        Command::Check { program, params, set, instance, max_word, max_extent } => match program {
            None => check_suite(max_word, max_extent),
            Some(p) => {
                let params = params.ok_or_else(|| CliError::Usage("checking a program needs --params".into()))?;
                let args = ProgramArgs { program: p, params, set, workdir: PathBuf::from("."), name: None };
                check_program(&args, instance.as_deref())
            }
        },
    }
}

fn inject(s: &Session, m: &mut LpModel, input: &[bool], o: &ObjectiveArgs) -> Result<Objective, CliError> {
    let d = o.d.unwrap_or_else(|| s.params.d());
    let obj = build_objective(m, input, d).map_err(|e| CliError::core("objective", e))?;
    obj.apply(m);
    if o.fix_inputs {
        fix_inputs(m, input).map_err(|e| CliError::core("fix inputs", e))?;
    }
    Ok(obj)
}

/// Writes the model and its `.names` sidecar; returns the model path.
fn write_model(s: &Session, m: &LpModel, args: &ModelArgs, workdir: &Path) -> Result<PathBuf, CliError> {
    let ext = match args.format {
        Format::Lp => "lp",
        Format::Mps => "mps",
    };
    let path = args.output.clone().unwrap_or_else(|| s.artifact(workdir, ext));
    let started = Instant::now();
    write_atomic_with(&path, |w| {
        FmtSink::run(w, |f| match args.format {
            Format::Lp => write_lp(m, f),
            Format::Mps => write_mps(m, f),
        })
    })?;
    let names = path.with_extension("names");
    write_atomic_with(&names, |w| FmtSink::run(w, |f| write_names(m, f)))?;
    let st = m.stats();
    say(&format!(
        "wrote {} ({} variables, {} rows, {} nonzeros, horizon {}) in {:.2?}\n",
        path.display(),
        st.vars,
        st.rows,
        st.nonzeros,
        m.horizon,
        started.elapsed()
    ));
    Ok(path)
}

fn run_report(s: &Session, trace: &Trace) -> String {
    let mut r = String::new();
    let steps = trace.steps();
    let _ =
        writeln!(r, "program: {} lines, {} memory cells, word {}", s.asm.lines.len(), s.asm.memory.cell_count(), s.asm.word());
    let _ = writeln!(r, "steps executed: {steps}");
    if let Some(&last) = trace.lines.last() {
        let _ = writeln!(r, "halted at line {}", line_text(&s.asm, last));
    }
    if let Ok(b) = s.bounds() {
        let verdict = if steps as u64 <= b.total { "within" } else { "EXCEEDS" };
        let _ = writeln!(r, "step bound: {} ({verdict})", b.total);
        for ph in &s.asm.phases {
            let _ = writeln!(r, "phase {}: {} steps", ph.name, trace.steps_in(ph.first, ph.end));
        }
    }
    if let (Some(w), Some(name)) = (trace.output, s.asm.output_var()) {
        let _ = writeln!(r, "{name} = {}", u8::from(w));
    }
    for (name, v) in s.outputs(|c| trace.bit(c, steps)) {
        let _ = writeln!(r, "{name} = {v}");
    }
    r
}

struct SolveOutcome {
    text: String,
    result: Result<(), CliError>,
}

fn solve_flow(
    s: &Session,
    input: &[bool],
    o: &ObjectiveArgs,
    args: &SolverArgs,
    margs: &ModelArgs,
    workdir: &Path,
    trace: Option<&Trace>,
) -> Result<SolveOutcome, CliError> {
    let mut m = s.model(!margs.no_phase)?;
    let obj = inject(s, &mut m, input, o)?;
    let mut text = String::new();
    let solution_text = match &args.solution {
        Some(p) => {
            let _ = writeln!(text, "solution: {}", p.display());
            read_text(p)?
        }
        None => {
            let cmd = SolverCommand::resolve(args.solver_cmd.as_deref())?;
            let model_path = write_model(s, &m, margs, workdir)?;
            let sol_path = s.artifact(workdir, "sol");
            let log = s.artifact(workdir, "log");
            let limit = args.timeout.map(Duration::from_secs_f64);
            let run = cmd.invoke(&model_path, &sol_path, &log, limit)?;
            let _ = writeln!(text, "solver: {} ({:.2?})", cmd.template, run.elapsed);
            run.text
        }
    };
    let provenance = args.solution.as_deref().map(|p| p.display().to_string()).unwrap_or_else(|| "solver".into());
    let sol = parse_solution(&solution_text, &m, &provenance).map_err(|e| CliError::core("solution", e))?;
    let reference = trace.and_then(|t| m.trace_point(t).ok());
    let opts = VerifyOptions { tol: args.tol, ..VerifyOptions::default() };
    let workers = args.workers.unwrap_or_else(default_workers);
    let started = Instant::now();
    let rep = verify_parallel(&m, &sol, Some(&obj), reference.as_ref(), &opts, workers);
    text.push_str(&verify_text(&rep));
    let _ = writeln!(text, "verified in {:.2?} on {workers} threads", started.elapsed());

    let viz = extract_trace(&m, &sol, Rational::new(99, 100));
    let interp = trace.map(|t| VizTrace::from_run(&s.asm, t, m.horizon));
    if let Some(h) = viz.halt {
        let line = viz.lines[h as usize - 1].unwrap_or(0);
        let _ = writeln!(text, "solution trace halts at step {h}, line {}", line_text(&s.asm, line));
    }
    if viz.flagged() > 0 {
        let _ = writeln!(text, "solution trace: {} steps flagged as not integral", viz.flagged());
    }
    if let Some(i) = &interp {
        if let Ok(d) = diff_traces(&viz, i) {
            let _ = writeln!(text, "solution trace vs interpreter: {} differing steps", d.differences.len());
        }
    }
    if let Some(p) = sol.snapped(opts.tol) {
        let bit = |c: u32| m.id(Var::B { cell: c, t: m.horizon }).is_some_and(|id| p.get(id));
        for (name, v) in s.outputs(bit) {
            let _ = writeln!(text, "{name} = {v}");
        }
    }
    write_atomic(&s.artifact(workdir, "trace.csv"), render_csv(&viz).as_bytes())?;
    let title = format!("{}: solution trace", s.name);
    write_atomic(&s.artifact(workdir, "svg"), render_svg(&viz, &title, interp.as_ref()).as_bytes())?;

    let exact_ok = rep.checks.raw_violations == 0 && rep.is_exactly_integral();
    let result = if !rep.is_verified() {
        Err(CliError::Verification(failure_reason(&rep)))
    } else if args.verify_exact && !exact_ok {
        Err(CliError::Verification("the solution is feasible only after rounding (--verify-exact)".into()))
    } else {
        Ok(())
    };
    Ok(SolveOutcome { text, result })
}

fn failure_reason(rep: &VerifyReport) -> String {
    if !rep.snappable {
        return "values are not within the tolerance of 0 or 1".into();
    }
    if rep.checks.snapped_violations > 0 {
        return format!("{} rows violated", rep.checks.snapped_violations);
    }
    if rep.bound_violations > 0 {
        return format!("{} values outside [0, 1]", rep.bound_violations);
    }
    if let (Some(e), Some(o)) = (&rep.expected_objective, &rep.objective_snapped) {
        if e != o {
            return format!("objective {o}, expected {e}");
        }
    }
    if let Some(t) = &rep.trace {
        if !t.is_empty() {
            return format!("point differs from the interpreter trace ({} line, {} memory, {} auxiliary values)", t.s, t.b, t.a);
        }
    }
    "unknown".into()
}

/// Text form of a verification report.
pub fn verify_text(rep: &VerifyReport) -> String {
    let mut r = String::new();
    let c = &rep.checks;
    let _ = writeln!(r, "rows checked: {}", c.rows);
    let _ = writeln!(r, "raw violations: {} (largest excess {})", c.raw_violations, c.raw_max_excess);
    for v in &c.raw_listed {
        let _ = writeln!(r, "  {}: lhs {} vs rhs {}", v.row, v.lhs, v.rhs);
    }
    let _ = writeln!(r, "rounded violations: {}", c.snapped_violations);
    for v in &c.snapped_listed {
        let _ = writeln!(r, "  {}: lhs {} vs rhs {}", v.row, v.lhs, v.rhs);
    }
    let _ = writeln!(r, "values outside [0, 1]: {}", rep.bound_violations);
    for (name, k) in ["S", "B", "A"].iter().zip(&rep.integrality) {
        let _ = writeln!(r, "integrality {name}: {}/{} exact, {}/{} within tolerance", k.exact, k.total, k.snappable, k.total);
    }
    let _ = writeln!(r, "objective: {} (rounded: {})", rep.objective_raw, opt(&rep.objective_snapped));
    if let Some(e) = &rep.expected_objective {
        let _ = writeln!(r, "expected objective: {e}");
    }
    if let Some(w) = rep.output {
        let _ = writeln!(r, "output bit: {}", u8::from(w));
    }
    if let Some(t) = &rep.trace {
        match t.first {
            None if t.s == u64::MAX => {
                let _ = writeln!(r, "interpreter trace: not compared (values do not round to 0/1)");
            }
            None => {
                let _ = writeln!(r, "interpreter trace: identical");
            }
            Some(v) => {
                let _ = writeln!(r, "interpreter trace: {} S, {} B, {} A values differ, first {v}", t.s, t.b, t.a);
            }
        }
    }
    let _ = writeln!(r, "verified: {}", if rep.is_verified() { "yes" } else { "no" });
    r
}

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_else(|| "-".into())
}

fn trace_cmd(
    args: &ProgramArgs,
    instance: Option<&Path>,
    solution: Option<&Path>,
    compare: Option<&Path>,
    threshold: Rational,
    memory: &[String],
    no_phase: bool,
) -> Result<(), CliError> {
    let s = session(args, instance.or(solution))?;
    let run = match instance {
        Some(i) => {
            let input = s.instance(i)?;
            Some(s.run(&input)?)
        }
        None => None,
    };
    let horizon = s.params.maxsteps();
    let cells: Vec<u32> = memory
        .iter()
        .map(|name| {
            let slot = s.asm.memory.lookup(name).ok_or_else(|| CliError::Usage(format!("no variable `{name}`")))?;
            Ok(slot.base..slot.base + slot.shape.cells(s.asm.word()))
        })
        .collect::<Result<Vec<_>, CliError>>()?
        .into_iter()
        .flatten()
        .collect();
    let (viz, mem) = match (solution, &run) {
        (Some(p), _) => {
            let m = s.model(!no_phase)?;
            let sol: DenseAssignment = parse_solution(&read_text(p)?, &m, &p.display().to_string())
                .map_err(|e| CliError::core(p.display().to_string(), e))?;
            (extract_trace(&m, &sol, threshold), MemoryView::from_point(&m, &sol, &cells))
        }
        (None, Some(t)) => (VizTrace::from_run(&s.asm, t, horizon), MemoryView::from_run(&s.asm, t, &cells, horizon)),
        (None, None) => return Err(CliError::Usage("trace needs --instance or --solution".into())),
    };
    let other = match compare {
        Some(p) => {
            Some(VizTrace::from_csv(&s.asm, &read_text(p)?).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?)
        }
        None if solution.is_some() => run.as_ref().map(|t| VizTrace::from_run(&s.asm, t, horizon)),
        None => None,
    };
    let mut text = format!("steps with a line: {}, flagged: {}", viz.executed().count(), viz.flagged());
    if let Some(h) = viz.halt {
        let _ = write!(text, ", halt at step {h}");
    }
    text.push('\n');
    if let Some(o) = &other {
        let d = diff_traces(&viz, o).map_err(|e| CliError::Usage(e.to_string()))?;
        let _ = writeln!(text, "differing steps: {}", d.differences.len());
        for (t, a, b) in d.differences.iter().take(10) {
            let show = |l: &Option<u32>| l.map(|l| (l + 1).to_string()).unwrap_or_else(|| "-".into());
            let _ = writeln!(text, "  t = {t}: {} vs {}", show(a), show(b));
        }
    }
    let title = format!("{}: {}", s.name, if solution.is_some() { "solution trace" } else { "interpreter trace" });
    let svg = s.artifact(&args.workdir, "svg");
    write_atomic(&svg, render_svg(&viz, &title, other.as_ref()).as_bytes())?;
    write_atomic(&s.artifact(&args.workdir, "trace.csv"), render_csv(&viz).as_bytes())?;
    if !cells.is_empty() {
        write_atomic(&s.artifact(&args.workdir, "memory.svg"), render_memory_svg(&mem, &title).as_bytes())?;
    }
    let _ = writeln!(text, "wrote {}", svg.display());
    say(&text);
    Ok(())
}

fn check_suite(max_word: u32, max_extent: u32) -> Result<(), CliError> {
    let mut failures = Vec::new();
    for w in 1..=max_word {
        let started = Instant::now();
        let specimens = catalogue(w, max_extent);
        let mut patterns = 0;
        for sp in &specimens {
            match check_gadget(&sp.exec, w) {
                Ok(r) => patterns += r.patterns,
                Err(e) => failures.push(format!("W={w} {}: {e}", sp.name)),
            }
        }
        say(&format!("W={w}: {} gadgets, {patterns} read patterns, {:.2?}\n", specimens.len(), started.elapsed()));
    }
    finish_checks(failures)
}

fn finish_checks(failures: Vec<String>) -> Result<(), CliError> {
    for f in &failures {
        say(&format!("FAIL {f}\n"));
    }
    if failures.is_empty() {
        say("all checks passed\n");
        Ok(())
    } else {
        Err(CliError::Verification(format!("{} checks failed", failures.len())))
    }
}

fn check_program(args: &ProgramArgs, instance: Option<&Path>) -> Result<(), CliError> {
    let s = session(args, instance)?;
    let exec = s.asm.resolve().map_err(|e| CliError::core("program", e))?;
    let mut failures = Vec::new();
    for (i, e) in exec.iter().enumerate() {
        if let Err(err) = check_gadget(e, s.asm.word()) {
            failures.push(format!("line {}: {err}", line_text(&s.asm, i as u32)));
        }
    }
    say(&format!("{} line gadgets checked\n", exec.len()));
    if let Some(path) = instance {
        let input = s.instance(path)?;
        let trace = s.run(&input)?;
        let mut m = s.model(true)?;
        let obj = build_objective(&m, &input, Rational::from_integer(0)).map_err(|e| CliError::core("objective", e))?;
        obj.apply(&mut m);
        fix_inputs(&mut m, &input).map_err(|e| CliError::core("fix inputs", e))?;
        let point = m.trace_point(&trace).map_err(|e| CliError::core("trace point", e))?;
        let sol = DenseAssignment::from_point(point.clone(), "trace");
        let rep = verify_parallel(&m, &sol, Some(&obj), None, &VerifyOptions::default(), default_workers());
        say(&format!(
            "trace point: {} rows, {} violated, objective {}\n",
            rep.checks.rows, rep.checks.snapped_violations, rep.objective_raw
        ));
        if !rep.is_verified() {
            failures.push(format!("trace point: {}", failure_reason(&rep)));
        }
        match propagate(&m) {
            Ok(p) if p == point => say("fixed inputs determine the trace point uniquely\n"),
            Ok(p) => failures.push(format!("propagation reached a different point ({} values differ)", differing(&p, &point))),
            Err(e) => failures.push(format!("uniqueness: {e}")),
        }
    }
    finish_checks(failures)
}

fn differing(a: &BitPoint, b: &BitPoint) -> usize {
    a.differing(b).count()
}
