//! The command-line tool: exit codes, artifacts and the solver bridge with
//! stand-in solvers.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use tempfile::TempDir;

const TOY: &str = "input int a, b\nint c\nbool w\nc <- a + b\nw <- a < b\nif w then return w @ 1 endif\nreturn w @ 0\n";
const TOY_PARAMS: &str = "W = 2\nmaxsteps = 12\n";
const TOY_INSTANCE: &str = "a <- 1\nb <- 2\n";

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        let ws = Workspace { dir: tempfile::tempdir().unwrap() };
        ws.write("toy.spk", TOY);
        ws.write("toy.param", TOY_PARAMS);
        ws.write("toy.in", TOY_INSTANCE);
        ws
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, text: &str) {
        fs::write(self.path(name), text).unwrap();
    }

    fn sparks(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_sparks"))
            .current_dir(self.dir.path())
            .env_remove("SPARKS_SOLVER_CMD")
            .args(args)
            .output()
            .unwrap()
    }
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn run_reports_the_output() {
    let ws = Workspace::new();
    let out = ws.sparks(&["run", "toy.spk", "-p", "toy.param", "-i", "toy.in"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("steps executed: 4"), "{text}");
    assert!(text.contains("w = 1"), "{text}");
    assert!(ws.path("toy.trace.csv").is_file());
}

#[test]
fn syntax_error_exits_2() {
    let ws = Workspace::new();
    ws.write("bad.spk", "bool w\nw <- \n");
    let out = ws.sparks(&["compile", "bad.spk", "-p", "toy.param"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    assert!(stderr(&out).contains("bad.spk"));
}

#[test]
fn missing_loop_bound_exits_3() {
    let ws = Workspace::new();
    ws.write("loop.spk", "int k\nbool w\nwhile k != 0 do k <- dec(k) done\nreturn w @ 1\n");
    let out = ws.sparks(&["compile", "loop.spk", "-p", "toy.param"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert!(stderr(&out).contains("bound.while1"));
}

#[test]
fn missing_file_exits_1() {
    let ws = Workspace::new();
    let out = ws.sparks(&["compile", "nowhere.spk", "-p", "toy.param"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn model_files_are_deterministic() {
    let ws = Workspace::new();
    for format in ["lp", "mps"] {
        let mut texts = Vec::new();
        for k in 0..2 {
            let file = format!("m{k}.{format}");
            let out = ws.sparks(&["inject", "toy.spk", "-p", "toy.param", "-i", "toy.in", "--format", format, "-o", &file]);
            assert_eq!(code(&out), 0, "{}", stderr(&out));
            texts.push(fs::read(ws.path(&file)).unwrap());
        }
        assert_eq!(texts[0], texts[1], "{format} output differs between runs");
    }
}

#[cfg(unix)]
#[test]
fn artifacts_are_world_readable() {
    use std::os::unix::fs::PermissionsExt;
    let ws = Workspace::new();
    let out = ws.sparks(&["lp", "toy.spk", "-p", "toy.param"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let mode = fs::metadata(ws.path("toy.lp")).unwrap().permissions().mode();
    assert_eq!(mode & 0o644, 0o644);
}

#[test]
fn solve_without_a_solver_exits_4() {
    let ws = Workspace::new();
    let args = ["solve", "toy.spk", "-p", "toy.param", "-i", "toy.in", "-f"];
    let out = ws.sparks(&args);
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains("SPARKS_SOLVER_CMD"));
    let mut missing = args.to_vec();
    missing.extend(["--solver-cmd", "no-such-solver-binary {model} {solution}"]);
    let out = ws.sparks(&missing);
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains("not found"), "{}", stderr(&out));
}

#[cfg(unix)]
#[test]
fn solver_timeout_exits_4() {
    let ws = Workspace::new();
    let started = Instant::now();
    let out =
        ws.sparks(&["solve", "toy.spk", "-p", "toy.param", "-i", "toy.in", "-f", "--timeout", "0.5", "--solver-cmd", "sleep 30"]);
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains("timed out"), "{}", stderr(&out));
    assert!(started.elapsed() < Duration::from_secs(20));
}

#[cfg(unix)]
#[test]
fn failing_solver_exits_4() {
    let ws = Workspace::new();
    let out = ws.sparks(&["solve", "toy.spk", "-p", "toy.param", "-i", "toy.in", "-f", "--solver-cmd", "false {model}"]);
    assert_eq!(code(&out), 4);
}

/// Writes the trace point of the toy run as a `name value` solution.
fn trace_solution(ws: &Workspace) -> String {
    use sparks_core::compiler::compile;
    use sparks_core::frontend::{parse_instance, parse_params, parse_program};
    use sparks_core::lpgen::{build_model, LpOptions};
    let params = parse_params(TOY_PARAMS).unwrap();
    let program = parse_program(TOY, &params).unwrap();
    let asm = compile(&program, &params).unwrap();
    let input = parse_instance(TOY_INSTANCE, &program, 2).unwrap().bits;
    let trace = sparks_core::interpreter::run(&asm, &input, 12).unwrap();
    let model = build_model(&asm, &params, &LpOptions { prune: true }).unwrap();
    let point = model.trace_point(&trace).unwrap();
    let mut text = String::new();
    for id in point.ones() {
        text.push_str(&format!("{} 1\n", model.layout.var(id).unwrap()));
    }
    ws.write("trace.sol", &text);
    text
}

#[test]
fn trace_point_solution_verifies() {
    let ws = Workspace::new();
    trace_solution(&ws);
    let out =
        ws.sparks(&["solve", "toy.spk", "-p", "toy.param", "-i", "toy.in", "-f", "--solution", "trace.sol", "--verify-exact"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = fs::read_to_string(ws.path("report.txt")).unwrap();
    assert!(report.contains("verified: yes"), "{report}");
    assert!(report.contains("interpreter trace: identical"), "{report}");
}

#[test]
fn stand_in_solver_output_is_read_from_stdout() {
    let ws = Workspace::new();
    trace_solution(&ws);
    let cat = format!("cat {}", ws.path("trace.sol").display());
    let out = ws.sparks(&["solve", "toy.spk", "-p", "toy.param", "-i", "toy.in", "-f", "--solver-cmd", &cat]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn tampered_solution_exits_5() {
    let ws = Workspace::new();
    let text = trace_solution(&ws);
    // Drop the line variable of step 2.
    let tampered: String =
        text.lines().filter(|l| !(l.starts_with("S_") && l.contains("_2 "))).map(|l| format!("{l}\n")).collect();
    assert_ne!(tampered, text);
    ws.write("bad.sol", &tampered);
    let out = ws.sparks(&["solve", "toy.spk", "-p", "toy.param", "-i", "toy.in", "-f", "--solution", "bad.sol"]);
    assert_eq!(code(&out), 5, "{}", stderr(&out));
    let report = fs::read_to_string(ws.path("report.txt")).unwrap();
    assert!(report.contains("verified: no"), "{report}");
}

#[test]
fn unknown_solution_variable_exits_2() {
    let ws = Workspace::new();
    ws.write("odd.sol", "Q_1_1 1\n");
    let out = ws.sparks(&["solve", "toy.spk", "-p", "toy.param", "-i", "toy.in", "--solution", "odd.sol"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn check_accepts_the_toy_program() {
    let ws = Workspace::new();
    let out = ws.sparks(&["check", "toy.spk", "-p", "toy.param", "-i", "toy.in"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(String::from_utf8_lossy(&out.stdout).contains("uniquely"));
}
