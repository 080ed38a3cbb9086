//! Property tests over random small programs, graphs and names.

use proptest::prelude::*;
use rand::rngs::SmallRng;
use rand::SeedableRng;
use sparks_core::compiler::{compile_source, parse_asm, AsmProgram};
use sparks_core::frontend::{parse_params, ParamEnv};
use sparks_core::harness::{build_objective, fix_inputs, propagate, verify, DenseAssignment, VerifyOptions};
use sparks_core::interpreter::run;
use sparks_core::lpgen::{build_model, column_name, parse_column_name, LpModel, LpOptions, RowKind, Var};
use sparks_core::oracles::{
    brute_makespan, brute_matching_answer, max_matching_size, random_graph, GraphInstance, MatchingAnswer,
};
use sparks_core::traceviz::{render_csv, VizTrace};
use sparks_core::Rational;

/// Statements over inputs `a`, `b` and locals `c`, `d`, `p`, `q`.
const STATEMENTS: &[&str] = &[
    "c <- a + b",
    "d <- inc(c)",
    "c <- dec(d)",
    "p <- a < c",
    "q <- p xor q",
    "p <- a = b",
    "q <- !p",
    "d <- c",
    "if p then c <- a endif",
    "if q then d <- b else d <- 0 endif",
    "p <- p and q",
    "q <- p or q",
];

fn program(body: &[usize]) -> String {
    let mut s = String::from("input int a, b\nint c, d\nbool p, q, w\n");
    for &k in body {
        s.push_str(STATEMENTS[k]);
        s.push('\n');
    }
    s.push_str("if q then return w @ 1 endif\nreturn w @ 0\n");
    s
}

struct Case {
    asm: AsmProgram,
    params: ParamEnv,
    input: Vec<bool>,
}

fn case(word: u32, body: &[usize], seed: u64) -> Case {
    // Each statement is at most four lines; the tail is at most three.
    let params = parse_params(&format!("W = {word}\nmaxsteps = {}\n", 4 * body.len() + 3)).unwrap();
    let asm = compile_source(&program(body), &params).unwrap();
    let input = (0..2 * word).map(|j| seed >> j & 1 == 1).collect();
    Case { asm, params, input }
}

fn fixed_model(c: &Case) -> (LpModel, sparks_core::harness::Objective) {
    let mut m = build_model(&c.asm, &c.params, &LpOptions { prune: true }).unwrap();
    let obj = build_objective(&m, &c.input, Rational::from_integer(0)).unwrap();
    obj.apply(&mut m);
    fix_inputs(&mut m, &c.input).unwrap();
    (m, obj)
}

fn body() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0..STATEMENTS.len(), 1..8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_point_is_the_only_feasible_point(word in 1u32..=3, body in body(), seed: u64) {
        let c = case(word, &body, seed);
        let trace = run(&c.asm, &c.input, c.params.maxsteps() as usize).unwrap();
        let (m, obj) = fixed_model(&c);
        let point = m.trace_point(&trace).unwrap();
        let rep = verify(&m, &DenseAssignment::from_point(point.clone(), "trace"), Some(&obj), None, &VerifyOptions::default());
        prop_assert!(rep.is_verified());
        prop_assert_eq!(rep.checks.raw_violations, 0);
        prop_assert_eq!(rep.output, trace.output);
        prop_assert_eq!(propagate(&m).unwrap(), point);
    }

    #[test]
    fn moving_the_running_line_breaks_a_row(word in 1u32..=3, body in body(), seed: u64, pick: u32) {
        let c = case(word, &body, seed);
        let trace = run(&c.asm, &c.input, c.params.maxsteps() as usize).unwrap();
        let (m, _) = fixed_model(&c);
        let mut point = m.trace_point(&trace).unwrap();
        let t = 1 + pick % m.horizon;
        let line = trace.line_at(t as usize).unwrap();
        point.set(m.id(Var::S { line, t }).unwrap(), false);
        let opts = VerifyOptions { max_listed: usize::MAX, ..VerifyOptions::default() };
        let rep = verify(&m, &DenseAssignment::from_point(point, "perturbed"), None, None, &opts);
        let one = RowKind::OneLine { t };
        let broken = rep.checks.snapped_listed.iter().any(|v| v.row == one);
        prop_assert!(broken, "row {} holds", one);
    }

    #[test]
    fn assembly_text_round_trips(word in 1u32..=3, body in body()) {
        let c = case(word, &body, 0);
        let text = c.asm.to_text();
        let back = parse_asm(&text).unwrap();
        prop_assert_eq!(back.to_text(), text);
        prop_assert_eq!(back.lines.len(), c.asm.lines.len());
    }

    #[test]
    fn trace_csv_round_trips(word in 1u32..=3, body in body(), seed: u64) {
        let c = case(word, &body, seed);
        let trace = run(&c.asm, &c.input, c.params.maxsteps() as usize).unwrap();
        let v = VizTrace::from_run(&c.asm, &trace, c.params.maxsteps());
        let back = VizTrace::from_csv(&c.asm, &render_csv(&v)).unwrap();
        prop_assert_eq!(back.lines, v.lines);
        prop_assert_eq!(back.halt, v.halt);
    }

    #[test]
    fn column_names_round_trip(id: u32) {
        prop_assert_eq!(parse_column_name(&column_name(id)), Some(id));
    }

    #[test]
    fn makespan_lies_between_trivial_bounds(jobs in prop::collection::vec(1u8..=2, 0..10), n in 1usize..=4) {
        let total: u64 = jobs.iter().map(|&p| u64::from(p)).sum();
        let longest = jobs.iter().copied().max().map_or(0, u64::from);
        let t = brute_makespan(&jobs, n).unwrap();
        prop_assert!(t >= total.div_ceil(n as u64) && t >= longest && t <= total);
    }

    #[test]
    fn matching_oracle_is_consistent(n in 2usize..=8, p in 0.0f64..1.0, seed: u64) {
        let g = random_graph(n, p, &mut SmallRng::seed_from_u64(seed));
        prop_assert!(g.validate().is_ok());
        prop_assert_eq!(GraphInstance::from_matrix(&g.to_matrix()).to_matrix(), g.to_matrix());
        let best = max_matching_size(&g).unwrap();
        prop_assert!(best >= g.matching.len());
        let aug = brute_matching_answer(&g).unwrap() == MatchingAnswer::Aug;
        prop_assert_eq!(aug, best > g.matching.len());
    }
}
