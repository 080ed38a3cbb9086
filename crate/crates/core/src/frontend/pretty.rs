use core::fmt::Write;

use super::ast::*;
use crate::prelude::*;

/// Renders a program as Sparks source. Parsing the result yields the same
/// program up to source positions.
pub fn pretty_print(p: &Program) -> String {
    let mut out = String::new();
    for d in &p.decls {
        if d.input {
            out.push_str("input ");
        }
        let _ = match d.kind {
            DeclKind::Bool => writeln!(out, "bool {}", d.name),
            DeclKind::Int => writeln!(out, "int {}", d.name),
            DeclKind::Array(n) => writeln!(out, "array {}[{n}]", d.name),
            DeclKind::Matrix(r, c) => writeln!(out, "matrix {}[{r},{c}]", d.name),
        };
    }
    if !p.decls.is_empty() {
        out.push('\n');
    }
    stmts(&mut out, &p.body, 0);
    out
}

fn index(i: &Index) -> String {
    match i {
        Index::Const(n) => n.to_string(),
        Index::Var(v) => v.clone(),
    }
}

fn operand(o: &Operand) -> String {
    match &o.kind {
        OperandKind::Const(n) => n.to_string(),
        OperandKind::Var(v) => v.clone(),
        OperandKind::Elem(a, i) => format!("{a}[{}]", index(i)),
        OperandKind::Elem2(a, i, j) => format!("{a}[{},{}]", index(i), index(j)),
        OperandKind::Row(a, i) => format!("{a}[[{}]]", index(i)),
    }
}

fn simple(s: &Simple) -> String {
    match s {
        Simple::Operand(o) => operand(o),
        Simple::Unary(UnOp::Not, o) => format!("!{}", operand(o)),
        Simple::Unary(UnOp::Inc, o) => format!("inc({})", operand(o)),
        Simple::Unary(UnOp::Dec, o) => format!("dec({})", operand(o)),
        Simple::Binary(op, a, b) => format!("{} {} {}", operand(a), op.symbol(), operand(b)),
    }
}

fn side(s: &Simple) -> String {
    match s {
        Simple::Binary(..) => format!("({})", simple(s)),
        _ => simple(s),
    }
}

fn expr(e: &Expr) -> String {
    match e {
        Expr::Simple(s) => simple(s),
        Expr::Compound(op, a, b) => format!("{} {} {}", side(a), op.symbol(), side(b)),
    }
}

fn stmts(out: &mut String, body: &[Stmt], depth: usize) {
    for s in body {
        stmt(out, s, depth);
    }
}

fn stmt(out: &mut String, s: &Stmt, depth: usize) {
    let pad = "  ".repeat(depth);
    let _ = match &s.kind {
        StmtKind::Assign(lhs, e) => {
            let l = match &lhs.kind {
                LhsKind::Var(v) => v.clone(),
                LhsKind::Elem(a, i) => format!("{a}[{}]", index(i)),
                LhsKind::Elem2(a, i, j) => format!("{a}[{},{}]", index(i), index(j)),
                LhsKind::Row(a, i) => format!("{a}[[{}]]", index(i)),
            };
            writeln!(out, "{pad}{l} <- {}", expr(e))
        }
        StmtKind::Incr(v) => writeln!(out, "{pad}{v}++"),
        StmtKind::Fill { name, value } => writeln!(out, "{pad}{name}[*] <- {}", u8::from(*value)),
        StmtKind::If { cond, then_body, else_body } => {
            let _ = writeln!(out, "{pad}if {} then", expr(cond));
            stmts(out, then_body, depth + 1);
            if !else_body.is_empty() {
                let _ = writeln!(out, "{pad}else");
                stmts(out, else_body, depth + 1);
            }
            writeln!(out, "{pad}endif")
        }
        StmtKind::While { cond, body } => {
            let _ = writeln!(out, "{pad}while {} do", expr(cond));
            stmts(out, body, depth + 1);
            writeln!(out, "{pad}done")
        }
        StmtKind::For { var, lower, upper, body } => {
            let _ = writeln!(out, "{pad}for {var} <- {}, {} do", expr(lower), expr(upper));
            stmts(out, body, depth + 1);
            writeln!(out, "{pad}done")
        }
        StmtKind::Phase { name, body } => {
            let _ = writeln!(out, "{pad}phase {name} do");
            stmts(out, body, depth + 1);
            writeln!(out, "{pad}done")
        }
        StmtKind::Return { var, value } => writeln!(out, "{pad}return {var} @ {}", u8::from(*value)),
    };
}
