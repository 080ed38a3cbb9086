//! Lowering of structured Sparks statements to labelled assembly.
//!
//! Each compound statement expands to a fixed template. Compiler
//! temporaries and labels share one counter `K`, so `_t7`, `while7` and
//! `done7` always belong to the same statement.

use super::asm::{Arg, AsmLine, AsmProgram, Instr, PhaseSpan, SetOp};
use super::layout::{MemoryMap, Shape};
use super::CompileError;
use crate::frontend::check::{expr_type, is_word_comparison, simple_type};
use crate::frontend::{BinOp, Expr, Index, LhsKind, Operand, OperandKind, Program, Simple, Stmt, StmtKind, Ty, UnOp};
use crate::prelude::*;
use crate::Pos;

/// Lowers a checked program to assembly.
pub fn lower(program: &Program, word: u32) -> Result<AsmProgram, CompileError> {
    let mut memory = MemoryMap::new(word);
    for d in &program.decls {
        memory.alloc(&d.name, Shape::from_decl(d.kind), d.input, false);
    }
    let mut cx = Lower {
        p: program,
        word,
        memory,
        lines: Vec::new(),
        pending: Vec::new(),
        fixups: Vec::new(),
        labels: BTreeMap::new(),
        counter: 0,
        pos: None,
        phases: Vec::new(),
    };
    cx.stmts(&program.body)?;
    if !cx.pending.is_empty() {
        return Err(CompileError::FallsOffEnd);
    }
    for (line, label) in core::mem::take(&mut cx.fixups) {
        let target = cx.labels[&label];
        if let Some(t) = cx.lines[line].instr.jump_target_mut() {
            *t = target;
        }
    }
    let asm = AsmProgram { memory: cx.memory, lines: cx.lines, phases: cx.phases };
    asm.resolve()?;
    Ok(asm)
}

struct Lower<'a> {
    p: &'a Program,
    word: u32,
    memory: MemoryMap,
    lines: Vec<AsmLine>,
    /// Labels waiting for the next emitted line.
    pending: Vec<String>,
    fixups: Vec<(usize, String)>,
    labels: BTreeMap<String, usize>,
    counter: u32,
    pos: Option<Pos>,
    phases: Vec<PhaseSpan>,
}

/// Order of preference when several labels land on one line.
fn label_rank(l: &str) -> u8 {
    if l.starts_with("while") {
        0
    } else if l.starts_with("for") {
        1
    } else {
        2
    }
}

impl Lower<'_> {
    fn next_k(&mut self) -> u32 {
        self.counter += 1;
        self.counter
    }

    fn temp(&mut self, prefix: &str, k: u32, ty: Ty) -> String {
        let shape = if ty == Ty::Int { Shape::Int } else { Shape::Bool };
        let mut name = format!("_{prefix}{k}");
        let mut extra = 0;
        while self.memory.lookup(&name).is_some() {
            extra += 1;
            name = format!("_{prefix}{k}_{extra}");
        }
        self.memory.alloc(&name, shape, false, true);
        name
    }

    fn emit(&mut self, instr: Instr) {
        let idx = self.lines.len();
        let mut label = None;
        self.pending.sort_by_key(|l| label_rank(l));
        for l in self.pending.drain(..) {
            self.labels.insert(l.clone(), idx);
            label.get_or_insert(l);
        }
        self.lines.push(AsmLine { label, instr, pos: self.pos });
    }

    fn emit_jump(&mut self, instr: Instr, label: &str) {
        self.fixups.push((self.lines.len(), label.to_string()));
        self.emit(instr);
    }

    fn place(&mut self, label: String) {
        self.pending.push(label);
    }

    fn set(&mut self, dst: &str, op: SetOp, args: Vec<Arg>) {
        self.emit(Instr::Set { dst: dst.to_string(), op, args });
    }

    fn index(i: &Index) -> Arg {
        match i {
            Index::Const(n) => Arg::Const(*n),
            Index::Var(v) => Arg::Var(v.clone()),
        }
    }

    fn ty_of(&self, o: &Operand) -> Ty {
        crate::frontend::operand_type(self.p, o, self.word).unwrap_or(Ty::Bool)
    }

    /// Emits the array access for `o` into `dst`.
    fn load(&mut self, dst: &str, o: &Operand) {
        match &o.kind {
            OperandKind::Elem(a, i) => self.set(dst, SetOp::ArrayRef, vec![Arg::Var(a.clone()), Self::index(i)]),
            OperandKind::Elem2(a, i, j) => {
                self.set(dst, SetOp::ArrayRef, vec![Arg::Var(a.clone()), Self::index(i), Self::index(j)])
            }
            OperandKind::Row(a, i) => self.set(dst, SetOp::RowRef, vec![Arg::Var(a.clone()), Self::index(i)]),
            _ => unreachable!("not an array access"),
        }
    }

    /// Makes `o` usable as an instruction operand, loading array accesses
    /// into a fresh temporary.
    fn operand(&mut self, o: &Operand) -> Arg {
        match &o.kind {
            OperandKind::Const(n) => Arg::Const(*n),
            OperandKind::Var(v) => Arg::Var(v.clone()),
            _ => {
                let k = self.next_k();
                let t = self.temp("t", k, self.ty_of(o));
                self.load(&t, o);
                Arg::Var(t)
            }
        }
    }

    /// Emits `dst <- op(a, b)` for operands that are already plain.
    fn binary(&mut self, dst: &str, op: BinOp, a: Arg, b: Arg, word_cmp: bool) {
        match op {
            BinOp::And => self.set(dst, SetOp::And, vec![a, b]),
            BinOp::Or => self.set(dst, SetOp::Or, vec![a, b]),
            BinOp::Xor => self.set(dst, SetOp::Xor, vec![a, b]),
            BinOp::Eq if word_cmp => self.set(dst, SetOp::EqW, vec![a, b]),
            BinOp::Eq => self.set(dst, SetOp::Eq, vec![a, b]),
            BinOp::Ne if word_cmp => {
                let k = self.next_k();
                let t = self.temp("t", k, Ty::Bool);
                self.set(&t, SetOp::EqW, vec![a, b]);
                self.set(dst, SetOp::Not, vec![Arg::Var(t)]);
            }
            BinOp::Ne => self.set(dst, SetOp::Xor, vec![a, b]),
            BinOp::Lt => self.set(dst, SetOp::LtW, vec![a, b]),
            BinOp::Add => self.set(dst, SetOp::AddW, vec![a, b]),
        }
    }

    fn simple_into(&mut self, dst: &str, dst_ty: Ty, s: &Simple) {
        match s {
            Simple::Operand(o) if !o.is_plain_var() => self.load(dst, o),
            Simple::Operand(o) => {
                let op = if dst_ty == Ty::Int { SetOp::CopyW } else { SetOp::Copy };
                let a = self.operand(o);
                self.set(dst, op, vec![a]);
            }
            Simple::Unary(u, o) => {
                let a = self.operand(o);
                let op = match u {
                    UnOp::Not => SetOp::Not,
                    UnOp::Inc => SetOp::IncW,
                    UnOp::Dec => SetOp::DecW,
                };
                self.set(dst, op, vec![a]);
            }
            Simple::Binary(op, a, b) => {
                let wc = is_word_comparison(self.ty_of(a), self.ty_of(b));
                let (a, b) = (self.operand(a), self.operand(b));
                self.binary(dst, *op, a, b, wc);
            }
        }
    }

    /// Evaluates `s` to an operand, using a temporary unless it is plain.
    fn simple_arg(&mut self, s: &Simple) -> Arg {
        if let Simple::Operand(o) = s {
            return self.operand(o);
        }
        let ty = simple_type(self.p, s, self.word).unwrap_or(Ty::Bool);
        let k = self.next_k();
        let t = self.temp("t", k, if ty == Ty::Int { Ty::Int } else { Ty::Bool });
        self.simple_into(&t, ty, s);
        Arg::Var(t)
    }

    fn expr_into(&mut self, dst: &str, dst_ty: Ty, e: &Expr) {
        match e {
            Expr::Simple(s) => self.simple_into(dst, dst_ty, s),
            Expr::Compound(op, a, b) => {
                let wc = is_word_comparison(
                    simple_type(self.p, a, self.word).unwrap_or(Ty::Bool),
                    simple_type(self.p, b, self.word).unwrap_or(Ty::Bool),
                );
                let (a, b) = (self.simple_arg(a), self.simple_arg(b));
                self.binary(dst, *op, a, b, wc);
            }
        }
    }

    /// Evaluates `e` to an operand, using a temporary unless it is plain.
    fn expr_arg(&mut self, e: &Expr, prefix: &str) -> Arg {
        if let Expr::Simple(Simple::Operand(o)) = e {
            return self.operand(o);
        }
        let ty = expr_type(self.p, e, self.word).unwrap_or(Ty::Bool);
        let ty = if ty == Ty::Int { Ty::Int } else { Ty::Bool };
        let k = self.next_k();
        let t = self.temp(prefix, k, ty);
        self.expr_into(&t, ty, e);
        Arg::Var(t)
    }

    /// Condition as a bool variable name (temporaries for anything else).
    fn guard(&mut self, e: &Expr) -> String {
        if let Expr::Simple(Simple::Operand(Operand { kind: OperandKind::Var(v), .. })) = e {
            return v.clone();
        }
        match self.expr_arg(e, "g") {
            Arg::Var(v) => v,
            Arg::Const(c) => {
                let k = self.next_k();
                let t = self.temp("g", k, Ty::Bool);
                self.set(&t, SetOp::Copy, vec![Arg::Const(c)]);
                t
            }
        }
    }

    fn stmts(&mut self, body: &[Stmt]) -> Result<(), CompileError> {
        for s in body {
            self.stmt(s)?;
        }
        Ok(())
    }

    fn stmt(&mut self, s: &Stmt) -> Result<(), CompileError> {
        self.pos = Some(s.pos);
        match &s.kind {
            StmtKind::Assign(lhs, e) => match &lhs.kind {
                LhsKind::Var(v) => {
                    let ty = match self.memory.lookup(v).map(|s| s.shape) {
                        Some(Shape::Int) => Ty::Int,
                        _ => Ty::Bool,
                    };
                    self.expr_into(v, ty, e);
                }
                LhsKind::Elem(a, i) => {
                    let src = self.expr_arg(e, "t");
                    self.emit(Instr::ArraySet { array: a.clone(), index: vec![Self::index(i)], src });
                }
                LhsKind::Elem2(a, i, j) => {
                    let src = self.expr_arg(e, "t");
                    self.emit(Instr::ArraySet { array: a.clone(), index: vec![Self::index(i), Self::index(j)], src });
                }
                LhsKind::Row(a, i) => {
                    let src = self.expr_arg(e, "t");
                    self.emit(Instr::RowSet { matrix: a.clone(), index: Self::index(i), src });
                }
            },
            StmtKind::Incr(v) => self.set(v, SetOp::IncW, vec![Arg::Var(v.clone())]),
            StmtKind::Fill { name, value } => {
                let instr = match self.memory.lookup(name).map(|s| s.shape) {
                    Some(Shape::Matrix(..)) => Instr::MatrixInit { matrix: name.clone(), value: *value },
                    _ => Instr::ArrayInit { array: name.clone(), value: *value },
                };
                self.emit(instr);
            }
            StmtKind::If { cond, then_body, else_body } => {
                let g = self.guard(cond);
                let k = self.next_k();
                let done = format!("done{k}");
                if else_body.is_empty() {
                    self.emit_jump(Instr::Unless { guard: g, target: 0 }, &done);
                    self.stmts(then_body)?;
                } else {
                    let els = format!("else{k}");
                    self.emit_jump(Instr::Unless { guard: g, target: 0 }, &els);
                    self.stmts(then_body)?;
                    self.emit_jump(Instr::Goto { target: 0 }, &done);
                    self.place(els);
                    self.stmts(else_body)?;
                }
                self.place(done);
            }
            StmtKind::While { cond, body } => {
                let k = self.next_k();
                let head = format!("while{k}");
                let done = format!("done{k}");
                self.place(head.clone());
                let c = self.guard(cond);
                let test = self.temp("n", k, Ty::Bool);
                self.set(&test, SetOp::Not, vec![Arg::Var(c)]);
                self.emit_jump(Instr::If { guard: test, target: 0 }, &done);
                self.stmts(body)?;
                self.pos = Some(s.pos);
                self.emit_jump(Instr::Goto { target: 0 }, &head);
                self.place(done);
            }
            StmtKind::For { var, lower, upper, body } => {
                let k = self.next_k();
                self.expr_into(var, Ty::Int, lower);
                let stop = match upper {
                    Expr::Simple(Simple::Operand(Operand { kind: OperandKind::Const(c), .. })) => Arg::Const(*c),
                    _ => {
                        let t = self.temp("s", k, Ty::Int);
                        self.expr_into(&t, Ty::Int, upper);
                        Arg::Var(t)
                    }
                };
                let head = format!("for{k}");
                let done = format!("done{k}");
                self.place(head.clone());
                self.stmts(body)?;
                self.pos = Some(s.pos);
                let test = self.temp("e", k, Ty::Bool);
                self.set(&test, SetOp::EqW, vec![Arg::Var(var.clone()), stop]);
                self.emit_jump(Instr::If { guard: test, target: 0 }, &done);
                self.set(var, SetOp::IncW, vec![Arg::Var(var.clone())]);
                self.emit_jump(Instr::Goto { target: 0 }, &head);
                self.place(done);
            }
            StmtKind::Phase { name, body } => {
                let first = self.lines.len();
                self.stmts(body)?;
                self.phases.push(PhaseSpan { name: name.clone(), first, end: self.lines.len() });
            }
            StmtKind::Return { var, value } => self.emit(Instr::Return { var: var.clone(), value: *value }),
        }
        Ok(())
    }
}
