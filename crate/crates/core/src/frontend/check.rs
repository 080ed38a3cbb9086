//! Name resolution and type checking.

use super::ast::*;
use super::FrontendError;
use crate::prelude::*;
use crate::Pos;

/// Type of an operand or expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ty {
    Bool,
    Int,
    /// A literal, which fits either type when small enough.
    Lit(u64),
}

fn type_err(pos: Pos, msg: String) -> FrontendError {
    FrontendError::Type { pos, msg }
}

fn decl<'a>(p: &'a Program, name: &str, pos: Pos) -> Result<&'a Decl, FrontendError> {
    p.lookup(name).ok_or_else(|| FrontendError::Undeclared { name: name.into(), pos })
}

fn check_index(p: &Program, idx: &Index, extent: u64, pos: Pos) -> Result<(), FrontendError> {
    match idx {
        Index::Const(k) if *k >= extent => Err(type_err(pos, format!("constant index {k} is out of range for extent {extent}"))),
        Index::Const(_) => Ok(()),
        Index::Var(v) => match decl(p, v, pos)?.kind {
            DeclKind::Int => Ok(()),
            _ => Err(type_err(pos, format!("index `{v}` must be an int"))),
        },
    }
}

/// Type of a single operand.
pub fn operand_type(p: &Program, o: &Operand, word: u32) -> Result<Ty, FrontendError> {
    let pos = o.pos;
    match &o.kind {
        OperandKind::Const(n) => Ok(Ty::Lit(*n)),
        OperandKind::Var(name) => match decl(p, name, pos)?.kind {
            DeclKind::Bool => Ok(Ty::Bool),
            DeclKind::Int => Ok(Ty::Int),
            _ => Err(type_err(pos, format!("`{name}` is an array and needs an index"))),
        },
        OperandKind::Elem(name, i) => match decl(p, name, pos)?.kind {
            DeclKind::Array(n) => check_index(p, i, n, pos).map(|_| Ty::Bool),
            _ => Err(type_err(pos, format!("`{name}` is not a one-dimensional array"))),
        },
        OperandKind::Elem2(name, i, j) => match decl(p, name, pos)?.kind {
            DeclKind::Matrix(r, c) => {
                check_index(p, i, r, pos)?;
                check_index(p, j, c, pos)?;
                Ok(Ty::Bool)
            }
            _ => Err(type_err(pos, format!("`{name}` is not a matrix"))),
        },
        OperandKind::Row(name, i) => match decl(p, name, pos)?.kind {
            DeclKind::Matrix(r, c) if c == u64::from(word) => check_index(p, i, r, pos).map(|_| Ty::Int),
            DeclKind::Matrix(_, c) => {
                Err(type_err(pos, format!("rows of `{name}` have {c} columns, but an int has {word} bits")))
            }
            _ => Err(type_err(pos, format!("`{name}` is not a matrix"))),
        },
    }
}

fn want_bool(ty: Ty, pos: Pos) -> Result<(), FrontendError> {
    match ty {
        Ty::Bool | Ty::Lit(0 | 1) => Ok(()),
        _ => Err(type_err(pos, format!("expected a bool, found {}", describe(ty)))),
    }
}

fn want_int(ty: Ty, word: u32, pos: Pos) -> Result<(), FrontendError> {
    match ty {
        Ty::Int => Ok(()),
        Ty::Lit(n) if n <= max_word(word) => Ok(()),
        Ty::Lit(n) => Err(type_err(pos, format!("constant {n} does not fit in {word} bits"))),
        Ty::Bool => Err(type_err(pos, "expected an int, found a bool".into())),
    }
}

fn describe(ty: Ty) -> String {
    match ty {
        Ty::Bool => "a bool".into(),
        Ty::Int => "an int".into(),
        Ty::Lit(n) => format!("the constant {n}"),
    }
}

/// Largest value of a `word`-bit unsigned integer.
pub fn max_word(word: u32) -> u64 {
    if word >= 64 {
        u64::MAX
    } else {
        (1u64 << word) - 1
    }
}

/// Whether `=`/`!=` on these operand types compares words (otherwise bits).
pub(crate) fn is_word_comparison(a: Ty, b: Ty) -> bool {
    match (a, b) {
        (Ty::Int, _) | (_, Ty::Int) => true,
        (Ty::Bool, _) | (_, Ty::Bool) => false,
        _ => true,
    }
}

fn binary_type(op: BinOp, a: Ty, b: Ty, word: u32, pos: Pos) -> Result<Ty, FrontendError> {
    match op {
        BinOp::And | BinOp::Or | BinOp::Xor => {
            want_bool(a, pos)?;
            want_bool(b, pos)?;
            Ok(Ty::Bool)
        }
        BinOp::Eq | BinOp::Ne => {
            if is_word_comparison(a, b) {
                want_int(a, word, pos)?;
                want_int(b, word, pos)?;
            } else {
                want_bool(a, pos)?;
                want_bool(b, pos)?;
            }
            Ok(Ty::Bool)
        }
        BinOp::Lt => {
            want_int(a, word, pos)?;
            want_int(b, word, pos)?;
            Ok(Ty::Bool)
        }
        BinOp::Add => {
            want_int(a, word, pos)?;
            want_int(b, word, pos)?;
            Ok(Ty::Int)
        }
    }
}

pub(crate) fn simple_type(p: &Program, s: &Simple, word: u32) -> Result<Ty, FrontendError> {
    match s {
        Simple::Operand(o) => operand_type(p, o, word),
        Simple::Unary(UnOp::Not, o) => {
            want_bool(operand_type(p, o, word)?, o.pos)?;
            Ok(Ty::Bool)
        }
        Simple::Unary(_, o) => {
            want_int(operand_type(p, o, word)?, word, o.pos)?;
            Ok(Ty::Int)
        }
        Simple::Binary(op, a, b) => binary_type(*op, operand_type(p, a, word)?, operand_type(p, b, word)?, word, a.pos),
    }
}

pub(crate) fn expr_type(p: &Program, e: &Expr, word: u32) -> Result<Ty, FrontendError> {
    match e {
        Expr::Simple(s) => simple_type(p, s, word),
        Expr::Compound(op, a, b) => binary_type(*op, simple_type(p, a, word)?, simple_type(p, b, word)?, word, a.pos()),
    }
}

/// Checks declarations, names, types, and that the program ends in `return`.
pub fn check_program(p: &Program, word: u32) -> Result<(), FrontendError> {
    let max = max_word(word);
    let mut names = BTreeSet::new();
    for d in &p.decls {
        if d.name.starts_with('_') {
            return Err(type_err(d.pos, format!("`{}`: names starting with `_` are reserved", d.name)));
        }
        if !names.insert(d.name.as_str()) {
            return Err(type_err(d.pos, format!("`{}` is declared twice", d.name)));
        }
        let dims: &[u64] = match &d.kind {
            DeclKind::Array(n) => &[*n],
            DeclKind::Matrix(r, c) => &[*r, *c],
            _ => &[],
        };
        for &dim in dims {
            if dim == 0 {
                return Err(type_err(d.pos, format!("`{}` has an empty dimension", d.name)));
            }
            if dim > max {
                return Err(FrontendError::Dimension { name: d.name.clone(), dim, max, pos: d.pos });
            }
        }
    }
    let mut cx = Checker { p, word, ret_var: None, phases: BTreeSet::new() };
    cx.stmts(&p.body, true)?;
    if !ends_with_return(&p.body) {
        let pos = p.body.last().map(|s| s.pos).unwrap_or_default();
        return Err(type_err(pos, "the program must end with a `return` statement".into()));
    }
    Ok(())
}

fn ends_with_return(stmts: &[Stmt]) -> bool {
    match stmts.last().map(|s| &s.kind) {
        Some(StmtKind::Return { .. }) => true,
        Some(StmtKind::Phase { body, .. }) => ends_with_return(body),
        _ => false,
    }
}

struct Checker<'a> {
    p: &'a Program,
    word: u32,
    ret_var: Option<&'a str>,
    phases: BTreeSet<&'a str>,
}

impl<'a> Checker<'a> {
    fn stmts(&mut self, stmts: &'a [Stmt], top: bool) -> Result<(), FrontendError> {
        for s in stmts {
            self.stmt(s, top)?;
        }
        Ok(())
    }

    fn cond(&self, e: &Expr) -> Result<(), FrontendError> {
        want_bool(expr_type(self.p, e, self.word)?, e.pos())
    }

    fn stmt(&mut self, s: &'a Stmt, top: bool) -> Result<(), FrontendError> {
        let (p, word) = (self.p, self.word);
        match &s.kind {
            StmtKind::Assign(lhs, e) => {
                let target = match &lhs.kind {
                    LhsKind::Var(n) => operand_type(p, &Operand { kind: OperandKind::Var(n.clone()), pos: lhs.pos }, word)?,
                    LhsKind::Elem(n, i) => {
                        operand_type(p, &Operand { kind: OperandKind::Elem(n.clone(), i.clone()), pos: lhs.pos }, word)?
                    }
                    LhsKind::Elem2(n, i, j) => operand_type(
                        p,
                        &Operand { kind: OperandKind::Elem2(n.clone(), i.clone(), j.clone()), pos: lhs.pos },
                        word,
                    )?,
                    LhsKind::Row(n, i) => {
                        operand_type(p, &Operand { kind: OperandKind::Row(n.clone(), i.clone()), pos: lhs.pos }, word)?
                    }
                };
                let ty = expr_type(p, e, word)?;
                match target {
                    Ty::Bool => want_bool(ty, e.pos()),
                    _ => want_int(ty, word, e.pos()),
                }
            }
            StmtKind::Incr(v) => match decl(p, v, s.pos)?.kind {
                DeclKind::Int => Ok(()),
                _ => Err(type_err(s.pos, format!("`{v}++` needs an int"))),
            },
            StmtKind::Fill { name, .. } => match decl(p, name, s.pos)?.kind {
                DeclKind::Array(_) | DeclKind::Matrix(..) => Ok(()),
                _ => Err(type_err(s.pos, format!("`{name}` is not an array"))),
            },
            StmtKind::If { cond, then_body, else_body } => {
                self.cond(cond)?;
                self.stmts(then_body, false)?;
                self.stmts(else_body, false)
            }
            StmtKind::While { cond, body } => {
                self.cond(cond)?;
                self.stmts(body, false)
            }
            StmtKind::For { var, lower, upper, body } => {
                if decl(p, var, s.pos)?.kind != DeclKind::Int {
                    return Err(type_err(s.pos, format!("loop variable `{var}` must be an int")));
                }
                want_int(expr_type(p, lower, word)?, word, lower.pos())?;
                want_int(expr_type(p, upper, word)?, word, upper.pos())?;
                if let (Expr::Simple(Simple::Operand(lo)), Expr::Simple(Simple::Operand(hi))) = (lower, upper) {
                    if let (OperandKind::Const(a), OperandKind::Const(b)) = (&lo.kind, &hi.kind) {
                        if a > b {
                            return Err(type_err(s.pos, format!("loop range {a}..{b} is empty")));
                        }
                    }
                }
                self.stmts(body, false)
            }
            StmtKind::Phase { name, body } => {
                if !top {
                    return Err(type_err(s.pos, "phases may only appear at the top level".into()));
                }
                if !self.phases.insert(name) {
                    return Err(type_err(s.pos, format!("phase `{name}` is defined twice")));
                }
                self.stmts(body, false)
            }
            StmtKind::Return { var, .. } => {
                if decl(p, var, s.pos)?.kind != DeclKind::Bool {
                    return Err(type_err(s.pos, format!("returned variable `{var}` must be a bool")));
                }
                match self.ret_var {
                    Some(prev) if prev != var => Err(type_err(s.pos, format!("returns set both `{prev}` and `{var}`"))),
                    _ => {
                        self.ret_var = Some(var);
                        Ok(())
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse_program, ParamEnv};
    use super::*;

    fn check(src: &str) -> Result<Program, FrontendError> {
        parse_program(src, &ParamEnv::new(3, 100))
    }

    #[test]
    fn accepts_well_typed() {
        check(
            "input array p[4] matrix m[4,3] int i, k bool w, b\n\
             for i <- 0, 3 do if p[i] then k <- m[[i]] + 1 endif done\n\
             b <- k = 7  b <- b = 1  m[[2]] <- inc(k)  m[i,2] <- !b  k++\n\
             return w @ 1",
        )
        .unwrap();
    }

    #[test]
    fn rejects() {
        let cases = [
            ("bool w x <- 1 return w @ 1", "undeclared"),
            ("int k bool w k <- w return w @ 1", "type"),
            ("int k bool w k <- 8 return w @ 1", "fit"),
            ("array a[8] bool w return w @ 1", "exceeds"),
            ("array a[4] bool w w <- a[4] return w @ 1", "out of range"),
            ("matrix m[2,2] int k bool w k <- m[[0]] return w @ 1", "columns"),
            ("bool w w <- 1", "return"),
            ("bool w, v if w then return v @ 1 endif return w @ 1", "both"),
            ("bool w if w then phase a do w <- 1 done endif return w @ 1", "top level"),
            ("bool _x return _x @ 0", "reserved"),
            ("int k bool w for k <- 3, 1 do w <- 0 done return w @ 0", "empty"),
        ];
        for (src, needle) in cases {
            let err = check(src).unwrap_err().to_string();
            assert!(err.contains(needle), "{src}: {err}");
        }
    }
}
