//! Recursive-descent parser for Sparks.

use super::ast::*;
use super::lexer::{tokenize, Tok};
use super::FrontendError;
use crate::prelude::*;
use crate::Pos;

pub(super) fn parse(src: &str) -> Result<Program, FrontendError> {
    let mut p = Parser { toks: tokenize(src)?, at: 0 };
    let mut decls = Vec::new();
    while p.at_decl() {
        p.decl_line(&mut decls)?;
    }
    let body = p.stmts()?;
    if p.peek() != &Tok::Eof {
        return Err(p.unexpected("a statement"));
    }
    Ok(Program { decls, body })
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

/// One operand-level piece of an expression.
enum Item {
    Operand(Operand),
    Unary(UnOp, Operand),
    Group(Simple),
}

impl Item {
    fn into_simple(self) -> Simple {
        match self {
            Item::Operand(o) => Simple::Operand(o),
            Item::Unary(op, o) => Simple::Unary(op, o),
            Item::Group(s) => s,
        }
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn describe(tok: &Tok) -> String {
        match tok {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Kw(k) | Tok::Sym(k) => format!("`{k}`"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn unexpected(&self, wanted: &str) -> FrontendError {
        FrontendError::Syntax { pos: self.pos(), msg: format!("expected {wanted}, found {}", Self::describe(self.peek())) }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Tok::Kw(k) if *k == kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_sym(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Tok::Sym(s) if *s == sym) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), FrontendError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    fn expect_sym(&mut self, sym: &str) -> Result<(), FrontendError> {
        if self.eat_sym(sym) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{sym}`")))
        }
    }

    fn ident(&mut self) -> Result<(String, Pos), FrontendError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let pos = self.pos();
                self.bump();
                Ok((s, pos))
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    fn int(&mut self) -> Result<u64, FrontendError> {
        match *self.peek() {
            Tok::Int(n) => {
                self.bump();
                Ok(n)
            }
            _ => Err(self.unexpected("an integer")),
        }
    }

    fn bit(&mut self) -> Result<bool, FrontendError> {
        let pos = self.pos();
        match self.int()? {
            0 => Ok(false),
            1 => Ok(true),
            n => Err(FrontendError::Syntax { pos, msg: format!("expected 0 or 1, found {n}") }),
        }
    }

    fn at_decl(&self) -> bool {
        matches!(self.peek(), Tok::Kw("input" | "bool" | "int" | "array" | "matrix"))
    }

    fn decl_line(&mut self, out: &mut Vec<Decl>) -> Result<(), FrontendError> {
        let input = self.eat_kw("input");
        let kind_kw = match self.peek() {
            Tok::Kw(k @ ("bool" | "int" | "array" | "matrix")) => *k,
            _ => return Err(self.unexpected("`bool`, `int`, `array` or `matrix`")),
        };
        self.bump();
        loop {
            let (name, pos) = self.ident()?;
            let kind = match kind_kw {
                "bool" => DeclKind::Bool,
                "int" => DeclKind::Int,
                "array" => {
                    self.expect_sym("[")?;
                    let n = self.int()?;
                    self.expect_sym("]")?;
                    DeclKind::Array(n)
                }
                _ => {
                    self.expect_sym("[")?;
                    let r = self.int()?;
                    self.expect_sym(",")?;
                    let c = self.int()?;
                    self.expect_sym("]")?;
                    DeclKind::Matrix(r, c)
                }
            };
            out.push(Decl { name, kind, input, pos });
            if !self.eat_sym(",") {
                return Ok(());
            }
        }
    }

    fn stmts(&mut self) -> Result<Vec<Stmt>, FrontendError> {
        let mut out = Vec::new();
        while !matches!(self.peek(), Tok::Eof | Tok::Kw("endif" | "else" | "done")) {
            out.push(self.stmt()?);
        }
        Ok(out)
    }

    fn block(&mut self, what: &str) -> Result<Vec<Stmt>, FrontendError> {
        let pos = self.pos();
        let body = self.stmts()?;
        if body.is_empty() {
            return Err(FrontendError::Syntax { pos, msg: format!("empty {what}") });
        }
        Ok(body)
    }

    fn stmt(&mut self) -> Result<Stmt, FrontendError> {
        let pos = self.pos();
        let kind = match self.peek().clone() {
            Tok::Kw("if") => {
                self.bump();
                let cond = self.expr()?;
                self.expect_kw("then")?;
                let then_body = self.block("`then` branch")?;
                let else_body = if self.eat_kw("else") { self.block("`else` branch")? } else { Vec::new() };
                self.expect_kw("endif")?;
                StmtKind::If { cond, then_body, else_body }
            }
            Tok::Kw("while") => {
                self.bump();
                let cond = self.expr()?;
                self.expect_kw("do")?;
                let body = self.block("loop body")?;
                self.expect_kw("done")?;
                StmtKind::While { cond, body }
            }
            Tok::Kw("for") => {
                self.bump();
                let (var, _) = self.ident()?;
                self.expect_sym("<-")?;
                let lower = self.expr()?;
                self.expect_sym(",")?;
                let upper = self.expr()?;
                self.expect_kw("do")?;
                let body = self.block("loop body")?;
                self.expect_kw("done")?;
                StmtKind::For { var, lower, upper, body }
            }
            Tok::Kw("phase") => {
                self.bump();
                let (name, _) = self.ident()?;
                self.expect_kw("do")?;
                let body = self.block("phase")?;
                self.expect_kw("done")?;
                StmtKind::Phase { name, body }
            }
            Tok::Kw("return") => {
                self.bump();
                let (var, _) = self.ident()?;
                self.expect_sym("@")?;
                let value = self.bit()?;
                StmtKind::Return { var, value }
            }
            Tok::Ident(name) => {
                self.bump();
                if self.eat_sym("++") {
                    StmtKind::Incr(name)
                } else if matches!(self.peek(), Tok::Sym("[")) && matches!(self.toks[self.at + 1].0, Tok::Sym("*")) {
                    self.bump();
                    self.bump();
                    if self.eat_sym(",") {
                        self.expect_sym("*")?;
                    }
                    self.expect_sym("]")?;
                    self.expect_sym("<-")?;
                    let value = self.bit()?;
                    StmtKind::Fill { name, value }
                } else {
                    let lhs = match self.subscript(name, pos)?.kind {
                        OperandKind::Var(n) => LhsKind::Var(n),
                        OperandKind::Elem(n, i) => LhsKind::Elem(n, i),
                        OperandKind::Elem2(n, i, j) => LhsKind::Elem2(n, i, j),
                        OperandKind::Row(n, i) => LhsKind::Row(n, i),
                        OperandKind::Const(_) => unreachable!(),
                    };
                    self.expect_sym("<-")?;
                    let expr = self.expr()?;
                    StmtKind::Assign(Lhs { kind: lhs, pos }, expr)
                }
            }
            _ => return Err(self.unexpected("a statement")),
        };
        Ok(Stmt { kind, pos })
    }

    fn index(&mut self) -> Result<Index, FrontendError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Index::Const(n))
            }
            Tok::Ident(s) => {
                self.bump();
                Ok(Index::Var(s))
            }
            _ => Err(self.unexpected("an index (variable or integer)")),
        }
    }

    fn subscript(&mut self, name: String, pos: Pos) -> Result<Operand, FrontendError> {
        let kind = if self.eat_sym("[[") {
            let i = self.index()?;
            self.expect_sym("]]")?;
            OperandKind::Row(name, i)
        } else if self.eat_sym("[") {
            let i = self.index()?;
            if self.eat_sym(",") {
                let j = self.index()?;
                self.expect_sym("]")?;
                OperandKind::Elem2(name, i, j)
            } else {
                self.expect_sym("]")?;
                OperandKind::Elem(name, i)
            }
        } else {
            OperandKind::Var(name)
        };
        Ok(Operand { kind, pos })
    }

    fn operand(&mut self) -> Result<Operand, FrontendError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Operand { kind: OperandKind::Const(n), pos })
            }
            Tok::Ident(name) => {
                self.bump();
                self.subscript(name, pos)
            }
            _ => Err(self.unexpected("an operand")),
        }
    }

    fn binop(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::Kw("and") => BinOp::And,
            Tok::Kw("or") => BinOp::Or,
            Tok::Kw("xor") => BinOp::Xor,
            Tok::Kw("eq") | Tok::Sym("=") => BinOp::Eq,
            Tok::Sym("!=") => BinOp::Ne,
            Tok::Sym("<") => BinOp::Lt,
            Tok::Sym("+") => BinOp::Add,
            _ => return None,
        })
    }

    /// Operand or unary application (no parentheses).
    fn unary_item(&mut self) -> Result<Item, FrontendError> {
        if self.eat_sym("!") {
            return Ok(Item::Unary(UnOp::Not, self.operand()?));
        }
        for (kw, op) in [("inc", UnOp::Inc), ("dec", UnOp::Dec)] {
            if self.eat_kw(kw) {
                self.expect_sym("(")?;
                let o = self.operand()?;
                self.expect_sym(")")?;
                return Ok(Item::Unary(op, o));
            }
        }
        Ok(Item::Operand(self.operand()?))
    }

    fn item(&mut self) -> Result<Item, FrontendError> {
        let pos = self.pos();
        if !self.eat_sym("(") {
            return self.unary_item();
        }
        let first = self.unary_item()?;
        let simple = match self.binop() {
            None => first.into_simple(),
            Some(op) => {
                self.bump();
                let second = self.unary_item()?;
                match (first, second) {
                    (Item::Operand(a), Item::Operand(b)) => Simple::Binary(op, a, b),
                    _ => {
                        return Err(FrontendError::Syntax {
                            pos,
                            msg: "parenthesized operands of a binary operator must be plain operands".into(),
                        })
                    }
                }
            }
        };
        self.expect_sym(")")?;
        Ok(Item::Group(simple))
    }

    fn expr(&mut self) -> Result<Expr, FrontendError> {
        let pos = self.pos();
        let mut items = vec![self.item()?];
        let mut ops = Vec::new();
        while let Some(op) = self.binop() {
            self.bump();
            ops.push(op);
            items.push(self.item()?);
        }
        let ambiguous = || FrontendError::Syntax {
            pos,
            msg: "expression is too deep for one statement; add parentheses or a temporary".into(),
        };
        match items.len() {
            1 => Ok(Expr::Simple(items.pop().unwrap().into_simple())),
            2 => {
                let b = items.pop().unwrap();
                let a = items.pop().unwrap();
                Ok(match (a, b) {
                    (Item::Operand(a), Item::Operand(b)) => Expr::Simple(Simple::Binary(ops[0], a, b)),
                    (a, b) => Expr::Compound(ops[0], a.into_simple(), b.into_simple()),
                })
            }
            3 | 4 => {
                let op = ops[0];
                if !op.is_associative() || ops.iter().any(|o| *o != op) {
                    return Err(ambiguous());
                }
                let mut operands = Vec::new();
                for it in items {
                    match it {
                        Item::Operand(o) => operands.push(o),
                        _ => return Err(ambiguous()),
                    }
                }
                let mut it = operands.into_iter();
                let (a, b, c) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
                let rest = match it.next() {
                    Some(d) => Simple::Binary(op, c, d),
                    None => Simple::Operand(c),
                };
                Ok(Expr::Compound(op, Simple::Binary(op, a, b), rest))
            }
            _ => Err(ambiguous()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn body(src: &str) -> Vec<Stmt> {
        parse(src).unwrap().body
    }

    #[test]
    fn declarations() {
        let p = parse("input array p[5]\nmatrix x[5,3] int i, k bool w\n input int z w <- 1 return w @ 1").unwrap();
        let kinds: Vec<_> = p.decls.iter().map(|d| (d.name.as_str(), d.kind, d.input)).collect();
        assert_eq!(
            kinds,
            [
                ("p", DeclKind::Array(5), true),
                ("x", DeclKind::Matrix(5, 3), false),
                ("i", DeclKind::Int, false),
                ("k", DeclKind::Int, false),
                ("w", DeclKind::Bool, false),
                ("z", DeclKind::Int, true),
            ]
        );
        assert_eq!(p.body.len(), 2);
    }

    #[test]
    fn expression_shapes() {
        let b = body("x <- a and b  y <- !a and !b  z <- a + b + c  t <- (a + b) + c[1]  u <- a[i] v <- m[[k]]");
        assert!(matches!(&b[0].kind, StmtKind::Assign(_, Expr::Simple(Simple::Binary(BinOp::And, _, _)))));
        assert!(matches!(&b[1].kind, StmtKind::Assign(_, Expr::Compound(BinOp::And, Simple::Unary(UnOp::Not, _), _))));
        assert!(matches!(&b[2].kind, StmtKind::Assign(_, Expr::Compound(BinOp::Add, Simple::Binary(..), Simple::Operand(_)))));
        assert!(matches!(&b[3].kind, StmtKind::Assign(_, Expr::Compound(BinOp::Add, _, Simple::Operand(_)))));
        assert!(matches!(
            &b[5].kind,
            StmtKind::Assign(_, Expr::Simple(Simple::Operand(Operand { kind: OperandKind::Row(..), .. })))
        ));
    }

    #[test]
    fn statements() {
        let b = body(
            "for i <- 0, 4 do if p[i] then k++ else A[*] <- 0 endif done\n\
             while !doneV and !progress do B[*,*] <- 1 done\n\
             phase main do r <- 1 done return w @ 0",
        );
        assert_eq!(b.len(), 4);
        assert!(
            matches!(&b[0].kind, StmtKind::For { body, .. } if matches!(&body[0].kind, StmtKind::If { else_body, .. } if else_body.len() == 1))
        );
        assert!(matches!(&b[3].kind, StmtKind::Return { value: false, .. }));
    }

    #[test]
    fn rejects_bad_programs() {
        for src in [
            "if x then endif",
            "while x do done",
            "x <- a and b or c",
            "x <- a < b < c",
            "x <- (a + b + c)",
            "x <- a +",
            "return w @ 2",
            "x <- ((a))",
            "bool",
        ] {
            assert!(parse(src).is_err(), "{src}");
        }
    }
}
