use crate::prelude::*;
use crate::Pos;

/// A parsed Sparks program: declarations followed by statements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub decls: Vec<Decl>,
    pub body: Vec<Stmt>,
}

impl Program {
    pub fn lookup(&self, name: &str) -> Option<&Decl> {
        self.decls.iter().find(|d| d.name == name)
    }

    /// Declared inputs in declaration order.
    pub fn inputs(&self) -> impl Iterator<Item = &Decl> {
        self.decls.iter().filter(|d| d.input)
    }

    /// Name of the variable set by `return` statements, if any.
    pub fn output_var(&self) -> Option<&str> {
        fn find(stmts: &[Stmt]) -> Option<&str> {
            stmts.iter().find_map(|s| match &s.kind {
                StmtKind::Return { var, .. } => Some(var.as_str()),
                StmtKind::If { then_body, else_body, .. } => find(then_body).or_else(|| find(else_body)),
                StmtKind::While { body, .. } | StmtKind::For { body, .. } | StmtKind::Phase { body, .. } => find(body),
                _ => None,
            })
        }
        find(&self.body)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decl {
    pub name: String,
    pub kind: DeclKind,
    pub input: bool,
    pub pos: Pos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeclKind {
    Bool,
    /// `W`-bit unsigned integer.
    Int,
    /// One-dimensional bit array.
    Array(u64),
    /// Two-dimensional bit array; rows can also be read as integers.
    Matrix(u64, u64),
}

/// Array subscript: a variable or a literal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Index {
    Const(u64),
    Var(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OperandKind {
    Const(u64),
    Var(String),
    /// `A[i]`
    Elem(String, Index),
    /// `A[i,j]`
    Elem2(String, Index, Index),
    /// `A[[i]]`: row `i` of a matrix read as an integer, column 0 lowest.
    Row(String, Index),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Operand {
    pub kind: OperandKind,
    pub pos: Pos,
}

impl Operand {
    pub fn is_plain_var(&self) -> bool {
        matches!(self.kind, OperandKind::Var(_) | OperandKind::Const(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Not,
    Inc,
    Dec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    And,
    Or,
    Xor,
    /// `=` or `eq`; boolean or word equality depending on the operands.
    Eq,
    Ne,
    Lt,
    Add,
}

impl BinOp {
    pub fn is_associative(self) -> bool {
        matches!(self, BinOp::And | BinOp::Or | BinOp::Xor | BinOp::Add)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::And => "and",
            BinOp::Or => "or",
            BinOp::Xor => "xor",
            BinOp::Eq => "=",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Add => "+",
        }
    }
}

/// An expression that lowers to at most one assembly operation on operands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Simple {
    Operand(Operand),
    Unary(UnOp, Operand),
    Binary(BinOp, Operand, Operand),
}

impl Simple {
    pub fn pos(&self) -> Pos {
        match self {
            Simple::Operand(o) | Simple::Unary(_, o) | Simple::Binary(_, o, _) => o.pos,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Simple(Simple),
    /// Binary operator applied to two simple sub-expressions.
    Compound(BinOp, Simple, Simple),
}

impl Expr {
    pub fn pos(&self) -> Pos {
        match self {
            Expr::Simple(s) | Expr::Compound(_, s, _) => s.pos(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LhsKind {
    Var(String),
    Elem(String, Index),
    Elem2(String, Index, Index),
    Row(String, Index),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lhs {
    pub kind: LhsKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum StmtKind {
    Assign(Lhs, Expr),
    /// `i++`
    Incr(String),
    /// `A[*] <- v` or `A[*,*] <- v`
    Fill {
        name: String,
        value: bool,
    },
    If {
        cond: Expr,
        then_body: Vec<Stmt>,
        else_body: Vec<Stmt>,
    },
    While {
        cond: Expr,
        body: Vec<Stmt>,
    },
    For {
        var: String,
        lower: Expr,
        upper: Expr,
        body: Vec<Stmt>,
    },
    Phase {
        name: String,
        body: Vec<Stmt>,
    },
    Return {
        var: String,
        value: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub pos: Pos,
}
