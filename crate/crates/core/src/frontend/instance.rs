//! Instance files assign values to a program's input variables.
//!
//! ```text
//! # ms5
//! array p[5] <- {1,1,0,0,0}
//! matrix a[3,3] <- {{0,1,1},{0,0,1},{0,0,0}}
//! k <- 5
//! ```
//!
//! The type keyword and dimensions are optional; when present they must
//! agree with the declaration. Inputs that are not listed are 0.

use super::ast::{DeclKind, Program};
use super::check::max_word;
use super::lexer::{tokenize, Tok};
use super::FrontendError;
use crate::prelude::*;
use crate::Pos;

/// Input values, flattened to one bit per input memory cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputAssignment {
    /// Input bits in memory-layout order (declaration order, row-major,
    /// integers least significant bit first).
    pub bits: Vec<bool>,
    /// `(name, first bit, bit count)` for each input variable.
    pub spans: Vec<(String, usize, usize)>,
}

impl InputAssignment {
    /// All-zero assignment for `program`'s inputs.
    pub fn zeros(program: &Program, word: u32) -> Self {
        let mut spans = Vec::new();
        let mut n = 0;
        for d in program.inputs() {
            let len = cell_count(d.kind, word);
            spans.push((d.name.clone(), n, len));
            n += len;
        }
        InputAssignment { bits: vec![false; n], spans }
    }

    /// Number of input bits, `q`.
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Bits of one input variable.
    pub fn var(&self, name: &str) -> Option<&[bool]> {
        self.spans.iter().find(|s| s.0 == name).map(|&(_, start, len)| &self.bits[start..start + len])
    }

    /// Overwrites one input variable's bits.
    pub fn set_var(&mut self, name: &str, bits: &[bool]) -> bool {
        match self.spans.iter().find(|s| s.0 == name) {
            Some(&(_, start, len)) if len == bits.len() => {
                self.bits[start..start + len].copy_from_slice(bits);
                true
            }
            _ => false,
        }
    }
}

pub(crate) fn cell_count(kind: DeclKind, word: u32) -> usize {
    match kind {
        DeclKind::Bool => 1,
        DeclKind::Int => word as usize,
        DeclKind::Array(n) => n as usize,
        DeclKind::Matrix(r, c) => (r * c) as usize,
    }
}

fn inst_err(pos: Pos, msg: String) -> FrontendError {
    FrontendError::Instance { pos, msg }
}

enum Value {
    Scalar(u64, Pos),
    List(Vec<Value>, Pos),
}

/// Parses an instance file against `program`'s input declarations.
pub fn parse_instance(text: &str, program: &Program, word: u32) -> Result<InputAssignment, FrontendError> {
    let toks = tokenize(text).map_err(|e| match e {
        FrontendError::Syntax { pos, msg } => inst_err(pos, msg),
        other => other,
    })?;
    let mut out = InputAssignment::zeros(program, word);
    let mut seen = BTreeSet::new();
    let mut at = 0;
    let expect = |at: &mut usize, sym: &str| -> Result<(), FrontendError> {
        match &toks[*at].0 {
            Tok::Sym(s) if *s == sym => {
                *at += 1;
                Ok(())
            }
            _ => Err(inst_err(toks[*at].1, format!("expected `{sym}`"))),
        }
    };
    while toks[at].0 != Tok::Eof {
        let kw = match toks[at].0 {
            Tok::Kw(k @ ("bool" | "int" | "array" | "matrix")) => {
                at += 1;
                Some(k)
            }
            _ => None,
        };
        let (name, pos) = match &toks[at].0 {
            Tok::Ident(n) => (n.clone(), toks[at].1),
            _ => return Err(inst_err(toks[at].1, "expected an input name".into())),
        };
        at += 1;
        let decl = program
            .lookup(&name)
            .filter(|d| d.input)
            .ok_or_else(|| inst_err(pos, format!("`{name}` is not an input of the program")))?;
        if !seen.insert(name.clone()) {
            return Err(inst_err(pos, format!("`{name}` is assigned twice")));
        }
        let mut dims = Vec::new();
        if matches!(toks[at].0, Tok::Sym("[")) {
            at += 1;
            loop {
                match toks[at].0 {
                    Tok::Int(n) => dims.push(n),
                    _ => return Err(inst_err(toks[at].1, "expected a dimension".into())),
                }
                at += 1;
                if matches!(toks[at].0, Tok::Sym(",")) {
                    at += 1;
                } else {
                    break;
                }
            }
            expect(&mut at, "]")?;
        }
        let declared: (&str, Vec<u64>) = match decl.kind {
            DeclKind::Bool => ("bool", vec![]),
            DeclKind::Int => ("int", vec![]),
            DeclKind::Array(n) => ("array", vec![n]),
            DeclKind::Matrix(r, c) => ("matrix", vec![r, c]),
        };
        if kw.is_some_and(|k| k != declared.0) || (!dims.is_empty() && dims != declared.1) {
            return Err(inst_err(pos, format!("`{name}` does not match its declaration")));
        }
        expect(&mut at, "<-")?;
        let value = parse_value(&toks, &mut at)?;
        let bits = flatten(&name, decl.kind, &value, word)?;
        out.set_var(&name, &bits);
    }
    Ok(out)
}

fn parse_value(toks: &[(Tok, Pos)], at: &mut usize) -> Result<Value, FrontendError> {
    let pos = toks[*at].1;
    match toks[*at].0 {
        Tok::Int(n) => {
            *at += 1;
            Ok(Value::Scalar(n, pos))
        }
        Tok::Sym("{") => {
            *at += 1;
            let mut items = Vec::new();
            if matches!(toks[*at].0, Tok::Sym("}")) {
                return Err(inst_err(pos, "empty list".into()));
            }
            loop {
                items.push(parse_value(toks, at)?);
                match toks[*at].0 {
                    Tok::Sym(",") => *at += 1,
                    Tok::Sym("}") => {
                        *at += 1;
                        return Ok(Value::List(items, pos));
                    }
                    _ => return Err(inst_err(toks[*at].1, "expected `,` or `}`".into())),
                }
            }
        }
        _ => Err(inst_err(pos, "expected a value".into())),
    }
}

fn bit_of(v: &Value) -> Result<bool, FrontendError> {
    match v {
        Value::Scalar(0, _) => Ok(false),
        Value::Scalar(1, _) => Ok(true),
        Value::Scalar(n, pos) => Err(inst_err(*pos, format!("expected 0 or 1, found {n}"))),
        Value::List(_, pos) => Err(inst_err(*pos, "expected 0 or 1, found a list".into())),
    }
}

fn list_of(v: &Value, len: u64, what: &str) -> Result<Vec<bool>, FrontendError> {
    match v {
        Value::List(items, pos) => {
            if items.len() as u64 != len {
                return Err(inst_err(*pos, format!("{what} needs {len} entries, found {}", items.len())));
            }
            items.iter().map(bit_of).collect()
        }
        Value::Scalar(_, pos) => Err(inst_err(*pos, format!("{what} needs a list"))),
    }
}

fn flatten(name: &str, kind: DeclKind, v: &Value, word: u32) -> Result<Vec<bool>, FrontendError> {
    match kind {
        DeclKind::Bool => Ok(vec![bit_of(v)?]),
        DeclKind::Int => match v {
            Value::Scalar(n, pos) => {
                if *n > max_word(word) {
                    return Err(inst_err(*pos, format!("{n} does not fit in {word} bits")));
                }
                Ok((0..word).map(|b| n >> b & 1 == 1).collect())
            }
            Value::List(_, pos) => Err(inst_err(*pos, format!("`{name}` is an int"))),
        },
        DeclKind::Array(n) => list_of(v, n, &format!("`{name}`")),
        DeclKind::Matrix(r, c) => match v {
            Value::List(rows, pos) => {
                if rows.len() as u64 != r {
                    return Err(inst_err(*pos, format!("`{name}` needs {r} rows, found {}", rows.len())));
                }
                let mut bits = Vec::new();
                for (i, row) in rows.iter().enumerate() {
                    bits.extend(list_of(row, c, &format!("row {i} of `{name}`"))?);
                }
                Ok(bits)
            }
            Value::Scalar(_, pos) => Err(inst_err(*pos, format!("`{name}` needs a list of rows"))),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse_program, ParamEnv};
    use super::*;

    fn program() -> Program {
        parse_program("input array p[3] bool w input matrix a[2,2] input int k input bool f return w @ 1", &ParamEnv::new(3, 10))
            .unwrap()
    }

    #[test]
    fn flattens_in_layout_order() {
        let p = program();
        let inst = parse_instance("# x\narray p[3] <- {1,0,1}\na <- {{0,1},\n {1,1}} k <- 6", &p, 3).unwrap();
        let bits: Vec<u8> = inst.bits.iter().map(|&b| u8::from(b)).collect();
        assert_eq!(bits, [1, 0, 1, 0, 1, 1, 1, 0, 1, 1, 0]);
        assert_eq!(inst.var("k"), Some(&[false, true, true][..]));
        assert_eq!(inst.len(), 11);
    }

    #[test]
    fn rejects_mismatches() {
        let p = program();
        for text in [
            "w <- 1",
            "p <- {1,0}",
            "array p[4] <- {1,0,1,1}",
            "matrix p[3] <- {1,0,1}",
            "k <- 8",
            "a <- {{0,1},{1}}",
            "p <- {1,0,2}",
            "f <- 1 f <- 0",
            "q <- 1",
        ] {
            assert!(parse_instance(text, &p, 3).is_err(), "{text}");
        }
    }
}
