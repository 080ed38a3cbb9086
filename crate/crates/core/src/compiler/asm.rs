//! The assembly language: instructions, text format, and operand resolution.
//!
//! Text format, one item per line, `#` starts a comment:
//!
//! ```text
//! word 3
//! decl input array p 5
//! decl int k
//! decl temp bool _g2
//! phase main
//!           set _g2 array_ref p k
//!           unless _g2 done3
//!           set k incw k
//! done3:    return w 1
//! endphase
//! ```

use core::fmt::{self, Write};

use super::layout::{MemoryMap, Shape};
use super::CompileError;
use crate::prelude::*;
use crate::Pos;

/// Operation computed by a `set` instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SetOp {
    Copy,
    Not,
    And,
    Or,
    Xor,
    Eq,
    CopyW,
    EqW,
    LtW,
    AddW,
    IncW,
    DecW,
    ArrayRef,
    RowRef,
}

impl SetOp {
    pub const ALL: [SetOp; 14] = [
        SetOp::Copy,
        SetOp::Not,
        SetOp::And,
        SetOp::Or,
        SetOp::Xor,
        SetOp::Eq,
        SetOp::CopyW,
        SetOp::EqW,
        SetOp::LtW,
        SetOp::AddW,
        SetOp::IncW,
        SetOp::DecW,
        SetOp::ArrayRef,
        SetOp::RowRef,
    ];

    pub fn mnemonic(self) -> &'static str {
        match self {
            SetOp::Copy => "copy",
            SetOp::Not => "not",
            SetOp::And => "and",
            SetOp::Or => "or",
            SetOp::Xor => "xor",
            SetOp::Eq => "eq",
            SetOp::CopyW => "copyw",
            SetOp::EqW => "eqw",
            SetOp::LtW => "ltw",
            SetOp::AddW => "addw",
            SetOp::IncW => "incw",
            SetOp::DecW => "decw",
            SetOp::ArrayRef => "array_ref",
            SetOp::RowRef => "row_ref",
        }
    }

    pub fn from_mnemonic(s: &str) -> Option<Self> {
        SetOp::ALL.into_iter().find(|op| op.mnemonic() == s)
    }

    /// Whether the destination is an int (otherwise a bool).
    pub fn writes_word(self) -> bool {
        matches!(self, SetOp::CopyW | SetOp::AddW | SetOp::IncW | SetOp::DecW | SetOp::RowRef)
    }
}

/// A named variable or a literal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Arg {
    Var(String),
    Const(u64),
}

impl fmt::Display for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arg::Var(v) => f.write_str(v),
            Arg::Const(n) => write!(f, "{n}"),
        }
    }
}

/// One assembly instruction. Jump targets are line indices (0-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instr {
    /// `set dst op args`. For `array_ref`/`row_ref` the first argument names
    /// the array and the rest are indices.
    Set {
        dst: String,
        op: SetOp,
        args: Vec<Arg>,
    },
    ArrayInit {
        array: String,
        value: bool,
    },
    MatrixInit {
        matrix: String,
        value: bool,
    },
    /// `array_set A i x` or `array_set A i j x`.
    ArraySet {
        array: String,
        index: Vec<Arg>,
        src: Arg,
    },
    RowSet {
        matrix: String,
        index: Arg,
        src: Arg,
    },
    /// Jump to `target` when `guard` is 0.
    Unless {
        guard: String,
        target: usize,
    },
    /// Jump to `target` when `guard` is 1.
    If {
        guard: String,
        target: usize,
    },
    Goto {
        target: usize,
    },
    /// Set `var` to `value` and halt.
    Return {
        var: String,
        value: bool,
    },
}

impl Instr {
    pub fn mnemonic(&self) -> &'static str {
        match self {
            Instr::Set { op, .. } => op.mnemonic(),
            Instr::ArrayInit { .. } => "array_init",
            Instr::MatrixInit { .. } => "matrix_init",
            Instr::ArraySet { .. } => "array_set",
            Instr::RowSet { .. } => "row_set",
            Instr::Unless { .. } => "unless",
            Instr::If { .. } => "if",
            Instr::Goto { .. } => "goto",
            Instr::Return { .. } => "return",
        }
    }

    pub fn jump_target(&self) -> Option<usize> {
        match self {
            Instr::Unless { target, .. } | Instr::If { target, .. } | Instr::Goto { target } => Some(*target),
            _ => None,
        }
    }

    pub(crate) fn jump_target_mut(&mut self) -> Option<&mut usize> {
        match self {
            Instr::Unless { target, .. } | Instr::If { target, .. } | Instr::Goto { target } => Some(target),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AsmLine {
    pub label: Option<String>,
    pub instr: Instr,
    /// Source statement this line was lowered from.
    pub pos: Option<Pos>,
}

/// A named phase covering lines `first..end`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseSpan {
    pub name: String,
    pub first: usize,
    pub end: usize,
}

/// A compiled program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AsmProgram {
    pub memory: MemoryMap,
    pub lines: Vec<AsmLine>,
    pub phases: Vec<PhaseSpan>,
}

impl AsmProgram {
    pub fn word(&self) -> u32 {
        self.memory.word()
    }

    /// Line index carrying `label`.
    pub fn label_line(&self, label: &str) -> Option<usize> {
        self.lines.iter().position(|l| l.label.as_deref() == Some(label))
    }

    /// Name used to refer to line `i` in jumps.
    pub fn line_ref(&self, i: usize) -> String {
        match self.lines.get(i).and_then(|l| l.label.clone()) {
            Some(l) => l,
            None => format!("@{}", i + 1),
        }
    }

    /// Phase containing line `i`, if any.
    pub fn phase_of(&self, i: usize) -> Option<&PhaseSpan> {
        self.phases.iter().find(|p| (p.first..p.end).contains(&i))
    }

    /// The variable set by `return` lines.
    pub fn output_var(&self) -> Option<&str> {
        self.lines.iter().find_map(|l| match &l.instr {
            Instr::Return { var, .. } => Some(var.as_str()),
            _ => None,
        })
    }

    /// Renders one instruction without its label.
    pub fn instr_text(&self, instr: &Instr) -> String {
        let join = |args: &[Arg]| args.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" ");
        match instr {
            Instr::Set { dst, op, args } => format!("set {dst} {} {}", op.mnemonic(), join(args)),
            Instr::ArrayInit { array, value } => format!("array_init {array} {}", u8::from(*value)),
            Instr::MatrixInit { matrix, value } => format!("matrix_init {matrix} {}", u8::from(*value)),
            Instr::ArraySet { array, index, src } => format!("array_set {array} {} {src}", join(index)),
            Instr::RowSet { matrix, index, src } => format!("row_set {matrix} {index} {src}"),
            Instr::Unless { guard, target } => format!("unless {guard} {}", self.line_ref(*target)),
            Instr::If { guard, target } => format!("if {guard} {}", self.line_ref(*target)),
            Instr::Goto { target } => format!("goto {}", self.line_ref(*target)),
            Instr::Return { var, value } => format!("return {var} {}", u8::from(*value)),
        }
    }

    /// Serializes to the text format; [`parse_asm`] reads it back.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "word {}", self.word());
        for s in self.memory.slots() {
            let _ = write!(out, "decl ");
            if s.input {
                out.push_str("input ");
            }
            if s.temp {
                out.push_str("temp ");
            }
            let _ = match s.shape {
                Shape::Bool | Shape::Int => writeln!(out, "{} {}", s.shape.keyword(), s.name),
                Shape::Array(n) => writeln!(out, "array {} {n}", s.name),
                Shape::Matrix(r, c) => writeln!(out, "matrix {} {r} {c}", s.name),
            };
        }
        for (i, line) in self.lines.iter().enumerate() {
            if let Some(p) = self.phases.iter().find(|p| p.first == i) {
                let _ = writeln!(out, "phase {}", p.name);
            }
            let label = line.label.as_ref().map(|l| format!("{l}:")).unwrap_or_default();
            let _ = writeln!(out, "{label:<10}{}", self.instr_text(&line.instr));
            if self.phases.iter().any(|p| p.end == i + 1) {
                out.push_str("endphase\n");
            }
        }
        out
    }
}

/// Parses the assembly text format.
pub fn parse_asm(text: &str) -> Result<AsmProgram, CompileError> {
    let err = |line: usize, msg: String| CompileError::Asm { line: line + 1, msg };
    let mut memory: Option<MemoryMap> = None;
    let mut lines = Vec::new();
    let mut phases: Vec<PhaseSpan> = Vec::new();
    let mut open_phase: Option<(String, usize)> = None;
    let mut refs: Vec<(usize, String, usize)> = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut toks: Vec<&str> = body.split_whitespace().collect();
        match toks[0] {
            "word" => {
                let w: u32 = toks.get(1).and_then(|t| t.parse().ok()).ok_or_else(|| err(no, "bad word size".into()))?;
                if !(1..=32).contains(&w) || memory.is_some() {
                    return Err(err(no, "bad or repeated `word` line".into()));
                }
                memory = Some(MemoryMap::new(w));
                continue;
            }
            "decl" => {
                let mem = memory.as_mut().ok_or_else(|| err(no, "`decl` before `word`".into()))?;
                let mut rest = &toks[1..];
                let input = rest.first() == Some(&"input");
                if input {
                    rest = &rest[1..];
                }
                let temp = rest.first() == Some(&"temp");
                if temp {
                    rest = &rest[1..];
                }
                let num = |k: usize| -> Result<u32, CompileError> {
                    rest.get(k).and_then(|t| t.parse().ok()).ok_or_else(|| err(no, "bad dimension".into()))
                };
                let shape = match rest.first() {
                    Some(&"bool") => Shape::Bool,
                    Some(&"int") => Shape::Int,
                    Some(&"array") => Shape::Array(num(2)?),
                    Some(&"matrix") => Shape::Matrix(num(2)?, num(3)?),
                    _ => return Err(err(no, "bad declaration".into())),
                };
                let name = rest.get(1).ok_or_else(|| err(no, "missing name".into()))?;
                mem.alloc(name, shape, input, temp).ok_or_else(|| err(no, format!("`{name}` declared twice")))?;
                continue;
            }
            "phase" => {
                let name = toks.get(1).ok_or_else(|| err(no, "missing phase name".into()))?;
                if open_phase.is_some() {
                    return Err(err(no, "nested phase".into()));
                }
                open_phase = Some((name.to_string(), lines.len()));
                continue;
            }
            "endphase" => {
                let (name, first) = open_phase.take().ok_or_else(|| err(no, "`endphase` without `phase`".into()))?;
                phases.push(PhaseSpan { name, first, end: lines.len() });
                continue;
            }
            _ => {}
        }
        let label = if toks[0].ends_with(':') {
            let l = toks.remove(0).trim_end_matches(':').to_string();
            if toks.is_empty() {
                return Err(err(no, "label without instruction".into()));
            }
            Some(l)
        } else {
            None
        };
        let arg = |t: &str| match t.parse::<u64>() {
            Ok(n) => Arg::Const(n),
            Err(_) => Arg::Var(t.to_string()),
        };
        let bit = |t: Option<&&str>| match t.copied() {
            Some("0") => Ok(false),
            Some("1") => Ok(true),
            _ => Err(err(no, "expected 0 or 1".into())),
        };
        let name = |k: usize| toks.get(k).map(|s| s.to_string()).ok_or_else(|| err(no, "missing operand".into()));
        let mut target = |k: usize| -> Result<usize, CompileError> {
            let t = toks.get(k).ok_or_else(|| err(no, "missing jump target".into()))?;
            refs.push((lines.len(), t.to_string(), no));
            Ok(usize::MAX)
        };
        let instr = match toks[0] {
            "set" => {
                let op = toks.get(2).and_then(|m| SetOp::from_mnemonic(m)).ok_or_else(|| err(no, "unknown operation".into()))?;
                Instr::Set { dst: name(1)?, op, args: toks[3..].iter().map(|t| arg(t)).collect() }
            }
            "array_init" => Instr::ArrayInit { array: name(1)?, value: bit(toks.get(2))? },
            "matrix_init" => Instr::MatrixInit { matrix: name(1)?, value: bit(toks.get(2))? },
            "array_set" if toks.len() >= 4 => Instr::ArraySet {
                array: name(1)?,
                index: toks[2..toks.len() - 1].iter().map(|t| arg(t)).collect(),
                src: arg(toks[toks.len() - 1]),
            },
            "row_set" if toks.len() == 4 => Instr::RowSet { matrix: name(1)?, index: arg(toks[2]), src: arg(toks[3]) },
            "unless" => Instr::Unless { guard: name(1)?, target: target(2)? },
            "if" => Instr::If { guard: name(1)?, target: target(2)? },
            "goto" => Instr::Goto { target: target(1)? },
            "return" => Instr::Return { var: name(1)?, value: bit(toks.get(2))? },
            other => return Err(err(no, format!("unknown instruction `{other}`"))),
        };
        lines.push(AsmLine { label, instr, pos: None });
    }
    if let Some((name, _)) = open_phase {
        return Err(CompileError::Asm { line: text.lines().count(), msg: format!("phase `{name}` is not closed") });
    }
    let memory = memory.ok_or_else(|| CompileError::Asm { line: 1, msg: "missing `word` line".into() })?;
    let mut labels = BTreeMap::new();
    for (i, l) in lines.iter().enumerate() {
        if let Some(label) = &l.label {
            if labels.insert(label.clone(), i).is_some() {
                return Err(CompileError::Asm { line: 0, msg: format!("label `{label}` defined twice") });
            }
        }
    }
    for (at, name, no) in refs {
        let t = match name.strip_prefix('@').and_then(|n| n.parse::<usize>().ok()) {
            Some(n) if n >= 1 => n - 1,
            _ => *labels.get(&name).ok_or_else(|| err(no, format!("unknown label `{name}`")))?,
        };
        if let Some(slot) = lines[at].instr.jump_target_mut() {
            *slot = t;
        }
    }
    let asm = AsmProgram { memory, lines, phases };
    asm.resolve()?;
    Ok(asm)
}

/// A bit operand after name resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bit {
    Cell(u32),
    Const(bool),
}

/// A word operand: `W` consecutive cells or a literal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Word {
    Cells(u32),
    Const(u64),
}

/// A bit array viewed as `rows x cols`; one-dimensional arrays have one
/// column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Table {
    pub base: u32,
    pub rows: u32,
    pub cols: u32,
}

impl Table {
    pub fn cell(&self, r: u32, c: u32) -> u32 {
        self.base + r * self.cols + c
    }

    pub fn cells(&self) -> core::ops::Range<u32> {
        self.base..self.base + self.rows * self.cols
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitOp {
    Copy(Bit),
    Not(Bit),
    And(Bit, Bit),
    Or(Bit, Bit),
    Xor(Bit, Bit),
    Eq(Bit, Bit),
    EqW(Word, Word),
    LtW(Word, Word),
    /// `table[row]` or `table[row, col]`.
    Load {
        table: Table,
        row: Word,
        col: Option<Word>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WordOp {
    Copy(Word),
    Add(Word, Word),
    Inc(Word),
    Dec(Word),
    LoadRow { table: Table, row: Word },
}

/// An instruction with all names resolved to cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    SetBit {
        dst: u32,
        op: BitOp,
    },
    SetWord {
        dst: u32,
        op: WordOp,
    },
    Fill {
        table: Table,
        value: bool,
    },
    Store {
        table: Table,
        row: Word,
        col: Option<Word>,
        src: Bit,
    },
    StoreRow {
        table: Table,
        row: Word,
        src: Word,
    },
    /// Jump to `target` when the guard cell equals `jump_on`.
    Branch {
        guard: u32,
        jump_on: bool,
        target: usize,
    },
    Goto(usize),
    Return {
        cell: u32,
        value: bool,
    },
}

impl Exec {
    /// Cells read by this instruction, without duplicates.
    pub fn reads(&self, word: u32) -> Vec<u32> {
        let mut out = Vec::new();
        let bit = |b: &Bit, out: &mut Vec<u32>| {
            if let Bit::Cell(c) = b {
                out.push(*c);
            }
        };
        let wd = |w: &Word, out: &mut Vec<u32>| {
            if let Word::Cells(c) = w {
                out.extend(*c..*c + word);
            }
        };
        match self {
            Exec::SetBit { op, .. } => match op {
                BitOp::Copy(a) | BitOp::Not(a) => bit(a, &mut out),
                BitOp::And(a, b) | BitOp::Or(a, b) | BitOp::Xor(a, b) | BitOp::Eq(a, b) => {
                    bit(a, &mut out);
                    bit(b, &mut out);
                }
                BitOp::EqW(a, b) | BitOp::LtW(a, b) => {
                    wd(a, &mut out);
                    wd(b, &mut out);
                }
                BitOp::Load { table, row, col } => {
                    wd(row, &mut out);
                    if let Some(c) = col {
                        wd(c, &mut out);
                    }
                    out.extend(table.cells());
                }
            },
            Exec::SetWord { op, .. } => match op {
                WordOp::Copy(a) | WordOp::Inc(a) | WordOp::Dec(a) => wd(a, &mut out),
                WordOp::Add(a, b) => {
                    wd(a, &mut out);
                    wd(b, &mut out);
                }
                WordOp::LoadRow { table, row } => {
                    wd(row, &mut out);
                    out.extend(table.cells());
                }
            },
            Exec::Fill { .. } | Exec::Goto(_) | Exec::Return { .. } => {}
            Exec::Store { table, row, col, src } => {
                wd(row, &mut out);
                if let Some(c) = col {
                    wd(c, &mut out);
                }
                bit(src, &mut out);
                out.extend(table.cells());
            }
            Exec::StoreRow { table, row, src } => {
                wd(row, &mut out);
                wd(src, &mut out);
                out.extend(table.cells());
            }
            Exec::Branch { guard, .. } => out.push(*guard),
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Cells this instruction may write (its gadget pins all of them).
    pub fn writes(&self, word: u32) -> Vec<u32> {
        match self {
            Exec::SetBit { dst, .. } => vec![*dst],
            Exec::SetWord { dst, .. } => (*dst..*dst + word).collect(),
            Exec::Fill { table, .. } | Exec::Store { table, .. } | Exec::StoreRow { table, .. } => table.cells().collect(),
            Exec::Return { cell, .. } => vec![*cell],
            Exec::Branch { .. } | Exec::Goto(_) => Vec::new(),
        }
    }

    /// Whether control falls through to the next line.
    pub fn falls_through(&self) -> bool {
        !matches!(self, Exec::Goto(_) | Exec::Return { .. })
    }
}

impl AsmProgram {
    /// Resolves every line's operands to memory cells, checking types.
    pub fn resolve(&self) -> Result<Vec<Exec>, CompileError> {
        let n = self.lines.len();
        let mut out = Vec::with_capacity(n);
        for (i, line) in self.lines.iter().enumerate() {
            let exec = self.resolve_line(&line.instr).map_err(|msg| CompileError::Asm { line: i + 1, msg })?;
            if let Some(t) = line.instr.jump_target() {
                if t >= n {
                    return Err(CompileError::Asm { line: i + 1, msg: "jump target out of range".into() });
                }
            }
            out.push(exec);
        }
        match out.last() {
            Some(Exec::Return { .. } | Exec::Goto(_)) => {}
            _ => return Err(CompileError::FallsOffEnd),
        }
        let mut ret = None;
        for e in &out {
            if let Exec::Return { cell, .. } = e {
                if ret.is_some_and(|c| c != *cell) {
                    return Err(CompileError::Asm { line: 0, msg: "return lines set different variables".into() });
                }
                ret = Some(*cell);
            }
        }
        let mut spans: Vec<&PhaseSpan> = self.phases.iter().collect();
        spans.sort_by_key(|p| p.first);
        for w in spans.windows(2) {
            if w[0].end > w[1].first {
                return Err(CompileError::Asm { line: w[1].first + 1, msg: "phases overlap".into() });
            }
        }
        if spans.iter().any(|p| p.first >= p.end || p.end > n) {
            return Err(CompileError::Asm { line: 0, msg: "empty or out-of-range phase".into() });
        }
        Ok(out)
    }

    fn slot(&self, name: &str) -> Result<&super::layout::Slot, String> {
        self.memory.lookup(name).ok_or_else(|| format!("undeclared variable `{name}`"))
    }

    fn bit(&self, a: &Arg) -> Result<Bit, String> {
        match a {
            Arg::Const(0) => Ok(Bit::Const(false)),
            Arg::Const(1) => Ok(Bit::Const(true)),
            Arg::Const(n) => Err(format!("{n} is not a bit")),
            Arg::Var(v) => match self.slot(v)? {
                s if s.shape == Shape::Bool => Ok(Bit::Cell(s.base)),
                _ => Err(format!("`{v}` is not a bool")),
            },
        }
    }

    fn word_arg(&self, a: &Arg) -> Result<Word, String> {
        let w = self.word();
        match a {
            Arg::Const(n) if *n <= crate::frontend::max_word(w) => Ok(Word::Const(*n)),
            Arg::Const(n) => Err(format!("{n} does not fit in {w} bits")),
            Arg::Var(v) => match self.slot(v)? {
                s if s.shape == Shape::Int => Ok(Word::Cells(s.base)),
                _ => Err(format!("`{v}` is not an int")),
            },
        }
    }

    fn table(&self, name: &str, dims: usize) -> Result<Table, String> {
        let s = self.slot(name)?;
        match (s.shape, dims) {
            (Shape::Array(n), 1) => Ok(Table { base: s.base, rows: n, cols: 1 }),
            (Shape::Matrix(r, c), 2) => Ok(Table { base: s.base, rows: r, cols: c }),
            _ => Err(format!("`{name}` does not take {dims} indices")),
        }
    }

    fn row_table(&self, name: &str) -> Result<Table, String> {
        match self.slot(name)?.shape {
            Shape::Matrix(r, c) if c == self.word() => Ok(Table { base: self.slot(name)?.base, rows: r, cols: c }),
            _ => Err(format!("`{name}` is not a matrix with word-sized rows")),
        }
    }

    fn dst_cell(&self, name: &str, shape: Shape) -> Result<u32, String> {
        let s = self.slot(name)?;
        if s.shape != shape {
            return Err(format!("`{name}` is not {}", shape.keyword()));
        }
        Ok(s.base)
    }

    fn resolve_line(&self, instr: &Instr) -> Result<Exec, String> {
        let arity = |args: &[Arg], k: usize| {
            if args.len() == k {
                Ok(())
            } else {
                Err(format!("expected {k} operands, found {}", args.len()))
            }
        };
        Ok(match instr {
            Instr::Set { dst, op, args } => {
                if op.writes_word() {
                    let d = self.dst_cell(dst, Shape::Int)?;
                    let wop = match op {
                        SetOp::CopyW => {
                            arity(args, 1)?;
                            WordOp::Copy(self.word_arg(&args[0])?)
                        }
                        SetOp::AddW => {
                            arity(args, 2)?;
                            WordOp::Add(self.word_arg(&args[0])?, self.word_arg(&args[1])?)
                        }
                        SetOp::IncW => {
                            arity(args, 1)?;
                            WordOp::Inc(self.word_arg(&args[0])?)
                        }
                        SetOp::DecW => {
                            arity(args, 1)?;
                            WordOp::Dec(self.word_arg(&args[0])?)
                        }
                        _ => {
                            arity(args, 2)?;
                            let Arg::Var(t) = &args[0] else { return Err("expected an array name".into()) };
                            WordOp::LoadRow { table: self.row_table(t)?, row: self.word_arg(&args[1])? }
                        }
                    };
                    Exec::SetWord { dst: d, op: wop }
                } else {
                    let d = self.dst_cell(dst, Shape::Bool)?;
                    let two = |f: fn(Bit, Bit) -> BitOp| -> Result<BitOp, String> {
                        arity(args, 2)?;
                        Ok(f(self.bit(&args[0])?, self.bit(&args[1])?))
                    };
                    let bop = match op {
                        SetOp::Copy => {
                            arity(args, 1)?;
                            BitOp::Copy(self.bit(&args[0])?)
                        }
                        SetOp::Not => {
                            arity(args, 1)?;
                            BitOp::Not(self.bit(&args[0])?)
                        }
                        SetOp::And => two(BitOp::And)?,
                        SetOp::Or => two(BitOp::Or)?,
                        SetOp::Xor => two(BitOp::Xor)?,
                        SetOp::Eq => two(BitOp::Eq)?,
                        SetOp::EqW | SetOp::LtW => {
                            arity(args, 2)?;
                            let (a, b) = (self.word_arg(&args[0])?, self.word_arg(&args[1])?);
                            if *op == SetOp::EqW {
                                BitOp::EqW(a, b)
                            } else {
                                BitOp::LtW(a, b)
                            }
                        }
                        _ => {
                            if args.len() < 2 || args.len() > 3 {
                                return Err("array_ref takes an array and one or two indices".into());
                            }
                            let Arg::Var(t) = &args[0] else { return Err("expected an array name".into()) };
                            let table = self.table(t, args.len() - 1)?;
                            let row = self.word_arg(&args[1])?;
                            let col = args.get(2).map(|a| self.word_arg(a)).transpose()?;
                            BitOp::Load { table, row, col }
                        }
                    };
                    Exec::SetBit { dst: d, op: bop }
                }
            }
            Instr::ArrayInit { array, value } => Exec::Fill { table: self.table(array, 1)?, value: *value },
            Instr::MatrixInit { matrix, value } => Exec::Fill { table: self.table(matrix, 2)?, value: *value },
            Instr::ArraySet { array, index, src } => {
                if index.is_empty() || index.len() > 2 {
                    return Err("array_set takes one or two indices".into());
                }
                let table = self.table(array, index.len())?;
                Exec::Store {
                    table,
                    row: self.word_arg(&index[0])?,
                    col: index.get(1).map(|a| self.word_arg(a)).transpose()?,
                    src: self.bit(src)?,
                }
            }
            Instr::RowSet { matrix, index, src } => {
                Exec::StoreRow { table: self.row_table(matrix)?, row: self.word_arg(index)?, src: self.word_arg(src)? }
            }
            Instr::Unless { guard, target } => {
                Exec::Branch { guard: self.dst_cell(guard, Shape::Bool)?, jump_on: false, target: *target }
            }
            Instr::If { guard, target } => {
                Exec::Branch { guard: self.dst_cell(guard, Shape::Bool)?, jump_on: true, target: *target }
            }
            Instr::Goto { target } => Exec::Goto(*target),
            Instr::Return { var, value } => Exec::Return { cell: self.dst_cell(var, Shape::Bool)?, value: *value },
        })
    }
}
