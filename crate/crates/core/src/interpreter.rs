//! Reference interpreter for assembly programs.
//!
//! Executes one line per step on a bit-addressed memory and records the
//! memory after every step. Words wrap around modulo `2^W`; an array index
//! outside the array is a fault.

use crate::compiler::{AsmProgram, Bit, BitOp, CompileError, Exec, Table, Word, WordOp};
use crate::frontend::max_word;
use crate::prelude::*;

/// The executed lines and memory snapshots of one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    /// `lines[t-1]` is the line executed at step `t`.
    pub lines: Vec<u32>,
    snapshots: Vec<u64>,
    stride: usize,
    cells: u32,
    /// Whether the run ended by executing a `return`.
    pub halted: bool,
    /// Value written by the `return`.
    pub output: Option<bool>,
}

impl Trace {
    /// Number of executed steps, including the final `return`.
    pub fn steps(&self) -> usize {
        self.lines.len()
    }

    pub fn cell_count(&self) -> u32 {
        self.cells
    }

    /// Value of `cell` after step `t` (`t = 0` is the initial memory). After
    /// the last step the memory stays frozen.
    pub fn bit(&self, cell: u32, t: usize) -> bool {
        let t = t.min(self.steps());
        let w = self.snapshots[t * self.stride + (cell / 64) as usize];
        w >> (cell % 64) & 1 == 1
    }

    /// Full memory after step `t`.
    pub fn state(&self, t: usize) -> Vec<bool> {
        (0..self.cells).map(|c| self.bit(c, t)).collect()
    }

    /// Line active at step `t` (1-based). Past a `return` the returning line
    /// stays active.
    pub fn line_at(&self, t: usize) -> Option<u32> {
        if t == 0 {
            return None;
        }
        match self.lines.get(t - 1) {
            Some(&l) => Some(l),
            None if self.halted => self.lines.last().copied(),
            None => None,
        }
    }

    /// Integer value of the `W` cells starting at `base` after step `t`.
    pub fn word(&self, base: u32, word: u32, t: usize) -> u64 {
        (0..word).fold(0, |acc, b| acc | u64::from(self.bit(base + b, t)) << b)
    }

    /// Number of steps spent on lines in `first..end`.
    pub fn steps_in(&self, first: usize, end: usize) -> usize {
        self.lines.iter().filter(|&&l| (first..end).contains(&(l as usize))).count()
    }

    /// Checks that every step changed only cells its line may write.
    pub fn frame_violations(&self, asm: &AsmProgram) -> Result<Vec<(usize, u32)>, CompileError> {
        let exec = asm.resolve()?;
        let word = asm.word();
        let mut bad = Vec::new();
        for t in 1..=self.steps() {
            let writes = exec[self.lines[t - 1] as usize].writes(word);
            for c in 0..self.cells {
                if self.bit(c, t) != self.bit(c, t - 1) && !writes.contains(&c) {
                    bad.push((t, c));
                }
            }
        }
        Ok(bad)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("step {step}, line {line}: {msg}")]
    Fault { step: usize, line: usize, msg: String, trace: Box<Trace> },
    #[error("no return within {budget} steps")]
    BudgetExhausted { budget: usize, trace: Box<Trace> },
    #[error("program has {expected} input bits, got {got}")]
    InputLength { expected: usize, got: usize },
    #[error(transparent)]
    Compile(#[from] CompileError),
}

impl RunError {
    /// The partial trace up to the failure, when there is one.
    pub fn trace(&self) -> Option<&Trace> {
        match self {
            RunError::Fault { trace, .. } | RunError::BudgetExhausted { trace, .. } => Some(trace),
            _ => None,
        }
    }
}

struct Machine {
    mem: Vec<u64>,
    word: u32,
}

impl Machine {
    fn get(&self, c: u32) -> bool {
        self.mem[(c / 64) as usize] >> (c % 64) & 1 == 1
    }

    fn put(&mut self, c: u32, v: bool) {
        let w = &mut self.mem[(c / 64) as usize];
        if v {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    fn bit(&self, b: Bit) -> bool {
        match b {
            Bit::Cell(c) => self.get(c),
            Bit::Const(v) => v,
        }
    }

    fn word(&self, w: Word) -> u64 {
        match w {
            Word::Cells(base) => (0..self.word).fold(0, |acc, b| acc | u64::from(self.get(base + b)) << b),
            Word::Const(v) => v,
        }
    }

    fn put_word(&mut self, base: u32, v: u64) {
        for b in 0..self.word {
            self.put(base + b, v >> b & 1 == 1);
        }
    }

    fn index(&self, table: &Table, row: Word, col: Option<Word>) -> Result<u32, String> {
        let r = self.word(row);
        if r >= u64::from(table.rows) {
            return Err(format!("row index {r} out of range 0..{}", table.rows));
        }
        let c = match col {
            Some(c) => self.word(c),
            None => 0,
        };
        if c >= u64::from(table.cols) {
            return Err(format!("column index {c} out of range 0..{}", table.cols));
        }
        Ok(table.cell(r as u32, c as u32))
    }
}

/// Runs `asm` on `input` (one bit per input cell, in layout order) for at
/// most `max_steps` steps.
pub fn run(asm: &AsmProgram, input: &[bool], max_steps: usize) -> Result<Trace, RunError> {
    let exec = asm.resolve()?;
    let inputs = asm.memory.input_cells();
    if inputs.len() != input.len() {
        return Err(RunError::InputLength { expected: inputs.len(), got: input.len() });
    }
    let cells = asm.memory.cell_count();
    let stride = (cells as usize).div_ceil(64).max(1);
    let word = asm.word();
    let mask = max_word(word);
    let mut m = Machine { mem: vec![0; stride], word };
    for (&c, &v) in inputs.iter().zip(input) {
        m.put(c, v);
    }
    let mut trace = Trace { lines: Vec::new(), snapshots: m.mem.clone(), stride, cells, halted: false, output: None };
    let mut pc = 0usize;
    while trace.lines.len() < max_steps {
        let step = trace.lines.len() + 1;
        trace.lines.push(pc as u32);
        let mut next = pc + 1;
        let fault = |msg: String, trace: Trace| RunError::Fault { step, line: pc + 1, msg, trace: Box::new(trace) };
        match exec[pc] {
            Exec::SetBit { dst, op } => {
                let v = match op {
                    BitOp::Copy(a) => m.bit(a),
                    BitOp::Not(a) => !m.bit(a),
                    BitOp::And(a, b) => m.bit(a) & m.bit(b),
                    BitOp::Or(a, b) => m.bit(a) | m.bit(b),
                    BitOp::Xor(a, b) => m.bit(a) ^ m.bit(b),
                    BitOp::Eq(a, b) => m.bit(a) == m.bit(b),
                    BitOp::EqW(a, b) => m.word(a) == m.word(b),
                    BitOp::LtW(a, b) => m.word(a) < m.word(b),
                    BitOp::Load { table, row, col } => match m.index(&table, row, col) {
                        Ok(c) => m.get(c),
                        Err(msg) => return Err(fault(msg, trace)),
                    },
                };
                m.put(dst, v);
            }
            Exec::SetWord { dst, op } => {
                let v = match op {
                    WordOp::Copy(a) => m.word(a),
                    WordOp::Add(a, b) => m.word(a).wrapping_add(m.word(b)) & mask,
                    WordOp::Inc(a) => m.word(a).wrapping_add(1) & mask,
                    WordOp::Dec(a) => m.word(a).wrapping_sub(1) & mask,
                    WordOp::LoadRow { table, row } => match m.index(&table, row, None) {
                        Ok(_) => {
                            let r = m.word(row) as u32;
                            (0..word).fold(0, |acc, b| acc | u64::from(m.get(table.cell(r, b))) << b)
                        }
                        Err(msg) => return Err(fault(msg, trace)),
                    },
                };
                m.put_word(dst, v);
            }
            Exec::Fill { table, value } => {
                for c in table.cells() {
                    m.put(c, value);
                }
            }
            Exec::Store { table, row, col, src } => match m.index(&table, row, col) {
                Ok(c) => {
                    let v = m.bit(src);
                    m.put(c, v);
                }
                Err(msg) => return Err(fault(msg, trace)),
            },
            Exec::StoreRow { table, row, src } => match m.index(&table, row, None) {
                Ok(_) => {
                    let r = m.word(row) as u32;
                    let v = m.word(src);
                    for b in 0..word {
                        m.put(table.cell(r, b), v >> b & 1 == 1);
                    }
                }
                Err(msg) => return Err(fault(msg, trace)),
            },
            Exec::Branch { guard, jump_on, target } => {
                if m.get(guard) == jump_on {
                    next = target;
                }
            }
            Exec::Goto(target) => next = target,
            Exec::Return { cell, value } => {
                m.put(cell, value);
                trace.snapshots.extend_from_slice(&m.mem);
                trace.halted = true;
                trace.output = Some(value);
                return Ok(trace);
            }
        }
        trace.snapshots.extend_from_slice(&m.mem);
        pc = next;
    }
    Err(RunError::BudgetExhausted { budget: max_steps, trace: Box::new(trace) })
}
