//! The time-indexed LP of a program and its row generator.
//!
//! Rows are produced on demand, one time step at a time, so a model with
//! millions of rows can be written or checked without ever being stored.
//! All coefficients are `±1` and all right-hand sides small integers.

use core::fmt;

use super::circuit::{Circuit, Clause, Local};
use super::gadgets::gadget;
use super::layout::{Var, VarId, VarLayout};
use super::LpError;
use crate::compiler::{count_steps, AsmProgram, Exec};
use crate::frontend::ParamEnv;
use crate::interpreter::Trace;
use crate::prelude::*;
use crate::{Error, Rational};

/// Options for [`build_model`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LpOptions {
    /// Restrict every line to the time window computed by the step
    /// analysis. Without it every line gets variables at every step.
    pub prune: bool,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions { prune: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
}

/// What a row expresses; also its name in LP files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    /// Non-input cells start at 0.
    Init { cell: u32 },
    /// Input fixing `B(c, 0) = value`.
    Fix { cell: u32 },
    /// Exactly one line runs at step `t`.
    OneLine { t: u32 },
    /// The first line runs at step 1.
    Start,
    /// Control transfer from the line that ran at step `t - 1`.
    Next { line: u32, t: u32, k: u32 },
    /// Clause `k` of a gadget.
    Gadget { line: u32, t: u32, k: u32 },
    /// Aux variables vanish when their line is idle.
    AuxOff { line: u32, t: u32, k: u32 },
    /// A cell no active line can write keeps its value.
    Keep { cell: u32, t: u32 },
    /// A cell may only rise when one of its writers runs.
    Up { cell: u32, t: u32 },
    /// A cell may only fall when one of its writers runs.
    Down { cell: u32, t: u32 },
}

impl fmt::Display for RowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            RowKind::Init { cell } => write!(f, "init_{cell}"),
            RowKind::Fix { cell } => write!(f, "fix_{cell}"),
            RowKind::OneLine { t } => write!(f, "one_{t}"),
            RowKind::Start => write!(f, "start"),
            RowKind::Next { line, t, k } => write!(f, "next_{}_{t}_{k}", line + 1),
            RowKind::Gadget { line, t, k } => write!(f, "g_{}_{t}_{k}", line + 1),
            RowKind::AuxOff { line, t, k } => write!(f, "off_{}_{t}_{k}", line + 1),
            RowKind::Keep { cell, t } => write!(f, "keep_{cell}_{t}"),
            RowKind::Up { cell, t } => write!(f, "up_{cell}_{t}"),
            RowKind::Down { cell, t } => write!(f, "down_{cell}_{t}"),
        }
    }
}

/// One constraint `sum(terms) (<= | =) rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Row<'a> {
    pub kind: RowKind,
    pub terms: &'a [(VarId, i32)],
    pub sense: Sense,
    pub rhs: i32,
}

/// Size of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ModelStats {
    pub vars: u64,
    pub rows: u64,
    pub nonzeros: u64,
}

/// The LP of one program at one horizon. All variables have bounds `[0, 1]`.
#[derive(Debug, Clone)]
pub struct LpModel {
    pub asm: AsmProgram,
    pub exec: Vec<Exec>,
    pub horizon: u32,
    /// Time window of each line.
    pub windows: Vec<(u32, u32)>,
    pub layout: VarLayout,
    pub circuits: Vec<Circuit>,
    clauses: Vec<Vec<Clause>>,
    /// Input cells in layout order.
    pub inputs: Vec<u32>,
    /// The cell written by `return`.
    pub output: u32,
    /// Input values fixed by equality rows, if any.
    pub fixed: Option<Vec<bool>>,
    /// Maximized objective.
    pub objective: Vec<(VarId, Rational)>,
}

/// Builds the LP of `asm` with horizon `maxsteps` from `params`.
pub fn build_model(asm: &AsmProgram, params: &ParamEnv, opts: &LpOptions) -> Result<LpModel, Error> {
    let exec = asm.resolve()?;
    let horizon = params.maxsteps();
    let windows = if opts.prune { count_steps(asm, params)?.windows } else { vec![(1, horizon); exec.len()] };
    let word = asm.word();
    let circuits: Vec<Circuit> = exec.iter().map(|e| gadget(e, word)).collect();
    let clauses = circuits.iter().map(Circuit::clauses).collect();
    let aux: Vec<u32> = circuits.iter().map(|c| c.aux).collect();
    let writes: Vec<Vec<u32>> = circuits.iter().map(|c| c.writes.clone()).collect();
    let layout = VarLayout::new(horizon, asm.memory.cell_count(), &windows, &aux, &writes);
    if layout.var_count() > u64::from(u32::MAX) {
        return Err(LpError::TooManyVariables(layout.var_count()).into());
    }
    let output = exec
        .iter()
        .find_map(|e| match e {
            Exec::Return { cell, .. } => Some(*cell),
            _ => None,
        })
        .ok_or(crate::compiler::CompileError::FallsOffEnd)?;
    Ok(LpModel {
        asm: asm.clone(),
        exec,
        horizon,
        windows,
        layout,
        circuits,
        clauses,
        inputs: asm.memory.input_cells(),
        output,
        fixed: None,
        objective: Vec::new(),
    })
}

/// A 0/1 point given as a bit set over variable ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitPoint {
    words: Vec<u64>,
    len: u64,
}

impl BitPoint {
    pub fn zeros(len: u64) -> Self {
        BitPoint { words: vec![0; len.div_ceil(64) as usize], len }
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, id: VarId) -> bool {
        self.words[(id / 64) as usize] >> (id % 64) & 1 == 1
    }

    pub fn set(&mut self, id: VarId, v: bool) {
        let w = &mut self.words[(id / 64) as usize];
        if v {
            *w |= 1 << (id % 64);
        } else {
            *w &= !(1 << (id % 64));
        }
    }

    /// Ids where `self` and `other` differ (both must have the same length).
    pub fn differing<'a>(&'a self, other: &'a BitPoint) -> impl Iterator<Item = VarId> + 'a {
        self.words.iter().zip(&other.words).enumerate().flat_map(|(k, (&a, &b))| {
            let x = a ^ b;
            (0..64).filter(move |j| x >> j & 1 == 1).map(move |j| (k * 64 + j) as VarId)
        })
    }

    /// Number of variables at 1.
    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    /// Ids of the variables at 1.
    pub fn ones(&self) -> impl Iterator<Item = VarId> + '_ {
        self.words
            .iter()
            .enumerate()
            .flat_map(|(k, &w)| (0..64).filter(move |b| w >> b & 1 == 1).map(move |b| (k * 64 + b) as VarId))
    }
}

struct RowBuf {
    terms: Vec<(VarId, i32)>,
}

impl RowBuf {
    fn clear(&mut self) {
        self.terms.clear();
    }

    fn add(&mut self, id: VarId, c: i32) {
        self.terms.push((id, c));
    }
}

impl LpModel {
    pub fn var_count(&self) -> u64 {
        self.layout.var_count()
    }

    pub fn id(&self, v: Var) -> Option<VarId> {
        self.layout.id(v)
    }

    /// Id of the output bit at the horizon.
    pub fn output_var(&self) -> VarId {
        self.layout.id(Var::B { cell: self.output, t: self.horizon }).expect("output cell exists")
    }

    /// Number of aux variables of `line`.
    pub fn aux_count(&self, line: u32) -> u32 {
        self.circuits[line as usize].aux
    }

    fn var(&self, v: Var) -> VarId {
        self.layout.id(v).expect("variable inside the model")
    }

    /// Emits the rows of step `t` (`t = 0`: initial memory and fixings).
    pub fn rows_at(&self, t: u32, emit: &mut dyn FnMut(&Row<'_>)) {
        let mut buf = RowBuf { terms: Vec::with_capacity(64) };
        if t == 0 {
            let mut inputs = self.inputs.iter().peekable();
            let mut fixed = self.fixed.as_ref().map(|f| self.inputs.iter().zip(f.iter()));
            for cell in 0..self.layout.cells {
                if inputs.peek() == Some(&&cell) {
                    inputs.next();
                    if let Some((_, &v)) = fixed.as_mut().and_then(|f| f.next()) {
                        let terms = [(cell, 1)];
                        emit(&Row { kind: RowKind::Fix { cell }, terms: &terms, sense: Sense::Eq, rhs: i32::from(v) });
                    }
                    continue;
                }
                let terms = [(cell, 1)];
                emit(&Row { kind: RowKind::Init { cell }, terms: &terms, sense: Sense::Eq, rhs: 0 });
            }
            return;
        }
        let e = self.layout.epoch(t);
        buf.clear();
        for &i in &e.active {
            buf.add(self.var(Var::S { line: i, t }), 1);
        }
        emit(&Row { kind: RowKind::OneLine { t }, terms: &buf.terms, sense: Sense::Eq, rhs: 1 });
        if t == 1 {
            let s = self.layout.id(Var::S { line: 0, t: 1 }).expect("first line runs at step 1");
            emit(&Row { kind: RowKind::Start, terms: &[(s, 1)], sense: Sense::Eq, rhs: 1 });
        } else {
            self.next_rows(t, &mut buf, emit);
        }
        for &i in &e.active {
            self.gadget_rows(i, t, &mut buf, emit);
        }
        for cell in 0..self.layout.cells {
            let now = self.var(Var::B { cell, t });
            let before = self.var(Var::B { cell, t: t - 1 });
            let writers = &e.writers[cell as usize];
            if writers.is_empty() {
                let terms = [(now, 1), (before, -1)];
                emit(&Row { kind: RowKind::Keep { cell, t }, terms: &terms, sense: Sense::Eq, rhs: 0 });
                continue;
            }
            for (up, sign) in [(true, 1), (false, -1)] {
                buf.clear();
                buf.add(now, sign);
                buf.add(before, -sign);
                for &w in writers {
                    buf.add(self.var(Var::S { line: w, t }), -1);
                }
                let kind = if up { RowKind::Up { cell, t } } else { RowKind::Down { cell, t } };
                emit(&Row { kind, terms: &buf.terms, sense: Sense::Le, rhs: 0 });
            }
        }
    }

    /// Clause rows `¬S(i, t-1) ∨ ...` for every line active at `t - 1`.
    fn next_rows(&self, t: u32, buf: &mut RowBuf, emit: &mut dyn FnMut(&Row<'_>)) {
        let prev = self.layout.epoch(t - 1);
        for &i in &prev.active {
            let s = self.var(Var::S { line: i, t: t - 1 });
            let at = |l: usize| self.layout.id(Var::S { line: l as u32, t });
            // Each entry: (guard literal, successor). The guard literal is
            // `Some((cell, polarity))` for a conditional edge.
            let mut edges: [(Option<(u32, bool)>, usize); 2] = [(None, usize::MAX); 2];
            let n = match self.exec[i as usize] {
                Exec::Goto(l) => {
                    edges[0] = (None, l);
                    1
                }
                Exec::Return { .. } => {
                    edges[0] = (None, i as usize);
                    1
                }
                Exec::Branch { guard, jump_on, target } => {
                    // jump taken: guard == jump_on
                    edges[0] = (Some((guard, jump_on)), target);
                    edges[1] = (Some((guard, !jump_on)), i as usize + 1);
                    2
                }
                _ => {
                    edges[0] = (None, i as usize + 1);
                    1
                }
            };
            for (k, &(cond, succ)) in edges[..n].iter().enumerate() {
                buf.clear();
                buf.add(s, 1);
                let mut rhs = 0;
                if let Some((cell, pol)) = cond {
                    let g = self.var(Var::B { cell, t: t - 1 });
                    if pol {
                        buf.add(g, 1);
                        rhs += 1;
                    } else {
                        buf.add(g, -1);
                    }
                }
                if let Some(id) = at(succ) {
                    buf.add(id, -1);
                }
                let kind = RowKind::Next { line: i, t, k: k as u32 };
                emit(&Row { kind, terms: &buf.terms, sense: Sense::Le, rhs });
            }
        }
    }

    fn gadget_rows(&self, i: u32, t: u32, buf: &mut RowBuf, emit: &mut dyn FnMut(&Row<'_>)) {
        let c = &self.circuits[i as usize];
        let s = self.var(Var::S { line: i, t });
        for (k, clause) in self.clauses[i as usize].iter().enumerate() {
            buf.clear();
            buf.add(s, 1);
            let mut rhs = 0;
            for &(local, pol) in clause {
                let id = self.local_var(c, i, t, local);
                if pol {
                    buf.add(id, -1);
                } else {
                    buf.add(id, 1);
                    rhs += 1;
                }
            }
            emit(&Row { kind: RowKind::Gadget { line: i, t, k: k as u32 }, terms: &buf.terms, sense: Sense::Le, rhs });
        }
        for k in 0..c.aux {
            let terms = [(self.var(Var::A { line: i, t, k }), 1), (s, -1)];
            emit(&Row { kind: RowKind::AuxOff { line: i, t, k }, terms: &terms, sense: Sense::Le, rhs: 0 });
        }
    }

    fn local_var(&self, c: &Circuit, i: u32, t: u32, local: Local) -> VarId {
        self.var(match local {
            Local::Read(k) => Var::B { cell: c.reads[k as usize], t: t - 1 },
            Local::Write(k) => Var::B { cell: c.writes[k as usize], t },
            Local::Aux(k) => Var::A { line: i, t, k },
        })
    }

    /// Emits every row, step by step.
    pub fn for_each_row(&self, emit: &mut dyn FnMut(&Row<'_>)) {
        for t in 0..=self.horizon {
            self.rows_at(t, emit);
        }
    }

    /// Counts rows and nonzeros by generating them.
    pub fn stats(&self) -> ModelStats {
        let mut s = ModelStats { vars: self.var_count(), ..ModelStats::default() };
        self.for_each_row(&mut |r| {
            s.rows += 1;
            s.nonzeros += r.terms.len() as u64;
        });
        s
    }

    /// Embeds an interpreter trace as a 0/1 point of the model.
    ///
    /// Past the final `return` the returning line stays active and memory
    /// stays frozen.
    pub fn trace_point(&self, trace: &Trace) -> Result<BitPoint, LpError> {
        if trace.cell_count() != self.layout.cells {
            return Err(LpError::TraceShape { expected: self.layout.cells, got: trace.cell_count() });
        }
        if !trace.halted && trace.steps() < self.horizon as usize {
            return Err(LpError::TraceTooShort { steps: trace.steps(), horizon: self.horizon });
        }
        let mut p = BitPoint::zeros(self.var_count());
        for cell in 0..self.layout.cells {
            p.set(cell, trace.bit(cell, 0));
        }
        for t in 1..=self.horizon {
            let line = trace.line_at(t as usize).expect("trace covers the horizon");
            let s = self.layout.id(Var::S { line, t }).ok_or(LpError::OutsideWindow { line: line as usize + 1, t })?;
            p.set(s, true);
            for cell in 0..self.layout.cells {
                p.set(self.var(Var::B { cell, t }), trace.bit(cell, t as usize));
            }
            let c = &self.circuits[line as usize];
            if c.aux > 0 {
                let reads: Vec<bool> = c.reads.iter().map(|&r| trace.bit(r, t as usize - 1)).collect();
                let ev = c.evaluate(&reads);
                for (k, &v) in ev.aux.iter().enumerate() {
                    p.set(self.var(Var::A { line, t, k: k as u32 }), v);
                }
            }
        }
        Ok(p)
    }
}
