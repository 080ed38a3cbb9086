//! Small Boolean circuits that describe what one assembly line computes.
//!
//! A circuit reads cells at time `t - 1`, writes cells at time `t`, and may
//! use auxiliary variables. Every gate is turned into clauses, and every
//! clause into one inequality that also contains `¬S`, the "this line runs"
//! literal, so the whole gadget is switched off when the line is idle.
//!
//! The builder folds constants and duplicate inputs as it goes, so a gate
//! whose value is already known never produces a variable.

use crate::prelude::*;

/// A circuit-local variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Local {
    /// `reads[k]` at time `t - 1`.
    Read(u32),
    /// `writes[k]` at time `t`.
    Write(u32),
    /// Auxiliary variable `k` of the line at time `t`.
    Aux(u32),
}

/// A constant or a possibly negated variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Lit {
    Const(bool),
    Var(Local, bool),
}

impl Lit {
    pub fn pos(v: Local) -> Lit {
        Lit::Var(v, true)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Lit {
        match self {
            Lit::Const(b) => Lit::Const(!b),
            Lit::Var(v, p) => Lit::Var(v, !p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateKind {
    /// Truth table over up to three positive inputs: bit `p` is the output
    /// for the input pattern `p` (input `j` is bit `j` of `p`).
    Table(u8),
    And,
    Or,
    /// `k` selectors followed by `k` values; the output equals the value
    /// whose selector is set. At most one selector may be set.
    Select,
    /// Selectors, then the new value, then the old value. The output is the
    /// new value when every selector is set, the old value otherwise.
    Mux,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    pub out: Local,
    pub kind: GateKind,
    pub inputs: Vec<Lit>,
}

/// A clause over circuit variables: at least one literal holds.
pub type Clause = Vec<(Local, bool)>;

/// The computation of one line.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Circuit {
    /// Cells read, in first-use order.
    pub reads: Vec<u32>,
    /// Cells written, in first-use order. Each is the output of one gate.
    pub writes: Vec<u32>,
    pub aux: u32,
    /// Gates in evaluation order.
    pub gates: Vec<Gate>,
    /// Extra clauses that must hold whenever the line runs, such as "the
    /// array index is in range".
    pub requires: Vec<Vec<Lit>>,
}

/// Values of all circuit variables for one assignment of the reads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation {
    pub writes: Vec<bool>,
    pub aux: Vec<bool>,
    /// Whether every required clause holds.
    pub ok: bool,
}

impl Circuit {
    /// Evaluates the circuit; `reads[k]` is the value of `self.reads[k]`.
    pub fn evaluate(&self, reads: &[bool]) -> Evaluation {
        let mut ev = Evaluation { writes: vec![false; self.writes.len()], aux: vec![false; self.aux as usize], ok: true };
        let get = |ev: &Evaluation, l: Lit| match l {
            Lit::Const(b) => b,
            Lit::Var(v, p) => {
                let x = match v {
                    Local::Read(k) => reads[k as usize],
                    Local::Write(k) => ev.writes[k as usize],
                    Local::Aux(k) => ev.aux[k as usize],
                };
                x == p
            }
        };
        for g in &self.gates {
            let vals: Vec<bool> = g.inputs.iter().map(|&l| get(&ev, l)).collect();
            let v = match g.kind {
                GateKind::Table(tt) => {
                    let p = vals.iter().enumerate().fold(0u32, |acc, (j, &b)| acc | u32::from(b) << j);
                    tt >> p & 1 == 1
                }
                GateKind::And => vals.iter().all(|&b| b),
                GateKind::Or => vals.iter().any(|&b| b),
                GateKind::Select => {
                    let k = vals.len() / 2;
                    (0..k).any(|m| vals[m] && vals[k + m])
                }
                GateKind::Mux => {
                    let k = vals.len() - 2;
                    if vals[..k].iter().all(|&b| b) {
                        vals[k]
                    } else {
                        vals[k + 1]
                    }
                }
            };
            match g.out {
                Local::Write(k) => ev.writes[k as usize] = v,
                Local::Aux(k) => ev.aux[k as usize] = v,
                Local::Read(_) => unreachable!("gates never drive reads"),
            }
        }
        ev.ok = self.requires.iter().all(|c| c.iter().any(|&l| get(&ev, l)));
        ev
    }

    /// All clauses of the circuit: the gate definitions followed by the
    /// required clauses. Tautologies are dropped and literals deduplicated.
    pub fn clauses(&self) -> Vec<Clause> {
        let mut out = Vec::new();
        for g in &self.gates {
            gate_clauses(g, &mut |c| push_clause(&mut out, c));
        }
        for r in &self.requires {
            push_clause(&mut out, r.clone());
        }
        out
    }
}

fn push_clause(out: &mut Vec<Clause>, lits: Vec<Lit>) {
    let mut c: Clause = Vec::with_capacity(lits.len());
    for l in lits {
        match l {
            Lit::Const(true) => return,
            Lit::Const(false) => {}
            Lit::Var(v, p) => {
                if c.contains(&(v, !p)) {
                    return;
                }
                if !c.contains(&(v, p)) {
                    c.push((v, p));
                }
            }
        }
    }
    out.push(c);
}

fn gate_clauses(g: &Gate, emit: &mut dyn FnMut(Vec<Lit>)) {
    let out = Lit::pos(g.out);
    let ins = &g.inputs;
    match g.kind {
        GateKind::Table(tt) => {
            let k = ins.len();
            for p in 0..1u32 << k {
                // "inputs == p implies out == tt[p]"
                let mut c: Vec<Lit> = (0..k).map(|j| if p >> j & 1 == 1 { ins[j].not() } else { ins[j] }).collect();
                c.push(if tt >> p & 1 == 1 { out } else { out.not() });
                emit(c);
            }
        }
        GateKind::And => {
            for &l in ins {
                emit(vec![out.not(), l]);
            }
            let mut c: Vec<Lit> = ins.iter().map(|l| l.not()).collect();
            c.push(out);
            emit(c);
        }
        GateKind::Or => {
            for &l in ins {
                emit(vec![out, l.not()]);
            }
            let mut c = ins.clone();
            c.push(out.not());
            emit(c);
        }
        GateKind::Select => {
            let k = ins.len() / 2;
            for m in 0..k {
                emit(vec![ins[m].not(), ins[k + m].not(), out]);
                emit(vec![ins[m].not(), ins[k + m], out.not()]);
            }
        }
        GateKind::Mux => {
            let k = ins.len() - 2;
            let (new, old) = (ins[k], ins[k + 1]);
            let none: Vec<Lit> = ins[..k].iter().map(|l| l.not()).collect();
            let mut c = none.clone();
            c.extend([new.not(), out]);
            emit(c);
            let mut c = none;
            c.extend([new, out.not()]);
            emit(c);
            for &s in &ins[..k] {
                emit(vec![s, old.not(), out]);
                emit(vec![s, old, out.not()]);
            }
        }
    }
}

/// Incremental construction of a [`Circuit`].
#[derive(Debug, Default)]
pub struct CircuitBuilder {
    c: Circuit,
    read_idx: BTreeMap<u32, u32>,
    write_idx: BTreeMap<u32, u32>,
}

impl CircuitBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Literal for the old value of `cell`.
    pub fn read(&mut self, cell: u32) -> Lit {
        let next = self.c.reads.len() as u32;
        let k = *self.read_idx.entry(cell).or_insert_with(|| {
            self.c.reads.push(cell);
            next
        });
        Lit::pos(Local::Read(k))
    }

    fn write(&mut self, cell: u32) -> Local {
        assert!(!self.write_idx.contains_key(&cell), "cell {cell} written twice by one line");
        self.write_idx.insert(cell, self.c.writes.len() as u32);
        self.c.writes.push(cell);
        Local::Write(self.c.writes.len() as u32 - 1)
    }

    fn fresh(&mut self) -> Local {
        self.c.aux += 1;
        Local::Aux(self.c.aux - 1)
    }

    fn gate(&mut self, kind: GateKind, inputs: Vec<Lit>, into: Option<Local>) -> Lit {
        let out = into.unwrap_or_else(|| self.fresh());
        self.c.gates.push(Gate { out, kind, inputs });
        Lit::pos(out)
    }

    /// Drives `into` (or returns) the literal `l`.
    fn finish_lit(&mut self, l: Lit, into: Option<Local>) -> Lit {
        match (into, l) {
            (None, _) => l,
            (Some(out), Lit::Const(b)) => self.gate(GateKind::Table(u8::from(b)), Vec::new(), Some(out)),
            (Some(out), Lit::Var(v, p)) => self.gate(GateKind::Table(if p { 0b10 } else { 0b01 }), vec![Lit::pos(v)], Some(out)),
        }
    }

    /// Sets `cell` to the value of `l`.
    pub fn assign(&mut self, cell: u32, l: Lit) {
        let out = self.write(cell);
        self.finish_lit(l, Some(out));
    }

    /// Boolean function of up to three inputs given by its truth table.
    pub fn table(&mut self, tt: u8, inputs: &[Lit], into: Option<u32>) -> Lit {
        let into = into.map(|c| self.write(c));
        self.table_local(tt, inputs, into)
    }

    fn table_local(&mut self, tt: u8, inputs: &[Lit], into: Option<Local>) -> Lit {
        assert!(inputs.len() <= 3);
        let mut vars: Vec<Local> = Vec::new();
        for l in inputs {
            if let Lit::Var(v, _) = l {
                if !vars.contains(v) {
                    vars.push(*v);
                }
            }
        }
        let eval = |tt: u8, a: u32, vars: &[Local]| -> bool {
            let p = inputs.iter().enumerate().fold(0u32, |acc, (j, l)| {
                let b = match l {
                    Lit::Const(b) => *b,
                    Lit::Var(v, pol) => {
                        let i = vars.iter().position(|x| x == v).unwrap();
                        (a >> i & 1 == 1) == *pol
                    }
                };
                acc | u32::from(b) << j
            });
            tt >> p & 1 == 1
        };
        let mut t2: u8 = 0;
        for a in 0..1u32 << vars.len() {
            t2 |= u8::from(eval(tt, a, &vars)) << a;
        }
        // Drop inputs the function does not depend on.
        let mut i = 0;
        while i < vars.len() {
            let m = vars.len();
            let dep = (0..1u32 << m).any(|a| (t2 >> a & 1) != (t2 >> (a ^ 1 << i) & 1));
            if dep {
                i += 1;
                continue;
            }
            let mut t3 = 0u8;
            for a in 0..1u32 << (m - 1) {
                let lo = a & ((1 << i) - 1);
                let full = lo | (a >> i) << (i + 1);
                t3 |= (t2 >> full & 1) << a;
            }
            t2 = t3;
            vars.remove(i);
        }
        let m = vars.len();
        let rows = 1u32 << m;
        let ones: Vec<u32> = (0..rows).filter(|a| t2 >> a & 1 == 1).collect();
        let lit_of = |a: u32, i: usize| Lit::Var(vars[i], a >> i & 1 == 1);
        if m == 0 {
            return self.finish_lit(Lit::Const(t2 & 1 == 1), into);
        }
        if m == 1 {
            return self.finish_lit(Lit::Var(vars[0], t2 == 0b10), into);
        }
        if ones.len() == 1 {
            let lits: Vec<Lit> = (0..m).map(|i| lit_of(ones[0], i)).collect();
            return self.gate(GateKind::And, lits, into);
        }
        if ones.len() as u32 == rows - 1 {
            let zero = (0..rows).find(|a| t2 >> a & 1 == 0).unwrap();
            let lits: Vec<Lit> = (0..m).map(|i| lit_of(zero, i).not()).collect();
            return self.gate(GateKind::Or, lits, into);
        }
        let ins = vars.into_iter().map(Lit::pos).collect();
        self.gate(GateKind::Table(t2), ins, into)
    }

    /// Conjunction; `into` names the written cell, if any.
    pub fn and(&mut self, inputs: &[Lit], into: Option<u32>) -> Lit {
        let into = into.map(|c| self.write(c));
        self.junction(inputs, true, into)
    }

    pub fn or(&mut self, inputs: &[Lit], into: Option<u32>) -> Lit {
        let into = into.map(|c| self.write(c));
        self.junction(inputs, false, into)
    }

    fn junction(&mut self, inputs: &[Lit], and: bool, into: Option<Local>) -> Lit {
        let mut lits: Vec<Lit> = Vec::new();
        for &l in inputs {
            match l {
                Lit::Const(b) if b == and => {}
                Lit::Const(_) => return self.finish_lit(Lit::Const(!and), into),
                _ if lits.contains(&l.not()) => return self.finish_lit(Lit::Const(!and), into),
                _ if !lits.contains(&l) => lits.push(l),
                _ => {}
            }
        }
        match lits.len() {
            0 => self.finish_lit(Lit::Const(and), into),
            1 => self.finish_lit(lits[0], into),
            _ => self.gate(if and { GateKind::And } else { GateKind::Or }, lits, into),
        }
    }

    /// Value selected by one-hot `sels`.
    pub fn select(&mut self, sels: &[Lit], vals: &[Lit], into: Option<u32>) -> Lit {
        let into = into.map(|c| self.write(c));
        let mut s2 = Vec::new();
        let mut v2 = Vec::new();
        for (&s, &v) in sels.iter().zip(vals) {
            match s {
                Lit::Const(false) => {}
                Lit::Const(true) => return self.finish_lit(v, into),
                _ => {
                    s2.push(s);
                    v2.push(v);
                }
            }
        }
        if v2.is_empty() {
            return self.finish_lit(Lit::Const(false), into);
        }
        if v2.iter().all(|&v| v == v2[0]) {
            return self.finish_lit(v2[0], into);
        }
        s2.extend(v2);
        self.gate(GateKind::Select, s2, into)
    }

    /// `new` when all `sels` hold, else `old`.
    pub fn mux(&mut self, sels: &[Lit], new: Lit, old: Lit, into: Option<u32>) -> Lit {
        let into = into.map(|c| self.write(c));
        let mut s2 = Vec::new();
        for &s in sels {
            match s {
                Lit::Const(true) => {}
                Lit::Const(false) => return self.finish_lit(old, into),
                _ if !s2.contains(&s) => s2.push(s),
                _ => {}
            }
        }
        if s2.is_empty() {
            return self.finish_lit(new, into);
        }
        if new == old {
            return self.finish_lit(old, into);
        }
        s2.extend([new, old]);
        self.gate(GateKind::Mux, s2, into)
    }

    /// Adds a clause that must hold whenever the line runs.
    pub fn require(&mut self, clause: Vec<Lit>) {
        self.c.requires.push(clause);
    }

    pub fn finish(self) -> Circuit {
        self.c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_reads(c: &Circuit) -> impl Iterator<Item = Vec<bool>> + '_ {
        (0..1u32 << c.reads.len()).map(move |a| (0..c.reads.len()).map(|j| a >> j & 1 == 1).collect())
    }

    /// Every clause holds at the evaluated point.
    fn consistent(c: &Circuit) {
        let clauses = c.clauses();
        for r in all_reads(c) {
            let ev = c.evaluate(&r);
            if !ev.ok {
                continue;
            }
            for cl in &clauses {
                let sat = cl.iter().any(|&(v, p)| {
                    let x = match v {
                        Local::Read(k) => r[k as usize],
                        Local::Write(k) => ev.writes[k as usize],
                        Local::Aux(k) => ev.aux[k as usize],
                    };
                    x == p
                });
                assert!(sat, "clause {cl:?} fails at {r:?}");
            }
        }
    }

    #[test]
    fn xor_is_four_clauses() {
        let mut b = CircuitBuilder::new();
        let (x, y) = (b.read(1), b.read(2));
        b.table(0b0110, &[x, y], Some(0));
        let c = b.finish();
        assert_eq!(c.clauses().len(), 4);
        assert_eq!(c.aux, 0);
        consistent(&c);
    }

    #[test]
    fn folding() {
        let mut b = CircuitBuilder::new();
        let x = b.read(1);
        assert_eq!(b.and(&[x, Lit::Const(true)], None), x);
        assert_eq!(b.and(&[x, x.not()], None), Lit::Const(false));
        assert_eq!(b.table(0b0110, &[x, x], None), Lit::Const(false));
        assert_eq!(b.table(0b0110, &[x, Lit::Const(true)], None), x.not());
        // majority with a false input is an and
        let y = b.read(2);
        let m = b.table(0xE8, &[x, y, Lit::Const(false)], None);
        assert_eq!(b.c.gates.last().unwrap().kind, GateKind::And);
        assert!(matches!(m, Lit::Var(Local::Aux(0), true)));
        assert_eq!(b.mux(&[Lit::Const(false)], x, y, None), y);
        assert_eq!(b.select(&[Lit::Const(false), Lit::Const(true)], &[x, y], None), y);
    }

    #[test]
    fn gates_match_evaluation() {
        let mut b = CircuitBuilder::new();
        let r: Vec<Lit> = (0..5).map(|c| b.read(c)).collect();
        let a = b.and(&[r[0], r[1].not()], None);
        let o = b.or(&[a, r[2]], Some(10));
        b.table(0x96, &[r[0], r[3], o], Some(11));
        b.select(&[r[0], r[0].not()], &[r[3], r[4]], Some(12));
        b.mux(&[r[1], r[2]], r[3], r[4], Some(13));
        b.require(vec![r[0], r[4]]);
        let c = b.finish();
        consistent(&c);
        let ev = c.evaluate(&[true, false, false, true, false]);
        assert_eq!(ev.writes, vec![true, true, true, false]);
        assert!(ev.ok);
        assert!(!c.evaluate(&[false; 5]).ok);
    }
}
