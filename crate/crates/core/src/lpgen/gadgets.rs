//! One circuit per assembly instruction.
//!
//! Word operations are bit-blasted: equality is an and of bitwise xnors,
//! `<` a majority chain from the low bit up, addition a ripple-carry adder.
//! Array accesses decode the index into one selector per element; a
//! required clause makes an out-of-range index infeasible.

use super::circuit::{Circuit, CircuitBuilder, Lit};
use crate::compiler::{Bit, BitOp, Exec, Table, Word, WordOp};
use crate::frontend::max_word;
use crate::prelude::*;

const XNOR: u8 = 0b1001;
const XOR: u8 = 0b0110;
const XOR3: u8 = 0x96;
const MAJ: u8 = 0xE8;

/// Builds the circuit computing `exec` on words of `word` bits.
pub fn gadget(exec: &Exec, word: u32) -> Circuit {
    let mut g = Gadget { b: CircuitBuilder::new(), word };
    g.build(exec);
    g.b.finish()
}

struct Gadget {
    b: CircuitBuilder,
    word: u32,
}

impl Gadget {
    fn bit(&mut self, b: Bit) -> Lit {
        match b {
            Bit::Cell(c) => self.b.read(c),
            Bit::Const(v) => Lit::Const(v),
        }
    }

    fn word(&mut self, w: Word) -> Vec<Lit> {
        match w {
            Word::Cells(base) => (0..self.word).map(|j| self.b.read(base + j)).collect(),
            Word::Const(v) => (0..self.word).map(|j| Lit::Const(v >> j & 1 == 1)).collect(),
        }
    }

    /// One selector per element `0..count`; requires that one of them holds.
    fn selectors(&mut self, idx: Word, count: u32) -> Vec<Lit> {
        let sels: Vec<Lit> = match idx {
            Word::Const(v) => (0..count).map(|m| Lit::Const(u64::from(m) == v)).collect(),
            Word::Cells(_) => {
                let bits = self.word(idx);
                (0..count)
                    .map(|m| {
                        if u64::from(m) > max_word(self.word) {
                            return Lit::Const(false);
                        }
                        let lits: Vec<Lit> =
                            bits.iter().enumerate().map(|(j, &l)| if m >> j & 1 == 1 { l } else { l.not() }).collect();
                        self.b.and(&lits, None)
                    })
                    .collect()
            }
        };
        self.b.require(sels.clone());
        sels
    }

    fn col_selectors(&mut self, table: &Table, col: Option<Word>) -> Vec<Lit> {
        match col {
            Some(c) => self.selectors(c, table.cols),
            None => vec![Lit::Const(true)],
        }
    }

    fn add(&mut self, a: Word, b: Word, dst: u32) {
        let (x, y) = (self.word(a), self.word(b));
        let mut carry = Lit::Const(false);
        for j in 0..self.word as usize {
            self.b.table(XOR3, &[x[j], y[j], carry], Some(dst + j as u32));
            if j + 1 < self.word as usize {
                carry = self.b.table(MAJ, &[x[j], y[j], carry], None);
            }
        }
    }

    fn build(&mut self, exec: &Exec) {
        let word = self.word;
        match *exec {
            Exec::SetBit { dst, op } => match op {
                BitOp::Copy(a) => {
                    let l = self.bit(a);
                    self.b.assign(dst, l);
                }
                BitOp::Not(a) => {
                    let l = self.bit(a);
                    self.b.assign(dst, l.not());
                }
                BitOp::And(a, c) => {
                    let l = [self.bit(a), self.bit(c)];
                    self.b.and(&l, Some(dst));
                }
                BitOp::Or(a, c) => {
                    let l = [self.bit(a), self.bit(c)];
                    self.b.or(&l, Some(dst));
                }
                BitOp::Xor(a, c) => {
                    let l = [self.bit(a), self.bit(c)];
                    self.b.table(XOR, &l, Some(dst));
                }
                BitOp::Eq(a, c) => {
                    let l = [self.bit(a), self.bit(c)];
                    self.b.table(XNOR, &l, Some(dst));
                }
                BitOp::EqW(a, c) => {
                    let (x, y) = (self.word(a), self.word(c));
                    let eqs: Vec<Lit> = x.iter().zip(&y).map(|(&p, &q)| self.b.table(XNOR, &[p, q], None)).collect();
                    self.b.and(&eqs, Some(dst));
                }
                BitOp::LtW(a, c) => {
                    // lt_j: the low j+1 bits of a are below those of c
                    let (x, y) = (self.word(a), self.word(c));
                    let mut lt = Lit::Const(false);
                    for j in 0..word as usize {
                        let into = (j + 1 == word as usize).then_some(dst);
                        lt = self.b.table(MAJ, &[x[j].not(), y[j], lt], into);
                    }
                }
                BitOp::Load { table, row, col } => {
                    let rs = self.selectors(row, table.rows);
                    let cs = self.col_selectors(&table, col);
                    self.load(&table, &rs, &cs, dst);
                }
            },
            Exec::SetWord { dst, op } => match op {
                WordOp::Copy(a) => {
                    let x = self.word(a);
                    for (j, l) in x.into_iter().enumerate() {
                        self.b.assign(dst + j as u32, l);
                    }
                }
                WordOp::Add(a, c) => self.add(a, c, dst),
                WordOp::Inc(a) => self.add(a, Word::Const(1), dst),
                WordOp::Dec(a) => self.add(a, Word::Const(max_word(word)), dst),
                WordOp::LoadRow { table, row } => {
                    let rs = self.selectors(row, table.rows);
                    for j in 0..word {
                        let vals: Vec<Lit> = (0..table.rows).map(|m| self.b.read(table.cell(m, j))).collect();
                        self.b.select(&rs, &vals, Some(dst + j));
                    }
                }
            },
            Exec::Fill { table, value } => {
                for c in table.cells() {
                    self.b.assign(c, Lit::Const(value));
                }
            }
            Exec::Store { table, row, col, src } => {
                let s = self.bit(src);
                let rs = self.selectors(row, table.rows);
                let cs = self.col_selectors(&table, col);
                for m in 0..table.rows {
                    for k in 0..table.cols {
                        let cell = table.cell(m, k);
                        let old = self.b.read(cell);
                        self.b.mux(&[rs[m as usize], cs[k as usize]], s, old, Some(cell));
                    }
                }
            }
            Exec::StoreRow { table, row, src } => {
                let s = self.word(src);
                let rs = self.selectors(row, table.rows);
                for m in 0..table.rows {
                    for j in 0..word {
                        let cell = table.cell(m, j);
                        let old = self.b.read(cell);
                        self.b.mux(&[rs[m as usize]], s[j as usize], old, Some(cell));
                    }
                }
            }
            Exec::Return { cell, value } => self.b.assign(cell, Lit::Const(value)),
            Exec::Branch { .. } | Exec::Goto(_) => {}
        }
    }

    fn load(&mut self, table: &Table, rs: &[Lit], cs: &[Lit], dst: u32) {
        if table.cols == 1 {
            let vals: Vec<Lit> = (0..table.rows).map(|m| self.b.read(table.cell(m, 0))).collect();
            self.b.select(rs, &vals, Some(dst));
            return;
        }
        // Pick the column within every row, then the row.
        let mut per_row = Vec::with_capacity(table.rows as usize);
        for m in 0..table.rows {
            let vals: Vec<Lit> = (0..table.cols).map(|k| self.b.read(table.cell(m, k))).collect();
            per_row.push(self.b.select(cs, &vals, None));
        }
        self.b.select(rs, &per_row, Some(dst));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lpgen::circuit::Local;

    fn reads_for(c: &Circuit, mem: &[bool]) -> Vec<bool> {
        c.reads.iter().map(|&r| mem[r as usize]).collect()
    }

    fn write_of(c: &Circuit, cell: u32, ev: &crate::lpgen::circuit::Evaluation) -> bool {
        let k = c.writes.iter().position(|&w| w == cell).unwrap();
        ev.writes[k]
    }

    #[test]
    fn adder_and_compare_match_integers() {
        let w = 3;
        let add = gadget(&Exec::SetWord { dst: 6, op: WordOp::Add(Word::Cells(0), Word::Cells(3)) }, w);
        let lt = gadget(&Exec::SetBit { dst: 6, op: BitOp::LtW(Word::Cells(0), Word::Cells(3)) }, w);
        let eq = gadget(&Exec::SetBit { dst: 6, op: BitOp::EqW(Word::Cells(0), Word::Cells(3)) }, w);
        for a in 0..8u32 {
            for b in 0..8u32 {
                let mem: Vec<bool> = (0..6).map(|j| if j < 3 { a >> j & 1 == 1 } else { b >> (j - 3) & 1 == 1 }).collect();
                let ev = add.evaluate(&reads_for(&add, &mem));
                let s = (0..3).fold(0, |acc, j| acc | u32::from(write_of(&add, 6 + j, &ev)) << j);
                assert_eq!(s, (a + b) % 8);
                let ev = lt.evaluate(&reads_for(&lt, &mem));
                assert_eq!(write_of(&lt, 6, &ev), a < b);
                let ev = eq.evaluate(&reads_for(&eq, &mem));
                assert_eq!(write_of(&eq, 6, &ev), a == b);
            }
        }
    }

    #[test]
    fn constant_store_touches_one_cell() {
        let t = Table { base: 0, rows: 4, cols: 1 };
        let c = gadget(&Exec::Store { table: t, row: Word::Const(2), col: None, src: Bit::Const(true) }, 2);
        // The other cells are plain copies of themselves.
        assert_eq!(c.aux, 0);
        assert_eq!(c.writes.len(), 4);
        assert!(c.gates.iter().all(|g| g.inputs.len() <= 1));
        assert!(!c.gates.iter().any(|g| matches!(g.out, Local::Read(_))));
    }

    #[test]
    fn out_of_range_index_is_rejected() {
        let t = Table { base: 2, rows: 3, cols: 1 };
        let c = gadget(&Exec::SetBit { dst: 5, op: BitOp::Load { table: t, row: Word::Cells(0), col: None } }, 2);
        let mut mem = vec![false; 6];
        mem[0] = true;
        mem[1] = true; // index 3
        assert!(!c.evaluate(&reads_for(&c, &mem)).ok);
        mem[1] = false; // index 1
        mem[3] = true;
        let ev = c.evaluate(&reads_for(&c, &mem));
        assert!(ev.ok && write_of(&c, 5, &ev));
    }
}
