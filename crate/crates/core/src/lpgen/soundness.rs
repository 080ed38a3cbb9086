//! Exhaustive checks that a gadget's inequalities describe its instruction.
//!
//! With the line variable at 1, every assignment of the read cells must
//! extend to exactly one 0/1 point (the instruction's result), or to none
//! when the instruction would fault. With the line variable at 0 every
//! corner must be feasible.
//!
//! Small gadgets are checked by enumerating all corners. Larger ones are
//! checked by unit propagation from the reads: a propagation that assigns
//! every variable without conflict proves the extension exists and is
//! unique. Arrays with many cells are fed structured contents (all zeros,
//! all ones, every one-hot and one-cold pattern) instead of every content.

use super::circuit::{Circuit, Clause, Local};
use super::gadgets::gadget;
use crate::compiler::{Bit, BitOp, Exec, Table, Word, WordOp};
use crate::frontend::max_word;
use crate::prelude::*;

/// Gadgets with at most this many variables are checked corner by corner.
pub const CORNER_BITS: u32 = 14;
/// Up to this many read bits every read assignment is tried.
pub const EXHAUSTIVE_READS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SoundnessError {
    #[error("reads {0}: no feasible extension although the instruction is defined")]
    NoExtension(String),
    #[error("reads {0}: the extension disagrees with the instruction")]
    WrongExtension(String),
    #[error("reads {0}: more than one feasible extension")]
    Ambiguous(String),
    #[error("reads {0}: feasible although the instruction faults")]
    AcceptsFault(String),
    #[error("idle line: corner {0:#x} violates a row")]
    IdleCut(u32),
    #[error("{0} non-array read bits is too many to enumerate")]
    TooManyReads(usize),
}

/// What a successful check covered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GadgetCheck {
    pub reads: u32,
    pub writes: u32,
    pub aux: u32,
    pub clauses: u32,
    /// Read assignments tried.
    pub patterns: u64,
    /// Of those, assignments on which the instruction faults.
    pub faulting: u64,
    /// Whether every corner was enumerated.
    pub corners: bool,
    /// Whether every read assignment was tried.
    pub all_reads: bool,
}

impl GadgetCheck {
    fn tally(&mut self, ok: bool) {
        self.patterns += 1;
        if !ok {
            self.faulting += 1;
        }
    }
}

fn show(reads: &[bool]) -> String {
    reads.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

struct Indexed {
    reads: usize,
    total: usize,
    clauses: Vec<Vec<(usize, bool)>>,
}

impl Indexed {
    fn new(c: &Circuit, clauses: &[Clause]) -> Self {
        let (reads, writes) = (c.reads.len(), c.writes.len());
        let at = |v: Local| match v {
            Local::Read(k) => k as usize,
            Local::Write(k) => reads + k as usize,
            Local::Aux(k) => reads + writes + k as usize,
        };
        Indexed {
            reads,
            total: reads + writes + c.aux as usize,
            clauses: clauses.iter().map(|cl| cl.iter().map(|&(v, p)| (at(v), p)).collect()).collect(),
        }
    }

    fn holds(&self, corner: u32) -> bool {
        self.clauses.iter().all(|cl| cl.iter().any(|&(i, p)| (corner >> i & 1 == 1) == p))
    }

    /// Row `S + sum(neg) - sum(pos) <= |neg|` of every clause at `S = 0`.
    fn idle_holds(&self, corner: u32) -> bool {
        self.clauses.iter().all(|cl| {
            let neg = cl.iter().filter(|(_, p)| !p).count() as i64;
            let lhs: i64 = cl
                .iter()
                .map(|&(i, p)| {
                    let x = i64::from(corner >> i & 1 == 1);
                    if p {
                        -x
                    } else {
                        x
                    }
                })
                .sum();
            lhs <= neg
        })
    }

    /// Unit propagation from the reads. `None` on conflict.
    fn propagate(&self, reads: &[bool]) -> Option<Vec<Option<bool>>> {
        let mut val: Vec<Option<bool>> = vec![None; self.total];
        for (k, &b) in reads.iter().enumerate() {
            val[k] = Some(b);
        }
        loop {
            let mut changed = false;
            for cl in &self.clauses {
                let mut open = None;
                let mut open_count = 0;
                let mut sat = false;
                for &(i, p) in cl {
                    match val[i] {
                        Some(x) if x == p => {
                            sat = true;
                            break;
                        }
                        Some(_) => {}
                        None => {
                            open_count += 1;
                            open = Some((i, p));
                        }
                    }
                }
                if sat {
                    continue;
                }
                match (open_count, open) {
                    (0, _) => return None,
                    (1, Some((i, p))) => {
                        val[i] = Some(p);
                        changed = true;
                    }
                    _ => {}
                }
            }
            if !changed {
                return Some(val);
            }
        }
    }
}

/// Checks the gadget of `exec` on words of `word` bits.
pub fn check_gadget(exec: &Exec, word: u32) -> Result<GadgetCheck, SoundnessError> {
    let c = gadget(exec, word);
    let tables: Vec<Table> = match *exec {
        Exec::SetBit { op: BitOp::Load { table, .. }, .. }
        | Exec::SetWord { op: WordOp::LoadRow { table, .. }, .. }
        | Exec::Store { table, .. }
        | Exec::StoreRow { table, .. } => vec![table],
        _ => Vec::new(),
    };
    check_circuit(&c, |cell| tables.iter().any(|t| t.cells().contains(&cell)))
}

/// Checks any circuit. `is_array` marks read cells that may be fed
/// structured contents when there are too many reads to enumerate.
pub fn check_circuit(c: &Circuit, is_array: impl Fn(u32) -> bool) -> Result<GadgetCheck, SoundnessError> {
    let clauses = c.clauses();
    let ix = Indexed::new(c, &clauses);
    let mut report = GadgetCheck {
        reads: c.reads.len() as u32,
        writes: c.writes.len() as u32,
        aux: c.aux,
        clauses: clauses.len() as u32,
        corners: ix.total as u32 <= CORNER_BITS,
        all_reads: c.reads.len() <= EXHAUSTIVE_READS,
        ..GadgetCheck::default()
    };
    if report.corners {
        for corner in 0..1u32 << ix.total {
            if !ix.idle_holds(corner) {
                return Err(SoundnessError::IdleCut(corner));
            }
        }
    }
    // Idle rows hold on every corner for larger gadgets too: each clause
    // row has at most |neg| on its left-hand side when `S = 0`.

    let n = c.reads.len();
    if n <= EXHAUSTIVE_READS {
        let mut reads = vec![false; n];
        for mask in 0..1u64 << n {
            for (k, r) in reads.iter_mut().enumerate() {
                *r = mask >> k & 1 == 1;
            }
            report.tally(check_one(c, &ix, report.corners, &reads)?);
        }
        return Ok(report);
    }
    let (array, other): (Vec<usize>, Vec<usize>) = (0..n).partition(|&k| is_array(c.reads[k]));
    if other.len() > EXHAUSTIVE_READS {
        return Err(SoundnessError::TooManyReads(other.len()));
    }
    let mut contents: Vec<Vec<bool>> = vec![vec![false; array.len()], vec![true; array.len()]];
    for k in 0..array.len() {
        let mut hot = vec![false; array.len()];
        hot[k] = true;
        contents.push(hot.iter().map(|b| !b).collect());
        contents.push(hot);
    }
    let mut reads = vec![false; n];
    for content in &contents {
        for (&k, &b) in array.iter().zip(content) {
            reads[k] = b;
        }
        for mask in 0..1u64 << other.len() {
            for (j, &k) in other.iter().enumerate() {
                reads[k] = mask >> j & 1 == 1;
            }
            report.tally(check_one(c, &ix, report.corners, &reads)?);
        }
    }
    Ok(report)
}

fn check_one(c: &Circuit, ix: &Indexed, corners: bool, reads: &[bool]) -> Result<bool, SoundnessError> {
    let ev = c.evaluate(reads);
    let expected: Vec<bool> = reads.iter().chain(&ev.writes).chain(&ev.aux).copied().collect();
    if corners {
        let base = reads.iter().enumerate().fold(0u32, |a, (k, &b)| a | u32::from(b) << k);
        let free = ix.total - ix.reads;
        let mut found: Option<u32> = None;
        for rest in 0..1u32 << free {
            let corner = base | rest << ix.reads;
            if ix.holds(corner) {
                if found.is_some() {
                    return Err(SoundnessError::Ambiguous(show(reads)));
                }
                found = Some(corner);
            }
        }
        return match (found, ev.ok) {
            (None, false) => Ok(ev.ok),
            (Some(_), false) => Err(SoundnessError::AcceptsFault(show(reads))),
            (None, true) => Err(SoundnessError::NoExtension(show(reads))),
            (Some(p), true) => {
                if (0..ix.total).all(|i| (p >> i & 1 == 1) == expected[i]) {
                    Ok(ev.ok)
                } else {
                    Err(SoundnessError::WrongExtension(show(reads)))
                }
            }
        };
    }
    match (ix.propagate(reads), ev.ok) {
        (None, false) => Ok(ev.ok),
        (None, true) => Err(SoundnessError::NoExtension(show(reads))),
        (Some(val), ok) => {
            if val.iter().any(Option::is_none) {
                // Propagation alone cannot settle it; the gadgets are
                // built so that this never happens.
                return Err(SoundnessError::Ambiguous(show(reads)));
            }
            if !ok {
                return Err(SoundnessError::AcceptsFault(show(reads)));
            }
            if val.iter().zip(&expected).all(|(v, e)| *v == Some(*e)) {
                Ok(ev.ok)
            } else {
                Err(SoundnessError::WrongExtension(show(reads)))
            }
        }
    }
}

/// A named instruction for the gadget suite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Specimen {
    pub name: String,
    pub exec: Exec,
}

/// Instructions covering every opcode and operand form on words of `word`
/// bits, with arrays of every extent up to `max_extent` (one and two
/// dimensional). Operands include constants and cells shared between
/// sources and destination.
pub fn catalogue(word: u32, max_extent: u32) -> Vec<Specimen> {
    let (a, b, d) = (0u32, 1u32, 2u32);
    let (x, y, z) = (3, 3 + word, 3 + 2 * word);
    let base = 3 + 3 * word;
    let top = max_word(word);
    let mut consts = vec![0, 1, top, top / 2 + 1];
    consts.sort_unstable();
    consts.dedup();
    let mut out = Vec::new();
    let mut push = |name: String, exec: Exec| out.push(Specimen { name, exec });

    let bit_pairs = [
        ("a b", Bit::Cell(a), Bit::Cell(b)),
        ("a a", Bit::Cell(a), Bit::Cell(a)),
        ("a 0", Bit::Cell(a), Bit::Const(false)),
        ("a 1", Bit::Cell(a), Bit::Const(true)),
        ("1 b", Bit::Const(true), Bit::Cell(b)),
    ];
    for dst in [d, a] {
        for (ops, p, q) in bit_pairs {
            for (m, op) in
                [("and", BitOp::And(p, q)), ("or", BitOp::Or(p, q)), ("xor", BitOp::Xor(p, q)), ("eq", BitOp::Eq(p, q))]
            {
                push(format!("{m} {ops} -> {dst}"), Exec::SetBit { dst, op });
            }
        }
        for (ops, p) in [("a", Bit::Cell(a)), ("0", Bit::Const(false)), ("1", Bit::Const(true))] {
            push(format!("copy {ops} -> {dst}"), Exec::SetBit { dst, op: BitOp::Copy(p) });
            push(format!("not {ops} -> {dst}"), Exec::SetBit { dst, op: BitOp::Not(p) });
        }
    }

    let mut word_pairs =
        vec![(String::from("x y"), Word::Cells(x), Word::Cells(y)), (String::from("x x"), Word::Cells(x), Word::Cells(x))];
    for &k in &consts {
        word_pairs.push((format!("x {k}"), Word::Cells(x), Word::Const(k)));
        word_pairs.push((format!("{k} y"), Word::Const(k), Word::Cells(y)));
    }
    for (ops, p, q) in &word_pairs {
        push(format!("eqw {ops}"), Exec::SetBit { dst: d, op: BitOp::EqW(*p, *q) });
        push(format!("ltw {ops}"), Exec::SetBit { dst: d, op: BitOp::LtW(*p, *q) });
        for dst in [z, x] {
            push(format!("add {ops} -> {dst}"), Exec::SetWord { dst, op: WordOp::Add(*p, *q) });
        }
    }
    for dst in [z, x] {
        push(format!("inc x -> {dst}"), Exec::SetWord { dst, op: WordOp::Inc(Word::Cells(x)) });
        push(format!("dec x -> {dst}"), Exec::SetWord { dst, op: WordOp::Dec(Word::Cells(x)) });
        push(format!("copyw x -> {dst}"), Exec::SetWord { dst, op: WordOp::Copy(Word::Cells(x)) });
    }
    for &k in &consts {
        push(format!("copyw {k}"), Exec::SetWord { dst: z, op: WordOp::Copy(Word::Const(k)) });
    }
    push(String::from("return 0"), Exec::Return { cell: d, value: false });
    push(String::from("return 1"), Exec::Return { cell: d, value: true });

    for rows in 1..=max_extent {
        let t = Table { base, rows, cols: 1 };
        let mut idx = vec![(String::from("x"), Word::Cells(x))];
        idx.extend((0..rows.min(3)).map(|k| (format!("{k}"), Word::Const(u64::from(k)))));
        for (i, row) in &idx {
            push(format!("load {rows}[{i}]"), Exec::SetBit { dst: d, op: BitOp::Load { table: t, row: *row, col: None } });
            for (s, src) in [("a", Bit::Cell(a)), ("1", Bit::Const(true))] {
                push(format!("store {rows}[{i}] <- {s}"), Exec::Store { table: t, row: *row, col: None, src });
            }
        }
        push(format!("fill {rows}"), Exec::Fill { table: t, value: true });
        let w = Table { base, rows, cols: word };
        push(
            format!("loadrow {rows}x{word}[x]"),
            Exec::SetWord { dst: z, op: WordOp::LoadRow { table: w, row: Word::Cells(x) } },
        );
        push(format!("storerow {rows}x{word}[x] <- y"), Exec::StoreRow { table: w, row: Word::Cells(x), src: Word::Cells(y) });
        for cols in 1..=max_extent {
            let m = Table { base, rows, cols };
            let (r, c) = (Word::Cells(x), Word::Cells(y));
            push(format!("load {rows}x{cols}[x,y]"), Exec::SetBit { dst: d, op: BitOp::Load { table: m, row: r, col: Some(c) } });
            push(format!("store {rows}x{cols}[x,y] <- a"), Exec::Store { table: m, row: r, col: Some(c), src: Bit::Cell(a) });
        }
        // index cells inside the array they address
        let inner = Table { base: x, rows, cols: 1 };
        if rows >= word {
            push(
                format!("store {rows}[x] aliased"),
                Exec::Store { table: inner, row: Word::Cells(x), col: None, src: Bit::Cell(a) },
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        for w in 1..=2 {
            for s in catalogue(w, 3) {
                check_gadget(&s.exec, w).unwrap_or_else(|e| panic!("W={w} {}: {e}", s.name));
            }
        }
    }

    #[test]
    fn unguarded_select_is_ambiguous() {
        use super::super::circuit::CircuitBuilder;
        // no "some selector holds" clause, so with both selectors off the
        // output is free
        let mut b = CircuitBuilder::new();
        let (s0, s1, v0, v1) = (b.read(0), b.read(1), b.read(2), b.read(3));
        b.select(&[s0, s1], &[v0, v1], Some(9));
        let c = b.finish();
        assert!(matches!(check_circuit(&c, |_| false), Err(SoundnessError::Ambiguous(_))));
    }

    #[test]
    fn out_of_range_index_counts_as_fault() {
        let t = Table { base: 8, rows: 3, cols: 1 };
        let exec = Exec::SetBit { dst: 0, op: BitOp::Load { table: t, row: Word::Cells(4), col: None } };
        let r = check_gadget(&exec, 2).unwrap();
        // index 3 of 0..3 faults for all 8 contents
        assert_eq!((r.patterns, r.faulting), (32, 8));
    }
}
