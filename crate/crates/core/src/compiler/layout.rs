//! Assignment of program variables to memory cells (one bit each).

use core::fmt;

use crate::frontend::DeclKind;
use crate::prelude::*;

/// Shape of a variable in memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Bool,
    Int,
    Array(u32),
    Matrix(u32, u32),
}

impl Shape {
    pub fn from_decl(kind: DeclKind) -> Self {
        match kind {
            DeclKind::Bool => Shape::Bool,
            DeclKind::Int => Shape::Int,
            DeclKind::Array(n) => Shape::Array(n as u32),
            DeclKind::Matrix(r, c) => Shape::Matrix(r as u32, c as u32),
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Shape::Bool => "bool",
            Shape::Int => "int",
            Shape::Array(_) => "array",
            Shape::Matrix(..) => "matrix",
        }
    }

    /// Number of cells a variable of this shape occupies.
    pub fn cells(self, word: u32) -> u32 {
        match self {
            Shape::Bool => 1,
            Shape::Int => word,
            Shape::Array(n) => n,
            Shape::Matrix(r, c) => r * c,
        }
    }
}

/// A variable and the first cell it occupies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub name: String,
    pub shape: Shape,
    pub base: u32,
    pub input: bool,
    /// Introduced by the compiler rather than declared.
    pub temp: bool,
}

/// Memory layout: variables in declaration order, then compiler temporaries.
///
/// An int occupies `W` consecutive cells, least significant bit first. A
/// matrix is stored row-major, so row `r` of an `R x W` matrix read as an
/// integer has its bit `b` in column `b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryMap {
    word: u32,
    slots: Vec<Slot>,
    index: BTreeMap<String, usize>,
    cells: u32,
}

impl MemoryMap {
    pub fn new(word: u32) -> Self {
        MemoryMap { word, slots: Vec::new(), index: BTreeMap::new(), cells: 0 }
    }

    pub fn word(&self) -> u32 {
        self.word
    }

    /// Appends a variable. Returns `None` if the name is taken.
    pub fn alloc(&mut self, name: &str, shape: Shape, input: bool, temp: bool) -> Option<&Slot> {
        if self.index.contains_key(name) {
            return None;
        }
        let slot = Slot { name: name.to_string(), shape, base: self.cells, input, temp };
        self.cells += shape.cells(self.word);
        self.index.insert(name.to_string(), self.slots.len());
        self.slots.push(slot);
        self.slots.last()
    }

    pub fn lookup(&self, name: &str) -> Option<&Slot> {
        self.index.get(name).map(|&i| &self.slots[i])
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    /// Total number of cells.
    pub fn cell_count(&self) -> u32 {
        self.cells
    }

    /// Input cells in layout order; position `j` holds input bit `j`.
    pub fn input_cells(&self) -> Vec<u32> {
        self.slots.iter().filter(|s| s.input).flat_map(|s| s.base..s.base + s.shape.cells(self.word)).collect()
    }

    /// Whether `cell` belongs to an input variable.
    pub fn is_input_cell(&self, cell: u32) -> bool {
        self.slot_of(cell).is_some_and(|s| s.input)
    }

    /// The variable containing `cell`.
    pub fn slot_of(&self, cell: u32) -> Option<&Slot> {
        let k = self.slots.partition_point(|s| s.base <= cell);
        let slot = self.slots.get(k.checked_sub(1)?)?;
        (cell < slot.base + slot.shape.cells(self.word)).then_some(slot)
    }

    /// Source-level name of a cell, e.g. `x`, `k.b2`, `p[3]`, `a[1,4]`.
    pub fn cell_name(&self, cell: u32) -> String {
        let Some(slot) = self.slot_of(cell) else {
            return format!("?{cell}");
        };
        let off = cell - slot.base;
        match slot.shape {
            Shape::Bool => slot.name.clone(),
            Shape::Int => format!("{}.b{off}", slot.name),
            Shape::Array(_) => format!("{}[{off}]", slot.name),
            Shape::Matrix(_, c) => format!("{}[{},{}]", slot.name, off / c, off % c),
        }
    }

    /// Value of variable `name` given a cell reader.
    pub fn read(&self, name: &str, bit: impl Fn(u32) -> bool) -> Option<Value> {
        let slot = self.lookup(name)?;
        let word = |base: u32| (0..self.word).fold(0u64, |acc, b| acc | u64::from(bit(base + b)) << b);
        Some(match slot.shape {
            Shape::Bool => Value::Bool(bit(slot.base)),
            Shape::Int => Value::Int(word(slot.base)),
            Shape::Array(n) => Value::Bits((0..n).map(|k| bit(slot.base + k)).collect()),
            Shape::Matrix(r, c) => Value::Rows((0..r).map(|k| (0..c).map(|j| bit(slot.base + k * c + j)).collect()).collect()),
        })
    }
}

/// A variable's value read from memory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Bool(bool),
    Int(u64),
    Bits(Vec<bool>),
    Rows(Vec<Vec<bool>>),
}

fn bits(f: &mut fmt::Formatter<'_>, b: &[bool]) -> fmt::Result {
    let v: Vec<&str> = b.iter().map(|&x| if x { "1" } else { "0" }).collect();
    write!(f, "{{{}}}", v.join(","))
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{}", u8::from(*b)),
            Value::Int(v) => write!(f, "{v}"),
            Value::Bits(b) => bits(f, b),
            Value::Rows(r) => {
                write!(f, "{{")?;
                for (k, row) in r.iter().enumerate() {
                    if k > 0 {
                        write!(f, ",")?;
                    }
                    bits(f, row)?;
                }
                write!(f, "}}")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_and_names() {
        let mut m = MemoryMap::new(3);
        m.alloc("p", Shape::Array(4), true, false);
        m.alloc("k", Shape::Int, false, false);
        m.alloc("a", Shape::Matrix(2, 3), true, false);
        m.alloc("_t1", Shape::Bool, false, true);
        assert!(m.alloc("k", Shape::Bool, false, false).is_none());
        assert_eq!(m.cell_count(), 4 + 3 + 6 + 1);
        assert_eq!(m.input_cells(), [0, 1, 2, 3, 7, 8, 9, 10, 11, 12]);
        assert_eq!(m.cell_name(5), "k.b1");
        assert_eq!(m.cell_name(11), "a[1,1]");
        assert_eq!(m.cell_name(13), "_t1");
        assert_eq!(m.cell_name(14), "?14");
        assert!(m.is_input_cell(2) && !m.is_input_cell(4));
    }
}
