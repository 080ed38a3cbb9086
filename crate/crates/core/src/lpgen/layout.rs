//! Numbering of LP variables.
//!
//! Variables are ordered by time. Slice `t = 0` holds the initial memory
//! `B(c, 0)`. Every later slice holds, in order, the line variables
//! `S(i, t)` of the lines whose window contains `t`, the memory `B(c, t)`,
//! and the auxiliary variables `A(i, t, k)` of the active lines. Runs of
//! time steps with the same active lines share one [`Epoch`] so a lookup is
//! a binary search plus arithmetic.

use core::fmt;

use crate::prelude::*;

/// Dense index of an LP variable.
pub type VarId = u32;

/// A variable in structured form. Lines are 0-based here; their names are
/// 1-based like assembly listings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    /// Line `line` runs at step `t`.
    S { line: u32, t: u32 },
    /// Memory cell `cell` after step `t`.
    B { cell: u32, t: u32 },
    /// Auxiliary variable `k` of the gadget of `line` at step `t`.
    A { line: u32, t: u32, k: u32 },
}

impl Var {
    pub fn t(&self) -> u32 {
        match *self {
            Var::S { t, .. } | Var::B { t, .. } | Var::A { t, .. } => t,
        }
    }

    /// Parses a name written by `Display`.
    pub fn parse(name: &str) -> Option<Var> {
        let (kind, rest) = name.split_at_checked(2)?;
        let nums: Vec<u32> = rest.split('_').map(|s| s.parse().ok()).collect::<Option<_>>()?;
        match (kind, nums.as_slice()) {
            ("S_", &[l, t]) if l > 0 => Some(Var::S { line: l - 1, t }),
            ("B_", &[cell, t]) => Some(Var::B { cell, t }),
            ("A_", &[l, t, k]) if l > 0 => Some(Var::A { line: l - 1, t, k }),
            _ => None,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Var::S { line, t } => write!(f, "S_{}_{}", line + 1, t),
            Var::B { cell, t } => write!(f, "B_{cell}_{t}"),
            Var::A { line, t, k } => write!(f, "A_{}_{}_{}", line + 1, t, k),
        }
    }
}

/// Time steps `t0..=t1` with the same active lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Epoch {
    pub t0: u32,
    pub t1: u32,
    /// Id of the first variable of slice `t0`.
    pub base: u64,
    /// Active lines, ascending.
    pub active: Vec<u32>,
    /// `aux_off[j]` is the offset of the aux block of `active[j]` within
    /// the aux part of a slice; the last entry is the total.
    pub aux_off: Vec<u32>,
    /// Position of each line in `active`.
    pos: Vec<Option<u32>>,
    /// Lines among `active` that write each cell.
    pub writers: Vec<Vec<u32>>,
}

impl Epoch {
    /// Variables per time step.
    pub fn size(&self, cells: u32) -> u64 {
        self.active.len() as u64 + u64::from(cells) + u64::from(*self.aux_off.last().unwrap())
    }

    pub fn is_active(&self, line: u32) -> bool {
        self.pos[line as usize].is_some()
    }
}

/// The variable numbering of one model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarLayout {
    pub horizon: u32,
    pub cells: u32,
    pub epochs: Vec<Epoch>,
    total: u64,
}

impl VarLayout {
    /// `windows[i]` is the range of steps at which line `i` may run,
    /// `aux[i]` its number of aux variables, `writes[i]` the cells its
    /// gadget writes.
    pub fn new(horizon: u32, cells: u32, windows: &[(u32, u32)], aux: &[u32], writes: &[Vec<u32>]) -> Self {
        let mut cuts: Vec<u32> = vec![1, horizon + 1];
        for &(s, e) in windows {
            cuts.push(s.max(1));
            cuts.push(e.saturating_add(1).min(horizon + 1));
        }
        cuts.sort_unstable();
        cuts.dedup();
        let mut epochs: Vec<Epoch> = Vec::new();
        let mut base = u64::from(cells);
        for pair in cuts.windows(2) {
            let (t0, t1) = (pair[0], pair[1] - 1);
            if t0 > horizon || t0 > t1 {
                continue;
            }
            let active: Vec<u32> =
                (0..windows.len() as u32).filter(|&i| windows[i as usize].0 <= t0 && t0 <= windows[i as usize].1).collect();
            let mut pos = vec![None; windows.len()];
            let mut aux_off = vec![0];
            let mut wr = vec![Vec::new(); cells as usize];
            for (j, &i) in active.iter().enumerate() {
                pos[i as usize] = Some(j as u32);
                aux_off.push(aux_off[j] + aux[i as usize]);
                for &c in &writes[i as usize] {
                    wr[c as usize].push(i);
                }
            }
            let e = Epoch { t0, t1, base, active, aux_off, pos, writers: wr };
            base += e.size(cells) * u64::from(t1 - t0 + 1);
            if let Some(last) = epochs.last_mut() {
                if last.active == e.active {
                    last.t1 = t1;
                    continue;
                }
            }
            epochs.push(e);
        }
        VarLayout { horizon, cells, epochs, total: base }
    }

    pub fn var_count(&self) -> u64 {
        self.total
    }

    /// Epoch containing step `t >= 1`.
    pub fn epoch(&self, t: u32) -> &Epoch {
        let k = self.epochs.partition_point(|e| e.t1 < t);
        &self.epochs[k]
    }

    fn slice(&self, t: u32) -> (&Epoch, u64) {
        let e = self.epoch(t);
        (e, e.base + u64::from(t - e.t0) * e.size(self.cells))
    }

    /// Id of `v`, or `None` if the variable does not exist (line outside
    /// its window, time beyond the horizon, unknown cell).
    pub fn id(&self, v: Var) -> Option<VarId> {
        if v.t() > self.horizon {
            return None;
        }
        let id = match v {
            Var::B { cell, t } => {
                if cell >= self.cells {
                    return None;
                }
                if t == 0 {
                    u64::from(cell)
                } else {
                    let (e, s) = self.slice(t);
                    s + e.active.len() as u64 + u64::from(cell)
                }
            }
            Var::S { line, t } => {
                if t == 0 {
                    return None;
                }
                let (e, s) = self.slice(t);
                s + u64::from((*e.pos.get(line as usize)?)?)
            }
            Var::A { line, t, k } => {
                if t == 0 {
                    return None;
                }
                let (e, s) = self.slice(t);
                let j = (*e.pos.get(line as usize)?)? as usize;
                if k >= e.aux_off[j + 1] - e.aux_off[j] {
                    return None;
                }
                s + e.active.len() as u64 + u64::from(self.cells) + u64::from(e.aux_off[j] + k)
            }
        };
        u32::try_from(id).ok()
    }

    /// Inverse of [`VarLayout::id`].
    pub fn var(&self, id: VarId) -> Option<Var> {
        let id = u64::from(id);
        if id < u64::from(self.cells) {
            return Some(Var::B { cell: id as u32, t: 0 });
        }
        if id >= self.total {
            return None;
        }
        let k = self.epochs.partition_point(|e| e.base <= id) - 1;
        let e = &self.epochs[k];
        let size = e.size(self.cells);
        let t = e.t0 + ((id - e.base) / size) as u32;
        let mut r = (id - e.base) % size;
        if r < e.active.len() as u64 {
            return Some(Var::S { line: e.active[r as usize], t });
        }
        r -= e.active.len() as u64;
        if r < u64::from(self.cells) {
            return Some(Var::B { cell: r as u32, t });
        }
        let r = (r - u64::from(self.cells)) as u32;
        let j = e.aux_off.partition_point(|&o| o <= r) - 1;
        Some(Var::A { line: e.active[j], t, k: r - e.aux_off[j] })
    }

    /// Id ranges of the `S`, `B` and `A` variables of slice `t`.
    pub fn class_ranges(&self, t: u32) -> [core::ops::Range<u64>; 3] {
        let cells = u64::from(self.cells);
        if t == 0 {
            return [0..0, 0..cells, cells..cells];
        }
        let (e, s) = self.slice(t);
        let b = s + e.active.len() as u64;
        [s..b, b..b + cells, b + cells..s + e.size(self.cells)]
    }

    /// Id range of slice `t`.
    pub fn slice_range(&self, t: u32) -> core::ops::Range<u64> {
        if t == 0 {
            return 0..u64::from(self.cells);
        }
        let (e, s) = self.slice(t);
        s..s + e.size(self.cells)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> VarLayout {
        // line 0 always, line 1 in [2, 3], line 2 from 3 on
        VarLayout::new(5, 3, &[(1, 5), (2, 3), (3, 5)], &[0, 2, 1], &[vec![0], vec![1, 2], vec![]])
    }

    #[test]
    fn ids_round_trip() {
        let l = sample();
        let mut seen = 0;
        for id in 0..l.var_count() as u32 {
            let v = l.var(id).unwrap();
            assert_eq!(l.id(v), Some(id), "{v}");
            assert_eq!(Var::parse(&v.to_string()), Some(v));
            seen += 1;
        }
        // 3 + t1: 1+3 + t2: 2+3+2 + t3: 3+3+3 + t4,t5: 2+3+1 each
        assert_eq!(seen, 3 + 4 + 7 + 9 + 6 + 6);
        assert_eq!(l.id(Var::S { line: 1, t: 4 }), None);
        assert_eq!(l.id(Var::A { line: 1, t: 2, k: 2 }), None);
        assert_eq!(l.epoch(3).writers[1], vec![1]);
    }
}
