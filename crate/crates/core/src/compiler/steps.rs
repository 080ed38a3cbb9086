//! Static bounds on the number of steps a program can take.
//!
//! The analysis recovers the structured control flow from the lowering
//! templates (backward `goto` closes a loop, forward `unless` opens an
//! `if`) and combines per-construct costs:
//!
//! * `if`: `1 + then` (the `unless` line plus the branch),
//! * `if`/`else`: `1 + max(then + 1, else)`,
//! * `while` with bound `N`: `N * (cond + body + 1) + cond`, where `cond`
//!   includes the exit test,
//! * `for`: `sum over iterations of (body + 4) - 2`, evaluated with the loop
//!   variable bound so inner ranges such as `inc(i), n - 1` are exact.
//!
//! `while` loops need an explicit iteration bound `bound.<label>` in the
//! parameters. `for` loops without a computable range fall back to `2^W`
//! iterations, the most a word-sized counter can take.

use super::asm::{Arg, AsmProgram, Instr, SetOp};
use super::BoundError;
use crate::frontend::{max_word, ParamEnv};
use crate::prelude::*;

/// Fewest and most steps along paths through a piece of code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Cost {
    pub min: u64,
    pub max: u64,
}

impl Cost {
    fn lines(n: u64) -> Self {
        Cost { min: n, max: n }
    }

    fn add(self, o: Cost) -> Self {
        Cost { min: self.min.saturating_add(o.min), max: self.max.saturating_add(o.max) }
    }
}

/// Step bound and time window of one phase (or of unphased code).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionBound {
    /// Phase name, or `None` for lines outside every phase.
    pub name: Option<String>,
    pub first: usize,
    pub end: usize,
    pub cost: Cost,
    /// First and last time step at which lines of this region may run.
    pub start: u32,
    pub stop: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepBound {
    /// Upper bound on the steps of any run, including the `return`.
    pub total: u64,
    pub regions: Vec<RegionBound>,
    /// Time window `[start, stop]` of every line.
    pub windows: Vec<(u32, u32)>,
}

impl StepBound {
    pub fn region(&self, name: &str) -> Option<&RegionBound> {
        self.regions.iter().find(|r| r.name.as_deref() == Some(name))
    }
}

/// Computes step bounds and per-line time windows.
///
/// Reads `maxsteps`, `bound.<label>` and `phase.<name>.start|stop` from
/// `params`.
pub fn count_steps(asm: &AsmProgram, params: &ParamEnv) -> Result<StepBound, BoundError> {
    let maxsteps = params.maxsteps();
    let n = asm.lines.len();
    let mut backs: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (g, l) in asm.lines.iter().enumerate() {
        if let Instr::Goto { target } = l.instr {
            if target <= g {
                backs[target].push(g);
            }
        }
    }
    let an = Analyzer { asm, params, backs, word: asm.word() };

    let mut cuts: Vec<(Option<String>, usize, usize)> = Vec::new();
    let mut phases: Vec<_> = asm.phases.iter().collect();
    phases.sort_by_key(|p| p.first);
    let mut at = 0;
    for p in phases {
        if p.first > at {
            cuts.push((None, at, p.first));
        }
        cuts.push((Some(p.name.clone()), p.first, p.end));
        at = p.end;
    }
    if at < n {
        cuts.push((None, at, n));
    }

    let mut regions = Vec::new();
    let (mut min_before, mut max_through) = (0u64, 0u64);
    for (name, first, end) in cuts {
        let cost = an.seq(first, end, &mut BTreeMap::new())?;
        max_through = max_through.saturating_add(cost.max);
        let (mut start, mut stop) = match &name {
            Some(_) => {
                let start = min_before.saturating_add(1).min(u64::from(maxsteps)) as u32;
                (start, max_through.min(u64::from(maxsteps)) as u32)
            }
            None => (1, maxsteps),
        };
        if let Some(p) = &name {
            if let Some(v) = params.get(&format!("phase.{p}.start")) {
                start = v.min(u64::from(u32::MAX)) as u32;
            }
            if let Some(v) = params.get(&format!("phase.{p}.stop")) {
                stop = v.min(u64::from(maxsteps)) as u32;
            }
        }
        let label = name.clone().unwrap_or_else(|| format!("lines {}..{}", first + 1, end));
        if start == 0 || start > stop {
            return Err(BoundError::Window { region: label, msg: format!("empty window [{start}, {stop}]") });
        }
        min_before = min_before.saturating_add(cost.min);
        regions.push(RegionBound { name, first, end, cost, start, stop });
    }

    let mut windows = vec![(1, maxsteps); n];
    for r in &regions {
        for (i, w) in windows.iter_mut().enumerate().take(r.end).skip(r.first) {
            let absorbing = matches!(asm.lines[i].instr, Instr::Return { .. });
            *w = (r.start, if absorbing { maxsteps } else { r.stop });
        }
    }
    if let Some(w) = windows.first() {
        if w.0 != 1 {
            return Err(BoundError::Window { region: "first line".into(), msg: "must be active at step 1".into() });
        }
    }
    // Every step needs at least one line that may be active.
    let mut events: Vec<(u32, u32)> = windows.clone();
    events.sort_unstable();
    let mut covered = 0u32;
    for (s, e) in events {
        if s > covered + 1 {
            break;
        }
        covered = covered.max(e);
    }
    if covered < maxsteps {
        return Err(BoundError::Window { region: "program".into(), msg: format!("no line may run at step {}", covered + 1) });
    }

    let total = regions.iter().fold(0u64, |acc, r| acc.saturating_add(r.cost.max));
    Ok(StepBound { total, regions, windows })
}

type Env = BTreeMap<String, u64>;

struct Analyzer<'a> {
    asm: &'a AsmProgram,
    params: &'a ParamEnv,
    /// Backward gotos targeting each line.
    backs: Vec<Vec<usize>>,
    word: u32,
}

impl Analyzer<'_> {
    fn err(&self, line: usize, msg: &str) -> BoundError {
        BoundError::Structure { line: line + 1, msg: msg.into() }
    }

    fn instr(&self, i: usize) -> &Instr {
        &self.asm.lines[i].instr
    }

    fn modulus(&self) -> u64 {
        max_word(self.word).wrapping_add(1)
    }

    fn seq(&self, a: usize, b: usize, env: &mut Env) -> Result<Cost, BoundError> {
        let mut total = Cost::default();
        let mut i = a;
        while i < b {
            if let Some(&g) = self.backs[i].iter().filter(|&&g| g < b).max() {
                total = total.add(self.looped(a, i, g, env)?);
                i = g + 1;
                continue;
            }
            match self.instr(i) {
                Instr::Unless { target, .. } if *target > i && *target <= b => {
                    let l = *target;
                    let cost = match self.instr(l - 1) {
                        Instr::Goto { target: d } if l - 1 > i && *d >= l && *d <= b => {
                            let d = *d;
                            let then = self.seq(i + 1, l - 1, env)?;
                            let els = self.seq(l, d, env)?;
                            i = d;
                            Cost { min: 1 + (then.min + 1).min(els.min), max: 1 + (then.max + 1).max(els.max) }
                        }
                        _ => {
                            let then = self.seq(i + 1, l, env)?;
                            i = l;
                            Cost { min: 1, max: 1 + then.max }
                        }
                    };
                    total = total.add(cost);
                }
                Instr::Unless { .. } | Instr::If { .. } | Instr::Goto { .. } => {
                    return Err(self.err(i, "jump does not match any control structure"))
                }
                _ => {
                    total = total.add(Cost::lines(1));
                    i += 1;
                }
            }
        }
        Ok(total)
    }

    /// Loop with head `i` closed by the `goto` at `g`.
    fn looped(&self, region: usize, i: usize, g: usize, env: &mut Env) -> Result<Cost, BoundError> {
        if let Some(var) = self.for_var(i, g) {
            return self.for_loop(region, i, g, &var, env);
        }
        let h = (i..g)
            .find(|&h| matches!(self.instr(h), Instr::If { target, .. } if *target == g + 1))
            .ok_or_else(|| self.err(g, "backward jump without a loop exit test"))?;
        let label = self.asm.line_ref(i);
        let n = self.params.get(&format!("bound.{label}")).ok_or(BoundError::MissingWhileBound { label, line: i + 1 })?;
        let cond = self.seq(i, h, env)?.add(Cost::lines(1));
        let body = self.seq(h + 1, g, env)?;
        Ok(Cost {
            min: cond.min,
            max: n.saturating_mul(cond.max.saturating_add(body.max).saturating_add(1)).saturating_add(cond.max),
        })
    }

    /// Recognizes the `for` tail `eqw; if; incw; goto` and returns the
    /// loop variable.
    fn for_var(&self, i: usize, g: usize) -> Option<String> {
        if g < i + 3 {
            return None;
        }
        let Instr::Set { dst: v, op: SetOp::IncW, args } = self.instr(g - 1) else { return None };
        let Instr::If { guard, target } = self.instr(g - 2) else { return None };
        let Instr::Set { dst: t, op: SetOp::EqW, args: cmp } = self.instr(g - 3) else { return None };
        let same = args.first() == Some(&Arg::Var(v.clone())) && cmp.first() == Some(&Arg::Var(v.clone()));
        (same && t == guard && *target == g + 1).then(|| v.clone())
    }

    fn for_loop(&self, region: usize, i: usize, g: usize, var: &str, env: &mut Env) -> Result<Cost, BoundError> {
        let Instr::Set { args: cmp, .. } = self.instr(g - 3) else { unreachable!() };
        let upper = match &cmp[1] {
            Arg::Const(c) => Some(*c),
            Arg::Var(s) => self.value_before(region, i, s, env),
        };
        let lower = self.value_before(region, i, var, env);
        let label = self.asm.line_ref(i);
        let keyed = self.params.get(&format!("bound.{label}"));
        let saved = env.remove(var);
        let result = match (lower, upper, keyed) {
            (Some(lo), Some(hi), _) => {
                let m = self.modulus();
                let count = (hi.wrapping_sub(lo) & (m.wrapping_sub(1))) + 1;
                let mut total = Cost::default();
                for k in 0..count {
                    env.insert(var.to_string(), (lo + k) & (m.wrapping_sub(1)));
                    total = total.add(self.seq(i, g - 3, env)?.add(Cost::lines(4)));
                }
                env.remove(var);
                Cost { min: total.min - 2, max: total.max - 2 }
            }
            (_, _, n) => {
                let n = n.unwrap_or(self.modulus()).max(1);
                let body = self.seq(i, g - 3, env)?;
                Cost { min: body.min + 2, max: n.saturating_mul(body.max.saturating_add(4)).saturating_sub(2) }
            }
        };
        if let Some(v) = saved {
            env.insert(var.to_string(), v);
        }
        Ok(result)
    }

    /// Value of `var` just before line `i`, if the closest preceding write
    /// in the same straight-line stretch is computable.
    fn value_before(&self, region: usize, i: usize, var: &str, env: &Env) -> Option<u64> {
        let m = self.modulus().wrapping_sub(1);
        for j in (region..i).rev() {
            match self.instr(j) {
                Instr::Set { dst, op, args } if dst == var => {
                    let val = |a: &Arg| match a {
                        Arg::Const(c) => Some(*c),
                        Arg::Var(v) => env.get(v).copied().or_else(|| self.value_before(region, j, v, env)),
                    };
                    return match op {
                        SetOp::CopyW => val(&args[0]),
                        SetOp::IncW => val(&args[0]).map(|x| x.wrapping_add(1) & m),
                        SetOp::DecW => val(&args[0]).map(|x| x.wrapping_sub(1) & m),
                        SetOp::AddW => Some(val(&args[0])?.wrapping_add(val(&args[1])?) & m),
                        _ => None,
                    };
                }
                Instr::Unless { .. } | Instr::If { .. } | Instr::Goto { .. } => return None,
                _ => {}
            }
            if self.asm.lines[j].label.is_some() {
                // Another path can enter here; the write above may not be the
                // one that reaches line `i`.
                return None;
            }
        }
        None
    }
}
