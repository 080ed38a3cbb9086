//! Exact verification of LP points and the propagation certificate.
//!
//! [`verify`] evaluates every row of the model in exact rational
//! arithmetic, twice: on the raw values (residuals are reported, never
//! rounded away) and on the point obtained by snapping every value within
//! the tolerance to 0 or 1. The verdict is about the snapped point.
//!
//! [`propagate`] proves that fixing the inputs leaves a single feasible
//! point: interval bound propagation over the rows of each step fixes every
//! variable of that step from the values of the previous one. Because
//! propagation only derives bounds every LP solution must respect, a
//! complete run is a certificate that the LP feasible set is that one point.

use core::ops::Range;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{CheckedAdd, CheckedMul, Signed, Zero};

use super::{DenseAssignment, Objective, Values};
use crate::lpgen::{BitPoint, LpModel, Row, RowKind, Sense, Var, VarId};
use crate::prelude::*;
use crate::rational::{is_binary, to_big};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Values within `tol` of 0 or 1 are snapped to it.
    pub tol: Rational,
    /// How many violated rows to list by name.
    pub max_listed: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { tol: Rational::new(1, 1_000_000), max_listed: 20 }
    }
}

/// A violated row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub row: RowKind,
    pub lhs: BigRational,
    pub sense: Sense,
    pub rhs: i32,
}

/// Row checks over a range of steps; merge partial reports in step order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PartialReport {
    pub rows: u64,
    pub raw_violations: u64,
    /// Largest amount by which a raw row is violated.
    pub raw_max_excess: BigRational,
    pub raw_listed: Vec<Violation>,
    pub snapped_violations: u64,
    pub snapped_listed: Vec<Violation>,
}

impl PartialReport {
    pub fn merge(&mut self, other: PartialReport, max_listed: usize) {
        self.rows += other.rows;
        self.raw_violations += other.raw_violations;
        if other.raw_max_excess > self.raw_max_excess {
            self.raw_max_excess = other.raw_max_excess;
        }
        self.snapped_violations += other.snapped_violations;
        for (mine, theirs) in [(&mut self.raw_listed, other.raw_listed), (&mut self.snapped_listed, other.snapped_listed)] {
            let room = max_listed.saturating_sub(mine.len());
            mine.extend(theirs.into_iter().take(room));
        }
    }
}

/// Variable counts of one class (`S`, `B` or `A`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClassCount {
    pub total: u64,
    /// Values that are exactly 0 or 1.
    pub exact: u64,
    /// Values within the tolerance of 0 or 1.
    pub snappable: u64,
}

/// Disagreement between the snapped point and a reference point.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TraceDiff {
    pub s: u64,
    pub b: u64,
    pub a: u64,
    pub first: Option<Var>,
}

impl TraceDiff {
    pub fn is_empty(&self) -> bool {
        self.s + self.b + self.a == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub provenance: String,
    pub checks: PartialReport,
    /// Values outside `[0, 1]` (exact).
    pub bound_violations: u64,
    /// `[S, B, A]`.
    pub integrality: [ClassCount; 3],
    /// Whether every value snaps to 0 or 1.
    pub snappable: bool,
    pub objective_raw: BigRational,
    pub objective_snapped: Option<Rational>,
    /// `m + d w` for the snapped output `w`, when an objective was given.
    pub expected_objective: Option<Rational>,
    /// Snapped output bit at the horizon.
    pub output: Option<bool>,
    pub trace: Option<TraceDiff>,
}

impl VerifyReport {
    /// The snapped point is feasible, within bounds, reaches the expected
    /// objective and matches the reference point, where those were given.
    pub fn is_verified(&self) -> bool {
        self.snappable
            && self.checks.snapped_violations == 0
            && self.bound_violations == 0
            && match (&self.expected_objective, &self.objective_snapped) {
                (Some(e), Some(o)) => e == o,
                (Some(_), None) => false,
                (None, _) => true,
            }
            && self.trace.as_ref().is_none_or(TraceDiff::is_empty)
    }

    /// Every value is exactly 0 or 1 (no snapping was needed).
    pub fn is_exactly_integral(&self) -> bool {
        self.integrality.iter().all(|c| c.exact == c.total)
    }
}

enum Acc {
    Small(Rational),
    Big(BigRational),
}

impl Acc {
    fn add(self, c: i32, v: &Rational) -> Acc {
        match self {
            Acc::Small(s) => {
                let term = v.checked_mul(&Rational::from_integer(i128::from(c)));
                match term.and_then(|t| s.checked_add(&t)) {
                    Some(x) => Acc::Small(x),
                    None => Acc::Big(to_big(&s) + to_big(v) * BigInt::from(c)),
                }
            }
            Acc::Big(b) => Acc::Big(b + to_big(v) * BigInt::from(c)),
        }
    }

    fn big(self) -> BigRational {
        match self {
            Acc::Small(s) => to_big(&s),
            Acc::Big(b) => b,
        }
    }
}

/// How much `lhs` violates the row (0 when satisfied).
fn excess(lhs: &BigRational, sense: Sense, rhs: i32) -> BigRational {
    let d = lhs - BigRational::from_integer(BigInt::from(rhs));
    match sense {
        Sense::Le if d.is_positive() => d,
        Sense::Eq => d.abs(),
        Sense::Le => BigRational::zero(),
    }
}

fn int_lhs(terms: &[(VarId, i32)], p: &BitPoint) -> i64 {
    terms.iter().filter(|(id, _)| p.get(*id)).map(|(_, c)| i64::from(*c)).sum()
}

fn int_ok(lhs: i64, sense: Sense, rhs: i32) -> bool {
    match sense {
        Sense::Le => lhs <= i64::from(rhs),
        Sense::Eq => lhs == i64::from(rhs),
    }
}

/// Checks the rows of steps `steps` on the raw values of `sol` and on
/// `snapped`.
pub fn verify_steps(
    model: &LpModel,
    sol: &DenseAssignment,
    snapped: Option<&BitPoint>,
    steps: Range<u32>,
    opts: &VerifyOptions,
) -> PartialReport {
    let mut rep = PartialReport::default();
    let listed = |v: &mut Vec<Violation>, row: &Row<'_>, lhs: BigRational| {
        if v.len() < opts.max_listed {
            v.push(Violation { row: row.kind, lhs, sense: row.sense, rhs: row.rhs });
        }
    };
    for t in steps {
        model.rows_at(t, &mut |row| {
            rep.rows += 1;
            match &sol.values {
                Values::Binary(p) => {
                    let lhs = int_lhs(row.terms, p);
                    if !int_ok(lhs, row.sense, row.rhs) {
                        let big = BigRational::from_integer(BigInt::from(lhs));
                        let e = excess(&big, row.sense, row.rhs);
                        if e > rep.raw_max_excess {
                            rep.raw_max_excess = e;
                        }
                        rep.raw_violations += 1;
                        rep.snapped_violations += 1;
                        listed(&mut rep.raw_listed, row, big.clone());
                        listed(&mut rep.snapped_listed, row, big);
                    }
                }
                Values::Rational(vals) => {
                    let lhs =
                        row.terms.iter().fold(Acc::Small(Rational::zero()), |acc, &(id, c)| acc.add(c, &vals[id as usize])).big();
                    let e = excess(&lhs, row.sense, row.rhs);
                    if e.is_positive() {
                        rep.raw_violations += 1;
                        if e > rep.raw_max_excess {
                            rep.raw_max_excess = e;
                        }
                        listed(&mut rep.raw_listed, row, lhs);
                    }
                    if let Some(p) = snapped {
                        let l = int_lhs(row.terms, p);
                        if !int_ok(l, row.sense, row.rhs) {
                            rep.snapped_violations += 1;
                            listed(&mut rep.snapped_listed, row, BigRational::from_integer(BigInt::from(l)));
                        }
                    }
                }
            }
        });
    }
    rep
}

/// Fills in everything but the row checks.
pub fn finish(
    model: &LpModel,
    sol: &DenseAssignment,
    snapped: Option<&BitPoint>,
    checks: PartialReport,
    objective: Option<&Objective>,
    reference: Option<&BitPoint>,
    opts: &VerifyOptions,
) -> VerifyReport {
    let mut integrality = [ClassCount::default(); 3];
    let mut bound_violations = 0;
    let one = Rational::from_integer(1);
    for t in 0..=model.horizon {
        for (class, range) in model.layout.class_ranges(t).into_iter().enumerate() {
            let c = &mut integrality[class];
            c.total += range.end - range.start;
            match &sol.values {
                Values::Binary(_) => {
                    c.exact += range.end - range.start;
                    c.snappable += range.end - range.start;
                }
                Values::Rational(v) => {
                    for x in &v[range.start as usize..range.end as usize] {
                        if *x < Rational::zero() || *x > one {
                            bound_violations += 1;
                        }
                        if is_binary(x) {
                            c.exact += 1;
                            c.snappable += 1;
                        } else if x.abs() <= opts.tol || (x - one).abs() <= opts.tol {
                            c.snappable += 1;
                        }
                    }
                }
            }
        }
    }
    let mut objective_raw = BigRational::zero();
    let mut objective_snapped = snapped.map(|_| Rational::zero());
    for (id, c) in &model.objective {
        objective_raw += to_big(&sol.value(*id)) * to_big(c);
        if let (Some(o), Some(p)) = (objective_snapped.as_mut(), snapped) {
            if p.get(*id) {
                *o += c;
            }
        }
    }
    let output = snapped.map(|p| p.get(model.output_var()));
    let expected_objective = objective.map(|o| o.target(output.unwrap_or(false)));
    let trace = match (reference, snapped) {
        (Some(r), Some(p)) => Some(diff(model, p, r)),
        (Some(_), None) => Some(TraceDiff { s: u64::MAX, b: u64::MAX, a: u64::MAX, first: None }),
        _ => None,
    };
    VerifyReport {
        provenance: sol.provenance.clone(),
        checks,
        bound_violations,
        integrality,
        snappable: snapped.is_some(),
        objective_raw,
        objective_snapped,
        expected_objective,
        output,
        trace,
    }
}

fn diff(model: &LpModel, p: &BitPoint, r: &BitPoint) -> TraceDiff {
    let mut d = TraceDiff::default();
    for id in p.differing(r) {
        let v = model.layout.var(id).expect("id inside the model");
        match v {
            Var::S { .. } => d.s += 1,
            Var::B { .. } => d.b += 1,
            Var::A { .. } => d.a += 1,
        }
        if d.first.is_none() {
            d.first = Some(v);
        }
    }
    d
}

/// Verifies `sol` against every row, the bounds, the objective and an
/// optional reference point (usually the embedded interpreter trace).
pub fn verify(
    model: &LpModel,
    sol: &DenseAssignment,
    objective: Option<&Objective>,
    reference: Option<&BitPoint>,
    opts: &VerifyOptions,
) -> VerifyReport {
    let snapped = sol.snapped(opts.tol);
    let checks = verify_steps(model, sol, snapped.as_ref(), 0..model.horizon + 1, opts);
    finish(model, sol, snapped.as_ref(), checks, objective, reference, opts)
}

/// Why [`propagate`] stopped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Undetermined {
    /// The inputs are not fixed, so the initial memory is free.
    InputsFree,
    /// Propagation left this variable with both values possible.
    Free(Var),
    /// A row cannot be satisfied: the fixed model is infeasible.
    Infeasible(RowKind),
}

impl core::fmt::Display for Undetermined {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Undetermined::InputsFree => write!(f, "inputs are not fixed"),
            Undetermined::Free(v) => write!(f, "propagation does not determine {v}"),
            Undetermined::Infeasible(r) => write!(f, "row {r} is infeasible"),
        }
    }
}

/// Runs bound propagation step by step on a model with fixed inputs and
/// returns the single feasible point.
pub fn propagate(model: &LpModel) -> Result<BitPoint, Undetermined> {
    let fixed = model.fixed.as_ref().ok_or(Undetermined::InputsFree)?;
    let mut point = BitPoint::zeros(model.var_count());
    for (&cell, &v) in model.inputs.iter().zip(fixed) {
        point.set(cell, v);
    }
    let mut terms: Vec<(VarId, i32)> = Vec::new();
    let mut rows: Vec<(usize, usize, Sense, i32, RowKind)> = Vec::new();
    for t in 1..=model.horizon {
        let range = model.layout.slice_range(t);
        let base = range.start;
        let n = (range.end - range.start) as usize;
        let mut lo = vec![0i64; n];
        let mut hi = vec![1i64; n];
        terms.clear();
        rows.clear();
        model.rows_at(t, &mut |row| {
            let start = terms.len();
            terms.extend_from_slice(row.terms);
            rows.push((start, terms.len(), row.sense, row.rhs, row.kind));
        });
        let bounds = |id: VarId, lo: &[i64], hi: &[i64]| -> (i64, i64, Option<usize>) {
            if u64::from(id) >= base {
                let j = (u64::from(id) - base) as usize;
                (lo[j], hi[j], Some(j))
            } else {
                let v = i64::from(point.get(id));
                (v, v, None)
            }
        };
        let mut changed = true;
        while changed {
            changed = false;
            for &(s, e, sense, rhs, kind) in &rows {
                let row = &terms[s..e];
                let (mut min, mut max) = (0i64, 0i64);
                for &(id, c) in row {
                    let (l, h, _) = bounds(id, &lo, &hi);
                    let c = i64::from(c);
                    if c > 0 {
                        min += c * l;
                        max += c * h;
                    } else {
                        min += c * h;
                        max += c * l;
                    }
                }
                let rhs = i64::from(rhs);
                if min > rhs || (sense == Sense::Eq && max < rhs) {
                    return Err(Undetermined::Infeasible(kind));
                }
                for &(id, c) in row {
                    let (l, h, j) = bounds(id, &lo, &hi);
                    let Some(j) = j else { continue };
                    if l == h {
                        continue;
                    }
                    let c = i64::from(c);
                    // sum <= rhs: c x <= rhs - (min - min_j)
                    let min_j = if c > 0 { c * l } else { c * h };
                    let slack = rhs - (min - min_j);
                    let (mut nl, mut nh) = if c > 0 { (l, h.min(floor_div(slack, c))) } else { (l.max(div_ceil(slack, c)), h) };
                    if sense == Sense::Eq {
                        // sum >= rhs: c x >= rhs - (max - max_j)
                        let max_j = if c > 0 { c * h } else { c * l };
                        let need = rhs - (max - max_j);
                        if c > 0 {
                            nl = nl.max(div_ceil(need, c));
                        } else {
                            nh = nh.min(floor_div(need, c));
                        }
                    }
                    if nl > nh {
                        return Err(Undetermined::Infeasible(kind));
                    }
                    if (nl, nh) != (l, h) {
                        lo[j] = nl;
                        hi[j] = nh;
                        changed = true;
                    }
                }
            }
        }
        for j in 0..n {
            let id = (base + j as u64) as VarId;
            if lo[j] != hi[j] {
                return Err(Undetermined::Free(model.layout.var(id).expect("id inside the model")));
            }
            point.set(id, lo[j] == 1);
        }
    }
    Ok(point)
}

fn floor_div(a: i64, b: i64) -> i64 {
    let q = a / b;
    if a % b != 0 && (a < 0) != (b < 0) {
        q - 1
    } else {
        q
    }
}

fn div_ceil(a: i64, b: i64) -> i64 {
    let q = a / b;
    if a % b != 0 && (a < 0) == (b < 0) {
        q + 1
    } else {
        q
    }
}
