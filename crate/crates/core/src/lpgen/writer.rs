//! LP-format and MPS writers.
//!
//! Both writers are deterministic: rows appear in generation order (time
//! major) and variables in id order, so the same model always gives the
//! same bytes.
//!
//! LP files use the long variable names of [`Var`]. MPS files use fixed
//! columns, which limits names to 8 characters, so columns are called
//! `C<id>` and rows `R<index>` with both numbers in base 36; the `.names`
//! sidecar maps them back. MPS has no portable way to say "maximize", so
//! the MPS objective is negated and minimized.

use core::fmt::{self, Write};

use super::layout::{Var, VarId};
use super::model::{LpModel, Row, Sense};
use crate::prelude::*;
use crate::rational::write_decimal;
use crate::Rational;

const LINE_WIDTH: usize = 200;

fn base36(mut n: u64, out: &mut String) {
    const DIGITS: &[u8] = b"0123456789abcdefghijklmnopqrstuvwxyz";
    let mut buf = [0u8; 16];
    let mut i = buf.len();
    loop {
        i -= 1;
        buf[i] = DIGITS[(n % 36) as usize];
        n /= 36;
        if n == 0 {
            break;
        }
    }
    for &b in &buf[i..] {
        out.push(b as char);
    }
}

/// MPS name of column `id`.
pub fn column_name(id: VarId) -> String {
    let mut s = String::from("C");
    base36(u64::from(id), &mut s);
    s
}

/// MPS name of the row with index `k`.
pub fn row_name(k: u64) -> String {
    let mut s = String::from("R");
    base36(k, &mut s);
    s
}

/// Parses a `C<base36>` column name.
pub fn parse_column_name(name: &str) -> Option<VarId> {
    let digits = name.strip_prefix('C')?;
    if digits.is_empty() {
        return None;
    }
    u32::from_str_radix(digits, 36).ok().filter(|_| digits.bytes().all(|b| b.is_ascii_digit() || b.is_ascii_lowercase()))
}

fn var_name(model: &LpModel, id: VarId) -> Var {
    model.layout.var(id).expect("id inside the model")
}

/// Writes `model` in CPLEX LP format.
pub fn write_lp(model: &LpModel, out: &mut dyn Write) -> fmt::Result {
    let asm = &model.asm;
    writeln!(
        out,
        "\\ Sparks model: {} lines, {} cells, word {}, horizon {}",
        asm.lines.len(),
        model.layout.cells,
        asm.word(),
        model.horizon
    )?;
    writeln!(out, "\\ S_<line>_<t>: line runs at step t; B_<cell>_<t>: memory bit after step t;")?;
    writeln!(out, "\\ A_<line>_<t>_<k>: gadget auxiliary; all variables lie in [0, 1].")?;
    writeln!(out, "Maximize")?;
    let mut line = String::from(" obj:");
    if model.objective.is_empty() {
        let _ = write!(line, " 0 {}", var_name(model, 0));
    }
    for (id, c) in &model.objective {
        let mut term = String::new();
        write_coef(&mut term, c)?;
        let _ = write!(term, "{}", var_name(model, *id));
        push_term(out, &mut line, &term)?;
    }
    writeln!(out, "{line}")?;
    writeln!(out, "Subject To")?;
    let mut result = Ok(());
    model.for_each_row(&mut |row| {
        if result.is_ok() {
            result = write_lp_row(model, row, out);
        }
    });
    result?;
    writeln!(out, "Bounds")?;
    for id in 0..model.var_count() as VarId {
        writeln!(out, " {} <= 1", var_name(model, id))?;
    }
    writeln!(out, "End")
}

/// ` + 2.5 ` style prefix of a term.
fn write_coef(s: &mut String, c: &Rational) -> fmt::Result {
    let neg = *c < Rational::from_integer(0);
    s.push_str(if neg { " - " } else { " + " });
    let a = if neg { -c } else { *c };
    if a != Rational::from_integer(1) {
        write_decimal(s, &a)?;
        s.push(' ');
    }
    Ok(())
}

fn push_term(out: &mut dyn Write, line: &mut String, term: &str) -> fmt::Result {
    if line.len() + term.len() > LINE_WIDTH {
        writeln!(out, "{line}")?;
        line.clear();
        line.push_str("   ");
    }
    line.push_str(term);
    Ok(())
}

fn write_lp_row(model: &LpModel, row: &Row<'_>, out: &mut dyn Write) -> fmt::Result {
    let mut line = format!(" {}:", row.kind);
    for &(id, c) in row.terms {
        let mut term = String::new();
        write_coef(&mut term, &Rational::from_integer(i128::from(c)))?;
        let _ = write!(term, "{}", var_name(model, id));
        push_term(out, &mut line, &term)?;
    }
    let op = match row.sense {
        Sense::Le => "<=",
        Sense::Eq => "=",
    };
    writeln!(out, "{line} {op} {}", row.rhs)
}

/// Row counts per step, used to number rows in MPS files.
fn row_offsets(model: &LpModel) -> Vec<u64> {
    let mut offsets = Vec::with_capacity(model.horizon as usize + 2);
    let mut n = 0u64;
    for t in 0..=model.horizon {
        offsets.push(n);
        model.rows_at(t, &mut |_| n += 1);
    }
    offsets.push(n);
    offsets
}

fn mps_value(c: &Rational) -> Result<String, fmt::Error> {
    let mut s = String::new();
    write_decimal(&mut s, c)?;
    Ok(s)
}

/// Writes `model` in fixed MPS format (objective negated, minimized).
pub fn write_mps(model: &LpModel, out: &mut dyn Write) -> fmt::Result {
    let offsets = row_offsets(model);
    writeln!(out, "NAME          SPARKS")?;
    writeln!(out, "* objective negated: minimize -(original objective)")?;
    writeln!(out, "ROWS")?;
    writeln!(out, " N  OBJ")?;
    let mut k = 0u64;
    let mut result = Ok(());
    model.for_each_row(&mut |row| {
        let ty = match row.sense {
            Sense::Le => 'L',
            Sense::Eq => 'E',
        };
        if result.is_ok() {
            result = writeln!(out, " {ty}  {}", row_name(k));
        }
        k += 1;
    });
    result?;
    writeln!(out, "COLUMNS")?;
    let mut objective: Vec<(VarId, Rational)> = model.objective.clone();
    objective.sort_by_key(|(id, _)| *id);
    for t in 0..=model.horizon {
        let range = model.layout.slice_range(t);
        // Columns of step t appear in rows of steps t and t + 1 only.
        let mut entries: Vec<(VarId, u64, i32)> = Vec::new();
        for s in t..=(t + 1).min(model.horizon) {
            let mut k = offsets[s as usize];
            model.rows_at(s, &mut |row| {
                for &(id, c) in row.terms {
                    if range.contains(&u64::from(id)) {
                        entries.push((id, k, c));
                    }
                }
                k += 1;
            });
        }
        entries.sort_unstable();
        let mut e = entries.iter().peekable();
        for id in range.start as VarId..range.end as VarId {
            let col = column_name(id);
            if let Ok(j) = objective.binary_search_by_key(&id, |(v, _)| *v) {
                let v = mps_value(&-objective[j].1)?;
                writeln!(out, "    {col:<8}  {:<8}  {v:>12}", "OBJ")?;
            }
            while let Some(&&(_, k, c)) = e.peek().filter(|x| x.0 == id) {
                writeln!(out, "    {col:<8}  {:<8}  {c:>12}", row_name(k))?;
                e.next();
            }
        }
    }
    writeln!(out, "RHS")?;
    let mut k = 0u64;
    model.for_each_row(&mut |row| {
        if row.rhs != 0 && result.is_ok() {
            result = writeln!(out, "    {:<8}  {:<8}  {:>12}", "RHS", row_name(k), row.rhs);
        }
        k += 1;
    });
    result?;
    writeln!(out, "BOUNDS")?;
    for id in 0..model.var_count() as VarId {
        writeln!(out, " UP {:<8}  {:<8}  {:>12}", "BND", column_name(id), 1)?;
    }
    writeln!(out, "ENDATA")
}

/// Writes the `.names` sidecar mapping MPS names to LP names, followed by
/// the source-level name of the memory cell or the label of the line.
pub fn write_names(model: &LpModel, out: &mut dyn Write) -> fmt::Result {
    writeln!(out, "# MPS name, LP name, source name; the MPS objective is the negated LP objective")?;
    for id in 0..model.var_count() as VarId {
        let v = var_name(model, id);
        write!(out, "{} {v}", column_name(id))?;
        match v {
            Var::B { cell, .. } => writeln!(out, " {}", model.asm.memory.cell_name(cell))?,
            Var::S { line, .. } | Var::A { line, .. } => match &model.asm.lines[line as usize].label {
                Some(l) => writeln!(out, " {l}")?,
                None => writeln!(out)?,
            },
        }
    }
    let mut k = 0u64;
    let mut result = Ok(());
    model.for_each_row(&mut |row| {
        if result.is_ok() {
            result = writeln!(out, "{} {}", row_name(k), row.kind);
        }
        k += 1;
    });
    result
}
