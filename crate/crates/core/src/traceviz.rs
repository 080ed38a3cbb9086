//! Execution traces read back from LP points, rendered as SVG or CSV.
//!
//! The line-vs-time plot has one marker per executed step, horizontal
//! bands for the phases and a vertical marker at the halting step. Steps
//! whose line variable is not clearly 1 are flagged and drawn in red.

use core::fmt::Write;

use crate::compiler::{AsmProgram, Instr};
use crate::harness::DenseAssignment;
use crate::interpreter::Trace;
use crate::lpgen::{LpModel, Var};
use crate::prelude::*;
use crate::Rational;

/// A line per time step, as read from a run or an LP point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VizTrace {
    pub horizon: u32,
    /// `lines[t - 1]`: 0-based line running at step `t`, if any.
    pub lines: Vec<Option<u32>>,
    /// `flags[t - 1]`: the line at step `t` was not read off cleanly.
    pub flags: Vec<bool>,
    /// First step from which a `return` line runs until the horizon.
    pub halt: Option<u32>,
    /// `(name, first line, end line)` of each phase.
    pub phases: Vec<(String, u32, u32)>,
    pub line_count: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VizError {
    #[error("traces have horizons {0} and {1}")]
    HorizonMismatch(u32, u32),
    #[error("trace CSV line {line}: {msg}")]
    Csv { line: usize, msg: String },
}

fn phases(asm: &AsmProgram) -> Vec<(String, u32, u32)> {
    asm.phases.iter().map(|p| (p.name.clone(), p.first as u32, p.end as u32)).collect()
}

fn halt_of(asm: &AsmProgram, lines: &[Option<u32>]) -> Option<u32> {
    let last = (*lines.last()?)?;
    if !matches!(asm.lines.get(last as usize)?.instr, Instr::Return { .. }) {
        return None;
    }
    let run = lines.iter().rev().take_while(|&&l| l == Some(last)).count();
    Some((lines.len() - run + 1) as u32)
}

impl VizTrace {
    /// Trace of an interpreter run over `horizon` steps.
    pub fn from_run(asm: &AsmProgram, trace: &Trace, horizon: u32) -> Self {
        let lines: Vec<Option<u32>> = (1..=horizon).map(|t| trace.line_at(t as usize)).collect();
        let mut v = VizTrace {
            horizon,
            flags: vec![false; horizon as usize],
            halt: None,
            phases: phases(asm),
            line_count: asm.lines.len() as u32,
            lines,
        };
        // The run halts at its return step even if that is the horizon.
        v.halt =
            if trace.halted && trace.steps() <= horizon as usize { Some(trace.steps() as u32) } else { halt_of(asm, &v.lines) };
        v
    }

    /// Steps drawn as markers: up to the halt, or every step with a line.
    pub fn executed(&self) -> impl Iterator<Item = (u32, u32, bool)> + '_ {
        let end = self.halt.unwrap_or(self.horizon);
        (1..=end).filter_map(move |t| self.lines[t as usize - 1].map(|l| (t, l, self.flags[t as usize - 1])))
    }

    pub fn flagged(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    /// Reads the output of [`render_csv`] back. The `flag` column is
    /// optional.
    pub fn from_csv(asm: &AsmProgram, text: &str) -> Result<Self, VizError> {
        let mut lines = Vec::new();
        let mut flags = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let row = raw.trim();
            if row.is_empty() || (k == 0 && row.starts_with('t')) {
                continue;
            }
            let err = |msg: &str| VizError::Csv { line: k + 1, msg: msg.to_string() };
            let mut cols = row.split(',');
            let t: usize = cols.next().and_then(|c| c.trim().parse().ok()).ok_or_else(|| err("bad step"))?;
            if t != lines.len() + 1 {
                return Err(err("steps must be 1, 2, 3, ..."));
            }
            let line = match cols.next().map(str::trim) {
                None | Some("") => None,
                Some(c) => match c.parse::<u32>() {
                    Ok(l) if l >= 1 && l as usize <= asm.lines.len() => Some(l - 1),
                    _ => return Err(err("bad line number")),
                },
            };
            let flag = matches!(cols.next().map(str::trim), Some("1"));
            lines.push(line);
            flags.push(flag);
        }
        let halt = halt_of(asm, &lines);
        Ok(VizTrace { horizon: lines.len() as u32, lines, flags, halt, phases: phases(asm), line_count: asm.lines.len() as u32 })
    }
}

/// Reads the running line of every step as the argmax of `S(., t)`.
///
/// A step is flagged when the largest value is below `threshold` or when
/// two lines tie; the first line wins a tie.
pub fn extract_trace(model: &LpModel, sol: &DenseAssignment, threshold: Rational) -> VizTrace {
    let mut lines = Vec::with_capacity(model.horizon as usize);
    let mut flags = Vec::with_capacity(model.horizon as usize);
    for t in 1..=model.horizon {
        let mut best: Option<(u32, Rational)> = None;
        let mut tie = false;
        for &line in &model.layout.epoch(t).active {
            let id = model.id(Var::S { line, t }).expect("active line");
            let v = sol.value(id);
            match &best {
                Some((_, b)) if v < *b => {}
                Some((_, b)) if v == *b => tie = true,
                _ => {
                    best = Some((line, v));
                    tie = false;
                }
            }
        }
        match best {
            Some((line, v)) => {
                lines.push(Some(line));
                flags.push(tie || v < threshold);
            }
            None => {
                lines.push(None);
                flags.push(true);
            }
        }
    }
    let halt = halt_of(&model.asm, &lines);
    VizTrace { horizon: model.horizon, lines, flags, halt, phases: phases(&model.asm), line_count: model.asm.lines.len() as u32 }
}

/// Steps at which two traces run different lines.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TraceComparison {
    /// `(t, line in a, line in b)`, 0-based lines.
    pub differences: Vec<(u32, Option<u32>, Option<u32>)>,
    pub halt: (Option<u32>, Option<u32>),
}

impl TraceComparison {
    pub fn is_empty(&self) -> bool {
        self.differences.is_empty()
    }
}

pub fn diff_traces(a: &VizTrace, b: &VizTrace) -> Result<TraceComparison, VizError> {
    if a.horizon != b.horizon {
        return Err(VizError::HorizonMismatch(a.horizon, b.horizon));
    }
    let differences =
        (1..=a.horizon).zip(a.lines.iter().zip(&b.lines)).filter(|(_, (x, y))| x != y).map(|(t, (x, y))| (t, *x, *y)).collect();
    Ok(TraceComparison { differences, halt: (a.halt, b.halt) })
}

/// `t,line,flag` with 1-based lines; the line is empty when none runs.
pub fn render_csv(v: &VizTrace) -> String {
    let mut s = String::from("t,line,flag\n");
    for (t, (l, f)) in (1..).zip(v.lines.iter().zip(&v.flags)) {
        let line = l.map(|l| (l + 1).to_string()).unwrap_or_default();
        let _ = writeln!(s, "{t},{line},{}", u8::from(*f));
    }
    s
}

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 500.0;
const MARGIN: f64 = 50.0;

struct Frame {
    horizon: f64,
    lines: f64,
}

impl Frame {
    fn x(&self, t: u32) -> f64 {
        MARGIN + (f64::from(t) - 0.5) / self.horizon.max(1.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn y(&self, line: f64) -> f64 {
        // line 1 at the top
        MARGIN + line / self.lines.max(1.0) * (HEIGHT - 2.0 * MARGIN)
    }
}

/// Line-vs-time scatter plot. With `compare`, steps where the two traces
/// disagree are drawn as hollow squares in class `diff`.
pub fn render_svg(v: &VizTrace, title: &str, compare: Option<&VizTrace>) -> String {
    let f = Frame { horizon: f64::from(v.horizon), lines: f64::from(v.line_count) };
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(
        s,
        "<style>.step{{fill:#1f4e9c}} .flag{{fill:#d62728}} .diff{{fill:none;stroke:#ff7f0e;stroke-width:1.5}} \
         .band{{fill:#000;opacity:0.06}} .halt{{stroke:#2ca02c;stroke-width:1.5;stroke-dasharray:4 3}} \
         text{{font:12px sans-serif}}</style>"
    );
    let _ = writeln!(s, "<text x=\"{MARGIN}\" y=\"20\">{}</text>", escape(title));
    let (x0, x1) = (MARGIN, WIDTH - MARGIN);
    let (y0, y1) = (MARGIN, HEIGHT - MARGIN);
    let _ =
        writeln!(s, "<rect x=\"{x0}\" y=\"{y0}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#888\"/>", x1 - x0, y1 - y0);
    for (k, (name, first, end)) in v.phases.iter().enumerate() {
        let (ya, yb) = (f.y(f64::from(*first)), f.y(f64::from(*end)));
        if k % 2 == 0 {
            let _ =
                writeln!(s, "<rect class=\"band\" x=\"{x0}\" y=\"{ya:.2}\" width=\"{}\" height=\"{:.2}\"/>", x1 - x0, yb - ya);
        }
        let _ = writeln!(s, "<text x=\"{:.2}\" y=\"{:.2}\">{}</text>", x1 + 4.0, ya + 12.0, escape(name));
    }
    let _ = writeln!(s, "<text x=\"{x0}\" y=\"{}\">t = 1</text>", y1 + 18.0);
    let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">t = {}</text>", x1, y1 + 18.0, v.horizon);
    let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">line 1</text>", x0 - 4.0, y0 + 4.0);
    let _ = writeln!(s, "<text x=\"{}\" y=\"{y1}\" text-anchor=\"end\">{}</text>", x0 - 4.0, v.line_count);
    for (t, line, flag) in v.executed() {
        let class = if flag { "step flag" } else { "step" };
        let _ = writeln!(
            s,
            "<rect class=\"{class}\" x=\"{:.2}\" y=\"{:.2}\" width=\"2\" height=\"2\"/>",
            f.x(t) - 1.0,
            f.y(f64::from(line) + 0.5) - 1.0
        );
    }
    if let Some(other) = compare {
        for (t, (a, b)) in (1..).zip(v.lines.iter().zip(&other.lines)) {
            if a != b {
                let line = b.or(*a).unwrap_or(0);
                let _ = writeln!(
                    s,
                    "<rect class=\"diff\" x=\"{:.2}\" y=\"{:.2}\" width=\"6\" height=\"6\"/>",
                    f.x(t) - 3.0,
                    f.y(f64::from(line) + 0.5) - 3.0
                );
            }
        }
    }
    if let Some(h) = v.halt {
        let x = f.x(h);
        let _ = writeln!(s, "<line class=\"halt\" x1=\"{x:.2}\" y1=\"{y0}\" x2=\"{x:.2}\" y2=\"{y1}\"/>");
        let _ = writeln!(s, "<text x=\"{:.2}\" y=\"{}\">halt t = {h}</text>", x + 4.0, y0 - 6.0);
    }
    s.push_str("</svg>\n");
    s
}

/// Memory bits over time for a few cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryView {
    /// Row labels.
    pub names: Vec<String>,
    /// `bits[row][t]` for `t = 0..=horizon`.
    pub bits: Vec<Vec<bool>>,
}

impl MemoryView {
    /// Reads `cells` from an LP point.
    pub fn from_point(model: &LpModel, sol: &DenseAssignment, cells: &[u32]) -> Self {
        let half = Rational::new(1, 2);
        let names = cells.iter().map(|&c| model.asm.memory.cell_name(c)).collect();
        let bits = cells
            .iter()
            .map(|&cell| {
                (0..=model.horizon).map(|t| model.id(Var::B { cell, t }).is_some_and(|id| sol.value(id) > half)).collect()
            })
            .collect();
        MemoryView { names, bits }
    }

    /// Reads `cells` from an interpreter run.
    pub fn from_run(asm: &AsmProgram, trace: &Trace, cells: &[u32], horizon: u32) -> Self {
        let names = cells.iter().map(|&c| asm.memory.cell_name(c)).collect();
        let bits = cells.iter().map(|&c| (0..=horizon).map(|t| trace.bit(c, t as usize)).collect()).collect();
        MemoryView { names, bits }
    }
}

/// Heat strip per cell: a dark bar wherever the bit is 1.
pub fn render_memory_svg(view: &MemoryView, title: &str) -> String {
    let steps = view.bits.first().map_or(1, Vec::len).max(1) as f64;
    let row_h = 14.0;
    let label_w = 110.0;
    let height = MARGIN + row_h * view.bits.len() as f64 + 20.0;
    let scale = (WIDTH - label_w - 20.0) / steps;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{height}\" viewBox=\"0 0 {WIDTH} {height}\">"
    );
    let _ = writeln!(s, "<style>.one{{fill:#1f4e9c}} text{{font:11px monospace}}</style>");
    let _ = writeln!(s, "<text x=\"10\" y=\"20\">{}</text>", escape(title));
    for (r, (name, bits)) in view.names.iter().zip(&view.bits).enumerate() {
        let y = MARGIN + row_h * r as f64;
        let _ = writeln!(s, "<text x=\"10\" y=\"{:.1}\">{}</text>", y + row_h - 3.0, escape(name));
        let mut t = 0;
        while t < bits.len() {
            if !bits[t] {
                t += 1;
                continue;
            }
            let start = t;
            while t < bits.len() && bits[t] {
                t += 1;
            }
            let _ = writeln!(
                s,
                "<rect class=\"one\" x=\"{:.2}\" y=\"{:.1}\" width=\"{:.2}\" height=\"{:.1}\"/>",
                label_w + start as f64 * scale,
                y + 1.0,
                (t - start) as f64 * scale,
                row_h - 2.0
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(lines: &[Option<u32>]) -> VizTrace {
        VizTrace {
            horizon: lines.len() as u32,
            lines: lines.to_vec(),
            flags: vec![false; lines.len()],
            halt: None,
            phases: Vec::new(),
            line_count: 3,
        }
    }

    #[test]
    fn empty_plot_is_a_document() {
        let v = sample(&[]);
        let svg = render_svg(&v, "empty", None);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("class=\"step").count(), 0);
        assert_eq!(render_csv(&v), "t,line,flag\n");
    }

    #[test]
    fn one_difference() {
        let a = sample(&[Some(0), Some(1), Some(2)]);
        let mut b = a.clone();
        b.lines[1] = Some(0);
        assert!(diff_traces(&a, &a).unwrap().is_empty());
        let d = diff_traces(&a, &b).unwrap();
        assert_eq!(d.differences, vec![(2, Some(1), Some(0))]);
        assert_eq!(render_svg(&a, "x", Some(&b)).matches("class=\"diff\"").count(), 1);
        assert!(diff_traces(&a, &sample(&[Some(0)])).is_err());
        assert_eq!(render_csv(&b), "t,line,flag\n1,1,0\n2,1,0\n3,3,0\n");
    }

    #[test]
    fn csv_round_trip() {
        let asm = crate::compiler::parse_asm("word 1\ndecl input bool x\ndecl bool w\nreturn w 1\n").unwrap();
        let v = VizTrace::from_csv(&asm, "t,line,flag\n1,1,0\n2,1,1\n3,,0\n").unwrap();
        assert_eq!(v.lines, vec![Some(0), Some(0), None]);
        assert_eq!(v.flags, vec![false, true, false]);
        assert_eq!(render_csv(&v), "t,line,flag\n1,1,0\n2,1,1\n3,,0\n");
        assert!(VizTrace::from_csv(&asm, "1,2\n").is_err());
        assert!(VizTrace::from_csv(&asm, "2,1\n").is_err());
    }
}
