//! Solver solutions as dense exact assignments.
//!
//! Accepted formats:
//!
//! * generic: one `name value` pair per line, `#` comments,
//! * GLPK printable output (`glpsol -o`),
//! * CPLEX XML solution files (`<variable name=".." value=".."/>`),
//! * CBC solution files (`index name value reduced-cost`).
//!
//! Names may be LP names (`S_3_7`) or MPS column names (`C1a`). Values are
//! read exactly; variables that are not mentioned are 0.

use num_traits::{One, Signed, Zero};

use super::HarnessError;
use crate::lpgen::{parse_column_name, BitPoint, LpModel, Var, VarId};
use crate::prelude::*;
use crate::rational::{is_binary, parse_decimal};
use crate::Rational;

/// Values of all model variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Values {
    /// Exact 0/1 point, e.g. an embedded trace.
    Binary(BitPoint),
    Rational(Vec<Rational>),
}

/// A full assignment plus where it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseAssignment {
    pub values: Values,
    /// Solver name, file name or `trace`.
    pub provenance: String,
}

impl DenseAssignment {
    pub fn from_point(point: BitPoint, provenance: &str) -> Self {
        DenseAssignment { values: Values::Binary(point), provenance: provenance.to_string() }
    }

    pub fn len(&self) -> u64 {
        match &self.values {
            Values::Binary(p) => p.len(),
            Values::Rational(v) => v.len() as u64,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn value(&self, id: VarId) -> Rational {
        match &self.values {
            Values::Binary(p) => Rational::from_integer(i128::from(p.get(id))),
            Values::Rational(v) => v[id as usize],
        }
    }

    /// The nearest 0/1 point if every value is within `tol` of 0 or 1.
    pub fn snapped(&self, tol: Rational) -> Option<BitPoint> {
        match &self.values {
            Values::Binary(p) => Some(p.clone()),
            Values::Rational(v) => {
                let mut p = BitPoint::zeros(v.len() as u64);
                for (id, x) in v.iter().enumerate() {
                    if (x - Rational::one()).abs() <= tol {
                        p.set(id as VarId, true);
                    } else if x.abs() > tol {
                        return None;
                    }
                }
                Some(p)
            }
        }
    }

    /// Whether every value is exactly 0 or 1.
    pub fn is_binary(&self) -> bool {
        match &self.values {
            Values::Binary(_) => true,
            Values::Rational(v) => v.iter().all(is_binary),
        }
    }
}

/// Recognized solution file layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionFormat {
    Generic,
    Glpk,
    CplexXml,
    Cbc,
}

impl SolutionFormat {
    /// Guesses the format from the text.
    pub fn detect(text: &str) -> Self {
        let head = text.trim_start();
        if head.starts_with("<?xml") || head.starts_with("<CPLEXSolution") {
            SolutionFormat::CplexXml
        } else if head.starts_with("Problem:") || text.contains("Column name") {
            SolutionFormat::Glpk
        } else if ["Optimal", "Infeasible", "Unbounded", "Stopped"].iter().any(|s| head.starts_with(s)) {
            SolutionFormat::Cbc
        } else {
            SolutionFormat::Generic
        }
    }
}

fn lookup(model: &LpModel, name: &str, line: usize) -> Result<VarId, HarnessError> {
    Var::parse(name)
        .and_then(|v| model.id(v))
        .or_else(|| parse_column_name(name).filter(|&id| u64::from(id) < model.var_count()))
        .ok_or_else(|| HarnessError::UnknownVariable { name: name.to_string(), line })
}

fn number(s: &str, line: usize) -> Result<Rational, HarnessError> {
    parse_decimal(s).map_err(|e| HarnessError::Malformed { line, msg: e.to_string() })
}

/// Parses solver output for `model`.
pub fn parse_solution(text: &str, model: &LpModel, provenance: &str) -> Result<DenseAssignment, HarnessError> {
    let pairs = match SolutionFormat::detect(text) {
        SolutionFormat::Generic => generic(text)?,
        SolutionFormat::Glpk => glpk(text)?,
        SolutionFormat::CplexXml => cplex_xml(text)?,
        SolutionFormat::Cbc => cbc(text)?,
    };
    if pairs.is_empty() {
        return Err(HarnessError::EmptySolution);
    }
    let mut values = vec![Rational::zero(); model.var_count() as usize];
    for (line, name, v) in pairs {
        let id = lookup(model, &name, line)?;
        values[id as usize] = number(&v, line)?;
    }
    Ok(DenseAssignment { values: Values::Rational(values), provenance: provenance.to_string() })
}

type Pairs = Vec<(usize, String, String)>;

fn generic(text: &str) -> Result<Pairs, HarnessError> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        match (it.next(), it.next(), it.next()) {
            (Some(n), Some(v), None) => out.push((k + 1, n.to_string(), v.to_string())),
            _ => return Err(HarnessError::Malformed { line: k + 1, msg: "expected `name value`".into() }),
        }
    }
    Ok(out)
}

fn glpk(text: &str) -> Result<Pairs, HarnessError> {
    let mut out = Vec::new();
    let mut lines = text.lines().enumerate().skip_while(|(_, l)| !l.contains("Column name"));
    lines.next();
    lines.next(); // dashes
    let mut pending: Option<String> = None;
    for (k, l) in lines {
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.is_empty() {
            break;
        }
        let (name, rest) = match pending.take() {
            Some(n) => (n, &toks[..]),
            None => {
                if toks[0].parse::<u64>().is_err() {
                    break;
                }
                if toks.len() == 2 {
                    // long name: values on the next line
                    pending = Some(toks[1].to_string());
                    continue;
                }
                (toks[1].to_string(), &toks[2..])
            }
        };
        // status column (B, NL, NU, NS, NF, or `*` for integer columns)
        let value = rest.iter().find(|t| parse_decimal(t).is_ok());
        match value {
            Some(v) => out.push((k + 1, name, v.to_string())),
            None => return Err(HarnessError::Malformed { line: k + 1, msg: "no activity value".into() }),
        }
    }
    Ok(out)
}

fn attr<'a>(tag: &'a str, key: &str) -> Option<&'a str> {
    let pat = format!(" {key}=\"");
    let start = tag.find(&pat)? + pat.len();
    let end = tag[start..].find('"')? + start;
    Some(&tag[start..end])
}

fn cplex_xml(text: &str) -> Result<Pairs, HarnessError> {
    let mut out = Vec::new();
    for (k, l) in text.lines().enumerate() {
        for tag in l.split('<').filter(|t| t.starts_with("variable ")) {
            match (attr(tag, "name"), attr(tag, "value")) {
                (Some(n), Some(v)) => out.push((k + 1, n.to_string(), v.to_string())),
                _ => return Err(HarnessError::Malformed { line: k + 1, msg: "variable without name or value".into() }),
            }
        }
    }
    Ok(out)
}

fn cbc(text: &str) -> Result<Pairs, HarnessError> {
    let mut out = Vec::new();
    for (k, l) in text.lines().enumerate().skip(1) {
        let toks: Vec<&str> = l.split_whitespace().filter(|t| *t != "**").collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() < 3 || toks[0].parse::<u64>().is_err() {
            return Err(HarnessError::Malformed { line: k + 1, msg: "expected `index name value`".into() });
        }
        out.push((k + 1, toks[1].to_string(), toks[2].to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_formats() {
        assert_eq!(SolutionFormat::detect("S_1_1 1\n"), SolutionFormat::Generic);
        assert_eq!(SolutionFormat::detect("<?xml version=\"1.0\"?>"), SolutionFormat::CplexXml);
        assert_eq!(SolutionFormat::detect("Problem:    x\nRows: 3"), SolutionFormat::Glpk);
        assert_eq!(SolutionFormat::detect("Optimal - objective value 2"), SolutionFormat::Cbc);
    }

    #[test]
    fn glpk_long_names() {
        let text = "Problem:\n\n   No. Column name  St   Activity     Lower bound   Upper bound    Marginal\n\
                    ------ ------------ -- ------------- ------------- ------------- -------------\n\
                    \x20    1 B_0_0        B              1             0             1\n\
                    \x20    2 A_12_100_3\n\
                    \x20                   NL             0             0             1         < eps\n\n";
        let p = glpk(text).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!((p[0].1.as_str(), p[0].2.as_str()), ("B_0_0", "1"));
        assert_eq!((p[1].1.as_str(), p[1].2.as_str()), ("A_12_100_3", "0"));
    }

    #[test]
    fn cplex_and_cbc() {
        let x = "<?xml version = \"1.0\"?>\n<CPLEXSolution>\n <variables>\n  <variable name=\"S_1_1\" index=\"0\" value=\"1\"/>\n </variables>\n</CPLEXSolution>\n";
        assert_eq!(cplex_xml(x).unwrap()[0].2, "1");
        let c = "Optimal - objective value 2.00000000\n      0 S_1_1        1       0\n      1 B_0_0        0.5     0\n";
        let p = cbc(c).unwrap();
        assert_eq!(p[1].2, "0.5");
        assert!(generic("a 1 2").is_err());
    }
}
