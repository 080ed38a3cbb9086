//! Parameter files: `key = expr` lines evaluated in order.
//!
//! Values are non-negative integers computed with arbitrary precision, so
//! an expression like `(62*n*n*n - 63*n*n)/2` never overflows while it is
//! being evaluated. The only rational-valued key is `d`, the weight of the
//! output bit in the objective.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::FrontendError;
use crate::prelude::*;
use crate::{Pos, Rational};

/// Evaluated parameters of one program instance.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamEnv {
    values: BTreeMap<String, u64>,
    order: Vec<String>,
    d: Rational,
    outputs: Vec<String>,
}

impl ParamEnv {
    /// An environment holding just the two required keys.
    pub fn new(word: u32, maxsteps: u32) -> Self {
        let mut env = ParamEnv::default();
        env.set("W", u64::from(word));
        env.set("maxsteps", u64::from(maxsteps));
        env
    }

    pub fn get(&self, key: &str) -> Option<u64> {
        self.values.get(key).copied()
    }

    /// Sets (or overrides) an integer key.
    pub fn set(&mut self, key: &str, value: u64) {
        if self.values.insert(key.to_string(), value).is_none() {
            self.order.push(key.to_string());
        }
    }

    /// Removes a key, returning its old value.
    pub fn remove(&mut self, key: &str) -> Option<u64> {
        let old = self.values.remove(key);
        if old.is_some() {
            self.order.retain(|k| k != key);
        }
        old
    }

    /// Word size `W` in bits.
    pub fn word(&self) -> u32 {
        self.get("W").unwrap_or(1) as u32
    }

    /// Step budget, which is also the LP horizon.
    pub fn maxsteps(&self) -> u32 {
        self.get("maxsteps").unwrap_or(1) as u32
    }

    /// Weight of the output bit in the objective (0 when unset).
    pub fn d(&self) -> Rational {
        self.d
    }

    pub fn set_d(&mut self, d: Rational) {
        self.d = d;
    }

    /// Variables listed by `output` directives, in order.
    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    /// Integer keys in definition order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> + '_ {
        self.order.iter().map(move |k| (k.as_str(), self.values[k]))
    }

    /// Keys starting with `prefix`, with the prefix stripped.
    pub fn with_prefix<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = (&'a str, u64)> + 'a {
        self.iter().filter_map(move |(k, v)| k.strip_prefix(prefix).map(|rest| (rest, v)))
    }

    /// Evaluates an integer expression over the current keys.
    pub fn eval(&self, expr: &str, pos: Pos) -> Result<u64, FrontendError> {
        let value = Evaluator::new(expr, pos, self, true)?.run()?;
        to_u64(&value, pos, expr)
    }

    /// Replaces every `$$expr$$` in `src` with the expression's value.
    pub fn substitute(&self, src: &str) -> Result<String, FrontendError> {
        let mut out = String::with_capacity(src.len());
        for (lineno, line) in src.split_inclusive('\n').enumerate() {
            let mut rest = line;
            let mut col = 1u32;
            while let Some(start) = rest.find("$$") {
                out.push_str(&rest[..start]);
                col += start as u32;
                let after = &rest[start + 2..];
                let pos = Pos::new(lineno as u32 + 1, col);
                let end =
                    after.find("$$").ok_or_else(|| FrontendError::Syntax { pos, msg: "unterminated `$$` expression".into() })?;
                let value = self.eval(&after[..end], pos)?;
                out.push_str(&value.to_string());
                col += end as u32 + 4;
                rest = &after[end + 2..];
            }
            out.push_str(rest);
        }
        Ok(out)
    }
}

/// Parses a parameter file. `W` and `maxsteps` are required and must be at
/// least 1; `d` must lie in `[0, 1/2]`.
pub fn parse_params(text: &str) -> Result<ParamEnv, FrontendError> {
    let mut env = ParamEnv::default();
    let mut seen_d = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let lineno = i as u32 + 1;
        let indent = (line.len() - line.trim_start().len()) as u32;
        let pos = Pos::new(lineno, indent + 1);
        if let Some(list) = trimmed.strip_prefix("output").filter(|r| r.starts_with(char::is_whitespace)) {
            for name in list.split(',') {
                let name = name.trim();
                if !is_ident(name) {
                    return Err(param_err(pos, format!("bad output name `{name}`")));
                }
                env.outputs.push(name.to_string());
            }
            continue;
        }
        let (key, expr) = trimmed.split_once('=').ok_or_else(|| param_err(pos, "expected `key = expression`".into()))?;
        let key = key.trim();
        if !is_key(key) {
            return Err(param_err(pos, format!("bad key `{key}`")));
        }
        let epos = Pos::new(lineno, indent + 1 + (trimmed.find('=').unwrap_or(0) as u32) + 1);
        if key == "d" {
            let value = Evaluator::new(expr, epos, &env, false)?.run()?;
            if value.is_negative() {
                return Err(param_err(epos, format!("d = {value} is negative")));
            }
            let n = value.numer().to_i128();
            let dd = value.denom().to_i128();
            env.d = match (n, dd) {
                (Some(n), Some(dd)) => Rational::new(n, dd),
                _ => return Err(param_err(epos, "d has too many digits".into())),
            };
            seen_d = true;
            continue;
        }
        let value = env.eval(expr, epos)?;
        if env.values.contains_key(key) {
            return Err(param_err(pos, format!("`{key}` is defined twice")));
        }
        env.set(key, value);
    }
    for key in ["W", "maxsteps"] {
        match env.get(key) {
            None => return Err(FrontendError::MissingParam(key.into())),
            Some(0) => return Err(param_err(Pos::default(), format!("`{key}` must be at least 1"))),
            Some(_) => {}
        }
    }
    if env.get("W").unwrap_or(0) > 32 {
        return Err(param_err(Pos::default(), "W larger than 32 is not supported".into()));
    }
    if env.get("maxsteps").unwrap_or(0) > u64::from(u32::MAX / 2) {
        return Err(param_err(Pos::default(), "maxsteps is too large".into()));
    }
    if seen_d && env.d > Rational::new(1, 2) {
        return Err(param_err(Pos::default(), "d must lie in [0, 1/2]".into()));
    }
    Ok(env)
}

fn param_err(pos: Pos, msg: String) -> FrontendError {
    FrontendError::Param { pos, msg }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_') && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn is_key(s: &str) -> bool {
    !s.is_empty()
        && s.split('.').all(|part| is_ident(part) || part.bytes().all(|b| b.is_ascii_digit()) && !part.is_empty())
        && is_ident(s.split('.').next().unwrap_or(""))
}

fn to_u64(value: &BigRational, pos: Pos, expr: &str) -> Result<u64, FrontendError> {
    if value.is_negative() {
        return Err(param_err(pos, format!("`{}` evaluates to {value}, which is negative", expr.trim())));
    }
    value.to_integer().to_u64().ok_or_else(|| param_err(pos, format!("`{}` does not fit in 64 bits", expr.trim())))
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Name(String),
    Op(char),
}

/// Precedence-climbing evaluator. In integer mode every division must be
/// exact; otherwise values are rationals.
struct Evaluator<'a> {
    toks: Vec<Tok>,
    at: usize,
    pos: Pos,
    env: &'a ParamEnv,
    integer: bool,
}

impl<'a> Evaluator<'a> {
    fn new(src: &str, pos: Pos, env: &'a ParamEnv, integer: bool) -> Result<Self, FrontendError> {
        let mut toks = Vec::new();
        let bytes = src.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i] as char;
            if c.is_ascii_whitespace() {
                i += 1;
            } else if c.is_ascii_digit() {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = src[start..i].parse().map_err(|_| param_err(pos, "bad number".into()))?;
                toks.push(Tok::Num(n));
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'.') {
                    i += 1;
                }
                toks.push(Tok::Name(src[start..i].to_string()));
            } else if "+-*/()".contains(c) {
                toks.push(Tok::Op(c));
                i += 1;
            } else {
                return Err(param_err(pos, format!("unexpected character `{c}` in expression")));
            }
        }
        if toks.is_empty() {
            return Err(param_err(pos, "empty expression".into()));
        }
        Ok(Evaluator { toks, at: 0, pos, env, integer })
    }

    fn run(mut self) -> Result<BigRational, FrontendError> {
        let v = self.sum()?;
        if self.at != self.toks.len() {
            return Err(param_err(self.pos, "trailing input in expression".into()));
        }
        Ok(v)
    }

    fn peek_op(&self) -> Option<char> {
        match self.toks.get(self.at) {
            Some(Tok::Op(c)) => Some(*c),
            _ => None,
        }
    }

    fn sum(&mut self) -> Result<BigRational, FrontendError> {
        let mut acc = self.product()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.at += 1;
            let rhs = self.product()?;
            acc = if op == '+' { acc + rhs } else { acc - rhs };
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<BigRational, FrontendError> {
        let mut acc = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.at += 1;
            let rhs = self.unary()?;
            if op == '*' {
                acc *= rhs;
            } else {
                if rhs.is_zero() {
                    return Err(param_err(self.pos, "division by zero".into()));
                }
                acc /= rhs;
                if self.integer && !acc.is_integer() {
                    return Err(param_err(self.pos, "division is not exact".into()));
                }
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<BigRational, FrontendError> {
        if self.peek_op() == Some('-') {
            self.at += 1;
            return Ok(-self.unary()?);
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<BigRational, FrontendError> {
        let tok = self.toks.get(self.at).cloned();
        self.at += 1;
        match tok {
            Some(Tok::Num(n)) => Ok(BigRational::from_integer(n)),
            Some(Tok::Name(name)) => match self.env.get(&name) {
                Some(v) => Ok(BigRational::from_integer(BigInt::from(v))),
                None => Err(FrontendError::Param { pos: self.pos, msg: format!("undefined parameter `{name}`") }),
            },
            Some(Tok::Op('(')) => {
                let v = self.sum()?;
                if self.peek_op() != Some(')') {
                    return Err(param_err(self.pos, "missing `)`".into()));
                }
                self.at += 1;
                Ok(v)
            }
            _ => Err(param_err(self.pos, "expected a number, a key or `(`".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_in_order_with_big_intermediates() {
        let env = parse_params(
            "# comment\nn = 8\nW = 4\nmaxsteps = (62*n*n*n - 63*n*n - 249*n - 64)/2\nbig = 99999999999*99999999999/99999999999\n",
        )
        .unwrap();
        assert_eq!(env.get("maxsteps"), Some(12828));
        assert_eq!(env.get("big"), Some(99_999_999_999));
        assert_eq!(env.word(), 4);
        assert_eq!(env.iter().map(|(k, _)| k).collect::<Vec<_>>(), ["n", "W", "maxsteps", "big"]);
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_params("W = 1"), Err(FrontendError::MissingParam(k)) if k == "maxsteps"));
        assert!(parse_params("W = x\nmaxsteps = 1").is_err());
        assert!(parse_params("maxsteps = 1\nW = 7/2").is_err());
        assert!(parse_params("maxsteps = 1\nW = 1 - 2").is_err());
        assert!(parse_params("maxsteps = 1\nW = 0").is_err());
        assert!(parse_params("W = 1\nmaxsteps = 1\nd = 3/4").is_err());
        assert!(parse_params("W = 1\nmaxsteps = a\na = 1").is_err());
    }

    #[test]
    fn d_outputs_and_dotted_keys() {
        let env = parse_params("W=2\nmaxsteps=10\nd = 1/3\noutput T, x\nphase.main.start = 4\nbound.while3 = W*2").unwrap();
        assert_eq!(env.d(), Rational::new(1, 3));
        assert_eq!(env.outputs(), ["T", "x"]);
        assert_eq!(env.get("phase.main.start"), Some(4));
        assert_eq!(env.with_prefix("bound.").collect::<Vec<_>>(), [("while3", 4)]);
    }

    #[test]
    fn substitution() {
        let env = parse_params("W=3\nmaxsteps=9\nm = 5").unwrap();
        assert_eq!(env.substitute("array p[$$m$$]\nx <- $$m-1$$ $$W*2$$").unwrap(), "array p[5]\nx <- 4 6");
        assert!(env.substitute("a $$m").is_err());
        assert!(env.substitute("a $$m-9$$").is_err());
    }
}
