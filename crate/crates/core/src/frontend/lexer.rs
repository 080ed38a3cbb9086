use super::FrontendError;
use crate::prelude::*;
use crate::Pos;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(super) enum Tok {
    Ident(String),
    Int(u64),
    /// Reserved word.
    Kw(&'static str),
    /// Punctuation or operator.
    Sym(&'static str),
    Eof,
}

const KEYWORDS: &[&str] = &[
    "input", "bool", "int", "array", "matrix", "if", "then", "else", "endif", "while", "do", "done", "for", "phase", "return",
    "and", "or", "xor", "eq", "inc", "dec",
];

// Longest match first.
const SYMBOLS: &[&str] = &["<-", "++", "[[", "]]", "!=", "[", "]", "(", ")", ",", "@", "*", "!", "=", "<", "+", "{", "}"];

pub(super) fn tokenize(src: &str) -> Result<Vec<(Tok, Pos)>, FrontendError> {
    let mut out = Vec::new();
    let bytes = src.as_bytes();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    while i < bytes.len() {
        let c = bytes[i];
        let pos = Pos::new(line, col);
        if c == b'\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n = src[start..i]
                .parse()
                .map_err(|_| FrontendError::Syntax { pos, msg: format!("integer `{}` is too large", &src[start..i]) })?;
            out.push((Tok::Int(n), pos));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let word = &src[start..i];
            let tok = match KEYWORDS.iter().find(|k| **k == word) {
                Some(k) => Tok::Kw(k),
                None => Tok::Ident(word.to_string()),
            };
            out.push((tok, pos));
        } else if let Some(sym) = SYMBOLS.iter().find(|s| src[i..].starts_with(**s)) {
            i += sym.len();
            out.push((Tok::Sym(sym), pos));
        } else {
            let ch = src[i..].chars().next().unwrap_or('?');
            return Err(FrontendError::Syntax { pos, msg: format!("unexpected character `{ch}`") });
        }
        col += (i - start) as u32;
    }
    out.push((Tok::Eof, Pos::new(line, col)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_and_positions() {
        let toks = tokenize("x <- a[[i]] # note\n  k++ != 3").unwrap();
        let kinds: Vec<_> = toks.iter().map(|(t, _)| t.clone()).collect();
        assert_eq!(
            kinds,
            [
                Tok::Ident("x".into()),
                Tok::Sym("<-"),
                Tok::Ident("a".into()),
                Tok::Sym("[["),
                Tok::Ident("i".into()),
                Tok::Sym("]]"),
                Tok::Ident("k".into()),
                Tok::Sym("++"),
                Tok::Sym("!="),
                Tok::Int(3),
                Tok::Eof,
            ]
        );
        assert_eq!(toks[6].1, Pos::new(2, 3));
        assert!(tokenize("x ~ y").is_err());
    }
}
