//! Shared tokenizer for the `.pi`, `.usg` and index/type concrete syntaxes.
//!
//! `#` starts a comment running to the end of the line. Identifiers match
//! `[a-z][a-zA-Z0-9_]*`; integers are decimal.

use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(u64),
    Str(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    LAngle,
    RAngle,
    Comma,
    Dot,
    Colon,
    Semi,
    Bar,
    Plus,
    Minus,
    Star,
    Bang,
    Question,
    Slash,
    Eq,
    Le,
    Ge,
    Ne,
    Arrow, // =>
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "{s}"),
            Tok::Int(n) => write!(f, "{n}"),
            Tok::Str(s) => write!(f, "{s:?}"),
            Tok::LParen => write!(f, "("),
            Tok::RParen => write!(f, ")"),
            Tok::LBracket => write!(f, "["),
            Tok::RBracket => write!(f, "]"),
            Tok::LBrace => write!(f, "{{"),
            Tok::RBrace => write!(f, "}}"),
            Tok::LAngle => write!(f, "<"),
            Tok::RAngle => write!(f, ">"),
            Tok::Comma => write!(f, ","),
            Tok::Dot => write!(f, "."),
            Tok::Colon => write!(f, ":"),
            Tok::Semi => write!(f, ";"),
            Tok::Bar => write!(f, "|"),
            Tok::Plus => write!(f, "+"),
            Tok::Minus => write!(f, "-"),
            Tok::Star => write!(f, "*"),
            Tok::Bang => write!(f, "!"),
            Tok::Question => write!(f, "?"),
            Tok::Slash => write!(f, "/"),
            Tok::Eq => write!(f, "="),
            Tok::Le => write!(f, "<="),
            Tok::Ge => write!(f, ">="),
            Tok::Ne => write!(f, "!="),
            Tok::Arrow => write!(f, "=>"),
        }
    }
}

#[derive(Debug, Error)]
#[error("{pos}: {msg}")]
pub struct SyntaxError {
    pub pos: Pos,
    pub msg: String,
}

impl SyntaxError {
    pub fn new(pos: Pos, msg: impl Into<String>) -> Self {
        SyntaxError {
            pos,
            msg: msg.into(),
        }
    }
}

struct Scanner<'a> {
    src: std::str::Chars<'a>,
    look: Option<char>,
    line: u32,
    col: u32,
}

impl<'a> Scanner<'a> {
    fn new(src: &'a str) -> Self {
        let mut src = src.chars();
        let look = src.next();
        Scanner {
            src,
            look,
            line: 1,
            col: 1,
        }
    }

    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn peek(&self) -> Option<char> {
        self.look
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.look?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        self.look = self.src.next();
        Some(c)
    }
}

pub fn tokenize(src: &str) -> Result<Vec<(Tok, Pos)>, SyntaxError> {
    let mut sc = Scanner::new(src);
    let mut toks = Vec::new();
    while let Some(c) = sc.peek() {
        let pos = sc.pos();
        match c {
            c if c.is_whitespace() => {
                sc.bump();
            }
            '#' => {
                while let Some(c) = sc.peek() {
                    if c == '\n' {
                        break;
                    }
                    sc.bump();
                }
            }
            '"' => {
                sc.bump();
                let mut s = String::new();
                loop {
                    match sc.peek() {
                        None => return Err(SyntaxError::new(pos, "unterminated string")),
                        Some('"') => {
                            sc.bump();
                            break;
                        }
                        Some('\\') => {
                            sc.bump();
                            match sc.bump() {
                                Some('"') => s.push('"'),
                                Some('\\') => s.push('\\'),
                                Some('n') => s.push('\n'),
                                _ => return Err(SyntaxError::new(pos, "bad escape in string")),
                            }
                        }
                        Some(_) => s.push(sc.bump().unwrap()),
                    }
                }
                toks.push((Tok::Str(s), pos));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(c) = sc.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        s.push(sc.bump().unwrap());
                    } else {
                        break;
                    }
                }
                toks.push((Tok::Ident(s), pos));
            }
            c if c.is_ascii_digit() => {
                let mut n: u64 = 0;
                while let Some(c) = sc.peek() {
                    if let Some(d) = c.to_digit(10) {
                        n = n
                            .checked_mul(10)
                            .and_then(|n| n.checked_add(d as u64))
                            .ok_or_else(|| SyntaxError::new(pos, "integer literal too large"))?;
                        sc.bump();
                    } else {
                        break;
                    }
                }
                toks.push((Tok::Int(n), pos));
            }
            _ => {
                let c = sc.bump().unwrap();
                let tok = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    ',' => Tok::Comma,
                    '.' => Tok::Dot,
                    ':' => Tok::Colon,
                    ';' => Tok::Semi,
                    '|' => Tok::Bar,
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '?' => Tok::Question,
                    '/' => Tok::Slash,
                    '!' => {
                        if sc.peek() == Some('=') {
                            sc.bump();
                            Tok::Ne
                        } else {
                            Tok::Bang
                        }
                    }
                    '=' => {
                        if sc.peek() == Some('>') {
                            sc.bump();
                            Tok::Arrow
                        } else {
                            Tok::Eq
                        }
                    }
                    '<' => {
                        if sc.peek() == Some('=') {
                            sc.bump();
                            Tok::Le
                        } else {
                            Tok::LAngle
                        }
                    }
                    '>' => {
                        if sc.peek() == Some('=') {
                            sc.bump();
                            Tok::Ge
                        } else {
                            Tok::RAngle
                        }
                    }
                    other => {
                        return Err(SyntaxError::new(
                            pos,
                            format!("unexpected character {other:?}"),
                        ))
                    }
                };
                toks.push((tok, pos));
            }
        }
    }
    Ok(toks)
}

/// Cursor over a token stream with one-token lookahead, shared by all parsers.
pub struct Cursor {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    end: Pos,
}

impl Cursor {
    pub fn new(src: &str) -> Result<Self, SyntaxError> {
        let toks = tokenize(src)?;
        let end = toks
            .last()
            .map(|(_, p)| Pos {
                line: p.line,
                col: p.col + 1,
            })
            .unwrap_or(Pos { line: 1, col: 1 });
        Ok(Cursor { toks, at: 0, end })
    }

    pub fn pos(&self) -> Pos {
        self.toks.get(self.at).map(|(_, p)| *p).unwrap_or(self.end)
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    pub fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.at + 1).map(|(t, _)| t)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(t, _)| t.clone());
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    pub fn eat(&mut self, want: &Tok) -> bool {
        if self.peek() == Some(want) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, want: &Tok) -> Result<(), SyntaxError> {
        let pos = self.pos();
        match self.next() {
            Some(t) if &t == want => Ok(()),
            Some(t) => Err(SyntaxError::new(
                pos,
                format!("expected `{want}`, found `{t}`"),
            )),
            None => Err(SyntaxError::new(
                pos,
                format!("expected `{want}`, found end of input"),
            )),
        }
    }

    pub fn expect_ident(&mut self) -> Result<String, SyntaxError> {
        let pos = self.pos();
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s),
            Some(t) => Err(SyntaxError::new(
                pos,
                format!("expected identifier, found `{t}`"),
            )),
            None => Err(SyntaxError::new(
                pos,
                "expected identifier, found end of input",
            )),
        }
    }

    pub fn expect_int(&mut self) -> Result<u64, SyntaxError> {
        let pos = self.pos();
        match self.next() {
            Some(Tok::Int(n)) => Ok(n),
            Some(t) => Err(SyntaxError::new(
                pos,
                format!("expected integer, found `{t}`"),
            )),
            None => Err(SyntaxError::new(
                pos,
                "expected integer, found end of input",
            )),
        }
    }

    pub fn expect_end(&self) -> Result<(), SyntaxError> {
        if self.at < self.toks.len() {
            let (t, p) = &self.toks[self.at];
            Err(SyntaxError::new(*p, format!("unexpected trailing `{t}`")))
        } else {
            Ok(())
        }
    }

    pub fn error(&self, msg: impl Into<String>) -> SyntaxError {
        SyntaxError::new(self.pos(), msg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizes_pi_syntax() {
        let toks = tokenize("tick.a?(x1).0 # comment\n!b?()").unwrap();
        let kinds: Vec<Tok> = toks.into_iter().map(|(t, _)| t).collect();
        assert_eq!(
            kinds,
            vec![
                Tok::Ident("tick".into()),
                Tok::Dot,
                Tok::Ident("a".into()),
                Tok::Question,
                Tok::LParen,
                Tok::Ident("x1".into()),
                Tok::RParen,
                Tok::Dot,
                Tok::Int(0),
                Tok::Bang,
                Tok::Ident("b".into()),
                Tok::Question,
                Tok::LParen,
                Tok::RParen,
            ]
        );
    }

    #[test]
    fn splits_compound_operators() {
        let toks = tokenize("<= >= != => < > = !").unwrap();
        let kinds: Vec<Tok> = toks.into_iter().map(|(t, _)| t).collect();
        assert_eq!(
            kinds,
            vec![
                Tok::Le,
                Tok::Ge,
                Tok::Ne,
                Tok::Arrow,
                Tok::LAngle,
                Tok::RAngle,
                Tok::Eq,
                Tok::Bang
            ]
        );
    }

    #[test]
    fn reports_position() {
        let err = tokenize("a\n  @").unwrap_err();
        assert_eq!((err.pos.line, err.pos.col), (2, 3));
    }
}
