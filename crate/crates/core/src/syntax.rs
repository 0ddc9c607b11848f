//! Tokenizer shared by the fact, clause and property readers.
//!
//! All three input languages are Prolog-flavoured: lowercase symbols,
//! uppercase variables, integer literals, `%` line comments.

use std::fmt;

use thiserror::Error;

/// Source position, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {message}")]
pub struct SyntaxError {
    pub pos: Pos,
    pub message: String,
}

impl SyntaxError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        SyntaxError {
            pos,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    /// Lowercase-initial identifier.
    Symbol(String),
    /// Uppercase- or underscore-initial identifier.
    Variable(String),
    Int(i64),
    Neck,
    Comma,
    Dot,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Plus,
    Minus,
    Star,
    Eq,
    Ne,
    Le,
    Ge,
    Lt,
    Gt,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Symbol(s) | Tok::Variable(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Neck => f.write_str("`:-`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Ne => f.write_str("`\\=`"),
            Tok::Le => f.write_str("`=<`"),
            Tok::Ge => f.write_str("`>=`"),
            Tok::Lt => f.write_str("`<`"),
            Tok::Gt => f.write_str("`>`"),
        }
    }
}

pub fn tokenize(src: &str) -> Result<Vec<(Tok, Pos)>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i, &mut col);
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = if c.is_ascii_lowercase() {
                Tok::Symbol(word)
            } else {
                Tok::Variable(word)
            };
            out.push((tok, pos));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            col += i - start;
            let n = digits.parse::<i64>().map_err(|_| {
                SyntaxError::new(pos, format!("integer literal `{digits}` out of range"))
            })?;
            out.push((Tok::Int(n), pos));
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        let (tok, len) = if rest.starts_with("=\\=") {
            (Tok::Ne, 3)
        } else if rest.starts_with(":-") {
            (Tok::Neck, 2)
        } else if rest.starts_with("\\=") {
            (Tok::Ne, 2)
        } else if rest.starts_with("=<") || rest.starts_with("<=") {
            (Tok::Le, 2)
        } else if rest.starts_with(">=") {
            (Tok::Ge, 2)
        } else {
            let t = match c {
                ',' => Tok::Comma,
                '.' => Tok::Dot,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '=' => Tok::Eq,
                '<' => Tok::Lt,
                '>' => Tok::Gt,
                other => {
                    return Err(SyntaxError::new(
                        pos,
                        format!("unexpected character `{other}`"),
                    ))
                }
            };
            (t, 1)
        };
        out.push((tok, pos));
        advance(len, &mut i, &mut col);
    }
    Ok(out)
}

/// Cursor over a token stream with the usual expect/peek helpers.
pub struct Cursor {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    end: Pos,
}

impl Cursor {
    pub fn new(src: &str) -> Result<Self, SyntaxError> {
        let toks = tokenize(src)?;
        let lines = src.lines().count().max(1);
        let last_len = src.lines().last().map_or(0, |l| l.chars().count());
        Ok(Cursor {
            toks,
            at: 0,
            end: Pos {
                line: lines,
                col: last_len + 1,
            },
        })
    }

    pub fn at_end(&self) -> bool {
        self.at >= self.toks.len()
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    pub fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.at + 1).map(|(t, _)| t)
    }

    pub fn pos(&self) -> Pos {
        self.toks.get(self.at).map_or(self.end, |(_, p)| *p)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn next(&mut self) -> Option<(Tok, Pos)> {
        let t = self.toks.get(self.at).cloned();
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: &Tok) -> Result<Pos, SyntaxError> {
        let pos = self.pos();
        match self.next() {
            Some((t, p)) if &t == tok => Ok(p),
            Some((t, p)) => Err(SyntaxError::new(p, format!("expected {tok}, found {t}"))),
            None => Err(SyntaxError::new(
                pos,
                format!("expected {tok}, found end of input"),
            )),
        }
    }

    pub fn symbol(&mut self) -> Result<(String, Pos), SyntaxError> {
        let pos = self.pos();
        match self.next() {
            Some((Tok::Symbol(s), p)) => Ok((s, p)),
            Some((t, p)) => Err(SyntaxError::new(
                p,
                format!("expected identifier, found {t}"),
            )),
            None => Err(SyntaxError::new(
                pos,
                "expected identifier, found end of input",
            )),
        }
    }

    pub fn variable(&mut self) -> Result<(String, Pos), SyntaxError> {
        let pos = self.pos();
        match self.next() {
            Some((Tok::Variable(s), p)) => Ok((s, p)),
            Some((t, p)) => Err(SyntaxError::new(p, format!("expected variable, found {t}"))),
            None => Err(SyntaxError::new(
                pos,
                "expected variable, found end of input",
            )),
        }
    }

    /// Optionally signed integer literal.
    pub fn int(&mut self) -> Result<(i64, Pos), SyntaxError> {
        let pos = self.pos();
        let neg = self.eat(&Tok::Minus);
        match self.next() {
            Some((Tok::Int(n), _)) => Ok((if neg { -n } else { n }, pos)),
            Some((t, p)) => Err(SyntaxError::new(p, format!("expected integer, found {t}"))),
            None => Err(SyntaxError::new(
                pos,
                "expected integer, found end of input",
            )),
        }
    }

    pub fn error(&self, message: impl Into<String>) -> SyntaxError {
        SyntaxError::new(self.pos(), message)
    }
}
