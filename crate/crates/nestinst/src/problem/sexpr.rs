//! Minimal s-expression reader with line/column tracking. Identifiers may
//! contain primes, so there is no quote syntax; `;` starts a line comment.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExpr {
    Atom { text: String, line: usize, col: usize },
    List { items: Vec<SExpr>, line: usize, col: usize },
}

impl SExpr {
    pub fn pos(&self) -> (usize, usize) {
        match self {
            SExpr::Atom { line, col, .. } | SExpr::List { line, col, .. } => (*line, *col),
        }
    }

    pub fn atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom { text, .. } => Some(text),
            SExpr::List { .. } => None,
        }
    }

    pub fn items(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List { items, .. } => Some(items),
            SExpr::Atom { .. } => None,
        }
    }

    pub fn err(&self, msg: impl Into<String>) -> Error {
        let (line, col) = self.pos();
        Error::Parse { line, col, msg: msg.into() }
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    col: usize,
}

#[derive(Debug, Clone)]
enum Token {
    Open(usize, usize),
    Close(usize, usize),
    Atom(String, usize, usize),
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src, pos: 0, line: 1, col: 1 }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.src[self.pos..].chars().next()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn next_token(&mut self) -> Result<Option<Token>> {
        loop {
            match self.peek() {
                None => return Ok(None),
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some(';') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                Some('(') => {
                    let (l, c) = (self.line, self.col);
                    self.bump();
                    return Ok(Some(Token::Open(l, c)));
                }
                Some(')') => {
                    let (l, c) = (self.line, self.col);
                    self.bump();
                    return Ok(Some(Token::Close(l, c)));
                }
                Some(_) => {
                    let (l, c) = (self.line, self.col);
                    let start = self.pos;
                    while let Some(ch) = self.peek() {
                        if ch.is_whitespace() || ch == '(' || ch == ')' || ch == ';' {
                            break;
                        }
                        self.bump();
                    }
                    let text = self.src[start..self.pos].to_string();
                    return Ok(Some(Token::Atom(text, l, c)));
                }
            }
        }
    }
}

/// Parses a complete source into its top-level expressions.
pub fn parse_all(src: &str) -> Result<Vec<SExpr>> {
    let mut lexer = Lexer::new(src);
    let mut stack: Vec<(Vec<SExpr>, usize, usize)> = Vec::new();
    let mut top: Vec<SExpr> = Vec::new();
    while let Some(tok) = lexer.next_token()? {
        match tok {
            Token::Open(l, c) => stack.push((Vec::new(), l, c)),
            Token::Close(l, c) => {
                let Some((items, ol, oc)) = stack.pop() else {
                    return Err(Error::Parse { line: l, col: c, msg: "unmatched `)`".into() });
                };
                let list = SExpr::List { items, line: ol, col: oc };
                match stack.last_mut() {
                    Some((parent, _, _)) => parent.push(list),
                    None => top.push(list),
                }
            }
            Token::Atom(text, l, c) => {
                let atom = SExpr::Atom { text, line: l, col: c };
                match stack.last_mut() {
                    Some((parent, _, _)) => parent.push(atom),
                    None => top.push(atom),
                }
            }
        }
    }
    if let Some((_, l, c)) = stack.pop() {
        return Err(Error::Parse { line: l, col: c, msg: "unclosed `(`".into() });
    }
    Ok(top)
}

/// Parses a source expected to hold exactly one expression.
pub fn parse_one(src: &str) -> Result<SExpr> {
    let mut all = parse_all(src)?;
    match all.len() {
        1 => Ok(all.remove(0)),
        0 => Err(Error::Parse { line: 1, col: 1, msg: "empty input".into() }),
        _ => Err(all[1].err("trailing content after the problem")),
    }
}
