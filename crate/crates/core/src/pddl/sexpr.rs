//! Tokenizer and s-expression reader for PDDL source text.

use super::PddlError;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExpr {
    /// A symbol, lower-cased on read.
    Atom(String, Pos),
    List(Vec<SExpr>, Pos),
}

impl SExpr {
    pub fn pos(&self) -> Pos {
        match self {
            SExpr::Atom(_, p) | SExpr::List(_, p) => *p,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom(s, _) => Some(s),
            SExpr::List(..) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(items, _) => Some(items),
            SExpr::Atom(..) => None,
        }
    }

    /// The head symbol of a list, if it has one.
    pub fn head(&self) -> Option<&str> {
        self.as_list()
            .and_then(|items| items.first())
            .and_then(SExpr::as_atom)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Open(Pos),
    Close(Pos),
    Symbol(String, Pos),
}

fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut line = 1;
    let mut col = 1;
    let mut chars = text.chars().peekable();
    let mut current: Option<(String, Pos)> = None;

    let flush = |current: &mut Option<(String, Pos)>, tokens: &mut Vec<Token>| {
        if let Some((s, p)) = current.take() {
            tokens.push(Token::Symbol(s.to_lowercase(), p));
        }
    };

    while let Some(c) = chars.next() {
        let pos = Pos { line, col };
        match c {
            '(' => {
                flush(&mut current, &mut tokens);
                tokens.push(Token::Open(pos));
            }
            ')' => {
                flush(&mut current, &mut tokens);
                tokens.push(Token::Close(pos));
            }
            ';' => {
                flush(&mut current, &mut tokens);
                for c in chars.by_ref() {
                    if c == '\n' {
                        line += 1;
                        col = 0;
                        break;
                    }
                }
            }
            c if c.is_whitespace() => flush(&mut current, &mut tokens),
            c => match current.as_mut() {
                Some((s, _)) => s.push(c),
                None => current = Some((c.to_string(), pos)),
            },
        }
        if c == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    flush(&mut current, &mut tokens);
    tokens
}

/// Reads the first complete top-level form of `text`.
///
/// Trailing unmatched `)` characters after the form are tolerated; any other
/// trailing content is a syntax error.
pub fn parse(text: &str) -> Result<SExpr, PddlError> {
    let tokens = tokenize(text);
    let mut iter = tokens.into_iter().peekable();
    let first = match iter.next() {
        None => return Err(PddlError::syntax(Pos { line: 1, col: 1 }, "empty input")),
        Some(t) => t,
    };
    let expr = read(first, &mut iter)?;
    for t in iter {
        match t {
            Token::Close(_) => {}
            Token::Open(p) | Token::Symbol(_, p) => {
                return Err(PddlError::syntax(
                    p,
                    "unexpected content after top-level form",
                ))
            }
        }
    }
    Ok(expr)
}

fn read(first: Token, iter: &mut impl Iterator<Item = Token>) -> Result<SExpr, PddlError> {
    match first {
        Token::Symbol(s, p) => Ok(SExpr::Atom(s, p)),
        Token::Close(p) => Err(PddlError::syntax(p, "unexpected ')'")),
        Token::Open(p) => {
            let mut items = Vec::new();
            loop {
                match iter.next() {
                    None => return Err(PddlError::syntax(p, "unclosed '('")),
                    Some(Token::Close(_)) => return Ok(SExpr::List(items, p)),
                    Some(t) => items.push(read(t, iter)?),
                }
            }
        }
    }
}
