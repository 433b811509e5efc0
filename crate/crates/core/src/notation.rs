//! Command-line notation for relations: block lists `[[0,2],[1,3]]` and pair lists `[[0,1],[1,2]]`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Open,
    Close,
    Comma,
    Number(usize),
}

fn describe(text: &str, at: usize) -> String {
    let rest: String = text[at..]
        .chars()
        .take_while(|c| !c.is_whitespace())
        .take(12)
        .collect();
    format!("`{rest}` at offset {at}")
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'[' => {
                out.push((Token::Open, i));
                i += 1;
            }
            b']' => {
                out.push((Token::Close, i));
                i += 1;
            }
            b',' => {
                out.push((Token::Comma, i));
                i += 1;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let value = text[start..i].parse().map_err(|_| {
                    Error::Notation(format!("number too large: {}", describe(text, start)))
                })?;
                out.push((Token::Number(value), start));
            }
            _ => {
                return Err(Error::Notation(format!(
                    "unexpected token {}",
                    describe(text, i)
                )));
            }
        }
    }
    Ok(out)
}

/// Parses a list of integer lists.
pub fn parse_nested(text: &str) -> Result<Vec<Vec<usize>>> {
    let tokens = tokenize(text)?;
    let mut pos = 0;
    let err_at = |pos: usize, what: &str| -> Error {
        match tokens.get(pos) {
            Some((_, at)) => Error::Notation(format!("{what}, found {}", describe(text, *at))),
            None => Error::Notation(format!("{what}, found end of input")),
        }
    };
    let expect = |pos: &mut usize, t: Token, what: &str| -> Result<()> {
        match tokens.get(*pos) {
            Some((tok, _)) if *tok == t => {
                *pos += 1;
                Ok(())
            }
            _ => Err(err_at(*pos, what)),
        }
    };
    expect(&mut pos, Token::Open, "expected `[`")?;
    let mut lists = Vec::new();
    if matches!(tokens.get(pos), Some((Token::Close, _))) {
        pos += 1;
    } else {
        loop {
            expect(&mut pos, Token::Open, "expected `[` opening an inner list")?;
            let mut inner = Vec::new();
            if matches!(tokens.get(pos), Some((Token::Close, _))) {
                pos += 1;
            } else {
                loop {
                    match tokens.get(pos) {
                        Some((Token::Number(v), _)) => inner.push(*v),
                        _ => return Err(err_at(pos, "expected an element")),
                    }
                    pos += 1;
                    match tokens.get(pos) {
                        Some((Token::Comma, _)) => pos += 1,
                        Some((Token::Close, _)) => {
                            pos += 1;
                            break;
                        }
                        _ => return Err(err_at(pos, "expected `,` or `]`")),
                    }
                }
            }
            lists.push(inner);
            match tokens.get(pos) {
                Some((Token::Comma, _)) => pos += 1,
                Some((Token::Close, _)) => {
                    pos += 1;
                    break;
                }
                _ => return Err(err_at(pos, "expected `,` or `]`")),
            }
        }
    }
    if pos != tokens.len() {
        return Err(err_at(pos, "trailing input"));
    }
    Ok(lists)
}

/// Pair list notation; every inner list must have exactly two entries.
pub fn parse_pairs(text: &str) -> Result<Vec<(usize, usize)>> {
    parse_nested(text)?
        .into_iter()
        .map(|p| match p.as_slice() {
            [a, b] => Ok((*a, *b)),
            other => Err(Error::Notation(format!(
                "pair {other:?} in `{text}` does not have two entries"
            ))),
        })
        .collect()
}

/// Block notation; elements not mentioned form singleton blocks.
pub fn parse_blocks(text: &str) -> Result<Vec<Vec<usize>>> {
    parse_nested(text)
}
