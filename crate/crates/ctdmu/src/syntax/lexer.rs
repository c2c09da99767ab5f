//! Tokenizer for the formula grammar. Identifiers are `[A-Za-z][A-Za-z0-9]*`;
//! the underscore is its own token (it separates the component index).

use super::parser::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Nat(String),
    Pipe,
    Amp,
    Lt,
    Gt,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Dot,
    Comma,
    Caret,
    Underscore,
    Star,
    Plus,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub pos: usize,
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0usize;
    while i < bytes.len() {
        let b = bytes[i];
        if b.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let pos = i;
        let tok = match b {
            b'|' => {
                i += 1;
                Tok::Pipe
            }
            b'&' => {
                i += 1;
                Tok::Amp
            }
            b'<' => {
                i += 1;
                Tok::Lt
            }
            b'>' => {
                i += 1;
                Tok::Gt
            }
            b'[' => {
                i += 1;
                Tok::LBracket
            }
            b']' => {
                i += 1;
                Tok::RBracket
            }
            b'(' => {
                i += 1;
                Tok::LParen
            }
            b')' => {
                i += 1;
                Tok::RParen
            }
            b'.' => {
                i += 1;
                Tok::Dot
            }
            b',' => {
                i += 1;
                Tok::Comma
            }
            b'^' => {
                i += 1;
                Tok::Caret
            }
            b'_' => {
                i += 1;
                Tok::Underscore
            }
            b'*' => {
                i += 1;
                Tok::Star
            }
            b'+' => {
                i += 1;
                Tok::Plus
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                Tok::Nat(text[start..i].to_string())
            }
            b'a'..=b'z' | b'A'..=b'Z' => {
                let start = i;
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                Tok::Ident(text[start..i].to_string())
            }
            _ => {
                return Err(ParseError {
                    position: pos,
                    message: format!(
                        "unexpected character {:?}",
                        text[pos..].chars().next().unwrap()
                    ),
                })
            }
        };
        out.push(Token { tok, pos });
    }
    Ok(out)
}
