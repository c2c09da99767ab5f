//! Recursive-descent parser for the formula grammar.

use super::lexer::{tokenize, Tok, Token};
use super::{Fix, FixKind, Formula};
use crate::ordinal::{CountdownBound, Ordinal};
use num_bigint::BigUint;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        end: text.len(),
    };
    let f = p.formula()?;
    if p.pos < p.tokens.len() {
        return Err(p.error_here("trailing input after formula"));
    }
    Ok(f)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> usize {
        self.tokens.get(self.pos).map(|t| t.pos).unwrap_or(self.end)
    }

    fn error_here(&self, message: &str) -> ParseError {
        ParseError {
            position: self.here(),
            message: message.to_string(),
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.error_here(&format!("expected {what}"))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(name)) => {
                let name = name.clone();
                self.pos += 1;
                Ok(name)
            }
            _ => Err(self.error_here(&format!("expected {what}"))),
        }
    }

    fn nat(&mut self, what: &str) -> Result<BigUint, ParseError> {
        match self.peek() {
            Some(Tok::Nat(digits)) => {
                let n = BigUint::parse_bytes(digits.as_bytes(), 10).expect("digits");
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.error_here(&format!("expected {what}"))),
        }
    }

    fn nat_usize(&mut self, what: &str) -> Result<usize, ParseError> {
        let pos = self.here();
        let n = self.nat(what)?;
        usize::try_from(&n).map_err(|_| ParseError {
            position: pos,
            message: format!("{what} too large"),
        })
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        self.or_level()
    }

    fn or_level(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.and_level()?;
        while self.peek() == Some(&Tok::Pipe) {
            self.pos += 1;
            let rhs = self.and_level()?;
            acc = Formula::or(acc, rhs);
        }
        Ok(acc)
    }

    fn and_level(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.unary()?;
        while self.peek() == Some(&Tok::Amp) {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = Formula::and(acc, rhs);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::Lt) => {
                self.pos += 1;
                let action = self.ident("action name after `<`")?;
                self.expect(Tok::Gt, "`>`")?;
                Ok(Formula::diamond(&action, self.unary()?))
            }
            Some(Tok::LBracket) => {
                self.pos += 1;
                let action = self.ident("action name after `[`")?;
                self.expect(Tok::RBracket, "`]`")?;
                Ok(Formula::box_(&action, self.unary()?))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => match name.as_str() {
                "tt" => {
                    self.pos += 1;
                    Ok(Formula::Top)
                }
                "ff" => {
                    self.pos += 1;
                    Ok(Formula::Bot)
                }
                "mu" => {
                    self.pos += 1;
                    self.fixpoint(FixKind::Mu)
                }
                "nu" => {
                    self.pos += 1;
                    self.fixpoint(FixKind::Nu)
                }
                _ => {
                    let name = name.clone();
                    self.pos += 1;
                    Ok(Formula::Var(name))
                }
            },
            _ => Err(self.error_here("expected formula")),
        }
    }

    fn fixpoint(&mut self, kind: FixKind) -> Result<Formula, ParseError> {
        let bound = if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            self.bound()?
        } else {
            CountdownBound::Infinity
        };
        let index_pos = self.here();
        let index = if self.peek() == Some(&Tok::Underscore) {
            self.pos += 1;
            Some(self.nat_usize("component index")?)
        } else {
            None
        };
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            let vars_pos = self.here();
            let mut vars = vec![self.ident("bound variable")?];
            while self.peek() == Some(&Tok::Comma) {
                self.pos += 1;
                vars.push(self.ident("bound variable")?);
            }
            self.expect(Tok::RParen, "`)`")?;
            self.expect(Tok::Dot, "`.` after bound variables")?;
            self.expect(Tok::LParen, "`(` before fixpoint bodies")?;
            let mut bodies = vec![self.formula()?];
            while self.peek() == Some(&Tok::Comma) {
                self.pos += 1;
                bodies.push(self.formula()?);
            }
            self.expect(Tok::RParen, "`)` after fixpoint bodies")?;
            if vars.len() != bodies.len() {
                return Err(ParseError {
                    position: vars_pos,
                    message: format!(
                        "arity mismatch: {} bound variables but {} bodies",
                        vars.len(),
                        bodies.len()
                    ),
                });
            }
            for (i, v) in vars.iter().enumerate() {
                if vars[..i].contains(v) {
                    return Err(ParseError {
                        position: vars_pos,
                        message: format!("duplicate bound variable `{v}`"),
                    });
                }
            }
            let index = index.unwrap_or(1);
            if index == 0 || index > vars.len() {
                return Err(ParseError {
                    position: index_pos,
                    message: format!("component index {index} out of range 1..={}", vars.len()),
                });
            }
            Ok(Formula::Fix(Fix {
                kind,
                bound,
                index,
                vars,
                bodies,
            }))
        } else {
            let var = self.ident("bound variable")?;
            self.expect(Tok::Dot, "`.` after bound variable")?;
            let body = self.formula()?;
            let index = index.unwrap_or(1);
            if index != 1 {
                return Err(ParseError {
                    position: index_pos,
                    message: format!("component index {index} out of range 1..=1"),
                });
            }
            Ok(Formula::Fix(Fix {
                kind,
                bound,
                index: 1,
                vars: vec![var],
                bodies: vec![body],
            }))
        }
    }

    /// Ordinal or `inf` after `^`, read from the token stream.
    fn bound(&mut self) -> Result<CountdownBound, ParseError> {
        if let Some(Tok::Ident(name)) = self.peek() {
            if name == "inf" {
                self.pos += 1;
                return Ok(CountdownBound::Infinity);
            }
        }
        let start = self.here();
        let mut terms: Vec<(u64, BigUint)> = Vec::new();
        loop {
            let term_pos = self.here();
            let (exponent, coefficient) = match self.peek() {
                Some(Tok::Ident(name)) if name == "w" => {
                    self.pos += 1;
                    let mut exponent = 1u64;
                    if self.peek() == Some(&Tok::Caret) {
                        self.pos += 1;
                        let e = self.nat("exponent after `^`")?;
                        exponent = u64::try_from(&e).map_err(|_| ParseError {
                            position: term_pos,
                            message: "exponent too large".to_string(),
                        })?;
                    }
                    let mut coefficient = BigUint::from(1u8);
                    if self.peek() == Some(&Tok::Star) {
                        self.pos += 1;
                        coefficient = self.nat("coefficient after `*`")?;
                    }
                    (exponent, coefficient)
                }
                Some(Tok::Nat(_)) => (0u64, self.nat("natural number")?),
                _ => return Err(self.error_here("expected ordinal bound after `^`")),
            };
            if coefficient == BigUint::ZERO {
                if exponent == 0 && terms.is_empty() && self.peek() != Some(&Tok::Plus) {
                    return Ok(CountdownBound::Ordinal(Ordinal::zero()));
                }
                return Err(ParseError {
                    position: term_pos,
                    message: "zero coefficient in ordinal term".to_string(),
                });
            }
            if let Some((prev, _)) = terms.last() {
                if exponent >= *prev {
                    return Err(ParseError {
                        position: term_pos,
                        message: "ordinal exponents must strictly decrease".to_string(),
                    });
                }
            }
            terms.push((exponent, coefficient));
            if self.peek() == Some(&Tok::Plus) {
                self.pos += 1;
            } else {
                break;
            }
        }
        let ord = Ordinal::from_terms(terms).ok_or_else(|| ParseError {
            position: start,
            message: "malformed ordinal literal".to_string(),
        })?;
        Ok(CountdownBound::Ordinal(ord))
    }
}
