//! Exact arithmetic for ordinals below `w^w` in Cantor normal form, plus the
//! extended order with a maximal element `inf`.
//!
//! An [`Ordinal`] is a sum `w^e1*c1 + w^e2*c2 + ... + w^ek*ck` with strictly
//! decreasing natural exponents and positive coefficients; the empty sum is 0.
//! This range is closed under the addition and multiplication used anywhere in
//! the crate (counter bounds, approximant indices, stabilization bounds).
//!
//! The text syntax is `w^K*C` terms joined by `+`, where `w` abbreviates
//! `w^1*1`, bare naturals are the finite part, and `inf` denotes the top
//! element of the extended order: `w^2*3+w+4`, `w*2`, `17`, `inf`.

use num_bigint::BigUint;
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// A Cantor-normal-form term `w^exponent * coefficient`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    pub exponent: u64,
    pub coefficient: BigUint,
}

/// An ordinal below `w^w` in Cantor normal form.
///
/// Invariant: exponents strictly decrease along `terms` and every coefficient
/// is at least 1. Equality of term lists coincides with ordinal equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Ordinal {
    terms: Vec<Term>,
}

/// Error raised by [`Ordinal::left_subtract`] when the minuend is smaller.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot left-subtract: {left} > {right}")]
pub struct SubtractError {
    pub left: Ordinal,
    pub right: Ordinal,
}

/// Parse error for ordinal literals.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid ordinal literal at byte {position}: {message}")]
pub struct OrdinalParseError {
    pub position: usize,
    pub message: String,
}

impl Ordinal {
    pub fn zero() -> Self {
        Ordinal { terms: Vec::new() }
    }

    pub fn from_nat(n: u64) -> Self {
        if n == 0 {
            Self::zero()
        } else {
            Ordinal {
                terms: vec![Term {
                    exponent: 0,
                    coefficient: BigUint::from(n),
                }],
            }
        }
    }

    pub fn omega() -> Self {
        Self::omega_pow(1)
    }

    /// `w^k`.
    pub fn omega_pow(k: u64) -> Self {
        Self::omega_pow_times(k, 1)
    }

    /// `w^k * c`; zero when `c` is zero.
    pub fn omega_pow_times(k: u64, c: u64) -> Self {
        if c == 0 {
            Self::zero()
        } else {
            Ordinal {
                terms: vec![Term {
                    exponent: k,
                    coefficient: BigUint::from(c),
                }],
            }
        }
    }

    /// Construct from raw terms, validating the CNF invariant.
    pub fn from_terms(terms: Vec<(u64, BigUint)>) -> Option<Self> {
        let mut prev: Option<u64> = None;
        for (e, c) in &terms {
            if *c == BigUint::ZERO {
                return None;
            }
            if let Some(p) = prev {
                if *e >= p {
                    return None;
                }
            }
            prev = Some(*e);
        }
        Some(Ordinal {
            terms: terms
                .into_iter()
                .map(|(exponent, coefficient)| Term {
                    exponent,
                    coefficient,
                })
                .collect(),
        })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The finite ordinals are exactly those whose CNF is a single `w^0` term
    /// (or empty).
    pub fn is_finite(&self) -> bool {
        self.terms.iter().all(|t| t.exponent == 0)
    }

    /// Finite value, when this ordinal is finite and fits in `u64`.
    pub fn as_nat(&self) -> Option<u64> {
        if self.terms.is_empty() {
            return Some(0);
        }
        if self.terms.len() == 1 && self.terms[0].exponent == 0 {
            u64::try_from(&self.terms[0].coefficient).ok()
        } else {
            None
        }
    }

    /// A nonzero ordinal is a limit iff its last CNF term has exponent >= 1.
    pub fn is_limit(&self) -> bool {
        match self.terms.last() {
            Some(t) => t.exponent >= 1,
            None => false,
        }
    }

    pub fn is_successor(&self) -> bool {
        !self.is_zero() && !self.is_limit()
    }

    /// Predecessor of a successor ordinal; `None` on 0 and on limits.
    pub fn predecessor(&self) -> Option<Ordinal> {
        if !self.is_successor() {
            return None;
        }
        let mut terms = self.terms.clone();
        let last = terms.last_mut().expect("successor has a last term");
        debug_assert_eq!(last.exponent, 0);
        let one = BigUint::from(1u8);
        if last.coefficient == one {
            terms.pop();
        } else {
            last.coefficient -= one;
        }
        Some(Ordinal { terms })
    }

    pub fn successor(&self) -> Ordinal {
        self.add(&Ordinal::from_nat(1))
    }

    /// Ordinal sum. Not commutative: small leading terms of `self` are
    /// absorbed by the leading term of `other` (`1 + w = w`).
    pub fn add(&self, other: &Ordinal) -> Ordinal {
        let Some(lead) = other.terms.first() else {
            return self.clone();
        };
        let mut terms: Vec<Term> = self
            .terms
            .iter()
            .take_while(|t| t.exponent > lead.exponent)
            .cloned()
            .collect();
        let merged = self.terms.iter().find(|t| t.exponent == lead.exponent);
        match merged {
            Some(t) => {
                terms.push(Term {
                    exponent: lead.exponent,
                    coefficient: &t.coefficient + &lead.coefficient,
                });
                terms.extend(other.terms[1..].iter().cloned());
            }
            None => terms.extend(other.terms.iter().cloned()),
        }
        Ordinal { terms }
    }

    /// Ordinal product `self * other` (`other`-fold iterated sum of `self`).
    pub fn mul(&self, other: &Ordinal) -> Ordinal {
        if self.is_zero() || other.is_zero() {
            return Ordinal::zero();
        }
        let lead_exp = self.terms[0].exponent;
        let mut acc = Ordinal::zero();
        for t in &other.terms {
            let part = if t.exponent == 0 {
                // a * n = w^e*(c*n) + tail, the middle tails being absorbed.
                let mut terms = self.terms.clone();
                terms[0].coefficient = &terms[0].coefficient * &t.coefficient;
                Ordinal { terms }
            } else {
                Ordinal {
                    terms: vec![Term {
                        exponent: lead_exp + t.exponent,
                        coefficient: t.coefficient.clone(),
                    }],
                }
            };
            acc = acc.add(&part);
        }
        acc
    }

    /// The unique `d` with `self + d = other`, defined when `self <= other`.
    pub fn left_subtract(&self, other: &Ordinal) -> Result<Ordinal, SubtractError> {
        if self > other {
            return Err(SubtractError {
                left: self.clone(),
                right: other.clone(),
            });
        }
        // Find the first index where the term lists differ.
        let mut i = 0;
        while i < self.terms.len() && i < other.terms.len() && self.terms[i] == other.terms[i] {
            i += 1;
        }
        if i == other.terms.len() {
            // self is an extension of other or equal; since self <= other, equal.
            return Ok(Ordinal::zero());
        }
        if i == self.terms.len() {
            return Ok(Ordinal {
                terms: other.terms[i..].to_vec(),
            });
        }
        let (a, b) = (&self.terms[i], &other.terms[i]);
        if a.exponent == b.exponent {
            let mut terms = vec![Term {
                exponent: b.exponent,
                coefficient: &b.coefficient - &a.coefficient,
            }];
            terms.extend(other.terms[i + 1..].iter().cloned());
            Ok(Ordinal { terms })
        } else {
            // a.exponent < b.exponent: the whole tail of self is absorbed.
            Ok(Ordinal {
                terms: other.terms[i..].to_vec(),
            })
        }
    }
}

impl PartialOrd for Ordinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ordinal {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.terms.iter().zip(other.terms.iter()) {
            match a.exponent.cmp(&b.exponent) {
                Ordering::Equal => {}
                ord => return ord,
            }
            match a.coefficient.cmp(&b.coefficient) {
                Ordering::Equal => {}
                ord => return ord,
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let one = BigUint::from(1u8);
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, "+")?;
            }
            if t.exponent == 0 {
                write!(f, "{}", t.coefficient)?;
            } else {
                write!(f, "w")?;
                if t.exponent != 1 {
                    write!(f, "^{}", t.exponent)?;
                }
                if t.coefficient != one {
                    write!(f, "*{}", t.coefficient)?;
                }
            }
        }
        Ok(())
    }
}

impl FromStr for Ordinal {
    type Err = OrdinalParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_ordinal(s)
    }
}

fn parse_ordinal(s: &str) -> Result<Ordinal, OrdinalParseError> {
    let err = |position: usize, message: &str| OrdinalParseError {
        position,
        message: message.to_string(),
    };
    let bytes = s.as_bytes();
    let mut pos = 0usize;
    let skip_ws = |pos: &mut usize| {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
    };
    let parse_nat = |pos: &mut usize| -> Option<BigUint> {
        skip_ws(pos);
        let start = *pos;
        while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
            *pos += 1;
        }
        if *pos == start {
            None
        } else {
            Some(BigUint::parse_bytes(&bytes[start..*pos], 10).expect("digits"))
        }
    };

    skip_ws(&mut pos);
    if s[pos..].starts_with("inf") {
        return Err(err(pos, "`inf` is not a plain ordinal; use CountdownBound"));
    }

    let mut terms: Vec<(u64, BigUint)> = Vec::new();
    loop {
        skip_ws(&mut pos);
        let term_start = pos;
        let (exponent, coefficient) = if pos < bytes.len() && bytes[pos] == b'w' {
            pos += 1;
            let mut exponent = 1u64;
            skip_ws(&mut pos);
            if pos < bytes.len() && bytes[pos] == b'^' {
                pos += 1;
                let e =
                    parse_nat(&mut pos).ok_or_else(|| err(pos, "expected exponent after `^`"))?;
                exponent = u64::try_from(&e).map_err(|_| err(term_start, "exponent too large"))?;
            }
            let mut coefficient = BigUint::from(1u8);
            skip_ws(&mut pos);
            if pos < bytes.len() && bytes[pos] == b'*' {
                pos += 1;
                coefficient = parse_nat(&mut pos)
                    .ok_or_else(|| err(pos, "expected coefficient after `*`"))?;
            }
            (exponent, coefficient)
        } else if let Some(n) = parse_nat(&mut pos) {
            (0u64, n)
        } else {
            return Err(err(pos, "expected `w` term or natural number"));
        };

        if coefficient == BigUint::ZERO {
            if exponent == 0 && terms.is_empty() {
                // bare literal "0"
                skip_ws(&mut pos);
                if pos == bytes.len() {
                    return Ok(Ordinal::zero());
                }
            }
            return Err(err(term_start, "zero coefficient in ordinal term"));
        }
        if let Some((prev_e, _)) = terms.last() {
            if exponent >= *prev_e {
                return Err(err(term_start, "exponents must strictly decrease"));
            }
        }
        terms.push((exponent, coefficient));

        skip_ws(&mut pos);
        if pos < bytes.len() && bytes[pos] == b'+' {
            pos += 1;
            continue;
        }
        break;
    }
    skip_ws(&mut pos);
    if pos != bytes.len() {
        return Err(err(pos, "trailing input after ordinal literal"));
    }
    Ok(Ordinal::from_terms(terms).expect("validated above"))
}

/// An element of the order of ordinals extended with a greatest element.
///
/// Used for fixpoint superscripts: `Infinity` recovers the classical
/// (unbounded) fixpoint operators.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CountdownBound {
    Ordinal(Ordinal),
    Infinity,
}

impl CountdownBound {
    pub const INF: CountdownBound = CountdownBound::Infinity;

    pub fn nat(n: u64) -> Self {
        CountdownBound::Ordinal(Ordinal::from_nat(n))
    }

    pub fn omega() -> Self {
        CountdownBound::Ordinal(Ordinal::omega())
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, CountdownBound::Infinity)
    }

    pub fn as_ordinal(&self) -> Option<&Ordinal> {
        match self {
            CountdownBound::Ordinal(o) => Some(o),
            CountdownBound::Infinity => None,
        }
    }
}

impl PartialOrd for CountdownBound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CountdownBound {
    fn cmp(&self, other: &Self) -> Ordering {
        use CountdownBound::*;
        match (self, other) {
            (Infinity, Infinity) => Ordering::Equal,
            (Infinity, Ordinal(_)) => Ordering::Greater,
            (Ordinal(_), Infinity) => Ordering::Less,
            (Ordinal(a), Ordinal(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for CountdownBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CountdownBound::Ordinal(o) => write!(f, "{o}"),
            CountdownBound::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for CountdownBound {
    type Err = OrdinalParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim() == "inf" {
            Ok(CountdownBound::Infinity)
        } else {
            Ok(CountdownBound::Ordinal(s.parse()?))
        }
    }
}
