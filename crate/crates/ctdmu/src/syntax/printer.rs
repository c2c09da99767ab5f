//! Canonical printer. `parse(print(f))` is structurally equal to `f`.

use super::{Fix, Formula};
use std::fmt;

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Top level behaves like a fixpoint body: lowest precedence, tail
        // position.
        write_prec(self, f, 0, true)
    }
}

/// `prec` is the minimal precedence allowed to appear bare here (0 = or,
/// 2 = and, 3 = unary); `tail` says whether a fixpoint may extend to the end
/// of the enclosing scope without parentheses.
fn write_prec(formula: &Formula, f: &mut fmt::Formatter<'_>, prec: u8, tail: bool) -> fmt::Result {
    match formula {
        Formula::Var(x) => write!(f, "{x}"),
        Formula::Top => write!(f, "tt"),
        Formula::Bot => write!(f, "ff"),
        Formula::Or(l, r) => {
            if prec <= 1 {
                write_prec(l, f, 1, false)?;
                write!(f, " | ")?;
                write_prec(r, f, 2, tail)
            } else {
                parenthesized(formula, f)
            }
        }
        Formula::And(l, r) => {
            if prec <= 2 {
                write_prec(l, f, 2, false)?;
                write!(f, " & ")?;
                write_prec(r, f, 3, tail)
            } else {
                parenthesized(formula, f)
            }
        }
        Formula::Diamond(a, b) => {
            write!(f, "<{a}> ")?;
            write_prec(b, f, 3, tail)
        }
        Formula::Box(a, b) => {
            write!(f, "[{a}] ")?;
            write_prec(b, f, 3, tail)
        }
        Formula::Fix(fix) => {
            if tail {
                write_fix(fix, f)
            } else {
                parenthesized(formula, f)
            }
        }
    }
}

fn parenthesized(formula: &Formula, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    write!(f, "(")?;
    write_prec(formula, f, 0, true)?;
    write!(f, ")")
}

fn write_fix(fix: &Fix, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    write!(f, "{}", fix.kind)?;
    if !fix.bound.is_infinity() {
        write!(f, "^{}", fix.bound)?;
    }
    if fix.vars.len() == 1 {
        write!(f, " {}. ", fix.vars[0])?;
        write_prec(&fix.bodies[0], f, 0, true)
    } else {
        write!(f, "_{} (", fix.index)?;
        for (i, v) in fix.vars.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ").(")?;
        for (i, body) in fix.bodies.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write_prec(body, f, 0, true)?;
        }
        write!(f, ")")
    }
}
