//! Compilation of regular path constraints into classical fixpoint systems.
//!
//! `regex_diamond(nfa, target, Diamond)` yields an `inf`-only vectorial
//! least-fixpoint formula that holds at a point `m` iff some path from `m`
//! labelled by a word of the automaton's language ends in a point satisfying
//! `target`; `Box` yields the greatest-fixpoint dual where *every* such path
//! must end in `target`.

use super::{Fix, FixKind, Formula};
use crate::ordinal::CountdownBound;
use std::collections::BTreeSet;
use thiserror::Error;

/// Nondeterministic finite automaton over action names.
#[derive(Debug, Clone)]
pub struct Nfa {
    pub alphabet: Vec<String>,
    pub num_states: usize,
    pub initial: usize,
    pub accepting: BTreeSet<usize>,
    /// (source, action, target) triples.
    pub transitions: Vec<(usize, String, usize)>,
}

impl Nfa {
    /// Single-state automaton accepting every word over `alphabet`.
    pub fn universal(alphabet: &[&str]) -> Nfa {
        Nfa {
            alphabet: alphabet.iter().map(|s| s.to_string()).collect(),
            num_states: 1,
            initial: 0,
            accepting: BTreeSet::from([0]),
            transitions: alphabet.iter().map(|a| (0, a.to_string(), 0)).collect(),
        }
    }

    /// Single-state automaton accepting no word at all.
    pub fn empty_language(alphabet: &[&str]) -> Nfa {
        Nfa {
            alphabet: alphabet.iter().map(|s| s.to_string()).collect(),
            num_states: 1,
            initial: 0,
            accepting: BTreeSet::new(),
            transitions: Vec::new(),
        }
    }

    /// Automaton for a single-letter language `{a}`.
    pub fn letter(alphabet: &[&str], a: &str) -> Nfa {
        Nfa {
            alphabet: alphabet.iter().map(|s| s.to_string()).collect(),
            num_states: 2,
            initial: 0,
            accepting: BTreeSet::from([1]),
            transitions: vec![(0, a.to_string(), 1)],
        }
    }

    pub fn validate(&self) -> Result<(), NfaError> {
        if self.alphabet.is_empty() {
            return Err(NfaError::EmptyAlphabet);
        }
        if self.initial >= self.num_states {
            return Err(NfaError::BadState(self.initial));
        }
        for q in &self.accepting {
            if *q >= self.num_states {
                return Err(NfaError::BadState(*q));
            }
        }
        for (p, a, q) in &self.transitions {
            if *p >= self.num_states || *q >= self.num_states {
                return Err(NfaError::BadState((*p).max(*q)));
            }
            if !self.alphabet.iter().any(|b| b == a) {
                return Err(NfaError::UnknownAction(a.clone()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NfaError {
    #[error("automaton alphabet is empty")]
    EmptyAlphabet,
    #[error("state index {0} out of range")]
    BadState(usize),
    #[error("transition uses action `{0}` outside the alphabet")]
    UnknownAction(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathMode {
    Diamond,
    Box,
}

/// Build the fixpoint system with one variable per automaton state.
///
/// Diamond: `y_q = (target if q accepting) \/ \/ { <a> y_p | q -a-> p }`,
/// solved as a least fixpoint. Box is the conjunctive/greatest dual.
pub fn regex_diamond(nfa: &Nfa, target: &Formula, mode: PathMode) -> Result<Formula, NfaError> {
    nfa.validate()?;
    let used = target.used_names();
    // One fresh variable per state: the shortest `q`-prefix avoiding clashes.
    let mut prefix = "q".to_string();
    while (0..nfa.num_states).any(|k| used.contains(&format!("{prefix}{k}"))) {
        prefix.push('q');
    }
    let var = |q: usize| format!("{prefix}{q}");

    let mut bodies = Vec::with_capacity(nfa.num_states);
    for q in 0..nfa.num_states {
        let mut parts: Vec<Formula> = Vec::new();
        if nfa.accepting.contains(&q) {
            parts.push(target.clone());
        }
        for (p, a, r) in &nfa.transitions {
            if *p == q {
                let step = match mode {
                    PathMode::Diamond => Formula::diamond(a, Formula::var(&var(*r))),
                    PathMode::Box => Formula::box_(a, Formula::var(&var(*r))),
                };
                parts.push(step);
            }
        }
        let body = match mode {
            PathMode::Diamond => parts
                .into_iter()
                .reduce(Formula::or)
                .unwrap_or(Formula::Bot),
            PathMode::Box => parts
                .into_iter()
                .reduce(Formula::and)
                .unwrap_or(Formula::Top),
        };
        bodies.push(body);
    }
    let kind = match mode {
        PathMode::Diamond => FixKind::Mu,
        PathMode::Box => FixKind::Nu,
    };
    Ok(Formula::Fix(Fix {
        kind,
        bound: CountdownBound::Infinity,
        index: nfa.initial + 1,
        vars: (0..nfa.num_states).map(var).collect(),
        bodies,
    }))
}
