//! Small regular-expression front end for the `regex` subcommand: Thompson
//! construction over single-character actions, with epsilon transitions
//! eliminated by closure so the result fits the library's automaton type.
//!
//! Syntax: literals, concatenation, `|`, postfix `*` `+` `?`, parentheses,
//! and `.` for any letter of the alphabet.

use ctdmu::syntax::Nfa;
use std::collections::BTreeSet;

#[derive(Debug)]
enum Ast {
    Empty,
    Literal(char),
    Any,
    Concat(Box<Ast>, Box<Ast>),
    Alt(Box<Ast>, Box<Ast>),
    Star(Box<Ast>),
    Plus(Box<Ast>),
    Opt(Box<Ast>),
}

pub fn compile(pattern: &str, alphabet: &[String]) -> Result<Nfa, String> {
    for a in alphabet {
        if a.chars().count() != 1 {
            return Err(format!(
                "the regex front end needs single-character actions, got `{a}`"
            ));
        }
    }
    let ast = Parser {
        chars: pattern.chars().collect(),
        pos: 0,
    }
    .alternation()?;
    let mut builder = Builder {
        alphabet: alphabet.to_vec(),
        eps: Vec::new(),
        steps: Vec::new(),
        states: 0,
    };
    let start = builder.fresh();
    let accept = builder.fresh();
    builder.wire(&ast, start, accept)?;
    Ok(builder.into_nfa(start, accept))
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn alternation(&mut self) -> Result<Ast, String> {
        let mut acc = self.concat()?;
        while self.peek() == Some('|') {
            self.pos += 1;
            let rhs = self.concat()?;
            acc = Ast::Alt(Box::new(acc), Box::new(rhs));
        }
        if self.pos < self.chars.len() && self.peek() != Some(')') {
            return Err(format!("unexpected `{}` in pattern", self.chars[self.pos]));
        }
        Ok(acc)
    }

    fn concat(&mut self) -> Result<Ast, String> {
        let mut acc = Ast::Empty;
        let mut first = true;
        while let Some(c) = self.peek() {
            if c == '|' || c == ')' {
                break;
            }
            let atom = self.postfix()?;
            acc = if first {
                atom
            } else {
                Ast::Concat(Box::new(acc), Box::new(atom))
            };
            first = false;
        }
        Ok(acc)
    }

    fn postfix(&mut self) -> Result<Ast, String> {
        let mut acc = self.atom()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    acc = Ast::Star(Box::new(acc));
                }
                Some('+') => {
                    self.pos += 1;
                    acc = Ast::Plus(Box::new(acc));
                }
                Some('?') => {
                    self.pos += 1;
                    acc = Ast::Opt(Box::new(acc));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn atom(&mut self) -> Result<Ast, String> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.alternation()?;
                if self.peek() != Some(')') {
                    return Err("unbalanced parenthesis".to_string());
                }
                self.pos += 1;
                Ok(inner)
            }
            Some('.') => {
                self.pos += 1;
                Ok(Ast::Any)
            }
            Some(c) if c.is_alphanumeric() => {
                self.pos += 1;
                Ok(Ast::Literal(c))
            }
            Some(c) => Err(format!("unexpected `{c}` in pattern")),
            None => Err("pattern ended unexpectedly".to_string()),
        }
    }
}

struct Builder {
    alphabet: Vec<String>,
    /// Epsilon edges between builder states.
    eps: Vec<(usize, usize)>,
    /// Labelled steps.
    steps: Vec<(usize, String, usize)>,
    states: usize,
}

impl Builder {
    fn fresh(&mut self) -> usize {
        self.states += 1;
        self.states - 1
    }

    fn wire(&mut self, ast: &Ast, from: usize, to: usize) -> Result<(), String> {
        match ast {
            Ast::Empty => self.eps.push((from, to)),
            Ast::Literal(c) => {
                let name = c.to_string();
                if !self.alphabet.contains(&name) {
                    return Err(format!("letter `{c}` is not in the alphabet"));
                }
                self.steps.push((from, name, to));
            }
            Ast::Any => {
                for a in self.alphabet.clone() {
                    self.steps.push((from, a, to));
                }
            }
            Ast::Concat(l, r) => {
                let mid = self.fresh();
                self.wire(l, from, mid)?;
                self.wire(r, mid, to)?;
            }
            Ast::Alt(l, r) => {
                self.wire(l, from, to)?;
                self.wire(r, from, to)?;
            }
            Ast::Star(inner) => {
                let hub = self.fresh();
                self.eps.push((from, hub));
                self.eps.push((hub, to));
                self.wire(inner, hub, hub)?;
            }
            Ast::Plus(inner) => {
                let hub = self.fresh();
                self.wire(inner, from, hub)?;
                self.eps.push((hub, to));
                self.wire(inner, hub, hub)?;
            }
            Ast::Opt(inner) => {
                self.eps.push((from, to));
                self.wire(inner, from, to)?;
            }
        }
        Ok(())
    }

    /// Close over epsilon edges to produce a plain labelled automaton.
    fn into_nfa(self, start: usize, accept: usize) -> Nfa {
        let n = self.states;
        // Transitive epsilon closure.
        let mut closure: Vec<BTreeSet<usize>> = (0..n).map(|i| BTreeSet::from([i])).collect();
        loop {
            let mut changed = false;
            for (a, b) in &self.eps {
                let reach: Vec<usize> = closure[*b].iter().copied().collect();
                for r in reach {
                    if closure[*a].insert(r) {
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let mut transitions: BTreeSet<(usize, String, usize)> = BTreeSet::new();
        for (p, a, q) in &self.steps {
            for (src, reach) in closure.iter().enumerate() {
                if reach.contains(p) {
                    transitions.insert((src, a.clone(), *q));
                }
            }
        }
        let accepting: BTreeSet<usize> = (0..n).filter(|s| closure[*s].contains(&accept)).collect();
        Nfa {
            alphabet: self.alphabet,
            num_states: n,
            initial: start,
            accepting,
            transitions: transitions.into_iter().collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn accepts(nfa: &Nfa, word: &str) -> bool {
        let mut current = BTreeSet::from([nfa.initial]);
        for c in word.chars() {
            let mut next = BTreeSet::new();
            for (p, a, q) in &nfa.transitions {
                if current.contains(p) && *a == c.to_string() {
                    next.insert(*q);
                }
            }
            current = next;
        }
        current.iter().any(|s| nfa.accepting.contains(s))
    }

    #[test]
    fn basic_patterns() {
        let ab = vec!["a".to_string(), "b".to_string()];
        let star = compile("a*", &ab).unwrap();
        assert!(accepts(&star, ""));
        assert!(accepts(&star, "aaa"));
        assert!(!accepts(&star, "ab"));

        let any = compile(".*", &ab).unwrap();
        assert!(accepts(&any, ""));
        assert!(accepts(&any, "abba"));

        let alt = compile("(ab|b)+", &ab).unwrap();
        assert!(accepts(&alt, "ab"));
        assert!(accepts(&alt, "bab"));
        assert!(!accepts(&alt, "a"));
        assert!(!accepts(&alt, ""));

        let opt = compile("ab?", &ab).unwrap();
        assert!(accepts(&opt, "a"));
        assert!(accepts(&opt, "ab"));
        assert!(!accepts(&opt, "b"));

        assert!(compile("c", &ab).is_err());
        assert!(compile("(a", &ab).is_err());
    }
}
