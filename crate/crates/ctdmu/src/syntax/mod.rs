//! Vectorial countdown formulas: AST, parser, printer, and the structural
//! transformations (negation dual, hat, successor elimination, substitution).
//!
//! Surface grammar (whitespace-insensitive, `|` binds looser than `&`,
//! fixpoint bodies extend maximally to the right):
//!
//! ```text
//! phi   ::= "tt" | "ff" | ident
//!         | phi "|" phi | phi "&" phi
//!         | "<" ident ">" phi | "[" ident "]" phi
//!         | ("mu" | "nu") [ "^" ord ] ident "." phi
//!         | ("mu" | "nu") [ "^" ord ] "_" nat
//!               "(" ident {"," ident} ")" "." "(" phi {"," phi} ")"
//! ord   ::= "inf" | nat | cnfterm { "+" cnfterm }
//! cnfterm ::= "w" [ "^" nat ] [ "*" nat ]
//! ```
//!
//! Identifiers are `[A-Za-z][A-Za-z0-9]*`. A missing `^ord` means the
//! classical (unbounded) operator; a missing index means component 1.

mod lexer;
mod nfa;
mod parser;
mod printer;

pub use nfa::{regex_diamond, Nfa, NfaError, PathMode};
pub use parser::ParseError;

use crate::ordinal::CountdownBound;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Least or greatest fixpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FixKind {
    Mu,
    Nu,
}

impl FixKind {
    pub fn dual(self) -> FixKind {
        match self {
            FixKind::Mu => FixKind::Nu,
            FixKind::Nu => FixKind::Mu,
        }
    }
}

impl fmt::Display for FixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FixKind::Mu => write!(f, "mu"),
            FixKind::Nu => write!(f, "nu"),
        }
    }
}

/// A (possibly vectorial) fixpoint binder.
///
/// `index` is 1-based; `vars` and `bodies` have equal length and `vars` are
/// pairwise distinct. Scalar formulas are exactly those where every binder
/// has a single variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fix {
    pub kind: FixKind,
    pub bound: CountdownBound,
    pub index: usize,
    pub vars: Vec<String>,
    pub bodies: Vec<Formula>,
}

/// Formula AST. Nodes are identified by their path from the root (see
/// [`Occurrence`]); two structurally equal subformulas at different paths are
/// different occurrences.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Var(String),
    Top,
    Bot,
    Or(std::boxed::Box<Formula>, std::boxed::Box<Formula>),
    And(std::boxed::Box<Formula>, std::boxed::Box<Formula>),
    Diamond(String, std::boxed::Box<Formula>),
    Box(String, std::boxed::Box<Formula>),
    Fix(Fix),
}

/// Path from the root of a formula: the sequence of child indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Occurrence(pub Vec<u16>);

impl Occurrence {
    pub fn child(&self, i: usize) -> Occurrence {
        let mut v = self.0.clone();
        v.push(i as u16);
        Occurrence(v)
    }
}

impl fmt::Display for Occurrence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Structural facts about a formula, as computed by [`Formula::analyze`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormulaReport {
    pub free_vars: BTreeSet<String>,
    pub is_sentence: bool,
    pub is_scalar: bool,
    pub is_guarded: bool,
    pub is_positive_countdown: bool,
    /// Maximal number of non-`inf` fixpoint binders on a root-to-leaf path.
    pub nesting: usize,
}

impl Formula {
    pub fn parse(text: &str) -> Result<Formula, ParseError> {
        parser::parse_formula(text)
    }

    pub fn var(name: &str) -> Formula {
        Formula::Var(name.to_string())
    }

    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::Or(std::boxed::Box::new(l), std::boxed::Box::new(r))
    }

    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::And(std::boxed::Box::new(l), std::boxed::Box::new(r))
    }

    pub fn diamond(action: &str, body: Formula) -> Formula {
        Formula::Diamond(action.to_string(), std::boxed::Box::new(body))
    }

    pub fn box_(action: &str, body: Formula) -> Formula {
        Formula::Box(action.to_string(), std::boxed::Box::new(body))
    }

    /// Scalar fixpoint constructor.
    pub fn fix(kind: FixKind, bound: CountdownBound, var: &str, body: Formula) -> Formula {
        Formula::Fix(Fix {
            kind,
            bound,
            index: 1,
            vars: vec![var.to_string()],
            bodies: vec![body],
        })
    }

    /// Children in occurrence order.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Var(_) | Formula::Top | Formula::Bot => Vec::new(),
            Formula::Or(l, r) | Formula::And(l, r) => vec![l, r],
            Formula::Diamond(_, b) | Formula::Box(_, b) => vec![b],
            Formula::Fix(fix) => fix.bodies.iter().collect(),
        }
    }

    pub fn subformula_at(&self, occ: &Occurrence) -> Option<&Formula> {
        let mut cur = self;
        for &i in &occ.0 {
            cur = *cur.children().get(i as usize)?;
        }
        Some(cur)
    }

    /// Free variables.
    pub fn free_vars(&self) -> BTreeSet<String> {
        fn walk(f: &Formula, bound: &mut Vec<String>, acc: &mut BTreeSet<String>) {
            match f {
                Formula::Var(x) => {
                    if !bound.iter().any(|b| b == x) {
                        acc.insert(x.clone());
                    }
                }
                Formula::Top | Formula::Bot => {}
                Formula::Or(l, r) | Formula::And(l, r) => {
                    walk(l, bound, acc);
                    walk(r, bound, acc);
                }
                Formula::Diamond(_, b) | Formula::Box(_, b) => walk(b, bound, acc),
                Formula::Fix(fix) => {
                    let depth = bound.len();
                    bound.extend(fix.vars.iter().cloned());
                    for body in &fix.bodies {
                        walk(body, bound, acc);
                    }
                    bound.truncate(depth);
                }
            }
        }
        let mut acc = BTreeSet::new();
        walk(self, &mut Vec::new(), &mut acc);
        acc
    }

    /// Actions appearing under any modality.
    pub fn actions(&self) -> BTreeSet<String> {
        let mut acc = BTreeSet::new();
        let mut stack = vec![self];
        while let Some(f) = stack.pop() {
            if let Formula::Diamond(a, _) | Formula::Box(a, _) = f {
                acc.insert(a.clone());
            }
            stack.extend(f.children());
        }
        acc
    }

    /// All names used anywhere (free, bound, or as binder), for freshening.
    pub fn used_names(&self) -> BTreeSet<String> {
        let mut acc = BTreeSet::new();
        let mut stack = vec![self];
        while let Some(f) = stack.pop() {
            match f {
                Formula::Var(x) => {
                    acc.insert(x.clone());
                }
                Formula::Fix(fix) => {
                    acc.extend(fix.vars.iter().cloned());
                }
                _ => {}
            }
            stack.extend(f.children());
        }
        acc
    }

    /// Structural report: free variables, scalar/guarded/positive-countdown
    /// flags, and the countdown nesting depth.
    pub fn analyze(&self) -> FormulaReport {
        let free_vars = self.free_vars();
        FormulaReport {
            is_sentence: free_vars.is_empty(),
            free_vars,
            is_scalar: self.is_scalar(),
            is_guarded: self.is_guarded(),
            is_positive_countdown: self.is_positive_countdown(),
            nesting: self.nesting(),
        }
    }

    pub fn is_scalar(&self) -> bool {
        match self {
            Formula::Fix(fix) => fix.vars.len() == 1 && fix.bodies.iter().all(|b| b.is_scalar()),
            _ => self.children().iter().all(|c| c.is_scalar()),
        }
    }

    pub fn is_positive_countdown(&self) -> bool {
        match self {
            Formula::Fix(fix) => {
                (fix.kind != FixKind::Nu || fix.bound.is_infinity())
                    && fix.bodies.iter().all(|b| b.is_positive_countdown())
            }
            _ => self.children().iter().all(|c| c.is_positive_countdown()),
        }
    }

    /// Countdown nesting: maximal count of non-`inf` binders on a path.
    pub fn nesting(&self) -> usize {
        let here = match self {
            Formula::Fix(fix) if !fix.bound.is_infinity() => 1,
            _ => 0,
        };
        here + self
            .children()
            .iter()
            .map(|c| c.nesting())
            .max()
            .unwrap_or(0)
    }

    /// A formula is guarded when the transition structure it induces has no
    /// loop consisting solely of non-modal steps: every cycle through a bound
    /// variable must cross a `<a>` or `[a]`.
    pub fn is_guarded(&self) -> bool {
        // Nodes are occurrences; epsilon edges mirror the automaton
        // transition function (binder -> selected body, variable -> the body
        // of its binder for that component, or/and -> children).
        #[derive(Clone, Copy, PartialEq)]
        enum Color {
            White,
            Gray,
            Black,
        }
        let index = OccIndex::build(self);
        let mut color = vec![Color::White; index.nodes.len()];
        // Iterative DFS detecting a gray-gray edge (cycle).
        for start in 0..index.nodes.len() {
            if color[start] != Color::White {
                continue;
            }
            let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
            color[start] = Color::Gray;
            while let Some(&(node, next)) = stack.last() {
                let succs = index.epsilon_successors(node);
                if next < succs.len() {
                    stack.last_mut().expect("nonempty").1 += 1;
                    let s = succs[next];
                    match color[s] {
                        Color::Gray => return false,
                        Color::White => {
                            color[s] = Color::Gray;
                            stack.push((s, 0));
                        }
                        Color::Black => {}
                    }
                } else {
                    color[node] = Color::Black;
                    stack.pop();
                }
            }
        }
        true
    }

    /// Simultaneous capture-avoiding substitution of free occurrences.
    ///
    /// Binders whose variables would capture a substituted formula are
    /// renamed to fresh names (`x` becomes `x1`, `x2`, ... — the first suffix
    /// unused anywhere in the inputs), so the output depends only on the
    /// inputs.
    pub fn substitute(&self, binding: &BTreeMap<String, Formula>) -> Formula {
        let mut used = self.used_names();
        for f in binding.values() {
            used.extend(f.used_names());
        }
        used.extend(binding.keys().cloned());
        let active: BTreeMap<String, Formula> = binding.clone();
        substitute_rec(self, &active, &mut used)
    }

    /// The negation dual: swaps or/and, tt/ff, diamond/box, mu/nu, keeping
    /// bounds and variables fixed.
    pub fn dualize(&self) -> Formula {
        match self {
            Formula::Var(x) => Formula::Var(x.clone()),
            Formula::Top => Formula::Bot,
            Formula::Bot => Formula::Top,
            Formula::Or(l, r) => Formula::and(l.dualize(), r.dualize()),
            Formula::And(l, r) => Formula::or(l.dualize(), r.dualize()),
            Formula::Diamond(a, b) => Formula::box_(a, b.dualize()),
            Formula::Box(a, b) => Formula::diamond(a, b.dualize()),
            Formula::Fix(fix) => Formula::Fix(Fix {
                kind: fix.kind.dual(),
                bound: fix.bound.clone(),
                index: fix.index,
                vars: fix.vars.clone(),
                bodies: fix.bodies.iter().map(|b| b.dualize()).collect(),
            }),
        }
    }

    /// Replace every fixpoint bound by `inf`, yielding the classical formula.
    pub fn hat_transform(&self) -> Formula {
        match self {
            Formula::Fix(fix) => Formula::Fix(Fix {
                kind: fix.kind,
                bound: CountdownBound::Infinity,
                index: fix.index,
                vars: fix.vars.clone(),
                bodies: fix.bodies.iter().map(|b| b.hat_transform()).collect(),
            }),
            Formula::Or(l, r) => Formula::or(l.hat_transform(), r.hat_transform()),
            Formula::And(l, r) => Formula::and(l.hat_transform(), r.hat_transform()),
            Formula::Diamond(a, b) => Formula::diamond(a, b.hat_transform()),
            Formula::Box(a, b) => Formula::box_(a, b.hat_transform()),
            other => other.clone(),
        }
    }

    /// Unfold every successor-bound binder until all bounds are 0, limit
    /// ordinals, or `inf`; bound 0 then normalizes to `ff` (mu) / `tt` (nu).
    pub fn successor_elimination(&self) -> Formula {
        match self {
            Formula::Fix(fix) => {
                let bodies: Vec<Formula> = fix
                    .bodies
                    .iter()
                    .map(|b| b.successor_elimination())
                    .collect();
                match &fix.bound {
                    CountdownBound::Ordinal(o) if o.is_zero() => match fix.kind {
                        FixKind::Mu => Formula::Bot,
                        FixKind::Nu => Formula::Top,
                    },
                    CountdownBound::Ordinal(o) if o.is_successor() => {
                        let pred = o.predecessor().expect("successor");
                        let mut binding = BTreeMap::new();
                        for (j, x) in fix.vars.iter().enumerate() {
                            binding.insert(
                                x.clone(),
                                Formula::Fix(Fix {
                                    kind: fix.kind,
                                    bound: CountdownBound::Ordinal(pred.clone()),
                                    index: j + 1,
                                    vars: fix.vars.clone(),
                                    bodies: bodies.clone(),
                                }),
                            );
                        }
                        bodies[fix.index - 1]
                            .substitute(&binding)
                            .successor_elimination()
                    }
                    _ => Formula::Fix(Fix {
                        kind: fix.kind,
                        bound: fix.bound.clone(),
                        index: fix.index,
                        vars: fix.vars.clone(),
                        bodies,
                    }),
                }
            }
            Formula::Or(l, r) => Formula::or(l.successor_elimination(), r.successor_elimination()),
            Formula::And(l, r) => {
                Formula::and(l.successor_elimination(), r.successor_elimination())
            }
            Formula::Diamond(a, b) => Formula::diamond(a, b.successor_elimination()),
            Formula::Box(a, b) => Formula::box_(a, b.successor_elimination()),
            other => other.clone(),
        }
    }
}

fn substitute_rec(
    f: &Formula,
    active: &BTreeMap<String, Formula>,
    used: &mut BTreeSet<String>,
) -> Formula {
    if active.is_empty() {
        return f.clone();
    }
    match f {
        Formula::Var(x) => match active.get(x) {
            Some(repl) => repl.clone(),
            None => f.clone(),
        },
        Formula::Top | Formula::Bot => f.clone(),
        Formula::Or(l, r) => Formula::or(
            substitute_rec(l, active, used),
            substitute_rec(r, active, used),
        ),
        Formula::And(l, r) => Formula::and(
            substitute_rec(l, active, used),
            substitute_rec(r, active, used),
        ),
        Formula::Diamond(a, b) => Formula::diamond(a, substitute_rec(b, active, used)),
        Formula::Box(a, b) => Formula::box_(a, substitute_rec(b, active, used)),
        Formula::Fix(fix) => {
            // Drop shadowed substitutions.
            let inner: BTreeMap<String, Formula> = active
                .iter()
                .filter(|(k, _)| !fix.vars.contains(k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect();
            // Rename binder variables that would capture a free variable of
            // any substituted formula.
            let needs_rename: Vec<String> = fix
                .vars
                .iter()
                .filter(|v| inner.values().any(|repl| repl.free_vars().contains(*v)))
                .cloned()
                .collect();
            let (vars, bodies) = if needs_rename.is_empty() {
                (fix.vars.clone(), fix.bodies.clone())
            } else {
                let mut renaming = BTreeMap::new();
                let mut vars = fix.vars.clone();
                for v in &needs_rename {
                    let fresh = fresh_name(v, used);
                    renaming.insert(v.clone(), Formula::Var(fresh.clone()));
                    for slot in vars.iter_mut() {
                        if slot == v {
                            *slot = fresh.clone();
                        }
                    }
                }
                let bodies = fix
                    .bodies
                    .iter()
                    .map(|b| substitute_rec(b, &renaming, used))
                    .collect();
                (vars, bodies)
            };
            Formula::Fix(Fix {
                kind: fix.kind,
                bound: fix.bound.clone(),
                index: fix.index,
                vars,
                bodies: bodies
                    .iter()
                    .map(|b| substitute_rec(b, &inner, used))
                    .collect(),
            })
        }
    }
}

/// First `{base}{n}` with `n >= 1` that is not yet used.
pub(crate) fn fresh_name(base: &str, used: &mut BTreeSet<String>) -> String {
    let stem: String = base.chars().take_while(|c| !c.is_ascii_digit()).collect();
    let stem = if stem.is_empty() {
        "x".to_string()
    } else {
        stem
    };
    let mut n = 1u64;
    loop {
        let candidate = format!("{stem}{n}");
        if !used.contains(&candidate) {
            used.insert(candidate.clone());
            return candidate;
        }
        n += 1;
    }
}

/// Flat index of a formula's occurrences with binder resolution, shared by
/// guardedness analysis and the automaton translation.
pub(crate) struct OccIndex<'a> {
    pub nodes: Vec<OccEntry<'a>>,
    /// occurrence path -> node id
    pub by_occ: BTreeMap<Occurrence, usize>,
}

pub(crate) struct OccEntry<'a> {
    pub node: &'a Formula,
    pub children: Vec<usize>,
    /// For bound variable occurrences: node id of the binder body this
    /// variable unfolds to.
    pub var_unfold: Option<usize>,
    /// For free variable occurrences: the variable name.
    pub free_var: Option<String>,
    /// Occurrence of the unfold target, resolved to an id after the walk.
    pending_unfold: Option<Occurrence>,
}

impl<'a> OccIndex<'a> {
    pub fn build(root: &'a Formula) -> OccIndex<'a> {
        let mut index = OccIndex {
            nodes: Vec::new(),
            by_occ: BTreeMap::new(),
        };
        // binder stack: (var name, body occurrence path)
        let mut binders: Vec<(String, Occurrence)> = Vec::new();
        build_rec(root, Occurrence::default(), &mut index, &mut binders);
        // Resolve unfold targets now that all occurrences are numbered.
        let targets: Vec<Option<usize>> = index
            .nodes
            .iter()
            .map(|entry| entry.pending_unfold.as_ref().map(|occ| index.by_occ[occ]))
            .collect();
        for (entry, target) in index.nodes.iter_mut().zip(targets) {
            entry.var_unfold = target;
        }
        index
    }

    /// Epsilon successors of a node: or/and children, the selected body of a
    /// binder, and the unfolding edge of a bound variable. Modal nodes have
    /// none.
    pub fn epsilon_successors(&self, id: usize) -> Vec<usize> {
        let entry = &self.nodes[id];
        match entry.node {
            Formula::Or(..) | Formula::And(..) => entry.children.clone(),
            Formula::Fix(fix) => vec![entry.children[fix.index - 1]],
            Formula::Var(_) => entry.var_unfold.into_iter().collect(),
            _ => Vec::new(),
        }
    }
}

fn build_rec<'a>(
    f: &'a Formula,
    occ: Occurrence,
    index: &mut OccIndex<'a>,
    binders: &mut Vec<(String, Occurrence)>,
) -> usize {
    let id = index.nodes.len();
    index.nodes.push(OccEntry {
        node: f,
        children: Vec::new(),
        var_unfold: None,
        free_var: None,
        pending_unfold: None,
    });
    index.by_occ.insert(occ.clone(), id);
    match f {
        Formula::Var(x) => match binders.iter().rev().find(|(name, _)| name == x) {
            Some((_, body_occ)) => index.nodes[id].pending_unfold = Some(body_occ.clone()),
            None => index.nodes[id].free_var = Some(x.clone()),
        },
        Formula::Fix(fix) => {
            let depth = binders.len();
            for (j, v) in fix.vars.iter().enumerate() {
                binders.push((v.clone(), occ.child(j)));
            }
            let children: Vec<usize> = fix
                .bodies
                .iter()
                .enumerate()
                .map(|(j, b)| build_rec(b, occ.child(j), index, binders))
                .collect();
            index.nodes[id].children = children;
            binders.truncate(depth);
        }
        _ => {
            let children: Vec<usize> = f
                .children()
                .into_iter()
                .enumerate()
                .map(|(j, c)| build_rec(c, occ.child(j), index, binders))
                .collect();
            index.nodes[id].children = children;
        }
    }
    id
}

#[cfg(test)]
mod tests;
