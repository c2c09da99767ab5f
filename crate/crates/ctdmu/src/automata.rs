//! Countdown automata: alternating automata with epsilon and modal
//! transitions, ranked states, and ordinal initial counters; plus the two
//! translations (formula to automaton, automaton to formula), guardedness
//! analysis, and the guarding transformation on formulas.
//!
//! Automaton file format (JSON):
//!
//! ```json
//! {"states": [{"name": "q0", "owner": "E", "rank": 0},
//!             {"name": "q1", "owner": "A", "rank": 1}],
//!  "initial": "q0",
//!  "delta": {"q0": {"eps": ["q1", "x"]},
//!            "q1": {"modal": ["a", "q0"]}},
//!  "ranks": [{"owner": "A", "standard": true},
//!            {"owner": "A", "standard": false, "ctr": "w"}]}
//! ```
//!
//! Transition targets that are not state names are free variables.

use crate::ordinal::CountdownBound;
use crate::ordinal::Ordinal;
use crate::syntax::{Fix, FixKind, Formula, OccIndex};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

/// The two players.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    Eve,
    Adam,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Eve => Player::Adam,
            Player::Adam => Player::Eve,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Player::Eve => write!(f, "Eve"),
            Player::Adam => write!(f, "Adam"),
        }
    }
}

/// One rank of the linear rank order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankInfo {
    pub owner: Player,
    pub standard: bool,
}

/// Finite linear order of ranks (lowest first) with initial counter values
/// for the nonstandard ones.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RankOrder {
    pub ranks: Vec<RankInfo>,
    /// Defined exactly on the nonstandard rank indices.
    pub initial_counters: BTreeMap<usize, Ordinal>,
}

impl RankOrder {
    pub fn validate(&self) -> Result<(), AutomatonError> {
        for (i, r) in self.ranks.iter().enumerate() {
            let has_ctr = self.initial_counters.contains_key(&i);
            if r.standard && has_ctr {
                return Err(AutomatonError::CounterOnStandardRank(i));
            }
            if !r.standard && !has_ctr {
                return Err(AutomatonError::MissingCounter(i));
            }
        }
        for i in self.initial_counters.keys() {
            if *i >= self.ranks.len() {
                return Err(AutomatonError::BadRank(*i));
            }
        }
        Ok(())
    }

    pub fn nonstandard(&self) -> impl Iterator<Item = usize> + '_ {
        self.initial_counters.keys().copied()
    }
}

/// Transition target: another state or a free variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    State(usize),
    Var(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Transition {
    Eps(Vec<Target>),
    Modal(String, Target),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutomatonState {
    pub name: String,
    pub owner: Player,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountdownAutomaton {
    pub states: Vec<AutomatonState>,
    pub initial: usize,
    /// One transition per state.
    pub delta: Vec<Transition>,
    pub rank_order: RankOrder,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomatonError {
    #[error("state index {0} out of range")]
    BadState(usize),
    #[error("rank index {0} out of range")]
    BadRank(usize),
    #[error("duplicate state name `{0}`")]
    DuplicateState(String),
    #[error("nonstandard rank {0} has no initial counter")]
    MissingCounter(usize),
    #[error("standard rank {0} carries a counter")]
    CounterOnStandardRank(usize),
    #[error("transition map must define every state exactly once (problem at `{0}`)")]
    DeltaNotTotal(String),
    #[error("initial state `{0}` is not declared")]
    BadInitial(String),
    #[error("state `{0}` has both or neither of `eps` and `modal`")]
    MalformedTransition(String),
    #[error("automaton JSON: {0}")]
    Json(String),
    #[error("invalid owner `{0}` (expected \"E\" or \"A\")")]
    BadOwner(String),
    #[error("invalid ordinal counter: {0}")]
    BadCounter(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error("successor bound {0} present; run successor elimination first")]
    SuccessorBound(String),
    #[error("the formula is a bare free variable; no automaton state exists for it")]
    BareVariable,
}

impl CountdownAutomaton {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s.name == name)
    }

    /// Free variables: every variable occurring as a transition target.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for t in &self.delta {
            match t {
                Transition::Eps(ts) => {
                    for t in ts {
                        if let Target::Var(x) = t {
                            out.insert(x.clone());
                        }
                    }
                }
                Transition::Modal(_, Target::Var(x)) => {
                    out.insert(x.clone());
                }
                _ => {}
            }
        }
        out
    }

    pub fn actions(&self) -> BTreeSet<String> {
        self.delta
            .iter()
            .filter_map(|t| match t {
                Transition::Modal(a, _) => Some(a.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), AutomatonError> {
        self.rank_order.validate()?;
        if self.initial >= self.states.len() {
            return Err(AutomatonError::BadState(self.initial));
        }
        if self.delta.len() != self.states.len() {
            return Err(AutomatonError::DeltaNotTotal(format!(
                "{} transitions for {} states",
                self.delta.len(),
                self.states.len()
            )));
        }
        for (i, s) in self.states.iter().enumerate() {
            if self.states[..i].iter().any(|t| t.name == s.name) {
                return Err(AutomatonError::DuplicateState(s.name.clone()));
            }
            if s.rank >= self.rank_order.ranks.len() {
                return Err(AutomatonError::BadRank(s.rank));
            }
        }
        let check_target = |t: &Target| match t {
            Target::State(q) if *q >= self.states.len() => Err(AutomatonError::BadState(*q)),
            _ => Ok(()),
        };
        for t in &self.delta {
            match t {
                Transition::Eps(ts) => ts.iter().try_for_each(check_target)?,
                Transition::Modal(_, t) => check_target(t)?,
            }
        }
        Ok(())
    }

    /// True iff the epsilon-edge subgraph (modal transitions ignored) is
    /// acyclic.
    pub fn is_guarded(&self) -> bool {
        #[derive(Clone, Copy, PartialEq)]
        enum Color {
            White,
            Gray,
            Black,
        }
        let succs: Vec<Vec<usize>> = self
            .delta
            .iter()
            .map(|t| match t {
                Transition::Eps(ts) => ts
                    .iter()
                    .filter_map(|t| match t {
                        Target::State(q) => Some(*q),
                        Target::Var(_) => None,
                    })
                    .collect(),
                Transition::Modal(..) => Vec::new(),
            })
            .collect();
        let mut color = vec![Color::White; self.states.len()];
        for start in 0..self.states.len() {
            if color[start] != Color::White {
                continue;
            }
            let mut stack = vec![(start, 0usize)];
            color[start] = Color::Gray;
            while let Some(&(node, next)) = stack.last() {
                if next < succs[node].len() {
                    stack.last_mut().expect("nonempty").1 += 1;
                    let s = succs[node][next];
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

    pub fn to_json(&self) -> String {
        let raw = RawAutomaton {
            states: self
                .states
                .iter()
                .map(|s| RawState {
                    name: s.name.clone(),
                    owner: owner_code(s.owner),
                    rank: s.rank,
                })
                .collect(),
            initial: self.states[self.initial].name.clone(),
            delta: self
                .states
                .iter()
                .zip(&self.delta)
                .map(|(s, t)| {
                    let raw = match t {
                        Transition::Eps(ts) => RawTransition {
                            eps: Some(ts.iter().map(|t| self.target_name(t)).collect()),
                            modal: None,
                        },
                        Transition::Modal(a, t) => RawTransition {
                            eps: None,
                            modal: Some(vec![a.clone(), self.target_name(t)]),
                        },
                    };
                    (s.name.clone(), raw)
                })
                .collect(),
            ranks: self
                .rank_order
                .ranks
                .iter()
                .enumerate()
                .map(|(i, r)| RawRank {
                    owner: owner_code(r.owner),
                    standard: r.standard,
                    ctr: self
                        .rank_order
                        .initial_counters
                        .get(&i)
                        .map(|o| o.to_string()),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("automaton serializes")
    }

    fn target_name(&self, t: &Target) -> String {
        match t {
            Target::State(q) => self.states[*q].name.clone(),
            Target::Var(x) => x.clone(),
        }
    }

    pub fn from_json(text: &str) -> Result<CountdownAutomaton, AutomatonError> {
        let raw: RawAutomaton =
            serde_json::from_str(text).map_err(|e| AutomatonError::Json(e.to_string()))?;
        let states: Vec<AutomatonState> = raw
            .states
            .iter()
            .map(|s| {
                Ok(AutomatonState {
                    name: s.name.clone(),
                    owner: parse_owner(&s.owner)?,
                    rank: s.rank,
                })
            })
            .collect::<Result<_, AutomatonError>>()?;
        let state_index = |name: &str| states.iter().position(|s| s.name == name);
        let initial = state_index(&raw.initial)
            .ok_or_else(|| AutomatonError::BadInitial(raw.initial.clone()))?;
        let mut delta = Vec::with_capacity(states.len());
        for s in &states {
            let t = raw
                .delta
                .get(&s.name)
                .ok_or_else(|| AutomatonError::DeltaNotTotal(s.name.clone()))?;
            let parse_target = |name: &String| match state_index(name) {
                Some(q) => Target::State(q),
                None => Target::Var(name.clone()),
            };
            let parsed = match (&t.eps, &t.modal) {
                (Some(ts), None) => Transition::Eps(ts.iter().map(parse_target).collect()),
                (None, Some(pair)) if pair.len() == 2 => {
                    Transition::Modal(pair[0].clone(), parse_target(&pair[1]))
                }
                _ => return Err(AutomatonError::MalformedTransition(s.name.clone())),
            };
            delta.push(parsed);
        }
        if raw.delta.len() != states.len() {
            let extra = raw
                .delta
                .keys()
                .find(|k| state_index(k).is_none())
                .cloned()
                .unwrap_or_default();
            return Err(AutomatonError::DeltaNotTotal(extra));
        }
        let mut ranks = Vec::new();
        let mut initial_counters = BTreeMap::new();
        for (i, r) in raw.ranks.iter().enumerate() {
            ranks.push(RankInfo {
                owner: parse_owner(&r.owner)?,
                standard: r.standard,
            });
            if let Some(ctr) = &r.ctr {
                let o: Ordinal = ctr
                    .parse()
                    .map_err(|e| AutomatonError::BadCounter(format!("{e}")))?;
                initial_counters.insert(i, o);
            }
        }
        let automaton = CountdownAutomaton {
            states,
            initial,
            delta,
            rank_order: RankOrder {
                ranks,
                initial_counters,
            },
        };
        automaton.validate()?;
        Ok(automaton)
    }
}

fn owner_code(p: Player) -> String {
    match p {
        Player::Eve => "E".to_string(),
        Player::Adam => "A".to_string(),
    }
}

fn parse_owner(s: &str) -> Result<Player, AutomatonError> {
    match s {
        "E" => Ok(Player::Eve),
        "A" => Ok(Player::Adam),
        other => Err(AutomatonError::BadOwner(other.to_string())),
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct RawAutomaton {
    states: Vec<RawState>,
    initial: String,
    delta: BTreeMap<String, RawTransition>,
    ranks: Vec<RawRank>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawState {
    name: String,
    owner: String,
    rank: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawTransition {
    #[serde(skip_serializing_if = "Option::is_none")]
    eps: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    modal: Option<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawRank {
    owner: String,
    standard: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    ctr: Option<String>,
}

/// Translate a formula into a countdown automaton.
///
/// States are the subformula occurrences other than free variables. Each
/// fixpoint occurrence contributes one fresh rank, assigned in post order so
/// that inner fixpoints receive lower ranks; the rank is attached to the
/// binder's body occurrences, is owned by Eve for `mu` and Adam for `nu`, and
/// is standard exactly when the bound is `inf` (otherwise the bound becomes
/// the rank's initial counter). Everything else sits at the standard bottom
/// rank 0. Successor bounds must be eliminated beforehand.
pub fn from_formula(f: &Formula) -> Result<CountdownAutomaton, TranslateError> {
    // Reject successor bounds anywhere.
    fn check_bounds(f: &Formula) -> Result<(), TranslateError> {
        if let Formula::Fix(fix) = f {
            if let CountdownBound::Ordinal(o) = &fix.bound {
                if o.is_successor() {
                    return Err(TranslateError::SuccessorBound(o.to_string()));
                }
            }
        }
        f.children().into_iter().try_for_each(check_bounds)
    }
    check_bounds(f)?;
    if matches!(f, Formula::Var(_)) {
        return Err(TranslateError::BareVariable);
    }

    let index = OccIndex::build(f);
    let n = index.nodes.len();

    // Post-order rank assignment: one fresh rank per fixpoint occurrence,
    // attached to all of its body occurrences.
    let mut rank_of_node = vec![0usize; n];
    let mut ranks = vec![RankInfo {
        owner: Player::Adam,
        standard: true,
    }];
    let mut initial_counters = BTreeMap::new();
    assign_ranks(
        &index,
        0,
        &mut rank_of_node,
        &mut ranks,
        &mut initial_counters,
    );

    // States: every occurrence except free variables.
    let mut state_of_node: Vec<Option<usize>> = vec![None; n];
    let mut states = Vec::new();
    let mut used_names: BTreeMap<String, usize> = BTreeMap::new();
    for (id, entry) in index.nodes.iter().enumerate() {
        if entry.free_var.is_some() {
            continue;
        }
        let owner = match entry.node {
            Formula::Or(..) | Formula::Diamond(..) | Formula::Bot => Player::Eve,
            Formula::And(..) | Formula::Box(..) | Formula::Top => Player::Adam,
            Formula::Fix(_) | Formula::Var(_) => Player::Eve,
        };
        let printed = entry.node.to_string();
        let count = used_names.entry(printed.clone()).or_insert(0);
        *count += 1;
        let name = if *count == 1 {
            printed
        } else {
            format!("{printed}#{count}")
        };
        state_of_node[id] = Some(states.len());
        states.push(AutomatonState {
            name,
            owner,
            rank: rank_of_node[id],
        });
    }

    let target = |id: usize| -> Target {
        match &index.nodes[id].free_var {
            Some(x) => Target::Var(x.clone()),
            None => Target::State(state_of_node[id].expect("non-free occurrence is a state")),
        }
    };

    let mut delta = Vec::with_capacity(states.len());
    for entry in index.nodes.iter() {
        if entry.free_var.is_some() {
            continue;
        }
        let t = match entry.node {
            Formula::Or(..) | Formula::And(..) => {
                Transition::Eps(entry.children.iter().map(|c| target(*c)).collect())
            }
            Formula::Diamond(a, _) | Formula::Box(a, _) => {
                Transition::Modal(a.clone(), target(entry.children[0]))
            }
            Formula::Fix(fix) => Transition::Eps(vec![target(entry.children[fix.index - 1])]),
            Formula::Var(_) => {
                let unfold = entry.var_unfold.expect("bound variable has an unfold edge");
                Transition::Eps(vec![target(unfold)])
            }
            Formula::Top | Formula::Bot => Transition::Eps(Vec::new()),
        };
        delta.push(t);
    }

    let automaton = CountdownAutomaton {
        states,
        initial: 0,
        delta,
        rank_order: RankOrder {
            ranks,
            initial_counters,
        },
    };
    debug_assert!(automaton.validate().is_ok());
    Ok(automaton)
}

fn assign_ranks(
    index: &OccIndex,
    id: usize,
    rank_of_node: &mut [usize],
    ranks: &mut Vec<RankInfo>,
    initial_counters: &mut BTreeMap<usize, Ordinal>,
) {
    let entry = &index.nodes[id];
    for &c in &entry.children {
        assign_ranks(index, c, rank_of_node, ranks, initial_counters);
    }
    if let Formula::Fix(fix) = entry.node {
        let r = ranks.len();
        let owner = match fix.kind {
            FixKind::Mu => Player::Eve,
            FixKind::Nu => Player::Adam,
        };
        match &fix.bound {
            CountdownBound::Infinity => ranks.push(RankInfo {
                owner,
                standard: true,
            }),
            CountdownBound::Ordinal(o) => {
                ranks.push(RankInfo {
                    owner,
                    standard: false,
                });
                initial_counters.insert(r, o.clone());
            }
        }
        for &body in &entry.children {
            rank_of_node[body] = r;
        }
    }
}

/// Translate an automaton into an equivalent formula.
///
/// Ranks are first normalized so that every rank below the top is inhabited
/// and the top is not; the formula is then built by induction on ranks, with
/// one vectorial binder per rank and one formal variable per state.
/// Single-state ranks yield scalar binders.
pub fn to_formula(aut: &CountdownAutomaton) -> Result<Formula, AutomatonError> {
    aut.validate()?;
    let (aut, rank_count) = normalize_ranks(aut);

    // Formal variable names: `s{index}` with a prefix long enough to avoid
    // the automaton's free variables.
    let free = aut.free_vars();
    let mut prefix = "s".to_string();
    while (0..aut.states.len()).any(|k| free.contains(&format!("{prefix}{k}"))) {
        prefix.push('s');
    }
    let var = |q: usize| format!("{prefix}{q}");

    // Base case: each state as a flat formula over formal variables.
    let term = |t: &Target| match t {
        Target::State(q) => Formula::var(&var(*q)),
        Target::Var(x) => Formula::Var(x.clone()),
    };
    let mut psi: Vec<Formula> = aut
        .states
        .iter()
        .zip(&aut.delta)
        .map(|(s, t)| match t {
            Transition::Modal(a, t) => match s.owner {
                Player::Eve => Formula::diamond(a, term(t)),
                Player::Adam => Formula::box_(a, term(t)),
            },
            Transition::Eps(ts) => {
                let parts = ts.iter().map(term);
                match s.owner {
                    Player::Eve => parts.reduce(Formula::or).unwrap_or(Formula::Bot),
                    Player::Adam => parts.reduce(Formula::and).unwrap_or(Formula::Top),
                }
            }
        })
        .collect();

    // Inductive step over ranks 0 .. top-1 (the top rank is uninhabited).
    for r in 0..rank_count - 1 {
        let members: Vec<usize> = (0..aut.states.len())
            .filter(|q| aut.states[*q].rank == r)
            .collect();
        debug_assert!(!members.is_empty(), "normalized rank {r} inhabited");
        let info = &aut.rank_order.ranks[r];
        let kind = match info.owner {
            Player::Eve => FixKind::Mu,
            Player::Adam => FixKind::Nu,
        };
        let bound = match aut.rank_order.initial_counters.get(&r) {
            Some(o) => CountdownBound::Ordinal(o.clone()),
            None => CountdownBound::Infinity,
        };
        let vars: Vec<String> = members.iter().map(|q| var(*q)).collect();
        let bodies: Vec<Formula> = members.iter().map(|q| psi[*q].clone()).collect();
        let theta = |i: usize| {
            Formula::Fix(Fix {
                kind,
                bound: bound.clone(),
                index: i + 1,
                vars: vars.clone(),
                bodies: bodies.clone(),
            })
        };
        let binding: BTreeMap<String, Formula> = members
            .iter()
            .enumerate()
            .map(|(i, q)| (var(*q), theta(i)))
            .collect();
        for formula in psi.iter_mut() {
            *formula = formula.substitute(&binding);
        }
    }
    Ok(psi[aut.initial].clone())
}

/// Remove uninhabited ranks (merging the order) and append a fresh,
/// uninhabited standard top rank. Returns the rewritten automaton and the
/// number of ranks including the fresh top.
fn normalize_ranks(aut: &CountdownAutomaton) -> (CountdownAutomaton, usize) {
    let inhabited: Vec<usize> = (0..aut.rank_order.ranks.len())
        .filter(|r| aut.states.iter().any(|s| s.rank == *r))
        .collect();
    let remap: BTreeMap<usize, usize> = inhabited
        .iter()
        .enumerate()
        .map(|(new, old)| (*old, new))
        .collect();
    let mut ranks: Vec<RankInfo> = inhabited
        .iter()
        .map(|r| aut.rank_order.ranks[*r].clone())
        .collect();
    let initial_counters: BTreeMap<usize, Ordinal> = aut
        .rank_order
        .initial_counters
        .iter()
        .filter_map(|(r, o)| remap.get(r).map(|new| (*new, o.clone())))
        .collect();
    ranks.push(RankInfo {
        owner: Player::Adam,
        standard: true,
    });
    let rank_count = ranks.len();
    let states: Vec<AutomatonState> = aut
        .states
        .iter()
        .map(|s| AutomatonState {
            name: s.name.clone(),
            owner: s.owner,
            rank: remap[&s.rank],
        })
        .collect();
    (
        CountdownAutomaton {
            states,
            initial: aut.initial,
            delta: aut.delta.clone(),
            rank_order: RankOrder {
                ranks,
                initial_counters,
            },
        },
        rank_count,
    )
}

/// Rewrite a formula into a guarded one with the same denotation.
///
/// For a scalar binder, every occurrence of its variable reachable without
/// crossing a modality collapses to `ff` (mu) or `tt` (nu). A vectorial
/// binder over `n` components is widened to components indexed by
/// `(i, j <= n)` where `j` counts consecutive unguarded unravellings:
/// guarded occurrences restart at level 0, unguarded ones move to level
/// `j + 1`, and level `n` cuts off to the constant.
pub fn guard(f: &Formula) -> Formula {
    let mut used = f.used_names();
    guard_rec(f, &mut used)
}

fn guard_rec(f: &Formula, used: &mut BTreeSet<String>) -> Formula {
    match f {
        Formula::Or(l, r) => Formula::or(guard_rec(l, used), guard_rec(r, used)),
        Formula::And(l, r) => Formula::and(guard_rec(l, used), guard_rec(r, used)),
        Formula::Diamond(a, b) => Formula::diamond(a, guard_rec(b, used)),
        Formula::Box(a, b) => Formula::box_(a, guard_rec(b, used)),
        Formula::Var(_) | Formula::Top | Formula::Bot => f.clone(),
        Formula::Fix(fix) => {
            let bodies: Vec<Formula> = fix.bodies.iter().map(|b| guard_rec(b, used)).collect();
            let any_unguarded = bodies
                .iter()
                .any(|b| has_unguarded_occurrence(b, &fix.vars));
            if !any_unguarded {
                return Formula::Fix(Fix {
                    kind: fix.kind,
                    bound: fix.bound.clone(),
                    index: fix.index,
                    vars: fix.vars.clone(),
                    bodies,
                });
            }
            let cutoff = match fix.kind {
                FixKind::Mu => Formula::Bot,
                FixKind::Nu => Formula::Top,
            };
            let n = fix.vars.len();
            if n == 1 {
                let body = replace_occurrences(&bodies[0], &fix.vars, &mut |_, guarded| {
                    if guarded {
                        None
                    } else {
                        Some(cutoff.clone())
                    }
                });
                return Formula::Fix(Fix {
                    kind: fix.kind,
                    bound: fix.bound.clone(),
                    index: fix.index,
                    vars: fix.vars.clone(),
                    bodies: vec![body],
                });
            }
            // Vectorial widening: names[m][j] for component m at unguarded
            // depth j, 0 <= j <= n.
            let names: Vec<Vec<String>> = fix
                .vars
                .iter()
                .map(|v| {
                    (0..=n)
                        .map(|_| crate::syntax::fresh_name(v, used))
                        .collect()
                })
                .collect();
            let mut vars_flat = Vec::with_capacity(n * (n + 1));
            let mut bodies_flat = Vec::with_capacity(n * (n + 1));
            for i in 0..n {
                for j in 0..=n {
                    vars_flat.push(names[i][j].clone());
                    let body = replace_occurrences(&bodies[i], &fix.vars, &mut |m, guarded| {
                        if guarded {
                            Some(Formula::var(&names[m][0]))
                        } else if j == n {
                            Some(cutoff.clone())
                        } else {
                            Some(Formula::var(&names[m][j + 1]))
                        }
                    });
                    bodies_flat.push(body);
                }
            }
            Formula::Fix(Fix {
                kind: fix.kind,
                bound: fix.bound.clone(),
                index: (fix.index - 1) * (n + 1) + 1,
                vars: vars_flat,
                bodies: bodies_flat,
            })
        }
    }
}

/// Does any variable from `vars` occur in `body` without an intervening
/// modality (inner binders do not guard)?
fn has_unguarded_occurrence(body: &Formula, vars: &[String]) -> bool {
    fn walk(f: &Formula, active: &BTreeSet<&str>) -> bool {
        match f {
            Formula::Var(x) => active.contains(x.as_str()),
            Formula::Top | Formula::Bot => false,
            Formula::Or(l, r) | Formula::And(l, r) => walk(l, active) || walk(r, active),
            Formula::Diamond(..) | Formula::Box(..) => false,
            Formula::Fix(fix) => {
                let inner: BTreeSet<&str> = active
                    .iter()
                    .copied()
                    .filter(|v| !fix.vars.iter().any(|w| w == v))
                    .collect();
                !inner.is_empty() && fix.bodies.iter().any(|b| walk(b, &inner))
            }
        }
    }
    let active: BTreeSet<&str> = vars.iter().map(|s| s.as_str()).collect();
    walk(body, &active)
}

/// Rewrite occurrences of `vars` in `body`. The replacement callback gets the
/// variable's component index and whether the occurrence is guarded (below a
/// modality); returning `None` keeps the occurrence.
fn replace_occurrences(
    body: &Formula,
    vars: &[String],
    replace: &mut dyn FnMut(usize, bool) -> Option<Formula>,
) -> Formula {
    fn walk(
        f: &Formula,
        vars: &[String],
        shadowed: &BTreeSet<String>,
        guarded: bool,
        replace: &mut dyn FnMut(usize, bool) -> Option<Formula>,
    ) -> Formula {
        match f {
            Formula::Var(x) => {
                if shadowed.contains(x) {
                    return f.clone();
                }
                match vars.iter().position(|v| v == x) {
                    Some(m) => replace(m, guarded).unwrap_or_else(|| f.clone()),
                    None => f.clone(),
                }
            }
            Formula::Top | Formula::Bot => f.clone(),
            Formula::Or(l, r) => Formula::or(
                walk(l, vars, shadowed, guarded, replace),
                walk(r, vars, shadowed, guarded, replace),
            ),
            Formula::And(l, r) => Formula::and(
                walk(l, vars, shadowed, guarded, replace),
                walk(r, vars, shadowed, guarded, replace),
            ),
            Formula::Diamond(a, b) => Formula::diamond(a, walk(b, vars, shadowed, true, replace)),
            Formula::Box(a, b) => Formula::box_(a, walk(b, vars, shadowed, true, replace)),
            Formula::Fix(fix) => {
                let mut inner = shadowed.clone();
                inner.extend(fix.vars.iter().cloned());
                Formula::Fix(Fix {
                    kind: fix.kind,
                    bound: fix.bound.clone(),
                    index: fix.index,
                    vars: fix.vars.clone(),
                    bodies: fix
                        .bodies
                        .iter()
                        .map(|b| walk(b, vars, &inner, guarded, replace))
                        .collect(),
                })
            }
        }
    }
    walk(body, vars, &BTreeSet::new(), false, replace)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Formula {
        Formula::parse(s).unwrap()
    }

    #[test]
    fn three_state_automaton_structure() {
        let aut = from_formula(&p("nu^w x. <a> x")).unwrap();
        assert_eq!(aut.num_states(), 3);
        // States in occurrence order: binder, diamond body, variable.
        assert_eq!(aut.initial, 0);
        assert_eq!(aut.delta[0], Transition::Eps(vec![Target::State(1)]));
        assert_eq!(
            aut.delta[1],
            Transition::Modal("a".to_string(), Target::State(2))
        );
        assert_eq!(aut.delta[2], Transition::Eps(vec![Target::State(1)]));
        assert_eq!(aut.states[0].rank, 0);
        assert_eq!(aut.states[2].rank, 0);
        assert_eq!(aut.states[1].rank, 1);
        assert_eq!(aut.states[1].owner, Player::Eve);
        let r1 = &aut.rank_order.ranks[1];
        assert_eq!(r1.owner, Player::Adam);
        assert!(!r1.standard);
        assert_eq!(
            aut.rank_order.initial_counters.get(&1),
            Some(&Ordinal::omega())
        );
        assert!(aut.rank_order.ranks[0].standard);
        assert!(aut.is_guarded());
    }

    #[test]
    fn top_is_stuck_adam() {
        let aut = from_formula(&Formula::Top).unwrap();
        assert_eq!(aut.num_states(), 1);
        assert_eq!(aut.states[0].owner, Player::Adam);
        assert_eq!(aut.delta[0], Transition::Eps(Vec::new()));
    }

    #[test]
    fn scalar_formula_is_injectively_ranked() {
        let aut = from_formula(&p("mu x. <a> x | nu^w y. <b> (y & x)")).unwrap();
        // Every fixpoint body rank appears on exactly one binder's bodies;
        // for scalar formulas distinct binders get distinct ranks.
        let mut body_ranks: Vec<usize> = aut
            .states
            .iter()
            .map(|s| s.rank)
            .filter(|r| *r > 0)
            .collect();
        body_ranks.sort_unstable();
        let deduped: BTreeSet<usize> = body_ranks.iter().copied().collect();
        assert_eq!(body_ranks.len(), deduped.len());
    }

    #[test]
    fn successor_bound_rejected() {
        assert_eq!(
            from_formula(&p("mu^3 x. <a> x")),
            Err(TranslateError::SuccessorBound("3".to_string()))
        );
        assert!(from_formula(&p("mu^3 x. <a> x").successor_elimination()).is_ok());
    }

    #[test]
    fn guardedness_checks() {
        assert!(from_formula(&p("nu^w x. <a> x")).unwrap().is_guarded());
        assert!(!from_formula(&p("mu x. x | <a> x")).unwrap().is_guarded());
        // No epsilon transitions at all.
        let aut = from_formula(&p("<a> tt")).unwrap();
        assert!(aut.is_guarded());
    }

    #[test]
    fn to_formula_base_cases() {
        // Single Eve state with a modal transition to a variable.
        let aut = CountdownAutomaton {
            states: vec![AutomatonState {
                name: "q".to_string(),
                owner: Player::Eve,
                rank: 0,
            }],
            initial: 0,
            delta: vec![Transition::Modal(
                "a".to_string(),
                Target::Var("x".to_string()),
            )],
            rank_order: RankOrder {
                ranks: vec![RankInfo {
                    owner: Player::Adam,
                    standard: true,
                }],
                initial_counters: BTreeMap::new(),
            },
        };
        assert_eq!(to_formula(&aut).unwrap(), p("<a> x"));

        // Adam state with empty eps-set is tt.
        let aut = CountdownAutomaton {
            states: vec![AutomatonState {
                name: "q".to_string(),
                owner: Player::Adam,
                rank: 0,
            }],
            initial: 0,
            delta: vec![Transition::Eps(Vec::new())],
            rank_order: RankOrder {
                ranks: vec![RankInfo {
                    owner: Player::Adam,
                    standard: true,
                }],
                initial_counters: BTreeMap::new(),
            },
        };
        assert_eq!(to_formula(&aut).unwrap(), Formula::Top);
    }

    #[test]
    fn guard_examples() {
        assert_eq!(guard(&p("mu x. x | <a> x")), p("mu x. ff | <a> x"));
        let already = p("nu^w x. <a> (x | tt)");
        assert_eq!(guard(&already), already);
        let vectorial = guard(&p("nu^w_1 (x,y).(y & <a> x, x | <b> y)"));
        assert!(from_formula(&vectorial).unwrap().is_guarded());
        assert!(vectorial.is_guarded());
    }

    #[test]
    fn guard_of_the_vectorial_example_preserves_denotations() {
        use crate::model::{random_lts, Valuation};
        use crate::semantics::eval;
        let original = p("nu^w_1 (x,y).(y & <a> x, x | <b> y)");
        let guarded = guard(&original);
        for seed in 0..20u64 {
            let lts = random_lts(seed, 1 + (seed as usize % 5), &["a", "b"], 0.4);
            let val = Valuation::new();
            assert_eq!(
                eval(&original, &lts, &val).unwrap(),
                eval(&guarded, &lts, &val).unwrap(),
                "seed {seed}"
            );
        }
    }

    #[test]
    fn translating_the_three_state_automaton_back_preserves_the_language() {
        use crate::model::{random_lts, Valuation};
        use crate::semantics::eval;
        let original = p("nu^w x. <a> x");
        let automaton = from_formula(&original).unwrap();
        let back = to_formula(&automaton).unwrap();
        for seed in 100..120u64 {
            let lts = random_lts(seed, 1 + (seed as usize % 5), &["a"], 0.4);
            let val = Valuation::new();
            assert_eq!(
                eval(&original, &lts, &val).unwrap(),
                eval(&back, &lts, &val).unwrap(),
                "seed {seed}"
            );
        }
    }

    #[test]
    fn json_round_trip() {
        let aut = from_formula(&p("nu^w x. <a> x | ff")).unwrap();
        let text = aut.to_json();
        let back = CountdownAutomaton::from_json(&text).unwrap();
        assert_eq!(aut, back);
    }

    #[test]
    fn json_rejects_malformed() {
        assert!(CountdownAutomaton::from_json("{}").is_err());
        let missing_delta = r#"{"states":[{"name":"q","owner":"E","rank":0}],
            "initial":"q","delta":{},"ranks":[{"owner":"A","standard":true}]}"#;
        assert!(matches!(
            CountdownAutomaton::from_json(missing_delta),
            Err(AutomatonError::DeltaNotTotal(_))
        ));
        let bad_ctr = r#"{"states":[{"name":"q","owner":"E","rank":0}],
            "initial":"q","delta":{"q":{"eps":[]}},
            "ranks":[{"owner":"A","standard":false,"ctr":"w+w"}]}"#;
        assert!(matches!(
            CountdownAutomaton::from_json(bad_ctr),
            Err(AutomatonError::BadCounter(_))
        ));
        let no_ctr = r#"{"states":[{"name":"q","owner":"E","rank":0}],
            "initial":"q","delta":{"q":{"eps":[]}},
            "ranks":[{"owner":"A","standard":false}]}"#;
        assert!(matches!(
            CountdownAutomaton::from_json(no_ctr),
            Err(AutomatonError::MissingCounter(0))
        ));
    }
}
