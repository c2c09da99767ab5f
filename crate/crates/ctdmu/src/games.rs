//! Countdown games: parity games extended with ordinal counters attached to
//! nonstandard ranks.
//!
//! A play alternates between positional configurations (the position's owner
//! picks an edge) and countdown configurations (the owner of the position's
//! rank updates the counters: everything below the rank resets to its initial
//! value, the rank's own counter — if any — is decremented to a strictly
//! smaller ordinal of the mover's choice, higher counters stay). A player
//! without a move loses; in an infinite play the owner of the greatest rank
//! seen infinitely often loses.
//!
//! Solving works by truncating every infinite initial counter to a finite
//! bound `B` and expanding the finite configuration graph into a parity game
//! solved by recursive attractor decomposition. For semantic games
//! `B = |points| * |states| + 1` exceeds the closure ordinal of the induced
//! monotone map, so the truncation preserves winners at all configurations.

use crate::automata::{CountdownAutomaton, Player, RankInfo, RankOrder, Target, Transition};
use crate::model::{Lts, Valuation};
use crate::ordinal::Ordinal;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Positional,
    Countdown,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Positional => write!(f, "pos"),
            Mode::Countdown => write!(f, "ctd"),
        }
    }
}

/// Position + counter valuation + mode.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub position: usize,
    /// Counter value per nonstandard rank.
    pub counters: BTreeMap<usize, Ordinal>,
    pub mode: Mode,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionInfo {
    pub owner: Player,
    pub rank: usize,
    pub label: String,
}

/// Bookkeeping for games that came from an automaton run over a model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemanticInfo {
    pub num_points: usize,
    pub num_states: usize,
    pub num_vars: usize,
    pub initial_state: usize,
    pub point_names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountdownGame {
    pub positions: Vec<PositionInfo>,
    /// Successor lists.
    pub edges: Vec<Vec<usize>>,
    pub rank_order: RankOrder,
    pub semantic: Option<SemanticInfo>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("position index {0} out of range")]
    BadPosition(usize),
    #[error("rank index {0} out of range")]
    BadRank(usize),
    #[error("free variable `{0}` of the automaton has no valuation")]
    UnboundVariable(String),
    #[error("illegal move: {0}")]
    IllegalMove(String),
    #[error("counter for rank {0} too large to expand ({1})")]
    CounterTooLarge(usize, Ordinal),
    #[error("truncated configuration space too large ({0} nodes)")]
    StateSpaceTooLarge(u128),
    #[error("configuration counter exceeds its initial value")]
    CounterAboveInitial,
}

/// Moves available from a configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MoveFamily {
    /// Explicitly enumerable moves; an empty list means the mover is stuck.
    Moves(Vec<Configuration>),
    /// Countdown move at a nonstandard rank with an infinite counter: pick
    /// any ordinal strictly below `strictly_below` for `rank`.
    OrdinalChoice {
        rank: usize,
        strictly_below: Ordinal,
    },
}

/// How a player selects a move in [`CountdownGame::step`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MoveChoice {
    /// Index into the enumerated move list.
    Index(usize),
    /// Ordinal chosen at a countdown configuration.
    Ordinal(Ordinal),
}

impl CountdownGame {
    pub fn new(
        positions: Vec<PositionInfo>,
        edges: Vec<Vec<usize>>,
        rank_order: RankOrder,
    ) -> Result<CountdownGame, GameError> {
        let n = positions.len();
        for p in &positions {
            if p.rank >= rank_order.ranks.len() {
                return Err(GameError::BadRank(p.rank));
            }
        }
        for succs in &edges {
            for s in succs {
                if *s >= n {
                    return Err(GameError::BadPosition(*s));
                }
            }
        }
        Ok(CountdownGame {
            positions,
            edges,
            rank_order,
            semantic: None,
        })
    }

    pub fn num_positions(&self) -> usize {
        self.positions.len()
    }

    /// Default initial configuration at a position: positional mode with all
    /// counters at their initial values.
    pub fn initial_configuration(&self, position: usize) -> Configuration {
        Configuration {
            position,
            counters: self.rank_order.initial_counters.clone(),
            mode: Mode::Positional,
        }
    }

    /// The initial configuration for a model point in a semantic game.
    pub fn initial_configuration_at_point(&self, point: usize) -> Option<Configuration> {
        let info = self.semantic.as_ref()?;
        let width = info.num_states + info.num_vars;
        Some(self.initial_configuration(point * width + info.initial_state))
    }

    /// Who must move from this configuration.
    pub fn mover(&self, c: &Configuration) -> Player {
        match c.mode {
            Mode::Positional => self.positions[c.position].owner,
            Mode::Countdown => {
                let r = self.positions[c.position].rank;
                self.rank_order.ranks[r].owner
            }
        }
    }

    /// Counters after a countdown move at rank `r`: ranks below `r` reset.
    fn reset_below(
        &self,
        counters: &BTreeMap<usize, Ordinal>,
        r: usize,
    ) -> BTreeMap<usize, Ordinal> {
        counters
            .iter()
            .map(|(rank, v)| {
                if *rank < r {
                    (*rank, self.rank_order.initial_counters[rank].clone())
                } else {
                    (*rank, v.clone())
                }
            })
            .collect()
    }

    pub fn legal_moves(&self, c: &Configuration) -> MoveFamily {
        match c.mode {
            Mode::Positional => MoveFamily::Moves(
                self.edges[c.position]
                    .iter()
                    .map(|w| Configuration {
                        position: *w,
                        counters: c.counters.clone(),
                        mode: Mode::Countdown,
                    })
                    .collect(),
            ),
            Mode::Countdown => {
                let r = self.positions[c.position].rank;
                if self.rank_order.ranks[r].standard {
                    return MoveFamily::Moves(vec![Configuration {
                        position: c.position,
                        counters: self.reset_below(&c.counters, r),
                        mode: Mode::Positional,
                    }]);
                }
                let current = &c.counters[&r];
                match current.as_nat() {
                    Some(n) => MoveFamily::Moves(
                        (0..n)
                            .map(|beta| {
                                let mut counters = self.reset_below(&c.counters, r);
                                counters.insert(r, Ordinal::from_nat(beta));
                                Configuration {
                                    position: c.position,
                                    counters,
                                    mode: Mode::Positional,
                                }
                            })
                            .collect(),
                    ),
                    None => MoveFamily::OrdinalChoice {
                        rank: r,
                        strictly_below: current.clone(),
                    },
                }
            }
        }
    }

    /// Apply a chosen move.
    pub fn step(&self, c: &Configuration, choice: &MoveChoice) -> Result<Configuration, GameError> {
        match (c.mode, choice) {
            (Mode::Positional, MoveChoice::Index(i)) => {
                let succs = &self.edges[c.position];
                let w = succs.get(*i).ok_or_else(|| {
                    GameError::IllegalMove(format!("edge index {i} out of {}", succs.len()))
                })?;
                Ok(Configuration {
                    position: *w,
                    counters: c.counters.clone(),
                    mode: Mode::Countdown,
                })
            }
            (Mode::Countdown, choice) => {
                let r = self.positions[c.position].rank;
                if self.rank_order.ranks[r].standard {
                    return Ok(Configuration {
                        position: c.position,
                        counters: self.reset_below(&c.counters, r),
                        mode: Mode::Positional,
                    });
                }
                let beta = match choice {
                    MoveChoice::Ordinal(beta) => beta.clone(),
                    MoveChoice::Index(i) => {
                        // Index into the enumerated family, meaningful for
                        // finite counters.
                        Ordinal::from_nat(*i as u64)
                    }
                };
                if beta >= c.counters[&r] {
                    return Err(GameError::IllegalMove(format!(
                        "ordinal {beta} not below counter {}",
                        c.counters[&r]
                    )));
                }
                let mut counters = self.reset_below(&c.counters, r);
                counters.insert(r, beta);
                Ok(Configuration {
                    position: c.position,
                    counters,
                    mode: Mode::Positional,
                })
            }
            (Mode::Positional, MoveChoice::Ordinal(_)) => Err(GameError::IllegalMove(
                "positional configurations take an edge index".to_string(),
            )),
        }
    }
}

/// The countdown game of an automaton run over a pointed model.
///
/// Positions are pairs of a model point and an automaton state or free
/// variable. Epsilon transitions stay at the point, modal transitions follow
/// the model's edges. A variable position has no moves and belongs to Adam
/// exactly when the point satisfies the variable, so being stuck there
/// encodes acceptance. Variable positions sit at the lowest standard rank; a
/// fresh bottom standard rank is inserted if the automaton has none.
pub fn build_semantic_game(
    aut: &CountdownAutomaton,
    lts: &Lts,
    val: &Valuation,
) -> Result<CountdownGame, GameError> {
    let vars: Vec<String> = aut.free_vars().into_iter().collect();
    for x in &vars {
        if !val.contains_key(x) {
            return Err(GameError::UnboundVariable(x.clone()));
        }
    }

    // Rank order, possibly extended with a fresh bottom standard rank for
    // variable positions.
    let lowest_standard = aut.rank_order.ranks.iter().position(|r| r.standard);
    let (rank_order, shift, var_rank) = match lowest_standard {
        Some(r) => (aut.rank_order.clone(), 0usize, r),
        None => {
            let mut ranks = vec![RankInfo {
                owner: Player::Adam,
                standard: true,
            }];
            ranks.extend(aut.rank_order.ranks.iter().cloned());
            let initial_counters = aut
                .rank_order
                .initial_counters
                .iter()
                .map(|(r, o)| (r + 1, o.clone()))
                .collect();
            (
                RankOrder {
                    ranks,
                    initial_counters,
                },
                1usize,
                0usize,
            )
        }
    };

    let num_points = lts.num_points();
    let num_states = aut.num_states();
    let num_vars = vars.len();
    let width = num_states + num_vars;
    let var_slot =
        |x: &str| num_states + vars.iter().position(|v| v == x).expect("declared variable");
    let pos_of = |m: usize, slot: usize| m * width + slot;

    let mut positions = Vec::with_capacity(num_points * width);
    let mut edges: Vec<Vec<usize>> = Vec::with_capacity(num_points * width);
    for m in 0..num_points {
        for q in 0..num_states {
            let st = &aut.states[q];
            positions.push(PositionInfo {
                owner: st.owner,
                rank: st.rank + shift,
                label: format!("({}, {})", lts.point_name(m), st.name),
            });
            let target_pos = |point: usize, t: &Target| match t {
                Target::State(p) => pos_of(point, *p),
                Target::Var(x) => pos_of(point, var_slot(x)),
            };
            let succs = match &aut.delta[q] {
                Transition::Eps(ts) => ts.iter().map(|t| target_pos(m, t)).collect(),
                Transition::Modal(a, t) => match lts.action_index(a) {
                    Some(act) => lts
                        .successors(act, m)
                        .iter()
                        .map(|n| target_pos(n, t))
                        .collect(),
                    // Actions absent from the model have no successors.
                    None => Vec::new(),
                },
            };
            edges.push(succs);
        }
        for x in &vars {
            let holds = val[x].contains(m);
            positions.push(PositionInfo {
                owner: if holds { Player::Adam } else { Player::Eve },
                rank: var_rank,
                label: format!("({}, {})", lts.point_name(m), x),
            });
            edges.push(Vec::new());
        }
    }

    Ok(CountdownGame {
        positions,
        edges,
        rank_order,
        semantic: Some(SemanticInfo {
            num_points,
            num_states,
            num_vars,
            initial_state: aut.initial,
            point_names: lts.points().to_vec(),
        }),
    })
}

/// Counter truncation policy for [`solve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    /// Per rank: one more than the number of positions carrying the rank.
    /// A rank's counter only distinguishes values below the closure ordinal
    /// of the binder it came from, which on a finite model is at most the
    /// number of point/state pairs at that rank.
    Auto,
    /// The same finite bound for every infinite counter.
    Bound(u64),
}

/// Winners and a winning strategy over the truncated configuration graph.
pub struct SolveResult {
    game: ExpandedGame,
    winners: Vec<Player>,
    strategy: Vec<Option<usize>>,
}

struct ExpandedGame {
    num_positions: usize,
    /// Nonstandard rank indices in increasing order.
    slots: Vec<usize>,
    /// Truncated initial counter per slot.
    init: Vec<u64>,
    /// Mixed radix per slot (`init + 1`).
    radix: Vec<u64>,
    box_size: u64,
    truncation: u64,
    /// Per expanded node.
    owner: Vec<Player>,
    priority: Vec<usize>,
    succs: Vec<Vec<u32>>,
    /// Winner when a priority recurs forever.
    winner_if_top: Vec<Player>,
    /// Rank per position, for decoding.
    position_rank: Vec<usize>,
}

impl ExpandedGame {
    fn encode(&self, position: usize, ctr: &[u64], mode: Mode) -> u32 {
        let mut code = 0u64;
        for (i, v) in ctr.iter().enumerate() {
            code = code * self.radix[i] + v;
        }
        let mode_bit = match mode {
            Mode::Positional => 0u64,
            Mode::Countdown => 1u64,
        };
        ((position as u64 * self.box_size + code) * 2 + mode_bit) as u32
    }

    fn decode(&self, node: u32) -> (usize, Vec<u64>, Mode) {
        let node = node as u64;
        let mode = if node.is_multiple_of(2) {
            Mode::Positional
        } else {
            Mode::Countdown
        };
        let rest = node / 2;
        let position = (rest / self.box_size) as usize;
        let mut code = rest % self.box_size;
        let mut ctr = vec![0u64; self.slots.len()];
        for i in (0..self.slots.len()).rev() {
            ctr[i] = code % self.radix[i];
            code /= self.radix[i];
        }
        (position, ctr, mode)
    }

    fn num_real_nodes(&self) -> usize {
        self.num_positions * self.box_size as usize * 2
    }

    /// Truncate an ordinal-valued counter map to slot values.
    fn truncate_counters(&self, counters: &BTreeMap<usize, Ordinal>) -> Vec<u64> {
        self.slots
            .iter()
            .enumerate()
            .map(|(i, r)| match counters.get(r).and_then(|o| o.as_nat()) {
                Some(n) => n.min(self.init[i]),
                None => self.init[i],
            })
            .collect()
    }
}

impl SolveResult {
    /// Winner at a configuration of the original game. Counters are
    /// truncated to the solver's bound first.
    pub fn winner_at(&self, c: &Configuration) -> Player {
        let ctr = self.game.truncate_counters(&c.counters);
        let node = self.game.encode(c.position, &ctr, c.mode);
        self.winners[node as usize]
    }

    /// The largest truncation bound used for an infinite counter.
    pub fn truncation(&self) -> u64 {
        self.game.truncation
    }

    /// Truncated counter box size (configurations per position and mode).
    pub fn box_size(&self) -> u64 {
        self.game.box_size
    }

    /// All truncated configurations with their winners.
    pub fn configurations(&self) -> impl Iterator<Item = (Configuration, Player)> + '_ {
        (0..self.game.num_real_nodes() as u32).map(move |node| {
            let (position, ctr, mode) = self.game.decode(node);
            let counters = self
                .game
                .slots
                .iter()
                .zip(&ctr)
                .map(|(r, v)| (*r, Ordinal::from_nat(*v)))
                .collect();
            (
                Configuration {
                    position,
                    counters,
                    mode,
                },
                self.winners[node as usize],
            )
        })
    }

    /// The strategy move at a configuration owned by its winner, as the
    /// successor configuration in the truncated game.
    pub fn strategy_at(&self, c: &Configuration) -> Option<Configuration> {
        let ctr = self.game.truncate_counters(&c.counters);
        let node = self.game.encode(c.position, &ctr, c.mode);
        let succ = self.strategy[node as usize]?;
        if succ >= self.game.num_real_nodes() {
            return None;
        }
        let (position, ctr, mode) = self.game.decode(succ as u32);
        let counters = self
            .game
            .slots
            .iter()
            .zip(&ctr)
            .map(|(r, v)| (*r, Ordinal::from_nat(*v)))
            .collect();
        Some(Configuration {
            position,
            counters,
            mode,
        })
    }

    /// Expanded successor configurations (truncated graph), for exhaustive
    /// strategy validation.
    pub fn truncated_successors(&self, c: &Configuration) -> Vec<Configuration> {
        let ctr = self.game.truncate_counters(&c.counters);
        let node = self.game.encode(c.position, &ctr, c.mode);
        self.game.succs[node as usize]
            .iter()
            .filter(|s| (**s as usize) < self.game.num_real_nodes())
            .map(|s| {
                let (position, ctr, mode) = self.game.decode(*s);
                let counters = self
                    .game
                    .slots
                    .iter()
                    .zip(&ctr)
                    .map(|(r, v)| (*r, Ordinal::from_nat(*v)))
                    .collect();
                Configuration {
                    position,
                    counters,
                    mode,
                }
            })
            .collect()
    }

    /// Rank of a position (priority of its configurations).
    pub fn position_rank(&self, position: usize) -> usize {
        self.game.position_rank[position]
    }
}

/// Truncated value of every infinite initial counter, per nonstandard rank.
pub fn truncation_bounds(game: &CountdownGame, truncation: Truncation) -> BTreeMap<usize, u64> {
    game.rank_order
        .nonstandard()
        .map(|r| {
            let b = match truncation {
                Truncation::Bound(b) => b.max(1),
                Truncation::Auto => {
                    game.positions.iter().filter(|p| p.rank == r).count() as u64 + 1
                }
            };
            (r, b)
        })
        .collect()
}

/// Solve the truncated configuration graph of a countdown game.
pub fn solve(game: &CountdownGame, truncation: Truncation) -> Result<SolveResult, GameError> {
    let bounds = truncation_bounds(game, truncation);

    let slots: Vec<usize> = game.rank_order.nonstandard().collect();
    let mut init = Vec::with_capacity(slots.len());
    for r in &slots {
        let o = &game.rank_order.initial_counters[r];
        let v = match o.as_nat() {
            Some(n) => n,
            None => bounds[r],
        };
        if v > 1 << 20 {
            return Err(GameError::CounterTooLarge(*r, o.clone()));
        }
        init.push(v);
    }
    let radix: Vec<u64> = init.iter().map(|v| v + 1).collect();
    let box_size: u128 = radix.iter().map(|r| *r as u128).product();
    let total: u128 = game.positions.len() as u128 * box_size * 2 + 2;
    if total > 6_000_000 {
        return Err(GameError::StateSpaceTooLarge(total));
    }
    let box_size = box_size as u64;

    let num_nodes = total as usize;
    let sink_eve_loses = num_nodes - 2;
    let sink_adam_loses = num_nodes - 1;

    let mut expanded = ExpandedGame {
        num_positions: game.positions.len(),
        slots: slots.clone(),
        init: init.clone(),
        radix,
        box_size,
        truncation: bounds.values().copied().max().unwrap_or(1),
        owner: vec![Player::Eve; num_nodes],
        priority: vec![0; num_nodes],
        succs: vec![Vec::new(); num_nodes],
        winner_if_top: Vec::new(),
        position_rank: game.positions.iter().map(|p| p.rank).collect(),
    };

    // Priorities are rank indices; a rank's owner loses when it recurs.
    // Two extra priorities mark the absorbing loss sinks.
    let num_ranks = game.rank_order.ranks.len();
    expanded.winner_if_top = (0..num_ranks)
        .map(|r| game.rank_order.ranks[r].owner.opponent())
        .collect();
    expanded.winner_if_top.push(Player::Adam); // sink where Eve is stuck
    expanded.winner_if_top.push(Player::Eve); // sink where Adam is stuck

    expanded.owner[sink_eve_loses] = Player::Eve;
    expanded.priority[sink_eve_loses] = num_ranks;
    expanded.succs[sink_eve_loses] = vec![sink_eve_loses as u32];
    expanded.owner[sink_adam_loses] = Player::Adam;
    expanded.priority[sink_adam_loses] = num_ranks + 1;
    expanded.succs[sink_adam_loses] = vec![sink_adam_loses as u32];

    let slot_of_rank: BTreeMap<usize, usize> =
        slots.iter().enumerate().map(|(i, r)| (*r, i)).collect();

    // Expand the full box of truncated configurations.
    for position in 0..game.positions.len() {
        let rank = game.positions[position].rank;
        for code in 0..box_size {
            let mut ctr = vec![0u64; slots.len()];
            let mut rest = code;
            for i in (0..slots.len()).rev() {
                ctr[i] = rest % expanded.radix[i];
                rest /= expanded.radix[i];
            }
            for mode in [Mode::Positional, Mode::Countdown] {
                let node = expanded.encode(position, &ctr, mode) as usize;
                expanded.priority[node] = rank;
                let mover = match mode {
                    Mode::Positional => game.positions[position].owner,
                    Mode::Countdown => game.rank_order.ranks[rank].owner,
                };
                expanded.owner[node] = mover;
                let mut succs: Vec<u32> = Vec::new();
                match mode {
                    Mode::Positional => {
                        for w in &game.edges[position] {
                            succs.push(expanded.encode(*w, &ctr, Mode::Countdown));
                        }
                    }
                    Mode::Countdown => {
                        // Reset below the rank, then decrement when the rank
                        // is nonstandard.
                        let mut reset = ctr.clone();
                        for (i, r) in slots.iter().enumerate() {
                            if *r < rank {
                                reset[i] = init[i];
                            }
                        }
                        match slot_of_rank.get(&rank) {
                            None => {
                                succs.push(expanded.encode(position, &reset, Mode::Positional));
                            }
                            Some(&slot) => {
                                for beta in 0..ctr[slot] {
                                    let mut next = reset.clone();
                                    next[slot] = beta;
                                    succs.push(expanded.encode(position, &next, Mode::Positional));
                                }
                            }
                        }
                    }
                }
                if succs.is_empty() {
                    // Stuck: the mover loses.
                    succs.push(match mover {
                        Player::Eve => sink_eve_loses as u32,
                        Player::Adam => sink_adam_loses as u32,
                    });
                }
                expanded.succs[node] = succs;
            }
        }
    }

    // Attractor decomposition needs a deep stack on large boxes.
    let (winners, strategy) = std::thread::scope(|scope| {
        std::thread::Builder::new()
            .stack_size(256 * 1024 * 1024)
            .spawn_scoped(scope, || zielonka_solve(&expanded))
            .expect("spawn solver thread")
            .join()
            .expect("solver thread")
    });

    Ok(SolveResult {
        game: expanded,
        winners,
        strategy,
    })
}

fn zielonka_solve(g: &ExpandedGame) -> (Vec<Player>, Vec<Option<usize>>) {
    let n = g.succs.len();
    let mut preds: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (v, succs) in g.succs.iter().enumerate() {
        for w in succs {
            preds[*w as usize].push(v as u32);
        }
    }
    let mut winners = vec![Player::Eve; n];
    let mut strategy: Vec<Option<usize>> = vec![None; n];
    let present = vec![true; n];
    zielonka_rec(g, &preds, present, &mut winners, &mut strategy);
    // Stale entries can survive the nested recursions; a strategy is only
    // meaningful where the owner wins.
    for v in 0..n {
        if winners[v] != g.owner[v] {
            strategy[v] = None;
        }
    }
    (winners, strategy)
}

/// Attractor of `targets` for `player` within `present`. Fills `strat` with
/// the attracting move for player-owned nodes pulled in (not for targets).
fn attractor(
    g: &ExpandedGame,
    preds: &[Vec<u32>],
    present: &[bool],
    player: Player,
    targets: &[u32],
    strat: &mut [Option<usize>],
) -> Vec<bool> {
    let n = g.succs.len();
    let mut in_attr = vec![false; n];
    let mut out_count = vec![0u32; n];
    for v in 0..n {
        if present[v] && g.owner[v] != player {
            out_count[v] = g.succs[v].iter().filter(|w| present[**w as usize]).count() as u32;
        }
    }
    let mut queue: Vec<u32> = Vec::new();
    for t in targets {
        if present[*t as usize] && !in_attr[*t as usize] {
            in_attr[*t as usize] = true;
            queue.push(*t);
        }
    }
    let mut qi = 0;
    while qi < queue.len() {
        let v = queue[qi];
        qi += 1;
        for &u in &preds[v as usize] {
            let u = u as usize;
            if !present[u] || in_attr[u] {
                continue;
            }
            if g.owner[u] == player {
                in_attr[u] = true;
                strat[u] = Some(v as usize);
                queue.push(u as u32);
            } else {
                out_count[u] -= 1;
                if out_count[u] == 0 {
                    in_attr[u] = true;
                    queue.push(u as u32);
                }
            }
        }
    }
    in_attr
}

fn zielonka_rec(
    g: &ExpandedGame,
    preds: &[Vec<u32>],
    present: Vec<bool>,
    winners: &mut [Player],
    strategy: &mut [Option<usize>],
) {
    let nodes: Vec<u32> = (0..g.succs.len() as u32)
        .filter(|v| present[*v as usize])
        .collect();
    if nodes.is_empty() {
        return;
    }
    let top = nodes
        .iter()
        .map(|v| g.priority[*v as usize])
        .max()
        .expect("nonempty");
    let favored = g.winner_if_top[top];
    let targets: Vec<u32> = nodes
        .iter()
        .copied()
        .filter(|v| g.priority[*v as usize] == top)
        .collect();

    let mut attr_strat: Vec<Option<usize>> = vec![None; g.succs.len()];
    let attr = attractor(g, preds, &present, favored, &targets, &mut attr_strat);

    let mut rest = present.clone();
    for (i, a) in attr.iter().enumerate() {
        if *a {
            rest[i] = false;
        }
    }
    zielonka_rec(g, preds, rest.clone(), winners, strategy);

    let opponent_region: Vec<u32> = nodes
        .iter()
        .copied()
        .filter(|v| !attr[*v as usize] && winners[*v as usize] == favored.opponent())
        .collect();

    if opponent_region.is_empty() {
        // `favored` wins everywhere in the current subgame.
        for &v in &nodes {
            let v = v as usize;
            winners[v] = favored;
            if attr[v] && g.owner[v] == favored {
                if let Some(mv) = attr_strat[v] {
                    strategy[v] = Some(mv);
                } else {
                    // A top-priority target: any move inside the subgame.
                    strategy[v] = g.succs[v]
                        .iter()
                        .find(|w| present[**w as usize])
                        .map(|w| *w as usize);
                }
            }
        }
    } else {
        let mut op_strat: Vec<Option<usize>> = vec![None; g.succs.len()];
        let op_attr = attractor(
            g,
            preds,
            &present,
            favored.opponent(),
            &opponent_region,
            &mut op_strat,
        );
        // The opponent keeps the recursive strategy inside the region and
        // attracts toward it elsewhere (targets have no attractor move).
        for &v in &nodes {
            let v = v as usize;
            if op_attr[v] {
                winners[v] = favored.opponent();
                if g.owner[v] == favored.opponent() {
                    if let Some(mv) = op_strat[v] {
                        strategy[v] = Some(mv);
                    }
                }
            }
        }
        let mut rest2 = present;
        for (i, a) in op_attr.iter().enumerate() {
            if *a {
                rest2[i] = false;
            }
        }
        zielonka_rec(g, preds, rest2, winners, strategy);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::from_formula;
    use crate::model::build_lasso;
    use crate::syntax::Formula;
    use std::collections::BTreeSet;

    fn p3() -> Lts {
        Lts::new(
            vec!["p0".into(), "p1".into(), "p2".into()],
            vec!["a".into()],
            &[
                ("p2".into(), "a".into(), "p1".into()),
                ("p1".into(), "a".into(), "p0".into()),
            ],
        )
        .unwrap()
    }

    fn unbounded_path_game(lts: &Lts) -> CountdownGame {
        let aut = from_formula(&Formula::parse("nu^w x. <a> x").unwrap()).unwrap();
        build_semantic_game(&aut, lts, &Valuation::new()).unwrap()
    }

    #[test]
    fn semantic_game_shape() {
        let lts = p3();
        let g = unbounded_path_game(&lts);
        // |positions| = |M| * (|Q| + |FreeVar|).
        assert_eq!(g.num_positions(), 3 * 3);
        // (p0, diamond state) has no outgoing edges: p0 has no successor.
        let diamond_pos = 1; // (p0, diamond state)
        assert!(g.edges[diamond_pos].is_empty());
    }

    #[test]
    fn adam_wins_at_omega_eve_at_two() {
        let lts = p3();
        let g = unbounded_path_game(&lts);
        let solved = solve(&g, Truncation::Auto).unwrap();
        let at = |point: usize| solved.winner_at(&g.initial_configuration_at_point(point).unwrap());
        // No point of the chain has unbounded paths.
        assert_eq!(at(0), Player::Adam);
        assert_eq!(at(1), Player::Adam);
        assert_eq!(at(2), Player::Adam);

        // With counter 2 instead: Eve wins exactly at p2 (path of length 2).
        let mut g2 = g.clone();
        g2.rank_order
            .initial_counters
            .insert(1, Ordinal::from_nat(2));
        let solved = solve(&g2, Truncation::Auto).unwrap();
        let at =
            |point: usize| solved.winner_at(&g2.initial_configuration_at_point(point).unwrap());
        assert_eq!(at(2), Player::Eve);
        assert_eq!(at(1), Player::Adam);
        assert_eq!(at(0), Player::Adam);
    }

    #[test]
    fn self_loop_gives_eve_the_win_at_omega() {
        let loop1 = build_lasso("", "a").unwrap();
        let g = unbounded_path_game(&loop1);
        let solved = solve(&g, Truncation::Auto).unwrap();
        assert_eq!(
            solved.winner_at(&g.initial_configuration_at_point(0).unwrap()),
            Player::Eve
        );
    }

    #[test]
    fn countdown_at_higher_rank_resets_lower_counters() {
        // Two nonstandard ranks 1 < 2 with initial counters 5 and 4. A
        // countdown move at rank 2 must reset rank 1 to its initial value
        // and leave higher counters alone; at rank 1 it must leave rank 2
        // untouched.
        let rank_order = RankOrder {
            ranks: vec![
                RankInfo {
                    owner: Player::Adam,
                    standard: true,
                },
                RankInfo {
                    owner: Player::Eve,
                    standard: false,
                },
                RankInfo {
                    owner: Player::Adam,
                    standard: false,
                },
            ],
            initial_counters: BTreeMap::from([
                (1usize, Ordinal::from_nat(5)),
                (2usize, Ordinal::from_nat(4)),
            ]),
        };
        let g = CountdownGame::new(
            vec![
                PositionInfo {
                    owner: Player::Eve,
                    rank: 2,
                    label: "high".into(),
                },
                PositionInfo {
                    owner: Player::Eve,
                    rank: 1,
                    label: "low".into(),
                },
                PositionInfo {
                    owner: Player::Eve,
                    rank: 0,
                    label: "std".into(),
                },
            ],
            vec![vec![1], vec![0], vec![0]],
            rank_order,
        )
        .unwrap();
        // Decremented low counter, then a countdown at the high rank.
        let c = Configuration {
            position: 0,
            counters: BTreeMap::from([
                (1usize, Ordinal::from_nat(2)),
                (2usize, Ordinal::from_nat(3)),
            ]),
            mode: Mode::Countdown,
        };
        let next = g
            .step(&c, &MoveChoice::Ordinal(Ordinal::from_nat(1)))
            .unwrap();
        assert_eq!(next.counters[&1], Ordinal::from_nat(5), "lower rank resets");
        assert_eq!(
            next.counters[&2],
            Ordinal::from_nat(1),
            "own rank decrements"
        );

        // Countdown at the low rank: the higher counter is unchanged.
        let c = Configuration {
            position: 1,
            counters: BTreeMap::from([
                (1usize, Ordinal::from_nat(2)),
                (2usize, Ordinal::from_nat(3)),
            ]),
            mode: Mode::Countdown,
        };
        let next = g.step(&c, &MoveChoice::Ordinal(Ordinal::zero())).unwrap();
        assert_eq!(next.counters[&1], Ordinal::zero());
        assert_eq!(
            next.counters[&2],
            Ordinal::from_nat(3),
            "higher rank untouched"
        );

        // The bottom standard rank resets nothing.
        let c = Configuration {
            position: 2,
            counters: BTreeMap::from([
                (1usize, Ordinal::from_nat(2)),
                (2usize, Ordinal::from_nat(3)),
            ]),
            mode: Mode::Countdown,
        };
        let MoveFamily::Moves(moves) = g.legal_moves(&c) else {
            panic!("standard rank is deterministic")
        };
        assert_eq!(moves.len(), 1);
        assert_eq!(moves[0].counters[&1], Ordinal::from_nat(2));
        assert_eq!(moves[0].counters[&2], Ordinal::from_nat(3));
    }

    #[test]
    fn standard_rank_above_counters_resets_them() {
        // A standard rank sitting above nonstandard ones: its (single,
        // deterministic) countdown move resets every counter below it.
        let rank_order = RankOrder {
            ranks: vec![
                RankInfo {
                    owner: Player::Adam,
                    standard: true,
                },
                RankInfo {
                    owner: Player::Eve,
                    standard: false,
                },
                RankInfo {
                    owner: Player::Adam,
                    standard: true,
                },
            ],
            initial_counters: BTreeMap::from([(1usize, Ordinal::from_nat(5))]),
        };
        let g = CountdownGame::new(
            vec![PositionInfo {
                owner: Player::Eve,
                rank: 2,
                label: "top".into(),
            }],
            vec![vec![0]],
            rank_order,
        )
        .unwrap();
        let c = Configuration {
            position: 0,
            counters: BTreeMap::from([(1usize, Ordinal::from_nat(2))]),
            mode: Mode::Countdown,
        };
        let MoveFamily::Moves(moves) = g.legal_moves(&c) else {
            panic!("standard rank is deterministic")
        };
        assert_eq!(moves.len(), 1);
        assert_eq!(
            moves[0].counters[&1],
            Ordinal::from_nat(5),
            "reset to initial"
        );
        assert_eq!(moves[0].mode, Mode::Positional);
    }

    #[test]
    fn adequacy_holds_for_unguarded_formulas() {
        use crate::semantics::eval;
        let lts = build_lasso("ab", "ba").unwrap();
        for src in ["mu x. x | <a> x", "nu^w x. x & <b> x", "mu^2 x. x | <a> x"] {
            let f = Formula::parse(src).unwrap();
            let by_eval = eval(&f, &lts, &Valuation::new()).unwrap();
            let by_game = crate::regress::eval_via_game(&f, &lts, &Valuation::new()).unwrap();
            assert_eq!(by_eval, by_game, "unguarded adequacy for {src}");
        }
    }

    #[test]
    fn standalone_eve_self_loop_with_adam_counter() {
        // One Eve position with a self-loop; its rank is nonstandard and
        // Adam-owned with initial counter omega. Adam's forced descent
        // exhausts any natural he picks.
        let rank_order = RankOrder {
            ranks: vec![
                RankInfo {
                    owner: Player::Adam,
                    standard: true,
                },
                RankInfo {
                    owner: Player::Adam,
                    standard: false,
                },
            ],
            initial_counters: BTreeMap::from([(1usize, Ordinal::omega())]),
        };
        let g = CountdownGame::new(
            vec![PositionInfo {
                owner: Player::Eve,
                rank: 1,
                label: "v".into(),
            }],
            vec![vec![0]],
            rank_order,
        )
        .unwrap();
        let solved = solve(&g, Truncation::Bound(2)).unwrap();
        assert_eq!(solved.winner_at(&g.initial_configuration(0)), Player::Eve);
    }

    #[test]
    fn legal_moves_and_step() {
        let lts = p3();
        let g = unbounded_path_game(&lts);
        let init = g.initial_configuration_at_point(2).unwrap();
        // Deterministic eps move to the diamond state.
        let MoveFamily::Moves(moves) = g.legal_moves(&init) else {
            panic!("positional moves are enumerable")
        };
        assert_eq!(moves.len(), 1);
        let c1 = g.step(&init, &MoveChoice::Index(0)).unwrap();
        assert_eq!(c1.mode, Mode::Countdown);

        // Countdown at the omega counter: symbolic family.
        match g.legal_moves(&c1) {
            MoveFamily::OrdinalChoice {
                rank,
                strictly_below,
            } => {
                assert_eq!(rank, 1);
                assert_eq!(strictly_below, Ordinal::omega());
            }
            other => panic!("expected ordinal choice, got {other:?}"),
        }
        let c2 = g
            .step(&c1, &MoveChoice::Ordinal(Ordinal::from_nat(5)))
            .unwrap();
        assert_eq!(c2.counters[&1], Ordinal::from_nat(5));
        assert_eq!(c2.mode, Mode::Positional);

        // Walk to the next countdown at the nonstandard rank: modal move to
        // (p1, x), deterministic standard countdown, eps back to the diamond.
        let c3 = g.step(&c2, &MoveChoice::Index(0)).unwrap();
        let c4 = g.step(&c3, &MoveChoice::Index(0)).unwrap();
        assert_eq!(c4.mode, Mode::Positional);
        let c5 = g.step(&c4, &MoveChoice::Index(0)).unwrap();
        assert_eq!(c5.mode, Mode::Countdown);
        assert_eq!(c5.counters[&1], Ordinal::from_nat(5));
        // Choosing an ordinal not below the counter is illegal.
        assert!(matches!(
            g.step(&c5, &MoveChoice::Ordinal(Ordinal::from_nat(5))),
            Err(GameError::IllegalMove(_))
        ));
        assert!(g
            .step(&c5, &MoveChoice::Ordinal(Ordinal::from_nat(4)))
            .is_ok());

        // Counter 0 at a countdown configuration: stuck.
        let mut c0 = c1.clone();
        c0.counters.insert(1, Ordinal::zero());
        match g.legal_moves(&c0) {
            MoveFamily::Moves(moves) => assert!(moves.is_empty()),
            other => panic!("expected stuck, got {other:?}"),
        }

        // Position with no outgoing edges: empty positional move list.
        let stuck = Configuration {
            position: 1, // (p0, diamond state)
            counters: g.rank_order.initial_counters.clone(),
            mode: Mode::Positional,
        };
        match g.legal_moves(&stuck) {
            MoveFamily::Moves(moves) => assert!(moves.is_empty()),
            other => panic!("expected stuck, got {other:?}"),
        }
    }

    #[test]
    fn finite_counter_moves_enumerate() {
        let lts = p3();
        let mut g = unbounded_path_game(&lts);
        g.rank_order
            .initial_counters
            .insert(1, Ordinal::from_nat(3));
        let init = g.initial_configuration_at_point(2).unwrap();
        let c1 = g.step(&init, &MoveChoice::Index(0)).unwrap();
        let MoveFamily::Moves(moves) = g.legal_moves(&c1) else {
            panic!("finite counter enumerates")
        };
        assert_eq!(moves.len(), 3);
        for (beta, m) in moves.iter().enumerate() {
            assert_eq!(m.counters[&1], Ordinal::from_nat(beta as u64));
        }
    }

    #[test]
    fn truncation_is_stable() {
        let lts = p3();
        let g = unbounded_path_game(&lts);
        let auto = solve(&g, Truncation::Auto).unwrap();
        let b = auto.truncation();
        let more = solve(&g, Truncation::Bound(b + 2)).unwrap();
        for point in 0..3 {
            let c = g.initial_configuration_at_point(point).unwrap();
            assert_eq!(auto.winner_at(&c), more.winner_at(&c));
        }
    }

    /// Exhaustive replay: from every configuration, following the winner's
    /// strategy against all opponent moves never reaches a configuration won
    /// by the opponent, and every cycle of the restricted graph favors the
    /// winner.
    fn validate_strategies(g: &CountdownGame, solved: &SolveResult) {
        let configs: Vec<(Configuration, Player)> = solved.configurations().collect();
        for (c, w) in &configs {
            let mover = g.mover(c);
            let succs = solved.truncated_successors(c);
            if succs.is_empty() {
                // Stuck: the mover loses.
                assert_ne!(*w, mover, "stuck mover should lose at {c:?}");
                continue;
            }
            if mover == *w {
                let chosen = solved
                    .strategy_at(c)
                    .unwrap_or_else(|| panic!("winner {w} has no move at {c:?}"));
                assert!(
                    succs.contains(&chosen),
                    "strategy move at {c:?} is not a legal successor"
                );
                assert_eq!(solved.winner_at(&chosen), *w, "strategy leaves the region");
            } else {
                for s in &succs {
                    assert_eq!(
                        solved.winner_at(s),
                        *w,
                        "opponent escapes the winning region at {c:?}"
                    );
                }
            }
        }
        // Cycle check on the strategy-restricted graph, per winner: every
        // cycle the opponent can force must have its top rank owned by the
        // opponent. SCC peeling: if an SCC's top rank belongs to the winner
        // there is a bad cycle through it; otherwise drop the top-rank nodes
        // and recurse.
        for player in [Player::Eve, Player::Adam] {
            let region: Vec<Configuration> = configs
                .iter()
                .filter(|(_, w)| *w == player)
                .map(|(c, _)| c.clone())
                .collect();
            let idx: BTreeMap<&Configuration, usize> =
                region.iter().enumerate().map(|(i, c)| (c, i)).collect();
            let succs: Vec<Vec<usize>> = region
                .iter()
                .map(|c| {
                    let outs = if g.mover(c) == player {
                        solved.strategy_at(c).into_iter().collect::<Vec<_>>()
                    } else {
                        solved.truncated_successors(c)
                    };
                    outs.iter().filter_map(|s| idx.get(s).copied()).collect()
                })
                .collect();
            let ranks: Vec<usize> = region
                .iter()
                .map(|c| g.positions[c.position].rank)
                .collect();
            assert!(
                no_cycle_tops_owned_by(
                    &(0..region.len()).collect::<Vec<_>>(),
                    &succs,
                    &ranks,
                    |r| g.rank_order.ranks[r].owner == player,
                ),
                "winner {player} can be trapped in a cycle whose top rank is theirs"
            );
        }
    }

    /// True iff no cycle within `nodes` has its maximal rank satisfying
    /// `bad_top`.
    fn no_cycle_tops_owned_by(
        nodes: &[usize],
        succs: &[Vec<usize>],
        ranks: &[usize],
        bad_top: impl Fn(usize) -> bool + Copy,
    ) -> bool {
        if nodes.is_empty() {
            return true;
        }
        for scc in strongly_connected(nodes, succs) {
            let has_cycle = scc.len() > 1 || succs[scc[0]].contains(&scc[0]);
            if !has_cycle {
                continue;
            }
            let top = scc.iter().map(|v| ranks[*v]).max().expect("nonempty");
            if bad_top(top) {
                return false;
            }
            let rest: Vec<usize> = scc.iter().copied().filter(|v| ranks[*v] != top).collect();
            if !no_cycle_tops_owned_by(&rest, succs, ranks, bad_top) {
                return false;
            }
        }
        true
    }

    /// Tarjan over the subgraph induced by `nodes`.
    fn strongly_connected(nodes: &[usize], succs: &[Vec<usize>]) -> Vec<Vec<usize>> {
        let present: BTreeSet<usize> = nodes.iter().copied().collect();
        let mut index_of: BTreeMap<usize, usize> = BTreeMap::new();
        let mut low: BTreeMap<usize, usize> = BTreeMap::new();
        let mut on_stack: BTreeSet<usize> = BTreeSet::new();
        let mut stack: Vec<usize> = Vec::new();
        let mut next_index = 0usize;
        let mut out = Vec::new();

        // Iterative Tarjan.
        for &root in nodes {
            if index_of.contains_key(&root) {
                continue;
            }
            let mut call: Vec<(usize, usize)> = vec![(root, 0)];
            index_of.insert(root, next_index);
            low.insert(root, next_index);
            next_index += 1;
            stack.push(root);
            on_stack.insert(root);
            while let Some(&(v, ei)) = call.last() {
                let vsuccs: Vec<usize> = succs[v]
                    .iter()
                    .copied()
                    .filter(|w| present.contains(w))
                    .collect();
                if ei < vsuccs.len() {
                    call.last_mut().expect("nonempty").1 += 1;
                    let w = vsuccs[ei];
                    match index_of.get(&w) {
                        None => {
                            index_of.insert(w, next_index);
                            low.insert(w, next_index);
                            next_index += 1;
                            stack.push(w);
                            on_stack.insert(w);
                            call.push((w, 0));
                        }
                        Some(&lw) if on_stack.contains(&w) => {
                            let lv = low[&v];
                            low.insert(v, lv.min(lw));
                        }
                        Some(_) => {}
                    }
                } else {
                    call.pop();
                    if let Some(&(parent, _)) = call.last() {
                        let lv = low[&v];
                        let lp = low[&parent];
                        low.insert(parent, lp.min(lv));
                    }
                    if low[&v] == index_of[&v] {
                        let mut scc = Vec::new();
                        loop {
                            let w = stack.pop().expect("stack nonempty");
                            on_stack.remove(&w);
                            scc.push(w);
                            if w == v {
                                break;
                            }
                        }
                        out.push(scc);
                    }
                }
            }
        }
        out
    }

    #[test]
    fn extracted_strategies_win_their_regions() {
        use crate::rng::SplitMix64;
        let lts = p3();
        let g = unbounded_path_game(&lts);
        let solved = solve(&g, Truncation::Auto).unwrap();
        validate_strategies(&g, &solved);

        // A few random standalone games.
        let mut rng = SplitMix64::new(77);
        for _ in 0..10 {
            let game = crate::regress::random_game(&mut rng);
            let solved = solve(&game, Truncation::Auto).unwrap();
            validate_strategies(&game, &solved);
        }
    }

    #[test]
    fn determinacy_every_configuration_has_one_winner() {
        let lts = p3();
        let g = unbounded_path_game(&lts);
        let solved = solve(&g, Truncation::Bound(3)).unwrap();
        let mut count = 0;
        for (_, _w) in solved.configurations() {
            count += 1;
        }
        assert_eq!(count, 9 * 4 * 2);
    }
}
