//! Regression suites: deterministic fuzz generators, independent oracles,
//! and the acceptance criteria. Each criterion returns a pass/fail outcome
//! with a one-line summary; the suites run from both `cargo test` (the
//! `acceptance` integration test) and `ctdmu regress`.

use crate::automata::{
    self, from_formula, to_formula, AutomatonState, CountdownAutomaton, Player, RankInfo,
    RankOrder, Target, Transition,
};
use crate::games::{build_semantic_game, solve, CountdownGame, PositionInfo, Truncation};
use crate::model::{build_lasso, random_lts, Lts, PointSet, Valuation};
use crate::ordeval::{eval_ordinal, stabilization_bound, IntervalSet, OrdinalModel, Upper};
use crate::ordinal::{CountdownBound, Ordinal};
use crate::rng::SplitMix64;
use crate::semantics::{complement_valuation, eval};
use crate::syntax::{regex_diamond, Fix, FixKind, Formula, Nfa, PathMode};
use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    pub detail: String,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} ({} cases{}{})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            if self.detail.is_empty() { "" } else { ": " },
            self.detail
        )
    }
}

fn pass(name: &'static str, cases: usize, detail: String) -> CriterionOutcome {
    CriterionOutcome {
        name,
        passed: true,
        cases,
        detail,
    }
}

fn fail(name: &'static str, cases: usize, detail: String) -> CriterionOutcome {
    CriterionOutcome {
        name,
        passed: false,
        cases,
        detail,
    }
}

/// Run every criterion in order.
pub fn run_all() -> Vec<CriterionOutcome> {
    vec![
        adequacy_fuzz(),
        automaton_formula_round_trip(),
        finite_model_collapse(),
        duality_and_bekic_inf(),
        bekic_fails_at_finite_bound(),
        bounded_nu_measures_path_length(),
        unbounded_path_automaton_example(),
        ordinal_hierarchy_examples(),
        scalar_iff_injectively_ranked(),
        guarding_preserves_semantics(),
        counter_monotonicity(),
        stabilization_bound_law(),
    ]
}

// ---------------------------------------------------------------------------
// Random generators (deterministic in the seed).

/// Knobs for the formula generator.
#[derive(Debug, Clone)]
pub struct FormulaGenConfig {
    pub actions: Vec<String>,
    /// Bounds drawn for countdown binders, beyond the always-available inf.
    pub finite_bounds: Vec<u64>,
    pub max_fixpoints: usize,
    /// At most this many binders get a non-inf bound.
    pub max_countdown: usize,
    /// At most this many binders get bound w.
    pub max_omega: usize,
    pub max_vector: usize,
    pub max_depth: usize,
    /// Only produce variable occurrences below a modality.
    pub guarded: bool,
    /// Free variables the formula may mention.
    pub free_vars: Vec<String>,
}

impl FormulaGenConfig {
    /// The adequacy-fuzz configuration.
    pub fn fuzz() -> FormulaGenConfig {
        FormulaGenConfig {
            actions: vec!["a".into(), "b".into()],
            finite_bounds: vec![2, 3],
            max_fixpoints: 4,
            max_countdown: 2,
            max_omega: 1,
            max_vector: 2,
            max_depth: 5,
            guarded: true,
            free_vars: vec!["u".into()],
        }
    }
}

struct GenState {
    fix_budget: usize,
    countdown_budget: usize,
    omega_budget: usize,
    next_var: usize,
}

/// Deterministic random formula. The root is never a bare variable.
pub fn random_formula(rng: &mut SplitMix64, cfg: &FormulaGenConfig) -> Formula {
    let mut state = GenState {
        fix_budget: cfg.max_fixpoints,
        countdown_budget: cfg.max_countdown,
        omega_budget: cfg.max_omega,
        next_var: 0,
    };
    loop {
        let f = gen_node(rng, cfg, &mut state, cfg.max_depth, &mut Vec::new());
        if !f.children().is_empty() {
            return f;
        }
        state.fix_budget = cfg.max_fixpoints;
        state.countdown_budget = cfg.max_countdown;
        state.omega_budget = cfg.max_omega;
    }
}

struct ScopeVar {
    name: String,
    /// No modality crossed since the binder.
    risky: bool,
}

fn gen_node(
    rng: &mut SplitMix64,
    cfg: &FormulaGenConfig,
    state: &mut GenState,
    depth: usize,
    scope: &mut Vec<ScopeVar>,
) -> Formula {
    let leaf_only = depth == 0;
    // Candidate variable leaves.
    let mut var_choices: Vec<String> = scope
        .iter()
        .filter(|v| !cfg.guarded || !v.risky)
        .map(|v| v.name.clone())
        .collect();
    var_choices.extend(cfg.free_vars.iter().cloned());

    let mut kinds: Vec<u8> = vec![0, 1]; // tt, ff
    if !var_choices.is_empty() {
        kinds.extend([2, 2]);
    }
    if !leaf_only {
        kinds.extend([3, 3, 4, 4, 5, 5, 6, 6]); // or, and, diamond, box
        if state.fix_budget > 0 {
            kinds.extend([7, 7, 7, 7]); // fixpoints, weighted up
        }
    }
    match *rng.pick(&kinds) {
        0 => Formula::Top,
        1 => Formula::Bot,
        2 => Formula::Var(rng.pick(&var_choices).clone()),
        3 => Formula::or(
            gen_node(rng, cfg, state, depth - 1, scope),
            gen_node(rng, cfg, state, depth - 1, scope),
        ),
        4 => Formula::and(
            gen_node(rng, cfg, state, depth - 1, scope),
            gen_node(rng, cfg, state, depth - 1, scope),
        ),
        kind @ (5 | 6) => {
            let action = rng.pick(&cfg.actions).clone();
            let was_risky: Vec<bool> = scope.iter().map(|v| v.risky).collect();
            for v in scope.iter_mut() {
                v.risky = false;
            }
            let body = gen_node(rng, cfg, state, depth - 1, scope);
            for (v, r) in scope.iter_mut().zip(was_risky) {
                v.risky = r;
            }
            if kind == 5 {
                Formula::diamond(&action, body)
            } else {
                Formula::box_(&action, body)
            }
        }
        _ => {
            state.fix_budget -= 1;
            let n = 1 + rng.usize_below(cfg.max_vector);
            let kind = if rng.chance(0.5) {
                FixKind::Mu
            } else {
                FixKind::Nu
            };
            let bound = random_bound(rng, cfg, state);
            let mut vars = Vec::with_capacity(n);
            for _ in 0..n {
                vars.push(format!("v{}", state.next_var));
                state.next_var += 1;
            }
            let depth_here = depth - 1;
            let mut bodies = Vec::with_capacity(n);
            let scope_base = scope.len();
            for v in &vars {
                scope.push(ScopeVar {
                    name: v.clone(),
                    risky: true,
                });
            }
            for _ in 0..n {
                bodies.push(gen_node(rng, cfg, state, depth_here, scope));
            }
            scope.truncate(scope_base);
            let index = 1 + rng.usize_below(n);
            Formula::Fix(Fix {
                kind,
                bound,
                index,
                vars,
                bodies,
            })
        }
    }
}

fn random_bound(
    rng: &mut SplitMix64,
    cfg: &FormulaGenConfig,
    state: &mut GenState,
) -> CountdownBound {
    let mut options: Vec<CountdownBound> = vec![CountdownBound::Infinity];
    if state.countdown_budget > 0 {
        for b in &cfg.finite_bounds {
            options.push(CountdownBound::nat(*b));
        }
        if state.omega_budget > 0 {
            options.push(CountdownBound::omega());
        }
    }
    let choice = rng.pick(&options).clone();
    if !choice.is_infinity() {
        state.countdown_budget -= 1;
        if choice == CountdownBound::omega() {
            state.omega_budget -= 1;
        }
    }
    choice
}

/// Random valuation for the formula's free variables.
pub fn random_valuation(rng: &mut SplitMix64, f: &Formula, lts: &Lts) -> Valuation {
    let mut val = Valuation::new();
    for x in f.free_vars() {
        let mut set = PointSet::empty(lts.num_points());
        for p in 0..lts.num_points() {
            if rng.chance(0.5) {
                set.insert(p);
            }
        }
        val.insert(x, set);
    }
    val
}

/// Random valid automaton: up to `max_states` states and `max_ranks` ranks,
/// counters drawn from {2, w}, at most two nonstandard ranks (one of them w).
pub fn random_automaton(
    rng: &mut SplitMix64,
    max_states: usize,
    max_ranks: usize,
) -> CountdownAutomaton {
    let num_states = 1 + rng.usize_below(max_states);
    let num_ranks = 1 + rng.usize_below(max_ranks);
    let mut ranks = Vec::with_capacity(num_ranks);
    let mut initial_counters = BTreeMap::new();
    let mut nonstandard = 0;
    let mut omegas = 0;
    for r in 0..num_ranks {
        let owner = if rng.chance(0.5) {
            Player::Eve
        } else {
            Player::Adam
        };
        let standard = nonstandard >= 2 || rng.chance(0.5);
        if !standard {
            nonstandard += 1;
            let ctr = if omegas == 0 && rng.chance(0.5) {
                omegas += 1;
                Ordinal::omega()
            } else {
                Ordinal::from_nat(2)
            };
            initial_counters.insert(r, ctr);
        }
        ranks.push(RankInfo { owner, standard });
    }
    let actions = ["a", "b"];
    let with_var = rng.chance(0.3);
    let mut states = Vec::with_capacity(num_states);
    let mut delta = Vec::with_capacity(num_states);
    for q in 0..num_states {
        states.push(AutomatonState {
            name: format!("q{q}"),
            owner: if rng.chance(0.5) {
                Player::Eve
            } else {
                Player::Adam
            },
            rank: rng.usize_below(num_ranks),
        });
        let random_target = |rng: &mut SplitMix64| {
            if with_var && rng.chance(0.2) {
                Target::Var("x".to_string())
            } else {
                Target::State(rng.usize_below(num_states))
            }
        };
        if rng.chance(0.45) {
            let action = rng.pick(&actions).to_string();
            delta.push(Transition::Modal(action, random_target(rng)));
        } else {
            let k = rng.usize_below(4);
            let targets = (0..k).map(|_| random_target(rng)).collect();
            delta.push(Transition::Eps(targets));
        }
    }
    let aut = CountdownAutomaton {
        states,
        initial: rng.usize_below(num_states),
        delta,
        rank_order: RankOrder {
            ranks,
            initial_counters,
        },
    };
    debug_assert!(aut.validate().is_ok());
    aut
}

/// Random automaton where every state has its own rank.
pub fn random_injectively_ranked_automaton(
    rng: &mut SplitMix64,
    max_states: usize,
) -> CountdownAutomaton {
    let num_states = 1 + rng.usize_below(max_states);
    let mut ranks = Vec::with_capacity(num_states);
    let mut initial_counters = BTreeMap::new();
    let mut nonstandard = 0;
    for r in 0..num_states {
        let owner = if rng.chance(0.5) {
            Player::Eve
        } else {
            Player::Adam
        };
        let standard = nonstandard >= 1 || rng.chance(0.6);
        if !standard {
            nonstandard += 1;
            initial_counters.insert(r, Ordinal::from_nat(2));
        }
        ranks.push(RankInfo { owner, standard });
    }
    let actions = ["a", "b"];
    let mut states = Vec::with_capacity(num_states);
    let mut delta = Vec::with_capacity(num_states);
    for q in 0..num_states {
        states.push(AutomatonState {
            name: format!("q{q}"),
            owner: if rng.chance(0.5) {
                Player::Eve
            } else {
                Player::Adam
            },
            rank: q,
        });
        if rng.chance(0.45) {
            let action = rng.pick(&actions).to_string();
            delta.push(Transition::Modal(
                action,
                Target::State(rng.usize_below(num_states)),
            ));
        } else {
            let k = rng.usize_below(3);
            let targets = (0..k)
                .map(|_| Target::State(rng.usize_below(num_states)))
                .collect();
            delta.push(Transition::Eps(targets));
        }
    }
    CountdownAutomaton {
        states,
        initial: rng.usize_below(num_states),
        delta,
        rank_order: RankOrder {
            ranks,
            initial_counters,
        },
    }
}

/// Random standalone countdown game with small finite counters.
pub fn random_game(rng: &mut SplitMix64) -> CountdownGame {
    let num_ranks = 2 + rng.usize_below(2);
    let mut ranks = Vec::with_capacity(num_ranks);
    let mut initial_counters = BTreeMap::new();
    let mut nonstandard = 0;
    for r in 0..num_ranks {
        let owner = if rng.chance(0.5) {
            Player::Eve
        } else {
            Player::Adam
        };
        let standard = nonstandard >= 2 || rng.chance(0.4);
        if !standard {
            nonstandard += 1;
            initial_counters.insert(r, Ordinal::from_nat(1 + rng.below(3)));
        }
        ranks.push(RankInfo { owner, standard });
    }
    let n = 3 + rng.usize_below(4);
    let positions = (0..n)
        .map(|v| PositionInfo {
            owner: if rng.chance(0.5) {
                Player::Eve
            } else {
                Player::Adam
            },
            rank: rng.usize_below(num_ranks),
            label: format!("v{v}"),
        })
        .collect();
    let edges = (0..n)
        .map(|_| (0..n).filter(|_| rng.chance(0.4)).collect::<Vec<usize>>())
        .collect();
    CountdownGame::new(
        positions,
        edges,
        RankOrder {
            ranks,
            initial_counters,
        },
    )
    .expect("generated game is well formed")
}

// ---------------------------------------------------------------------------
// Independent oracles.

/// Points from which some (diamond) / every (box) path labelled by a word of
/// the automaton's language ends in `target`, computed by product-graph
/// reachability rather than through formulas.
pub fn language_path_oracle(nfa: &Nfa, lts: &Lts, target: &PointSet, mode: PathMode) -> PointSet {
    // reach[(m, q)] = exists a word w accepted from q and a w-labelled path
    // from m ending in target (diamond), or a w-labelled path ending outside
    // target (box refutation).
    let witness_set = match mode {
        PathMode::Diamond => target.clone(),
        PathMode::Box => target.complement(),
    };
    let num_q = nfa.num_states;
    let num_m = lts.num_points();
    let mut reach = vec![false; num_m * num_q];
    // Backward fixpoint: accepting pairs, then predecessor closure.
    loop {
        let mut changed = false;
        for m in 0..num_m {
            for q in 0..num_q {
                if reach[m * num_q + q] {
                    continue;
                }
                let mut hit = nfa.accepting.contains(&q) && witness_set.contains(m);
                if !hit {
                    'search: for (p, a, r) in &nfa.transitions {
                        if *p != q {
                            continue;
                        }
                        if let Some(act) = lts.action_index(a) {
                            for n in lts.successors(act, m).iter() {
                                if reach[n * num_q + *r] {
                                    hit = true;
                                    break 'search;
                                }
                            }
                        }
                    }
                }
                if hit {
                    reach[m * num_q + q] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut out = PointSet::empty(num_m);
    for m in 0..num_m {
        if reach[m * num_q + nfa.initial] {
            out.insert(m);
        }
    }
    match mode {
        PathMode::Diamond => out,
        PathMode::Box => out.complement(),
    }
}

/// Longest path length (in edges) from each point of an acyclic single-action
/// model, by dynamic programming over a topological order.
pub fn longest_path_oracle(lts: &Lts, action: usize) -> Vec<usize> {
    let n = lts.num_points();
    let mut longest = vec![0usize; n];
    let mut order: Vec<usize> = (0..n).collect();
    // The DAG generator only adds edges from higher to lower indices, so
    // ascending index order is topological.
    order.sort_unstable();
    for m in order {
        for t in lts.successors(action, m).iter() {
            longest[m] = longest[m].max(longest[t] + 1);
        }
    }
    longest
}

/// Successor elimination can reduce a formula to a bare variable, which has
/// no automaton state; pad it into an equivalent disjunction.
pub fn automaton_ready(f: &Formula) -> Formula {
    let eliminated = f.successor_elimination();
    match eliminated {
        Formula::Var(_) => Formula::or(eliminated, Formula::Bot),
        other => other,
    }
}

/// Decide membership through the game pipeline: automaton of the
/// successor-eliminated formula, semantic game, truncated solve.
pub fn eval_via_game(f: &Formula, lts: &Lts, val: &Valuation) -> Result<PointSet, String> {
    let eliminated = automaton_ready(f);
    let aut = from_formula(&eliminated).map_err(|e| e.to_string())?;
    let game = build_semantic_game(&aut, lts, val).map_err(|e| e.to_string())?;
    let solved = solve(&game, Truncation::Auto).map_err(|e| e.to_string())?;
    let mut out = PointSet::empty(lts.num_points());
    for m in 0..lts.num_points() {
        let c = game
            .initial_configuration_at_point(m)
            .expect("semantic game");
        if solved.winner_at(&c) == Player::Eve {
            out.insert(m);
        }
    }
    Ok(out)
}

/// Size of the truncated configuration graph the game pipeline would have to
/// solve for this formula and model.
pub fn game_size_estimate(f: &Formula, lts: &Lts) -> Result<u128, String> {
    let eliminated = automaton_ready(f);
    let aut = from_formula(&eliminated).map_err(|e| e.to_string())?;
    let game =
        build_semantic_game(&aut, lts, &uniform_valuation(&aut, lts)).map_err(|e| e.to_string())?;
    let bounds = crate::games::truncation_bounds(&game, Truncation::Auto);
    let mut total: u128 = game.num_positions() as u128 * 2;
    for r in game.rank_order.nonstandard() {
        let radix = match game.rank_order.initial_counters[&r].as_nat() {
            Some(n) => n + 1,
            None => bounds[&r] + 1,
        };
        total = total.saturating_mul(radix as u128);
    }
    Ok(total)
}

fn uniform_valuation(aut: &CountdownAutomaton, lts: &Lts) -> Valuation {
    aut.free_vars()
        .into_iter()
        .map(|x| (x, PointSet::empty(lts.num_points())))
        .collect()
}

// ---------------------------------------------------------------------------
// Criteria.

/// Inductive evaluation and the game pipeline agree at every point over the
/// guarded fuzz suite.
pub fn adequacy_fuzz() -> CriterionOutcome {
    let name = "adequacy_fuzz";
    let cfg = FormulaGenConfig::fuzz();
    let mut rng = SplitMix64::new(0xADE0_0001);
    let mut checked_points = 0usize;
    let mut regenerated = 0usize;
    for case in 0..500 {
        let lts = random_lts(rng.next_u64(), 1 + rng.usize_below(4), &["a", "b"], 0.4);
        // Successor elimination can multiply bounded binders; skip the rare
        // formula whose truncated configuration graph would not stay desk
        // sized.
        let f = loop {
            let f = random_formula(&mut rng, &cfg);
            match game_size_estimate(&f, &lts) {
                Ok(size) if size <= 1_500_000 => break f,
                Ok(_) => regenerated += 1,
                Err(e) => return fail(name, case, format!("translation failed: {e}")),
            }
        };
        let val = random_valuation(&mut rng, &f, &lts);
        let by_eval = match eval(&f, &lts, &val) {
            Ok(s) => s,
            Err(e) => return fail(name, case, format!("eval failed: {e}")),
        };
        let by_game = match eval_via_game(&f, &lts, &val) {
            Ok(s) => s,
            Err(e) => return fail(name, case, format!("game pipeline failed: {e}")),
        };
        if by_eval != by_game {
            return fail(
                name,
                case,
                format!("disagreement on `{f}` over {} points", lts.num_points()),
            );
        }
        checked_points += lts.num_points();
    }
    pass(
        name,
        500,
        format!("{checked_points} point verdicts agree, {regenerated} oversized formulas redrawn"),
    )
}

/// The language of a random automaton matches the evaluation of its formula
/// translation on random models.
pub fn automaton_formula_round_trip() -> CriterionOutcome {
    let name = "automaton_formula_round_trip";
    let mut rng = SplitMix64::new(0xADE0_0002);
    for case in 0..100 {
        let aut = random_automaton(&mut rng, 5, 3);
        let formula = match to_formula(&aut) {
            Ok(f) => f,
            Err(e) => return fail(name, case, format!("translation failed: {e}")),
        };
        for _ in 0..10 {
            let lts = random_lts(rng.next_u64(), 1 + rng.usize_below(3), &["a", "b"], 0.4);
            let mut val = Valuation::new();
            for x in aut.free_vars() {
                let mut set = PointSet::empty(lts.num_points());
                for p in 0..lts.num_points() {
                    if rng.chance(0.5) {
                        set.insert(p);
                    }
                }
                val.insert(x, set);
            }
            let game = match build_semantic_game(&aut, &lts, &val) {
                Ok(g) => g,
                Err(e) => return fail(name, case, format!("game build failed: {e}")),
            };
            let solved = match solve(&game, Truncation::Auto) {
                Ok(s) => s,
                Err(e) => return fail(name, case, format!("solve failed: {e}")),
            };
            let by_formula = match eval(&formula, &lts, &val) {
                Ok(s) => s,
                Err(e) => return fail(name, case, format!("eval failed: {e}")),
            };
            for m in 0..lts.num_points() {
                let c = game.initial_configuration_at_point(m).expect("semantic");
                let game_accepts = solved.winner_at(&c) == Player::Eve;
                if game_accepts != by_formula.contains(m) {
                    return fail(
                        name,
                        case,
                        format!("language mismatch at point {m} for `{formula}`"),
                    );
                }
            }
        }
    }
    pass(
        name,
        100,
        "automaton language = translated formula".to_string(),
    )
}

/// Replacing every bound by inf never changes denotations on finite models.
pub fn finite_model_collapse() -> CriterionOutcome {
    let name = "finite_model_collapse";
    // Finite bounds are exact approximant cut-offs and differ from the
    // fixpoint by design (that is what the bounded-path-length law below
    // measures); the collapse law concerns the infinite bounds, where the
    // chain closes after finitely many steps on any finite model. The suite
    // draws bounds from {w, inf} and keeps a finite-bound negative control.
    let mut cfg = FormulaGenConfig::fuzz();
    cfg.finite_bounds = Vec::new();
    cfg.max_countdown = 3;
    cfg.max_omega = 3;
    let mut rng = SplitMix64::new(0xADE0_0003);
    for case in 0..500 {
        let f = random_formula(&mut rng, &cfg);
        let lts = random_lts(rng.next_u64(), 1 + rng.usize_below(4), &["a", "b"], 0.4);
        let val = random_valuation(&mut rng, &f, &lts);
        let plain = match eval(&f, &lts, &val) {
            Ok(s) => s,
            Err(e) => return fail(name, case, format!("eval failed: {e}")),
        };
        let hat = eval(&f.hat_transform(), &lts, &val).expect("hat evaluates");
        if plain != hat {
            return fail(name, case, format!("collapse failed for `{f}`"));
        }
    }
    // Negative control on the three-point chain.
    let chain = Lts::new(
        vec!["p0".into(), "p1".into(), "p2".into()],
        vec!["a".into()],
        &[
            ("p2".into(), "a".into(), "p1".into()),
            ("p1".into(), "a".into(), "p0".into()),
        ],
    )
    .expect("chain model");
    let bounded = Formula::parse("nu^2 x. <a> x").expect("parses");
    let val = Valuation::new();
    let cut = eval(&bounded, &chain, &val).expect("evaluates");
    let full = eval(&bounded.hat_transform(), &chain, &val).expect("evaluates");
    if cut == full {
        return fail(
            name,
            501,
            "finite bounds must not collapse on the chain model".to_string(),
        );
    }
    pass(
        name,
        501,
        "infinite bounds collapse; finite bounds stay exact".to_string(),
    )
}

/// Negation duality (complement under complemented valuation) and the
/// two-component decomposition law for inf bounds.
pub fn duality_and_bekic_inf() -> CriterionOutcome {
    let name = "duality_and_bekic_inf";
    let cfg = FormulaGenConfig::fuzz();
    let mut rng = SplitMix64::new(0xADE0_0004);
    for case in 0..300 {
        let f = random_formula(&mut rng, &cfg);
        let lts = random_lts(rng.next_u64(), 1 + rng.usize_below(4), &["a", "b"], 0.4);
        let val = random_valuation(&mut rng, &f, &lts);
        let plain = match eval(&f, &lts, &val) {
            Ok(s) => s,
            Err(e) => return fail(name, case, format!("eval failed: {e}")),
        };
        let dual = eval(&f.dualize(), &lts, &complement_valuation(&val)).expect("dual evaluates");
        if dual != plain.complement() {
            return fail(name, case, format!("duality failed for `{f}`"));
        }
    }

    // Decomposition of a two-component inf system into nested scalars.
    let mut bekic_cfg = FormulaGenConfig::fuzz();
    bekic_cfg.max_fixpoints = 2;
    bekic_cfg.max_countdown = 0;
    bekic_cfg.free_vars = vec!["z1".into(), "z2".into()];
    for case in 0..200 {
        let kind = if rng.chance(0.5) {
            FixKind::Mu
        } else {
            FixKind::Nu
        };
        let body1 =
            random_formula(&mut rng, &bekic_cfg).substitute(&subst2("z1", "x1", "z2", "x2"));
        let body2 =
            random_formula(&mut rng, &bekic_cfg).substitute(&subst2("z1", "x1", "z2", "x2"));
        let vector = |index: usize| {
            Formula::Fix(Fix {
                kind,
                bound: CountdownBound::Infinity,
                index,
                vars: vec!["x1".into(), "x2".into()],
                bodies: vec![body1.clone(), body2.clone()],
            })
        };
        // First component: fix x1. body1[x2 := fix x2. body2].
        let inner2 = Formula::fix(kind, CountdownBound::Infinity, "x2", body2.clone());
        let scalar1 = Formula::fix(
            kind,
            CountdownBound::Infinity,
            "x1",
            body1.substitute(&BTreeMap::from([("x2".to_string(), inner2)])),
        );
        // Second component, symmetrically.
        let inner1 = Formula::fix(kind, CountdownBound::Infinity, "x1", body1.clone());
        let scalar2 = Formula::fix(
            kind,
            CountdownBound::Infinity,
            "x2",
            body2.substitute(&BTreeMap::from([("x1".to_string(), inner1)])),
        );
        let lts = random_lts(rng.next_u64(), 1 + rng.usize_below(4), &["a", "b"], 0.4);
        let val = Valuation::new();
        for (vectorial, scalar) in [(vector(1), scalar1), (vector(2), scalar2)] {
            let lhs = match eval(&vectorial, &lts, &val) {
                Ok(s) => s,
                Err(e) => return fail(name, case, format!("eval failed: {e}")),
            };
            let rhs = eval(&scalar, &lts, &val).expect("scalar evaluates");
            if lhs != rhs {
                return fail(
                    name,
                    case,
                    format!("decomposition failed for `{vectorial}`"),
                );
            }
        }
    }
    pass(name, 500, "duality and inf decomposition hold".to_string())
}

fn subst2(a: &str, to_a: &str, b: &str, to_b: &str) -> BTreeMap<String, Formula> {
    BTreeMap::from([
        (a.to_string(), Formula::var(to_a)),
        (b.to_string(), Formula::var(to_b)),
    ])
}

/// On the word a a b^w, the two-component system at bound 3 contains point 0
/// while its scalar nesting is empty: the decomposition law fails at finite
/// bounds. Verified by the evaluator and by direct approximant iteration.
pub fn bekic_fails_at_finite_bound() -> CriterionOutcome {
    let name = "bekic_fails_at_finite_bound";
    let lts = build_lasso("aa", "b").expect("lasso");
    let gamma_star = Nfa::universal(&["a", "b"]);
    let diamond_all =
        |target: Formula| regex_diamond(&gamma_star, &target, PathMode::Diamond).expect("compiles");
    let vectorial = Formula::Fix(Fix {
        kind: FixKind::Nu,
        bound: CountdownBound::nat(3),
        index: 1,
        vars: vec!["x1".into(), "x2".into()],
        bodies: vec![
            diamond_all(Formula::var("x2")),
            Formula::diamond("a", Formula::var("x2")),
        ],
    });
    let scalar = Formula::fix(
        FixKind::Nu,
        CountdownBound::nat(3),
        "x1",
        diamond_all(Formula::fix(
            FixKind::Nu,
            CountdownBound::nat(3),
            "x2",
            Formula::diamond("a", Formula::var("x2")),
        )),
    );
    let val = Valuation::new();
    let vec_set = eval(&vectorial, &lts, &val).expect("vectorial evaluates");
    let sca_set = eval(&scalar, &lts, &val).expect("scalar evaluates");

    // Independent oracle: iterate the two maps directly on explicit edge
    // lists, bypassing the evaluator and the compiled reachability formula.
    let n = lts.num_points();
    let raw_edges = lts.edges();
    let a = lts.action_index("a").expect("action a");
    let step_diamond_a = |s: &PointSet| {
        let mut out = PointSet::empty(n);
        for (src, act, dst) in &raw_edges {
            if *act == a && s.contains(*dst) {
                out.insert(*src);
            }
        }
        out
    };
    let reach_any = |s: &PointSet| {
        // Points with some path (any labels, any length >= 0) into s.
        let mut cur = s.clone();
        loop {
            let mut next = cur.clone();
            for (src, _, dst) in &raw_edges {
                if cur.contains(*dst) {
                    next.insert(*src);
                }
            }
            if next == cur {
                return cur;
            }
            cur = next;
        }
    };
    let mut h1 = PointSet::full(n);
    let mut h2 = PointSet::full(n);
    for _ in 0..3 {
        let new_h1 = reach_any(&h2);
        let new_h2 = step_diamond_a(&h2);
        h1 = new_h1;
        h2 = new_h2;
    }
    let oracle_vec = h1;
    // Scalar route: the inner binder closes first, then feeds a constant
    // body to the outer one.
    let mut inner = PointSet::full(n);
    for _ in 0..3 {
        inner = step_diamond_a(&inner);
    }
    let oracle_sca = reach_any(&inner);

    let zero = lts.point_index("0").expect("point 0");
    let ok = vec_set.contains(zero)
        && sca_set.is_empty()
        && vec_set == oracle_vec
        && sca_set == oracle_sca
        && oracle_sca.is_empty();
    if ok {
        pass(
            name,
            2,
            format!(
                "vectorial = {:?}, scalar empty",
                vec_set.iter().collect::<Vec<_>>()
            ),
        )
    } else {
        fail(
            name,
            2,
            format!(
                "vectorial {:?} (oracle {:?}), scalar {:?} (oracle {:?})",
                vec_set.iter().collect::<Vec<_>>(),
                oracle_vec.iter().collect::<Vec<_>>(),
                sca_set.iter().collect::<Vec<_>>(),
                oracle_sca.iter().collect::<Vec<_>>()
            ),
        )
    }
}

/// `nu^k x. <a> x` holds exactly at points with a path of at least k edges,
/// against a longest-path oracle on random acyclic models.
pub fn bounded_nu_measures_path_length() -> CriterionOutcome {
    let name = "bounded_nu_measures_path_length";
    let mut rng = SplitMix64::new(0xADE0_0006);
    let mut cases = 0;
    for _ in 0..100 {
        // Random DAG: edges only from higher to lower indices.
        let n = 2 + rng.usize_below(5);
        let points: Vec<String> = (0..n).map(|i| format!("d{i}")).collect();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..i {
                if rng.chance(0.45) {
                    edges.push((points[i].clone(), "a".to_string(), points[j].clone()));
                }
            }
        }
        let lts = Lts::new(points, vec!["a".to_string()], &edges).expect("dag");
        let longest = longest_path_oracle(&lts, 0);
        for k in 0..=4u64 {
            cases += 1;
            let f = Formula::fix(
                FixKind::Nu,
                CountdownBound::nat(k),
                "x",
                Formula::diamond("a", Formula::var("x")),
            );
            let got = eval(&f, &lts, &Valuation::new()).expect("evaluates");
            for (m, steps) in longest.iter().enumerate() {
                let expected = *steps >= k as usize;
                if got.contains(m) != expected {
                    return fail(
                        name,
                        cases,
                        format!("k={k}, point {m}: longest {steps} vs {:?}", got),
                    );
                }
            }
        }
    }
    pass(
        name,
        cases,
        "bounded nu equals the path-length oracle".to_string(),
    )
}

/// The three-state automaton of `nu^w x. <a> x` and its game on the 3-chain.
pub fn unbounded_path_automaton_example() -> CriterionOutcome {
    let name = "unbounded_path_automaton_example";
    let f = Formula::parse("nu^w x. <a> x").expect("parses");
    let aut = from_formula(&f).expect("translates");
    let structure_ok = aut.num_states() == 3
        && aut.delta[0] == Transition::Eps(vec![Target::State(1)])
        && aut.delta[1] == Transition::Modal("a".to_string(), Target::State(2))
        && aut.delta[2] == Transition::Eps(vec![Target::State(1)])
        && aut.states[0].rank == 0
        && aut.states[1].rank == 1
        && aut.states[2].rank == 0
        && aut.states[1].owner == Player::Eve
        && aut.rank_order.ranks[1].owner == Player::Adam
        && !aut.rank_order.ranks[1].standard
        && aut.rank_order.ranks[0].standard
        && aut.rank_order.initial_counters.get(&1) == Some(&Ordinal::omega());
    if !structure_ok {
        return fail(name, 1, "automaton structure differs".to_string());
    }
    let lts = Lts::new(
        vec!["p0".into(), "p1".into(), "p2".into()],
        vec!["a".into()],
        &[
            ("p2".into(), "a".into(), "p1".into()),
            ("p1".into(), "a".into(), "p0".into()),
        ],
    )
    .expect("chain");
    let game = build_semantic_game(&aut, &lts, &Valuation::new()).expect("game");
    let solved = solve(&game, Truncation::Auto).expect("solves");
    let p2 = game.initial_configuration_at_point(2).expect("semantic");
    if solved.winner_at(&p2) != Player::Adam {
        return fail(name, 2, "expected Adam to win from p2 at omega".to_string());
    }
    let mut at_two = game.clone();
    at_two
        .rank_order
        .initial_counters
        .insert(1, Ordinal::from_nat(2));
    let solved2 = solve(&at_two, Truncation::Auto).expect("solves");
    let p2_two = at_two.initial_configuration_at_point(2).expect("semantic");
    if solved2.winner_at(&p2_two) != Player::Eve {
        return fail(
            name,
            3,
            "expected Eve to win from p2 at counter 2".to_string(),
        );
    }
    pass(name, 3, "automaton shape and winners match".to_string())
}

/// `nu^w x1 ... nu^w xk. <a>(x1 & ... & xk)` carves out `[w^k, top)`.
pub fn ordinal_hierarchy_examples() -> CriterionOutcome {
    let name = "ordinal_hierarchy_examples";
    let started = Instant::now();
    let model = OrdinalModel::unbounded();
    for k in 1..=3usize {
        let mut body = Formula::var("x1");
        for i in 2..=k {
            body = Formula::and(body, Formula::var(&format!("x{i}")));
        }
        let mut f = Formula::diamond("a", body);
        for i in (1..=k).rev() {
            f = Formula::fix(FixKind::Nu, CountdownBound::omega(), &format!("x{i}"), f);
        }
        let result = match eval_ordinal(&f, &model, &BTreeMap::new()) {
            Ok(s) => s,
            Err(e) => return fail(name, k, format!("evaluation failed at k={k}: {e}")),
        };
        let expected = IntervalSet::interval(Ordinal::omega_pow(k as u64), Upper::Top);
        if result != expected {
            return fail(name, k, format!("k={k}: got {result}, want {expected}"));
        }
    }
    let elapsed = started.elapsed();
    if elapsed.as_secs() >= 10 {
        return fail(name, 3, format!("too slow: {elapsed:?}"));
    }
    pass(name, 3, format!("k=1..3 in {elapsed:?}"))
}

/// Scalar formulas produce injectively ranked automata and injectively
/// ranked automata translate back to scalar formulas.
pub fn scalar_iff_injectively_ranked() -> CriterionOutcome {
    let name = "scalar_iff_injectively_ranked";
    let mut cfg = FormulaGenConfig::fuzz();
    cfg.max_vector = 1;
    let mut rng = SplitMix64::new(0xADE0_0009);
    for case in 0..100 {
        let f = automaton_ready(&random_formula(&mut rng, &cfg));
        if !f.is_scalar() {
            return fail(
                name,
                case,
                "generator produced a vectorial formula".to_string(),
            );
        }
        let aut = match from_formula(&f) {
            Ok(a) => a,
            Err(e) => return fail(name, case, format!("translation failed: {e}")),
        };
        // Injectivity on fixpoint-body states: every rank above 0 is carried
        // by the bodies of a single binder, and scalar binders have a single
        // body.
        let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
        for s in &aut.states {
            if s.rank > 0 {
                *seen.entry(s.rank).or_insert(0) += 1;
            }
        }
        if seen.values().any(|count| *count > 1) {
            return fail(name, case, format!("rank shared between states for `{f}`"));
        }
    }
    let mut rng = SplitMix64::new(0xADE0_0109);
    for case in 0..100 {
        let aut = random_injectively_ranked_automaton(&mut rng, 5);
        let f = match to_formula(&aut) {
            Ok(f) => f,
            Err(e) => return fail(name, case, format!("translation failed: {e}")),
        };
        if !f.is_scalar() {
            return fail(name, case, format!("non-scalar translation `{f}`"));
        }
    }
    pass(name, 200, "both directions hold".to_string())
}

/// Guarding outputs are guarded and preserve denotations on random models.
pub fn guarding_preserves_semantics() -> CriterionOutcome {
    let name = "guarding_preserves_semantics";
    let mut cfg = FormulaGenConfig::fuzz();
    cfg.guarded = false; // include unguarded inputs
    let mut rng = SplitMix64::new(0xADE0_000A);
    for case in 0..100 {
        let f = random_formula(&mut rng, &cfg);
        let g = automata::guard(&f);
        if !g.is_guarded() {
            return fail(name, case, format!("guard output unguarded: `{g}`"));
        }
        for _ in 0..20 {
            let lts = random_lts(rng.next_u64(), 1 + rng.usize_below(4), &["a", "b"], 0.4);
            let val = random_valuation(&mut rng, &f, &lts);
            let before = match eval(&f, &lts, &val) {
                Ok(s) => s,
                Err(e) => return fail(name, case, format!("eval failed: {e}")),
            };
            let after = eval(&g, &lts, &val).expect("guarded formula evaluates");
            if before != after {
                return fail(name, case, format!("guarding changed `{f}` to `{g}`"));
            }
        }
    }
    pass(name, 100, "guarded and denotation-preserving".to_string())
}

/// Winning is monotone in the counters: more on your own counters (and less
/// on the opponent's) never hurts. Exhaustive over truncated configuration
/// graphs of random games.
pub fn counter_monotonicity() -> CriterionOutcome {
    let name = "counter_monotonicity";
    let mut rng = SplitMix64::new(0xADE0_000B);
    let mut compared = 0usize;
    for case in 0..50 {
        let game = random_game(&mut rng);
        let solved = match solve(&game, Truncation::Auto) {
            Ok(s) => s,
            Err(e) => return fail(name, case, format!("solve failed: {e}")),
        };
        let configs: Vec<_> = solved.configurations().collect();
        let eve_ranks: BTreeSet<usize> = game
            .rank_order
            .nonstandard()
            .filter(|r| game.rank_order.ranks[*r].owner == Player::Eve)
            .collect();
        for (c1, w1) in &configs {
            for (c2, w2) in &configs {
                if c1.position != c2.position || c1.mode != c2.mode {
                    continue;
                }
                // c1 <=_Eve c2: Eve-owned counters grow, Adam-owned shrink.
                let leq_eve = c1.counters.iter().all(|(r, v1)| {
                    let v2 = &c2.counters[r];
                    if eve_ranks.contains(r) {
                        v1 <= v2
                    } else {
                        v1 >= v2
                    }
                });
                if leq_eve {
                    compared += 1;
                    if *w1 == Player::Eve && *w2 != Player::Eve {
                        return fail(
                            name,
                            case,
                            format!("monotonicity violated at {c1:?} vs {c2:?}"),
                        );
                    }
                }
            }
        }
    }
    pass(name, 50, format!("{compared} ordered pairs upward closed"))
}

/// Stabilization bounds stay below `w^(k+1)` for nesting `k`, and symbolic
/// evaluation results are constant above the bound.
pub fn stabilization_bound_law() -> CriterionOutcome {
    let name = "stabilization_bound_law";
    let mut cfg = FormulaGenConfig::fuzz();
    cfg.actions = vec!["a".into()];
    cfg.free_vars = Vec::new();
    cfg.finite_bounds = vec![2, 3];
    cfg.max_omega = 2;
    cfg.max_countdown = 2;
    let mut rng = SplitMix64::new(0xADE0_000C);
    let model = OrdinalModel::unbounded();
    let mut evaluated = 0usize;
    let mut undetected = 0usize;
    for case in 0..200 {
        let f = random_formula(&mut rng, &cfg);
        let k = f.nesting() as u64;
        let bound = match stabilization_bound(&f, 2) {
            Ok(b) => b,
            Err(e) => return fail(name, case, format!("bound failed for `{f}`: {e}")),
        };
        if bound >= Ordinal::omega_pow(k + 1) {
            return fail(
                name,
                case,
                format!("bound {bound} not below w^{} for `{f}`", k + 1),
            );
        }
        match eval_ordinal(&f, &model, &BTreeMap::new()) {
            Ok(result) => {
                evaluated += 1;
                let above = IntervalSet::interval(bound.clone(), Upper::Top);
                let inter = result.intersection(&above);
                if !(inter == above || inter.is_empty()) {
                    return fail(
                        name,
                        case,
                        format!("`{f}` = {result} unstable above {bound}"),
                    );
                }
            }
            Err(crate::ordeval::OrdEvalError::LimitUndetected { .. }) => {
                undetected += 1;
            }
            Err(e) => return fail(name, case, format!("unexpected error for `{f}`: {e}")),
        }
    }
    if evaluated < 150 {
        return fail(
            name,
            200,
            format!("only {evaluated} of 200 sentences evaluated ({undetected} undetected)"),
        );
    }
    pass(
        name,
        200,
        format!("{evaluated} evaluated and stable, {undetected} honestly undetected"),
    )
}
