//! `ctdmu` — command-line front end for the countdown mu-calculus workbench.
//!
//! Exit codes: 0 success, 2 input error, 3 assertion or regression failure.

mod regex;

use clap::{Args, Parser, Subcommand};
use ctdmu::automata::{from_formula, to_formula, CountdownAutomaton, Player};
use ctdmu::games::{
    build_semantic_game, solve, Configuration, CountdownGame, Mode, MoveChoice, MoveFamily,
    SolveResult, Truncation,
};
use ctdmu::model::{build_figure1, build_lasso, random_lts, Lts, PointSet, Valuation};
use ctdmu::ordeval::{
    eval_ordinal, stabilization_bound, Height, Interval, IntervalSet, OrdinalModel, Upper,
};
use ctdmu::ordinal::Ordinal;
use ctdmu::regress;
use ctdmu::semantics::{eval, sat_search_bounded};
use ctdmu::syntax::{Formula, PathMode};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::io::{BufRead, Write as _};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ctdmu", about = "countdown mu-calculus workbench", version)]
struct Cli {
    /// Emit machine-readable JSON instead of human text.
    #[arg(long, global = true)]
    json: bool,
    /// Compare the canonical verdict against this value; mismatch exits 3.
    #[arg(long, global = true)]
    assert: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a formula over a model (optionally through the game solver).
    Check(CheckArgs),
    /// Countdown games: solve, replay, or play interactively.
    #[command(subcommand)]
    Game(GameCommand),
    /// Translate between formulas and automata.
    Translate(TranslateArgs),
    /// Rewrite a formula into an equivalent guarded one.
    Guard(FormulaArg),
    /// The negation dual.
    Dual(FormulaArg),
    /// Replace every countdown bound by inf.
    Hat(FormulaArg),
    /// Structural report: free variables, scalar/guarded/nesting.
    Analyze(FormulaArg),
    /// Stabilization bound over ordinal models.
    Bound(BoundArgs),
    /// Evaluate over an ordinal linear model.
    Ordeval(OrdevalArgs),
    /// Generate models.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Exhaustive satisfiability search up to a point bound.
    Sat(SatArgs),
    /// Compile a regular-expression path constraint into a formula.
    Regex(RegexArgs),
    /// Run the regression suites.
    Regress,
}

#[derive(Args)]
struct FormulaArg {
    /// Formula text (see the grammar in the README).
    #[arg(short = 'f', long = "formula")]
    formula: String,
}

#[derive(Args)]
struct CheckArgs {
    /// Model file (JSON).
    #[arg(short = 'm', long = "model")]
    model: String,
    #[arg(short = 'f', long = "formula")]
    formula: String,
    /// Point to check; without it the full denotation is printed.
    #[arg(short = 'p', long = "point")]
    point: Option<String>,
    /// Evaluation route: `eval` (inductive) or `game` (solver).
    #[arg(long, default_value = "eval")]
    via: String,
    /// Run both routes and require agreement.
    #[arg(long)]
    cross_check: bool,
}

#[derive(Subcommand)]
enum GameCommand {
    /// Winners at every initial configuration, plus the strategy table.
    Solve(GameArgs),
    /// Replay an optimal-versus-optimal play from a point.
    Trace(TraceArgs),
    /// Play one side interactively on standard input.
    Play(PlayArgs),
}

#[derive(Args)]
struct GameArgs {
    #[arg(short = 'm', long = "model")]
    model: Option<String>,
    #[arg(short = 'f', long = "formula")]
    formula: Option<String>,
    /// Automaton file (JSON); an alternative to --formula.
    #[arg(short = 'a', long = "automaton")]
    automaton: Option<String>,
    /// Truncation bound for infinite counters (default: automatic).
    #[arg(long)]
    truncation: Option<u64>,
    /// Include the full strategy table in JSON output.
    #[arg(long)]
    strategy: bool,
}

#[derive(Args)]
struct TraceArgs {
    #[command(flatten)]
    game: GameArgs,
    /// Starting point.
    #[arg(short = 'p', long = "point")]
    point: String,
    /// Override the initial counter of the highest nonstandard rank.
    #[arg(long)]
    ctr: Option<String>,
}

#[derive(Args)]
struct PlayArgs {
    #[command(flatten)]
    game: GameArgs,
    #[arg(short = 'p', long = "point")]
    point: String,
    /// Side played by the human: E (Eve) or A (Adam).
    #[arg(long = "as", default_value = "A")]
    side: String,
    /// Counter override, as in trace.
    #[arg(long)]
    ctr: Option<String>,
}

#[derive(Args)]
struct TranslateArgs {
    /// Formula to turn into an automaton (successor bounds are eliminated
    /// first).
    #[arg(long)]
    to_automaton: bool,
    /// Automaton file to turn into a formula.
    #[arg(long)]
    to_formula: bool,
    #[arg(short = 'f', long = "formula")]
    formula: Option<String>,
    #[arg(short = 'a', long = "automaton")]
    automaton: Option<String>,
    /// Output file (default: stdout).
    #[arg(short = 'o', long = "out")]
    out: Option<String>,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(short = 'f', long = "formula")]
    formula: String,
    /// Cap on truth-value alternations assumed for inf binders.
    #[arg(long, default_value_t = 2)]
    t_max: u64,
}

#[derive(Args)]
struct OrdevalArgs {
    #[arg(short = 'f', long = "formula")]
    formula: String,
    /// Model height: `w1` for the symbolic top, or an ordinal literal.
    #[arg(long, default_value = "w1")]
    height: String,
    /// JSON file mapping variables to interval lists, e.g.
    /// {"x": [["0", "w"], ["w^2", "w1"]]}.
    #[arg(long)]
    val_file: Option<String>,
}

#[derive(Subcommand)]
enum GenCommand {
    /// The word prefix.loop^omega as a finite model.
    Lasso(LassoArgs),
    /// The two-row family over actions a and b.
    Fig1(Fig1Args),
    /// Seeded random model.
    Random(RandomArgs),
}

#[derive(Args)]
struct LassoArgs {
    #[arg(long, default_value = "")]
    prefix: String,
    #[arg(long = "loop")]
    loop_part: String,
    #[arg(short = 'o', long = "out")]
    out: Option<String>,
}

#[derive(Args)]
struct Fig1Args {
    #[arg(short = 'n', long)]
    n: usize,
    #[arg(short = 'o', long = "out")]
    out: Option<String>,
}

#[derive(Args)]
struct RandomArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    points: usize,
    /// Comma-separated action names.
    #[arg(long, default_value = "a,b")]
    actions: String,
    #[arg(long)]
    density: f64,
    #[arg(short = 'o', long = "out")]
    out: Option<String>,
}

#[derive(Args)]
struct SatArgs {
    #[arg(short = 'f', long = "formula")]
    formula: String,
    #[arg(long)]
    max_points: usize,
}

#[derive(Args)]
struct RegexArgs {
    /// Regular expression over single-character actions: literals,
    /// concatenation, `|`, `*`, `+`, `?`, parentheses, `.` (any letter).
    #[arg(long)]
    regex: String,
    /// Comma-separated alphabet.
    #[arg(long)]
    alphabet: String,
    /// Target formula the paths must end in.
    #[arg(long, default_value = "tt")]
    target: String,
    /// `diamond` (some path) or `box` (every path).
    #[arg(long, default_value = "diamond")]
    mode: String,
}

/// Everything a command produces: canonical verdict (for --assert), machine
/// document, human rendering.
struct Outcome {
    verdict: String,
    document: Value,
    human: String,
}

#[derive(Debug)]
struct CmdError(String);

impl<E: std::fmt::Display> From<E> for CmdError {
    fn from(e: E) -> Self {
        CmdError(e.to_string())
    }
}

type CmdResult = Result<Outcome, CmdError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Check(args) => cmd_check(args),
        Command::Game(sub) => match sub {
            GameCommand::Solve(args) => cmd_game_solve(args),
            GameCommand::Trace(args) => cmd_game_trace(args),
            GameCommand::Play(args) => cmd_game_play(args),
        },
        Command::Translate(args) => cmd_translate(args),
        Command::Guard(args) => transform(args, |f| ctdmu::automata::guard(&f)),
        Command::Dual(args) => transform(args, |f| f.dualize()),
        Command::Hat(args) => transform(args, |f| f.hat_transform()),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Bound(args) => cmd_bound(args),
        Command::Ordeval(args) => cmd_ordeval(args),
        Command::Gen(sub) => cmd_gen(sub),
        Command::Sat(args) => cmd_sat(args),
        Command::Regex(args) => cmd_regex(args),
        Command::Regress => cmd_regress(),
    };
    match result {
        Err(CmdError(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Ok(outcome) => {
            if cli.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&outcome.document).expect("serializes")
                );
            } else if !outcome.human.is_empty() {
                println!("{}", outcome.human);
            }
            match &cli.assert {
                Some(expected) if *expected != outcome.verdict => {
                    eprintln!(
                        "assertion failed: expected `{expected}`, got `{}`",
                        outcome.verdict
                    );
                    ExitCode::from(3)
                }
                _ => ExitCode::SUCCESS,
            }
        }
    }
}

fn load_model(path: &str) -> Result<(Lts, Valuation), CmdError> {
    let text = std::fs::read_to_string(path).map_err(|e| CmdError(format!("{path}: {e}")))?;
    Ok(Lts::from_json(&text)?)
}

fn load_automaton(path: &str) -> Result<CountdownAutomaton, CmdError> {
    let text = std::fs::read_to_string(path).map_err(|e| CmdError(format!("{path}: {e}")))?;
    Ok(CountdownAutomaton::from_json(&text)?)
}

fn parse_formula(text: &str) -> Result<Formula, CmdError> {
    Ok(Formula::parse(text)?)
}

fn point_set_names(set: &PointSet, lts: &Lts) -> Vec<String> {
    set.iter().map(|i| lts.point_name(i).to_string()).collect()
}

fn cmd_check(args: &CheckArgs) -> CmdResult {
    let (lts, val) = load_model(&args.model)?;
    let f = parse_formula(&args.formula)?;

    let by_eval = |f: &Formula| -> Result<PointSet, CmdError> { Ok(eval(f, &lts, &val)?) };
    let by_game = |f: &Formula| -> Result<PointSet, CmdError> {
        regress::eval_via_game(f, &lts, &val).map_err(CmdError)
    };
    let (set, route) = match args.via.as_str() {
        "eval" => (by_eval(&f)?, "eval"),
        "game" => (by_game(&f)?, "game"),
        other => return Err(CmdError(format!("unknown route `{other}`"))),
    };
    let mut doc = json!({ "via": route });
    if args.cross_check {
        let other = if route == "eval" {
            by_game(&f)?
        } else {
            by_eval(&f)?
        };
        doc["cross_check_agrees"] = json!(other == set);
        if other != set {
            return Err(CmdError("cross-check disagreement".to_string()));
        }
    }

    match &args.point {
        Some(p) => {
            let idx = lts
                .point_index(p)
                .ok_or_else(|| CmdError(format!("unknown point `{p}`")))?;
            let verdict = set.contains(idx).to_string();
            doc["point"] = json!(p);
            doc["verdict"] = json!(set.contains(idx));
            Ok(Outcome {
                human: format!("{p} |= {f}  :  {verdict}"),
                verdict,
                document: doc,
            })
        }
        None => {
            let names = point_set_names(&set, &lts);
            doc["set"] = json!(names);
            Ok(Outcome {
                verdict: names.join(","),
                human: format!("[[{f}]] = {{{}}}", names.join(", ")),
                document: doc,
            })
        }
    }
}

/// Build the game for `game` subcommands: formula or automaton, with or
/// without a model (epsilon-only automata run over an implicit point).
fn build_game(args: &GameArgs) -> Result<(CountdownGame, Lts), CmdError> {
    let aut = match (&args.formula, &args.automaton) {
        (Some(f), None) => {
            let f = parse_formula(f)?;
            from_formula(&f.successor_elimination())?
        }
        (None, Some(path)) => load_automaton(path)?,
        _ => {
            return Err(CmdError(
                "provide exactly one of --formula/--automaton".into(),
            ))
        }
    };
    let (lts, mut val) = match &args.model {
        Some(path) => load_model(path)?,
        None => {
            if !aut.actions().is_empty() {
                return Err(CmdError(
                    "the automaton has modal transitions; provide --model".into(),
                ));
            }
            let lts = Lts::new(vec!["pt".to_string()], Vec::new(), &[])?;
            (lts, Valuation::new())
        }
    };
    // Free variables without a valuation entry default to empty sets.
    for x in aut.free_vars() {
        val.entry(x)
            .or_insert_with(|| PointSet::empty(lts.num_points()));
    }
    let game = build_semantic_game(&aut, &lts, &val)?;
    Ok((game, lts))
}

fn truncation_of(args: &GameArgs) -> Truncation {
    match args.truncation {
        Some(b) => Truncation::Bound(b),
        None => Truncation::Auto,
    }
}

fn override_counter(game: &mut CountdownGame, ctr: &Option<String>) -> Result<(), CmdError> {
    if let Some(ctr) = ctr {
        let o: Ordinal = ctr.parse()?;
        match game.rank_order.nonstandard().max() {
            Some(r) => {
                game.rank_order.initial_counters.insert(r, o);
            }
            None => return Err(CmdError("the game has no counters to override".into())),
        }
    }
    Ok(())
}

fn render_counters(c: &Configuration) -> String {
    if c.counters.is_empty() {
        return "{}".to_string();
    }
    let inner: Vec<String> = c.counters.iter().map(|(r, v)| format!("{r}:{v}")).collect();
    format!("{{{}}}", inner.join(","))
}

fn render_config(game: &CountdownGame, c: &Configuration) -> String {
    format!(
        "{} | {} | {}",
        c.mode,
        game.positions[c.position].label,
        render_counters(c)
    )
}

fn cmd_game_solve(args: &GameArgs) -> CmdResult {
    let (game, lts) = build_game(args)?;
    let solved = solve(&game, truncation_of(args))?;
    let mut winners = BTreeMap::new();
    for m in 0..lts.num_points() {
        let c = game
            .initial_configuration_at_point(m)
            .expect("semantic game");
        winners.insert(
            lts.point_name(m).to_string(),
            solved.winner_at(&c).to_string(),
        );
    }
    let eve_points: Vec<String> = winners
        .iter()
        .filter(|(_, w)| *w == "Eve")
        .map(|(p, _)| p.clone())
        .collect();
    let mut doc = json!({
        "winners": winners,
        "truncation": solved.truncation(),
    });
    if args.strategy {
        let strategy: Vec<Value> = solved
            .configurations()
            .filter_map(|(c, _)| {
                solved.strategy_at(&c).map(|succ| {
                    json!({
                        "at": render_config(&game, &c),
                        "go": render_config(&game, &succ),
                    })
                })
            })
            .collect();
        doc["strategy"] = json!(strategy);
    }
    let human = winners
        .iter()
        .map(|(p, w)| format!("{p}: {w} wins"))
        .collect::<Vec<_>>()
        .join("\n");
    Ok(Outcome {
        verdict: eve_points.join(","),
        document: doc,
        human,
    })
}

/// Move policy for traces and the engine side of play: the winner follows
/// the extracted strategy; the loser stalls as long as it can.
fn engine_move(
    game: &CountdownGame,
    solved: &SolveResult,
    c: &Configuration,
) -> Option<MoveChoice> {
    let mover = game.mover(c);
    let winner = solved.winner_at(c);
    let family = game.legal_moves(c);
    if matches!(&family, MoveFamily::Moves(moves) if moves.is_empty()) {
        return None;
    }
    Some(if mover == winner {
        let target = solved.strategy_at(c).expect("winner has a strategy move");
        match c.mode {
            Mode::Positional => {
                let i = game.edges[c.position]
                    .iter()
                    .position(|w| *w == target.position)
                    .expect("strategy follows an edge");
                MoveChoice::Index(i)
            }
            Mode::Countdown => {
                let r = game.positions[c.position].rank;
                match target.counters.get(&r) {
                    Some(beta) => MoveChoice::Ordinal(beta.clone()),
                    None => MoveChoice::Index(0),
                }
            }
        }
    } else {
        match (&family, c.mode) {
            (MoveFamily::OrdinalChoice { .. }, _) => {
                MoveChoice::Ordinal(Ordinal::from_nat(solved.truncation()))
            }
            (MoveFamily::Moves(_), Mode::Countdown) => {
                let r = game.positions[c.position].rank;
                match c.counters.get(&r).and_then(|v| v.as_nat()) {
                    Some(n) if n > 0 => MoveChoice::Ordinal(Ordinal::from_nat(n - 1)),
                    _ => MoveChoice::Index(0),
                }
            }
            (MoveFamily::Moves(_), Mode::Positional) => MoveChoice::Index(0),
        }
    })
}

fn cmd_game_trace(args: &TraceArgs) -> CmdResult {
    let (mut game, lts) = build_game(&args.game)?;
    override_counter(&mut game, &args.ctr)?;
    let point = lts
        .point_index(&args.point)
        .ok_or_else(|| CmdError(format!("unknown point `{}`", args.point)))?;
    let solved = solve(&game, truncation_of(&args.game))?;
    let mut c = game
        .initial_configuration_at_point(point)
        .expect("semantic game");

    let mut lines = Vec::new();
    let mut seen: Vec<Configuration> = Vec::new();
    let verdict;
    loop {
        let mover = game.mover(&c);
        if let Some(at) = seen.iter().position(|s| *s == c) {
            let top = seen[at..]
                .iter()
                .map(|s| game.positions[s.position].rank)
                .max()
                .expect("cycle nonempty");
            let loser = game.rank_order.ranks[top].owner;
            verdict = format!(
                "{} wins (rank {top} recurs forever, {loser} owns it)",
                loser.opponent()
            );
            break;
        }
        match engine_move(&game, &solved, &c) {
            None => {
                lines.push(format!("{} | {mover} | stuck", render_config(&game, &c)));
                verdict = format!("{} wins ({mover} is stuck)", mover.opponent());
                break;
            }
            Some(choice) => {
                seen.push(c.clone());
                let desc = match &choice {
                    MoveChoice::Index(i) => match c.mode {
                        Mode::Positional => {
                            let w = game.edges[c.position][*i];
                            format!("-> {}", game.positions[w].label)
                        }
                        Mode::Countdown => "reset".to_string(),
                    },
                    MoveChoice::Ordinal(o) => format!("pick {o}"),
                };
                lines.push(format!("{} | {mover} | {desc}", render_config(&game, &c)));
                c = game.step(&c, &choice)?;
            }
        }
    }
    lines.push(verdict.clone());
    Ok(Outcome {
        verdict: verdict.clone(),
        document: json!({ "trace": lines, "verdict": verdict }),
        human: lines.join("\n"),
    })
}

fn cmd_game_play(args: &PlayArgs) -> CmdResult {
    let (mut game, lts) = build_game(&args.game)?;
    override_counter(&mut game, &args.ctr)?;
    let human_side = match args.side.as_str() {
        "E" => Player::Eve,
        "A" => Player::Adam,
        other => return Err(CmdError(format!("--as takes E or A, not `{other}`"))),
    };
    let point = lts
        .point_index(&args.point)
        .ok_or_else(|| CmdError(format!("unknown point `{}`", args.point)))?;
    let solved = solve(&game, truncation_of(&args.game))?;
    let mut c = game
        .initial_configuration_at_point(point)
        .expect("semantic game");

    let stdin = std::io::stdin();
    let mut input = stdin.lock().lines();
    let mut seen: Vec<Configuration> = Vec::new();
    let verdict;
    loop {
        let mover = game.mover(&c);
        println!("{} | {mover} to move", render_config(&game, &c));
        if let Some(at) = seen.iter().position(|s| *s == c) {
            let top = seen[at..]
                .iter()
                .map(|s| game.positions[s.position].rank)
                .max()
                .expect("cycle nonempty");
            let loser = game.rank_order.ranks[top].owner;
            verdict = format!("{} wins (rank {top} recurs forever)", loser.opponent());
            break;
        }
        seen.push(c.clone());
        let family = game.legal_moves(&c);
        if matches!(&family, MoveFamily::Moves(moves) if moves.is_empty()) {
            verdict = format!("{} wins ({mover} is stuck)", mover.opponent());
            break;
        }
        let rank_is_standard = c.mode == Mode::Countdown
            && game.rank_order.ranks[game.positions[c.position].rank].standard;
        let choice = if rank_is_standard {
            // No real choice: lower counters reset deterministically.
            println!("  (standard rank: counters reset)");
            MoveChoice::Index(0)
        } else if mover == human_side {
            match &family {
                MoveFamily::Moves(moves) => {
                    if c.mode == Mode::Positional {
                        for (i, m) in moves.iter().enumerate() {
                            println!("  [{i}] -> {}", game.positions[m.position].label);
                        }
                    } else {
                        println!("  pick an ordinal below the current counter");
                    }
                }
                MoveFamily::OrdinalChoice {
                    rank,
                    strictly_below,
                } => {
                    println!("  pick an ordinal below {strictly_below} for rank {rank}");
                }
            }
            loop {
                print!("move? ");
                std::io::stdout().flush().ok();
                let Some(line) = input.next() else {
                    return Err(CmdError("end of input during play".into()));
                };
                let line = line.map_err(|e| CmdError(e.to_string()))?;
                let text = line.trim();
                let choice = if c.mode == Mode::Positional {
                    match text.parse::<usize>() {
                        Ok(i) => MoveChoice::Index(i),
                        Err(_) => {
                            println!("  (enter a move index)");
                            continue;
                        }
                    }
                } else {
                    match text.parse::<Ordinal>() {
                        Ok(o) => MoveChoice::Ordinal(o),
                        Err(_) => {
                            println!("  (enter an ordinal literal)");
                            continue;
                        }
                    }
                };
                match game.step(&c, &choice) {
                    Ok(_) => break choice,
                    Err(e) => println!("  illegal: {e}"),
                }
            }
        } else {
            let mv = engine_move(&game, &solved, &c).expect("not stuck");
            match &mv {
                MoveChoice::Index(i) if c.mode == Mode::Positional => {
                    let w = game.edges[c.position][*i];
                    println!("engine: -> {}", game.positions[w].label);
                }
                MoveChoice::Ordinal(o) => println!("engine: pick {o}"),
                MoveChoice::Index(_) => println!("engine: reset"),
            }
            mv
        };
        c = game.step(&c, &choice)?;
    }
    println!("{verdict}");
    Ok(Outcome {
        verdict: verdict.clone(),
        document: json!({ "verdict": verdict }),
        human: String::new(),
    })
}

fn cmd_translate(args: &TranslateArgs) -> CmdResult {
    let (text, doc, verdict) = match (args.to_automaton, args.to_formula) {
        (true, false) => {
            let f = parse_formula(
                args.formula
                    .as_deref()
                    .ok_or_else(|| CmdError("--to-automaton needs --formula".into()))?,
            )?;
            let aut = from_formula(&f.successor_elimination())?;
            let text = aut.to_json();
            let doc: Value = serde_json::from_str(&text).expect("round trips");
            (text, doc, format!("{} states", aut.num_states()))
        }
        (false, true) => {
            let aut = load_automaton(
                args.automaton
                    .as_deref()
                    .ok_or_else(|| CmdError("--to-formula needs --automaton".into()))?,
            )?;
            let f = to_formula(&aut)?;
            let text = f.to_string();
            (text.clone(), json!({ "formula": text }), text)
        }
        _ => {
            return Err(CmdError(
                "pick exactly one of --to-automaton/--to-formula".into(),
            ))
        }
    };
    let human = match &args.out {
        Some(path) => {
            std::fs::write(path, format!("{text}\n")).map_err(|e| CmdError(e.to_string()))?;
            format!("wrote {path}")
        }
        None => text,
    };
    Ok(Outcome {
        verdict,
        document: doc,
        human,
    })
}

fn transform(args: &FormulaArg, op: impl Fn(Formula) -> Formula) -> CmdResult {
    let f = parse_formula(&args.formula)?;
    let out = op(f);
    let text = out.to_string();
    Ok(Outcome {
        verdict: text.clone(),
        document: json!({ "formula": text }),
        human: text,
    })
}

fn cmd_analyze(args: &FormulaArg) -> CmdResult {
    let f = parse_formula(&args.formula)?;
    let report = f.analyze();
    let doc = json!({
        "free_vars": report.free_vars.iter().collect::<Vec<_>>(),
        "is_sentence": report.is_sentence,
        "is_scalar": report.is_scalar,
        "is_guarded": report.is_guarded,
        "is_positive_countdown": report.is_positive_countdown,
        "nesting": report.nesting,
    });
    let human =
        format!(
        "free: {{{}}}\nsentence: {}\nscalar: {}\nguarded: {}\npositive countdown: {}\nnesting: {}",
        report.free_vars.iter().cloned().collect::<Vec<_>>().join(", "),
        report.is_sentence,
        report.is_scalar,
        report.is_guarded,
        report.is_positive_countdown,
        report.nesting
    );
    Ok(Outcome {
        verdict: format!("nesting={}", report.nesting),
        document: doc,
        human,
    })
}

fn cmd_bound(args: &BoundArgs) -> CmdResult {
    let f = parse_formula(&args.formula)?;
    let bound = stabilization_bound(&f, args.t_max)?;
    let text = bound.to_string();
    Ok(Outcome {
        verdict: text.clone(),
        document: json!({ "bound": text, "t_max": args.t_max }),
        human: text,
    })
}

fn parse_height(text: &str) -> Result<Height, CmdError> {
    if text == "w1" {
        Ok(Height::Top)
    } else {
        Ok(Height::At(text.parse::<Ordinal>()?))
    }
}

fn cmd_ordeval(args: &OrdevalArgs) -> CmdResult {
    let f = parse_formula(&args.formula)?;
    let model = OrdinalModel {
        height: parse_height(&args.height)?,
    };
    let mut val: BTreeMap<String, IntervalSet> = BTreeMap::new();
    if let Some(path) = &args.val_file {
        let text = std::fs::read_to_string(path).map_err(|e| CmdError(format!("{path}: {e}")))?;
        let raw: BTreeMap<String, Vec<(String, String)>> = serde_json::from_str(&text)?;
        for (var, intervals) in raw {
            let parts = intervals
                .into_iter()
                .map(|(lo, hi)| {
                    Ok(Interval {
                        lo: lo.parse::<Ordinal>()?,
                        hi: if hi == "w1" {
                            Upper::Top
                        } else {
                            Upper::At(hi.parse::<Ordinal>()?)
                        },
                    })
                })
                .collect::<Result<Vec<_>, CmdError>>()?;
            val.insert(var, IntervalSet::from_parts(parts));
        }
    }
    let result = eval_ordinal(&f, &model, &val)?;
    let text = result.to_string();
    Ok(Outcome {
        verdict: text.clone(),
        document: json!({ "set": text, "height": args.height }),
        human: text,
    })
}

fn cmd_gen(sub: &GenCommand) -> CmdResult {
    let (lts, out) = match sub {
        GenCommand::Lasso(a) => (build_lasso(&a.prefix, &a.loop_part)?, &a.out),
        GenCommand::Fig1(a) => (build_figure1(a.n)?, &a.out),
        GenCommand::Random(a) => {
            let actions: Vec<&str> = a.actions.split(',').filter(|s| !s.is_empty()).collect();
            if !(0.0..=1.0).contains(&a.density) {
                return Err(CmdError("density must lie in [0, 1]".into()));
            }
            (random_lts(a.seed, a.points, &actions, a.density), &a.out)
        }
    };
    let text = lts.to_json(None);
    let doc: Value = serde_json::from_str(&text).expect("round trips");
    let human = match out {
        Some(path) => {
            std::fs::write(path, format!("{text}\n")).map_err(|e| CmdError(e.to_string()))?;
            format!("wrote {path}")
        }
        None => text,
    };
    Ok(Outcome {
        verdict: format!("{} points", lts.num_points()),
        document: doc,
        human,
    })
}

fn cmd_sat(args: &SatArgs) -> CmdResult {
    let f = parse_formula(&args.formula)?;
    let outcome = sat_search_bounded(&f, args.max_points)?;
    let mut doc = json!({
        "max_points": outcome.max_points,
        "models_searched": outcome.models_searched,
        "positive_countdown": outcome.positive_countdown,
    });
    let (verdict, mut human) = match &outcome.witness {
        Some((lts, point)) => {
            doc["verdict"] = json!("sat");
            doc["witness_point"] = json!(point);
            doc["witness_model"] = serde_json::from_str(&lts.to_json(None)).expect("round trips");
            (
                "sat".to_string(),
                format!("sat at point {point} of\n{}", lts.to_json(None)),
            )
        }
        None => {
            doc["verdict"] = json!("unsat-up-to-bound");
            (
                "unsat-up-to-bound".to_string(),
                format!("no model with at most {} points", outcome.max_points),
            )
        }
    };
    if outcome.positive_countdown && outcome.witness.is_none() {
        human.push_str(
            "\nnote: the sentence has positive countdown, so exhausting the classical \
             small-model bound for its hat transform would prove unsatisfiability",
        );
    }
    Ok(Outcome {
        verdict,
        document: doc,
        human,
    })
}

fn cmd_regex(args: &RegexArgs) -> CmdResult {
    let alphabet: Vec<String> = args
        .alphabet
        .split(',')
        .filter(|s| !s.is_empty())
        .map(|s| s.to_string())
        .collect();
    let mode = match args.mode.as_str() {
        "diamond" => PathMode::Diamond,
        "box" => PathMode::Box,
        other => {
            return Err(CmdError(format!(
                "mode must be diamond or box, not `{other}`"
            )))
        }
    };
    let nfa = regex::compile(&args.regex, &alphabet)?;
    let target = parse_formula(&args.target)?;
    let f = ctdmu::syntax::regex_diamond(&nfa, &target, mode)?;
    let text = f.to_string();
    Ok(Outcome {
        verdict: text.clone(),
        document: json!({ "formula": text }),
        human: text,
    })
}

fn cmd_regress() -> CmdResult {
    let outcomes = regress::run_all();
    let mut lines = Vec::new();
    let mut all_ok = true;
    for o in &outcomes {
        lines.push(o.to_string());
        all_ok &= o.passed;
    }
    let doc = json!({
        "passed": all_ok,
        "criteria": outcomes
            .iter()
            .map(|o| json!({
                "name": o.name,
                "passed": o.passed,
                "cases": o.cases,
                "detail": o.detail,
            }))
            .collect::<Vec<_>>(),
    });
    let human = lines.join("\n");
    if all_ok {
        Ok(Outcome {
            verdict: "pass".to_string(),
            document: doc,
            human,
        })
    } else {
        // Regression failures behave like assertion failures.
        println!("{human}");
        eprintln!("regression suite failed");
        std::process::exit(3);
    }
}
