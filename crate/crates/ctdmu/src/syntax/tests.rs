use super::*;
use crate::ordinal::Ordinal;

fn p(s: &str) -> Formula {
    Formula::parse(s).unwrap()
}

#[test]
fn parse_scalar_bounded() {
    let f = p("nu^w x. <a> x");
    match &f {
        Formula::Fix(fix) => {
            assert_eq!(fix.kind, FixKind::Nu);
            assert_eq!(fix.bound, CountdownBound::omega());
            assert_eq!(fix.index, 1);
            assert_eq!(fix.vars, vec!["x".to_string()]);
            assert_eq!(fix.bodies[0], Formula::diamond("a", Formula::var("x")));
        }
        other => panic!("expected fixpoint, got {other:?}"),
    }
}

#[test]
fn parse_defaults() {
    let f = p("mu x. [a] x");
    match &f {
        Formula::Fix(fix) => {
            assert_eq!(fix.kind, FixKind::Mu);
            assert!(fix.bound.is_infinity());
            assert_eq!(fix.index, 1);
        }
        other => panic!("expected fixpoint, got {other:?}"),
    }
}

#[test]
fn parse_vectorial() {
    let f = p("nu^w_1 (x1,x2).(<b> x2, <a> x2)");
    match &f {
        Formula::Fix(fix) => {
            assert_eq!(fix.vars.len(), 2);
            assert_eq!(fix.index, 1);
            assert_eq!(fix.bodies[0], Formula::diamond("b", Formula::var("x2")));
            assert_eq!(fix.bodies[1], Formula::diamond("a", Formula::var("x2")));
        }
        other => panic!("expected fixpoint, got {other:?}"),
    }
}

#[test]
fn parse_errors() {
    assert!(Formula::parse("mu_2 (x).(x)").is_err()); // index out of range
    assert!(Formula::parse("mu (x,x).(x,x)").is_err()); // duplicate variable
    assert!(Formula::parse("mu (x,y).(x)").is_err()); // arity mismatch
    assert!(Formula::parse("<a>").is_err());
    assert!(Formula::parse("mu x x").is_err());
    let err = Formula::parse("tt & &").unwrap_err();
    assert!(err.position > 0);
}

#[test]
fn precedence_or_looser_than_and() {
    assert_eq!(
        p("a | b & c"),
        Formula::or(p("a"), Formula::and(p("b"), p("c")))
    );
    assert_eq!(
        p("(a | b) & c"),
        Formula::and(Formula::or(p("a"), p("b")), p("c"))
    );
}

#[test]
fn fix_body_extends_right() {
    let f = p("mu x. x | <a> x");
    match f {
        Formula::Fix(fix) => {
            assert_eq!(fix.bodies[0], Formula::or(p("x"), p("<a> x")));
        }
        other => panic!("expected fixpoint, got {other:?}"),
    }
}

#[test]
fn print_round_trips() {
    for s in [
        "nu^w x. <a> x",
        "tt",
        "mu^w^2*2 x. x",
        "nu^w_1 (x1,x2).(<b> x2, <a> x2)",
        "a | b & c",
        "(a | b) & c",
        "[a] (x & y) | <b> tt",
        "mu x. x | <a> x",
        "(mu x. x) | y",
        "nu^3 x. <a> mu y. x & y",
    ] {
        let f = p(s);
        assert_eq!(p(&f.to_string()), f, "round trip of {s} printed as {f}");
    }
    assert_eq!(p("nu^w x. <a> x").to_string(), "nu^w x. <a> x");
    assert_eq!(Formula::Top.to_string(), "tt");
    assert_eq!(
        Formula::fix(
            FixKind::Mu,
            CountdownBound::Ordinal("w^2*2".parse::<Ordinal>().unwrap()),
            "x",
            Formula::var("x"),
        )
        .to_string(),
        "mu^w^2*2 x. x"
    );
}

#[test]
fn analyze_reports() {
    // Nested bounded binders on one path count once each.
    let eq9_k2 = p("nu^w x1. nu^w x2. <a> (x1 & x2)");
    let r = eq9_k2.analyze();
    assert_eq!(r.nesting, 2);
    assert!(r.is_scalar);
    assert!(r.is_sentence);

    let vectorial = p("nu^w_1 (x1,x2).(<b> x2, <a> x2)");
    assert!(!vectorial.analyze().is_scalar);

    let r = p("mu x. <a> x").analyze();
    assert_eq!(r.nesting, 0);
    assert!(r.is_positive_countdown);
    assert!(r.is_guarded);

    assert!(!p("nu^w x. <a> x").analyze().is_positive_countdown);
    assert!(p("mu^w x. <a> x").analyze().is_positive_countdown);
    assert!(!p("mu x. x | <a> x").analyze().is_guarded);
    assert!(p("x & <a> y").analyze().free_vars.contains("x"));
}

#[test]
fn substitute_simultaneous_and_capture_avoiding() {
    let mut binding = BTreeMap::new();
    binding.insert("x".to_string(), Formula::Top);
    assert_eq!(Formula::var("x").substitute(&binding), Formula::Top);

    // Simultaneity: x -> tt and y -> ff applied at once.
    let mut binding = BTreeMap::new();
    binding.insert("x".to_string(), Formula::Top);
    binding.insert("y".to_string(), Formula::Bot);
    assert_eq!(
        p("x | y").substitute(&binding),
        Formula::or(Formula::Top, Formula::Bot)
    );

    // Capture avoidance: the binder for x is renamed before y := x lands.
    let mut binding = BTreeMap::new();
    binding.insert("y".to_string(), Formula::var("x"));
    let f = p("mu x. y");
    let g = f.substitute(&binding);
    match &g {
        Formula::Fix(fix) => {
            assert_ne!(fix.vars[0], "x");
            assert_eq!(fix.bodies[0], Formula::var("x"));
        }
        other => panic!("expected fixpoint, got {other:?}"),
    }
    // Bound occurrences stay untouched.
    let mut binding = BTreeMap::new();
    binding.insert("x".to_string(), Formula::Top);
    assert_eq!(p("mu x. <a> x").substitute(&binding), p("mu x. <a> x"));
}

#[test]
fn dualize_examples() {
    assert_eq!(p("nu^w x. <a> x").dualize(), p("mu^w x. [a] x"));
    assert_eq!(p("tt & x").dualize(), p("ff | x"));
    for s in [
        "nu^w x. <a> x",
        "mu_2 (x,y).(y, x & <b> y)",
        "tt & (ff | <a> x)",
    ] {
        let f = p(s);
        assert_eq!(f.dualize().dualize(), f);
    }
}

#[test]
fn hat_examples() {
    assert_eq!(p("nu^w x. <a> x").hat_transform(), p("nu x. <a> x"));
    let f = p("mu x. <a> x | tt");
    assert_eq!(f.hat_transform(), f);
    for s in ["nu^w x. <a> x", "mu^3 x. nu^w*2 y. x | y"] {
        assert_eq!(p(s).hat_transform().nesting(), 0);
    }
}

#[test]
fn successor_elimination_examples() {
    assert_eq!(p("mu^1 x. <a> x").successor_elimination(), p("<a> ff"));
    assert_eq!(p("nu^0 x. <a> x").successor_elimination(), Formula::Top);
    let limit = p("mu^w x. <a> x");
    assert_eq!(limit.successor_elimination(), limit);
    // nu^2 x. <a> x unfolds twice.
    assert_eq!(p("nu^2 x. <a> x").successor_elimination(), p("<a> <a> tt"));
    // Bound w+1 steps down to the limit w.
    let f = p("mu^w+1 x. <a> x").successor_elimination();
    assert_eq!(f, p("<a> mu^w x. <a> x"));
}

#[test]
fn regex_diamond_shapes() {
    // a* with one accepting state: mu q0. x \/ <a> q0.
    let astar = Nfa {
        alphabet: vec!["a".to_string()],
        num_states: 1,
        initial: 0,
        accepting: BTreeSet::from([0]),
        transitions: vec![(0, "a".to_string(), 0)],
    };
    let f = regex_diamond(&astar, &Formula::var("x"), PathMode::Diamond).unwrap();
    assert_eq!(f, p("mu q0. x | <a> q0"));
    assert_eq!(f.nesting(), 0);

    // Empty language compiles to a system equivalent to ff.
    let empty = Nfa::empty_language(&["a"]);
    let f = regex_diamond(&empty, &Formula::var("x"), PathMode::Diamond).unwrap();
    assert_eq!(f, p("mu q0. ff"));

    let none = Nfa {
        alphabet: vec![],
        num_states: 1,
        initial: 0,
        accepting: BTreeSet::new(),
        transitions: vec![],
    };
    assert_eq!(
        regex_diamond(&none, &Formula::Top, PathMode::Diamond),
        Err(NfaError::EmptyAlphabet)
    );

    // Fresh-variable prefix avoids the target's names.
    let clash = Formula::var("q0");
    let f = regex_diamond(&astar, &clash, PathMode::Diamond).unwrap();
    match &f {
        Formula::Fix(fix) => assert_eq!(fix.vars, vec!["qq0".to_string()]),
        other => panic!("expected fixpoint, got {other:?}"),
    }
}

#[test]
fn occurrence_identity() {
    let f = p("<a> x | <a> x");
    let index = OccIndex::build(&f);
    // Root, two diamonds, two variable occurrences: all distinct.
    assert_eq!(index.nodes.len(), 5);
    assert_eq!(index.by_occ.len(), 5);
    assert_eq!(f.subformula_at(&Occurrence(vec![0])), Some(&p("<a> x")));
    assert_eq!(
        f.subformula_at(&Occurrence(vec![0, 0])),
        Some(&Formula::var("x"))
    );
}
