//! Property tests: algebraic laws for ordinals and interval sets, the
//! parse/print identity, and the semantic laws that tie the transformations
//! to the evaluator on small random instances.

use ctdmu::model::{build_lasso, random_lts, Valuation};
use ctdmu::ordeval::{Interval, IntervalSet, OrdinalModel, Upper};
use ctdmu::ordinal::Ordinal;
use ctdmu::regress::{random_formula, random_valuation, FormulaGenConfig};
use ctdmu::rng::SplitMix64;
use ctdmu::semantics::{complement_valuation, eval};
use ctdmu::syntax::{regex_diamond, Formula, Nfa, PathMode};
use num_bigint::BigUint;
use proptest::prelude::*;
use std::collections::BTreeSet;

fn arb_ordinal() -> impl Strategy<Value = Ordinal> {
    // Up to three CNF terms with exponents below 5 and small coefficients.
    proptest::collection::vec((0u64..5, 1u64..5), 0..3).prop_map(|mut terms| {
        terms.sort_by_key(|t| std::cmp::Reverse(t.0));
        terms.dedup_by_key(|t| t.0);
        Ordinal::from_terms(
            terms
                .into_iter()
                .map(|(e, c)| (e, BigUint::from(c)))
                .collect(),
        )
        .expect("sorted distinct exponents")
    })
}

proptest! {
    #[test]
    fn ordinal_order_is_total(a in arb_ordinal(), b in arb_ordinal(), c in arb_ordinal()) {
        use std::cmp::Ordering::*;
        match a.cmp(&b) {
            Less => prop_assert_eq!(b.cmp(&a), Greater),
            Greater => prop_assert_eq!(b.cmp(&a), Less),
            Equal => prop_assert_eq!(&a, &b),
        }
        if a <= b && b <= c {
            prop_assert!(a <= c);
        }
    }

    #[test]
    fn ordinal_add_is_associative(a in arb_ordinal(), b in arb_ordinal(), c in arb_ordinal()) {
        prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
    }

    #[test]
    fn ordinal_mul_left_distributes(a in arb_ordinal(), b in arb_ordinal(), c in arb_ordinal()) {
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
    }

    #[test]
    fn left_subtract_inverts_add(a in arb_ordinal(), b in arb_ordinal()) {
        if a <= b {
            let d = a.left_subtract(&b).expect("a <= b");
            prop_assert_eq!(a.add(&d), b.clone());
        } else {
            prop_assert!(a.left_subtract(&b).is_err());
        }
        // And the composed direction.
        let sum = a.add(&b);
        let d = a.left_subtract(&sum).expect("a <= a + b");
        prop_assert_eq!(a.add(&d), sum);
    }

    #[test]
    fn limit_xor_successor(a in arb_ordinal()) {
        if a.is_zero() {
            prop_assert!(!a.is_limit() && !a.is_successor());
        } else {
            prop_assert!(a.is_limit() ^ a.is_successor());
        }
        let pred_of_succ = a.successor().predecessor();
        prop_assert_eq!(pred_of_succ, Some(a));
    }

    #[test]
    fn ordinal_literal_round_trip(a in arb_ordinal()) {
        let text = a.to_string();
        prop_assert_eq!(text.parse::<Ordinal>().expect("prints canonically"), a);
    }
}

fn arb_interval_set() -> impl Strategy<Value = IntervalSet> {
    proptest::collection::vec((arb_ordinal(), arb_ordinal(), any::<bool>()), 0..4).prop_map(|raw| {
        IntervalSet::from_parts(
            raw.into_iter()
                .map(|(lo, len, top)| Interval {
                    hi: if top {
                        Upper::Top
                    } else {
                        Upper::At(lo.add(&len))
                    },
                    lo,
                })
                .collect(),
        )
    })
}

fn normalized(s: &IntervalSet) -> bool {
    s.parts().windows(2).all(|w| match &w[0].hi {
        Upper::At(h) => *h < w[1].lo,
        Upper::Top => false,
    }) && s.parts().iter().all(|iv| match &iv.hi {
        Upper::At(h) => iv.lo < *h,
        Upper::Top => true,
    })
}

proptest! {
    #[test]
    fn interval_boolean_algebra(a in arb_interval_set(), b in arb_interval_set()) {
        let model = OrdinalModel::unbounded();
        prop_assert!(normalized(&a));
        prop_assert!(normalized(&a.union(&b)));
        prop_assert!(normalized(&a.intersection(&b)));
        prop_assert!(normalized(&a.complement(&model)));
        // Involution and De Morgan.
        prop_assert_eq!(a.complement(&model).complement(&model), a.clone());
        prop_assert_eq!(
            a.union(&b).complement(&model),
            a.complement(&model).intersection(&b.complement(&model))
        );
        // Lattice laws.
        prop_assert_eq!(a.union(&b), b.union(&a));
        prop_assert_eq!(a.intersection(&a), a.clone());
        prop_assert_eq!(a.union(&a.intersection(&b)), a.clone());
        // Sample membership agrees with the boolean structure.
        for probe in ["0", "1", "w", "w+1", "w^2*2", "w^4"] {
            let x: Ordinal = probe.parse().expect("literal");
            prop_assert_eq!(a.union(&b).contains(&x), a.contains(&x) || b.contains(&x));
            prop_assert_eq!(
                a.intersection(&b).contains(&x),
                a.contains(&x) && b.contains(&x)
            );
            prop_assert_eq!(a.complement(&model).contains(&x), !a.contains(&x));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parse_print_identity(seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let mut cfg = FormulaGenConfig::fuzz();
        cfg.guarded = false;
        let f = random_formula(&mut rng, &cfg);
        let printed = f.to_string();
        let back = Formula::parse(&printed).expect("printer output parses");
        prop_assert_eq!(back, f);
    }

    #[test]
    fn dualize_is_involutive_and_semantic_negation(seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let cfg = FormulaGenConfig::fuzz();
        let f = random_formula(&mut rng, &cfg);
        prop_assert_eq!(f.dualize().dualize(), f.clone());
        let lts = random_lts(rng.next_u64(), 1 + rng.usize_below(4), &["a", "b"], 0.4);
        let val = random_valuation(&mut rng, &f, &lts);
        let direct = eval(&f, &lts, &val).expect("evaluates");
        let dual = eval(&f.dualize(), &lts, &complement_valuation(&val)).expect("evaluates");
        prop_assert_eq!(dual, direct.complement());
    }

    #[test]
    fn successor_elimination_preserves_semantics(seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let cfg = FormulaGenConfig::fuzz();
        let f = random_formula(&mut rng, &cfg);
        let eliminated = f.successor_elimination();
        // No successor bounds left.
        fn successor_free(f: &Formula) -> bool {
            if let Formula::Fix(fix) = f {
                if let ctdmu::ordinal::CountdownBound::Ordinal(o) = &fix.bound {
                    if o.is_successor() {
                        return false;
                    }
                }
            }
            f.children().into_iter().all(successor_free)
        }
        prop_assert!(successor_free(&eliminated));
        let lts = random_lts(rng.next_u64(), 1 + rng.usize_below(4), &["a", "b"], 0.4);
        let val = random_valuation(&mut rng, &f, &lts);
        prop_assert_eq!(
            eval(&eliminated, &lts, &val).expect("evaluates"),
            eval(&f, &lts, &val).expect("evaluates")
        );
    }

    #[test]
    fn countdown_collapses_on_lassos(seed in any::<u64>()) {
        // Ultimately periodic words cannot distinguish omega-bounded
        // operators from classical fixpoints: the induced finite model
        // closes every chain in finitely many steps. Finite bounds are
        // approximant cut-offs and are excluded — they differ even here.
        let mut rng = SplitMix64::new(seed);
        let mut cfg = FormulaGenConfig::fuzz();
        cfg.free_vars = Vec::new();
        cfg.finite_bounds = Vec::new();
        cfg.max_countdown = 3;
        cfg.max_omega = 3;
        let f = random_formula(&mut rng, &cfg);
        let letters = ["a", "b"];
        let prefix: String = (0..rng.usize_below(3)).map(|_| *rng.pick(&letters)).collect();
        let loop_part: String =
            (0..1 + rng.usize_below(3)).map(|_| *rng.pick(&letters)).collect();
        let mut lasso = build_lasso(&prefix, &loop_part).expect("lasso");
        // Make sure both actions exist so evaluation never errors.
        if lasso.action_index("a").is_none() || lasso.action_index("b").is_none() {
            lasso = build_lasso(&format!("{prefix}ab"), &loop_part).expect("lasso");
        }
        let val = Valuation::new();
        prop_assert_eq!(
            eval(&f, &lasso, &val).expect("evaluates"),
            eval(&f.hat_transform(), &lasso, &val).expect("evaluates")
        );
    }
}

/// The compiled reachability formulas match product-graph reachability on
/// random lasso words.
#[test]
fn regex_diamond_matches_reachability_oracle() {
    use ctdmu::model::PointSet;
    use ctdmu::regress::language_path_oracle;

    let mut rng = SplitMix64::new(0x5EED);
    let letters = ["a", "b"];
    // a*: one accepting state looping on a.
    let a_star = Nfa {
        alphabet: vec!["a".into(), "b".into()],
        num_states: 1,
        initial: 0,
        accepting: BTreeSet::from([0]),
        transitions: vec![(0, "a".into(), 0)],
    };
    // (ab)* — a two-state cycle.
    let ab_star = Nfa {
        alphabet: vec!["a".into(), "b".into()],
        num_states: 2,
        initial: 0,
        accepting: BTreeSet::from([0]),
        transitions: vec![(0, "a".into(), 1), (1, "b".into(), 0)],
    };
    let universal = Nfa::universal(&["a", "b"]);
    let empty = Nfa::empty_language(&["a", "b"]);

    for case in 0..10 {
        let prefix: String = (0..rng.usize_below(4))
            .map(|_| *rng.pick(&letters))
            .collect();
        let loop_part: String = (0..1 + rng.usize_below(4))
            .map(|_| *rng.pick(&letters))
            .collect();
        let lasso = build_lasso(&format!("{prefix}ab"), &loop_part).expect("lasso");
        // A random target set named by a free variable.
        let mut target = PointSet::empty(lasso.num_points());
        for p in 0..lasso.num_points() {
            if rng.chance(0.4) {
                target.insert(p);
            }
        }
        let mut val = Valuation::new();
        val.insert("x".to_string(), target.clone());

        for nfa in [&a_star, &ab_star, &universal, &empty] {
            for mode in [PathMode::Diamond, PathMode::Box] {
                let formula = regex_diamond(nfa, &Formula::var("x"), mode).expect("compiles");
                let by_eval = eval(&formula, &lasso, &val).expect("evaluates");
                let by_oracle = language_path_oracle(nfa, &lasso, &target, mode);
                assert_eq!(
                    by_eval,
                    by_oracle,
                    "case {case}: mode {mode:?} disagrees on {}",
                    lasso.to_json(None)
                );
            }
        }
        // The universal language with a tt target covers every point that
        // has any outgoing path, which on a lasso is everything.
        let everywhere =
            regex_diamond(&universal, &Formula::Top, PathMode::Diamond).expect("compiles");
        assert_eq!(
            eval(&everywhere, &lasso, &Valuation::new()).expect("evaluates"),
            PointSet::full(lasso.num_points())
        );
        // The empty language reaches nothing.
        let nothing =
            regex_diamond(&empty, &Formula::var("x"), PathMode::Diamond).expect("compiles");
        assert_eq!(
            eval(&nothing, &lasso, &val).expect("evaluates"),
            PointSet::empty(lasso.num_points())
        );
    }
}

/// The two-component unbounded-infix sentence: "there are arbitrarily long
/// blocks of consecutive a-steps". On an ultimately periodic word a block of
/// every length exists iff the word has an all-a tail, which on lassos the
/// evaluator can decide exactly.
#[test]
fn unbounded_a_blocks_on_lassos() {
    use ctdmu::ordinal::CountdownBound;
    use ctdmu::syntax::{Fix, FixKind, Nfa, PathMode};

    let gamma_star = Nfa::universal(&["a", "b"]);
    let skip_then =
        |target: Formula| regex_diamond(&gamma_star, &target, PathMode::Diamond).expect("compiles");
    let phi = Formula::Fix(Fix {
        kind: FixKind::Nu,
        bound: CountdownBound::omega(),
        index: 1,
        vars: vec!["x1".into(), "x2".into()],
        bodies: vec![
            skip_then(Formula::var("x2")),
            Formula::diamond("a", Formula::var("x2")),
        ],
    });
    let val = Valuation::new();
    for (prefix, loop_part, expect) in [
        ("ab", "a", true),  // tail a^w: blocks of every length
        ("aa", "b", false), // blocks of length at most 2
        ("", "ab", false),  // blocks of length 1 forever
        ("b", "ba", false),
    ] {
        let lasso = build_lasso(prefix, loop_part).expect("lasso");
        // Pad models missing one of the actions so evaluation stays total.
        let lasso = if lasso.actions().len() < 2 {
            build_lasso(&format!("ab{prefix}"), loop_part).expect("lasso")
        } else {
            lasso
        };
        let sat = eval(&phi, &lasso, &val).expect("evaluates");
        assert_eq!(sat.contains(0), expect, "word {prefix}({loop_part})^w");
    }
}

/// On finite truncations of the two-row model family, every countdown
/// formula collapses to its classical counterpart, so the two-component
/// sentence distinguishing the rows on the infinite family is false
/// everywhere here (no truncation has unbounded a-paths).
#[test]
fn two_row_family_truncations_collapse() {
    use ctdmu::model::build_figure1;
    use ctdmu::ordinal::CountdownBound;
    use ctdmu::syntax::{Fix, FixKind};

    let phi = Formula::Fix(Fix {
        kind: FixKind::Nu,
        bound: CountdownBound::omega(),
        index: 1,
        vars: vec!["x1".into(), "x2".into()],
        bodies: vec![
            Formula::diamond("b", Formula::var("x2")),
            Formula::diamond("a", Formula::var("x2")),
        ],
    });
    let val = Valuation::new();
    for n in 1..=5usize {
        let m = build_figure1(n).expect("family");
        let sat = eval(&phi, &m, &val).expect("evaluates");
        let hat = eval(&phi.hat_transform(), &m, &val).expect("evaluates");
        assert_eq!(sat, hat, "collapse at n={n}");
        assert!(
            sat.is_empty(),
            "no truncation has unbounded a-paths (n={n})"
        );
    }
}

/// Symbolic ordinal evaluation agrees with explicit finite linear models on
/// concrete heights (finite bounds only, where truncation is exact).
#[test]
fn ordinal_prefix_consistency() {
    use ctdmu::model::Lts;
    use ctdmu::ordeval::eval_ordinal;
    use std::collections::BTreeMap;

    let mut rng = SplitMix64::new(0x9EF1);
    for h in [1usize, 3, 17, 60, 200] {
        // Explicit linear order: i -> j iff i > j.
        let points: Vec<String> = (0..h).map(|i| format!("o{i}")).collect();
        let mut edges = Vec::new();
        for i in 0..h {
            for j in 0..i {
                edges.push((points[i].clone(), "a".to_string(), points[j].clone()));
            }
        }
        let lts = Lts::new(points, vec!["a".to_string()], &edges).expect("linear model");
        let model = OrdinalModel::with_height(Ordinal::from_nat(h as u64));

        let mut cfg = FormulaGenConfig::fuzz();
        cfg.actions = vec!["a".into()];
        cfg.free_vars = Vec::new();
        cfg.max_omega = 0; // finite bounds only
        for _ in 0..20 {
            let f = random_formula(&mut rng, &cfg);
            let symbolic = eval_ordinal(&f, &model, &BTreeMap::new()).expect("evaluates");
            let explicit = eval(&f, &lts, &Valuation::new()).expect("evaluates");
            for i in 0..h {
                assert_eq!(
                    symbolic.contains(&Ordinal::from_nat(i as u64)),
                    explicit.contains(i),
                    "height {h}, point {i}, formula {f}"
                );
            }
        }
    }
}
