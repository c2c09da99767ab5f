//! Inductive evaluator for countdown formulas over finite models.
//!
//! Fixpoint bounds are interpreted through the approximant chain of the
//! monotone map induced by the binder bodies: a finite bound `n` yields the
//! n-th approximant, while `inf` and every infinite ordinal yield the
//! fixpoint itself — on a finite model the chain closes after at most
//! `|points| * components` strict steps, so all infinite stages coincide.

use crate::model::{Lts, PointSet, Valuation};
use crate::ordinal::CountdownBound;
use crate::syntax::{Fix, FixKind, Formula};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound free variable `{0}`")]
    UnboundVariable(String),
    #[error("formula uses action `{0}` not present in the model")]
    UnknownAction(String),
    #[error("unknown point `{0}`")]
    UnknownPoint(String),
    #[error("expected a fixpoint formula")]
    NotAFixpoint,
    #[error("satisfiability search requires a sentence; free variables: {0:?}")]
    NotASentence(Vec<String>),
}

/// The denotation of `f` in `lts` under `val`.
pub fn eval(f: &Formula, lts: &Lts, val: &Valuation) -> Result<PointSet, EvalError> {
    let mut env = val.clone();
    eval_in(f, lts, &mut env)
}

/// Membership of a named point in the denotation.
pub fn model_check(
    f: &Formula,
    lts: &Lts,
    val: &Valuation,
    point: &str,
) -> Result<bool, EvalError> {
    let i = lts
        .point_index(point)
        .ok_or_else(|| EvalError::UnknownPoint(point.to_string()))?;
    Ok(eval(f, lts, val)?.contains(i))
}

fn eval_in(f: &Formula, lts: &Lts, env: &mut Valuation) -> Result<PointSet, EvalError> {
    match f {
        Formula::Var(x) => env
            .get(x)
            .cloned()
            .ok_or_else(|| EvalError::UnboundVariable(x.clone())),
        Formula::Top => Ok(PointSet::full(lts.num_points())),
        Formula::Bot => Ok(PointSet::empty(lts.num_points())),
        Formula::Or(l, r) => Ok(eval_in(l, lts, env)?.union(&eval_in(r, lts, env)?)),
        Formula::And(l, r) => Ok(eval_in(l, lts, env)?.intersection(&eval_in(r, lts, env)?)),
        Formula::Diamond(a, b) => {
            let act = lts
                .action_index(a)
                .ok_or_else(|| EvalError::UnknownAction(a.clone()))?;
            let inner = eval_in(b, lts, env)?;
            Ok(lts.diamond(act, &inner))
        }
        Formula::Box(a, b) => {
            let act = lts
                .action_index(a)
                .ok_or_else(|| EvalError::UnknownAction(a.clone()))?;
            let inner = eval_in(b, lts, env)?;
            Ok(lts.box_(act, &inner))
        }
        Formula::Fix(fix) => {
            let chain = ApproximantIter::new(fix, lts);
            let result = chain.run(fix, lts, env)?;
            Ok(result[fix.index - 1].clone())
        }
    }
}

struct ApproximantIter {
    steps: Steps,
}

enum Steps {
    Finite(u64),
    ToClosure,
}

impl ApproximantIter {
    fn new(fix: &Fix, _lts: &Lts) -> ApproximantIter {
        let steps = match &fix.bound {
            CountdownBound::Infinity => Steps::ToClosure,
            CountdownBound::Ordinal(o) => match o.as_nat() {
                Some(n) => Steps::Finite(n),
                // Any infinite stage equals the fixpoint on a finite model.
                None => Steps::ToClosure,
            },
        };
        ApproximantIter { steps }
    }

    fn run(&self, fix: &Fix, lts: &Lts, env: &mut Valuation) -> Result<Vec<PointSet>, EvalError> {
        let mut current = initial_vector(fix, lts);
        match self.steps {
            Steps::Finite(n) => {
                for _ in 0..n {
                    current = apply_map(fix, lts, env, &current)?;
                }
            }
            Steps::ToClosure => loop {
                let next = apply_map(fix, lts, env, &current)?;
                if next == current {
                    break;
                }
                current = next;
            },
        }
        Ok(current)
    }
}

fn initial_vector(fix: &Fix, lts: &Lts) -> Vec<PointSet> {
    let bottom = match fix.kind {
        FixKind::Mu => PointSet::empty(lts.num_points()),
        FixKind::Nu => PointSet::full(lts.num_points()),
    };
    vec![bottom; fix.vars.len()]
}

/// One application of the monotone map: evaluate every body with the
/// variables bound to the current vector.
fn apply_map(
    fix: &Fix,
    lts: &Lts,
    env: &mut Valuation,
    current: &[PointSet],
) -> Result<Vec<PointSet>, EvalError> {
    let saved: Vec<Option<PointSet>> = fix
        .vars
        .iter()
        .zip(current.iter())
        .map(|(x, h)| env.insert(x.clone(), h.clone()))
        .collect();
    let mut out = Vec::with_capacity(fix.bodies.len());
    let mut result = Ok(());
    for body in &fix.bodies {
        match eval_in(body, lts, env) {
            Ok(set) => out.push(set),
            Err(e) => {
                result = Err(e);
                break;
            }
        }
    }
    for (x, old) in fix.vars.iter().zip(saved) {
        match old {
            Some(v) => {
                env.insert(x.clone(), v);
            }
            None => {
                env.remove(x);
            }
        }
    }
    result.map(|()| out)
}

/// The approximant chain of a fixpoint formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApproximantChain {
    /// `stages[k]` is the k-th approximant vector, for `k <= up_to`.
    pub stages: Vec<Vec<PointSet>>,
    /// Least `n` with stage `n` equal to stage `n + 1`, when visible within
    /// the computed range.
    pub closure_index: Option<usize>,
}

/// Compute approximants 0 through `up_to` of a fixpoint formula.
pub fn approximant_chain(
    f: &Formula,
    lts: &Lts,
    val: &Valuation,
    up_to: usize,
) -> Result<ApproximantChain, EvalError> {
    let Formula::Fix(fix) = f else {
        return Err(EvalError::NotAFixpoint);
    };
    let mut env = val.clone();
    let mut stages = vec![initial_vector(fix, lts)];
    let mut closure_index = None;
    for k in 0..up_to {
        let next = apply_map(fix, lts, &mut env, stages.last().expect("nonempty"))?;
        if closure_index.is_none() && next == stages[k] {
            closure_index = Some(k);
        }
        stages.push(next);
    }
    Ok(ApproximantChain {
        stages,
        closure_index,
    })
}

/// Outcome of the bounded satisfiability search.
#[derive(Debug, Clone)]
pub struct SatOutcome {
    /// First model and point satisfying the sentence, if any.
    pub witness: Option<(Lts, String)>,
    /// Point bound that was searched exhaustively.
    pub max_points: usize,
    /// Number of models enumerated.
    pub models_searched: u64,
    /// Set when the sentence has positive countdown (no bounded greatest
    /// fixpoints): bounded-unsat of the hat transform at the classical
    /// small-model bound would imply unsatisfiability outright.
    pub positive_countdown: bool,
}

/// Enumerate every labelled model with at most `max_points` points over the
/// sentence's actions and report the first satisfying point.
pub fn sat_search_bounded(f: &Formula, max_points: usize) -> Result<SatOutcome, EvalError> {
    let free = f.free_vars();
    if !free.is_empty() {
        return Err(EvalError::NotASentence(free.into_iter().collect()));
    }
    let actions: Vec<String> = f.actions().into_iter().collect();
    let action_refs: Vec<&str> = actions.iter().map(|s| s.as_str()).collect();
    let positive_countdown = f.analyze().is_positive_countdown;
    let val = Valuation::new();
    let mut models_searched = 0u64;

    for n in 1..=max_points {
        let points: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
        let slots: Vec<(usize, usize, usize)> = (0..action_refs.len())
            .flat_map(|a| (0..n).flat_map(move |s| (0..n).map(move |d| (s, a, d))))
            .collect();
        assert!(slots.len() < 127, "search space too large to enumerate");
        let combos: u128 = 1u128 << slots.len();
        for mask in 0..combos {
            let edges: Vec<(String, String, String)> = slots
                .iter()
                .enumerate()
                .filter(|(bit, _)| mask & (1 << bit) != 0)
                .map(|(_, (s, a, d))| (points[*s].clone(), actions[*a].clone(), points[*d].clone()))
                .collect();
            let lts = Lts::new(points.clone(), actions.clone(), &edges)
                .expect("enumerated model is well formed");
            models_searched += 1;
            let sat = eval(f, &lts, &val)?;
            let witness_point = { sat.iter().next() };
            if let Some(point) = witness_point {
                let name = lts.point_name(point).to_string();
                return Ok(SatOutcome {
                    witness: Some((lts, name)),
                    max_points,
                    models_searched,
                    positive_countdown,
                });
            }
        }
    }
    Ok(SatOutcome {
        witness: None,
        max_points,
        models_searched,
        positive_countdown,
    })
}

/// The complemented valuation over a model: every variable's set is
/// complemented. Used by the negation-dual law.
pub fn complement_valuation(val: &Valuation) -> Valuation {
    val.iter()
        .map(|(k, v)| (k.clone(), v.complement()))
        .collect::<BTreeMap<_, _>>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_lasso;

    /// Three points with p2 -a-> p1 -a-> p0.
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

    fn set(lts: &Lts, names: &[&str]) -> PointSet {
        let mut s = PointSet::empty(lts.num_points());
        for n in names {
            s.insert(lts.point_index(n).unwrap());
        }
        s
    }

    fn ev(src: &str, lts: &Lts) -> PointSet {
        eval(&Formula::parse(src).unwrap(), lts, &Valuation::new()).unwrap()
    }

    #[test]
    fn bounded_nu_counts_path_length() {
        let m = p3();
        assert_eq!(ev("nu^2 x. <a> x", &m), set(&m, &["p2"]));
        assert_eq!(ev("nu^w x. <a> x", &m), set(&m, &[]));
        let loop1 = build_lasso("", "a").unwrap();
        assert_eq!(ev("nu^w x. <a> x", &loop1), PointSet::full(1));
    }

    #[test]
    fn bounded_mu_box() {
        let m = p3();
        assert_eq!(ev("mu^1 x. [a] x", &m), set(&m, &["p0"]));
        assert_eq!(ev("mu x. [a] x", &m), PointSet::full(3));
    }

    #[test]
    fn infinite_ordinal_bound_collapses() {
        let m = p3();
        assert_eq!(ev("nu^w*2+1 x. <a> x", &m), ev("nu x. <a> x", &m));
    }

    #[test]
    fn chain_example() {
        let m = p3();
        let f = Formula::parse("nu x. <a> x").unwrap();
        let chain = approximant_chain(&f, &m, &Valuation::new(), 4).unwrap();
        let expect: Vec<Vec<PointSet>> = vec![
            vec![PointSet::full(3)],
            vec![set(&m, &["p1", "p2"])],
            vec![set(&m, &["p2"])],
            vec![set(&m, &[])],
            vec![set(&m, &[])],
        ];
        assert_eq!(chain.stages, expect);
        assert_eq!(chain.closure_index, Some(3));

        let id = Formula::parse("mu x. x").unwrap();
        let chain = approximant_chain(&id, &m, &Valuation::new(), 1).unwrap();
        assert_eq!(chain.stages.len(), 2);
        assert_eq!(chain.closure_index, Some(0));

        // Monotone decreasing for nu.
        let f = Formula::parse("nu x. <a> x").unwrap();
        let chain = approximant_chain(&f, &m, &Valuation::new(), 4).unwrap();
        for w in chain.stages.windows(2) {
            assert!(w[1][0].is_subset(&w[0][0]));
        }
    }

    #[test]
    fn model_check_examples() {
        let m = p3();
        let val = Valuation::new();
        assert!(!model_check(&Formula::parse("nu^w x. <a> x").unwrap(), &m, &val, "p2").unwrap());
        assert!(model_check(&Formula::parse("tt").unwrap(), &m, &val, "p0").unwrap());
        assert!(matches!(
            model_check(&Formula::parse("tt").unwrap(), &m, &val, "zz"),
            Err(EvalError::UnknownPoint(_))
        ));
    }

    #[test]
    fn eval_errors() {
        let m = p3();
        assert!(matches!(
            eval(&Formula::parse("y").unwrap(), &m, &Valuation::new()),
            Err(EvalError::UnboundVariable(_))
        ));
        assert!(matches!(
            eval(&Formula::parse("<c> tt").unwrap(), &m, &Valuation::new()),
            Err(EvalError::UnknownAction(_))
        ));
    }

    #[test]
    fn sat_search_examples() {
        let out = sat_search_bounded(&Formula::parse("<a> tt").unwrap(), 2).unwrap();
        let (m, _) = out.witness.expect("satisfiable");
        assert!(m.num_points() <= 2 && m.num_edges() >= 1);

        let out = sat_search_bounded(&Formula::parse("mu x. <a> x").unwrap(), 3).unwrap();
        assert!(out.witness.is_none());
        assert!(out.positive_countdown);

        let out = sat_search_bounded(&Formula::parse("nu x. <a> x").unwrap(), 1).unwrap();
        let (m, p) = out.witness.expect("self-loop satisfies");
        assert_eq!(m.num_points(), 1);
        assert!(model_check(
            &Formula::parse("nu x. <a> x").unwrap(),
            &m,
            &Valuation::new(),
            &p
        )
        .unwrap());

        assert!(matches!(
            sat_search_bounded(&Formula::parse("<a> x").unwrap(), 2),
            Err(EvalError::NotASentence(_))
        ));
    }

    #[test]
    fn duality_on_p3() {
        let m = p3();
        let f = Formula::parse("nu^2 x. <a> x & y").unwrap();
        let mut val = Valuation::new();
        val.insert("y".to_string(), set(&m, &["p1", "p2"]));
        let lhs = eval(&f.dualize(), &m, &complement_valuation(&val)).unwrap();
        let rhs = eval(&f, &m, &val).unwrap().complement();
        assert_eq!(lhs, rhs);
    }
}
