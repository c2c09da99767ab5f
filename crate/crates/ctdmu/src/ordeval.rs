//! Symbolic evaluation over ordinal linear models: the points are the
//! ordinals below a height (a concrete ordinal, or the symbolic uncountable
//! top), with `a -> b` exactly when `a > b`, and a single action.
//!
//! Sets of points are finite unions of half-open intervals with ordinal
//! endpoints. Fixpoint chains are run concretely; at limit stages the
//! evaluator watches for a stable interval shape whose endpoints advance by a
//! constant left-difference and extrapolates the limit (`g + d*j` becomes
//! `g + d*w`). Detection failures surface as [`OrdEvalError::LimitUndetected`]
//! rather than a wrong answer.

use crate::ordinal::{CountdownBound, Ordinal};
use crate::syntax::{Fix, FixKind, Formula};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Exclusive upper endpoint of an interval: an ordinal or the model height.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Upper {
    At(Ordinal),
    Top,
}

impl Upper {
    fn leq_lo(&self, lo: &Ordinal) -> bool {
        match self {
            Upper::At(o) => o <= lo,
            Upper::Top => false,
        }
    }
}

/// Half-open interval `[lo, hi)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Ordinal,
    pub hi: Upper,
}

/// Normalized finite union of disjoint, non-adjacent, nonempty intervals.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IntervalSet {
    parts: Vec<Interval>,
}

/// Model height: a concrete ordinal or the symbolic top (an uncountable
/// ordinal, larger than anything the arithmetic below can produce).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Height {
    Top,
    At(Ordinal),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrdinalModel {
    pub height: Height,
}

impl OrdinalModel {
    pub fn unbounded() -> OrdinalModel {
        OrdinalModel {
            height: Height::Top,
        }
    }

    pub fn with_height(h: Ordinal) -> OrdinalModel {
        OrdinalModel {
            height: Height::At(h),
        }
    }

    fn everything(&self) -> IntervalSet {
        match &self.height {
            Height::Top => IntervalSet::interval(Ordinal::zero(), Upper::Top),
            Height::At(h) => IntervalSet::interval(Ordinal::zero(), Upper::At(h.clone())),
        }
    }

    /// Clip a set to the model.
    fn clip(&self, s: IntervalSet) -> IntervalSet {
        match &self.height {
            Height::Top => s,
            Height::At(_) => s.intersection(&self.everything()),
        }
    }
}

impl IntervalSet {
    pub fn empty() -> IntervalSet {
        IntervalSet { parts: Vec::new() }
    }

    pub fn interval(lo: Ordinal, hi: Upper) -> IntervalSet {
        IntervalSet::from_parts(vec![Interval { lo, hi }])
    }

    /// Normalize: sort, drop empties, merge overlaps and adjacencies.
    pub fn from_parts(mut parts: Vec<Interval>) -> IntervalSet {
        parts.retain(|iv| !iv.hi.leq_lo(&iv.lo));
        parts.sort_by(|a, b| a.lo.cmp(&b.lo).then_with(|| a.hi.cmp(&b.hi)));
        let mut out: Vec<Interval> = Vec::new();
        for iv in parts {
            match out.last_mut() {
                Some(last) if !last.hi.leq_lo(&iv.lo) || last.hi == Upper::At(iv.lo.clone()) => {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                    }
                }
                _ => out.push(iv),
            }
        }
        IntervalSet { parts: out }
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn contains(&self, x: &Ordinal) -> bool {
        self.parts.iter().any(|iv| {
            iv.lo <= *x
                && match &iv.hi {
                    Upper::At(h) => x < h,
                    Upper::Top => true,
                }
        })
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut parts = self.parts.clone();
        parts.extend(other.parts.iter().cloned());
        IntervalSet::from_parts(parts)
    }

    pub fn intersection(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        for a in &self.parts {
            for b in &other.parts {
                let lo = if a.lo >= b.lo {
                    a.lo.clone()
                } else {
                    b.lo.clone()
                };
                let hi = if a.hi <= b.hi {
                    a.hi.clone()
                } else {
                    b.hi.clone()
                };
                if !hi.leq_lo(&lo) {
                    out.push(Interval { lo, hi });
                }
            }
        }
        IntervalSet::from_parts(out)
    }

    /// Complement within `[0, height)`.
    pub fn complement(&self, model: &OrdinalModel) -> IntervalSet {
        let mut out = Vec::new();
        let mut cursor = Ordinal::zero();
        for iv in &self.parts {
            if cursor < iv.lo {
                out.push(Interval {
                    lo: cursor.clone(),
                    hi: Upper::At(iv.lo.clone()),
                });
            }
            match &iv.hi {
                Upper::At(h) => cursor = h.clone(),
                Upper::Top => return model.clip(IntervalSet::from_parts(out)),
            }
        }
        out.push(Interval {
            lo: cursor,
            hi: Upper::Top,
        });
        model.clip(IntervalSet::from_parts(out))
    }

    /// `{a | some b in s with b < a}`: everything strictly above the minimum.
    pub fn diamond(&self, model: &OrdinalModel) -> IntervalSet {
        match self.parts.first() {
            None => IntervalSet::empty(),
            Some(first) => model.clip(IntervalSet::interval(first.lo.successor(), Upper::Top)),
        }
    }

    /// `{a | every b < a lies in s}`: the initial segment up to and including
    /// the least missing ordinal.
    pub fn box_(&self, model: &OrdinalModel) -> IntervalSet {
        let least_missing = match self.parts.first() {
            Some(first) if first.lo.is_zero() => match &first.hi {
                // The set contains an initial segment [0, h); the least
                // missing point is h.
                Upper::At(h) => Some(h.clone()),
                Upper::Top => None,
            },
            _ => Some(Ordinal::zero()),
        };
        match least_missing {
            None => model.everything(),
            Some(g) => model.clip(IntervalSet::interval(
                Ordinal::zero(),
                Upper::At(g.successor()),
            )),
        }
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "{{}}");
        }
        for (i, iv) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, " ∪ ")?;
            }
            match &iv.hi {
                Upper::At(h) => write!(f, "[{}, {})", iv.lo, h)?,
                Upper::Top => write!(f, "[{}, w1)", iv.lo)?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrdEvalError {
    #[error("unbound free variable `{0}`")]
    UnboundVariable(String),
    #[error("ordinal models are monomodal; formula uses actions {0:?}")]
    NotMonomodal(Vec<String>),
    #[error("unsupported fixpoint bound `{0}`: only finite bounds, w, and inf are evaluated")]
    UnsupportedBound(String),
    #[error("no limit detected after {steps} chain steps (level {level})")]
    LimitUndetected { steps: usize, level: usize },
}

/// Evaluate a monomodal formula over an ordinal model. `val` interprets the
/// free variables; bounds must be finite, `w`, or `inf`.
pub fn eval_ordinal(
    f: &Formula,
    model: &OrdinalModel,
    val: &BTreeMap<String, IntervalSet>,
) -> Result<IntervalSet, OrdEvalError> {
    let actions: Vec<String> = f.actions().into_iter().collect();
    if actions.len() > 1 {
        return Err(OrdEvalError::NotMonomodal(actions));
    }
    let mut env = val.clone();
    eval_rec(f, model, &mut env)
}

fn eval_rec(
    f: &Formula,
    model: &OrdinalModel,
    env: &mut BTreeMap<String, IntervalSet>,
) -> Result<IntervalSet, OrdEvalError> {
    match f {
        Formula::Var(x) => env
            .get(x)
            .cloned()
            .ok_or_else(|| OrdEvalError::UnboundVariable(x.clone())),
        Formula::Top => Ok(model.everything()),
        Formula::Bot => Ok(IntervalSet::empty()),
        Formula::Or(l, r) => Ok(eval_rec(l, model, env)?.union(&eval_rec(r, model, env)?)),
        Formula::And(l, r) => Ok(eval_rec(l, model, env)?.intersection(&eval_rec(r, model, env)?)),
        Formula::Diamond(_, b) => Ok(eval_rec(b, model, env)?.diamond(model)),
        Formula::Box(_, b) => Ok(eval_rec(b, model, env)?.box_(model)),
        Formula::Fix(fix) => eval_fix(fix, model, env),
    }
}

/// Total number of monotone-map applications before giving up.
const MAX_STEPS: usize = 4000;
/// Consecutive same-shape entries required to conjecture a limit.
const WINDOW: usize = 8;
/// Nesting depth of limit-of-limits tracking.
const MAX_LEVELS: usize = 8;

fn eval_fix(
    fix: &Fix,
    model: &OrdinalModel,
    env: &mut BTreeMap<String, IntervalSet>,
) -> Result<IntervalSet, OrdEvalError> {
    let bottom = match fix.kind {
        FixKind::Mu => IntervalSet::empty(),
        FixKind::Nu => model.everything(),
    };
    let mut current: Vec<IntervalSet> = vec![bottom; fix.vars.len()];

    enum Target {
        Finite(u64),
        Omega,
        Fixpoint,
    }
    let target = match &fix.bound {
        CountdownBound::Infinity => Target::Fixpoint,
        CountdownBound::Ordinal(o) => match o.as_nat() {
            Some(n) => Target::Finite(n),
            None if *o == Ordinal::omega() => Target::Omega,
            None => return Err(OrdEvalError::UnsupportedBound(o.to_string())),
        },
    };

    if let Target::Finite(n) = target {
        for _ in 0..n {
            current = apply_bodies(fix, model, env, &current)?;
        }
        return Ok(current[fix.index - 1].clone());
    }

    let mut detector = LimitDetector::new(fix.vars.len());
    let mut steps = 0usize;
    loop {
        if steps >= MAX_STEPS {
            return Err(OrdEvalError::LimitUndetected { steps, level: 0 });
        }
        steps += 1;
        let next = apply_bodies(fix, model, env, &current)?;
        if next == current {
            // Chain closed: this is the fixpoint, hence also every limit
            // stage from here on.
            return Ok(current[fix.index - 1].clone());
        }
        match detector.feed(next.clone())? {
            Some((limit, level)) => {
                let limit: Vec<IntervalSet> = limit.into_iter().map(|s| model.clip(s)).collect();
                match target {
                    Target::Omega if level == 0 => {
                        // First limit stage is the answer for bound w.
                        return Ok(limit[fix.index - 1].clone());
                    }
                    Target::Omega => {
                        // A level > 0 jump cannot happen before a level-0
                        // detection returned above.
                        unreachable!("higher-level limit before the first");
                    }
                    _ => {
                        current = limit;
                    }
                }
            }
            None => current = next,
        }
    }
}

fn apply_bodies(
    fix: &Fix,
    model: &OrdinalModel,
    env: &mut BTreeMap<String, IntervalSet>,
    current: &[IntervalSet],
) -> Result<Vec<IntervalSet>, OrdEvalError> {
    let saved: Vec<Option<IntervalSet>> = fix
        .vars
        .iter()
        .zip(current.iter())
        .map(|(x, v)| env.insert(x.clone(), v.clone()))
        .collect();
    let mut out = Vec::with_capacity(fix.bodies.len());
    let mut err = None;
    for body in &fix.bodies {
        match eval_rec(body, model, env) {
            Ok(s) => out.push(s),
            Err(e) => {
                err = Some(e);
                break;
            }
        }
    }
    for (x, old) in fix.vars.iter().zip(saved) {
        match old {
            Some(v) => env.insert(x.clone(), v),
            None => env.remove(x),
        };
    }
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Watches a chain of interval-set vectors for an affine tail and
/// extrapolates its limit; detected limits feed a higher-level chain, so
/// limits of limits (stages `w*2`, `w^2`, ...) are found the same way.
struct LimitDetector {
    components: usize,
    levels: Vec<Vec<Vec<IntervalSet>>>,
}

impl LimitDetector {
    fn new(components: usize) -> LimitDetector {
        LimitDetector {
            components,
            levels: vec![Vec::new()],
        }
    }

    /// Feed the next chain value; returns the extrapolated limit and the
    /// level it was detected at, if any.
    fn feed(
        &mut self,
        value: Vec<IntervalSet>,
    ) -> Result<Option<(Vec<IntervalSet>, usize)>, OrdEvalError> {
        self.push(value, 0)
    }

    fn push(
        &mut self,
        value: Vec<IntervalSet>,
        level: usize,
    ) -> Result<Option<(Vec<IntervalSet>, usize)>, OrdEvalError> {
        if level >= MAX_LEVELS {
            return Err(OrdEvalError::LimitUndetected {
                steps: MAX_STEPS,
                level,
            });
        }
        if self.levels.len() == level {
            self.levels.push(Vec::new());
        }
        self.levels[level].push(value);
        let history = &self.levels[level];
        if history.len() < WINDOW {
            return Ok(None);
        }
        let window = &history[history.len() - WINDOW..];
        let Some(limit) = extrapolate(window, self.components) else {
            return Ok(None);
        };
        // The chain jumps: lower levels restart from the limit.
        for l in 0..=level {
            self.levels[l].clear();
        }
        match self.push(limit.clone(), level + 1)? {
            Some(higher) => Ok(Some(higher)),
            None => Ok(Some((limit, level))),
        }
    }
}

/// If all window entries have the same shape and every endpoint advances by
/// a constant left-difference, return the endpointwise limit.
fn extrapolate(window: &[Vec<IntervalSet>], components: usize) -> Option<Vec<IntervalSet>> {
    let omega = Ordinal::omega();
    let first = &window[0];
    // Shape check across the window.
    for entry in window {
        for c in 0..components {
            if entry[c].parts.len() != first[c].parts.len() {
                return None;
            }
            for (a, b) in entry[c].parts.iter().zip(first[c].parts.iter()) {
                if matches!(a.hi, Upper::Top) != matches!(b.hi, Upper::Top) {
                    return None;
                }
            }
        }
    }
    let mut out = Vec::with_capacity(components);
    for c in 0..components {
        let mut parts = Vec::new();
        for i in 0..first[c].parts.len() {
            let lo_seq: Vec<&Ordinal> = window.iter().map(|e| &e[c].parts[i].lo).collect();
            let lo = extrapolate_endpoint(&lo_seq, &omega)?;
            let hi = match &window[0][c].parts[i].hi {
                Upper::Top => Upper::Top,
                Upper::At(_) => {
                    let hi_seq: Vec<&Ordinal> = window
                        .iter()
                        .map(|e| match &e[c].parts[i].hi {
                            Upper::At(h) => h,
                            Upper::Top => unreachable!("shape checked"),
                        })
                        .collect();
                    Upper::At(extrapolate_endpoint(&hi_seq, &omega)?)
                }
            };
            parts.push(Interval { lo, hi });
        }
        out.push(IntervalSet::from_parts(parts));
    }
    // A fully stationary window means the chain is stuck without being a
    // fixpoint, which the caller's equality check already rules out; treat
    // it as no detection to stay safe.
    let all_equal = window.windows(2).all(|w| w[0] == w[1]);
    if all_equal {
        return None;
    }
    Some(out)
}

/// Endpoints must be nondecreasing with one constant step `d`; the limit of
/// `g, g+d, g+d*2, ...` is `g + d*w` (which is `g` itself when `d = 0`).
fn extrapolate_endpoint(seq: &[&Ordinal], omega: &Ordinal) -> Option<Ordinal> {
    let mut delta: Option<Ordinal> = None;
    for pair in seq.windows(2) {
        let step = pair[0].left_subtract(pair[1]).ok()?;
        match &delta {
            None => delta = Some(step),
            Some(d) if *d == step => {}
            Some(_) => return None,
        }
    }
    let d = delta.expect("window has at least two entries");
    if d.is_zero() {
        return Some(seq[seq.len() - 1].clone());
    }
    Some(seq[seq.len() - 1].add(&d.mul(omega)))
}

/// Upper bound on the stabilization point of a formula over ordinal models:
/// the least `a` such that the denotation is constant on `[b + a, top)`
/// whenever the valuation is constant above `b`.
///
/// Recursion: variables cost 0, binary connectives take the maximum, a
/// modality adds 1. A bound-`w` binder contributes `max(theta) + psi * w`
/// where the thetas are the maximal subformulas free of everything the
/// binder can reach and psi ranges over the hollowed bodies. An `inf` binder
/// contributes `max(bodies) * t_max * components`, with `t_max` a caller
/// -supplied cap on truth-value alternations. Finite bounds `m` contribute
/// `max(theta) + psi * m`.
pub fn stabilization_bound(f: &Formula, t_max: u64) -> Result<Ordinal, OrdEvalError> {
    match f {
        Formula::Var(_) | Formula::Top | Formula::Bot => Ok(Ordinal::zero()),
        Formula::Or(l, r) | Formula::And(l, r) => {
            let a = stabilization_bound(l, t_max)?;
            let b = stabilization_bound(r, t_max)?;
            Ok(a.max(b))
        }
        Formula::Diamond(_, b) | Formula::Box(_, b) => {
            Ok(stabilization_bound(b, t_max)?.successor())
        }
        Formula::Fix(fix) => match &fix.bound {
            CountdownBound::Infinity => {
                let mut alpha_max = Ordinal::zero();
                for body in &fix.bodies {
                    alpha_max = alpha_max.max(stabilization_bound(body, t_max)?);
                }
                let factor =
                    Ordinal::from_nat(t_max.max(1)).mul(&Ordinal::from_nat(fix.vars.len() as u64));
                Ok(alpha_max.mul(&factor))
            }
            CountdownBound::Ordinal(o) => {
                let steps = match o.as_nat() {
                    Some(n) => Ordinal::from_nat(n),
                    None if *o == Ordinal::omega() => Ordinal::omega(),
                    None => return Err(OrdEvalError::UnsupportedBound(o.to_string())),
                };
                let (hollowed, thetas) = hollow_bodies(fix);
                let mut alpha_theta = Ordinal::zero();
                for theta in &thetas {
                    alpha_theta = alpha_theta.max(stabilization_bound(theta, t_max)?);
                }
                let mut alpha_psi = Ordinal::zero();
                for body in &hollowed {
                    alpha_psi = alpha_psi.max(stabilization_bound(body, t_max)?);
                }
                Ok(alpha_theta.add(&alpha_psi.mul(&steps)))
            }
        },
    }
}

/// Replace the maximal subformulas of the binder's bodies that mention
/// neither the bound variables nor anything bound inside by fresh variables.
/// Returns the hollowed bodies and the extracted subformulas.
fn hollow_bodies(fix: &Fix) -> (Vec<Formula>, Vec<Formula>) {
    fn walk(f: &Formula, blocked: &mut Vec<String>, thetas: &mut Vec<Formula>) -> Formula {
        let free = f.free_vars();
        if blocked.iter().all(|x| !free.contains(x)) {
            thetas.push(f.clone());
            // The replacement variable costs 0, like any variable.
            return Formula::var("hole");
        }
        match f {
            Formula::Var(_) | Formula::Top | Formula::Bot => f.clone(),
            Formula::Or(l, r) => Formula::or(walk(l, blocked, thetas), walk(r, blocked, thetas)),
            Formula::And(l, r) => Formula::and(walk(l, blocked, thetas), walk(r, blocked, thetas)),
            Formula::Diamond(a, b) => Formula::diamond(a, walk(b, blocked, thetas)),
            Formula::Box(a, b) => Formula::box_(a, walk(b, blocked, thetas)),
            Formula::Fix(inner) => {
                let depth = blocked.len();
                blocked.extend(inner.vars.iter().cloned());
                let bodies = inner
                    .bodies
                    .iter()
                    .map(|b| walk(b, blocked, thetas))
                    .collect();
                blocked.truncate(depth);
                Formula::Fix(Fix {
                    kind: inner.kind,
                    bound: inner.bound.clone(),
                    index: inner.index,
                    vars: inner.vars.clone(),
                    bodies,
                })
            }
        }
    }
    let mut thetas = Vec::new();
    let mut blocked: Vec<String> = fix.vars.clone();
    let hollowed = fix
        .bodies
        .iter()
        .map(|b| walk(b, &mut blocked, &mut thetas))
        .collect();
    (hollowed, thetas)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ord(s: &str) -> Ordinal {
        s.parse().unwrap()
    }

    fn iset(pairs: &[(&str, Option<&str>)]) -> IntervalSet {
        IntervalSet::from_parts(
            pairs
                .iter()
                .map(|(lo, hi)| Interval {
                    lo: ord(lo),
                    hi: match hi {
                        Some(h) => Upper::At(ord(h)),
                        None => Upper::Top,
                    },
                })
                .collect(),
        )
    }

    fn p(s: &str) -> Formula {
        Formula::parse(s).unwrap()
    }

    #[test]
    fn set_algebra() {
        // Adjacent intervals merge.
        assert_eq!(
            iset(&[("0", Some("5"))]).union(&iset(&[("5", None)])),
            iset(&[("0", None)])
        );
        let model = OrdinalModel::unbounded();
        assert_eq!(
            iset(&[("w", None)]).complement(&model),
            iset(&[("0", Some("w"))])
        );
        assert_eq!(
            iset(&[("0", Some("w^2"))]).intersection(&iset(&[("w", None)])),
            iset(&[("w", Some("w^2"))])
        );
        // Empty intersection.
        assert!(iset(&[("0", Some("3"))])
            .intersection(&iset(&[("5", Some("9"))]))
            .is_empty());
    }

    #[test]
    fn modal_ops() {
        let model = OrdinalModel::unbounded();
        assert_eq!(iset(&[("5", None)]).diamond(&model), iset(&[("6", None)]));
        assert_eq!(iset(&[("1", None)]).box_(&model), iset(&[("0", Some("1"))]));
        assert!(IntervalSet::empty().diamond(&model).is_empty());
        let everything = model.everything();
        assert_eq!(everything.box_(&model), everything);
        // box of the empty set holds exactly at 0.
        assert_eq!(IntervalSet::empty().box_(&model), iset(&[("0", Some("1"))]));
    }

    #[test]
    fn modal_ops_match_pointwise_enumeration() {
        // Check diamond/box against the definition on the prefix 0..=10.
        let model = OrdinalModel::unbounded();
        let s = iset(&[("2", Some("4")), ("7", None)]);
        let dia = s.diamond(&model);
        let boxed = s.box_(&model);
        for k in 0..=10u64 {
            let alpha = Ordinal::from_nat(k);
            let dia_expect = (0..k).any(|b| s.contains(&Ordinal::from_nat(b)));
            let box_expect = (0..k).all(|b| s.contains(&Ordinal::from_nat(b)));
            assert_eq!(dia.contains(&alpha), dia_expect, "diamond at {k}");
            assert_eq!(boxed.contains(&alpha), box_expect, "box at {k}");
        }
    }

    #[test]
    fn nested_omega_chain_reaches_omega_squared() {
        let model = OrdinalModel::unbounded();
        let f = p("nu^w x1. nu^w x2. <a> (x1 & x2)");
        let result = eval_ordinal(&f, &model, &BTreeMap::new()).unwrap();
        assert_eq!(result, iset(&[("w^2", None)]));
    }

    #[test]
    fn single_omega_chain() {
        let model = OrdinalModel::unbounded();
        let f = p("nu^w x. <a> x");
        assert_eq!(
            eval_ordinal(&f, &model, &BTreeMap::new()).unwrap(),
            iset(&[("w", None)])
        );
    }

    #[test]
    fn well_founded_box_fills_concrete_heights() {
        let f = p("mu x. [a] x");
        for h in ["w", "w^2", "w^2*2+w*3+4"] {
            let model = OrdinalModel::with_height(ord(h));
            let result = eval_ordinal(&f, &model, &BTreeMap::new()).unwrap();
            assert_eq!(result, model.everything(), "height {h}");
        }
    }

    #[test]
    fn finite_bounds_iterate() {
        let model = OrdinalModel::unbounded();
        assert_eq!(
            eval_ordinal(&p("nu^3 x. <a> x"), &model, &BTreeMap::new()).unwrap(),
            iset(&[("3", None)])
        );
    }

    #[test]
    fn rejects_unsupported() {
        let model = OrdinalModel::unbounded();
        assert!(matches!(
            eval_ordinal(&p("nu^w*2 x. <a> x"), &model, &BTreeMap::new()),
            Err(OrdEvalError::UnsupportedBound(_))
        ));
        assert!(matches!(
            eval_ordinal(&p("<a> tt & [b] tt"), &model, &BTreeMap::new()),
            Err(OrdEvalError::NotMonomodal(_))
        ));
        assert!(matches!(
            eval_ordinal(&p("x"), &model, &BTreeMap::new()),
            Err(OrdEvalError::UnboundVariable(_))
        ));
    }

    #[test]
    fn stabilization_bound_base_cases() {
        assert_eq!(stabilization_bound(&p("x"), 2).unwrap(), ord("0"));
        assert_eq!(stabilization_bound(&p("<a> x"), 2).unwrap(), ord("1"));
        assert_eq!(stabilization_bound(&p("x | [a] x"), 2).unwrap(), ord("1"));
    }

    #[test]
    fn stabilization_bound_nested_omega() {
        // One bounded binder: below w^2; two nested: below w^3.
        let k1 = stabilization_bound(&p("nu^w x. <a> x"), 2).unwrap();
        assert_eq!(k1, ord("w"));
        assert!(k1 < ord("w^2"));
        let k2 = stabilization_bound(&p("nu^w x1. nu^w x2. <a> (x1 & x2)"), 2).unwrap();
        assert_eq!(k2, ord("w^2"));
        assert!(k2 < ord("w^3"));
        let k3 =
            stabilization_bound(&p("nu^w x1. nu^w x2. nu^w x3. <a> (x1 & x2 & x3)"), 2).unwrap();
        assert_eq!(k3, ord("w^3"));
        assert!(k3 < ord("w^4"));
    }

    #[test]
    fn results_stable_above_bound() {
        let model = OrdinalModel::unbounded();
        for src in [
            "nu^w x. <a> x",
            "nu^w x1. nu^w x2. <a> (x1 & x2)",
            "mu^w x. [a] x",
            "nu x. [a] x",
            "mu x. <a> x",
        ] {
            let f = p(src);
            let bound = stabilization_bound(&f, 2).unwrap();
            let result = eval_ordinal(&f, &model, &BTreeMap::new()).unwrap();
            let above = IntervalSet::interval(bound.clone(), Upper::Top);
            let inter = result.intersection(&above);
            assert!(
                inter == above || inter.is_empty(),
                "{src}: {result} not stable above {bound}"
            );
        }
    }

    #[test]
    fn unbounded_classical_chains_give_up_honestly() {
        // Over the symbolic top, these chains close only at uncountable
        // stages; the evaluator must refuse rather than answer.
        let model = OrdinalModel::unbounded();
        for src in ["nu x. <a> x", "mu x. [a] x"] {
            assert!(matches!(
                eval_ordinal(&p(src), &model, &BTreeMap::new()),
                Err(OrdEvalError::LimitUndetected { .. })
            ));
        }
        // At a concrete height the same chains clip and close.
        let capped = OrdinalModel::with_height(ord("w^2"));
        assert!(eval_ordinal(&p("nu x. <a> x"), &capped, &BTreeMap::new())
            .unwrap()
            .is_empty());
    }
}
