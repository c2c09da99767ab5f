//! Finite labeled transition systems, point-set values, valuations, and the
//! generators for the model families used by the test suites.
//!
//! Model file format (JSON):
//!
//! ```json
//! {"points": ["m0", "m1"],
//!  "actions": ["a", "b"],
//!  "edges": [["m1", "a", "m0"]],
//!  "valuation": {"x": ["m0"]}}
//! ```
//!
//! The `valuation` field is optional.

use crate::rng::SplitMix64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use thiserror::Error;

/// A set of points of a fixed model, as a bitset.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PointSet {
    len: usize,
    words: Vec<u64>,
}

impl PointSet {
    pub fn empty(len: usize) -> PointSet {
        PointSet {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn full(len: usize) -> PointSet {
        let mut s = Self::empty(len);
        for i in 0..len {
            s.insert(i);
        }
        s
    }

    pub fn universe_len(&self) -> usize {
        self.len
    }

    pub fn insert(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        self.words[i / 64] &= !(1 << (i % 64));
    }

    pub fn contains(&self, i: usize) -> bool {
        self.words[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        debug_assert_eq!(self.len, other.len);
        PointSet {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a | b)
                .collect(),
        }
    }

    pub fn intersection(&self, other: &PointSet) -> PointSet {
        debug_assert_eq!(self.len, other.len);
        PointSet {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    pub fn complement(&self) -> PointSet {
        let mut out = PointSet {
            len: self.len,
            words: self.words.iter().map(|w| !w).collect(),
        };
        out.clear_tail();
        out
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|i| self.contains(*i))
    }

    fn clear_tail(&mut self) {
        let used = self.len % 64;
        if used != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << used) - 1;
            }
        }
    }
}

/// A finite labeled transition system with named points and actions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lts {
    points: Vec<String>,
    actions: Vec<String>,
    /// edges[action][source] = bitset of targets
    successors: Vec<Vec<PointSet>>,
    num_edges: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("duplicate point name `{0}`")]
    DuplicatePoint(String),
    #[error("duplicate action name `{0}`")]
    DuplicateAction(String),
    #[error("edge endpoint `{0}` is not a declared point")]
    UnknownPoint(String),
    #[error("edge action `{0}` is not a declared action")]
    UnknownAction(String),
    #[error("duplicate edge ({0}, {1}, {2})")]
    DuplicateEdge(String, String, String),
    #[error("valuation for `{var}` names unknown point `{point}`")]
    UnknownValuationPoint { var: String, point: String },
    #[error("lasso loop must be nonempty")]
    EmptyLoop,
    #[error("family size must be at least 1")]
    EmptyFamily,
    #[error("model JSON: {0}")]
    Json(String),
}

impl Lts {
    pub fn new(
        points: Vec<String>,
        actions: Vec<String>,
        edges: &[(String, String, String)],
    ) -> Result<Lts, ModelError> {
        for (i, p) in points.iter().enumerate() {
            if points[..i].contains(p) {
                return Err(ModelError::DuplicatePoint(p.clone()));
            }
        }
        for (i, a) in actions.iter().enumerate() {
            if actions[..i].contains(a) {
                return Err(ModelError::DuplicateAction(a.clone()));
            }
        }
        let mut lts = Lts {
            successors: vec![vec![PointSet::empty(points.len()); points.len()]; actions.len()],
            num_edges: 0,
            points,
            actions,
        };
        for (src, act, dst) in edges {
            let s = lts
                .point_index(src)
                .ok_or_else(|| ModelError::UnknownPoint(src.clone()))?;
            let a = lts
                .action_index(act)
                .ok_or_else(|| ModelError::UnknownAction(act.clone()))?;
            let d = lts
                .point_index(dst)
                .ok_or_else(|| ModelError::UnknownPoint(dst.clone()))?;
            if lts.successors[a][s].contains(d) {
                return Err(ModelError::DuplicateEdge(
                    src.clone(),
                    act.clone(),
                    dst.clone(),
                ));
            }
            lts.successors[a][s].insert(d);
            lts.num_edges += 1;
        }
        Ok(lts)
    }

    pub fn num_points(&self) -> usize {
        self.points.len()
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn point_name(&self, i: usize) -> &str {
        &self.points[i]
    }

    pub fn point_index(&self, name: &str) -> Option<usize> {
        self.points.iter().position(|p| p == name)
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.actions.iter().position(|a| a == name)
    }

    /// Bitset of `action`-successors of `point`.
    pub fn successors(&self, action: usize, point: usize) -> &PointSet {
        &self.successors[action][point]
    }

    pub fn has_edge(&self, src: usize, action: usize, dst: usize) -> bool {
        self.successors[action][src].contains(dst)
    }

    pub fn edges(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.actions.len() {
            for s in 0..self.points.len() {
                for d in self.successors[a][s].iter() {
                    out.push((s, a, d));
                }
            }
        }
        out
    }

    /// Points with at least one `action`-edge into `set`.
    pub fn diamond(&self, action: usize, set: &PointSet) -> PointSet {
        let mut out = PointSet::empty(self.points.len());
        for p in 0..self.points.len() {
            if !self.successors[action][p].intersection(set).is_empty() {
                out.insert(p);
            }
        }
        out
    }

    /// Points all of whose `action`-successors lie in `set`.
    pub fn box_(&self, action: usize, set: &PointSet) -> PointSet {
        let mut out = PointSet::empty(self.points.len());
        for p in 0..self.points.len() {
            if self.successors[action][p].is_subset(set) {
                out.insert(p);
            }
        }
        out
    }

    pub fn to_json(&self, valuation: Option<&Valuation>) -> String {
        let raw = RawModel {
            points: self.points.clone(),
            actions: self.actions.clone(),
            edges: self
                .edges()
                .into_iter()
                .map(|(s, a, d)| {
                    vec![
                        self.points[s].clone(),
                        self.actions[a].clone(),
                        self.points[d].clone(),
                    ]
                })
                .collect(),
            valuation: valuation.map(|v| {
                v.iter()
                    .map(|(var, set)| {
                        (
                            var.clone(),
                            set.iter().map(|i| self.points[i].clone()).collect(),
                        )
                    })
                    .collect()
            }),
        };
        serde_json::to_string_pretty(&raw).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<(Lts, Valuation), ModelError> {
        let raw: RawModel =
            serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))?;
        let mut edges = Vec::new();
        for e in &raw.edges {
            if e.len() != 3 {
                return Err(ModelError::Json(format!(
                    "edge {:?} must be a [source, action, target] triple",
                    e
                )));
            }
            edges.push((e[0].clone(), e[1].clone(), e[2].clone()));
        }
        let lts = Lts::new(raw.points, raw.actions, &edges)?;
        let mut valuation = Valuation::new();
        if let Some(val) = raw.valuation {
            for (var, points) in val {
                let mut set = PointSet::empty(lts.num_points());
                for p in points {
                    let i = lts
                        .point_index(&p)
                        .ok_or(ModelError::UnknownValuationPoint {
                            var: var.clone(),
                            point: p.clone(),
                        })?;
                    set.insert(i);
                }
                valuation.insert(var, set);
            }
        }
        Ok((lts, valuation))
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct RawModel {
    points: Vec<String>,
    actions: Vec<String>,
    edges: Vec<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    valuation: Option<BTreeMap<String, Vec<String>>>,
}

/// Assignment of point sets to variable names.
pub type Valuation = BTreeMap<String, PointSet>;

/// The word `prefix . loop^omega` as a finite model: points `0..k-1`, each
/// with a single outgoing edge labelled by the corresponding letter, the last
/// point closing back on the start of the loop.
pub fn build_lasso(prefix: &str, loop_part: &str) -> Result<Lts, ModelError> {
    if loop_part.is_empty() {
        return Err(ModelError::EmptyLoop);
    }
    let word: Vec<String> = prefix
        .chars()
        .chain(loop_part.chars())
        .map(|c| c.to_string())
        .collect();
    let n = word.len();
    let mut actions: Vec<String> = word.clone();
    actions.sort();
    actions.dedup();
    let points: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    let edges: Vec<(String, String, String)> = (0..n)
        .map(|i| {
            let target = if i + 1 < n {
                i + 1
            } else {
                prefix.chars().count()
            };
            (points[i].clone(), word[i].clone(), target.to_string())
        })
        .collect();
    Lts::new(points, actions, &edges)
}

/// Finite two-row family over actions `a` and `b`: points `m0..m{n-1}` and
/// `n0..n{n-1}`; `a`-edges go strictly down in index, `b`-edges connect all
/// `m`-pairs, and every edge out of an `n`-point targets an `m`-point.
pub fn build_figure1(n: usize) -> Result<Lts, ModelError> {
    if n == 0 {
        return Err(ModelError::EmptyFamily);
    }
    let mut points = Vec::new();
    for i in 0..n {
        points.push(format!("m{i}"));
    }
    for i in 0..n {
        points.push(format!("n{i}"));
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i > j {
                edges.push((format!("m{i}"), "a".to_string(), format!("m{j}")));
                edges.push((format!("n{i}"), "a".to_string(), format!("m{j}")));
                edges.push((format!("n{i}"), "b".to_string(), format!("m{j}")));
            }
            edges.push((format!("m{i}"), "b".to_string(), format!("m{j}")));
        }
    }
    Lts::new(points, vec!["a".to_string(), "b".to_string()], &edges)
}

/// Deterministic random model: each (point, action, point) triple is an edge
/// independently with probability `edge_density`, driven by [`SplitMix64`].
pub fn random_lts(seed: u64, num_points: usize, actions: &[&str], edge_density: f64) -> Lts {
    let mut rng = SplitMix64::new(seed);
    let points: Vec<String> = (0..num_points).map(|i| format!("p{i}")).collect();
    let mut edges = Vec::new();
    for a in actions {
        for s in 0..num_points {
            for d in 0..num_points {
                if rng.unit_f64() < edge_density {
                    edges.push((points[s].clone(), a.to_string(), points[d].clone()));
                }
            }
        }
    }
    Lts::new(
        points,
        actions.iter().map(|a| a.to_string()).collect(),
        &edges,
    )
    .expect("generated model is well formed")
}
