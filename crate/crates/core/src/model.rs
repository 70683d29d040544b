//! Markov chains, interval Markov chains with edge equality constraints,
//! reachability queries, and their JSON form.
//!
//! An IMC is an [`AimcModel`] with no constraints; a Markov chain is an
//! [`AimcModel`] whose intervals are all singletons. Pairs absent from the
//! transition list carry the interval `[0,0]`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_traits::{One, Signed, Zero};
use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// A directed pair of vertex indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
}

impl Edge {
    pub fn new(from: usize, to: usize) -> Self {
        Edge { from, to }
    }
}

/// An interval of rationals with independently strict bounds.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Rational,
    pub lo_strict: bool,
    pub hi: Rational,
    pub hi_strict: bool,
}

impl Interval {
    pub fn new(lo: Rational, lo_strict: bool, hi: Rational, hi_strict: bool) -> Result<Self> {
        if lo > hi {
            return Err(Error::Interval(format!(
                "lower bound {} exceeds upper bound {}",
                rational::format(&lo),
                rational::format(&hi)
            )));
        }
        if lo == hi && (lo_strict || hi_strict) {
            return Err(Error::Interval(format!(
                "degenerate interval at {} cannot have a strict bound",
                rational::format(&lo)
            )));
        }
        Ok(Interval {
            lo,
            lo_strict,
            hi,
            hi_strict,
        })
    }

    pub fn closed(lo: Rational, hi: Rational) -> Result<Self> {
        Self::new(lo, false, hi, false)
    }

    pub fn point(p: Rational) -> Self {
        Interval {
            lo: p.clone(),
            lo_strict: false,
            hi: p,
            hi_strict: false,
        }
    }

    pub fn zero() -> Self {
        Self::point(Rational::zero())
    }

    pub fn contains(&self, q: &Rational) -> bool {
        let above = if self.lo_strict { *q > self.lo } else { *q >= self.lo };
        let below = if self.hi_strict { *q < self.hi } else { *q <= self.hi };
        above && below
    }

    /// The single member, if the interval is a singleton.
    pub fn as_point(&self) -> Option<&Rational> {
        (self.lo == self.hi).then_some(&self.lo)
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(&Rational::zero())
    }

    /// Whether some strictly positive rational lies in the interval.
    pub fn admits_positive(&self) -> bool {
        self.hi.is_positive()
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn within_unit(&self) -> bool {
        !self.lo.is_negative() && self.hi <= Rational::one()
    }

    /// Intersection; `None` when empty.
    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let (lo, lo_strict) = match self.lo.cmp(&other.lo) {
            std::cmp::Ordering::Greater => (self.lo.clone(), self.lo_strict),
            std::cmp::Ordering::Less => (other.lo.clone(), other.lo_strict),
            std::cmp::Ordering::Equal => (self.lo.clone(), self.lo_strict || other.lo_strict),
        };
        let (hi, hi_strict) = match self.hi.cmp(&other.hi) {
            std::cmp::Ordering::Less => (self.hi.clone(), self.hi_strict),
            std::cmp::Ordering::Greater => (other.hi.clone(), other.hi_strict),
            std::cmp::Ordering::Equal => (self.hi.clone(), self.hi_strict || other.hi_strict),
        };
        Interval::new(lo, lo_strict, hi, hi_strict).ok()
    }

    /// The interval `{1 - q : q in self}`.
    pub fn complement(&self) -> Interval {
        let one = Rational::one();
        Interval {
            lo: &one - &self.hi,
            lo_strict: self.hi_strict,
            hi: &one - &self.lo,
            hi_strict: self.lo_strict,
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_strict { '(' } else { '[' },
            rational::format(&self.lo),
            rational::format(&self.hi),
            if self.hi_strict { ')' } else { ']' }
        )
    }
}

fn index_vertices(vertices: &[String]) -> Result<HashMap<String, usize>> {
    let mut index = HashMap::with_capacity(vertices.len());
    for (i, v) in vertices.iter().enumerate() {
        if index.insert(v.clone(), i).is_some() {
            return Err(Error::DuplicateVertex(v.clone()));
        }
    }
    Ok(index)
}

/// An augmented interval Markov chain: vertices, interval-valued
/// transitions, and edge equality constraints.
#[derive(Clone, Debug, PartialEq)]
pub struct AimcModel {
    vertices: Vec<String>,
    index: HashMap<String, usize>,
    transitions: BTreeMap<Edge, Interval>,
    constraints: Vec<(Edge, Edge)>,
}

impl AimcModel {
    pub fn new<S: Into<String>>(vertices: impl IntoIterator<Item = S>) -> Result<Self> {
        let vertices: Vec<String> = vertices.into_iter().map(Into::into).collect();
        let index = index_vertices(&vertices)?;
        Ok(AimcModel {
            vertices,
            index,
            transitions: BTreeMap::new(),
            constraints: Vec::new(),
        })
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    pub fn name(&self, v: usize) -> &str {
        &self.vertices[v]
    }

    pub fn edge(&self, from: &str, to: &str) -> Result<Edge> {
        Ok(Edge::new(self.vertex(from)?, self.vertex(to)?))
    }

    pub fn edge_names(&self, e: Edge) -> (&str, &str) {
        (self.name(e.from), self.name(e.to))
    }

    /// Declares a transition; redeclaring the same pair is an error.
    pub fn add_transition(&mut self, from: &str, to: &str, interval: Interval) -> Result<Edge> {
        let e = self.edge(from, to)?;
        if self.transitions.contains_key(&e) {
            return Err(Error::DuplicateTransition(from.into(), to.into()));
        }
        self.transitions.insert(e, interval);
        Ok(e)
    }

    /// Ties two declared transitions to equal probability.
    pub fn add_constraint(&mut self, a: (&str, &str), b: (&str, &str)) -> Result<()> {
        let declared = |(f, t): (&str, &str)| -> Result<Edge> {
            let e = self
                .edge(f, t)
                .map_err(|_| Error::UnknownConstraintEdge(f.into(), t.into()))?;
            if !self.transitions.contains_key(&e) {
                return Err(Error::UnknownConstraintEdge(f.into(), t.into()));
            }
            Ok(e)
        };
        let ea = declared(a)?;
        let eb = declared(b)?;
        self.constraints.push((ea, eb));
        Ok(())
    }

    /// The interval on a pair; undeclared pairs are `[0,0]`.
    pub fn interval(&self, e: Edge) -> Interval {
        self.transitions.get(&e).cloned().unwrap_or_else(Interval::zero)
    }

    pub fn transitions(&self) -> impl Iterator<Item = (Edge, &Interval)> {
        self.transitions.iter().map(|(e, i)| (*e, i))
    }

    /// Declared transitions leaving `u`, in target order.
    pub fn row(&self, u: usize) -> impl Iterator<Item = (Edge, &Interval)> {
        self.transitions
            .range(Edge::new(u, 0)..Edge::new(u + 1, 0))
            .map(|(e, i)| (*e, i))
    }

    pub fn constraints(&self) -> &[(Edge, Edge)] {
        &self.constraints
    }

    /// True when every interval is a singleton and every constraint holds.
    pub fn is_fully_determined(&self) -> bool {
        self.transitions.values().all(|i| i.as_point().is_some())
            && self
                .constraints
                .iter()
                .all(|(a, b)| self.interval(*a) == self.interval(*b))
    }

    /// The unique refinement of a fully determined model.
    pub fn determined_chain(&self) -> Result<MarkovChain> {
        if !self.is_fully_determined() {
            return Err(Error::NotDetermined);
        }
        MarkovChain::new(
            self.vertices.clone(),
            self.transitions
                .iter()
                .map(|(e, i)| (*e, i.lo.clone())),
        )
    }
}

/// A discrete-time Markov chain with exact rational probabilities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkovChain {
    vertices: Vec<String>,
    index: HashMap<String, usize>,
    delta: BTreeMap<Edge, Rational>,
}

impl MarkovChain {
    /// Builds a chain, dropping zero entries and checking every row sums to 1.
    pub fn new(
        vertices: Vec<String>,
        entries: impl IntoIterator<Item = (Edge, Rational)>,
    ) -> Result<Self> {
        let index = index_vertices(&vertices)?;
        let n = vertices.len();
        let mut delta = BTreeMap::new();
        for (e, p) in entries {
            if e.from >= n || e.to >= n {
                return Err(Error::Chain(format!("edge {e:?} out of range")));
            }
            if p.is_negative() || p > Rational::one() {
                return Err(Error::Chain(format!(
                    "probability {} on {} -> {} outside [0,1]",
                    rational::format(&p),
                    vertices[e.from],
                    vertices[e.to]
                )));
            }
            if !p.is_zero() && delta.insert(e, p).is_some() {
                return Err(Error::Chain(format!(
                    "duplicate entry {} -> {}",
                    vertices[e.from], vertices[e.to]
                )));
            }
        }
        let mut sums = vec![Rational::zero(); n];
        for (e, p) in &delta {
            sums[e.from] += p;
        }
        for (v, s) in sums.iter().enumerate() {
            if !s.is_one() {
                return Err(Error::Chain(format!(
                    "row {} sums to {}",
                    vertices[v],
                    rational::format(s)
                )));
            }
        }
        Ok(MarkovChain {
            vertices,
            index,
            delta,
        })
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    pub fn prob(&self, e: Edge) -> Rational {
        self.delta.get(&e).cloned().unwrap_or_else(Rational::zero)
    }

    /// Nonzero entries leaving `u`.
    pub fn row(&self, u: usize) -> impl Iterator<Item = (Edge, &Rational)> {
        self.delta
            .range(Edge::new(u, 0)..Edge::new(u + 1, 0))
            .map(|(e, p)| (*e, p))
    }

    pub fn entries(&self) -> impl Iterator<Item = (Edge, &Rational)> {
        self.delta.iter().map(|(e, p)| (*e, p))
    }

    pub fn support(&self) -> BTreeSet<Edge> {
        self.delta.keys().copied().collect()
    }

    /// The fully determined model whose only refinement is this chain.
    pub fn to_model(&self) -> AimcModel {
        AimcModel {
            vertices: self.vertices.clone(),
            index: self.index.clone(),
            transitions: self
                .delta
                .iter()
                .map(|(e, p)| (*e, Interval::point(p.clone())))
                .collect(),
            constraints: Vec::new(),
        }
    }
}

/// Threshold relation of a reachability query.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Le,
    Ge,
}

impl Relation {
    pub fn holds(self, value: &Rational, threshold: &Rational) -> bool {
        match self {
            Relation::Le => value <= threshold,
            Relation::Ge => value >= threshold,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Le => "le",
            Relation::Ge => "ge",
        }
    }
}

impl std::str::FromStr for Relation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "le" => Ok(Relation::Le),
            "ge" => Ok(Relation::Ge),
            other => Err(Error::Query(format!("relation must be le or ge, got {other:?}"))),
        }
    }
}

/// Does some refinement reach `target` from `source` with probability
/// `relation threshold`? The optional promise gap turns it into the
/// approximate problem.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub source: String,
    pub target: String,
    pub relation: Relation,
    pub threshold: Rational,
    pub promise_gap: Option<Rational>,
}

impl Query {
    pub fn new(
        source: impl Into<String>,
        target: impl Into<String>,
        relation: Relation,
        threshold: Rational,
        promise_gap: Option<Rational>,
    ) -> Result<Self> {
        if threshold.is_negative() || threshold > Rational::one() {
            return Err(Error::Query(format!(
                "threshold {} outside [0,1]",
                rational::format(&threshold)
            )));
        }
        if let Some(g) = &promise_gap {
            if !g.is_positive() {
                return Err(Error::Query("epsilon must be positive".into()));
            }
        }
        Ok(Query {
            source: source.into(),
            target: target.into(),
            relation,
            threshold,
            promise_gap,
        })
    }
}

// ---------------------------------------------------------------------------
// JSON

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionEntry {
    from: String,
    to: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lo: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hi: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lo_strict: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hi_strict: Option<bool>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QueryEntry {
    source: String,
    target: String,
    relation: Relation,
    threshold: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    epsilon: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    vertices: Vec<String>,
    #[serde(default)]
    transitions: Vec<TransitionEntry>,
    #[serde(default)]
    constraints: Vec<[[String; 2]; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    query: Option<QueryEntry>,
}

fn entry_interval(t: &TransitionEntry) -> Result<Interval> {
    let bad = |reason: &str| Error::Transition {
        from: t.from.clone(),
        to: t.to.clone(),
        reason: reason.to_string(),
    };
    match (&t.p, &t.lo, &t.hi) {
        (Some(p), None, None) => {
            if t.lo_strict.unwrap_or(false) || t.hi_strict.unwrap_or(false) {
                return Err(bad("a point transition cannot have strict bounds"));
            }
            Ok(Interval::point(rational::parse(p)?))
        }
        (None, Some(lo), Some(hi)) => Interval::new(
            rational::parse(lo)?,
            t.lo_strict.unwrap_or(false),
            rational::parse(hi)?,
            t.hi_strict.unwrap_or(false),
        ),
        _ => Err(bad("expected either \"p\" or both \"lo\" and \"hi\"")),
    }
}

/// Parses a model document, returning the model and its query if present.
pub fn parse_document(text: &str) -> Result<(AimcModel, Option<Query>)> {
    let file: ModelFile = serde_json::from_str(text)?;
    let mut model = AimcModel::new(file.vertices)?;
    for t in &file.transitions {
        let interval = entry_interval(t)?;
        model.add_transition(&t.from, &t.to, interval)?;
    }
    for [[a, b], [c, d]] in &file.constraints {
        model.add_constraint((a, b), (c, d))?;
    }
    let query = match file.query {
        None => None,
        Some(q) => {
            model.vertex(&q.source)?;
            model.vertex(&q.target)?;
            Some(Query::new(
                q.source,
                q.target,
                q.relation,
                rational::parse(&q.threshold)?,
                q.epsilon.as_deref().map(rational::parse).transpose()?,
            )?)
        }
    };
    Ok((model, query))
}

pub fn parse_model(text: &str) -> Result<AimcModel> {
    parse_document(text).map(|(m, _)| m)
}

fn to_file(model: &AimcModel, query: Option<&Query>) -> ModelFile {
    let transitions = model
        .transitions()
        .map(|(e, i)| {
            let (from, to) = model.edge_names(e);
            let (from, to) = (from.to_string(), to.to_string());
            match i.as_point() {
                Some(p) => TransitionEntry {
                    from,
                    to,
                    p: Some(rational::format(p)),
                    lo: None,
                    hi: None,
                    lo_strict: None,
                    hi_strict: None,
                },
                None => TransitionEntry {
                    from,
                    to,
                    p: None,
                    lo: Some(rational::format(&i.lo)),
                    hi: Some(rational::format(&i.hi)),
                    lo_strict: Some(i.lo_strict),
                    hi_strict: Some(i.hi_strict),
                },
            }
        })
        .collect();
    let pair = |e: Edge| {
        let (a, b) = model.edge_names(e);
        [a.to_string(), b.to_string()]
    };
    ModelFile {
        vertices: model.vertices.clone(),
        transitions,
        constraints: model
            .constraints
            .iter()
            .map(|(a, b)| [pair(*a), pair(*b)])
            .collect(),
        query: query.map(|q| QueryEntry {
            source: q.source.clone(),
            target: q.target.clone(),
            relation: q.relation,
            threshold: rational::format(&q.threshold),
            epsilon: q.promise_gap.as_ref().map(rational::format),
        }),
    }
}

/// Serializes a model (and optional query) in the document format.
pub fn to_json(model: &AimcModel, query: Option<&Query>) -> String {
    serde_json::to_string_pretty(&to_file(model, query)).expect("model serializes")
}

pub fn to_json_value(model: &AimcModel, query: Option<&Query>) -> serde_json::Value {
    serde_json::to_value(to_file(model, query)).expect("model serializes")
}

// ---------------------------------------------------------------------------
// Constraint classes

/// One equivalence class of tied edges and the intersection of their
/// intervals (`None` when empty).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintClass {
    pub members: Vec<Edge>,
    pub interval: Option<Interval>,
}

impl ConstraintClass {
    /// The forced value when the class interval is a singleton.
    pub fn point(&self) -> Option<&Rational> {
        self.interval.as_ref().and_then(Interval::as_point)
    }

    /// A class with a nonempty, non-singleton interval carries a genuine
    /// degree of freedom.
    pub fn is_free(&self) -> bool {
        matches!(&self.interval, Some(i) if i.as_point().is_none())
    }

    pub fn interval(&self) -> Result<&Interval> {
        self.interval
            .as_ref()
            .ok_or_else(|| Error::InvalidModel("empty constraint class interval".into()))
    }
}

/// How a single transition probability is determined.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EdgeValue {
    Fixed(Rational),
    Class(usize),
}

/// Partition of the interval-valued and constrained edges into classes
/// closed under the equality constraints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintClasses {
    classes: Vec<ConstraintClass>,
    class_of: BTreeMap<Edge, usize>,
}

impl ConstraintClasses {
    pub fn classes(&self) -> &[ConstraintClass] {
        &self.classes
    }

    pub fn get(&self, c: usize) -> &ConstraintClass {
        &self.classes[c]
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn class_of(&self, e: Edge) -> Option<usize> {
        self.class_of.get(&e).copied()
    }

    /// Indices of classes with a genuine degree of freedom.
    pub fn free_classes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.classes.len()).filter(|&c| self.classes[c].is_free())
    }

    /// The interval governing `e`: its class interval when classed.
    pub fn effective_interval(&self, model: &AimcModel, e: Edge) -> Option<Interval> {
        match self.class_of(e) {
            Some(c) => self.classes[c].interval.clone(),
            None => Some(model.interval(e)),
        }
    }

    /// Fixed probability, or the free class it belongs to.
    pub fn value(&self, model: &AimcModel, e: Edge) -> EdgeValue {
        match self.class_of(e) {
            Some(c) => match self.classes[c].point() {
                Some(p) => EdgeValue::Fixed(p.clone()),
                None => EdgeValue::Class(c),
            },
            None => EdgeValue::Fixed(model.interval(e).lo),
        }
    }
}

/// Union-find closure of the constraints over every interval-valued or
/// constrained edge. Classes are ordered by their least member.
pub fn constraint_classes(model: &AimcModel) -> ConstraintClasses {
    let mut keyed: BTreeSet<Edge> = model
        .transitions()
        .filter(|(_, i)| i.as_point().is_none())
        .map(|(e, _)| e)
        .collect();
    for (a, b) in model.constraints() {
        keyed.insert(*a);
        keyed.insert(*b);
    }
    let edges: Vec<Edge> = keyed.into_iter().collect();
    let pos: HashMap<Edge, usize> = edges.iter().enumerate().map(|(i, e)| (*e, i)).collect();
    let mut uf = UnionFind::<usize>::new(edges.len());
    for (a, b) in model.constraints() {
        uf.union(pos[a], pos[b]);
    }
    // Edges are visited in order, so the first member seen is the least.
    let mut root_class: HashMap<usize, usize> = HashMap::new();
    let mut members: Vec<Vec<Edge>> = Vec::new();
    let mut class_of = BTreeMap::new();
    for (i, e) in edges.iter().enumerate() {
        let c = *root_class.entry(uf.find(i)).or_insert_with(|| {
            members.push(Vec::new());
            members.len() - 1
        });
        members[c].push(*e);
        class_of.insert(*e, c);
    }
    let classes = members
        .into_iter()
        .map(|members| {
            let mut it = members.iter().map(|e| model.interval(*e));
            let first = it.next().expect("classes are nonempty");
            let interval = it.try_fold(first, |acc, i| acc.intersect(&i));
            ConstraintClass { members, interval }
        })
        .collect();
    ConstraintClasses { classes, class_of }
}

// ---------------------------------------------------------------------------
// Validation

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    IntervalOutOfRange,
    EmptyClassInterval,
    RowCannotSumToOne,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
}

/// Whether some choice of values from `intervals` sums to exactly 1.
pub(crate) fn row_admits_unit_sum<'a>(intervals: impl IntoIterator<Item = &'a Interval>) -> bool {
    let mut lo = Rational::zero();
    let mut hi = Rational::zero();
    let (mut lo_strict, mut hi_strict) = (false, false);
    for i in intervals {
        lo += &i.lo;
        hi += &i.hi;
        lo_strict |= i.lo_strict;
        hi_strict |= i.hi_strict;
    }
    let one = Rational::one();
    let lo_ok = if lo_strict { lo < one } else { lo <= one };
    let hi_ok = if hi_strict { hi > one } else { hi >= one };
    lo_ok && hi_ok
}

/// Checks the definitional invariants; an empty result means the model
/// has at least one refinement row per vertex and consistent classes.
pub fn validate(model: &AimcModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (e, i) in model.transitions() {
        if !i.within_unit() {
            let (a, b) = model.edge_names(e);
            out.push(Diagnostic {
                kind: DiagnosticKind::IntervalOutOfRange,
                message: format!("interval {i} on {a} -> {b} not within [0,1]"),
            });
        }
    }
    let classes = constraint_classes(model);
    for class in classes.classes() {
        if class.interval.is_none() {
            let names: Vec<String> = class
                .members
                .iter()
                .map(|e| {
                    let (a, b) = model.edge_names(*e);
                    format!("{a} -> {b}")
                })
                .collect();
            out.push(Diagnostic {
                kind: DiagnosticKind::EmptyClassInterval,
                message: format!("empty constraint class interval for {{{}}}", names.join(", ")),
            });
        }
    }
    for u in 0..model.len() {
        let intervals: Vec<Interval> = model
            .row(u)
            .map(|(e, raw)| {
                classes
                    .effective_interval(model, e)
                    .unwrap_or_else(|| raw.clone())
            })
            .collect();
        if !row_admits_unit_sum(&intervals) {
            out.push(Diagnostic {
                kind: DiagnosticKind::RowCannotSumToOne,
                message: format!("row cannot sum to 1 at vertex {}", model.name(u)),
            });
        }
    }
    out
}

/// Does `mc` refine `model`? Vertex sets must agree as sets.
pub fn refines(mc: &MarkovChain, model: &AimcModel) -> Result<bool> {
    if mc.len() != model.len() {
        return Err(Error::VertexMismatch);
    }
    let map: Vec<usize> = mc
        .vertices()
        .iter()
        .map(|v| model.vertex(v).map_err(|_| Error::VertexMismatch))
        .collect::<Result<_>>()?;
    let to_model = |e: Edge| Edge::new(map[e.from], map[e.to]);
    let mut values: BTreeMap<Edge, Rational> = BTreeMap::new();
    for (e, p) in mc.entries() {
        values.insert(to_model(e), p.clone());
    }
    let value = |e: &Edge| values.get(e).cloned().unwrap_or_else(Rational::zero);
    for (e, p) in &values {
        if !model.interval(*e).contains(p) {
            return Ok(false);
        }
    }
    for (e, i) in model.transitions() {
        if !values.contains_key(&e) && !i.contains_zero() {
            return Ok(false);
        }
    }
    Ok(model
        .constraints()
        .iter()
        .all(|(a, b)| value(a) == value(b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn closed(lo: Rational, hi: Rational) -> Interval {
        Interval::closed(lo, hi).unwrap()
    }

    #[test]
    fn parses_minimal_model() {
        let text = r#"{"vertices":["s","t"],
            "transitions":[{"from":"s","to":"t","p":"1"},{"from":"t","to":"t","p":"1"}]}"#;
        let m = parse_model(text).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.interval(m.edge("s", "t").unwrap()), Interval::point(int(1)));
        assert_eq!(m.interval(m.edge("t", "s").unwrap()), Interval::zero());
        assert!(m.is_fully_determined());
    }

    #[test]
    fn parses_half_open_interval() {
        let text = r#"{"vertices":["u","v"],"transitions":[
            {"from":"u","to":"v","lo":"1/3","hi":"2/3","lo_strict":false,"hi_strict":true}]}"#;
        let m = parse_model(text).unwrap();
        let i = m.interval(m.edge("u", "v").unwrap());
        assert_eq!(i.to_string(), "[1/3, 2/3)");
        assert!(i.contains(&ratio(1, 3)));
        assert!(!i.contains(&ratio(2, 3)));
    }

    #[test]
    fn rejects_constraint_on_undeclared_edge() {
        let text = r#"{"vertices":["u","v","x","y"],
            "transitions":[{"from":"u","to":"v","lo":"0","hi":"1"}],
            "constraints":[[["u","v"],["x","y"]]]}"#;
        let e = parse_model(text).unwrap_err();
        assert!(e.to_string().contains("unknown edge in constraint"), "{e}");
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_model("{"), Err(Error::Json(_))));
        let unknown = r#"{"vertices":["a"],"transitions":[{"from":"a","to":"b","p":"1"}]}"#;
        assert!(matches!(parse_model(unknown), Err(Error::UnknownVertex(_))));
        let inverted = r#"{"vertices":["a"],"transitions":[{"from":"a","to":"a","lo":"1","hi":"1/2"}]}"#;
        assert!(matches!(parse_model(inverted), Err(Error::Interval(_))));
        let decimal = r#"{"vertices":["a"],"transitions":[{"from":"a","to":"a","p":"1.0"}]}"#;
        assert!(matches!(parse_model(decimal), Err(Error::Rational { .. })));
        let dup = r#"{"vertices":["a","a"]}"#;
        assert!(matches!(parse_model(dup), Err(Error::DuplicateVertex(_))));
    }

    #[test]
    fn document_query_round_trip() {
        let text = r#"{"vertices":["s","t"],
            "transitions":[{"from":"s","to":"t","p":"1"},{"from":"t","to":"t","p":"1"}],
            "query":{"source":"s","target":"t","relation":"ge","threshold":"1/2","epsilon":"1/10"}}"#;
        let (m, q) = parse_document(text).unwrap();
        let q = q.unwrap();
        assert_eq!(q.relation, Relation::Ge);
        assert_eq!(q.promise_gap, Some(ratio(1, 10)));
        let (m2, q2) = parse_document(&to_json(&m, Some(&q))).unwrap();
        assert_eq!(m, m2);
        assert_eq!(Some(q), q2);
    }

    #[test]
    fn validate_accepts_exact_half_split() {
        let mut m = AimcModel::new(["a", "b"]).unwrap();
        m.add_transition("a", "a", Interval::point(ratio(1, 2))).unwrap();
        m.add_transition("a", "b", Interval::point(ratio(1, 2))).unwrap();
        m.add_transition("b", "b", Interval::point(int(1))).unwrap();
        assert!(validate(&m).is_empty());
    }

    #[test]
    fn validate_flags_short_row() {
        let mut m = AimcModel::new(["a", "b"]).unwrap();
        m.add_transition("a", "b", closed(int(0), ratio(1, 3))).unwrap();
        m.add_transition("b", "b", Interval::point(int(1))).unwrap();
        let d = validate(&m);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].kind, DiagnosticKind::RowCannotSumToOne);
        assert!(d[0].message.contains("row cannot sum to 1"));
    }

    #[test]
    fn validate_flags_empty_class() {
        let mut m = AimcModel::new(["a", "b", "c"]).unwrap();
        m.add_transition("a", "b", closed(int(0), ratio(1, 4))).unwrap();
        m.add_transition("a", "c", closed(int(0), int(1))).unwrap();
        m.add_transition("b", "c", closed(ratio(1, 2), int(1))).unwrap();
        m.add_transition("b", "b", closed(int(0), int(1))).unwrap();
        m.add_transition("c", "c", Interval::point(int(1))).unwrap();
        m.add_constraint(("a", "b"), ("b", "c")).unwrap();
        let d = validate(&m);
        assert!(d
            .iter()
            .any(|d| d.kind == DiagnosticKind::EmptyClassInterval
                && d.message.contains("empty constraint class interval")));
    }

    #[test]
    fn validate_honours_strict_row_bounds() {
        let mut m = AimcModel::new(["a"]).unwrap();
        m.add_transition("a", "a", Interval::new(int(0), false, int(1), true).unwrap())
            .unwrap();
        assert_eq!(validate(&m).len(), 1);
        let mut m = AimcModel::new(["a"]).unwrap();
        m.add_transition("a", "a", Interval::new(int(0), true, int(1), false).unwrap())
            .unwrap();
        assert!(validate(&m).is_empty());
    }

    #[test]
    fn validate_flags_out_of_range() {
        let mut m = AimcModel::new(["a"]).unwrap();
        m.add_transition("a", "a", closed(int(1), int(2))).unwrap();
        assert!(validate(&m)
            .iter()
            .any(|d| d.kind == DiagnosticKind::IntervalOutOfRange));
    }

    #[test]
    fn classes_close_transitively() {
        let mut m = AimcModel::new(["a", "b", "c", "d"]).unwrap();
        let full = closed(int(0), int(1));
        m.add_transition("a", "b", full.clone()).unwrap();
        m.add_transition("b", "c", full.clone()).unwrap();
        m.add_transition("c", "d", full.clone()).unwrap();
        let cc = constraint_classes(&m);
        assert_eq!(cc.len(), 3);
        m.add_constraint(("a", "b"), ("b", "c")).unwrap();
        m.add_constraint(("b", "c"), ("c", "d")).unwrap();
        let cc = constraint_classes(&m);
        assert_eq!(cc.len(), 1);
        assert_eq!(cc.get(0).members.len(), 3);
    }

    #[test]
    fn refinement_checks_intervals_and_constraints() {
        let mut m = AimcModel::new(["a", "b", "c"]).unwrap();
        let half = closed(ratio(1, 4), ratio(3, 4));
        m.add_transition("a", "b", half.clone()).unwrap();
        m.add_transition("a", "c", half.clone()).unwrap();
        m.add_transition("b", "b", half.clone()).unwrap();
        m.add_transition("b", "c", half).unwrap();
        m.add_transition("c", "c", Interval::point(int(1))).unwrap();
        m.add_constraint(("a", "b"), ("b", "b")).unwrap();
        let names: Vec<String> = m.vertices().to_vec();
        let chain = |x: Rational, y: Rational| {
            MarkovChain::new(
                names.clone(),
                vec![
                    (Edge::new(0, 1), x.clone()),
                    (Edge::new(0, 2), int(1) - x),
                    (Edge::new(1, 1), y.clone()),
                    (Edge::new(1, 2), int(1) - y),
                    (Edge::new(2, 2), int(1)),
                ],
            )
            .unwrap()
        };
        assert!(refines(&chain(ratio(1, 2), ratio(1, 2)), &m).unwrap());
        let off = ratio(1, 2) + ratio(1, 1000);
        assert!(!refines(&chain(ratio(1, 2), off), &m).unwrap());
        assert!(!refines(&chain(ratio(1, 5), ratio(1, 5)), &m).unwrap());
        let other = MarkovChain::new(vec!["z".into()], vec![(Edge::new(0, 0), int(1))]).unwrap();
        assert!(matches!(refines(&other, &m), Err(Error::VertexMismatch)));
    }

    #[test]
    fn determined_model_refined_by_its_chain() {
        let mut m = AimcModel::new(["s", "t"]).unwrap();
        m.add_transition("s", "t", Interval::point(int(1))).unwrap();
        m.add_transition("t", "t", Interval::point(int(1))).unwrap();
        let c = m.determined_chain().unwrap();
        assert!(refines(&c, &m).unwrap());
    }

    #[test]
    fn chain_rejects_bad_rows() {
        let r = MarkovChain::new(vec!["a".into()], vec![(Edge::new(0, 0), ratio(1, 2))]);
        assert!(matches!(r, Err(Error::Chain(_))));
    }

    #[test]
    fn interval_algebra() {
        let a = Interval::new(ratio(1, 4), true, ratio(3, 4), false).unwrap();
        let b = closed(ratio(1, 2), int(1));
        let i = a.intersect(&b).unwrap();
        assert_eq!(i.to_string(), "[1/2, 3/4]");
        assert!(closed(int(0), ratio(1, 4)).intersect(&b).is_none());
        let touching = Interval::new(int(0), false, ratio(1, 2), true).unwrap();
        assert!(touching.intersect(&b).is_none());
        assert_eq!(a.complement().to_string(), "[1/4, 3/4)");
        assert!(Interval::new(int(1), true, int(1), false).is_err());
    }

    #[test]
    fn query_bounds() {
        assert!(Query::new("s", "t", Relation::Ge, ratio(3, 2), None).is_err());
        assert!(Query::new("s", "t", Relation::Ge, ratio(1, 2), Some(int(0))).is_err());
        assert!("lt".parse::<Relation>().is_err());
    }
}
