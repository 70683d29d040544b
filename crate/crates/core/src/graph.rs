//! Underlying graphs, structure classification, and bottom SCCs.

use std::collections::{BTreeSet, VecDeque};

use num_traits::{Signed, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::error::{Error, Result};
use crate::model::{constraint_classes, AimcModel, Edge, Interval, MarkovChain};
use crate::rational::Rational;

/// A directed graph over named vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Digraph {
    vertices: Vec<String>,
    edges: BTreeSet<Edge>,
    succ: Vec<Vec<usize>>,
}

impl Digraph {
    pub fn new(vertices: Vec<String>, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let n = vertices.len();
        let edges: BTreeSet<Edge> = edges.into_iter().collect();
        let mut succ = vec![Vec::new(); n];
        for e in &edges {
            if e.from >= n || e.to >= n {
                return Err(Error::UnknownVertex(format!("index {} or {}", e.from, e.to)));
            }
            succ[e.from].push(e.to);
        }
        Ok(Digraph {
            vertices,
            edges,
            succ,
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

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.succ[v]
    }

    pub fn vertex(&self, name: &str) -> Result<usize> {
        self.vertices
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    pub fn has_edge(&self, e: Edge) -> bool {
        self.edges.contains(&e)
    }
}

/// The structure (support graph) of a chain.
pub fn structure_of(mc: &MarkovChain) -> Digraph {
    Digraph::new(mc.vertices().to_vec(), mc.support()).expect("chain edges are in range")
}

/// Vertices reachable from `start`. Paths are not continued past `stop`.
pub(crate) fn reach_indices(g: &Digraph, start: usize, stop: Option<usize>) -> Vec<bool> {
    let mut seen = vec![false; g.len()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(v) = queue.pop_front() {
        if Some(v) == stop {
            continue;
        }
        for &u in g.successors(v) {
            if !seen[u] {
                seen[u] = true;
                queue.push_back(u);
            }
        }
    }
    seen
}

/// Vertices from which `target` is reachable.
pub(crate) fn coreach_indices(n: usize, edges: impl IntoIterator<Item = Edge>, target: usize) -> Vec<bool> {
    let mut pred = vec![Vec::new(); n];
    for e in edges {
        pred[e.to].push(e.from);
    }
    let mut seen = vec![false; n];
    seen[target] = true;
    let mut queue = VecDeque::from([target]);
    while let Some(v) = queue.pop_front() {
        for &u in &pred[v] {
            if !seen[u] {
                seen[u] = true;
                queue.push_back(u);
            }
        }
    }
    seen
}

/// Vertices reachable from `s` (including `s`).
pub fn reachable_from(g: &Digraph, s: &str) -> Result<BTreeSet<usize>> {
    let s = g.vertex(s)?;
    Ok(reach_indices(g, s, None)
        .into_iter()
        .enumerate()
        .filter_map(|(v, r)| r.then_some(v))
        .collect())
}

/// Bottom strongly connected components, each sorted, ordered by least
/// member.
pub fn bottom_sccs(g: &Digraph) -> Vec<Vec<usize>> {
    let mut pg = DiGraph::<(), ()>::with_capacity(g.len(), g.edges().len());
    for _ in 0..g.len() {
        pg.add_node(());
    }
    for e in g.edges() {
        pg.add_edge(NodeIndex::new(e.from), NodeIndex::new(e.to), ());
    }
    let sccs = tarjan_scc(&pg);
    let mut comp = vec![0usize; g.len()];
    for (i, scc) in sccs.iter().enumerate() {
        for v in scc {
            comp[v.index()] = i;
        }
    }
    let mut bottom: Vec<Vec<usize>> = sccs
        .iter()
        .enumerate()
        .filter(|(i, scc)| {
            scc.iter()
                .all(|v| g.successors(v.index()).iter().all(|&u| comp[u] == *i))
        })
        .map(|(_, scc)| {
            let mut members: Vec<usize> = scc.iter().map(|v| v.index()).collect();
            members.sort_unstable();
            members
        })
        .collect();
    bottom.sort();
    bottom
}

/// How an interval constrains the presence of its edge across refinements.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeKind {
    /// Only the value 0 is allowed.
    Absent,
    /// Every allowed value is positive.
    Mandatory,
    /// Both 0 and positive values are allowed.
    Optional,
}

pub fn edge_kind(i: &Interval) -> EdgeKind {
    match (i.contains_zero(), i.admits_positive()) {
        (true, true) => EdgeKind::Optional,
        (true, false) => EdgeKind::Absent,
        _ => EdgeKind::Mandatory,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StructureKind {
    Known,
    EpsilonKnown,
    Uncertain,
}

impl StructureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StructureKind::Known => "known",
            StructureKind::EpsilonKnown => "epsilon_known",
            StructureKind::Uncertain => "uncertain",
        }
    }
}

/// Classification of a model's structure. `graph` is present unless the
/// structure is uncertain; `epsilon_struct` only for epsilon-known models;
/// `optional_edges` only for uncertain ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureStatus {
    pub kind: StructureKind,
    pub graph: Option<Digraph>,
    pub epsilon_struct: Option<Rational>,
    pub optional_edges: Option<BTreeSet<Edge>>,
}

/// Classifies edges by their effective (class-intersected) intervals.
///
/// For epsilon-known models `epsilon_struct` is the least lower bound among
/// mandatory edges: every refinement satisfies `delta >= epsilon_struct` on
/// its support.
pub fn structure_status(model: &AimcModel) -> StructureStatus {
    let classes = constraint_classes(model);
    let mut mandatory = BTreeSet::new();
    let mut optional = BTreeSet::new();
    let mut least_lo: Option<Rational> = None;
    let mut open_at_zero = false;
    for (e, raw) in model.transitions() {
        let i = classes
            .effective_interval(model, e)
            .unwrap_or_else(|| raw.clone());
        match edge_kind(&i) {
            EdgeKind::Absent => {}
            EdgeKind::Optional => {
                optional.insert(e);
            }
            EdgeKind::Mandatory => {
                mandatory.insert(e);
                if i.lo.is_zero() {
                    open_at_zero = true;
                } else if i.lo.is_positive() && least_lo.as_ref().map_or(true, |m| i.lo < *m) {
                    least_lo = Some(i.lo.clone());
                }
            }
        }
    }
    if !optional.is_empty() {
        return StructureStatus {
            kind: StructureKind::Uncertain,
            graph: None,
            epsilon_struct: None,
            optional_edges: Some(optional),
        };
    }
    let graph = Digraph::new(model.vertices().to_vec(), mandatory).expect("model edges in range");
    match least_lo {
        Some(eps) if !open_at_zero => StructureStatus {
            kind: StructureKind::EpsilonKnown,
            graph: Some(graph),
            epsilon_struct: Some(eps),
            optional_edges: None,
        },
        _ => StructureStatus {
            kind: StructureKind::Known,
            graph: Some(graph),
            epsilon_struct: None,
            optional_edges: None,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn graph(n: usize, edges: &[(usize, usize)]) -> Digraph {
        Digraph::new(
            (0..n).map(|i| format!("v{i}")).collect(),
            edges.iter().map(|&(a, b)| Edge::new(a, b)),
        )
        .unwrap()
    }

    #[test]
    fn reachability_basics() {
        let g = graph(1, &[]);
        assert_eq!(reachable_from(&g, "v0").unwrap(), BTreeSet::from([0]));
        let g = graph(3, &[(0, 1), (1, 2), (2, 0)]);
        assert_eq!(reachable_from(&g, "v0").unwrap(), BTreeSet::from([0, 1, 2]));
        assert!(matches!(reachable_from(&g, "zz"), Err(Error::UnknownVertex(_))));
    }

    #[test]
    fn bottom_components() {
        // S and F absorbing
        let g = graph(3, &[(0, 1), (0, 2), (1, 1), (2, 2)]);
        assert_eq!(bottom_sccs(&g), vec![vec![1], vec![2]]);
        let g = graph(3, &[(0, 1), (1, 2), (2, 0)]);
        assert_eq!(bottom_sccs(&g), vec![vec![0, 1, 2]]);
        let g = graph(3, &[(0, 1), (1, 2), (2, 2)]);
        assert_eq!(bottom_sccs(&g), vec![vec![2]]);
        // a vertex without successors is its own bottom component
        let g = graph(2, &[(0, 1)]);
        assert_eq!(bottom_sccs(&g), vec![vec![1]]);
    }

    fn model(entries: &[(&str, &str, Interval)]) -> AimcModel {
        let mut names: Vec<&str> = Vec::new();
        for (a, b, _) in entries {
            for v in [a, b] {
                if !names.contains(v) {
                    names.push(v);
                }
            }
        }
        let mut m = AimcModel::new(names).unwrap();
        for (a, b, i) in entries {
            m.add_transition(a, b, i.clone()).unwrap();
        }
        m
    }

    #[test]
    fn fixed_chain_is_epsilon_known_with_min_entry() {
        let m = model(&[
            ("s", "t", Interval::point(ratio(1, 3))),
            ("s", "f", Interval::point(ratio(2, 3))),
            ("t", "t", Interval::point(int(1))),
            ("f", "f", Interval::point(int(1))),
        ]);
        let st = structure_status(&m);
        assert_eq!(st.kind, StructureKind::EpsilonKnown);
        assert_eq!(st.epsilon_struct, Some(ratio(1, 3)));
        assert_eq!(st.graph.unwrap().edges().len(), 4);
    }

    #[test]
    fn open_at_zero_is_known_only() {
        let m = model(&[
            ("s", "t", Interval::new(int(0), true, ratio(1, 2), false).unwrap()),
            ("s", "f", Interval::closed(ratio(1, 2), int(1)).unwrap()),
            ("t", "t", Interval::point(int(1))),
            ("f", "f", Interval::point(int(1))),
        ]);
        let st = structure_status(&m);
        assert_eq!(st.kind, StructureKind::Known);
        assert!(st.epsilon_struct.is_none());
    }

    #[test]
    fn zero_inclusive_interval_is_uncertain() {
        let m = model(&[
            ("s", "t", Interval::closed(int(0), int(1)).unwrap()),
            ("s", "f", Interval::closed(int(0), int(1)).unwrap()),
            ("t", "t", Interval::point(int(1))),
            ("f", "f", Interval::point(int(1))),
        ]);
        let st = structure_status(&m);
        assert_eq!(st.kind, StructureKind::Uncertain);
        assert_eq!(st.optional_edges.unwrap().len(), 2);
        assert!(st.graph.is_none());
    }
}
