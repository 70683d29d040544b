//! Qualitative reachability (threshold 0 or 1).
//!
//! With a known structure the answer is a graph property. Otherwise the
//! search enumerates structures row by row from the source, checks the
//! graph criterion on each complete candidate, and confirms it with an
//! exact slack-maximizing LP.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::graph::{bottom_sccs, coreach_indices, edge_kind, reach_indices, structure_of, Digraph, EdgeKind};
use crate::lp::{LinearProgram, LpOutcome, Sense};
use crate::model::{
    constraint_classes, row_admits_unit_sum, AimcModel, ConstraintClasses, Edge, EdgeValue, Interval, MarkovChain,
    Query, Relation,
};
use crate::rational::{self, Rational};

/// Graph verdicts valid for every chain with structure `g`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QualVerdict {
    pub prob_one: bool,
    pub prob_zero: bool,
}

/// `prob_one`: no path from `s` that avoids `t` ends in a bottom SCC
/// without `t`. `prob_zero`: no path from `s` to `t`.
pub fn qual_known(g: &Digraph, s: &str, t: &str) -> Result<QualVerdict> {
    let s = g.vertex(s)?;
    let t = g.vertex(t)?;
    Ok(qual_known_idx(g, s, t))
}

fn qual_known_idx(g: &Digraph, s: usize, t: usize) -> QualVerdict {
    if s == t {
        return QualVerdict {
            prob_one: true,
            prob_zero: false,
        };
    }
    // Paths that avoid t: cut t's outgoing edges, making {t} a bottom SCC.
    let cut = Digraph::new(
        g.vertices().to_vec(),
        g.edges().iter().copied().filter(|e| e.from != t),
    )
    .expect("subgraph of a valid graph");
    let reached = reach_indices(&cut, s, None);
    let prob_one = bottom_sccs(&cut)
        .iter()
        .filter(|scc| reached[scc[0]])
        .all(|scc| scc.contains(&t));
    QualVerdict {
        prob_one,
        prob_zero: !reached[t],
    }
}

/// Per-class decision during structure enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum ClassState {
    Present,
    Absent,
    Unknown,
}

/// Searches for a refinement in which every `Present` class is positive,
/// every `Absent` class is zero, and `Unknown` classes are unconstrained
/// beyond their intervals. Maximizes a common slack `sigma` on strict
/// bounds and positivity; realizable iff the optimum is positive.
pub(crate) fn realize(model: &AimcModel, classes: &ConstraintClasses, states: &[ClassState]) -> Option<MarkovChain> {
    let mut var = vec![usize::MAX; classes.len()];
    let mut num_vars = 0;
    for (c, class) in classes.classes().iter().enumerate() {
        let interval = class.interval.as_ref()?;
        match (class.point(), states[c]) {
            (Some(p), ClassState::Present) if !p.is_positive() => return None,
            (Some(p), ClassState::Absent) if !p.is_zero() => return None,
            (Some(_), _) => {}
            (None, ClassState::Absent) if !interval.contains_zero() => return None,
            (None, ClassState::Absent) => {}
            (None, _) => {
                var[c] = num_vars;
                num_vars += 1;
            }
        }
    }
    let sigma = num_vars;
    let mut lp = LinearProgram::new(num_vars + 1);
    lp.objective = vec![(sigma, Rational::one())];
    lp.add(vec![(sigma, Rational::one())], Sense::Le, Rational::one());
    let strict = |flag: bool| if flag { Rational::one() } else { Rational::zero() };
    for (c, class) in classes.classes().iter().enumerate() {
        if var[c] == usize::MAX {
            continue;
        }
        let i = class.interval.as_ref().expect("checked above");
        let x = var[c];
        lp.add(vec![(x, Rational::one()), (sigma, -strict(i.lo_strict))], Sense::Ge, i.lo.clone());
        lp.add(vec![(x, Rational::one()), (sigma, strict(i.hi_strict))], Sense::Le, i.hi.clone());
        if states[c] == ClassState::Present {
            lp.add(vec![(x, Rational::one()), (sigma, -Rational::one())], Sense::Ge, Rational::zero());
        }
    }
    for u in 0..model.len() {
        let mut constant = Rational::zero();
        let mut coeffs = Vec::new();
        for (e, _) in model.row(u) {
            match classes.value(model, e) {
                EdgeValue::Fixed(p) => constant += p,
                EdgeValue::Class(c) if var[c] != usize::MAX => coeffs.push((var[c], Rational::one())),
                EdgeValue::Class(_) => {}
            }
        }
        let rhs = Rational::one() - constant;
        if coeffs.is_empty() {
            if !rhs.is_zero() {
                return None;
            }
            continue;
        }
        lp.add(coeffs, Sense::Eq, rhs);
    }
    let values = match lp.solve() {
        LpOutcome::Optimal { values, objective } if objective.is_positive() => values,
        _ => return None,
    };
    let entries: Vec<(Edge, Rational)> = model
        .transitions()
        .map(|(e, _)| {
            let p = match classes.value(model, e) {
                EdgeValue::Fixed(p) => p,
                EdgeValue::Class(c) if var[c] != usize::MAX => values[var[c]].clone(),
                EdgeValue::Class(_) => Rational::zero(),
            };
            (e, p)
        })
        .collect();
    MarkovChain::new(model.vertices().to_vec(), entries).ok()
}

fn initial_states(classes: &ConstraintClasses) -> Option<Vec<ClassState>> {
    classes
        .classes()
        .iter()
        .map(|class| {
            class.interval.as_ref().map(|i| match edge_kind(i) {
                EdgeKind::Absent => ClassState::Absent,
                EdgeKind::Mandatory => ClassState::Present,
                EdgeKind::Optional => ClassState::Unknown,
            })
        })
        .collect()
}

/// A refinement whose support is exactly `edges`, if one exists.
pub fn realizable_structure(model: &AimcModel, edges: &BTreeSet<Edge>) -> Option<MarkovChain> {
    let classes = constraint_classes(model);
    for e in edges {
        if !model.interval(*e).admits_positive() {
            return None;
        }
    }
    for (e, i) in model.transitions() {
        if classes.class_of(e).is_none() && i.lo.is_positive() != edges.contains(&e) {
            return None;
        }
    }
    let mut states = Vec::with_capacity(classes.len());
    for class in classes.classes() {
        let inside = class.members.iter().filter(|e| edges.contains(e)).count();
        states.push(if inside == class.members.len() {
            ClassState::Present
        } else if inside == 0 {
            ClassState::Absent
        } else {
            return None;
        });
    }
    realize(model, &classes, &states)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QualAnswer {
    pub decision: bool,
    pub witness_structure: Option<Digraph>,
    pub witness_chain: Option<MarkovChain>,
    /// Complete candidate structures examined.
    pub structures_checked: u64,
}

impl QualAnswer {
    fn from_witness(chain: Option<MarkovChain>, structures_checked: u64) -> Self {
        QualAnswer {
            decision: chain.is_some(),
            witness_structure: chain.as_ref().map(structure_of),
            witness_chain: chain,
            structures_checked,
        }
    }
}

/// Decides whether some refinement reaches `t` from `s` with probability
/// exactly 1 (`>= 1`) or exactly 0 (`<= 0`). The trivial queries `>= 0`
/// and `<= 1` hold iff the model has any refinement.
pub fn qual_decide(model: &AimcModel, q: &Query) -> Result<QualAnswer> {
    let want_one = match (q.relation, q.threshold.is_zero(), q.threshold.is_one()) {
        (Relation::Ge, _, true) => Some(true),
        (Relation::Le, true, _) => Some(false),
        (_, true, _) | (_, _, true) => None,
        _ => return Err(Error::NonQualitativeThreshold(rational::format(&q.threshold))),
    };
    let s = model.vertex(&q.source)?;
    let t = model.vertex(&q.target)?;
    let classes = constraint_classes(model);
    let Some(mut states) = initial_states(&classes) else {
        return Ok(QualAnswer::from_witness(None, 0));
    };
    let Some(want_one) = want_one else {
        return Ok(QualAnswer::from_witness(realize(model, &classes, &states), 1));
    };
    let mut row_classes: Vec<Vec<usize>> = vec![Vec::new(); model.len()];
    for (c, class) in classes.classes().iter().enumerate() {
        if states[c] != ClassState::Unknown {
            continue;
        }
        for e in &class.members {
            if !row_classes[e.from].contains(&c) {
                row_classes[e.from].push(c);
            }
        }
    }
    let mut search = Search {
        model,
        classes: &classes,
        row_classes,
        t,
        s,
        want_one,
        checked: 0,
    };
    let mut seen = vec![false; model.len()];
    seen[s] = true;
    let mut order = vec![s];
    let found = search.dfs(&mut states, &mut order, &mut seen, 0);
    Ok(QualAnswer::from_witness(found, search.checked))
}

struct Search<'a> {
    model: &'a AimcModel,
    classes: &'a ConstraintClasses,
    row_classes: Vec<Vec<usize>>,
    s: usize,
    t: usize,
    want_one: bool,
    checked: u64,
}

impl Search<'_> {
    fn state_of(&self, states: &[ClassState], e: Edge) -> ClassState {
        match self.classes.value(self.model, e) {
            EdgeValue::Fixed(p) if p.is_positive() => ClassState::Present,
            EdgeValue::Fixed(_) => ClassState::Absent,
            EdgeValue::Class(c) => states[c],
        }
    }

    fn row_feasible(&self, u: usize, states: &[ClassState]) -> bool {
        let intervals: Vec<Interval> = self
            .model
            .row(u)
            .map(|(e, raw)| match self.classes.value(self.model, e) {
                EdgeValue::Fixed(p) => Interval::point(p),
                EdgeValue::Class(c) => {
                    let i = self.classes.get(c).interval.clone().unwrap_or_else(|| raw.clone());
                    match states[c] {
                        ClassState::Absent => Interval::zero(),
                        ClassState::Present => Interval {
                            lo_strict: i.lo_strict || i.lo.is_zero(),
                            ..i
                        },
                        ClassState::Unknown => i,
                    }
                }
            })
            .collect();
        row_admits_unit_sum(&intervals)
    }

    /// Cuts branches that can no longer meet the goal.
    fn hopeless(&self, states: &[ClassState], order: &[usize], seen: &[bool]) -> bool {
        if !self.want_one {
            return seen[self.t];
        }
        let possible = self
            .model
            .transitions()
            .map(|(e, _)| e)
            .filter(|&e| self.state_of(states, e) != ClassState::Absent);
        let coreach = coreach_indices(self.model.len(), possible, self.t);
        order.iter().any(|&v| !coreach[v])
    }

    fn leaf(&mut self, states: &[ClassState], order: &[usize]) -> Option<MarkovChain> {
        self.checked += 1;
        let edges: Vec<Edge> = order
            .iter()
            .filter(|&&u| u != self.t)
            .flat_map(|&u| self.model.row(u).map(|(e, _)| e))
            .filter(|&e| self.state_of(states, e) == ClassState::Present)
            .collect();
        let g = Digraph::new(self.model.vertices().to_vec(), edges).expect("model edges in range");
        let verdict = qual_known_idx(&g, self.s, self.t);
        let ok = if self.want_one { verdict.prob_one } else { verdict.prob_zero };
        if !ok {
            return None;
        }
        realize(self.model, self.classes, states)
    }

    fn dfs(
        &mut self,
        states: &mut Vec<ClassState>,
        order: &mut Vec<usize>,
        seen: &mut Vec<bool>,
        i: usize,
    ) -> Option<MarkovChain> {
        if self.hopeless(states, order, seen) {
            return None;
        }
        if i == order.len() {
            return self.leaf(states, order);
        }
        let u = order[i];
        if u == self.t {
            return self.dfs(states, order, seen, i + 1);
        }
        let open: Vec<usize> = self.row_classes[u]
            .iter()
            .copied()
            .filter(|&c| states[c] == ClassState::Unknown)
            .collect();
        assert!(open.len() < 64, "row with too many optional classes");
        let mut found = None;
        for k in 0u64..(1u64 << open.len()) {
            let gray = k ^ (k >> 1);
            for (bit, &c) in open.iter().enumerate() {
                states[c] = if gray >> bit & 1 == 1 {
                    ClassState::Present
                } else {
                    ClassState::Absent
                };
            }
            if !self.row_feasible(u, states) {
                continue;
            }
            let before = order.len();
            let succ: Vec<usize> = self
                .model
                .row(u)
                .map(|(e, _)| e)
                .filter(|&e| self.state_of(states, e) == ClassState::Present)
                .map(|e| e.to)
                .collect();
            for v in succ {
                if !seen[v] {
                    seen[v] = true;
                    order.push(v);
                }
            }
            found = self.dfs(states, order, seen, i + 1);
            for v in order.drain(before..) {
                seen[v] = false;
            }
            if found.is_some() {
                break;
            }
        }
        if found.is_none() {
            for &c in &open {
                states[c] = ClassState::Unknown;
            }
        }
        found
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::reach_prob;
    use crate::model::refines;
    use crate::rational::{int, ratio};

    fn graph(names: &[&str], edges: &[(usize, usize)]) -> Digraph {
        Digraph::new(
            names.iter().map(|s| s.to_string()).collect(),
            edges.iter().map(|&(a, b)| Edge::new(a, b)),
        )
        .unwrap()
    }

    #[test]
    fn known_structure_verdicts() {
        let names = ["s", "t", "f"];
        let g = graph(&names, &[(0, 2), (1, 1), (2, 2)]);
        let v = qual_known(&g, "s", "t").unwrap();
        assert!(v.prob_zero && !v.prob_one);
        let g = graph(&names, &[(0, 1), (0, 2), (1, 1), (2, 2)]);
        let v = qual_known(&g, "s", "t").unwrap();
        assert!(!v.prob_zero && !v.prob_one);
        let g = graph(&names, &[(0, 0), (0, 1), (1, 1), (2, 2)]);
        let v = qual_known(&g, "s", "t").unwrap();
        assert!(v.prob_one && !v.prob_zero);
        assert!(qual_known(&g, "s", "x").is_err());
    }

    fn model(names: &[&str], entries: &[(&str, &str, Interval)]) -> AimcModel {
        let mut m = AimcModel::new(names.iter().copied()).unwrap();
        for (a, b, i) in entries {
            m.add_transition(a, b, i.clone()).unwrap();
        }
        m
    }

    fn unit() -> Interval {
        Interval::closed(int(0), int(1)).unwrap()
    }

    fn split_model() -> AimcModel {
        model(
            &["s", "t", "f"],
            &[
                ("s", "t", unit()),
                ("s", "f", unit()),
                ("t", "t", Interval::point(int(1))),
                ("f", "f", Interval::point(int(1))),
            ],
        )
    }

    #[test]
    fn realizable_structure_respects_constraints() {
        let mut m = split_model();
        let all: BTreeSet<Edge> = m.transitions().map(|(e, _)| e).collect();
        let mc = realizable_structure(&m, &all).unwrap();
        assert!(refines(&mc, &m).unwrap());
        assert_eq!(mc.support(), all);

        m.add_constraint(("s", "t"), ("s", "f")).unwrap();
        let mut only_t = all.clone();
        only_t.remove(&m.edge("s", "f").unwrap());
        assert!(realizable_structure(&m, &only_t).is_none());
        let mc = realizable_structure(&m, &all).unwrap();
        assert_eq!(mc.prob(m.edge("s", "t").unwrap()), ratio(1, 2));
    }

    #[test]
    fn strict_bounds_need_positive_slack() {
        // s -> t in (1/2, 1], s -> f in [0, 1/2): realizable with both edges
        let m = model(
            &["s", "t", "f"],
            &[
                ("s", "t", Interval::new(ratio(1, 2), true, int(1), false).unwrap()),
                ("s", "f", Interval::new(int(0), false, ratio(1, 2), true).unwrap()),
                ("t", "t", Interval::point(int(1))),
                ("f", "f", Interval::point(int(1))),
            ],
        );
        let all: BTreeSet<Edge> = m.transitions().map(|(e, _)| e).collect();
        let mc = realizable_structure(&m, &all).unwrap();
        assert!(refines(&mc, &m).unwrap());
    }

    #[test]
    fn decides_both_extremes() {
        let m = split_model();
        for (rel, tau, expect) in [
            (Relation::Ge, int(1), int(1)),
            (Relation::Le, int(0), int(0)),
        ] {
            let q = Query::new("s", "t", rel, tau, None).unwrap();
            let ans = qual_decide(&m, &q).unwrap();
            assert!(ans.decision);
            let mc = ans.witness_chain.unwrap();
            assert!(refines(&mc, &m).unwrap());
            assert_eq!(reach_prob(&mc, "s", "t").unwrap(), expect);
        }
    }

    #[test]
    fn unreachable_target_is_never_one() {
        let m = model(
            &["s", "t", "f"],
            &[
                ("s", "f", Interval::point(int(1))),
                ("t", "t", Interval::point(int(1))),
                ("f", "f", Interval::point(int(1))),
            ],
        );
        let q = Query::new("s", "t", Relation::Ge, int(1), None).unwrap();
        assert!(!qual_decide(&m, &q).unwrap().decision);
        let q = Query::new("s", "t", Relation::Ge, int(0), None).unwrap();
        assert!(qual_decide(&m, &q).unwrap().decision);
    }

    #[test]
    fn rejects_non_qualitative_threshold() {
        let q = Query::new("s", "t", Relation::Ge, ratio(1, 2), None).unwrap();
        assert!(matches!(
            qual_decide(&split_model(), &q),
            Err(Error::NonQualitativeThreshold(_))
        ));
    }
}
