//! Exact reachability probabilities in a fixed Markov chain.

use std::borrow::Borrow;

use num_traits::{One, Zero};

use crate::error::Result;
use crate::graph::coreach_indices;
use crate::linalg;
use crate::model::{Edge, MarkovChain};
use crate::rational::Rational;

/// Probability of eventually reaching the target, per vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReachVector {
    pub vertices: Vec<String>,
    pub target: usize,
    pub values: Vec<Rational>,
}

impl ReachVector {
    pub fn get(&self, v: usize) -> &Rational {
        &self.values[v]
    }

    pub fn by_name(&self, name: &str) -> Option<&Rational> {
        self.vertices.iter().position(|v| v == name).map(|i| &self.values[i])
    }
}

/// Solves the reachability system for `n` vertices with the given nonzero
/// entries. Vertices that cannot reach `t` get 0; the rest are solved as a
/// square system, which is nonsingular after the restriction.
pub(crate) fn reach_values<R: Borrow<Rational>>(n: usize, entries: &[(Edge, R)], t: usize) -> Vec<Rational> {
    let can_reach = coreach_indices(n, entries.iter().map(|(e, _)| *e), t);
    let mut pos = vec![usize::MAX; n];
    let mut unknowns = Vec::new();
    for v in 0..n {
        if can_reach[v] && v != t {
            pos[v] = unknowns.len();
            unknowns.push(v);
        }
    }
    let k = unknowns.len();
    let mut a = vec![vec![Rational::zero(); k]; k];
    let mut b = vec![Rational::zero(); k];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = Rational::one();
    }
    for (e, p) in entries {
        let p = p.borrow();
        let i = pos[e.from];
        if i == usize::MAX {
            continue;
        }
        if e.to == t {
            b[i] += p;
        } else if pos[e.to] != usize::MAX {
            a[i][pos[e.to]] -= p;
        }
    }
    let x = linalg::solve(a, b).expect("restricted reachability system is nonsingular");
    let mut values = vec![Rational::zero(); n];
    values[t] = Rational::one();
    for (v, p) in unknowns.into_iter().zip(x) {
        values[v] = p;
    }
    values
}

pub fn reach_prob_all(mc: &MarkovChain, t: &str) -> Result<ReachVector> {
    let t = mc.vertex(t)?;
    Ok(ReachVector {
        vertices: mc.vertices().to_vec(),
        target: t,
        values: reach_values(mc.len(), &mc.entries().collect::<Vec<_>>(), t),
    })
}

pub fn reach_prob(mc: &MarkovChain, s: &str, t: &str) -> Result<Rational> {
    let s = mc.vertex(s)?;
    let all = reach_prob_all(mc, t)?;
    Ok(all.values[s].clone())
}
