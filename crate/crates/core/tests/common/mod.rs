#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use aimc::gadgets::Cnf;
use aimc::model::{AimcModel, Edge, Interval, MarkovChain};
use aimc::rational::{int, ratio, Rational};
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("v{i}")).collect()
}

/// Splits 1 into `k` positive rationals with denominator `den`.
pub fn random_split(rng: &mut ChaCha8Rng, k: usize, den: i64) -> Vec<Rational> {
    assert!(den >= k as i64);
    let mut cuts: BTreeSet<i64> = BTreeSet::new();
    while cuts.len() < k - 1 {
        cuts.insert(rng.gen_range(1..den));
    }
    let mut out = Vec::with_capacity(k);
    let mut prev = 0;
    for c in cuts.into_iter().chain(std::iter::once(den)) {
        out.push(ratio(c - prev, den));
        prev = c;
    }
    out
}

/// A random chain on `n` vertices. Rows have one to three successors;
/// roughly a quarter of the vertices are absorbing.
pub fn random_chain(rng: &mut ChaCha8Rng, n: usize) -> MarkovChain {
    let mut entries = Vec::new();
    for u in 0..n {
        if rng.gen_bool(0.25) {
            entries.push((Edge::new(u, u), int(1)));
            continue;
        }
        let k = rng.gen_range(1..=3.min(n));
        let mut targets: Vec<usize> = (0..n).collect();
        targets.shuffle(rng);
        let den = [6, 8, 12][rng.gen_range(0..3)];
        for (v, p) in targets.into_iter().take(k).zip(random_split(rng, k, den)) {
            entries.push((Edge::new(u, v), p));
        }
    }
    MarkovChain::new(names(n), entries).unwrap()
}

fn successors(mc: &MarkovChain, u: usize) -> Vec<usize> {
    mc.row(u).map(|(e, _)| e.to).collect()
}

/// Vertices reachable from `s` without leaving `t` once it is entered.
fn reach_avoiding(mc: &MarkovChain, s: usize, t: usize) -> BTreeSet<usize> {
    let mut seen = BTreeSet::from([s]);
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        if u == t {
            continue;
        }
        for v in successors(mc, u) {
            if seen.insert(v) {
                queue.push_back(v);
            }
        }
    }
    seen
}

fn can_reach(mc: &MarkovChain, from: usize, t: usize) -> bool {
    reach_avoiding(mc, from, usize::MAX).contains(&t)
}

/// Reaching `t` is certain iff every vertex reachable from `s` (before
/// hitting `t`) can still reach `t`.
pub fn certain_reach(mc: &MarkovChain, s: usize, t: usize) -> bool {
    reach_avoiding(mc, s, t).into_iter().all(|u| u == t || can_reach(mc, u, t))
}

pub fn possible_reach(mc: &MarkovChain, s: usize, t: usize) -> bool {
    can_reach(mc, s, t)
}

/// Floating-point value iteration for cross-checking exact results.
pub fn value_iteration(mc: &MarkovChain, t: usize, rounds: usize) -> Vec<f64> {
    let n = mc.len();
    let mut x = vec![0.0; n];
    x[t] = 1.0;
    for _ in 0..rounds {
        let mut next = vec![0.0; n];
        for u in 0..n {
            next[u] = if u == t {
                1.0
            } else {
                mc.row(u).map(|(e, p)| aimc::rational::to_f64(p) * x[e.to]).sum()
            };
        }
        x = next;
    }
    x
}

pub fn truth_table_sat(cnf: &Cnf) -> bool {
    (0..1u32 << cnf.num_vars).any(|bits| {
        let a: Vec<bool> = (0..cnf.num_vars).map(|i| bits >> i & 1 == 1).collect();
        cnf.clauses.iter().all(|c| {
            c.iter().any(|&l| {
                let v = a[l.unsigned_abs() as usize - 1];
                (l > 0) == v
            })
        })
    })
}

/// The reachability probability of a single square-root gadget at `x`,
/// read off the gadget's four branches.
pub fn gadget_cubic(alpha: &Rational, beta: &Rational, x: &Rational) -> Rational {
    let one = Rational::one();
    let quarter = ratio(1, 4);
    let b1 = beta * (&one - x) * x * x;
    let b2 = beta * (&one - x);
    let b3 = alpha * x;
    let b4 = beta * (&one - x) * x;
    quarter * (b1 + b2 + b3 + b4)
}

pub fn pow(x: &Rational, e: u32) -> Rational {
    (0..e).fold(Rational::one(), |acc, _| acc * x)
}

/// Rationals `k/den` for `k` in `lo..=hi`.
pub fn fractions(lo: i64, hi: i64, den: i64) -> Vec<Rational> {
    (lo..=hi).map(|k| ratio(k, den)).collect()
}

pub fn closed(lo: Rational, hi: Rational) -> Interval {
    Interval::closed(lo, hi).unwrap()
}

/// A copy of `base` with mass shifted between pairs of entries in the
/// same row by at most `d`.
pub fn perturb(rng: &mut ChaCha8Rng, base: &MarkovChain, d: &Rational) -> MarkovChain {
    let mut entries: Vec<(Edge, Rational)> = Vec::new();
    for u in 0..base.len() {
        let mut row: Vec<(Edge, Rational)> = base.row(u).map(|(e, p)| (e, p.clone())).collect();
        if row.len() >= 2 {
            let i = rng.gen_range(0..row.len());
            let j = (i + 1) % row.len();
            let k = ratio(rng.gen_range(-8..=8), 8) * d;
            row[i].1 += &k;
            row[j].1 -= &k;
        }
        entries.extend(row);
    }
    MarkovChain::new(base.vertices().to_vec(), entries).unwrap()
}

/// A random model built around a hidden chain: some edges become
/// intervals around their value, some of those are tied to a shared
/// parameter, and each uncertain row keeps an untied residual edge.
pub fn random_model(rng: &mut ChaCha8Rng, n: usize) -> (AimcModel, MarkovChain) {
    let names = names(n);
    let mut model = AimcModel::new(names.clone()).unwrap();
    let mut entries = Vec::new();
    let shared = [ratio(1, 4), ratio(1, 3)];
    let mut shared_edges: [Option<(String, String)>; 2] = [None, None];
    for u in 0..n {
        if rng.gen_bool(0.2) {
            model.add_transition(&names[u], &names[u], Interval::point(int(1))).unwrap();
            entries.push((Edge::new(u, u), int(1)));
            continue;
        }
        let k = rng.gen_range(1..=3.min(n));
        let mut targets: Vec<usize> = (0..n).collect();
        targets.shuffle(rng);
        targets.truncate(k);
        let mut values = random_split(rng, k, 12);
        let mut tie: Vec<Option<usize>> = vec![None; k];
        if k >= 2 && rng.gen_bool(0.4) {
            let which = rng.gen_range(0..2);
            let rest = Rational::one() - &shared[which];
            values[0] = shared[which].clone();
            let tail: Rational = values[1..].iter().sum();
            let scale = &rest / &tail;
            for v in &mut values[1..] {
                *v *= &scale;
            }
            tie[0] = Some(which);
        }
        let uncertain = rng.gen_bool(0.6);
        for (i, (&v, p)) in targets.iter().zip(&values).enumerate() {
            let interval = if uncertain && (tie[i].is_some() || i + 1 == k || rng.gen_bool(0.7)) {
                let lo = (p - ratio(rng.gen_range(0..3), 12)).max(Rational::zero());
                let hi = (p + ratio(rng.gen_range(0..3), 12)).min(Rational::one());
                if lo == hi {
                    Interval::point(p.clone())
                } else {
                    closed(lo, hi)
                }
            } else {
                Interval::point(p.clone())
            };
            model.add_transition(&names[u], &names[v], interval).unwrap();
            if let Some(w) = tie[i] {
                match &shared_edges[w] {
                    Some((a, b)) => model.add_constraint((a, b), (&names[u], &names[v])).unwrap(),
                    None => shared_edges[w] = Some((names[u].clone(), names[v].clone())),
                }
            }
            entries.push((Edge::new(u, v), p.clone()));
        }
    }
    let mc = MarkovChain::new(names, entries).unwrap();
    (model, mc)
}
