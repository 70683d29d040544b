//! Brute-force optimization of the reachability probability over
//! refinements, by exhaustive lattice grids or seeded random sampling.
//! Every candidate is evaluated exactly.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::approx::{with_jobs, DEFAULT_BUDGET};
use crate::completion::{cardinality, decode, Completion};
use crate::error::{Error, Result};
use crate::exact::reach_values;
use crate::model::{AimcModel, Edge, Interval, MarkovChain, Query, Relation};
use crate::rational::{int, Rational};

pub const DEFAULT_SEED: u64 = 0xA1AC;
pub const DEFAULT_DENOMINATOR: u64 = 1 << 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleMode {
    /// Every gridded class ranges over [`lattice_points`] at this
    /// resolution.
    Grid { resolution: u64 },
    /// `count` feasible draws with denominators at most `denominator`.
    Sample { count: u64, seed: u64, denominator: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub best_prob: Rational,
    pub best_chain: MarkovChain,
    pub evaluations: u64,
    pub mode: OracleMode,
}

#[derive(Clone, Copy, Debug)]
pub struct OracleOptions {
    pub budget: u128,
    pub jobs: Option<usize>,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            budget: DEFAULT_BUDGET,
            jobs: None,
        }
    }
}

/// Attainable endpoints, every `k/resolution` strictly inside the
/// interval, and the midpoint when a bound is strict. Doubling the
/// resolution only adds points.
pub fn lattice_points(i: &Interval, resolution: u64) -> Vec<Rational> {
    let mut pts = Vec::new();
    if !i.lo_strict {
        pts.push(i.lo.clone());
    }
    if !i.hi_strict {
        pts.push(i.hi.clone());
    }
    if i.lo_strict || i.hi_strict {
        pts.push((&i.lo + &i.hi) / int(2));
    }
    let res = BigInt::from(resolution.max(1));
    let first: BigInt = (i.lo.clone() * Rational::from_integer(res.clone())).floor().to_integer() + 1;
    let mut k = first;
    loop {
        let x = Rational::new(k.clone(), res.clone());
        if x >= i.hi {
            break;
        }
        pts.push(x);
        k += 1;
    }
    pts.sort();
    pts.dedup();
    pts.retain(|p| i.contains(p));
    pts
}

/// A uniform draw among `k/den` inside the interval, or its midpoint when
/// there is none.
fn draw(i: &Interval, den: u64, rng: &mut ChaCha8Rng) -> Rational {
    let d = Rational::from_integer(BigInt::from(den));
    let lo = (&i.lo * &d).ceil().to_integer();
    let hi = (&i.hi * &d).floor().to_integer();
    let den_big = BigInt::from(den);
    let mut kmin = lo;
    if !i.contains(&Rational::new(kmin.clone(), den_big.clone())) {
        kmin += 1;
    }
    let mut kmax = hi;
    if !i.contains(&Rational::new(kmax.clone(), den_big.clone())) {
        kmax -= 1;
    }
    match (kmin.to_i64(), kmax.to_i64()) {
        (Some(a), Some(b)) if a <= b => Rational::new(BigInt::from(rng.gen_range(a..=b)), den_big),
        _ => (&i.lo + &i.hi) / int(2),
    }
}

/// Larger is better: probability (negated for minimization), then the
/// lower candidate index.
fn better(relation: Relation, a: &(Rational, u64), b: &(Rational, u64)) -> bool {
    let ord = match relation {
        Relation::Ge => a.0.cmp(&b.0),
        Relation::Le => b.0.cmp(&a.0),
    };
    ord.then(b.1.cmp(&a.1)).is_gt()
}

/// Maximizes (relation `ge`) or minimizes (relation `le`) the probability
/// of reaching `q.target` from `q.source`. The threshold is ignored.
pub fn brute_force_opt(model: &AimcModel, q: &Query, mode: OracleMode, opts: OracleOptions) -> Result<OracleResult> {
    let s = model.vertex(&q.source)?;
    let t = model.vertex(&q.target)?;
    let completion = Completion::lenient(model)?;
    let n = model.len();
    let candidates: Candidates = match &mode {
        OracleMode::Grid { resolution } => {
            let points: Vec<Vec<Rational>> = completion
                .gridded
                .iter()
                .map(|&c| lattice_points(completion.interval(c), *resolution))
                .collect();
            let radices: Vec<usize> = points.iter().map(Vec::len).collect();
            let total = cardinality(&radices);
            if total > opts.budget {
                return Err(Error::GridTooLarge {
                    cardinality: total,
                    budget: opts.budget,
                });
            }
            Candidates::Grid {
                points,
                radices,
                total: total as u64,
            }
        }
        OracleMode::Sample { count, seed, denominator } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let intervals: Vec<&Interval> = completion.gridded.iter().map(|&c| completion.interval(c)).collect();
            let wanted = if intervals.is_empty() { 1 } else { *count };
            let max_attempts = wanted.saturating_mul(1000).max(1000);
            let mut draws = Vec::new();
            let mut attempts = 0;
            while (draws.len() as u64) < wanted && attempts < max_attempts {
                attempts += 1;
                let values: Vec<Rational> = intervals.iter().map(|i| draw(i, *denominator, &mut rng)).collect();
                if completion.complete(&values).is_some() {
                    draws.push(values);
                }
            }
            Candidates::Sampled(draws)
        }
    };
    let values_at = |i: u64| -> Vec<Rational> {
        match &candidates {
            Candidates::Grid { points, radices, .. } => decode(i as u128, radices)
                .into_iter()
                .zip(points)
                .map(|(d, pts)| pts[d].clone())
                .collect(),
            Candidates::Sampled(draws) => draws[i as usize].clone(),
        }
    };
    let total = match &candidates {
        Candidates::Grid { total, .. } => *total,
        Candidates::Sampled(draws) => draws.len() as u64,
    };
    let evaluate = |i: u64| -> Option<(Vec<(Edge, Rational)>, Rational)> {
        let entries = completion.complete(&values_at(i))?;
        let p = reach_values(n, &entries, t).swap_remove(s);
        Some((entries, p))
    };
    let relation = q.relation;
    let (best, evaluations) = with_jobs(opts.jobs, || {
        (0..total)
            .into_par_iter()
            .filter_map(|i| evaluate(i).map(|(_, p)| (Some((p, i)), 1u64)))
            .reduce(
                || (None, 0),
                |(a, ca), (b, cb)| {
                    let best = match (a, b) {
                        (Some(a), Some(b)) => Some(if better(relation, &b, &a) { b } else { a }),
                        (a, b) => a.or(b),
                    };
                    (best, ca + cb)
                },
            )
    });
    let (best_prob, index) = best.ok_or_else(|| Error::NoRefinement("no candidate satisfies the row sums".into()))?;
    let (entries, _) = evaluate(index).expect("best index is valid");
    Ok(OracleResult {
        best_prob,
        best_chain: completion.chain(entries),
        evaluations,
        mode,
    })
}

enum Candidates {
    Grid {
        points: Vec<Vec<Rational>>,
        radices: Vec<usize>,
        total: u64,
    },
    Sampled(Vec<Vec<Rational>>),
}

/// Smallest resolution that is a multiple of every denominator given.
pub fn resolution_containing(points: &[Rational]) -> u64 {
    points
        .iter()
        .fold(BigInt::one(), |acc, p| acc.lcm(p.denom()))
        .to_u64()
        .unwrap_or(u64::MAX)
}
