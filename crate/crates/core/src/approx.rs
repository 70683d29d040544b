//! Approximate reachability for models with epsilon-known structure.
//!
//! Every refinement lies within absolute distance `d` of some grid chain,
//! and a perturbation of at most `d` moves the reachability probability by
//! at most the promise gap. Exhaustively scanning the grid chains therefore
//! decides the promise problem.

use std::collections::BTreeMap;

use num_traits::{One, Signed};
use rayon::prelude::*;

use crate::completion::{cardinality, decode, Completion};
use crate::error::{Error, Result};
use crate::exact::reach_values;
use crate::graph::{structure_status, StructureKind};
use crate::model::{AimcModel, Edge, Interval, MarkovChain, Query, Relation};
use crate::rational::{self, int, pow, Rational};

/// Default cap on the number of grid chains.
pub const DEFAULT_BUDGET: u128 = 10_000_000;

/// `eps_struct * gap / (2n (1 + gap))`, a rational lower bound on the
/// distance `eps_struct (1 - (1+gap)^(-1/2n))` that keeps the
/// reachability error within `gap`.
pub fn rational_distance(eps_struct: &Rational, gap: &Rational, n: usize) -> Result<Rational> {
    if !eps_struct.is_positive() || !gap.is_positive() || n == 0 {
        return Err(Error::Domain("epsilon_struct, epsilon_gap and n must be positive".into()));
    }
    Ok(eps_struct * gap / (int(2 * n as i64) * (Rational::one() + gap)))
}

/// Grid spacing: the rational distance divided among the non-slack edges
/// of a row, so that a slack residual also moves by at most that distance.
pub fn grid_spacing(eps_struct: &Rational, gap: &Rational, n: usize, k_max: usize) -> Result<Rational> {
    Ok(rational_distance(eps_struct, gap, n)? / int(k_max.max(1) as i64))
}

/// `(1 + d/(eps - d))^(2n) - 1`: how far the reachability probability can
/// move between structurally equivalent chains at distance at most `d`
/// whose nonzero entries are at least `eps`.
pub fn robustness_bound(eps_struct: &Rational, d: &Rational, n: usize) -> Result<Rational> {
    if d.is_negative() || d >= eps_struct {
        return Err(Error::Domain(format!(
            "need 0 <= d < epsilon_struct, got d = {}, epsilon_struct = {}",
            rational::format(d),
            rational::format(eps_struct)
        )));
    }
    let base = Rational::one() + d / (eps_struct - d);
    Ok(pow(&base, 2 * n as u32) - Rational::one())
}

/// Decides `(1+x)^r <= 1 + r x` for `r = r_num / r_den` exactly by raising
/// both (nonnegative) sides to the power `r_den`.
pub fn check_magic_inequality(x: &Rational, r_num: u32, r_den: u32) -> Result<bool> {
    if *x < -Rational::one() || r_den == 0 || r_num > r_den {
        return Err(Error::Domain("need x >= -1 and 0 <= r_num <= r_den, r_den > 0".into()));
    }
    let r = Rational::new(r_num.into(), r_den.into());
    let rhs = Rational::one() + &r * x;
    let lhs_pow = pow(&(Rational::one() + x), r_num);
    Ok(lhs_pow <= pow(&rhs, r_den))
}

/// Grid points per gridded class and the slack edge of each uncertain row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridSpec {
    pub spacing: Rational,
    pub points: BTreeMap<usize, Vec<Rational>>,
    pub slack_edge: BTreeMap<usize, Edge>,
}

impl GridSpec {
    /// Number of grid assignments (some may fail the slack check).
    pub fn cardinality(&self) -> u128 {
        cardinality(&self.radices())
    }

    fn radices(&self) -> Vec<usize> {
        self.points.values().map(Vec::len).collect()
    }
}

/// Points `a, a+h, a+2h, ..., b` covering the interval, where `a` and `b`
/// are its endpoints, pulled inward by `min(h, width)/2` when strict.
pub fn grid_points(i: &Interval, h: &Rational) -> Vec<Rational> {
    let w = i.width();
    let pull = if *h < w { h.clone() } else { w.clone() } / int(2);
    let a = if i.lo_strict { &i.lo + &pull } else { i.lo.clone() };
    let b = if i.hi_strict { &i.hi - &pull } else { i.hi.clone() };
    let mut out = vec![a.clone()];
    let mut x = a + h;
    while x < b {
        out.push(x.clone());
        x += h;
    }
    if *out.last().expect("nonempty") < b {
        out.push(b);
    }
    out
}

/// Grid over the model with spacing `h`, using the standard slack-edge
/// designation.
pub fn grid_spec(model: &AimcModel, h: &Rational) -> Result<GridSpec> {
    if !h.is_positive() {
        return Err(Error::Domain("grid spacing must be positive".into()));
    }
    let completion = Completion::new(model)?;
    Ok(spec_from(&completion, h))
}

fn spec_from(completion: &Completion, h: &Rational) -> GridSpec {
    GridSpec {
        spacing: h.clone(),
        points: completion
            .gridded
            .iter()
            .map(|&c| (c, grid_points(completion.interval(c), h)))
            .collect(),
        slack_edge: completion.slack.clone(),
    }
}

fn assignment_at(g: &GridSpec, radices: &[usize], index: u128) -> Vec<Rational> {
    decode(index, radices)
        .into_iter()
        .zip(g.points.values())
        .map(|(d, pts)| pts[d].clone())
        .collect()
}

/// All grid chains in lexicographic order of grid indices (first gridded
/// class most significant). Assignments whose slack residual leaves its
/// interval are skipped.
pub fn grid_refinements<'a>(model: &'a AimcModel, g: &'a GridSpec) -> Result<impl Iterator<Item = MarkovChain> + 'a> {
    if structure_status(model).kind != StructureKind::EpsilonKnown {
        return Err(Error::NotEpsilonKnown);
    }
    let completion = Completion::new(model)?;
    let radices = g.radices();
    let total = g.cardinality();
    Ok((0..total).filter_map(move |i| {
        let values = assignment_at(g, &radices, i);
        completion.complete(&values).map(|entries| completion.chain(entries))
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ApproxDecision {
    Accept,
    Reject,
}

impl ApproxDecision {
    pub fn as_str(self) -> &'static str {
        match self {
            ApproxDecision::Accept => "accept",
            ApproxDecision::Reject => "reject",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApproxAnswer {
    pub decision: ApproxDecision,
    pub witness: Option<MarkovChain>,
    pub witness_prob: Option<Rational>,
    /// Valid grid chains up to and including the witness (all of them on
    /// reject).
    pub grid_chains_visited: u64,
    /// Grid assignments before the slack check.
    pub grid_cardinality: u128,
    pub spacing: Rational,
}

#[derive(Clone, Copy, Debug)]
pub struct ApproxOptions {
    pub budget: u128,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

impl Default for ApproxOptions {
    fn default() -> Self {
        ApproxOptions {
            budget: DEFAULT_BUDGET,
            jobs: None,
        }
    }
}

/// Runs `f` on a pool with `jobs` threads, or on the global pool.
pub(crate) fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

/// Accepts (relation `ge`) iff some grid chain reaches the target with
/// probability at least `tau - gap/2`; mirrored for `le`. The witness is
/// the accepting chain with the least grid index.
pub fn approx_decide(model: &AimcModel, q: &Query, opts: ApproxOptions) -> Result<ApproxAnswer> {
    let gap = q.promise_gap.clone().ok_or(Error::MissingPromiseGap)?;
    let s = model.vertex(&q.source)?;
    let t = model.vertex(&q.target)?;
    let status = structure_status(model);
    if status.kind != StructureKind::EpsilonKnown {
        return Err(Error::NotEpsilonKnown);
    }
    let eps_struct = status.epsilon_struct.expect("epsilon-known structure has a bound");
    let completion = Completion::new(model)?;
    let h = grid_spacing(&eps_struct, &gap, model.len(), completion.k_max)?;
    let spec = spec_from(&completion, &h);
    let total = spec.cardinality();
    if total > opts.budget {
        return Err(Error::GridTooLarge {
            cardinality: total,
            budget: opts.budget,
        });
    }
    let total = u64::try_from(total).map_err(|_| Error::GridTooLarge {
        cardinality: total,
        budget: opts.budget,
    })?;
    let half = &gap / int(2);
    let bound = match q.relation {
        Relation::Ge => &q.threshold - &half,
        Relation::Le => &q.threshold + &half,
    };
    let radices = spec.radices();
    let n = model.len();
    let evaluate = |i: u64| -> Option<(Vec<(Edge, Rational)>, Rational)> {
        let entries = completion.complete(&assignment_at(&spec, &radices, i as u128))?;
        let p = reach_values(n, &entries, t).swap_remove(s);
        Some((entries, p))
    };
    let valid_before = |end: u64| -> u64 {
        (0..end)
            .into_par_iter()
            .filter(|&i| completion.complete(&assignment_at(&spec, &radices, i as u128)).is_some())
            .count() as u64
    };
    let (found, visited) = with_jobs(opts.jobs, || {
        let found = (0..total).into_par_iter().find_first(|&i| {
            evaluate(i).is_some_and(|(_, p)| q.relation.holds(&p, &bound))
        });
        let visited = match found {
            Some(i) => valid_before(i) + 1,
            None => valid_before(total),
        };
        (found, visited)
    });
    Ok(match found {
        Some(i) => {
            let (entries, p) = evaluate(i).expect("witness index is valid");
            ApproxAnswer {
                decision: ApproxDecision::Accept,
                witness: Some(completion.chain(entries)),
                witness_prob: Some(p),
                grid_chains_visited: visited,
                grid_cardinality: total as u128,
                spacing: h,
            }
        }
        None => ApproxAnswer {
            decision: ApproxDecision::Reject,
            witness: None,
            witness_prob: None,
            grid_chains_visited: visited,
            grid_cardinality: total as u128,
            spacing: h,
        },
    })
}
