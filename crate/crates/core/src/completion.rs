//! Turning values for the gridded classes into full chains.
//!
//! Every row with a free edge gets one slack edge whose value is the exact
//! residual of the row. The remaining free classes are chosen by the
//! caller (grid points or samples). In lenient mode a row without an
//! eligible slack edge has all its classes chosen by the caller and must
//! sum to one exactly.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::model::{constraint_classes, AimcModel, ConstraintClasses, Edge, EdgeValue, Interval, MarkovChain};
use crate::rational::{self, Rational};

pub(crate) struct Completion<'a> {
    pub model: &'a AimcModel,
    pub classes: ConstraintClasses,
    /// Free classes that are not slack, in class order.
    pub gridded: Vec<usize>,
    /// Row to its slack edge.
    pub slack: BTreeMap<usize, Edge>,
    /// Rows with free edges but no slack (lenient mode only).
    pub unslacked: BTreeSet<usize>,
    /// Most non-slack free edges in any row.
    pub k_max: usize,
    position: Vec<usize>,
}

impl<'a> Completion<'a> {
    pub fn new(model: &'a AimcModel) -> Result<Self> {
        Self::build(model, true)
    }

    pub fn lenient(model: &'a AimcModel) -> Result<Self> {
        Self::build(model, false)
    }

    fn build(model: &'a AimcModel, require_slack: bool) -> Result<Self> {
        let classes = constraint_classes(model);
        for class in classes.classes() {
            class.interval()?;
        }
        let mut slack = BTreeMap::new();
        let mut slack_classes = Vec::new();
        let mut unslacked = BTreeSet::new();
        for u in 0..model.len() {
            let mut free = 0;
            let mut fixed_sum = Rational::zero();
            for (e, _) in model.row(u) {
                match classes.value(model, e) {
                    EdgeValue::Fixed(p) => fixed_sum += p,
                    EdgeValue::Class(_) => free += 1,
                }
            }
            if free == 0 {
                if !fixed_sum.is_one() {
                    return Err(Error::InvalidModel(format!(
                        "row {} sums to {}",
                        model.name(u),
                        rational::format(&fixed_sum)
                    )));
                }
                continue;
            }
            let Some(e) = choose_slack(model, &classes, u) else {
                if require_slack {
                    return Err(Error::NoSlackEdge(model.name(u).to_string()));
                }
                unslacked.insert(u);
                continue;
            };
            slack.insert(u, e);
            slack_classes.push(classes.class_of(e).expect("free edge has a class"));
        }
        let gridded: Vec<usize> = classes.free_classes().filter(|c| !slack_classes.contains(c)).collect();
        let mut position = vec![usize::MAX; classes.len()];
        for (i, &c) in gridded.iter().enumerate() {
            position[c] = i;
        }
        let k_max = (0..model.len())
            .map(|u| {
                model
                    .row(u)
                    .filter(|(e, _)| matches!(classes.value(model, *e), EdgeValue::Class(c) if position[c] != usize::MAX))
                    .count()
            })
            .max()
            .unwrap_or(0);
        Ok(Completion {
            model,
            classes,
            gridded,
            slack,
            unslacked,
            k_max,
            position,
        })
    }

    pub fn interval(&self, class: usize) -> &Interval {
        self.classes.get(class).interval.as_ref().expect("checked in new")
    }

    /// Nonzero entries of the chain with the given gridded values, or
    /// `None` when some slack residual leaves its interval.
    pub fn complete(&self, values: &[Rational]) -> Option<Vec<(Edge, Rational)>> {
        let mut entries = Vec::new();
        let mut row_sum = Rational::zero();
        let mut current_row = usize::MAX;
        let mut pending: Option<usize> = None;
        let finish = |entries: &mut Vec<(Edge, Rational)>, row: usize, pending: Option<usize>, sum: &Rational| -> bool {
            let Some(i) = pending else {
                return !self.unslacked.contains(&row) || sum.is_one();
            };
            let residual = Rational::one() - sum;
            let e = entries[i].0;
            let c = self.classes.class_of(e).expect("slack edge has a class");
            if !self.interval(c).contains(&residual) {
                return false;
            }
            entries[i].1 = residual;
            true
        };
        for (e, _) in self.model.transitions() {
            if e.from != current_row {
                if !finish(&mut entries, current_row, pending.take(), &row_sum) {
                    return None;
                }
                current_row = e.from;
                row_sum = Rational::zero();
            }
            if self.slack.get(&e.from) == Some(&e) {
                pending = Some(entries.len());
                entries.push((e, Rational::zero()));
                continue;
            }
            let p = match self.classes.value(self.model, e) {
                EdgeValue::Fixed(p) => p,
                EdgeValue::Class(c) => values[self.position[c]].clone(),
            };
            row_sum += &p;
            entries.push((e, p));
        }
        if !finish(&mut entries, current_row, pending, &row_sum) {
            return None;
        }
        entries.retain(|(_, p)| !p.is_zero());
        Some(entries)
    }

    pub fn chain(&self, entries: Vec<(Edge, Rational)>) -> MarkovChain {
        MarkovChain::new(self.model.vertices().to_vec(), entries).expect("completed rows sum to one")
    }
}

/// The free edge of row `u` that is alone in its class and has the widest
/// interval (first on ties), if any.
pub(crate) fn choose_slack(model: &AimcModel, classes: &ConstraintClasses, u: usize) -> Option<Edge> {
    let mut best: Option<(Edge, Rational)> = None;
    for (e, _) in model.row(u) {
        let EdgeValue::Class(c) = classes.value(model, e) else { continue };
        let class = classes.get(c);
        let Some(interval) = class.interval.as_ref().filter(|_| class.members.len() == 1) else { continue };
        let width = interval.width();
        if best.as_ref().map_or(true, |(_, w)| width > *w) {
            best = Some((e, width));
        }
    }
    best.map(|(e, _)| e)
}

/// Mixed-radix decoding of `index` over `radices`, first digit most
/// significant.
pub(crate) fn decode(mut index: u128, radices: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; radices.len()];
    for (d, &r) in digits.iter_mut().zip(radices).rev() {
        *d = (index % r as u128) as usize;
        index /= r as u128;
    }
    digits
}

/// Product of the radices, saturating.
pub(crate) fn cardinality(radices: &[usize]) -> u128 {
    radices.iter().fold(1u128, |acc, &r| acc.saturating_mul(r as u128))
}
