use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::{AimcModel, Edge, Interval, MarkovChain, Query, Relation};
use crate::rational::{self, int, Rational};

use super::chain_with;

/// Exponent vector to coefficient, without zero coefficients.
type Canonical = BTreeMap<Vec<u32>, Rational>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial {
    pub coef: Rational,
    pub exponents: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    pub vars: Vec<String>,
    pub monomials: Vec<Monomial>,
}

impl Polynomial {
    pub fn new(vars: Vec<String>, monomials: Vec<Monomial>) -> Result<Self> {
        for m in &monomials {
            if m.exponents.len() != vars.len() {
                return Err(Error::GadgetParams(format!(
                    "monomial has {} exponents for {} variables",
                    m.exponents.len(),
                    vars.len()
                )));
            }
        }
        Ok(Polynomial { vars, monomials })
    }

    /// Like terms combined, zero coefficients dropped.
    pub fn canonical(&self) -> BTreeMap<Vec<u32>, Rational> {
        let mut out = Canonical::new();
        for m in &self.monomials {
            add_term(&mut out, m.exponents.clone(), m.coef.clone());
        }
        out
    }

    pub fn eval(&self, xs: &[Rational]) -> Rational {
        self.monomials
            .iter()
            .map(|m| {
                m.exponents
                    .iter()
                    .zip(xs)
                    .fold(m.coef.clone(), |acc, (&e, x)| acc * rational::pow(x, e))
            })
            .sum()
    }
}

fn add_term(p: &mut Canonical, exps: Vec<u32>, coef: Rational) {
    let entry = p.entry(exps).or_insert_with(Rational::zero);
    *entry += coef;
    if entry.is_zero() {
        p.retain(|_, c| !c.is_zero());
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Factor {
    X(usize),
    OneMinus(usize),
}

impl Factor {
    pub fn var(self) -> usize {
        match self {
            Factor::X(j) | Factor::OneMinus(j) => j,
        }
    }

    pub fn eval(self, xs: &[Rational]) -> Rational {
        match self {
            Factor::X(j) => xs[j].clone(),
            Factor::OneMinus(j) => Rational::one() - &xs[j],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyTerm {
    pub alpha: Rational,
    pub factors: Vec<Factor>,
}

/// `P = offset + scale * sum alpha_i * Q_i` with positive `alpha_i`
/// summing to at most 1 and each `Q_i` a nonempty product of factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyEncoding {
    pub offset: Rational,
    pub scale: Rational,
    pub terms: Vec<PolyTerm>,
}

impl PolyEncoding {
    /// Multiplies out the encoding over `num_vars` variables.
    pub fn expand(&self, num_vars: usize) -> BTreeMap<Vec<u32>, Rational> {
        let mut out = Canonical::new();
        if !self.offset.is_zero() {
            out.insert(vec![0; num_vars], self.offset.clone());
        }
        for term in &self.terms {
            let mut product = Canonical::from([(vec![0; num_vars], &self.scale * &term.alpha)]);
            for f in &term.factors {
                let mut next = Canonical::new();
                for (exps, c) in product {
                    let mut shifted = exps.clone();
                    shifted[f.var()] += 1;
                    match f {
                        Factor::X(_) => add_term(&mut next, shifted, c),
                        Factor::OneMinus(_) => {
                            add_term(&mut next, exps, c.clone());
                            add_term(&mut next, shifted, -c);
                        }
                    }
                }
                product = next;
            }
            for (exps, c) in product {
                add_term(&mut out, exps, c);
            }
        }
        out
    }

    pub fn eval(&self, xs: &[Rational]) -> Rational {
        let inner: Rational = self
            .terms
            .iter()
            .map(|t| t.factors.iter().fold(t.alpha.clone(), |acc, f| acc * f.eval(xs)))
            .sum();
        &self.offset + &self.scale * inner
    }
}

/// Rewrites every negative monomial `-c * f1 * R` as
/// `c * (1 - f1) * R - c * R` until only positive products remain, folds
/// constants into the offset, and scales the weights to sum to one.
pub fn rewrite_polynomial(p: &Polynomial) -> PolyEncoding {
    let mut offset = Rational::zero();
    let mut weighted: Vec<(Rational, Vec<Factor>)> = Vec::new();
    let mut push = |c: Rational, factors: Vec<Factor>| match weighted.iter_mut().find(|(_, f)| *f == factors) {
        Some((w, _)) => *w += c,
        None => weighted.push((c, factors)),
    };
    for (exps, coef) in p.canonical() {
        let factors: Vec<Factor> = exps
            .iter()
            .enumerate()
            .flat_map(|(j, &e)| std::iter::repeat(Factor::X(j)).take(e as usize))
            .collect();
        if factors.is_empty() {
            offset += coef;
        } else if coef.is_positive() {
            push(coef, factors);
        } else {
            let c = -coef;
            for i in 0..factors.len() {
                let mut q = vec![Factor::OneMinus(factors[i].var())];
                q.extend_from_slice(&factors[i + 1..]);
                push(c.clone(), q);
            }
            offset -= c;
        }
    }
    let scale: Rational = weighted.iter().map(|(w, _)| w).sum();
    let scale = if scale.is_zero() { Rational::one() } else { scale };
    let terms = weighted
        .into_iter()
        .map(|(w, factors)| PolyTerm {
            alpha: w / &scale,
            factors,
        })
        .collect();
    PolyEncoding { offset, scale, terms }
}

/// A polynomial with a box of variable ranges.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyProblem {
    pub polynomial: Polynomial,
    pub intervals: Vec<Interval>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MonomialEntry {
    coef: String,
    exponents: Vec<u32>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IntervalEntry {
    #[serde(default)]
    p: Option<String>,
    #[serde(default)]
    lo: Option<String>,
    #[serde(default)]
    hi: Option<String>,
    #[serde(default)]
    lo_strict: bool,
    #[serde(default)]
    hi_strict: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyFile {
    vars: Vec<String>,
    monomials: Vec<MonomialEntry>,
    #[serde(default)]
    intervals: Option<Vec<IntervalEntry>>,
}

/// Parses `{"vars": [..], "monomials": [{"coef", "exponents"}], "intervals": [..]}`.
/// Intervals are `{"lo", "hi", "lo_strict"?, "hi_strict"?}` or `{"p"}` and
/// default to `[0, 1]`.
pub fn parse_poly_file(text: &str) -> Result<PolyProblem> {
    let file: PolyFile = serde_json::from_str(text)?;
    let monomials = file
        .monomials
        .iter()
        .map(|m| {
            Ok(Monomial {
                coef: rational::parse(&m.coef)?,
                exponents: m.exponents.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let n = file.vars.len();
    let polynomial = Polynomial::new(file.vars, monomials)?;
    let intervals = match file.intervals {
        None => vec![Interval::closed(int(0), int(1))?; n],
        Some(entries) => {
            if entries.len() != n {
                return Err(Error::GadgetParams(format!("{} intervals for {n} variables", entries.len())));
            }
            entries
                .iter()
                .map(|e| match (&e.p, &e.lo, &e.hi) {
                    (Some(p), None, None) => Ok(Interval::point(rational::parse(p)?)),
                    (None, Some(lo), Some(hi)) => {
                        Interval::new(rational::parse(lo)?, e.lo_strict, rational::parse(hi)?, e.hi_strict)
                    }
                    _ => Err(Error::GadgetParams("interval needs \"p\" or \"lo\" and \"hi\"".into())),
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(PolyProblem { polynomial, intervals })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolyModel {
    pub encoding: PolyEncoding,
    /// Per variable, the edges carrying its value.
    pub var_edges: Vec<Vec<Edge>>,
    /// Per variable, the edges carrying one minus its value.
    pub complement_edges: Vec<Vec<Edge>>,
}

impl PolyModel {
    /// The chain with variable `j` at `xs[j]`; the probability of reaching
    /// `S` from `v0` is then `(P(xs) - offset) / scale`.
    pub fn chain_at(&self, model: &AimcModel, xs: &[Rational]) -> Result<MarkovChain> {
        chain_with(model, &self.var_edges, &self.complement_edges, xs)
    }
}

/// Builds the model in which `v0` branches with probability `alpha_i` into
/// a chain realizing `Q_i` (each step continues with the factor's value and
/// otherwise falls to `F`). Some point of the box has `P >= tau` iff some
/// refinement reaches `S` from `v0` with probability at least
/// `(tau - offset) / scale`.
pub fn encode_polynomial(p: &Polynomial, intervals: &[Interval], tau: &Rational) -> Result<(AimcModel, Query, PolyModel)> {
    let n = p.vars.len();
    if intervals.len() != n {
        return Err(Error::GadgetParams(format!("{} intervals for {n} variables", intervals.len())));
    }
    if let Some(i) = intervals.iter().find(|i| !i.within_unit()) {
        return Err(Error::GadgetParams(format!("interval {i} is not inside [0,1]")));
    }
    let encoding = rewrite_polynomial(p);
    let threshold = (tau - &encoding.offset) / &encoding.scale;
    if threshold.is_negative() || threshold > Rational::one() {
        return Err(Error::TrivialThreshold {
            threshold: rational::format(&threshold),
            trivially_true: threshold.is_negative(),
        });
    }
    let mut names = vec!["v0".to_string(), "S".to_string(), "F".to_string()];
    for (i, t) in encoding.terms.iter().enumerate() {
        names.extend((0..t.factors.len()).map(|k| format!("t{}.{k}", i + 1)));
    }
    let mut model = AimcModel::new(names)?;
    let mut var_edges = vec![Vec::new(); n];
    let mut complement_edges = vec![Vec::new(); n];
    let mut residual = Rational::one();
    for (i, t) in encoding.terms.iter().enumerate() {
        model.add_transition("v0", &format!("t{}.0", i + 1), Interval::point(t.alpha.clone()))?;
        residual -= &t.alpha;
        for (k, f) in t.factors.iter().enumerate() {
            let here = format!("t{}.{k}", i + 1);
            let next = if k + 1 == t.factors.len() {
                "S".to_string()
            } else {
                format!("t{}.{}", i + 1, k + 1)
            };
            let j = f.var();
            let (x_target, c_target) = match f {
                Factor::X(_) => (next.as_str(), "F"),
                Factor::OneMinus(_) => ("F", next.as_str()),
            };
            let x_interval = intervals[j].clone();
            let c_interval = x_interval.complement();
            if !(x_interval.as_point().is_some_and(Zero::is_zero)) {
                var_edges[j].push(model.add_transition(&here, x_target, x_interval)?);
            }
            if !(c_interval.as_point().is_some_and(Zero::is_zero)) {
                complement_edges[j].push(model.add_transition(&here, c_target, c_interval)?);
            }
        }
    }
    if !residual.is_zero() {
        model.add_transition("v0", "F", Interval::point(residual))?;
    }
    model.add_transition("S", "S", Interval::point(int(1)))?;
    model.add_transition("F", "F", Interval::point(int(1)))?;
    for (j, edges) in var_edges.iter().enumerate() {
        if intervals[j].as_point().is_some() {
            continue;
        }
        for e in &edges[1.min(edges.len())..] {
            let (a, b) = model.edge_names(edges[0]);
            let (c, d) = model.edge_names(*e);
            let (a, b, c, d) = (a.to_string(), b.to_string(), c.to_string(), d.to_string());
            model.add_constraint((&a, &b), (&c, &d))?;
        }
    }
    let query = Query::new("v0", "S", Relation::Ge, threshold, None)?;
    Ok((
        model,
        query,
        PolyModel {
            encoding,
            var_edges,
            complement_edges,
        },
    ))
}
