//! Encodings of threshold reachability queries as existential sentences.
//!
//! The fixed encoding keeps one reachability variable per vertex of `U`
//! (the source, the target and every vertex with an interval-valued row)
//! and eliminates the remaining vertices `W` by precomputed first-passage
//! probabilities. The full encoding keeps one variable per vertex.
//!
//! In the fixed encoding each row's untied residual edge is written as one
//! minus the rest of its row, so it needs no variable of its own.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_traits::{One, Signed, Zero};

use crate::completion::choose_slack;
use crate::error::Result;
use crate::exact::reach_values;
use crate::graph::coreach_indices;
use crate::linalg;
use crate::model::{
    constraint_classes, AimcModel, ConstraintClasses, Edge, EdgeValue, Interval, MarkovChain, Query, Relation,
};
use crate::rational::{self, Rational};

use super::formula::{Assignment, Cmp, Formula, Prop, Term};

/// An affine polynomial over constraint-class variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinPoly {
    pub constant: Rational,
    pub coeffs: BTreeMap<usize, Rational>,
}

impl LinPoly {
    pub fn constant(c: Rational) -> Self {
        LinPoly {
            constant: c,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn var(class: usize) -> Self {
        LinPoly {
            constant: Rational::zero(),
            coeffs: BTreeMap::from([(class, Rational::one())]),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.coeffs.is_empty()
    }

    /// `self += k * other`, dropping coefficients that cancel.
    pub fn add_scaled(&mut self, other: &LinPoly, k: &Rational) {
        self.constant += &other.constant * k;
        for (c, a) in &other.coeffs {
            let entry = self.coeffs.entry(*c).or_insert_with(Rational::zero);
            *entry += a * k;
            if entry.is_zero() {
                self.coeffs.remove(c);
            }
        }
    }

    pub fn eval(&self, values: &BTreeMap<usize, Rational>) -> Rational {
        let mut acc = self.constant.clone();
        for (c, a) in &self.coeffs {
            acc += a * &values[c];
        }
        acc
    }

    pub fn to_term(&self, name: impl Fn(usize) -> String) -> Term {
        let mut parts = Vec::new();
        if !self.constant.is_zero() {
            parts.push(Term::Const(self.constant.clone()));
        }
        for (c, a) in &self.coeffs {
            parts.push(if a.is_one() {
                Term::var(name(*c))
            } else {
                Term::Product(vec![Term::Const(a.clone()), Term::var(name(*c))])
            });
        }
        match parts.len() {
            0 => Term::Const(Rational::zero()),
            1 => parts.pop().expect("one part"),
            _ => Term::Sum(parts),
        }
    }
}

/// `U` and `W` (sorted vertex indices) and the first-passage
/// probabilities `alpha[(w, u)]` from `W` into `U` along `W`-internal
/// paths. Only nonzero entries are stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UwPartition {
    pub u: Vec<usize>,
    pub w: Vec<usize>,
    pub alpha: BTreeMap<(usize, usize), Rational>,
}

impl UwPartition {
    pub fn alpha(&self, w: usize, u: usize) -> Rational {
        self.alpha.get(&(w, u)).cloned().unwrap_or_else(Rational::zero)
    }
}

/// Class index to the affine expression replacing its variable.
type Substitution = BTreeMap<usize, LinPoly>;

fn poly_of(model: &AimcModel, classes: &ConstraintClasses, subst: &Substitution, e: Edge) -> LinPoly {
    match classes.value(model, e) {
        EdgeValue::Fixed(p) => LinPoly::constant(p),
        EdgeValue::Class(c) => subst.get(&c).cloned().unwrap_or_else(|| LinPoly::var(c)),
    }
}

/// Residual substitutions: for each row with an untied free edge, that
/// edge's class becomes one minus the rest of the row.
fn residuals(model: &AimcModel, classes: &ConstraintClasses) -> BTreeMap<usize, (usize, LinPoly)> {
    let mut out = BTreeMap::new();
    for u in 0..model.len() {
        let Some(slack) = choose_slack(model, classes, u) else { continue };
        let mut rest = LinPoly::constant(Rational::one());
        for (e, _) in model.row(u) {
            if e != slack {
                rest.add_scaled(&poly_of(model, classes, &Substitution::new(), e), &-Rational::one());
            }
        }
        let c = classes.class_of(slack).expect("free edge has a class");
        out.insert(u, (c, rest));
    }
    out
}

fn has_free_edge(model: &AimcModel, classes: &ConstraintClasses, v: usize) -> bool {
    model
        .row(v)
        .any(|(e, _)| matches!(classes.value(model, e), EdgeValue::Class(_)))
}

pub fn uw_partition(model: &AimcModel, q: &Query) -> Result<UwPartition> {
    let classes = constraint_classes(model);
    let s = model.vertex(&q.source)?;
    let t = model.vertex(&q.target)?;
    Ok(partition_with(model, &classes, s, t))
}

fn partition_with(model: &AimcModel, classes: &ConstraintClasses, s: usize, t: usize) -> UwPartition {
    let n = model.len();
    let in_u: Vec<bool> = (0..n)
        .map(|v| v == s || v == t || has_free_edge(model, classes, v))
        .collect();
    let u: Vec<usize> = (0..n).filter(|&v| in_u[v]).collect();
    let w: Vec<usize> = (0..n).filter(|&v| !in_u[v]).collect();
    let mut pred: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); n];
    for &x in &w {
        for (e, _) in model.row(x) {
            if let EdgeValue::Fixed(p) = classes.value(model, e) {
                if p.is_positive() {
                    pred[e.to].push((x, p));
                }
            }
        }
    }
    let mut alpha = BTreeMap::new();
    for &target in &u {
        // W vertices with a W-internal path to `target`; the others have
        // alpha = 0 (minimal solution).
        let mut live = vec![false; n];
        let mut queue = VecDeque::from([target]);
        while let Some(v) = queue.pop_front() {
            if v != target && in_u[v] {
                continue;
            }
            for (x, _) in &pred[v] {
                if !live[*x] {
                    live[*x] = true;
                    queue.push_back(*x);
                }
            }
        }
        let rows: Vec<usize> = w.iter().copied().filter(|&x| live[x]).collect();
        if rows.is_empty() {
            continue;
        }
        let pos: BTreeMap<usize, usize> = rows.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let k = rows.len();
        let mut a = vec![vec![Rational::zero(); k]; k];
        let mut b = vec![Rational::zero(); k];
        for (i, &x) in rows.iter().enumerate() {
            a[i][i] += Rational::one();
            for (e, _) in model.row(x) {
                let EdgeValue::Fixed(p) = classes.value(model, e) else { continue };
                if e.to == target {
                    b[i] += &p;
                } else if let Some(&j) = pos.get(&e.to) {
                    a[i][j] -= &p;
                }
            }
        }
        let sol = linalg::solve(a, b).expect("W-internal system over live vertices is nonsingular");
        for (x, val) in rows.into_iter().zip(sol) {
            if !val.is_zero() {
                alpha.insert((x, target), val);
            }
        }
    }
    UwPartition { u, w, alpha }
}

/// `beta[(u1, u2)]`: probability of moving from `u1` to `u2` through `W`
/// only, affine in the class variables. Zero polynomials are omitted.
pub fn beta_polys(model: &AimcModel, part: &UwPartition) -> BTreeMap<(usize, usize), LinPoly> {
    beta_with(model, &constraint_classes(model), &Substitution::new(), part)
}

fn beta_with(
    model: &AimcModel,
    classes: &ConstraintClasses,
    subst: &Substitution,
    part: &UwPartition,
) -> BTreeMap<(usize, usize), LinPoly> {
    let in_u: BTreeSet<usize> = part.u.iter().copied().collect();
    let mut out: BTreeMap<(usize, usize), LinPoly> = BTreeMap::new();
    for &u1 in &part.u {
        for (e, _) in model.row(u1) {
            let p = poly_of(model, classes, subst, e);
            if p.is_zero() {
                continue;
            }
            if in_u.contains(&e.to) {
                out.entry((u1, e.to)).or_default().add_scaled(&p, &Rational::one());
            } else {
                for &u2 in &part.u {
                    let a = part.alpha(e.to, u2);
                    if !a.is_zero() {
                        out.entry((u1, u2)).or_default().add_scaled(&p, &a);
                    }
                }
            }
        }
    }
    out.retain(|_, p| !p.is_zero());
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EncodingMode {
    Fixed,
    Full,
}

impl EncodingMode {
    pub fn as_str(self) -> &'static str {
        match self {
            EncodingMode::Fixed => "fixed",
            EncodingMode::Full => "full",
        }
    }
}

/// An encoded query: the sentence, its three parts, and the variable
/// bookkeeping needed to map refinements to assignments.
#[derive(Clone, Debug)]
pub struct Encoding {
    pub mode: EncodingMode,
    pub formula: Formula,
    /// Chain sanity: row sums and class intervals.
    pub phi1: Prop,
    /// Reachability equations over the `y` variables.
    pub phi2: Prop,
    /// The threshold comparison on the source.
    pub phi3: Prop,
    /// Class index to x-variable name.
    pub x_vars: BTreeMap<usize, String>,
    /// Vertex index to y-variable name.
    pub y_vars: BTreeMap<usize, String>,
    pub partition: Option<UwPartition>,
    target: usize,
}

impl Encoding {
    pub fn variable_count(&self) -> usize {
        self.x_vars.len() + self.y_vars.len()
    }

    /// The assignment induced by a refinement: class values, and the exact
    /// reachability probabilities of the vertices carrying y-variables.
    pub fn assignment(&self, model: &AimcModel, mc: &MarkovChain) -> Result<Assignment> {
        let classes = constraint_classes(model);
        let mut a = Assignment::new();
        for (c, name) in &self.x_vars {
            let e = classes.get(*c).members[0];
            let (from, to) = model.edge_names(e);
            a.insert(name.clone(), mc.prob(mc_edge(mc, from, to)?));
        }
        let entries: Vec<(Edge, &Rational)> = mc.entries().collect();
        let t = mc.vertex(model.name(self.target))?;
        let values = reach_values(mc.len(), &entries, t);
        for (v, name) in &self.y_vars {
            a.insert(name.clone(), values[mc.vertex(model.name(*v))?].clone());
        }
        Ok(a)
    }
}

fn mc_edge(mc: &MarkovChain, from: &str, to: &str) -> Result<Edge> {
    Ok(Edge::new(mc.vertex(from)?, mc.vertex(to)?))
}

fn x_name(c: usize) -> String {
    format!("x{c}")
}

fn y_name(v: usize) -> String {
    format!("y{v}")
}

fn constant(q: &Rational) -> Term {
    Term::Const(q.clone())
}

fn interval_atoms(i: &Interval, x: &Term, atoms: &mut Vec<Prop>) {
    let lo = if i.lo_strict { Cmp::Lt } else { Cmp::Le };
    let hi = if i.hi_strict { Cmp::Lt } else { Cmp::Le };
    atoms.push(Prop::atom(lo, constant(&i.lo), x.clone()));
    atoms.push(Prop::atom(hi, x.clone(), constant(&i.hi)));
    if i.lo.is_negative() {
        atoms.push(Prop::atom(Cmp::Le, constant(&Rational::zero()), x.clone()));
    }
    if i.hi > Rational::one() {
        atoms.push(Prop::atom(Cmp::Le, x.clone(), constant(&Rational::one())));
    }
}

/// Row sums and interval membership for each class variable. Rows in
/// `residual` have their sum built in; their residual term is bounded
/// instead.
fn phi1(
    model: &AimcModel,
    classes: &ConstraintClasses,
    x_vars: &BTreeMap<usize, String>,
    residual: &BTreeMap<usize, (usize, LinPoly)>,
) -> Prop {
    let mut atoms = Vec::new();
    let name = |c: usize| x_vars[&c].clone();
    for v in 0..model.len() {
        if let Some((c, rest)) = residual.get(&v) {
            let i = classes.get(*c).interval.as_ref().expect("residual class has an interval");
            interval_atoms(i, &rest.to_term(name), &mut atoms);
            continue;
        }
        let mut sum = LinPoly::default();
        for (e, _) in model.row(v) {
            sum.add_scaled(&poly_of(model, classes, &Substitution::new(), e), &Rational::one());
        }
        if sum.coeffs.is_empty() && sum.constant.is_one() {
            continue;
        }
        atoms.push(Prop::atom(Cmp::Eq, sum.to_term(name), constant(&Rational::one())));
    }
    for (&c, x) in x_vars {
        let class = classes.get(c);
        let bounds: Vec<_> = match &class.interval {
            Some(i) => vec![i.clone()],
            // An empty class: keep every member bound so the conjunction
            // is unsatisfiable.
            None => class.members.iter().map(|e| model.interval(*e)).collect(),
        };
        for i in bounds {
            interval_atoms(&i, &Term::var(x), &mut atoms);
        }
    }
    Prop::And(atoms)
}

/// Range bounds on each y-variable, and `y = 0` for vertices that cannot
/// reach the target in any refinement.
fn y_side_conditions(model: &AimcModel, classes: &ConstraintClasses, t: usize, y_vars: &BTreeMap<usize, String>) -> Vec<Prop> {
    let possible = model.transitions().map(|(e, _)| e).filter(|&e| {
        classes
            .effective_interval(model, e)
            .is_some_and(|i| i.admits_positive())
    });
    let coreach = coreach_indices(model.len(), possible, t);
    let mut atoms = Vec::new();
    for (&v, y) in y_vars {
        if v == t {
            continue;
        }
        if coreach[v] {
            atoms.push(Prop::atom(Cmp::Le, constant(&Rational::zero()), Term::var(y)));
            atoms.push(Prop::atom(Cmp::Le, Term::var(y), constant(&Rational::one())));
        } else {
            atoms.push(Prop::atom(Cmp::Eq, Term::var(y), constant(&Rational::zero())));
        }
    }
    atoms
}

fn phi3(q: &Query, y_source: &str) -> Prop {
    let cmp = match q.relation {
        Relation::Le => Cmp::Le,
        Relation::Ge => Cmp::Ge,
    };
    Prop::atom(cmp, Term::var(y_source), constant(&q.threshold))
}

/// `y(v) = sum_k coeff_k * y(v_k)` with affine coefficients.
fn linear_equation(lhs: &str, rhs: &[(LinPoly, String)]) -> Prop {
    let mut parts = Vec::new();
    for (coef, y) in rhs {
        let c = coef.to_term(x_name);
        parts.push(match c {
            Term::Const(k) if k.is_one() => Term::var(y),
            c => Term::Product(vec![c, Term::var(y)]),
        });
    }
    let rhs = match parts.len() {
        0 => Term::Const(Rational::zero()),
        1 => parts.pop().expect("one part"),
        _ => Term::Sum(parts),
    };
    Prop::atom(Cmp::Eq, Term::var(lhs), rhs)
}

fn describe_class(model: &AimcModel, classes: &ConstraintClasses, c: usize) -> String {
    let members: Vec<String> = classes
        .get(c)
        .members
        .iter()
        .map(|e| {
            let (a, b) = model.edge_names(*e);
            format!("{a} -> {b}")
        })
        .collect();
    let interval = match &classes.get(c).interval {
        Some(i) => i.to_string(),
        None => "empty".to_string(),
    };
    format!("probability of {} in {interval}", members.join(", "))
}

fn encode(model: &AimcModel, q: &Query, mode: EncodingMode) -> Result<Encoding> {
    let classes = constraint_classes(model);
    let s = model.vertex(&q.source)?;
    let t = model.vertex(&q.target)?;
    let residual = match mode {
        EncodingMode::Fixed => residuals(model, &classes),
        EncodingMode::Full => BTreeMap::new(),
    };
    let subst: Substitution = residual.values().cloned().collect();
    let x_vars: BTreeMap<usize, String> = (0..classes.len())
        .filter(|&c| classes.get(c).point().is_none() && !subst.contains_key(&c))
        .map(|c| (c, x_name(c)))
        .collect();
    let (y_vertices, partition) = match mode {
        EncodingMode::Fixed => {
            let part = partition_with(model, &classes, s, t);
            (part.u.clone(), Some(part))
        }
        EncodingMode::Full => ((0..model.len()).collect(), None),
    };
    let y_vars: BTreeMap<usize, String> = y_vertices.iter().map(|&v| (v, y_name(v))).collect();

    let phi1 = phi1(model, &classes, &x_vars, &residual);
    let mut eqs = vec![Prop::atom(Cmp::Eq, Term::var(&y_vars[&t]), constant(&Rational::one()))];
    match &partition {
        Some(part) => {
            let beta = beta_with(model, &classes, &subst, part);
            for &u in &part.u {
                if u == t {
                    continue;
                }
                let rhs: Vec<(LinPoly, String)> = beta
                    .range((u, 0)..(u + 1, 0))
                    .map(|(&(_, u2), p)| (p.clone(), y_vars[&u2].clone()))
                    .collect();
                eqs.push(linear_equation(&y_vars[&u], &rhs));
            }
        }
        None => {
            for v in 0..model.len() {
                if v == t {
                    continue;
                }
                let rhs: Vec<(LinPoly, String)> = model
                    .row(v)
                    .map(|(e, _)| (poly_of(model, &classes, &subst, e), y_vars[&e.to].clone()))
                    .filter(|(p, _)| !p.is_zero())
                    .collect();
                eqs.push(linear_equation(&y_vars[&v], &rhs));
            }
        }
    }
    eqs.extend(y_side_conditions(model, &classes, t, &y_vars));
    let phi2 = Prop::And(eqs);
    let phi3 = phi3(q, &y_vars[&s]);

    let order: Vec<String> = x_vars.values().chain(y_vars.values()).cloned().collect();
    let mut formula = Formula::new(order, Prop::And(vec![phi1.clone(), phi2.clone(), phi3.clone()]));
    for (&c, x) in &x_vars {
        formula.notes.insert(x.clone(), describe_class(model, &classes, c));
    }
    for (&v, y) in &y_vars {
        formula.notes.insert(
            y.clone(),
            format!("probability of reaching {} from {}", model.name(t), model.name(v)),
        );
    }
    formula.notes.insert(
        "query".into(),
        format!(
            "P({} -> {}) {} {}",
            model.name(s),
            model.name(t),
            q.relation.as_str(),
            rational::format(&q.threshold)
        ),
    );
    Ok(Encoding {
        mode,
        formula,
        phi1,
        phi2,
        phi3,
        x_vars,
        y_vars,
        partition,
        target: t,
    })
}

/// Encoding with reachability variables on `U` only.
pub fn build_formula_fixed(model: &AimcModel, q: &Query) -> Result<Encoding> {
    encode(model, q, EncodingMode::Fixed)
}

/// Encoding with a reachability variable for every vertex.
pub fn build_formula_full(model: &AimcModel, q: &Query) -> Result<Encoding> {
    encode(model, q, EncodingMode::Full)
}

pub fn build_formula(model: &AimcModel, q: &Query, mode: EncodingMode) -> Result<Encoding> {
    encode(model, q, mode)
}
