//! Existential sentences over the reals with exact rational constants.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

pub type Assignment = BTreeMap<String, Rational>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Const(Rational),
    Var(String),
    Sum(Vec<Term>),
    Product(Vec<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn eval(&self, a: &Assignment) -> Result<Rational> {
        Ok(match self {
            Term::Const(c) => c.clone(),
            Term::Var(v) => a.get(v).cloned().ok_or_else(|| Error::MissingVariable(v.clone()))?,
            Term::Sum(ts) => {
                let mut acc = Rational::zero();
                for t in ts {
                    acc += t.eval(a)?;
                }
                acc
            }
            Term::Product(ts) => {
                let mut acc = Rational::one();
                for t in ts {
                    acc *= t.eval(a)?;
                }
                acc
            }
        })
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Const(_) => {}
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Sum(ts) | Term::Product(ts) => ts.iter().for_each(|t| t.collect_vars(out)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Eq,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Cmp {
    pub fn holds(self, a: &Rational, b: &Rational) -> bool {
        match self {
            Cmp::Eq => a == b,
            Cmp::Lt => a < b,
            Cmp::Le => a <= b,
            Cmp::Gt => a > b,
            Cmp::Ge => a >= b,
        }
    }

    pub fn smt_symbol(self) -> &'static str {
        match self {
            Cmp::Eq => "=",
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Gt => ">",
            Cmp::Ge => ">=",
        }
    }
}

/// Quantifier-free body: comparisons joined by conjunction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Prop {
    Atom(Cmp, Term, Term),
    And(Vec<Prop>),
}

impl Prop {
    pub fn atom(cmp: Cmp, lhs: Term, rhs: Term) -> Prop {
        Prop::Atom(cmp, lhs, rhs)
    }

    pub fn eval(&self, a: &Assignment) -> Result<bool> {
        match self {
            Prop::Atom(cmp, l, r) => Ok(cmp.holds(&l.eval(a)?, &r.eval(a)?)),
            Prop::And(ps) => {
                for p in ps {
                    if !p.eval(a)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Prop::Atom(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            Prop::And(ps) => ps.iter().for_each(|p| p.collect_vars(out)),
        }
    }

    /// Atoms in left-to-right order, with nested conjunctions flattened.
    pub fn atoms(&self) -> Vec<(Cmp, &Term, &Term)> {
        let mut out = Vec::new();
        self.push_atoms(&mut out);
        out
    }

    fn push_atoms<'a>(&'a self, out: &mut Vec<(Cmp, &'a Term, &'a Term)>) {
        match self {
            Prop::Atom(c, l, r) => out.push((*c, l, r)),
            Prop::And(ps) => ps.iter().for_each(|p| p.push_atoms(out)),
        }
    }
}

/// A closed sentence `exists variables . body`. `notes` maps variables to
/// human-readable meanings and is carried into emitted scripts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Formula {
    pub variables: Vec<String>,
    pub body: Prop,
    pub notes: BTreeMap<String, String>,
}

impl Formula {
    /// Closes `body` over the given variable order. Variables referenced
    /// by the body but not listed are appended in sorted order.
    pub fn new(mut variables: Vec<String>, body: Prop) -> Formula {
        for v in body.variables() {
            if !variables.contains(&v) {
                variables.push(v);
            }
        }
        Formula {
            variables,
            body,
            notes: BTreeMap::new(),
        }
    }
}

/// Exact truth value of `f` under `a`; every quantified variable must be
/// assigned.
pub fn eval_formula(f: &Formula, a: &Assignment) -> Result<bool> {
    if let Some(v) = f.variables.iter().find(|v| !a.contains_key(*v)) {
        return Err(Error::MissingVariable(v.clone()));
    }
    f.body.eval(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn evaluates_polynomial_atoms() {
        // x * y + 1/2 >= 1
        let body = Prop::atom(
            Cmp::Ge,
            Term::Sum(vec![
                Term::Product(vec![Term::var("x"), Term::var("y")]),
                Term::Const(ratio(1, 2)),
            ]),
            Term::Const(int(1)),
        );
        let f = Formula::new(vec![], body);
        assert_eq!(f.variables, vec!["x", "y"]);
        let mut a = Assignment::new();
        a.insert("x".into(), ratio(1, 2));
        a.insert("y".into(), int(1));
        assert!(eval_formula(&f, &a).unwrap());
        a.insert("y".into(), ratio(1, 2));
        assert!(!eval_formula(&f, &a).unwrap());
        a.remove("x");
        assert!(matches!(eval_formula(&f, &a), Err(Error::MissingVariable(v)) if v == "x"));
    }

    #[test]
    fn boundary_comparisons() {
        let a = Assignment::from([("y".to_string(), ratio(1, 3))]);
        let at = |c| Prop::atom(c, Term::var("y"), Term::Const(ratio(1, 3))).eval(&a).unwrap();
        assert!(at(Cmp::Ge) && at(Cmp::Le) && at(Cmp::Eq));
        assert!(!at(Cmp::Gt) && !at(Cmp::Lt));
    }
}
