//! SMT-LIB 2 emission (QF_NRA).

use std::fmt::Write;

use num_traits::Signed;

use crate::rational::Rational;

use super::formula::{Formula, Term};

/// Integers bare, fractions as `(/ p q)`, negatives wrapped in `(- ...)`.
pub fn literal(q: &Rational) -> String {
    if q.is_negative() {
        return format!("(- {})", literal(&-q));
    }
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("(/ {} {})", q.numer(), q.denom())
    }
}

pub fn term(t: &Term) -> String {
    match t {
        Term::Const(q) => literal(q),
        Term::Var(v) => v.clone(),
        Term::Sum(ts) if ts.is_empty() => "0".into(),
        Term::Product(ts) if ts.is_empty() => "1".into(),
        Term::Sum(ts) | Term::Product(ts) if ts.len() == 1 => term(&ts[0]),
        Term::Sum(ts) => format!("(+ {})", join(ts)),
        Term::Product(ts) => format!("(* {})", join(ts)),
    }
}

fn join(ts: &[Term]) -> String {
    ts.iter().map(term).collect::<Vec<_>>().join(" ")
}

/// A complete script: variable notes as comments, declarations, one
/// assertion, `check-sat` and `get-model`. Output is a pure function of
/// the formula.
pub fn emit_smtlib(f: &Formula) -> String {
    let mut out = String::new();
    for (k, v) in &f.notes {
        writeln!(out, "; {k}: {v}").expect("write to string");
    }
    out.push_str("(set-logic QF_NRA)\n");
    for v in &f.variables {
        writeln!(out, "(declare-const {v} Real)").expect("write to string");
    }
    let atoms = f.body.atoms();
    let atom = |(c, l, r): &(super::formula::Cmp, &Term, &Term)| format!("({} {} {})", c.smt_symbol(), term(l), term(r));
    match atoms.len() {
        0 => out.push_str("(assert true)\n"),
        1 => writeln!(out, "(assert {})", atom(&atoms[0])).expect("write to string"),
        _ => {
            out.push_str("(assert (and\n");
            for a in &atoms {
                writeln!(out, "  {}", atom(a)).expect("write to string");
            }
            out.push_str("))\n");
        }
    }
    out.push_str("(check-sat)\n(get-model)\n");
    out
}
