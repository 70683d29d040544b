use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{AimcModel, Interval, Query, Relation};
use crate::rational::{int, Rational};

/// A 3-CNF formula. Literals are signed 1-based variable indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cnf {
    pub num_vars: usize,
    pub clauses: Vec<[i64; 3]>,
}

impl Cnf {
    /// Clauses with one or two literals are padded by repeating their last
    /// literal.
    pub fn new(num_vars: usize, clauses: Vec<Vec<i64>>) -> Result<Self> {
        let mut out = Vec::with_capacity(clauses.len());
        for (i, clause) in clauses.into_iter().enumerate() {
            if clause.is_empty() || clause.len() > 3 {
                return Err(Error::Cnf(format!("clause {} has {} literals", i + 1, clause.len())));
            }
            for &l in &clause {
                if l == 0 || l.unsigned_abs() as usize > num_vars {
                    return Err(Error::Cnf(format!("literal {l} out of range 1..={num_vars}")));
                }
            }
            let last = *clause.last().expect("nonempty");
            let padded = [clause[0], *clause.get(1).unwrap_or(&last), *clause.get(2).unwrap_or(&last)];
            out.push(padded);
        }
        Ok(Cnf {
            num_vars,
            clauses: out,
        })
    }

    pub fn eval(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.iter().any(|&l| {
                let v = assignment[l.unsigned_abs() as usize - 1];
                if l > 0 {
                    v
                } else {
                    !v
                }
            })
        })
    }

    pub fn to_dimacs(&self) -> String {
        let mut s = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            let _ = writeln!(s, "{} {} {} 0", c[0], c[1], c[2]);
        }
        s
    }
}

/// Parses DIMACS CNF: `c` comment lines, a `p cnf VARS CLAUSES` header, and
/// zero-terminated clauses that may span lines. A `%` line ends the input.
pub fn parse_dimacs(text: &str) -> Result<Cnf> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if let Some(rest) = line.strip_prefix('p') {
            let fields: Vec<&str> = rest.split_whitespace().collect();
            match fields.as_slice() {
                ["cnf", v, c] => {
                    let v = v.parse().map_err(|_| Error::Cnf(format!("bad variable count {v:?}")))?;
                    let c = c.parse().map_err(|_| Error::Cnf(format!("bad clause count {c:?}")))?;
                    header = Some((v, c));
                }
                _ => return Err(Error::Cnf(format!("bad header {line:?}"))),
            }
            continue;
        }
        if header.is_none() {
            return Err(Error::Cnf("clause before the header".into()));
        }
        for tok in line.split_whitespace() {
            let l: i64 = tok.parse().map_err(|_| Error::Cnf(format!("bad literal {tok:?}")))?;
            if l == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                current.push(l);
            }
        }
    }
    if !current.is_empty() {
        clauses.push(current);
    }
    let (num_vars, num_clauses) = header.ok_or_else(|| Error::Cnf("missing header".into()))?;
    if clauses.len() != num_clauses {
        return Err(Error::Cnf(format!("header announces {num_clauses} clauses, found {}", clauses.len())));
    }
    Cnf::new(num_vars, clauses)
}

fn literal_vertex(l: i64) -> String {
    if l > 0 {
        format!("x{l}")
    } else {
        format!("nx{}", -l)
    }
}

/// The model whose source `v0` reaches `S` with probability one under some
/// refinement iff the formula is satisfiable. Vertices in order: literals
/// `x1..xm`, `nx1..nxm`, clauses `phi1..phik`, `S`, `F`, and the chain
/// `v0..vm`.
pub fn encode_3sat(cnf: &Cnf) -> Result<(AimcModel, Query)> {
    let m = cnf.num_vars;
    let k = cnf.clauses.len();
    let mut names: Vec<String> = Vec::with_capacity(3 * m + k + 3);
    names.extend((1..=m).map(|i| format!("x{i}")));
    names.extend((1..=m).map(|i| format!("nx{i}")));
    names.extend((1..=k).map(|j| format!("phi{j}")));
    names.push("S".into());
    names.push("F".into());
    names.extend((0..=m).map(|i| format!("v{i}")));
    let mut model = AimcModel::new(names)?;
    let unit = Interval::closed(int(0), int(1))?;
    let one = Interval::point(int(1));
    for i in 1..=m {
        let (prev, next) = (format!("v{}", i - 1), format!("v{i}"));
        let (x, nx) = (format!("x{i}"), format!("nx{i}"));
        model.add_transition(&prev, &x, unit.clone())?;
        model.add_transition(&prev, &nx, unit.clone())?;
        model.add_transition(&x, &next, unit.clone())?;
        model.add_transition(&x, "F", unit.clone())?;
        model.add_transition(&nx, &next, unit.clone())?;
        model.add_transition(&nx, "F", unit.clone())?;
        model.add_constraint((&prev, &x), (&x, &next))?;
        model.add_constraint((&prev, &x), (&nx, "F"))?;
    }
    let share = Interval::point(Rational::new(1.into(), (k as i64 + 1).into()));
    let last = format!("v{m}");
    model.add_transition(&last, "S", share.clone())?;
    for (j, clause) in cnf.clauses.iter().enumerate() {
        let phi = format!("phi{}", j + 1);
        model.add_transition(&last, &phi, share.clone())?;
        let mut seen = Vec::new();
        for t in clause.iter().map(|&l| literal_vertex(l)) {
            if !seen.contains(&t) {
                model.add_transition(&phi, &t, unit.clone())?;
                seen.push(t);
            }
        }
    }
    model.add_transition("S", "S", one.clone())?;
    model.add_transition("F", "F", one)?;
    let query = Query::new("v0", "S", Relation::Ge, int(1), None)?;
    Ok((model, query))
}
