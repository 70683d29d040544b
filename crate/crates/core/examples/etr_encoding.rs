//! Encodes a reachability query as an existential sentence over the
//! reals and prints it in SMT-LIB form. Set AIMC_SOLVER to a command
//! template such as "z3 {file}" to run a solver on it.

use std::time::Duration;

use aimc::etr::{build_formula_fixed, build_formula_full, emit_smtlib, eval_formula, solve_external};
use aimc::model::{AimcModel, Interval, MarkovChain, Query, Relation};
use aimc::rational::{int, ratio};
use aimc::Edge;

fn main() -> aimc::Result<()> {
    let mut m = AimcModel::new(["s", "t", "f"])?;
    m.add_transition("s", "t", Interval::closed(ratio(1, 4), ratio(3, 4))?)?;
    m.add_transition("s", "f", Interval::closed(ratio(1, 4), ratio(3, 4))?)?;
    m.add_transition("t", "t", Interval::point(int(1)))?;
    m.add_transition("f", "f", Interval::point(int(1)))?;
    let q = Query::new("s", "t", Relation::Ge, ratio(2, 3), None)?;

    let full = build_formula_full(&m, &q)?;
    let fixed = build_formula_fixed(&m, &q)?;
    println!("full: {} variables, fixed: {} variables", full.variable_count(), fixed.variable_count());
    println!("{}", emit_smtlib(&fixed.formula));

    for p in [ratio(1, 2), ratio(3, 4)] {
        let mc = MarkovChain::new(
            m.vertices().to_vec(),
            [
                (Edge::new(0, 1), p.clone()),
                (Edge::new(0, 2), int(1) - &p),
                (Edge::new(1, 1), int(1)),
                (Edge::new(2, 2), int(1)),
            ],
        )?;
        let a = fixed.assignment(&m, &mc)?;
        println!("s -> t at {p}: sentence holds {}", eval_formula(&fixed.formula, &a)?);
    }

    if let Ok(template) = std::env::var("AIMC_SOLVER") {
        println!("{:?}", solve_external(&fixed.formula, &template, Duration::from_secs(30))?);
    }
    Ok(())
}
