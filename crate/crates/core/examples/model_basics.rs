//! Builds a small interval model, ties two edges together and checks a
//! refinement against it.

use aimc::model::{refines, to_json, validate, AimcModel, Interval, MarkovChain, Query, Relation};
use aimc::rational::{int, ratio};
use aimc::Edge;

fn main() -> aimc::Result<()> {
    let mut m = AimcModel::new(["s", "a", "b", "t"])?;
    m.add_transition("s", "a", Interval::closed(ratio(1, 4), ratio(3, 4))?)?;
    m.add_transition("s", "b", Interval::closed(ratio(1, 4), ratio(3, 4))?)?;
    m.add_transition("a", "t", Interval::closed(ratio(1, 2), int(1))?)?;
    m.add_transition("a", "s", Interval::closed(int(0), ratio(1, 2))?)?;
    m.add_transition("b", "t", Interval::closed(ratio(1, 2), int(1))?)?;
    m.add_transition("b", "s", Interval::closed(int(0), ratio(1, 2))?)?;
    m.add_transition("t", "t", Interval::point(int(1)))?;
    // a and b must return to s with the same probability
    m.add_constraint(("a", "s"), ("b", "s"))?;
    println!("problems: {:?}", validate(&m));

    let entries = [
        (Edge::new(0, 1), ratio(1, 3)),
        (Edge::new(0, 2), ratio(2, 3)),
        (Edge::new(1, 3), ratio(4, 5)),
        (Edge::new(1, 0), ratio(1, 5)),
        (Edge::new(2, 3), ratio(4, 5)),
        (Edge::new(2, 0), ratio(1, 5)),
        (Edge::new(3, 3), int(1)),
    ];
    let mc = MarkovChain::new(m.vertices().to_vec(), entries)?;
    println!("refines: {}", refines(&mc, &m)?);

    let q = Query::new("s", "t", Relation::Ge, ratio(9, 10), None)?;
    println!("{}", to_json(&m, Some(&q)));
    Ok(())
}
