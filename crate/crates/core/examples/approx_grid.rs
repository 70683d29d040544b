//! Approximate reachability on an epsilon-known model by searching a
//! rational grid.

use aimc::approx::{approx_decide, rational_distance, robustness_bound, ApproxOptions};
use aimc::model::{AimcModel, Interval, Query, Relation};
use aimc::rational::{format, int, ratio, to_f64};

fn main() -> aimc::Result<()> {
    let mut m = AimcModel::new(["s", "a", "t", "f"])?;
    m.add_transition("s", "a", Interval::closed(ratio(1, 5), ratio(4, 5))?)?;
    m.add_transition("s", "f", Interval::closed(ratio(1, 5), ratio(4, 5))?)?;
    m.add_transition("a", "t", Interval::closed(ratio(1, 3), ratio(2, 3))?)?;
    m.add_transition("a", "s", Interval::closed(ratio(1, 3), ratio(2, 3))?)?;
    m.add_transition("t", "t", Interval::point(int(1)))?;
    m.add_transition("f", "f", Interval::point(int(1)))?;

    let gap = ratio(1, 10);
    let d = rational_distance(&ratio(1, 5), &gap, m.len())?;
    println!("d = {}, error bound {:.4}", format(&d), to_f64(&robustness_bound(&ratio(1, 5), &d, m.len())?));

    for tau in [ratio(3, 5), ratio(4, 5)] {
        let q = Query::new("s", "t", Relation::Ge, tau.clone(), Some(gap.clone()))?;
        let ans = approx_decide(&m, &q, ApproxOptions::default())?;
        print!(
            "tau {tau}: {} after {} of {} grid points (spacing {})",
            ans.decision.as_str(),
            ans.grid_chains_visited,
            ans.grid_cardinality,
            ans.spacing
        );
        match ans.witness_prob {
            Some(p) => println!(", witness reaches t with {}", format(&p)),
            None => println!(),
        }
    }
    Ok(())
}
