//! Brute-force optimisation over refinements, on a lattice or by
//! seeded sampling.

use aimc::model::{AimcModel, Interval, Query, Relation};
use aimc::oracle::{brute_force_opt, OracleMode, OracleOptions, DEFAULT_SEED};
use aimc::rational::{format, int, ratio};

fn main() -> aimc::Result<()> {
    let mut m = AimcModel::new(["s", "a", "t", "f"])?;
    m.add_transition("s", "a", Interval::closed(ratio(1, 4), ratio(3, 4))?)?;
    m.add_transition("s", "f", Interval::closed(ratio(1, 4), ratio(3, 4))?)?;
    m.add_transition("a", "t", Interval::closed(int(0), ratio(1, 2))?)?;
    m.add_transition("a", "s", Interval::closed(ratio(1, 2), int(1))?)?;
    m.add_transition("t", "t", Interval::point(int(1)))?;
    m.add_transition("f", "f", Interval::point(int(1)))?;

    for rel in [Relation::Ge, Relation::Le] {
        let q = Query::new("s", "t", rel, int(0), None)?;
        for mode in [
            OracleMode::Grid { resolution: 8 },
            OracleMode::Sample {
                count: 200,
                seed: DEFAULT_SEED,
                denominator: 64,
            },
        ] {
            let r = brute_force_opt(&m, &q, mode, OracleOptions::default())?;
            println!("{} {:?}: {} after {} chains", rel.as_str(), r.mode, format(&r.best_prob), r.evaluations);
        }
    }
    Ok(())
}
