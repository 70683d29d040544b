//! Qualitative reachability on the CNF gadget: a refinement reaches the
//! sink almost surely iff the formula is satisfiable.

use aimc::gadgets::{encode_3sat, parse_dimacs};
use aimc::qualitative::qual_decide;

fn main() -> aimc::Result<()> {
    for text in ["p cnf 3 3\n1 -2 3 0\n-1 2 0\n-3 0\n", "p cnf 1 2\n1 0\n-1 0\n"] {
        let cnf = parse_dimacs(text)?;
        let (m, q) = encode_3sat(&cnf)?;
        let ans = qual_decide(&m, &q)?;
        println!(
            "{} clauses, {} vertices: satisfiable {} ({} structures checked)",
            cnf.clauses.len(),
            m.len(),
            ans.decision,
            ans.structures_checked
        );
        if let Some(w) = ans.witness_structure {
            println!("  witness uses {} edges", w.edges().len());
        }
    }
    Ok(())
}
