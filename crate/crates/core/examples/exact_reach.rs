//! Exact reachability probabilities of a Markov chain.

use aimc::exact::reach_prob_all;
use aimc::graph::structure_of;
use aimc::model::MarkovChain;
use aimc::qualitative::qual_known;
use aimc::rational::{format, int, ratio};
use aimc::Edge;

fn main() -> aimc::Result<()> {
    // a gambler's walk on 0..=4 with a fair coin
    let names: Vec<String> = (0..5).map(|i| format!("c{i}")).collect();
    let mut entries = vec![(Edge::new(0, 0), int(1)), (Edge::new(4, 4), int(1))];
    for i in 1..4 {
        entries.push((Edge::new(i, i + 1), ratio(1, 2)));
        entries.push((Edge::new(i, i - 1), ratio(1, 2)));
    }
    let mc = MarkovChain::new(names, entries)?;
    let r = reach_prob_all(&mc, "c4")?;
    for (v, p) in r.vertices.iter().zip(&r.values) {
        println!("P({v} -> c4) = {}", format(p));
    }
    let verdict = qual_known(&structure_of(&mc), "c2", "c4")?;
    println!("c2: almost sure {}, impossible {}", verdict.prob_one, verdict.prob_zero);
    Ok(())
}
