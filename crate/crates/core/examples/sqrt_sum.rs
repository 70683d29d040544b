//! The square-root-sum gadget: the best refinement meets the threshold
//! iff the square roots sum to at least k.

use aimc::gadgets::{encode_sqrtsum, SqrtSumOptions};
use aimc::model::Interval;
use aimc::oracle::{brute_force_opt, OracleMode, OracleOptions};
use aimc::rational::{format, ratio};

fn main() -> aimc::Result<()> {
    let opts = SqrtSumOptions {
        m: Some(4),
        n: Some(32),
        x_interval: Some(Interval::closed(ratio(1, 8), ratio(7, 8))?),
    };
    for k in [1, 3] {
        let (m, q, p) = encode_sqrtsum(&[4], k, &opts)?;
        println!(
            "r = [4], k = {k}: {} vertices, alpha {}, beta {}, threshold {}",
            m.len(),
            p.alpha,
            p.beta_list[0],
            format(&p.threshold)
        );
        let best = brute_force_opt(&m, &q, OracleMode::Grid { resolution: 8 }, OracleOptions::default())?;
        println!("  best {} meets threshold: {}", format(&best.best_prob), best.best_prob >= q.threshold);
    }
    Ok(())
}
