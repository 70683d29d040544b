//! Rewrites a polynomial as a convex combination of products and builds
//! the model whose reachability probability tracks it.

use aimc::exact::reach_prob;
use aimc::gadgets::{encode_polynomial, rewrite_polynomial, Monomial, Polynomial};
use aimc::model::Interval;
use aimc::rational::{int, ratio};

fn main() -> aimc::Result<()> {
    // 1/2 + x - x^2 y
    let mono = |c, e: [u32; 2]| Monomial {
        coef: c,
        exponents: e.to_vec(),
    };
    let p = Polynomial::new(
        vec!["x".into(), "y".into()],
        vec![mono(ratio(1, 2), [0, 0]), mono(int(1), [1, 0]), mono(int(-1), [2, 1])],
    )?;
    let e = rewrite_polynomial(&p);
    println!("offset {}, scale {}, {} product terms", e.offset, e.scale, e.terms.len());

    let unit = Interval::closed(int(0), int(1))?;
    let (m, q, pm) = encode_polynomial(&p, &[unit.clone(), unit], &ratio(3, 4))?;
    println!("model has {} vertices; query {} -> {}", m.len(), q.source, q.target);
    for xs in [[ratio(1, 2), int(0)], [ratio(1, 2), int(1)], [int(1), int(1)]] {
        let mc = pm.chain_at(&m, &xs)?;
        let r = reach_prob(&mc, &q.source, &q.target)?;
        println!("P({}, {}) = {} = {} + {} * {}", xs[0], xs[1], p.eval(&xs), e.offset, e.scale, r);
    }
    Ok(())
}
