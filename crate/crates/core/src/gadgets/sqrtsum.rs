use num_bigint::BigInt;
use num_integer::Roots;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::model::{AimcModel, Edge, Interval, MarkovChain, Query, Relation};
use crate::rational::{int, ratio, Rational};

use super::chain_with;

/// Overrides for the default parameter choice.
#[derive(Clone, Debug, Default)]
pub struct SqrtSumOptions {
    pub m: Option<u64>,
    pub n: Option<u64>,
    pub x_interval: Option<Interval>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SqrtSumParams {
    pub r_list: Vec<u64>,
    pub k: u64,
    pub m: u64,
    pub n: u64,
    pub alpha: Rational,
    pub beta_list: Vec<Rational>,
    pub x_interval: Interval,
    pub threshold: Rational,
    /// Per gadget, the seven edges carrying `x`.
    pub x_edges: Vec<Vec<Edge>>,
    /// Per gadget, the seven edges carrying `1 - x`.
    pub complement_edges: Vec<Vec<Edge>>,
}

impl SqrtSumParams {
    /// The chain with gadget `i` at `xs[i]`.
    pub fn chain_at(&self, model: &AimcModel, xs: &[Rational]) -> Result<MarkovChain> {
        chain_with(model, &self.x_edges, &self.complement_edges, xs)
    }
}

fn sq(q: &Rational) -> Rational {
    q * q
}

/// Edges carrying `x` in every gadget.
const X_EDGES: [(&str, &str); 7] = [
    ("c1", "F"),
    ("c2", "F"),
    ("c3", "S"),
    ("c4", "F"),
    ("d1", "e"),
    ("d4", "S"),
    ("e", "S"),
];
/// Edges carrying `1 - x`.
const COMPLEMENT_EDGES: [(&str, &str); 7] = [
    ("c1", "d1"),
    ("d1", "F"),
    ("e", "F"),
    ("c2", "S"),
    ("c3", "F"),
    ("c4", "d4"),
    ("d4", "F"),
];
const GADGET_VERTICES: [&str; 12] = ["a", "b1", "b2", "b3", "b4", "c1", "c2", "c3", "c4", "d1", "d4", "e"];

fn local(i: usize, v: &str) -> String {
    match v {
        "S" | "F" => v.to_string(),
        _ => format!("g{i}.{v}"),
    }
}

/// One gadget per `r_i` behind a uniform branch from `v0`. The maximal
/// probability of reaching `S` is at least the returned threshold iff
/// `sum sqrt(r_i) >= k`. Defaults: `M = 3*ceil(sqrt(max r)) + 1`,
/// `N = 16 M^3`, `x` ranging over `[1/(2M), 1/2]`.
pub fn encode_sqrtsum(r_list: &[u64], k: u64, opts: &SqrtSumOptions) -> Result<(AimcModel, Query, SqrtSumParams)> {
    if r_list.is_empty() {
        return Err(Error::GadgetParams("no radicands".into()));
    }
    if r_list.contains(&0) || k == 0 {
        return Err(Error::GadgetParams("radicands and k must be positive".into()));
    }
    let max_r = *r_list.iter().max().expect("nonempty");
    let ceil_sqrt = |r: u64| {
        let s = r.sqrt();
        if s * s == r {
            s
        } else {
            s + 1
        }
    };
    let big_m = opts.m.unwrap_or(3 * ceil_sqrt(max_r) + 1);
    let big_n = match opts.n {
        Some(n) => n,
        None => big_m
            .checked_pow(3)
            .and_then(|c| c.checked_mul(16))
            .ok_or_else(|| Error::GadgetParams("M too large".into()))?,
    };
    if big_m == 0 || big_n == 0 {
        return Err(Error::GadgetParams("M and N must be positive".into()));
    }
    let mq = Rational::from_integer(BigInt::from(big_m));
    let nq = Rational::from_integer(BigInt::from(big_n));
    let x_interval = match &opts.x_interval {
        Some(i) => i.clone(),
        None => Interval::closed(Rational::one() / (int(2) * &mq), ratio(1, 2))?,
    };
    if x_interval.lo.is_zero() || x_interval.hi >= Rational::one() {
        return Err(Error::GadgetParams(format!("x interval {x_interval} must stay away from 0 and 1")));
    }
    let alpha = int(4) * &mq / &nq;
    if alpha >= Rational::one() {
        return Err(Error::GadgetParams(format!("alpha = 4M/N = {alpha} is not below 1")));
    }
    let m_gadgets = r_list.len();
    let mut beta_list = Vec::with_capacity(m_gadgets);
    for &r in r_list {
        let rq = Rational::from_integer(BigInt::from(r));
        let beta = int(16) * &mq * &mq * &mq / (int(27) * &rq * &nq);
        if beta >= Rational::one() {
            return Err(Error::GadgetParams(format!("beta for r = {r} is {beta}, not below 1")));
        }
        // x* = 3 sqrt(r) / (2M) strictly inside the interval
        let x_star_sq = int(9) * &rq / (int(4) * &mq * &mq);
        if sq(&x_interval.lo) >= x_star_sq || sq(&x_interval.hi) <= x_star_sq {
            return Err(Error::GadgetParams(format!(
                "the maximizer 3 sqrt({r})/(2M) is not strictly inside {x_interval}"
            )));
        }
        let p_opt_bound = Rational::from_integer(BigInt::from(ceil_sqrt(r))) / &nq + &beta / int(4);
        if p_opt_bound >= Rational::one() {
            return Err(Error::GadgetParams(format!("optimal probability for r = {r} is not below 1")));
        }
        beta_list.push(beta);
    }
    let mq_gadgets = Rational::from_integer(BigInt::from(m_gadgets));
    let beta_sum: Rational = beta_list.iter().sum();
    let kq = Rational::from_integer(BigInt::from(k));
    let threshold = &kq / (&mq_gadgets * &nq) + beta_sum / (int(4) * &mq_gadgets);

    let mut names = vec!["v0".to_string(), "S".to_string(), "F".to_string()];
    for i in 1..=m_gadgets {
        names.extend(GADGET_VERTICES.iter().map(|v| local(i, v)));
    }
    let mut model = AimcModel::new(names)?;
    let complement = x_interval.complement();
    let branch = Interval::point(Rational::one() / &mq_gadgets);
    let mut x_edges = Vec::with_capacity(m_gadgets);
    let mut complement_edges = Vec::with_capacity(m_gadgets);
    for (idx, beta) in beta_list.iter().enumerate() {
        let i = idx + 1;
        let v = |name: &str| local(i, name);
        model.add_transition("v0", &v("a"), branch.clone())?;
        for b in ["b1", "b2", "b3", "b4"] {
            model.add_transition(&v("a"), &v(b), Interval::point(ratio(1, 4)))?;
        }
        for (b, c, p) in [
            ("b1", "c1", beta),
            ("b2", "c2", beta),
            ("b3", "c3", &alpha),
            ("b4", "c4", beta),
        ] {
            model.add_transition(&v(b), &v(c), Interval::point(p.clone()))?;
            model.add_transition(&v(b), "F", Interval::point(Rational::one() - p))?;
        }
        let mut xs = Vec::new();
        for (a, b) in X_EDGES {
            xs.push(model.add_transition(&v(a), &v(b), x_interval.clone())?);
        }
        let mut cs = Vec::new();
        for (a, b) in COMPLEMENT_EDGES {
            cs.push(model.add_transition(&v(a), &v(b), complement.clone())?);
        }
        let (a0, b0) = X_EDGES[0];
        for (a, b) in &X_EDGES[1..] {
            model.add_constraint((&v(a0), &v(b0)), (&v(a), &v(b)))?;
        }
        x_edges.push(xs);
        complement_edges.push(cs);
    }
    model.add_transition("S", "S", Interval::point(int(1)))?;
    model.add_transition("F", "F", Interval::point(int(1)))?;
    let query = Query::new("v0", "S", Relation::Ge, threshold.clone(), None)?;
    let params = SqrtSumParams {
        r_list: r_list.to_vec(),
        k,
        m: big_m,
        n: big_n,
        alpha,
        beta_list,
        x_interval,
        threshold,
        x_edges,
        complement_edges,
    };
    Ok((model, query, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::reach_prob;

    fn fixture() -> (AimcModel, Query, SqrtSumParams) {
        let opts = SqrtSumOptions {
            m: Some(4),
            n: Some(32),
            x_interval: Some(Interval::closed(ratio(1, 8), ratio(7, 8)).unwrap()),
        };
        encode_sqrtsum(&[4], 1, &opts).unwrap()
    }

    #[test]
    fn fixture_parameters() {
        let (m, _, p) = fixture();
        assert_eq!(m.len(), 15);
        assert_eq!(p.alpha, ratio(1, 2));
        assert_eq!(p.beta_list, vec![ratio(8, 27)]);
        let mc = p.chain_at(&m, &[ratio(3, 4)]).unwrap();
        assert_eq!(reach_prob(&mc, "g1.a", "S").unwrap(), ratio(59, 432));
    }

    #[test]
    fn default_parameters() {
        let (_, q, p) = encode_sqrtsum(&[4, 9], 5, &SqrtSumOptions::default()).unwrap();
        assert_eq!(p.m, 10);
        assert_eq!(p.n, 16000);
        let expected = ratio(5, 2 * 16000) + (&p.beta_list[0] + &p.beta_list[1]) / int(8);
        assert_eq!(q.threshold, expected);
    }

    #[test]
    fn rejects_maximizer_outside_interval() {
        let opts = SqrtSumOptions {
            m: Some(4),
            n: Some(32),
            x_interval: None,
        };
        assert!(matches!(encode_sqrtsum(&[4], 1, &opts), Err(Error::GadgetParams(_))));
        assert!(encode_sqrtsum(&[], 1, &SqrtSumOptions::default()).is_err());
    }
}
