//! Instance generators for the reductions: 3-SAT to qualitative
//! reachability, square-root sums to quantitative reachability, and
//! polynomial optimization over a box to quantitative reachability.

mod poly;
mod sat;
mod sqrtsum;

pub use poly::{
    encode_polynomial, parse_poly_file, rewrite_polynomial, Factor, Monomial, PolyEncoding, PolyModel, PolyProblem,
    PolyTerm, Polynomial,
};
pub use sat::{encode_3sat, parse_dimacs, Cnf};
pub use sqrtsum::{encode_sqrtsum, SqrtSumOptions, SqrtSumParams};

use crate::error::{Error, Result};
use crate::model::{AimcModel, Edge, MarkovChain};
use crate::rational::Rational;

/// Chain of `model` where each edge of `x_edges[i]` takes `xs[i]`, each
/// edge of `complement_edges[i]` takes `1 - xs[i]`, and all other
/// transitions keep their (point) value.
fn chain_with(
    model: &AimcModel,
    x_edges: &[Vec<Edge>],
    complement_edges: &[Vec<Edge>],
    xs: &[Rational],
) -> Result<MarkovChain> {
    if xs.len() != x_edges.len() {
        return Err(Error::GadgetParams(format!("expected {} values, got {}", x_edges.len(), xs.len())));
    }
    let mut entries = Vec::new();
    for (e, interval) in model.transitions() {
        let from_x = x_edges.iter().position(|es| es.contains(&e));
        let from_c = complement_edges.iter().position(|es| es.contains(&e));
        let p = match (from_x, from_c, interval.as_point()) {
            (Some(i), _, _) => xs[i].clone(),
            (None, Some(i), _) => Rational::from_integer(1.into()) - &xs[i],
            (None, None, Some(p)) => p.clone(),
            (None, None, None) => {
                let (a, b) = model.edge_names(e);
                return Err(Error::GadgetParams(format!("edge {a} -> {b} has no assigned value")));
            }
        };
        if !interval.contains(&p) {
            let (a, b) = model.edge_names(e);
            return Err(Error::GadgetParams(format!("value outside the interval of {a} -> {b}")));
        }
        entries.push((e, p));
    }
    MarkovChain::new(model.vertices().to_vec(), entries)
}
