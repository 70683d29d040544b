//! Existential-theory-of-the-reals encodings of reachability queries,
//! SMT-LIB output, and an external solver client.

mod encode;
mod formula;
mod smtlib;
mod solver;

pub use encode::{
    beta_polys, build_formula, build_formula_fixed, build_formula_full, uw_partition, Encoding, EncodingMode, LinPoly,
    UwPartition,
};
pub use formula::{eval_formula, Assignment, Cmp, Formula, Prop, Term};
pub use smtlib::{emit_smtlib, literal};
pub use solver::{interpret, solve_external, SolverOutcome};
