//! Analysis of augmented interval Markov chains.

pub mod approx;
pub mod cli;
mod completion;
pub mod error;
pub mod etr;
pub mod exact;
pub mod gadgets;
pub mod graph;
pub mod linalg;
pub mod lp;
pub mod model;
pub mod oracle;
pub mod qualitative;
pub mod rational;

pub use error::{Error, Result};
pub use model::{AimcModel, Edge, Interval, MarkovChain, Query, Relation};
pub use rational::Rational;
