//! Perfect packings of near-complete patterns in dense graphs.

pub mod constructions;
pub mod error;
pub mod generators;
pub mod graph;
pub mod hall;
pub mod invariants;
pub mod io;
pub mod par;
pub mod pipeline;
pub mod rational;
pub mod solver;
pub mod tidy;
pub mod vertex_set;

pub use error::{Error, Result};
pub use graph::{Graph, Partition};
pub use rational::Rational;
pub use vertex_set::VertexSet;
