//! Finite constructions around the double clique problem: double graphs,
//! test enumeration, sunflower plucking, approximators, DMN formulas,
//! three-valued semantics, DeMorgan conversion and exact bound arithmetic.

pub mod approx;
pub mod bounds;
pub mod checks;
pub mod circuit;
pub mod error;
pub mod family;
pub mod formula;
pub mod gen;
pub mod graphs;
pub mod params;
pub mod report;
pub mod semantics;
pub mod sunflower;

pub use error::{Error, Result};
pub use family::Family;
pub use graphs::{Coloring, DoubleGraph, Edge, EdgeIndex, PlainGraph, Side, VertexSet};
pub use params::{Mode, Params};
