//! Maximum matching in geometric intersection graphs.
//!
//! The algebraic pipeline builds the intersection graph, splits it along a
//! tree of circle separators into a bounded-degree graph, and finds a
//! perfect matching on a maximum matchable subset by random substitution
//! into the Tutte matrix and elimination over a prime field ordered by the
//! tree. A grid-based sparsifier reduces families of arbitrary depth to
//! bounded-depth subfamilies with the same matching number. A blossom
//! implementation serves as the exact reference.

pub mod dissection;
pub mod error;
pub mod field;
pub mod generate;
pub mod geom;
pub mod graph;
pub mod matching;
pub mod matrix;
pub mod oracle;
pub mod pipeline;
pub mod separator;
pub mod sparse;
pub mod sparsify;

pub use error::{Error, Result};
pub use field::{gen_prime, Field};
pub use geom::{depth, density_estimate, diameter, intersects, pierce_points, GeomObject, GridPoint, Instance, Point, Shape};
pub use graph::{bipartite_restrict, build_graph, induced_subgraph, IntersectionGraph};
pub use matching::Matching;
pub use matrix::{FieldMatrix, LUFactors};
pub use dissection::{nested_dissection_lu, DissectionStats};
pub use sparse::SparseMatrix;
pub use oracle::{blossom_maximum_matching, exhaustive_matching_size};
pub use generate::{generate, GeneratorSpec, Regime, ShapeSpec};
pub use pipeline::{run, Mode, Report, RunConfig};
pub use sparsify::{combine_matchings, sparsify, SparsifierResult, StructureChoice, DEPTH_CONSTANT};
