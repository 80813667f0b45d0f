//! Recovery of planted quasi-cliques by splitting a graph's adjacency matrix
//! into a low-rank block and a sparse remainder.

pub mod error;
pub mod experiments;
pub mod fixtures;
pub mod generators;
pub mod graph;
pub mod linalg;
pub mod metrics;
pub mod mip;
pub mod oracle;
pub mod solver;

pub use error::{Error, Result};
pub use graph::{
    adjacency, edge_density, is_gamma_clique, AdjacencyMatrix, EdgeDensity, Gamma, Graph, VertexSet,
};
