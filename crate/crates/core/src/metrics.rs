//! Recovery error measures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::PlantedInstance;
use crate::graph::{edge_density, AdjacencyMatrix, EdgeDensity, Graph, VertexSet};
use crate::linalg::SymmetricMatrix;

/// `||recovered - planted||_F / ||planted||_F`.
pub fn frobenius_relative_error(
    recovered: &AdjacencyMatrix,
    planted: &AdjacencyMatrix,
) -> Result<f64> {
    if recovered.matrix.shape() != planted.matrix.shape() {
        return Err(Error::input(format!(
            "dimension mismatch: {:?} vs {:?}",
            recovered.matrix.shape(),
            planted.matrix.shape()
        )));
    }
    let base = planted.matrix.norm();
    if base == 0.0 {
        return Err(Error::input(
            "relative error against an all-zero matrix is undefined",
        ));
    }
    Ok((&recovered.matrix - &planted.matrix).norm() / base)
}

/// `|eta - n_c| / n_c`.
pub fn size_relative_error(eta: usize, n_c: usize) -> Result<f64> {
    if n_c == 0 {
        return Err(Error::input("planted size must be positive"));
    }
    Ok(eta.abs_diff(n_c) as f64 / n_c as f64)
}

/// Density as an exact fraction; sets with fewer than two vertices count as 1.
fn density_ratio(d: EdgeDensity) -> (u128, u128) {
    match d.pairs() {
        0 => (1, 1),
        p => (u128::from(d.edges), u128::from(p)),
    }
}

/// `|d(recovered) - d(planted)| / d(planted)`; an empty recovery scores 1.
pub fn density_relative_error(
    g: &Graph,
    recovered: &VertexSet,
    planted: &VertexSet,
) -> Result<f64> {
    let (pe, pp) = density_ratio(edge_density(g, planted)?);
    if pe == 0 {
        return Err(Error::input("planted set has zero edge density"));
    }
    if recovered.is_empty() {
        return Ok(1.0);
    }
    let (re, rp) = density_ratio(edge_density(g, recovered)?);
    // |re/rp - pe/pp| / (pe/pp), rounded once
    Ok((re * pp).abs_diff(pe * rp) as f64 / (rp * pe) as f64)
}

/// Exact recovery of the planted vertex set.
pub fn success(instance: &PlantedInstance, recovered: &VertexSet) -> bool {
    *recovered == instance.planted
}

/// Whether `q`, cut at `threshold`, is exactly the all-ones block on
/// `planted x planted`.
pub fn recovers_block(q: &SymmetricMatrix, planted: &VertexSet, threshold: f64) -> bool {
    let n = q.n();
    let inside = planted.indicator(n);
    (0..n).all(|i| (0..n).all(|j| (q[(i, j)] >= threshold) == (inside[i] && inside[j])))
}

/// Planted block as an `n x n` adjacency matrix: graph edges inside the set.
pub fn block_adjacency(g: &Graph, s: &VertexSet) -> Result<AdjacencyMatrix> {
    g.induced_subgraph_adjacency(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub frobenius_error: f64,
    pub size_error: f64,
    pub density_error: f64,
    pub recovered_size: usize,
    pub planted_size: usize,
    pub success: bool,
    pub solve_seconds: f64,
}

impl TrialMetrics {
    /// Scores a recovery against its planted instance. `q_star` is the
    /// cleaned-up recovered block; a trial only counts as a success when it
    /// also reproduces the planted block adjacency.
    pub fn evaluate(
        instance: &PlantedInstance,
        recovered: &VertexSet,
        q_star: &AdjacencyMatrix,
        solve_seconds: f64,
    ) -> Result<Self> {
        let g = &instance.graph;
        let planted_adj = block_adjacency(g, &instance.planted)?;
        let frobenius_error = frobenius_relative_error(q_star, &planted_adj)?;
        Ok(TrialMetrics {
            frobenius_error,
            size_error: size_relative_error(recovered.len(), instance.planted.len())?,
            density_error: density_relative_error(g, recovered, &instance.planted)?,
            recovered_size: recovered.len(),
            planted_size: instance.planted.len(),
            success: success(instance, recovered) && frobenius_error == 0.0,
            solve_seconds,
        })
    }
}
