//! The ten-vertex worked example with a planted 0.9-clique.
//!
//! The example is usually written with labels 1..=10; everything here is
//! 0-indexed. Label `k` is vertex `k - 1`, so the planted block labelled
//! {3, 4, 5, 6, 7} is `{2, 3, 4, 5, 6}` below.

use crate::graph::{Graph, VertexSet};

/// Offset between the 1-based labels and library indices.
pub const LABEL_OFFSET: usize = 1;

/// Planted block in 1-based labels.
pub const PLANTED_LABELS: [usize; 5] = [3, 4, 5, 6, 7];

const A_STAR: [[u8; 10]; 10] = [
    [0, 1, 0, 0, 0, 0, 0, 1, 0, 0],
    [1, 0, 1, 0, 0, 1, 0, 0, 0, 0],
    [0, 1, 0, 1, 1, 0, 1, 0, 0, 0],
    [0, 0, 1, 0, 1, 1, 1, 1, 0, 0],
    [0, 0, 1, 1, 0, 1, 1, 0, 0, 0],
    [0, 1, 0, 1, 1, 0, 1, 0, 0, 1],
    [0, 0, 1, 1, 1, 1, 0, 0, 0, 0],
    [1, 0, 0, 1, 0, 0, 0, 0, 1, 0],
    [0, 0, 0, 0, 0, 0, 0, 1, 0, 1],
    [0, 0, 0, 0, 0, 1, 0, 0, 1, 0],
];

const Q_STAR: [[u8; 10]; 10] = [
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 1, 1, 0, 1, 0, 0, 0],
    [0, 0, 1, 0, 1, 1, 1, 0, 0, 0],
    [0, 0, 1, 1, 0, 1, 1, 0, 0, 0],
    [0, 0, 0, 1, 1, 0, 1, 0, 0, 0],
    [0, 0, 1, 1, 1, 1, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
];

fn rows(m: &[[u8; 10]; 10]) -> Vec<Vec<u8>> {
    m.iter().map(|r| r.to_vec()).collect()
}

pub fn example_graph() -> Graph {
    let edges = (0..10)
        .flat_map(|i| (i + 1..10).map(move |j| (i, j)))
        .filter(|&(i, j)| A_STAR[i][j] == 1);
    Graph::new(10, edges).expect("fixture adjacency is a simple graph")
}

pub fn example_planted() -> VertexSet {
    PLANTED_LABELS.iter().map(|l| l - LABEL_OFFSET).collect()
}

/// Adjacency matrix without loops.
pub fn example_a_star() -> Vec<Vec<u8>> {
    rows(&A_STAR)
}

/// Adjacency matrix with a loop added at every vertex.
pub fn example_a() -> Vec<Vec<u8>> {
    let mut a = rows(&A_STAR);
    for (i, r) in a.iter_mut().enumerate() {
        r[i] = 1;
    }
    a
}

/// The recovered rank-one block: ones on planted x planted, zero elsewhere.
pub fn example_q() -> Vec<Vec<u8>> {
    let planted = example_planted();
    (0..10)
        .map(|i| {
            (0..10)
                .map(|j| u8::from(planted.contains(i) && planted.contains(j)))
                .collect()
        })
        .collect()
}

/// The cleaned-up block: planted-block entries that are edges of the graph.
pub fn example_q_star() -> Vec<Vec<u8>> {
    rows(&Q_STAR)
}
