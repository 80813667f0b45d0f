//! Simple undirected graphs, vertex sets and edge-density arithmetic.
//!
//! Densities are kept as exact `edges / pairs` ratios and compared against a
//! target density with integer arithmetic, so a set sitting exactly on the
//! threshold is never misclassified by rounding.

use std::collections::BTreeSet;
use std::fmt;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fixed-point scale for target densities.
pub const GAMMA_SCALE: u64 = 1_000_000_000;

/// A target edge density in (0, 1], held both as a float and as the integer
/// ratio `num / GAMMA_SCALE` used for exact threshold tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Gamma {
    value: f64,
    num: u64,
}

impl Gamma {
    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() || value <= 0.0 || value > 1.0 {
            return Err(Error::input(format!(
                "gamma must lie in (0, 1], got {value}"
            )));
        }
        let num = (value * GAMMA_SCALE as f64).round() as u64;
        Ok(Gamma {
            value,
            num: num.max(1),
        })
    }

    pub fn value(self) -> f64 {
        self.value
    }

    pub fn numerator(self) -> u64 {
        self.num
    }

    /// True iff `edges / C(size, 2) >= gamma`; sets of size <= 1 always pass.
    pub fn admits(self, edges: u64, size: u64) -> bool {
        if size <= 1 {
            return true;
        }
        let lhs = 2 * edges as u128 * GAMMA_SCALE as u128;
        let rhs = self.num as u128 * size as u128 * (size as u128 - 1);
        lhs >= rhs
    }

    /// Smallest edge count a vertex set of `size` needs to reach this density.
    pub fn required_edges(self, size: u64) -> u64 {
        if size <= 1 {
            return 0;
        }
        let need = self.num as u128 * size as u128 * (size as u128 - 1);
        let den = 2 * GAMMA_SCALE as u128;
        need.div_ceil(den) as u64
    }
}

impl TryFrom<f64> for Gamma {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Gamma::new(v)
    }
}

impl From<Gamma> for f64 {
    fn from(g: Gamma) -> f64 {
        g.value
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Induced edge count of a vertex set of `size` vertices, as the exact ratio
/// `edges / C(size, 2)`. Empty and singleton sets count as density 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeDensity {
    pub edges: u64,
    pub size: u64,
}

impl EdgeDensity {
    pub fn pairs(self) -> u64 {
        if self.size < 2 {
            0
        } else {
            self.size * (self.size - 1) / 2
        }
    }

    pub fn value(self) -> f64 {
        match self.pairs() {
            0 => 1.0,
            p => self.edges as f64 / p as f64,
        }
    }

    pub fn meets(self, gamma: Gamma) -> bool {
        gamma.admits(self.edges, self.size)
    }
}

impl fmt::Display for EdgeDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pairs() {
            0 => write!(f, "1"),
            p => write!(f, "{}/{}", self.edges, p),
        }
    }
}

/// Sorted, duplicate-free list of vertex indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<usize>", into = "Vec<usize>")]
pub struct VertexSet(Vec<usize>);

impl VertexSet {
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        VertexSet(members)
    }

    pub fn empty() -> Self {
        VertexSet(Vec::new())
    }

    pub fn all(n: usize) -> Self {
        VertexSet((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn check_bounds(&self, n: usize) -> Result<()> {
        match self.0.last() {
            Some(&v) if v >= n => Err(Error::input(format!(
                "vertex {v} out of range for graph with {n} vertices"
            ))),
            _ => Ok(()),
        }
    }

    /// Membership mask of length `n`.
    pub fn indicator(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for v in self.iter() {
            mask[v] = true;
        }
        mask
    }
}

impl From<Vec<usize>> for VertexSet {
    fn from(v: Vec<usize>) -> Self {
        VertexSet::new(v)
    }
}

impl From<VertexSet> for Vec<usize> {
    fn from(s: VertexSet) -> Self {
        s.0
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        VertexSet::new(iter.into_iter().collect())
    }
}

/// Simple undirected graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicates and out-of-range endpoints.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::input(format!(
                    "edge ({u}, {v}) out of range for n = {n}"
                )));
            }
            if u == v {
                return Err(Error::input(format!("self-loop at vertex {u}")));
            }
            if !set.insert((u.min(v), u.max(v))) {
                return Err(Error::input(format!("duplicate edge ({u}, {v})")));
            }
        }
        Ok(Self::from_canonical(n, set.into_iter().collect()))
    }

    /// `edges` must already be sorted, deduplicated pairs with `u < v < n`.
    pub(crate) fn from_canonical(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut neighbors = vec![Vec::new(); n];
        for &(u, v) in &edges {
            neighbors[u].push(v);
            neighbors[v].push(u);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Graph {
            n,
            edges,
            neighbors,
        }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_canonical(n, Vec::new())
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect();
        Self::from_canonical(n, edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v)` with `u < v`, lexicographically sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.neighbors.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u != v && u < self.n && self.neighbors[u].binary_search(&v).is_ok()
    }

    /// Number of edges with both endpoints in `s`.
    pub fn induced_edges(&self, s: &VertexSet) -> Result<u64> {
        s.check_bounds(self.n)?;
        let mask = s.indicator(self.n);
        let twice: usize = s
            .iter()
            .map(|u| self.neighbors[u].iter().filter(|&&v| mask[v]).count())
            .sum();
        Ok(twice as u64 / 2)
    }

    /// Graph with the same edges under `perm` (vertex `v` becomes `perm[v]`).
    pub fn relabel(&self, perm: &[usize]) -> Result<Graph> {
        if perm.len() != self.n {
            return Err(Error::input("permutation length differs from vertex count"));
        }
        Graph::new(self.n, self.edges.iter().map(|&(u, v)| (perm[u], perm[v])))
    }

    pub fn induced_subgraph_adjacency(&self, s: &VertexSet) -> Result<AdjacencyMatrix> {
        s.check_bounds(self.n)?;
        let mask = s.indicator(self.n);
        let mut m = DMatrix::zeros(self.n, self.n);
        for &(u, v) in &self.edges {
            if mask[u] && mask[v] {
                m[(u, v)] = 1.0;
                m[(v, u)] = 1.0;
            }
        }
        Ok(AdjacencyMatrix {
            matrix: m,
            loops_added: false,
        })
    }
}

/// Edge density of the subgraph induced by `s`.
pub fn edge_density(g: &Graph, s: &VertexSet) -> Result<EdgeDensity> {
    Ok(EdgeDensity {
        edges: g.induced_edges(s)?,
        size: s.len() as u64,
    })
}

pub fn is_gamma_clique(g: &Graph, s: &VertexSet, gamma: f64) -> Result<bool> {
    let gamma = Gamma::new(gamma)?;
    Ok(edge_density(g, s)?.meets(gamma))
}

/// Dense symmetric adjacency view. Entries are 0/1 for graph adjacency and may
/// lie anywhere in [0, 1] when holding a relaxed matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjacencyMatrix {
    #[serde(with = "crate::linalg::row_major")]
    pub matrix: DMatrix<f64>,
    pub loops_added: bool,
}

impl AdjacencyMatrix {
    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    /// Entry rows as integers; only meaningful for 0/1 matrices.
    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.n())
            .map(|i| {
                (0..self.n())
                    .map(|j| self.matrix[(i, j)].round() as u8)
                    .collect()
            })
            .collect()
    }
}

pub fn adjacency(g: &Graph, with_loops: bool) -> AdjacencyMatrix {
    let n = g.n();
    let mut m = DMatrix::zeros(n, n);
    for &(u, v) in g.edges() {
        m[(u, v)] = 1.0;
        m[(v, u)] = 1.0;
    }
    if with_loops {
        m.fill_diagonal(1.0);
    }
    AdjacencyMatrix {
        matrix: m,
        loops_added: with_loops,
    }
}

/// Parses the `n m` header + `u v` lines edge-list format.
pub fn read_edge_list(text: &str) -> Result<Graph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "missing header"))?;
    let (n, m) = parse_pair(hline, header)?;

    let mut set = BTreeSet::new();
    for (lineno, line) in lines {
        let (u, v) = parse_pair(lineno, line)?;
        if u >= n || v >= n {
            return Err(Error::parse(
                lineno,
                format!("vertex index out of range (n = {n})"),
            ));
        }
        if u == v {
            return Err(Error::parse(lineno, format!("self-loop at vertex {u}")));
        }
        if !set.insert((u.min(v), u.max(v))) {
            return Err(Error::parse(lineno, format!("duplicate edge {u} {v}")));
        }
    }
    if set.len() != m {
        return Err(Error::parse(
            hline,
            format!("header declares {m} edges, found {}", set.len()),
        ));
    }
    Ok(Graph::from_canonical(n, set.into_iter().collect()))
}

fn parse_pair(lineno: usize, line: &str) -> Result<(usize, usize)> {
    let mut it = line.split_whitespace();
    let mut next = || -> Result<usize> {
        let tok = it
            .next()
            .ok_or_else(|| Error::parse(lineno, "expected two integers"))?;
        tok.parse()
            .map_err(|_| Error::parse(lineno, format!("not a non-negative integer: {tok:?}")))
    };
    let a = next()?;
    let b = next()?;
    if it.next().is_some() {
        return Err(Error::parse(lineno, "trailing tokens"));
    }
    Ok((a, b))
}

/// Canonical serialization: header then edges in lexicographic order.
pub fn write_edge_list(g: &Graph) -> String {
    let mut out = String::with_capacity(16 + 12 * g.edge_count());
    writeln!(out, "{} {}", g.n(), g.edge_count()).unwrap();
    for &(u, v) in g.edges() {
        writeln!(out, "{u} {v}").unwrap();
    }
    out
}
