//! Exact maximum quasi-clique search for small graphs.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeDensity, Gamma, Graph, VertexSet};

/// Largest graph [`max_quasi_clique_exhaustive`] accepts.
pub const EXHAUSTIVE_MAX_N: usize = 22;
/// Largest graph [`max_quasi_clique_bnb`] accepts.
pub const BNB_MAX_N: usize = 128;
pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuasiClique {
    pub vertices: VertexSet,
    pub size: usize,
    pub density: EdgeDensity,
    /// The size is the maximum and the set is the lexicographically smallest
    /// set of that size.
    pub certified_optimal: bool,
    /// Search-tree nodes visited.
    pub nodes: u64,
}

type Mask = u128;

fn masks(g: &Graph) -> Vec<Mask> {
    (0..g.n())
        .map(|v| g.neighbors(v).iter().fold(0, |m, &u| m | 1 << u))
        .collect()
}

fn edges_in(adj: &[Mask], s: Mask) -> u64 {
    let mut total = 0u64;
    let mut rest = s;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        total += u64::from((adj[v] & s).count_ones());
    }
    total / 2
}

fn to_set(s: Mask) -> VertexSet {
    let mut v = Vec::with_capacity(s.count_ones() as usize);
    let mut rest = s;
    while rest != 0 {
        v.push(rest.trailing_zeros() as usize);
        rest &= rest - 1;
    }
    VertexSet::new(v)
}

fn result(adj: &[Mask], s: Mask, certified: bool, nodes: u64) -> QuasiClique {
    let size = s.count_ones() as usize;
    QuasiClique {
        vertices: to_set(s),
        size,
        density: EdgeDensity {
            edges: edges_in(adj, s),
            size: size as u64,
        },
        certified_optimal: certified,
        nodes,
    }
}

/// Maximum gamma-clique by enumerating subsets from the largest size down;
/// the first admissible subset in lexicographic order wins.
pub fn max_quasi_clique_exhaustive(g: &Graph, gamma: f64) -> Result<QuasiClique> {
    let gamma = Gamma::new(gamma)?;
    let n = g.n();
    if n > EXHAUSTIVE_MAX_N {
        return Err(Error::input(format!(
            "exhaustive search is limited to n <= {EXHAUSTIVE_MAX_N}, got {n}"
        )));
    }
    let adj = masks(g);
    let mut nodes = 0;
    for k in (1..=n).rev() {
        let need = gamma.required_edges(k as u64);
        for combo in (0..n).combinations(k) {
            nodes += 1;
            let s = combo.iter().fold(0, |m: Mask, &v| m | 1 << v);
            if edges_in(&adj, s) >= need {
                return Ok(result(&adj, s, true, nodes));
            }
        }
    }
    Ok(result(&adj, 0, true, nodes))
}

struct Search<'a> {
    adj: &'a [Mask],
    gamma: Gamma,
    order: Vec<usize>,
    budget: u64,
    nodes: u64,
    exhausted: bool,
}

impl Search<'_> {
    /// False when no `S ∪ K` with `K ⊆ C` and size in `[lo, hi]` can reach
    /// the required edge count. Cross and inner edges of `K` are bounded by
    /// the top-`k` neighbour counts into `S` and within `C`.
    fn feasible_sizes(&self, s: Mask, c: Mask, lo: usize, hi: usize) -> bool {
        let ns = s.count_ones() as usize;
        let nc = c.count_ones() as usize;
        // S itself has been scored by the caller
        let lo = lo.max(ns + 1);
        let hi = hi.min(ns + nc);
        if lo > hi {
            return false;
        }
        let es = edges_in(self.adj, s);
        let mut to_s = Vec::with_capacity(nc);
        let mut in_c = Vec::with_capacity(nc);
        let mut rest = c;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            to_s.push(u64::from((self.adj[v] & s).count_ones()));
            in_c.push(u64::from((self.adj[v] & c).count_ones()));
        }
        to_s.sort_unstable_by(|a, b| b.cmp(a));
        in_c.sort_unstable_by(|a, b| b.cmp(a));
        for t in lo..=hi {
            let k = t - ns;
            let cross: u64 = to_s[..k].iter().sum();
            let cap = k.saturating_sub(1) as u64;
            let inner_deg: u64 = in_c[..k].iter().map(|&d| d.min(cap)).sum();
            let inner = (inner_deg / 2).min((k * k.saturating_sub(1) / 2) as u64);
            if es + cross + inner >= self.gamma.required_edges(t as u64) {
                return true;
            }
        }
        false
    }

    fn tick(&mut self) -> bool {
        if self.nodes >= self.budget {
            self.exhausted = true;
            return false;
        }
        self.nodes += 1;
        true
    }

    /// Largest admissible set with size in `[lo, hi]`, improving on `best`.
    fn grow(&mut self, pos: usize, s: Mask, hi: usize, best: &mut (usize, Mask)) {
        if !self.tick() {
            return;
        }
        let ns = s.count_ones() as usize;
        if ns > best.0 && ns <= hi {
            let need = self.gamma.required_edges(ns as u64);
            if edges_in(self.adj, s) >= need {
                *best = (ns, s);
            }
        }
        if pos == self.order.len() || ns == hi {
            return;
        }
        let c: Mask = self.order[pos..].iter().fold(0, |m, &v| m | 1 << v);
        if !self.feasible_sizes(s, c, best.0 + 1, hi) {
            return;
        }
        let v = self.order[pos];
        self.grow(pos + 1, s | 1 << v, hi, best);
        self.grow(pos + 1, s, hi, best);
    }

    /// First admissible set of exactly `t` vertices in lexicographic order.
    fn first_of_size(&mut self, pos: usize, s: Mask, t: usize) -> Option<Mask> {
        if !self.tick() {
            return None;
        }
        let ns = s.count_ones() as usize;
        if ns == t {
            let need = self.gamma.required_edges(t as u64);
            return (edges_in(self.adj, s) >= need).then_some(s);
        }
        let n = self.order.len();
        if ns + (n - pos) < t {
            return None;
        }
        let c: Mask = self.order[pos..].iter().fold(0, |m, &v| m | 1 << v);
        if !self.feasible_sizes(s, c, t, t) {
            return None;
        }
        let v = self.order[pos];
        self.first_of_size(pos + 1, s | 1 << v, t)
            .or_else(|| self.first_of_size(pos + 1, s, t))
    }
}

/// Maximum gamma-clique with size in `[omega_l, omega_u]` by branch and bound.
///
/// Returns `certified_optimal = false` with the best set found when more than
/// `budget` search nodes would be needed. If no admissible set exists in the
/// size range, returns the empty set.
pub fn max_quasi_clique_bnb(
    g: &Graph,
    gamma: f64,
    omega_l: usize,
    omega_u: usize,
    budget: u64,
) -> Result<QuasiClique> {
    let gamma = Gamma::new(gamma)?;
    let n = g.n();
    if n > BNB_MAX_N {
        return Err(Error::input(format!(
            "branch and bound is limited to n <= {BNB_MAX_N}, got {n}"
        )));
    }
    if omega_l > omega_u || omega_u > n {
        return Err(Error::input(format!(
            "need omega_l <= omega_u <= n, got {omega_l}, {omega_u}, {n}"
        )));
    }
    if budget == 0 {
        return Err(Error::input("node budget must be positive"));
    }
    let adj = masks(g);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (std::cmp::Reverse(g.degree(v)), v));
    let mut search = Search {
        adj: &adj,
        gamma,
        order: by_degree,
        budget,
        nodes: 0,
        exhausted: false,
    };

    let mut best = (omega_l.saturating_sub(1), 0 as Mask);
    let floor = best.0;
    search.grow(0, 0, omega_u, &mut best);
    if search.exhausted {
        return Ok(result(&adj, best.1, false, search.nodes));
    }
    if omega_l > 0 && best.0 == floor {
        // nothing admissible in range
        return Ok(result(&adj, 0, true, search.nodes));
    }

    let omega = best.0;
    search.order = (0..n).collect();
    match search.first_of_size(0, 0, omega) {
        Some(s) => Ok(result(&adj, s, true, search.nodes)),
        None => Ok(result(&adj, best.1, false, search.nodes)),
    }
}
