//! Seeded random instances: the planted quasi-clique block model and
//! Barabási–Albert preferential attachment graphs.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{edge_density, Gamma, Graph, VertexSet};

/// Block resamples attempted in density-assured mode before giving up.
pub const MAX_BLOCK_RESAMPLES: usize = 1000;

/// Independent pseudo-random stream `stream_id` of `seed`.
///
/// ChaCha is counter based, so a `(seed, stream_id)` pair names the same
/// sequence on every platform and streams never overlap.
pub fn rng_stream(seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlantMode {
    /// Block pairs are plain Bernoulli(p) draws.
    Raw,
    /// The block is redrawn until its realized density reaches gamma.
    DensityAssured,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantParams {
    pub n: usize,
    pub n_c: usize,
    pub p: f64,
    pub rho: f64,
    pub gamma: f64,
    pub seed: u64,
    pub mode: PlantMode,
}

impl PlantParams {
    fn validate(&self) -> Result<Gamma> {
        if self.n_c == 0 || self.n_c > self.n {
            return Err(Error::input(format!(
                "planted size must satisfy 0 < n_c <= n, got n_c = {} and n = {}",
                self.n_c, self.n
            )));
        }
        if !(0.0..=1.0).contains(&self.p) || !(0.0..=1.0).contains(&self.rho) || self.rho >= self.p
        {
            return Err(Error::input(format!(
                "probabilities must satisfy 0 <= rho < p <= 1, got p = {} and rho = {}",
                self.p, self.rho
            )));
        }
        let gamma = Gamma::new(self.gamma)?;
        if self.gamma > self.p {
            return Err(Error::input(format!(
                "gamma = {} exceeds the in-block probability p = {}",
                self.gamma, self.p
            )));
        }
        Ok(gamma)
    }
}

/// A generated graph together with the block that was planted in it.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedInstance {
    pub graph: Graph,
    pub planted: VertexSet,
    pub params: PlantParams,
}

/// JSON sidecar written next to an instance's edge list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSidecar {
    pub n: usize,
    pub n_c: usize,
    pub p: f64,
    pub rho: f64,
    pub gamma: f64,
    pub seed: u64,
    pub planted: Vec<usize>,
    pub mode: PlantMode,
}

impl PlantedInstance {
    pub fn sidecar(&self) -> InstanceSidecar {
        let p = &self.params;
        InstanceSidecar {
            n: p.n,
            n_c: p.n_c,
            p: p.p,
            rho: p.rho,
            gamma: p.gamma,
            seed: p.seed,
            planted: self.planted.as_slice().to_vec(),
            mode: p.mode,
        }
    }

    pub fn from_sidecar(graph: Graph, sidecar: &InstanceSidecar) -> Result<Self> {
        if graph.n() != sidecar.n {
            return Err(Error::input("sidecar vertex count differs from the graph"));
        }
        let planted = VertexSet::new(sidecar.planted.clone());
        planted.check_bounds(graph.n())?;
        Ok(PlantedInstance {
            graph,
            planted,
            params: PlantParams {
                n: sidecar.n,
                n_c: sidecar.n_c,
                p: sidecar.p,
                rho: sidecar.rho,
                gamma: sidecar.gamma,
                seed: sidecar.seed,
                mode: sidecar.mode,
            },
        })
    }
}

const STREAM_CHOOSE: u64 = 0;
const STREAM_BACKGROUND: u64 = 1;
const STREAM_BLOCK_BASE: u64 = 2;

/// Plants a block of `n_c` random vertices whose pairs are joined with
/// probability `p`; every other pair is joined with probability `rho`.
pub fn plant_quasi_clique(params: PlantParams) -> Result<PlantedInstance> {
    let gamma = params.validate()?;
    let n = params.n;

    let mut choose = rng_stream(params.seed, STREAM_CHOOSE);
    let planted: VertexSet = index::sample(&mut choose, n, params.n_c)
        .into_iter()
        .collect();
    let in_block = planted.indicator(n);

    let mut background = Vec::new();
    let mut rng = rng_stream(params.seed, STREAM_BACKGROUND);
    for u in 0..n {
        for v in u + 1..n {
            if !(in_block[u] && in_block[v]) && rng.random::<f64>() < params.rho {
                background.push((u, v));
            }
        }
    }

    let mut attempt = 0u64;
    let block = loop {
        let mut rng = rng_stream(params.seed, STREAM_BLOCK_BASE + attempt);
        let mut block = Vec::new();
        for (a, &u) in planted.as_slice().iter().enumerate() {
            for &v in &planted.as_slice()[a + 1..] {
                if rng.random::<f64>() < params.p {
                    block.push((u, v));
                }
            }
        }
        let ok = match params.mode {
            PlantMode::Raw => true,
            PlantMode::DensityAssured => gamma.admits(block.len() as u64, params.n_c as u64),
        };
        if ok {
            break block;
        }
        attempt += 1;
        if attempt as usize >= MAX_BLOCK_RESAMPLES {
            return Err(Error::input(format!(
                "planted block density stayed below gamma = {} after {MAX_BLOCK_RESAMPLES} resamples",
                params.gamma
            )));
        }
    };

    let mut edges = background;
    edges.extend(block);
    edges.sort_unstable();
    let graph = Graph::from_canonical(n, edges);
    debug_assert!(
        params.mode == PlantMode::Raw || edge_density(&graph, &planted).unwrap().meets(gamma)
    );
    Ok(PlantedInstance {
        graph,
        planted,
        params,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaConfig {
    pub n: usize,
    /// Edges attached from each new vertex.
    pub m: usize,
    pub seed: u64,
}

/// Preferential attachment grown from a complete graph on `m` vertices.
///
/// Each new vertex picks `m` distinct existing vertices, one at a time, with
/// probability proportional to degree among those not yet picked.
pub fn barabasi_albert(cfg: BaConfig) -> Result<Graph> {
    let BaConfig { n, m, seed } = cfg;
    if m == 0 || m >= n {
        return Err(Error::input(format!(
            "need 1 <= m < n, got m = {m}, n = {n}"
        )));
    }
    let mut rng = rng_stream(seed, 0);
    let mut edges: Vec<(usize, usize)> = (0..m)
        .flat_map(|u| (u + 1..m).map(move |v| (u, v)))
        .collect();
    let mut degree = vec![0u64; n];
    for d in degree.iter_mut().take(m) {
        *d = (m - 1) as u64;
    }

    let mut picked = vec![false; n];
    let mut targets = Vec::with_capacity(m);
    for v in m..n {
        targets.clear();
        let mut total: u64 = degree[..v].iter().sum();
        for _ in 0..m {
            let t = if total == 0 {
                // only reachable from the single-vertex seed graph
                let free: Vec<usize> = (0..v).filter(|&u| !picked[u]).collect();
                free[rng.random_range(0..free.len())]
            } else {
                let mut r = rng.random_range(0..total);
                let mut chosen = usize::MAX;
                for u in 0..v {
                    if picked[u] {
                        continue;
                    }
                    if r < degree[u] {
                        chosen = u;
                        break;
                    }
                    r -= degree[u];
                }
                chosen
            };
            picked[t] = true;
            total -= degree[t];
            targets.push(t);
        }
        for &t in &targets {
            picked[t] = false;
            degree[t] += 1;
            edges.push((t, v));
        }
        degree[v] = m as u64;
    }
    edges.sort_unstable();
    Ok(Graph::from_canonical(n, edges))
}
