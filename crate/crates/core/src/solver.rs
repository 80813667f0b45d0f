//! Convex quasi-clique recovery.
//!
//! The adjacency matrix `A` (with a loop at every vertex) is split as
//! `A = Q + D` by minimizing `||Q||_* + lambda ||A - Q||_1` over symmetric
//! `Q` with entries in [0, 1] and, optionally, `sum(Q) >= gamma eta^2`.
//! Q picks up the dense block as a rank-one all-ones submatrix, D absorbs the
//! scattered edges.
//!
//! The problem is solved by ADMM on the splitting
//!
//! ```text
//! minimize ||L||_* + lambda ||S||_1 + indicator_C(Z)
//! subject to L + S = A,  L = Z
//! ```
//!
//! with `C` the box/sum constraint set, so every step is a closed-form
//! proximal map. The clique-only model (nuclear norm with the non-edges
//! pinned at zero) uses the same machinery with a single split `L = Z`.

pub mod sdpa;

use std::time::Instant;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    adjacency, edge_density, AdjacencyMatrix, EdgeDensity, Gamma, Graph, VertexSet,
};
use crate::linalg::{
    eig_unchecked, nuclear_norm_unchecked, project_box_halfspace_masked, shrink, symmetrized,
    SymmetricMatrix,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Weight of the l1 term; `None` means `1 / sqrt(n)`.
    pub lambda: Option<f64>,
    /// Initial ADMM penalty; `None` means `n^2 / (4 ||A||_1)`.
    pub mu: Option<f64>,
    pub tol_primal: f64,
    pub tol_dual: f64,
    pub max_iter: usize,
    /// Cut for reading the support off the diagonal and binarizing Q.
    pub round_threshold: f64,
    /// Rebalance the penalty when one residual dominates the other.
    pub adaptive_mu: bool,
    /// Keep per-iteration diagnostics in the result.
    pub record_history: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            lambda: None,
            mu: None,
            tol_primal: 1e-6,
            tol_dual: 1e-6,
            max_iter: 2000,
            round_threshold: 0.5,
            adaptive_mu: true,
            record_history: false,
        }
    }
}

impl SolverConfig {
    pub fn with_lambda(lambda: f64) -> Self {
        SolverConfig {
            lambda: Some(lambda),
            ..Default::default()
        }
    }

    pub fn lambda_for(&self, n: usize) -> f64 {
        self.lambda.unwrap_or_else(|| default_lambda(n))
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::input(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        if let Some(l) = self.lambda {
            positive("lambda", l)?;
        }
        if let Some(mu) = self.mu {
            positive("mu", mu)?;
        }
        positive("tol_primal", self.tol_primal)?;
        positive("tol_dual", self.tol_dual)?;
        if self.max_iter == 0 {
            return Err(Error::input("max_iter must be positive"));
        }
        if !(self.round_threshold > 0.0 && self.round_threshold < 1.0) {
            return Err(Error::input(format!(
                "round_threshold must lie in (0, 1), got {}",
                self.round_threshold
            )));
        }
        Ok(())
    }
}

pub fn default_lambda(n: usize) -> f64 {
    1.0 / (n.max(1) as f64).sqrt()
}

/// One ADMM iteration's diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub mu: f64,
    /// Augmented Lagrangian at the previous primal iterate and current duals.
    pub lagrangian_before: f64,
    /// Augmented Lagrangian after this iteration's primal updates, same duals.
    pub lagrangian_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionResult {
    /// Low-rank part, entries in [0, 1].
    pub q: SymmetricMatrix,
    /// Sparse part `A - Q`.
    pub d: SymmetricMatrix,
    /// Size of the recovered block.
    pub eta: usize,
    pub support: VertexSet,
    pub lambda: f64,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub objective: f64,
    pub converged: bool,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub history: Vec<IterationRecord>,
}

/// Iterates carried between solves for warm starts.
#[derive(Debug, Clone)]
struct AdmmState {
    l: DMatrix<f64>,
    s: DMatrix<f64>,
    z: DMatrix<f64>,
    u1: DMatrix<f64>,
    u2: DMatrix<f64>,
    mu: f64,
}

fn check_loop_adjacency(a: &AdjacencyMatrix) -> Result<()> {
    let m = &a.matrix;
    if !m.is_square() {
        return Err(Error::input("adjacency matrix must be square"));
    }
    let n = m.nrows();
    for i in 0..n {
        if m[(i, i)] != 1.0 {
            return Err(Error::input(format!(
                "solver expects a loop at every vertex; entry ({i}, {i}) is {}",
                m[(i, i)]
            )));
        }
        for j in 0..i {
            if m[(i, j)] != m[(j, i)] || !m[(i, j)].is_finite() {
                return Err(Error::input(format!(
                    "adjacency matrix not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

fn default_mu(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows() as f64;
    let l1: f64 = a.iter().map(|x| x.abs()).sum();
    if l1 > 0.0 {
        n * n / (4.0 * l1)
    } else {
        1.0
    }
}

/// Solves the low-rank plus sparse split of a loop-augmented adjacency matrix.
///
/// With `eta = 0` the sum constraint is dropped. A run that hits `max_iter`
/// still returns its last feasible iterate with `converged = false`.
pub fn admm_decompose(
    a: &AdjacencyMatrix,
    gamma: f64,
    eta: usize,
    cfg: &SolverConfig,
) -> Result<DecompositionResult> {
    admm_decompose_from(a, gamma, eta, cfg, None).map(|(r, _)| r)
}

fn admm_decompose_from(
    a: &AdjacencyMatrix,
    gamma: f64,
    eta: usize,
    cfg: &SolverConfig,
    warm: Option<AdmmState>,
) -> Result<(DecompositionResult, AdmmState)> {
    cfg.validate()?;
    check_loop_adjacency(a)?;
    let gamma = Gamma::new(gamma)?;
    let am = &a.matrix;
    let n = am.nrows();
    let target = if eta == 0 {
        f64::NEG_INFINITY
    } else {
        gamma.value() * (eta * eta) as f64
    };
    if target > (n * n) as f64 {
        return Err(Error::input(format!(
            "gamma * eta^2 = {target} exceeds n^2 = {}",
            n * n
        )));
    }
    let lambda = cfg.lambda_for(n);
    let scale = am.norm().max(1.0);

    let mut st = warm.unwrap_or_else(|| AdmmState {
        l: am.clone(),
        s: DMatrix::zeros(n, n),
        z: project_box_halfspace_masked(am, 0.0, 1.0, target, None),
        u1: DMatrix::zeros(n, n),
        u2: DMatrix::zeros(n, n),
        mu: cfg.mu.unwrap_or_else(|| default_mu(am)),
    });

    let mut history = Vec::new();
    let mut nuc_l = if cfg.record_history {
        nuclear_norm_unchecked(&st.l)
    } else {
        0.0
    };
    let (mut r_norm, mut s_norm) = (f64::INFINITY, f64::INFINITY);
    let mut iterations = 0;
    let mut converged = false;

    for it in 1..=cfg.max_iter {
        iterations = it;
        let mu = st.mu;
        let before = cfg
            .record_history
            .then(|| augmented_lagrangian(am, &st, nuc_l, lambda));

        // L: prox of ||.||_* / (2 mu) at the average of the two targets
        let v = ((am - &st.s - &st.u1) + (&st.z - &st.u2)) * 0.5;
        let (l_new, nuc) = svt_with_norm(v, 1.0 / (2.0 * mu));
        st.l = l_new;
        nuc_l = nuc;

        // S: entrywise shrinkage
        let s_prev = std::mem::replace(
            &mut st.s,
            (am - &st.l - &st.u1).map(|x| shrink(x, lambda / mu)),
        );

        // Z: projection onto the box/sum set
        let w = symmetrized(&st.l + &st.u2);
        let z_prev = std::mem::replace(
            &mut st.z,
            project_box_halfspace_masked(&w, 0.0, 1.0, target, None),
        );

        if cfg.record_history {
            let after = augmented_lagrangian(am, &st, nuc_l, lambda);
            history.push(IterationRecord {
                primal_residual: 0.0,
                dual_residual: 0.0,
                mu,
                lagrangian_before: before.unwrap_or(f64::NAN),
                lagrangian_after: after,
            });
        }

        let r1 = &st.l + &st.s - am;
        let r2 = &st.l - &st.z;
        st.u1 += &r1;
        st.u2 += &r2;

        r_norm = (r1.norm_squared() + r2.norm_squared()).sqrt() / scale;
        s_norm = mu * ((&st.s - &s_prev).norm_squared() + (&st.z - &z_prev).norm_squared()).sqrt()
            / scale;
        if let Some(rec) = history.last_mut() {
            rec.primal_residual = r_norm;
            rec.dual_residual = s_norm;
        }

        if r_norm <= cfg.tol_primal && s_norm <= cfg.tol_dual {
            converged = true;
            break;
        }
        if cfg.adaptive_mu && it % 5 == 0 {
            rebalance(&mut st, r_norm, s_norm);
        }
    }

    let q = st.z.clone();
    let d = am - &q;
    let objective = nuclear_norm_unchecked(&q) + lambda * d.iter().map(|x| x.abs()).sum::<f64>();
    let support = extract_support_matrix(&q, cfg.round_threshold);
    Ok((
        DecompositionResult {
            eta: support.len(),
            support,
            q: SymmetricMatrix::from_trusted(q),
            d: SymmetricMatrix::from_trusted(d),
            lambda,
            iterations,
            primal_residual: r_norm,
            dual_residual: s_norm,
            objective,
            converged,
            history,
        },
        st,
    ))
}

fn rebalance(st: &mut AdmmState, r: f64, s: f64) {
    let factor = if r > 10.0 * s {
        2.0
    } else if s > 10.0 * r {
        0.5
    } else {
        return;
    };
    st.mu *= factor;
    // scaled duals carry a 1/mu factor
    st.u1 /= factor;
    st.u2 /= factor;
}

fn augmented_lagrangian(a: &DMatrix<f64>, st: &AdmmState, nuc_l: f64, lambda: f64) -> f64 {
    let l1: f64 = st.s.iter().map(|x| x.abs()).sum();
    let c1 = (&st.l + &st.s - a + &st.u1).norm_squared();
    let c2 = (&st.l - &st.z + &st.u2).norm_squared();
    let d1 = st.u1.norm_squared();
    let d2 = st.u2.norm_squared();
    nuc_l + lambda * l1 + 0.5 * st.mu * (c1 + c2 - d1 - d2)
}

/// Eigenvalue shrinkage returning the shrunk matrix and its nuclear norm.
fn svt_with_norm(v: DMatrix<f64>, tau: f64) -> (DMatrix<f64>, f64) {
    let eig = eig_unchecked(v);
    let nuc = eig.eigenvalues.iter().map(|&l| shrink(l, tau).abs()).sum();
    (symmetrized(eig.recompose_with(|l| shrink(l, tau))), nuc)
}

/// Vertices whose diagonal entry of Q reaches `threshold`. If none do, falls
/// back to vertices with at least one off-diagonal entry at the threshold.
pub fn extract_support(q: &SymmetricMatrix, threshold: f64) -> VertexSet {
    extract_support_matrix(q.as_matrix(), threshold)
}

fn extract_support_matrix(q: &DMatrix<f64>, threshold: f64) -> VertexSet {
    let n = q.nrows();
    let diag: VertexSet = (0..n).filter(|&i| q[(i, i)] >= threshold).collect();
    if !diag.is_empty() {
        return diag;
    }
    (0..n)
        .filter(|&i| (0..n).any(|j| j != i && q[(i, j)] >= threshold))
        .collect()
}

/// 0/1 matrix of off-diagonal entries of Q at or above `threshold`, restricted
/// to `support x support`.
pub fn binarize(q: &SymmetricMatrix, threshold: f64, support: &VertexSet) -> AdjacencyMatrix {
    let n = q.n();
    let inside = support.indicator(n);
    let m = DMatrix::from_fn(n, n, |i, j| {
        if i != j && inside[i] && inside[j] && q[(i, j)] >= threshold {
            1.0
        } else {
            0.0
        }
    });
    AdjacencyMatrix {
        matrix: m,
        loops_added: false,
    }
}

/// Keeps an entry of `q_bin` only where it agrees with the graph adjacency.
pub fn cleanup(q_bin: &AdjacencyMatrix, a_star: &AdjacencyMatrix) -> Result<AdjacencyMatrix> {
    if q_bin.matrix.shape() != a_star.matrix.shape() {
        return Err(Error::input(format!(
            "dimension mismatch: {:?} vs {:?}",
            q_bin.matrix.shape(),
            a_star.matrix.shape()
        )));
    }
    let m = q_bin
        .matrix
        .zip_map(&a_star.matrix, |q, a| if q == a { q } else { 0.0 });
    Ok(AdjacencyMatrix {
        matrix: m,
        loops_added: false,
    })
}

/// How the block size `eta` in the sum constraint is chosen.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Drop the sum constraint; eta is read off the solution.
    #[default]
    Unconstrained,
    /// Solve once with the given eta.
    FixedEta(usize),
    /// Walk eta down from n, keeping the first support that is a gamma-clique
    /// of size at least eta.
    DescendingEta,
}

impl std::str::FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unconstrained" => Ok(Strategy::Unconstrained),
            "descending_eta" | "descending" => Ok(Strategy::DescendingEta),
            other => match other.strip_prefix("fixed_eta:").or_else(|| other.strip_prefix("fixed:")) {
                Some(k) => k
                    .parse()
                    .map(Strategy::FixedEta)
                    .map_err(|_| Error::input(format!("bad eta in strategy {other:?}"))),
                None => Err(Error::input(format!(
                    "unknown strategy {other:?}; expected unconstrained, fixed_eta:<k> or descending_eta"
                ))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub decomposition: DecompositionResult,
    pub recovered_set: VertexSet,
    pub recovered_density: EdgeDensity,
    /// Recovered block restricted to the graph's edges.
    pub q_star: AdjacencyMatrix,
    pub strategy_used: Strategy,
    pub solve_seconds: f64,
}

/// Recovers a dense block of `g` at density `gamma`.
///
/// Loops are added to the adjacency before solving. Returns
/// [`Error::NonConvergence`] carrying the best attempt when no solve reached
/// its tolerances.
pub fn recover(
    g: &Graph,
    gamma: f64,
    cfg: &SolverConfig,
    strategy: Strategy,
) -> Result<RecoveryResult> {
    cfg.validate()?;
    let gamma_exact = Gamma::new(gamma)?;
    let a = adjacency(g, true);
    let start = Instant::now();

    let (decomposition, recovered_set) = match strategy {
        Strategy::Unconstrained => {
            let d = admm_decompose(&a, gamma, 0, cfg)?;
            let s = d.support.clone();
            (d, s)
        }
        Strategy::FixedEta(k) => {
            if k > g.n() {
                return Err(Error::input(format!("eta = {k} exceeds n = {}", g.n())));
            }
            let d = admm_decompose(&a, gamma, k, cfg)?;
            let s = d.support.clone();
            (d, s)
        }
        Strategy::DescendingEta => descending(g, &a, gamma_exact, cfg)?,
    };
    let solve_seconds = start.elapsed().as_secs_f64();

    let converged = decomposition.converged;
    let result = finish(
        g,
        decomposition,
        recovered_set,
        strategy,
        solve_seconds,
        cfg,
    )?;
    if converged {
        Ok(result)
    } else {
        Err(Error::NonConvergence {
            message: format!(
                "no solve met tolerances within {} iterations (strategy {:?})",
                cfg.max_iter, strategy
            ),
            best: Some(Box::new(result)),
        })
    }
}

fn descending(
    g: &Graph,
    a: &AdjacencyMatrix,
    gamma: Gamma,
    cfg: &SolverConfig,
) -> Result<(DecompositionResult, VertexSet)> {
    let n = g.n();
    let mut warm = None;
    let mut any_converged = false;
    let mut last = None;
    for eta in (1..=n).rev() {
        let (mut d, st) = admm_decompose_from(a, gamma.value(), eta, cfg, warm)?;
        warm = Some(st);
        any_converged |= d.converged;
        let s = d.support.clone();
        if s.len() >= eta && edge_density(g, &s)?.meets(gamma) {
            d.converged = any_converged;
            return Ok((d, s));
        }
        last = Some(d);
    }
    let Some(mut d) = last else {
        // empty graph
        let d = admm_decompose(a, gamma.value(), 0, cfg)?;
        return Ok((d, VertexSet::empty()));
    };
    // eta = 1 admits any singleton; take the heaviest diagonal entry
    let best = (0..n)
        .max_by(|&i, &j| {
            d.q[(i, i)]
                .partial_cmp(&d.q[(j, j)])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(j.cmp(&i))
        })
        .expect("n >= 1");
    d.converged = any_converged;
    Ok((d, VertexSet::new(vec![best])))
}

fn finish(
    g: &Graph,
    mut decomposition: DecompositionResult,
    recovered_set: VertexSet,
    strategy: Strategy,
    solve_seconds: f64,
    cfg: &SolverConfig,
) -> Result<RecoveryResult> {
    let a_star = adjacency(g, false);
    let q_bin = binarize(&decomposition.q, cfg.round_threshold, &recovered_set);
    let q_star = cleanup(&q_bin, &a_star)?;
    decomposition.eta = recovered_set.len();
    decomposition.support = recovered_set.clone();
    Ok(RecoveryResult {
        recovered_density: edge_density(g, &recovered_set)?,
        decomposition,
        recovered_set,
        q_star,
        strategy_used: strategy,
        solve_seconds,
    })
}

/// Nuclear-norm clique model: minimize `||X||_*` over symmetric X in [0, 1]
/// with `sum(X) >= n_c^2` and `X_ij = 0` off the edge set (diagonal free).
pub fn solve_nnm1(
    a: &AdjacencyMatrix,
    n_c: usize,
    cfg: &SolverConfig,
) -> Result<DecompositionResult> {
    cfg.validate()?;
    check_loop_adjacency(a)?;
    let am = &a.matrix;
    let n = am.nrows();
    if n_c > n {
        return Err(Error::input(format!("n_c = {n_c} exceeds n = {n}")));
    }
    let pinned: Vec<bool> = am.iter().map(|&x| x == 0.0).collect();
    let target = (n_c * n_c) as f64;
    let capacity = pinned.iter().filter(|&&p| !p).count() as f64;
    let scale = am.norm().max(1.0);

    if target > capacity {
        let q = am.clone();
        return Ok(DecompositionResult {
            support: extract_support_matrix(&q, cfg.round_threshold),
            eta: 0,
            d: SymmetricMatrix::zeros(n),
            objective: nuclear_norm_unchecked(&q),
            q: SymmetricMatrix::from_trusted(q),
            lambda: 0.0,
            iterations: 0,
            primal_residual: f64::INFINITY,
            dual_residual: f64::INFINITY,
            converged: false,
            history: Vec::new(),
        })
        .map(|mut r| {
            r.eta = r.support.len();
            r
        });
    }

    let mut mu = cfg.mu.unwrap_or_else(|| default_mu(am));
    let mut z = project_box_halfspace_masked(am, 0.0, 1.0, target, Some(&pinned));
    let mut u = DMatrix::zeros(n, n);
    let (mut r_norm, mut s_norm) = (f64::INFINITY, f64::INFINITY);
    let mut iterations = 0;
    let mut converged = false;

    for it in 1..=cfg.max_iter {
        iterations = it;
        let (l, _) = svt_with_norm(&z - &u, 1.0 / mu);
        let w = symmetrized(&l + &u);
        let z_prev = std::mem::replace(
            &mut z,
            project_box_halfspace_masked(&w, 0.0, 1.0, target, Some(&pinned)),
        );
        let r = &l - &z;
        u += &r;
        r_norm = r.norm() / scale;
        s_norm = mu * (&z - &z_prev).norm() / scale;
        if r_norm <= cfg.tol_primal && s_norm <= cfg.tol_dual {
            converged = true;
            break;
        }
        if cfg.adaptive_mu && it % 5 == 0 {
            let factor = if r_norm > 10.0 * s_norm {
                2.0
            } else if s_norm > 10.0 * r_norm {
                0.5
            } else {
                1.0
            };
            mu *= factor;
            u /= factor;
        }
    }

    let support = extract_support_matrix(&z, cfg.round_threshold);
    let d = am - &z;
    Ok(DecompositionResult {
        eta: support.len(),
        support,
        objective: nuclear_norm_unchecked(&z),
        q: SymmetricMatrix::from_trusted(z),
        d: SymmetricMatrix::from_trusted(d),
        lambda: 0.0,
        iterations,
        primal_residual: r_norm,
        dual_residual: s_norm,
        converged,
        history: Vec::new(),
    })
}
